"""Block geometry of ball products and growth-rate prediction.

A container is the product B_2^{d_1} x ... x B_2^{d_m} of Euclidean
unit balls, sitting inside R^d with d = d_1 + ... + d_m.  Its gauge is
the blockwise max norm max_i ||x^(i)||_2, and its support function is
the sum of the block norms.  The expected facet count of the convex
hull of n beta-weighted samples grows like

    n^((k_max - 1)/(k_max + 1)) * (ln n)^(#argmax - 1)

where k_i = (d_i + beta_i)/(1 + beta_i) is the beta-adjusted dimension
of block i.  Everything here is exact bookkeeping; no simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

# Relative tolerance for k_i ties when beta weights are floats.  Exact
# rational comparison is used whenever every weight is an int/Fraction.
TIE_REL_TOL = 1e-12


@dataclass(frozen=True)
class BlockStructure:
    """Dimensions (d_1, ..., d_m) of the ball factors, each >= 1."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("need at least one block")
        if any(d < 1 for d in dims):
            raise ValueError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, pos = [], 0
        for d in self.dims:
            out.append(pos)
            pos += d
        return tuple(out)

    def split(self, x) -> list[np.ndarray]:
        """Views of the m block slices of x (batch axes allowed in front)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {x.shape[-1]}")
        return [x[..., off:off + d] for off, d in zip(self.offsets, self.dims)]


@dataclass(frozen=True)
class BetaParams:
    """One weight beta_i > -1 per block.

    Weights may be ints, Fractions or floats.  Rational weights keep
    rate prediction exact; floats fall back to tolerance comparisons.
    """

    betas: tuple

    def __post_init__(self):
        betas = tuple(self.betas)
        if len(betas) == 0:
            raise ValueError("need at least one weight")
        if any(float(b) <= -1.0 for b in betas):
            raise ValueError(f"beta weights must exceed -1, got {betas}")
        object.__setattr__(self, "betas", betas)

    @classmethod
    def uniform(cls, m: int) -> "BetaParams":
        return cls((0,) * m)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(b) for b in self.betas)


@dataclass(eq=False)
class BlockPoint:
    """A point of R^d together with its block decomposition."""

    structure: BlockStructure
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.shape != (self.structure.dim,):
            raise ValueError(
                f"expected shape ({self.structure.dim},), got {self.coords.shape}"
            )

    def block(self, i: int) -> np.ndarray:
        off = self.structure.offsets[i]
        return self.coords[off:off + self.structure.dims[i]]

    def blocks(self) -> list[np.ndarray]:
        return self.structure.split(self.coords)

    def norm(self) -> float:
        return float(norm(self.structure, self.coords))


@dataclass(frozen=True)
class RatePrediction:
    """Predicted growth of the expected facet count.

    mean facet count ~ const * n**exponent * (ln n)**log_power
    """

    k: tuple[float, ...]
    k_max: float
    count_k_max: int
    exponent: float
    log_power: int


def _check_pair(bs: BlockStructure, bp: BetaParams):
    if bs.m != len(bp.betas):
        raise ValueError(
            f"{bs.m} blocks but {len(bp.betas)} beta weights"
        )


def block_norms(bs: BlockStructure, x) -> np.ndarray:
    """Euclidean norm of each block slice; shape (..., m)."""
    return np.stack(
        [np.linalg.norm(b, axis=-1) for b in bs.split(x)], axis=-1
    )


def norm(bs: BlockStructure, x) -> np.ndarray:
    """Gauge of the ball product: max over blocks of the block norm."""
    return block_norms(bs, x).max(axis=-1)


def contains(bs: BlockStructure, x, tol: float = 0.0):
    """Whether x lies in the container (every block norm <= 1 + tol)."""
    return norm(bs, x) <= 1.0 + tol


def support_function(bs: BlockStructure, w) -> np.ndarray:
    """h(w) = sum_i ||w^(i)||_2, the container's support function."""
    return block_norms(bs, w).sum(axis=-1)


def _is_rational(b) -> bool:
    return isinstance(b, (int, Fraction)) and not isinstance(b, bool)


def predict_rate(bs: BlockStructure, bp: BetaParams) -> RatePrediction:
    """Facet-count growth rate for hulls of n beta-weighted samples.

    Requires beta_i >= 0.  Ties among the adjusted dimensions k_i are
    decided exactly when all weights are rational, else within
    TIE_REL_TOL; the tie count sets the log power.
    """
    _check_pair(bs, bp)
    if any(float(b) < 0 for b in bp.betas):
        raise ValueError("rate prediction requires nonnegative beta weights")

    if all(_is_rational(b) for b in bp.betas):
        ks = [
            (Fraction(d) + Fraction(b)) / (1 + Fraction(b))
            for d, b in zip(bs.dims, bp.betas)
        ]
        k_max = max(ks)
        count = sum(k == k_max for k in ks)
        exponent = float((k_max - 1) / (k_max + 1))
        k_float = tuple(float(k) for k in ks)
        k_max_f = float(k_max)
    else:
        ks = [(d + float(b)) / (1.0 + float(b)) for d, b in zip(bs.dims, bp.betas)]
        k_max_f = max(ks)
        tol = TIE_REL_TOL * max(1.0, abs(k_max_f))
        count = sum(k_max_f - k <= tol for k in ks)
        exponent = (k_max_f - 1.0) / (k_max_f + 1.0)
        k_float = tuple(ks)

    return RatePrediction(
        k=k_float,
        k_max=k_max_f,
        count_k_max=count,
        exponent=exponent,
        log_power=count - 1,
    )


def volume_deficit_rate(bs: BlockStructure) -> tuple[float, int]:
    """Decay rate of the expected relative volume deficit, uniform case.

    Returns (exponent, log_power) with exponent = -2/(d_max + 1) and
    log_power = (#blocks of dimension d_max) - 1.
    """
    d_max = max(bs.dims)
    count = bs.dims.count(d_max)
    return -2.0 / (d_max + 1.0), count - 1
