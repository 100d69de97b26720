"""Exact samplers for beta-weighted ball laws.

The law on B_2^k with weight beta > -1 has density
c_{beta,k} (1 - ||y||^2)^beta, where

    c_{beta,k} = Gamma(k/2 + beta + 1) / (pi^{k/2} Gamma(beta + 1)).

Its squared radius is Beta(k/2, beta + 1) distributed and independent
of the (uniform) direction, so sampling needs one beta variate and one
normalized Gaussian per point.  No rejection, valid for every beta > -1.
Block products draw each factor independently and concatenate.

Reproducibility contract: a stream is identified by (root_seed,
stream_index); equal identifiers give bit-identical draws.  Within one
generator the draw order is fixed (directions first, then radii, block
by block), so vectorized and repeated calls stay deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import BetaParams, BlockStructure, block_norms


@dataclass(frozen=True)
class BetaBallLaw:
    """Beta-weighted law on the unit ball of dimension dim."""

    dim: int
    beta: float

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if float(self.beta) <= -1.0:
            raise ValueError(f"beta must exceed -1, got {self.beta}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def norm_const(self) -> float:
        return ball_density_const(self.dim, float(self.beta))


@dataclass(frozen=True)
class RngStream:
    """Named random stream: (root_seed, stream_index) -> generator."""

    root_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([int(self.root_seed), int(self.stream_index)])
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def ball_density_const(k: int, beta: float) -> float:
    """c_{beta,k}, the normalizing constant of the weighted ball law."""
    return math.exp(
        special.gammaln(k / 2.0 + beta + 1.0)
        - special.gammaln(beta + 1.0)
        - (k / 2.0) * math.log(math.pi)
    )


def ball_volume(k: int) -> float:
    """Volume of the Euclidean unit ball B_2^k."""
    return math.pi ** (k / 2.0) / special.gamma(k / 2.0 + 1.0)


def container_volume(bs: BlockStructure) -> float:
    """Volume of the ball product, prod_i Vol(B_2^{d_i})."""
    v = 1.0
    for d in bs.dims:
        v *= ball_volume(d)
    return v


def sample_beta_ball(law: BetaBallLaw, rng, size: int | None = None) -> np.ndarray:
    """Draw from the beta-weighted ball law; shape (size, dim) or (dim,)."""
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    dirs = gen.standard_normal((n, law.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.sqrt(gen.beta(law.dim / 2.0, float(law.beta) + 1.0, size=n))
    pts = dirs * radii[:, None]
    return pts[0] if size is None else pts


def sample_block_beta(
    bs: BlockStructure, bp: BetaParams, rng, size: int | None = None
) -> np.ndarray:
    """Draw block-beta points in the ball product; blocks independent."""
    if bs.m != len(bp.betas):
        raise ValueError(f"{bs.m} blocks but {len(bp.betas)} beta weights")
    gen = as_generator(rng)
    n = 1 if size is None else int(size)
    parts = [
        sample_beta_ball(BetaBallLaw(d, float(b)), gen, size=n)
        for d, b in zip(bs.dims, bp.betas)
    ]
    pts = np.concatenate(parts, axis=1)
    return pts[0] if size is None else pts


def density(bs: BlockStructure, bp: BetaParams, x) -> np.ndarray:
    """Block-beta density at x (batch axes allowed); zero outside."""
    if bs.m != len(bp.betas):
        raise ValueError(f"{bs.m} blocks but {len(bp.betas)} beta weights")
    norms = block_norms(bs, x)
    betas = np.asarray(bp.as_floats())
    inside = np.all(norms <= 1.0, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        # (1 - r^2)^beta is +inf on the boundary when beta < 0; that is
        # the honest density value there.
        factors = (1.0 - np.minimum(norms, 1.0) ** 2) ** betas
    consts = np.prod(
        [ball_density_const(d, float(b)) for d, b in zip(bs.dims, bp.betas)]
    )
    out = consts * np.prod(factors, axis=-1)
    return np.where(inside, out, 0.0)
