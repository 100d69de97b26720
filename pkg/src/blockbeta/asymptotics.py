"""Boundary-layer integrals, their growth laws, and rate fitting.

The integral

    I(n) = int_{[0,1]^m} (1 - c x_1...x_m)^(n-alpha) prod x_i^{a_i} dx

with a_1 >= ... >= a_m > 0 and c in (0,1] controls expected face counts.
Substituting t = c n x_1...x_m in the innermost variable and integrating
the outer coordinates exactly turns it into a single smooth integral

    I(n) = (cn)^-(a_m+1) int_0^{cn} (1 - t/n)^(n-alpha) t^{a_m} W(t/(cn)) dt

where W(u) is the elementary outer integral (closed form for m <= 3).
Its leading term is Gamma(a_l+1) (cn)^-(a_l+1) (ln n)^(m-l) divided by
prod_{i<l} (a_i - a_l), with l the first index tied with a_m.

fit_rate estimates growth exponents from simulated means; efron_check
tests the exact identity E f_0(hull of n) = n (1 - E vol ratio of n-1)
for uniform sampling, both sides by independent Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import BetaParams, BlockStructure, RatePrediction
from .hull import contains_points, convex_hull
from .report import Check, Report
from .sampler import as_generator, sample_block_beta

TIE_TOL = 1e-12


@dataclass(frozen=True)
class AwConfig:
    """Parameters of the boundary-layer integral; a is sorted descending."""

    m: int
    alpha: float
    a: tuple[float, ...]
    c: float = 1.0

    def __post_init__(self):
        if int(self.m) < 1:
            raise ValueError("m must be >= 1")
        a = tuple(sorted((float(x) for x in self.a), reverse=True))
        if len(a) != int(self.m):
            raise ValueError(f"expected {self.m} exponents, got {len(a)}")
        if a[-1] <= 0:
            raise ValueError("exponents must be positive")
        if float(self.alpha) < 0:
            raise ValueError("alpha must be nonnegative")
        if not (0.0 < float(self.c) <= 1.0):
            raise ValueError("c must lie in (0, 1]")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", float(self.c))


def _outer_weight(cfg: AwConfig):
    """W(u) = integral over the outer m-1 coordinates of the region
    {prod x_i >= u} with weights x_i^(a_i - a_m - 1); closed form."""
    a = cfg.a
    m = cfg.m
    if m == 1:
        return lambda u: 1.0
    if m == 2:
        delta = a[0] - a[1]
        if delta > TIE_TOL:
            return lambda u: -math.expm1(delta * math.log(u)) / delta
        return lambda u: -math.log(u)
    if m == 3:
        d1, d2 = a[0] - a[2], a[1] - a[2]
        if d2 > TIE_TOL:
            if d1 - d2 > TIE_TOL:
                def w(u):
                    lu = math.log(u)
                    return (
                        -math.expm1(d1 * lu) / d1
                        + math.exp(d2 * lu) * math.expm1((d1 - d2) * lu) / (d1 - d2)
                    ) / d2
            else:
                def w(u):
                    lu = math.log(u)
                    return (-math.expm1(d1 * lu) / d1 + math.exp(d1 * lu) * lu) / d1
            return w
        if d1 > TIE_TOL:
            def w(u):
                lu = math.log(u)
                return (-lu - (-math.expm1(d1 * lu)) / d1) / d1
            return w
        return lambda u: 0.5 * math.log(u) ** 2
    raise ValueError(f"deterministic evaluation supports m <= 3, got m={m}")


def aw_integral_numeric(cfg: AwConfig, n: float) -> float:
    """Deterministic evaluation of I(n), m <= 3.

    Accuracy is limited by the 1-D adaptive quadrature (relative
    tolerance ~1e-10 requested); the integrand is evaluated in log
    space to stay stable at large n.
    """
    n = float(n)
    if n < max(3.0, 2.0 * cfg.alpha):
        raise ValueError(f"n={n} too small for alpha={cfg.alpha}")
    w = _outer_weight(cfg)
    am = cfg.a[-1]
    cn = cfg.c * n
    power = n - cfg.alpha

    def integrand(t: float) -> float:
        if t <= 0.0 or t >= cn:
            return 0.0
        u = t / cn
        lg = power * math.log1p(-t / n) + am * math.log(t)
        return math.exp(lg) * w(u)

    # the mass sits at t = O(log n); integrate outward in decades and
    # stop once a block stops contributing
    cuts = [0.0, 1.0]
    while cuts[-1] < cn:
        cuts.append(min(cuts[-1] * 10.0, cn))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        piece, _ = integrate.quad(
            integrand, lo, hi, epsabs=1e-300, epsrel=1e-10, limit=200
        )
        total += piece
        if piece < 1e-14 * total and lo >= 1.0:
            break
    return cn ** -(am + 1.0) * total


def aw_asymptotic(cfg: AwConfig, n: float) -> float:
    """Leading-order growth law of I(n).

    With l the smallest index tied with a_m (ties within 1e-12):
    Gamma(a_l + 1) (cn)^-(a_l+1) (ln n)^(m-l) / prod_{i<l} (a_i - a_l).
    """
    n = float(n)
    a = cfg.a
    ell = cfg.m
    while ell > 1 and a[ell - 2] - a[-1] <= TIE_TOL * max(1.0, abs(a[-1])):
        ell -= 1
    a_l = a[ell - 1]
    denom = 1.0
    for i in range(ell - 1):
        denom *= a[i] - a_l
    return (
        math.gamma(a_l + 1.0)
        * (cfg.c * n) ** -(a_l + 1.0)
        * math.log(n) ** (cfg.m - ell)
        / denom
    )


@dataclass(frozen=True)
class RateFit:
    """Fitted growth law mean ~ exp(log_coeff) n^exponent (ln n)^log_power."""

    exponent: float
    exponent_se: float
    log_coeff: float
    log_power: float
    model: str
    r_squared: float


class InsufficientSpan(ValueError):
    """Fit data must cover >= 5 distinct n over >= 1.5 decades."""


def _as_triples(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("data must be (n, mean, se) triples")
    if np.any(arr[:, 0] < 3) or np.any(arr[:, 1] <= 0):
        raise ValueError("need n >= 3 and positive means")
    return arr


def fit_rate(data, predicted: RatePrediction, model: str = "fixed") -> RateFit:
    """Weighted least squares for the growth exponent of mean counts.

    data: triples (n, mean, se).  With model="fixed" the (ln n) power is
    pinned to predicted.log_power and only slope and intercept are free;
    model="free" also fits the (ln ln n) coefficient, as a diagnostic.
    Weights are 1/se^2 on the log scale; rows with se == 0 switch the
    fit to unweighted.
    """
    arr = _as_triples(data)
    ns = np.unique(arr[:, 0])
    if len(ns) < 5:
        raise InsufficientSpan(f"need >= 5 distinct n values, got {len(ns)}")
    span = math.log10(ns.max() / ns.min())
    if span < 1.5:
        raise InsufficientSpan(f"n spans {span:.2f} decades, need >= 1.5")

    n, mean, se = arr[:, 0], arr[:, 1], arr[:, 2]
    ln_n = np.log(n)
    ln_ln_n = np.log(np.log(n))
    y = np.log(mean)

    if model == "fixed":
        p = float(predicted.log_power)
        y = y - p * ln_ln_n
        cols = [np.ones_like(ln_n), ln_n]
        label = f"fixed_log_power({predicted.log_power})"
    elif model == "free":
        cols = [np.ones_like(ln_n), ln_n, ln_ln_n]
        label = "free"
    else:
        raise ValueError(f"model must be 'fixed' or 'free', got {model!r}")
    X = np.stack(cols, axis=1)

    weighted = np.all(se > 0)
    if weighted:
        wts = (mean / se) ** 2          # delta method: var(log mean) = (se/mean)^2
        sw = np.sqrt(wts)
        coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
        cov = np.linalg.pinv((X * wts[:, None]).T @ X)
    else:
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        resid = y - X @ coef
        dof = max(len(y) - X.shape[1], 1)
        sigma2 = float(resid @ resid) / dof
        cov = np.linalg.pinv(X.T @ X) * sigma2
        wts = np.ones_like(y)

    fitted = X @ coef
    resid = y - fitted
    tss = float(np.sum(wts * (y - np.average(y, weights=wts)) ** 2))
    rss = float(np.sum(wts * resid ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0

    return RateFit(
        exponent=float(coef[1]),
        exponent_se=float(math.sqrt(max(cov[1, 1], 0.0))),
        log_coeff=float(coef[0]),
        log_power=float(predicted.log_power) if model == "fixed" else float(coef[2]),
        model=label,
        r_squared=r2,
    )


def efron_check(
    bs: BlockStructure,
    n: int,
    reps: int = 200,
    rng=None,
    mc_points: int = 20_000,
) -> Report:
    """Mean vertex count vs the volume-ratio identity, uniform sampling.

    E f_0(hull of n points) = n (1 - E Vol(hull of n-1)/Vol(container)).
    The left side averages vertex counts; the right side estimates each
    volume ratio by hit-or-miss membership of fresh uniform probes.
    Passes when the 3-sigma intervals overlap.
    """
    # at n = d+1 the identity is vacuous (f_0 = n a.s., the n-1 point
    # hull is flat) and the volume estimator has no hull to probe
    if n < bs.dim + 2:
        raise ValueError(f"need n >= d+2 = {bs.dim + 2}, got {n}")
    gen = as_generator(rng) if rng is not None else np.random.default_rng(0)
    bp = BetaParams.uniform(bs.m)
    f0 = np.empty(reps)
    ratio = np.empty(reps)
    for r in range(reps):
        pts = sample_block_beta(bs, bp, gen, size=n)
        f0[r] = len(convex_hull(pts).vertex_ids)
        pts2 = sample_block_beta(bs, bp, gen, size=n - 1)
        hull2 = convex_hull(pts2)
        probes = sample_block_beta(bs, bp, gen, size=mc_points)
        ratio[r] = contains_points(hull2, probes).mean()
    lhs = float(f0.mean())
    se_l = float(f0.std(ddof=1) / math.sqrt(reps))
    rhs = float(n * (1.0 - ratio.mean()))
    se_r = float(n * ratio.std(ddof=1) / math.sqrt(reps))
    gapped = abs(lhs - rhs) <= 3.0 * (se_l + se_r)
    rep = Report(title=f"vertex-count identity dims={bs.dims} n={n}")
    rep.add(Check(
        name="f0_vs_volume_identity",
        value=lhs, reference=rhs,
        stat_name="z",
        stat=(lhs - rhs) / math.hypot(se_l, se_r) if se_l + se_r > 0 else 0.0,
        passed=gapped,
    ))
    return rep
