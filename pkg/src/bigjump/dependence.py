"""Samplers for finite sequences with a common marginal and controlled
orthant dependence, plus empirical estimation of the dominating
coefficients that bound joint orthant probabilities.

A sequence is generated as a Markov chain of uniforms (the copula layer)
pushed through the marginal's tail-inverse.  Supported structures:

``independent``    product copula; certified dominating coefficients 1.
``fgm_pair``       a single bivariate FGM-coupled pair (n = 2 only), with
                   certified dominating coefficients ``1 + |theta|``.
``fgm_chain``      first-order Markov chain whose consecutive pairs follow
                   the FGM copula ``C(u, v) = uv(1 + theta(1-u)(1-v))``.
                   No certificate; an empirical stress structure.
``gaussian_ar1``   latent standard-normal AR(1) mapped through the normal
                   CDF and then the marginal quantile.  No certificate.
``comonotone``     every coordinate repeats one uniform.  A deliberately
                   degenerate diagnostic structure whose upper-orthant
                   ratio grows without bound; used to exercise
                   non-widely-dependent detection, never certified.

Uniform consumption per sequence of length n: independent, fgm_pair,
fgm_chain and gaussian_ar1 consume exactly n uniforms from the caller's
stream; comonotone consumes 1.  Everything is a pure function of the
stream, so runs replay exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from . import marginals as mg
from .errors import AllGridPointsSkipped, DomainError, InvalidArg, NoClosedFormTail
from .streams import run_chunks, tree_sum

_KINDS = ("independent", "fgm_pair", "fgm_chain", "gaussian_ar1", "comonotone")


@dataclass(frozen=True)
class DependenceSpec:
    """How coordinates of a sampled sequence relate to each other."""

    kind: str
    theta: float = 0.0
    rho: float = 0.0
    claimed_gU_exponent: Optional[float] = None
    claimed_gL_exponent: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise DomainError(f"unknown dependence kind {self.kind!r}")
        if self.kind in ("fgm_pair", "fgm_chain") and not -1.0 <= self.theta <= 1.0:
            raise DomainError("FGM parameter theta must lie in [-1, 1]")
        if self.kind == "gaussian_ar1" and not -1.0 < self.rho < 1.0:
            raise DomainError("AR(1) parameter rho must lie in (-1, 1)")

    def __str__(self) -> str:
        return to_text(self)


def independent() -> DependenceSpec:
    return DependenceSpec("independent")


def fgm_pair(theta: float) -> DependenceSpec:
    return DependenceSpec("fgm_pair", theta=float(theta))


def fgm_chain(theta: float, claimed_gU_exponent: float | None = None,
              claimed_gL_exponent: float | None = None) -> DependenceSpec:
    return DependenceSpec("fgm_chain", theta=float(theta),
                          claimed_gU_exponent=claimed_gU_exponent,
                          claimed_gL_exponent=claimed_gL_exponent)


def gaussian_ar1(rho: float, claimed_gU_exponent: float | None = None,
                 claimed_gL_exponent: float | None = None) -> DependenceSpec:
    return DependenceSpec("gaussian_ar1", rho=float(rho),
                          claimed_gU_exponent=claimed_gU_exponent,
                          claimed_gL_exponent=claimed_gL_exponent)


def comonotone() -> DependenceSpec:
    return DependenceSpec("comonotone")


def certificate(dep: DependenceSpec, n: int) -> Optional[tuple[float, float]]:
    """Certified ``(g_U(n), g_L(n))`` when known in closed form, else None.

    Only the product structure (1 for every n) and the single FGM pair
    (``1 + |theta|`` at n = 2, the supremum of the copula density ratio
    over the unit square) carry certificates.  Chains and latent-Gaussian
    structures are empirical; their claimed exponents are metadata only.
    """
    if dep.kind == "independent":
        return (1.0, 1.0)
    if dep.kind == "fgm_pair" and n == 2:
        g = 1.0 + abs(dep.theta)
        return (g, g)
    return None


def to_text(dep: DependenceSpec) -> str:
    if dep.kind == "independent":
        return "independent"
    if dep.kind == "comonotone":
        return "comonotone"
    if dep.kind == "fgm_pair":
        return f"fgm_pair(theta={mg._fmt(dep.theta)})"
    if dep.kind == "fgm_chain":
        return f"fgm_chain(theta={mg._fmt(dep.theta)})"
    return f"gaussian_ar1(rho={mg._fmt(dep.rho)})"


# ---------------------------------------------------------------------------
# copula layer

def fgm_conditional_inverse(u_prev: np.ndarray, w: np.ndarray, theta: float) -> np.ndarray:
    """Invert the FGM conditional CDF ``F(v | u_prev) = w``.

    The conditional CDF is ``v (1 + a (1 - v))`` with ``a = theta (1 - 2 u_prev)``,
    a quadratic in ``v``; of its two roots the one in [0, 1] is
    ``2w / (1 + a + sqrt((1 + a)^2 - 4 a w))``, written in the cancellation-free
    form so that ``theta = 0`` returns ``w`` bitwise.
    """
    a = theta * (1.0 - 2.0 * u_prev)
    disc = (1.0 + a) ** 2 - 4.0 * a * w
    return 2.0 * w / (1.0 + a + np.sqrt(disc))


class UniformChain:
    """Batch of parallel uniform chains sharing one dependence structure.

    ``step(k)`` returns a ``(size, k)`` block of marginally-uniform values
    and advances the chain state, so consecutive blocks continue the same
    dependent sequence; the law of the assembled sequence does not depend
    on how it was blocked.
    """

    def __init__(self, dep: DependenceSpec, size: int, stream) -> None:
        self.dep = dep
        self.size = int(size)
        self.stream = stream
        self._carry: np.ndarray | None = None  # last uniform (FGM) or latent normal (AR1)

    def step(self, k: int = 1) -> np.ndarray:
        kind = self.dep.kind
        if kind == "comonotone":
            if self._carry is None:
                self._carry = self._uniforms(1)[:, 0]
            return np.repeat(self._carry[:, None], k, axis=1)
        raw = self._uniforms(k)
        if kind == "independent":
            return raw
        if kind in ("fgm_pair", "fgm_chain"):
            out = np.empty_like(raw)
            prev = self._carry
            for j in range(k):
                if prev is None:
                    col = raw[:, 0]
                else:
                    col = fgm_conditional_inverse(prev, raw[:, j], self.dep.theta)
                out[:, j] = col
                prev = col
            self._carry = prev
            return out
        # gaussian_ar1
        z = norm.ppf(raw)
        rho = self.dep.rho
        sig = np.sqrt(1.0 - rho * rho)
        out = np.empty_like(raw)
        prev = self._carry
        for j in range(k):
            col = z[:, j] if prev is None else rho * prev + sig * z[:, j]
            out[:, j] = col
            prev = col
        self._carry = prev
        return norm.cdf(out)

    def _uniforms(self, k: int) -> np.ndarray:
        u = np.asarray(self.stream.random((self.size, k)), dtype=float)
        return np.maximum(u, np.finfo(float).tiny)


def sample_uniform_sequences(dep: DependenceSpec, n: int, count: int, stream) -> np.ndarray:
    """``(count, n)`` block of dependent uniform sequences."""
    if n < 1:
        raise InvalidArg("sequence length n must be >= 1")
    if dep.kind == "fgm_pair" and n != 2:
        raise DomainError("fgm_pair generates pairs only (n = 2)")
    return UniformChain(dep, count, stream).step(n)


def sample_sequences(dep: DependenceSpec, marginal: mg.MarginalSpec, n: int,
                     count: int, stream) -> np.ndarray:
    """``(count, n)`` block of sequences with the given marginal law."""
    if not mg.has_closed_form(marginal):
        if dep.kind != "independent":
            raise NoClosedFormTail(
                "dependent sampling needs a closed-form marginal quantile")
        flat = mg.sample_iid(marginal, count * n, stream)
        return flat.reshape(count, n)
    u = sample_uniform_sequences(dep, n, count, stream)
    return mg.quantile(marginal, u)


def sample_sequence(dep: DependenceSpec, marginal: mg.MarginalSpec, n: int, stream) -> np.ndarray:
    """One length-``n`` sequence; coordinatewise law is exactly ``marginal``."""
    return sample_sequences(dep, marginal, n, 1, stream)[0]


# ---------------------------------------------------------------------------
# dominating-coefficient estimation

@dataclass(frozen=True)
class DominatingEstimate:
    """Empirical upper/lower orthant ratio scan.

    ``gU_hat``/``gL_hat`` are the maxima over the retained grid of
    P(joint orthant) divided by the product of marginal probabilities.
    Grid points whose product probability falls below ``10 / samples`` are
    skipped rather than clipped (clipping would bias the maxima downward
    silently); their indices are recorded.
    """

    n: int
    gU_hat: float
    gL_hat: float
    grid: tuple
    samples: int
    stderr_max: float
    gU_by_threshold: tuple = field(default=())
    gL_by_threshold: tuple = field(default=())
    skipped_upper: tuple = field(default=())
    skipped_lower: tuple = field(default=())


def estimate_dominating_coefficients(
    dep: DependenceSpec,
    marginal: mg.MarginalSpec,
    n: int,
    threshold_grid: Sequence[Sequence[float]],
    samples: int,
    stream,
    threads: int = 1,
) -> DominatingEstimate:
    """Scan joint-orthant/product ratios over a grid of threshold vectors.

    Denominators use exact marginal tails when the marginal is closed
    form, otherwise the empirical per-coordinate frequencies from the same
    run.  Raises ``AllGridPointsSkipped`` when a side of the scan retains
    no estimable threshold.
    """
    if samples < 10_000:
        raise InvalidArg("dominating-coefficient estimation needs >= 1e4 samples")
    grid = [np.asarray(v, dtype=float) for v in threshold_grid]
    if not grid:
        raise InvalidArg("threshold grid is empty")
    for v in grid:
        if v.shape != (n,):
            raise InvalidArg(f"threshold vector {v} does not have length n={n}")
    closed = mg.has_closed_form(marginal)

    def worker(_idx: int, size: int, rng) -> tuple:
        x = sample_sequences(dep, marginal, n, size, rng)
        up = np.empty(len(grid), dtype=np.int64)
        lo = np.empty(len(grid), dtype=np.int64)
        marg_up = np.zeros((len(grid), n), dtype=np.int64)
        for g, vec in enumerate(grid):
            above = x > vec[None, :]
            up[g] = int(np.all(above, axis=1).sum())
            lo[g] = int(np.all(~above, axis=1).sum())
            marg_up[g] = above.sum(axis=0)
        return up, lo, marg_up

    parts = run_chunks(worker, samples, stream, threads=threads)
    up = tree_sum([p[0] for p in parts]).astype(float) / samples
    lo = tree_sum([p[1] for p in parts]).astype(float) / samples
    marg_up = tree_sum([p[2] for p in parts]).astype(float) / samples

    floor = 10.0 / samples
    ratios_u, ratios_l, errs = [], [], []
    skip_u, skip_l = [], []
    for g, vec in enumerate(grid):
        if closed:
            tails = np.asarray(mg.tail(marginal, vec), dtype=float)
        else:
            tails = marg_up[g]
        prod_u = float(np.prod(tails))
        prod_l = float(np.prod(1.0 - tails))
        if prod_u < floor:
            skip_u.append(g)
            ratios_u.append(np.nan)
        else:
            ratios_u.append(up[g] / prod_u)
            errs.append(np.sqrt(up[g] * (1.0 - up[g]) / samples) / prod_u)
        if prod_l < floor:
            skip_l.append(g)
            ratios_l.append(np.nan)
        else:
            ratios_l.append(lo[g] / prod_l)
            errs.append(np.sqrt(lo[g] * (1.0 - lo[g]) / samples) / prod_l)

    kept_u = [r for r in ratios_u if not np.isnan(r)]
    kept_l = [r for r in ratios_l if not np.isnan(r)]
    if not kept_u:
        raise AllGridPointsSkipped("no upper-orthant threshold is estimable at this sample size")
    if not kept_l:
        raise AllGridPointsSkipped("no lower-orthant threshold is estimable at this sample size")
    return DominatingEstimate(
        n=n,
        gU_hat=float(max(kept_u)),
        gL_hat=float(max(kept_l)),
        grid=tuple(tuple(v) for v in grid),
        samples=int(samples),
        stderr_max=float(max(errs)) if errs else float("nan"),
        gU_by_threshold=tuple(ratios_u),
        gL_by_threshold=tuple(ratios_l),
        skipped_upper=tuple(skip_u),
        skipped_lower=tuple(skip_l),
    )
