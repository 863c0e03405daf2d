"""Nonstandard renewal risk model: claims arrive at quasi-renewal times,
premiums accrue between claims, and ruin is monitored at claim instants.

The surplus net-loss path is ``S_m = sum_{i<=m} (Y_i - c Z_i)`` for claim
sizes Y, inter-arrival gaps Z and premium rate c; ruin by horizon t means
``max_{0<=m<=N(t)} S_m > x`` for initial capital x.  Proportional
reinsurance functionals over the same paths:

``R11 = q1 * sum Y_i``                    (ceded claims)
``R12 = q1 * sum Y_i - q2 * c * sum Z_i`` (ceded net loss)
``R21 = sum (Y_i - D)^+``                 (excess of loss, retention D)
``R22 = R21 - q2 * c * sum Z_i``

R11/R12 tail ratios are checked against ``lambda(t) * Gbar(x / q1)``; the
excess-of-loss pair has no supporting limit theorem, so its reference
level ``lambda(t) * Gbar(x + D)`` is tagged heuristic and never produces
a pass/fail verdict.

Claims are always sampled from a sub-stream disjoint from the gap
sub-stream, so claim/arrival independence holds by construction; random
horizons get a third sub-stream.  A deterministic horizon consumes no
horizon draws, which makes fixed-t and degenerate random-t runs coincide
bitwise on the same stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import counting as ct
from . import dependence as dp
from . import marginals as mg
from .deviation import (ASMUSSEN_KROESE, CRUDE_MC, RatioEntry, RatioReport,
                        TailEstimate, _binom_stderr, build_ratio_entries,
                        finish_report)
from .diagnostics import TrendReport, trend_verdict
from .errors import (DomainError, InvalidArg, MethodUnsupported,
                     NonPositiveInterarrival, PreconditionViolated)
from .streams import run_chunks, spawn, tree_sum

_BLOCK = 64

FUNCTIONALS = ("R11", "R12", "R21", "R22")


@dataclass(frozen=True)
class RiskModelSpec:
    """Model configuration; construction enforces the safety loading.

    ``allow_unsafe=True`` skips the loading check (and permits c = 0) for
    deliberately degenerate diagnostic configurations.
    """

    claim_marginal: mg.MarginalSpec
    claim_dep: dp.DependenceSpec
    inter_marginal: mg.MarginalSpec
    inter_dep: dp.DependenceSpec
    premium_rate: float
    q1: float = 1.0
    q2: float = 1.0
    retention: float = 0.0
    allow_unsafe: bool = False

    def __post_init__(self) -> None:
        if not mg.has_closed_form(self.claim_marginal):
            raise DomainError("claim marginal must be closed form")
        if mg.support_infimum(self.claim_marginal) < 0:
            raise DomainError("claim marginal must live on [0, inf)")
        if not (0.0 < self.q1 <= 1.0 and 0.0 < self.q2 <= 1.0):
            raise DomainError("q1 and q2 must lie in (0, 1]")
        if self.retention < 0:
            raise DomainError("retention must be >= 0")
        # Inter-arrival constraints are enforced by the counting spec.
        cspec = ct.renewal(self.inter_marginal, self.inter_dep)
        if self.allow_unsafe:
            if self.premium_rate < 0:
                raise DomainError("premium rate must be >= 0")
            return
        if not self.premium_rate > 0:
            raise DomainError("premium rate must be positive")
        mu_g = mg.moments(self.claim_marginal).mean
        mu_h = ct.mean_interarrival(cspec)
        if not mu_g < self.premium_rate * mu_h:
            raise DomainError(
                f"safety loading violated: mean claim {mu_g:g} >= premium rate "
                f"{self.premium_rate:g} * mean gap {mu_h:g}; "
                "pass allow_unsafe=True to override")


def counting_spec(model: RiskModelSpec) -> ct.CountingSpec:
    """The model's arrival process (Poisson shortcut when gaps qualify)."""
    if (model.inter_marginal.family == "exponential"
            and model.inter_dep.kind == "independent"):
        return ct.poisson(model.inter_marginal.rate)
    return ct.renewal(model.inter_marginal, model.inter_dep)


@dataclass(frozen=True)
class TauSpec:
    """A nonnegative random horizon, independent of the model's streams."""

    kind: str  # "deterministic", "exponential_tau", "geometric_tau"
    t: float = 0.0
    rate: float = 0.0
    p: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "deterministic":
            if not self.t > 0:
                raise DomainError("deterministic horizon requires t > 0")
        elif self.kind == "exponential_tau":
            if not self.rate > 0:
                raise DomainError("exponential horizon requires rate > 0")
        elif self.kind == "geometric_tau":
            if not 0.0 < self.p < 1.0:
                raise DomainError("geometric horizon requires p in (0, 1)")
        else:
            raise DomainError(f"unknown tau kind {self.kind!r}")

    def __str__(self) -> str:
        return tau_to_text(self)


def deterministic(t: float) -> TauSpec:
    return TauSpec("deterministic", t=float(t))


def exponential_tau(rate: float) -> TauSpec:
    return TauSpec("exponential_tau", rate=float(rate))


def geometric_tau(p: float) -> TauSpec:
    return TauSpec("geometric_tau", p=float(p))


def tau_to_text(tau: TauSpec) -> str:
    if tau.kind == "deterministic":
        return f"deterministic(t={mg._fmt(tau.t)})"
    if tau.kind == "exponential_tau":
        return f"exponential_tau(rate={mg._fmt(tau.rate)})"
    return f"geometric_tau(p={mg._fmt(tau.p)})"


def draw_tau(tau: TauSpec, size: int, stream) -> np.ndarray:
    """Horizon draws; the deterministic kind consumes no stream values."""
    if tau.kind == "deterministic":
        return np.full(size, tau.t)
    u = np.maximum(np.asarray(stream.random(size)), np.finfo(float).tiny)
    if tau.kind == "exponential_tau":
        return -np.log(u) / tau.rate
    return np.floor(np.log(u) / np.log1p(-tau.p))


def tau_upper_scale(tau: TauSpec) -> float:
    """A horizon value the tau law essentially never exceeds."""
    if tau.kind == "deterministic":
        return tau.t
    if tau.kind == "exponential_tau":
        return 45.0 / tau.rate
    return math.log(1e-18) / math.log1p(-tau.p)


# ---------------------------------------------------------------------------
# path simulation

@dataclass(frozen=True)
class RiskPath:
    """One simulated claim path with its running net-loss partial sums."""

    arrival_times: np.ndarray
    claims: np.ndarray
    partial_sums: np.ndarray


def simulate_path(model: RiskModelSpec, t: float, stream) -> RiskPath:
    """Simulate arrivals and claims on [0, t] and the exact partial sums.

    Gaps come from one sub-stream of ``stream`` and claims from another;
    claims are drawn blockwise to match the arrival count.
    """
    if not t > 0:
        raise InvalidArg("horizon t must be positive")
    arr = ct.simulate_arrivals(counting_spec(model), t, spawn(stream, 0))
    n = arr.count
    y_chain = dp.UniformChain(model.claim_dep, 1, spawn(stream, 1))
    pieces = []
    drawn = 0
    while drawn < n:
        pieces.append(mg.quantile(model.claim_marginal, y_chain.step(_BLOCK))[0])
        drawn += _BLOCK
    claims = np.concatenate(pieces)[:n] if n else np.empty(0)
    gaps = np.diff(np.concatenate([[0.0], arr.arrival_times]))
    partial = np.cumsum(claims - model.premium_rate * gaps)
    return RiskPath(arrival_times=arr.arrival_times, claims=claims, partial_sums=partial)


def _paths_batch(model: RiskModelSpec, horizons: np.ndarray, rng) -> dict:
    """Batched path functionals for heterogeneous horizons.

    Returns per-replication arrays: arrival count ``n``, running maximum
    of partial sums ``m`` (the sup includes the empty sum 0), final
    partial sum ``s``, claim total ``g``, gap total ``h``, retained-excess
    claim total ``t_exc``, and the max/sum of the first n-1 claims
    (``prev_max``/``prev_sum``) for conditioned estimation.
    """
    size = horizons.shape[0]
    inter = model.inter_marginal
    z_chain = dp.UniformChain(model.inter_dep, size, spawn(rng, 0))
    y_chain = dp.UniformChain(model.claim_dep, size, spawn(rng, 1))
    c, d = model.premium_rate, model.retention

    tau_acc = np.zeros(size)
    n = np.zeros(size, dtype=np.int64)
    s = np.zeros(size)
    m = np.zeros(size)
    g = np.zeros(size)
    h = np.zeros(size)
    t_exc = np.zeros(size)
    prev_max = np.full(size, -np.inf)
    prev_sum = np.zeros(size)
    cur_max = np.full(size, -np.inf)

    budget = 2_000 + int(50.0 * float(horizons.max())
                         / mg.moments(model.inter_marginal).mean)
    steps = 0
    while True:
        z = mg.quantile(inter, z_chain.step(_BLOCK))
        y = mg.quantile(model.claim_marginal, y_chain.step(_BLOCK))
        if np.any(z <= 0.0):
            raise NonPositiveInterarrival("sampled inter-arrival <= 0")
        for j in range(_BLOCK):
            zj, yj = z[:, j], y[:, j]
            tau_acc = tau_acc + zj
            acc = tau_acc <= horizons
            if acc.any():
                n = n + acc
                prev_max = np.where(acc, cur_max, prev_max)
                prev_sum = np.where(acc, g, prev_sum)
                cur_max = np.where(acc, np.maximum(cur_max, yj), cur_max)
                s = np.where(acc, s + yj - c * zj, s)
                m = np.where(acc, np.maximum(m, s), m)
                g = np.where(acc, g + yj, g)
                h = np.where(acc, h + zj, h)
                t_exc = np.where(acc, t_exc + np.maximum(yj - d, 0.0), t_exc)
        steps += _BLOCK
        if (tau_acc > horizons).all():
            break
        if steps > budget:
            raise InvalidArg("path simulation exceeded its step budget")
    return {"n": n, "m": m, "s": s, "g": g, "h": h, "t_exc": t_exc,
            "prev_max": prev_max, "prev_sum": prev_sum}


# ---------------------------------------------------------------------------
# ruin probabilities

@dataclass(frozen=True)
class RuinEstimate:
    """Ruin probability estimate and its ratio to the one-jump reference.

    ``sandwich_violations`` counts replications where the pathwise
    dominance (final sum exceedance <= ruin <= claim-total exceedance)
    failed; it is structurally zero.
    """

    x: float
    horizon: TauSpec
    psi_hat: float
    stderr: float
    samples: int
    ratio_vs_asymptotic: float
    denom: float
    final_exceed_hat: float
    claims_exceed_hat: float
    sandwich_violations: int
    e_lambda_tau: float = math.nan
    e_lambda_stderr: float = math.nan


def _lambda_callable(model: RiskModelSpec, tau: TauSpec, seed: int):
    """Vectorized t -> lambda(t) for the model's arrival process."""
    cspec = counting_spec(model)
    if cspec.kind == "poisson":
        return lambda ts: cspec.rate * np.asarray(ts, dtype=float)
    hi = max(tau_upper_scale(tau), 1e-9)
    grid = np.linspace(0.0, hi, 33)
    vals = np.array([0.0] + [ct.lambda_value(cspec, float(t), seed=seed)
                             for t in grid[1:]])
    return lambda ts: np.interp(np.asarray(ts, dtype=float), grid, vals)


def _ruin_core(model: RiskModelSpec, x: float, tau: TauSpec, samples: int,
               stream, threads: int, seed: int) -> RuinEstimate:
    if not x > 0:
        raise InvalidArg("initial capital x must be positive")
    if samples < 1_000:
        raise InvalidArg("ruin estimation needs >= 1e3 samples")
    lam_fn = _lambda_callable(model, tau, seed)

    def worker(_i, size, rng):
        horizons = draw_tau(tau, size, spawn(rng, 2))
        p = _paths_batch(model, horizons, rng)
        ruin = p["m"] > x
        lowv = int(((p["s"] > x) & ~ruin).sum())
        highv = int((ruin & ~(p["g"] > x)).sum())
        lam = lam_fn(horizons)
        return np.array([ruin.sum(), (p["s"] > x).sum(), (p["g"] > x).sum(),
                         lowv + highv, lam.sum(), (lam * lam).sum()])

    acc = tree_sum(run_chunks(worker, samples, stream, threads=threads))
    psi = acc[0] / samples
    e_lam = acc[4] / samples
    lam_var = max(acc[5] / samples - e_lam * e_lam, 0.0) * samples / (samples - 1)
    gbar = float(mg.tail(model.claim_marginal, x))
    denom = e_lam * gbar
    return RuinEstimate(
        x=float(x), horizon=tau, psi_hat=float(psi),
        stderr=_binom_stderr(psi, samples), samples=int(samples),
        ratio_vs_asymptotic=float(psi / denom) if denom > 0 else math.inf,
        denom=float(denom),
        final_exceed_hat=float(acc[1] / samples),
        claims_exceed_hat=float(acc[2] / samples),
        sandwich_violations=int(acc[3]),
        e_lambda_tau=float(e_lam),
        e_lambda_stderr=float(math.sqrt(lam_var / samples)),
    )


def finite_time_ruin(model: RiskModelSpec, x: float, t: float, samples: int,
                     stream, threads: int = 1, seed: int = 0) -> RuinEstimate:
    """P(max partial net loss by time t exceeds x), with its ratio to
    ``lambda(t) * Gbar(x)``."""
    if not t > 0:
        raise InvalidArg("horizon t must be positive")
    return _ruin_core(model, x, deterministic(t), samples, stream, threads, seed)


def random_time_ruin(model: RiskModelSpec, x: float, tau: TauSpec, samples: int,
                     stream, threads: int = 1, seed: int = 0) -> RuinEstimate:
    """Ruin by an independent random horizon; the reference level averages
    the mean function over the sampled horizons (one Monte Carlo layer,
    not nested simulation)."""
    return _ruin_core(model, x, tau, samples, stream, threads, seed)


# ---------------------------------------------------------------------------
# reinsurance functionals

def reinsurance_tail_scan(
    model: RiskModelSpec,
    t_list: Sequence[float],
    gamma: float,
    x_multipliers: Sequence[float],
    which: str,
    samples: int,
    stream,
    method: str = CRUDE_MC,
    threads: int = 1,
    seed: int = 0,
) -> RatioReport:
    """Scan P(functional > x) against its reference level over (t, x).

    Thresholds are ``x = multiplier * gamma * lambda(t)``.  The ceded pair
    R11/R12 requires a consistently varying claim tail with finite mean;
    the excess-of-loss pair is reported with a heuristic reference level,
    an explanatory note, and no verdict.
    """
    if which not in FUNCTIONALS:
        raise InvalidArg(f"functional must be one of {FUNCTIONALS}")
    if gamma <= 0:
        raise InvalidArg("gamma must be positive")
    idx = mg.theoretical_indices(model.claim_marginal)
    mu_g = mg.moments(model.claim_marginal).mean
    heuristic = which in ("R21", "R22")
    if not heuristic:
        if not idx.in_C or not math.isfinite(mu_g):
            raise PreconditionViolated(
                "ceded-claim scans need a consistently varying claim tail "
                "with finite mean")
    use_ak = method == ASMUSSEN_KROESE
    if use_ak:
        if heuristic:
            raise MethodUnsupported(
                "conditioned estimation does not apply to excess-of-loss "
                "(retained claims have an atom at zero)")
        if model.claim_dep.kind != "independent":
            raise MethodUnsupported("AsmussenKroese needs independent claims")
        if not mg.is_continuous(model.claim_marginal):
            raise MethodUnsupported("AsmussenKroese is biased for laws with atoms")

    cspec = counting_spec(model)
    q1, q2, c, d = model.q1, model.q2, model.premium_rate, model.retention
    entries: list[RatioEntry] = []
    for t in t_list:
        lam = ct.lambda_value(cspec, t, seed=seed)
        xs = [mlt * gamma * lam for mlt in x_multipliers]

        if use_ak:
            def worker(_i, size, rng, t=t, xs=xs):
                p = _paths_batch(model, np.full(size, float(t)), rng)
                out = np.empty((2, len(xs)))
                for j, x in enumerate(xs):
                    theta = x / q1 if which == "R11" else (x + q2 * c * p["h"]) / q1
                    arg = np.maximum(p["prev_max"], theta - p["prev_sum"])
                    arg = np.where(np.isfinite(arg), arg, theta)
                    vals = p["n"] * mg.tail(model.claim_marginal, arg)
                    out[0, j] = vals.sum()
                    out[1, j] = (vals * vals).sum()
                return out

            acc = tree_sum(run_chunks(worker, samples, stream, threads=threads))
            ests = []
            for j in range(len(xs)):
                mean = acc[0, j] / samples
                var = max(acc[1, j] / samples - mean * mean, 0.0) * samples / (samples - 1)
                ests.append(TailEstimate(p_hat=float(mean),
                                         stderr=float(math.sqrt(var / samples)),
                                         samples=samples, method=ASMUSSEN_KROESE))
        else:
            def worker(_i, size, rng, t=t, xs=xs):
                p = _paths_batch(model, np.full(size, float(t)), rng)
                if which == "R11":
                    v = q1 * p["g"]
                elif which == "R12":
                    v = q1 * p["g"] - q2 * c * p["h"]
                elif which == "R21":
                    v = p["t_exc"]
                else:
                    v = p["t_exc"] - q2 * c * p["h"]
                return np.array([(v > x).sum() for x in xs], dtype=np.int64)

            hits = tree_sum(run_chunks(worker, samples, stream, threads=threads))
            ests = [TailEstimate(p_hat=float(hcount / samples),
                                 stderr=_binom_stderr(hcount / samples, samples),
                                 samples=samples, method=CRUDE_MC, hits=int(hcount))
                    for hcount in hits]

        if heuristic:
            denoms = [lam * mg.tail(model.claim_marginal, x + d) for x in xs]
        else:
            denoms = [lam * mg.tail(model.claim_marginal, x / q1) for x in xs]
        entries.extend(build_ratio_entries(ests, denoms, xs, t=t))

    report = finish_report(entries, idx.L, idx.in_C, regime=f"reinsurance-{which}")
    if heuristic:
        return RatioReport(entries=report.entries, sup_ratio=report.sup_ratio,
                           inf_ratio=report.inf_ratio, L=report.L,
                           verdict="Inconclusive", regime=report.regime,
                           band=report.band,
                           note="TheoremUnavailable: heuristic reference level")
    return report


# ---------------------------------------------------------------------------
# random-horizon growth condition

def check_random_time_condition(
    model: RiskModelSpec,
    tau: TauSpec,
    x_grid: Sequence[float],
    samples: int,
    stream,
    threads: int = 1,
) -> TrendReport:
    """Evidence that P(N(tau) > x) is negligible against the claim tail.

    Reports P(N(tau) > x) / Gbar(x) over the grid; grid points with fewer
    than 10 exceedance hits are marked not-estimable (NaN) and skipped by
    the trend verdict.
    """
    xs = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise InvalidArg("x_grid must be increasing")
    cspec = counting_spec(model)
    cap = int(xs.max()) + 1

    def worker(_i, size, rng):
        horizons = draw_tau(tau, size, spawn(rng, 2))
        counts = ct.sample_counts(cspec, horizons, spawn(rng, 0), cap=cap)
        return np.array([(counts > x).sum() for x in xs], dtype=np.int64)

    hits = tree_sum(run_chunks(worker, samples, stream, threads=threads))
    gbar = np.asarray(mg.tail(model.claim_marginal, xs), dtype=float)
    vals = []
    n_inconclusive = 0
    for hcount, gb in zip(hits, gbar):
        if hcount < 10 or gb <= 0:
            vals.append(math.nan)
            n_inconclusive += 1
        else:
            vals.append(float(hcount / samples / gb))
    note = f"{n_inconclusive} grid point(s) below the hit floor" if n_inconclusive else ""
    return TrendReport(name="random-horizon count vs claim tail",
                       grid=tuple(float(x) for x in xs), values=tuple(vals),
                       verdict=trend_verdict(vals), notes=note)
