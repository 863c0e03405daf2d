"""Empirical and analytic verification of tail-class hypotheses.

The regularity classes used across this package are limit statements
(dominated variation, consistent variation, Matuszewska envelopes, left
tail negligibility).  No finite-sample procedure can certify a limit, so
everything here is labelled evidence: liminf/limsup are approximated by
running inf/sup over the last half of a geometric grid spanning several
decades, and trend checks demand a factor-2 decrease across the grid
rather than asserting convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import marginals as mg
from .errors import DomainError, InsufficientTailData

Source = Union[mg.MarginalSpec, np.ndarray]

#: Empirical tails are truncated where fewer exceedances than this remain.
MIN_EXCEEDANCES = 50

DEFAULT_Y_GRID = (1.01, 1.1, 2.0, 4.0, 16.0)


def geometric_grid(lo: float = 1.0, decades: float = 6.0, per_decade: int = 300) -> np.ndarray:
    """Geometric x grid; dense enough to land just under every tail step."""
    n = int(decades * per_decade) + 1
    return lo * np.power(10.0, np.linspace(0.0, decades, n))


@dataclass(frozen=True)
class TailRatioCurve:
    """tail(x*y)/tail(x) over a grid, with limit proxies.

    ``inf_tail``/``sup_tail`` are the running infimum/supremum over the
    last half of the grid, the documented stand-ins for liminf/limsup.
    """

    y: float
    x_grid: np.ndarray
    ratios: np.ndarray
    inf_tail: float
    sup_tail: float


@dataclass(frozen=True)
class TrendReport:
    """Values over a grid plus a decreasing-trend verdict."""

    name: str
    grid: tuple
    values: tuple
    verdict: str
    notes: str = ""


def trend_verdict(values: Sequence[float]) -> str:
    """Pass iff the sequence falls by a factor >= 2 end to end (or hits 0).

    NaN entries mark grid points that were not estimable and are ignored;
    fewer than two usable points is Inconclusive.
    """
    vals = [v for v in values if v is not None and not math.isnan(v)]
    if len(vals) < 2:
        return "Inconclusive"
    first, last = vals[0], vals[-1]
    if last == 0.0:
        return "Pass"
    if last <= first / 2.0:
        return "Pass"
    return "Fail"


def _empirical_tail(samples: np.ndarray, xs: np.ndarray) -> np.ndarray:
    sorted_ = np.sort(samples)
    n = sorted_.size
    idx = np.searchsorted(sorted_, xs, side="right")
    return (n - idx) / n


def empirical_tail_ratio(source: Source, y: float, x_grid=None) -> TailRatioCurve:
    """Evaluate tail(x*y)/tail(x) along a geometric grid.

    Closed-form sources evaluate exactly; sample sources use the empirical
    tail and the grid is truncated where fewer than ``MIN_EXCEEDANCES``
    points remain above ``x * y`` (bias is traded for variance explicitly,
    never extrapolated).
    """
    if y <= 1.0:
        raise DomainError("tail-ratio curves require y > 1")
    xs = np.asarray(x_grid, dtype=float) if x_grid is not None else geometric_grid()
    if isinstance(source, mg.MarginalSpec):
        t_x = np.asarray(mg.tail(source, xs), dtype=float)
        t_xy = np.asarray(mg.tail(source, xs * y), dtype=float)
        keep = t_x > 0.0
    else:
        samples = np.asarray(source, dtype=float)
        if samples.size < 1_000:
            raise InsufficientTailData("need at least 1e3 sample points")
        t_x = _empirical_tail(samples, xs)
        t_xy = _empirical_tail(samples, xs * y)
        keep = t_xy * samples.size >= MIN_EXCEEDANCES
    xs, t_x, t_xy = xs[keep], t_x[keep], t_xy[keep]
    if xs.size < 4:
        raise InsufficientTailData("no usable grid points above the exceedance floor")
    ratios = t_xy / t_x
    upper = ratios[xs.size // 2:]
    return TailRatioCurve(y=float(y), x_grid=xs, ratios=ratios,
                          inf_tail=float(upper.min()), sup_tail=float(upper.max()))


def estimate_matuszewska(source: Source, y_grid=None, x_grid=None) -> mg.TailIndices:
    """Grid estimates of the tail envelope indices and the class flags.

    The upper index comes from the liminf proxy at the largest y, the
    lower index from the limsup proxy; the lower tail-ratio constant L is
    read at the smallest y (no extrapolation toward y = 1, which would be
    an uncontrolled model assumption).  Dominated variation is flagged
    when the liminf proxy at y ~ 2 stays positive; consistent variation
    when L >= 0.95.
    """
    ys = tuple(y_grid) if y_grid is not None else DEFAULT_Y_GRID
    if any(b <= a for a, b in zip(ys, ys[1:])) or ys[0] <= 1.0:
        raise DomainError("y_grid must be increasing with every y > 1")
    if max(ys) < 16.0:
        raise DomainError("y_grid must reach at least 16 for index readout")
    curves = {y: empirical_tail_ratio(source, y, x_grid) for y in ys}
    y_max = max(ys)
    inf_at_max = curves[y_max].inf_tail
    sup_at_max = curves[y_max].sup_tail
    j_plus = math.inf if inf_at_max <= 0.0 else -math.log(inf_at_max) / math.log(y_max)
    j_minus = math.inf if sup_at_max <= 0.0 else -math.log(sup_at_max) / math.log(y_max)
    L = curves[min(ys)].inf_tail
    y_two = min(ys, key=lambda y: abs(y - 2.0))
    in_d = curves[y_two].inf_tail > 1e-8
    return mg.TailIndices(L=float(L), J_plus=float(j_plus), J_minus=float(j_minus),
                          I=float(j_plus), in_D=bool(in_d), in_C=bool(L >= 0.95))


def check_left_tail_negligible(source: Source, x_grid: Sequence[float],
                               samples: int = 1_000_000, stream=None) -> TrendReport:
    """Evidence for F(-x) = o(tail(x)): the left/right tail ratio must fall.

    Two-sided closed-form sources (shifted families) evaluate exactly;
    netloss sources and raw sample arrays use empirical tails with the
    exceedance floor.  Identically zero beyond some point passes outright
    (bounded-below laws).
    """
    xs = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise DomainError("x_grid must be increasing")
    if isinstance(source, mg.MarginalSpec):
        if source.family == "shifted":
            right = np.asarray(mg.tail(source, xs), dtype=float)
            left = 1.0 - np.asarray(mg.tail(source, -xs), dtype=float)
        elif source.family == "netloss":
            if stream is None:
                raise DomainError("netloss left-tail check needs a stream")
            draws = mg.sample_iid(source, int(samples), stream)
            return check_left_tail_negligible(draws, xs)
        else:
            raise DomainError("left-tail check applies to two-sided laws only")
    else:
        draws = np.asarray(source, dtype=float)
        n = draws.size
        right = _empirical_tail(draws, xs)
        left = _empirical_tail(-draws, xs)
        floor = MIN_EXCEEDANCES / n
        right = np.where(right >= floor, right, np.nan)
    vals = np.where(right > 0, left / right, np.nan)
    return TrendReport(name="left-tail negligibility", grid=tuple(xs),
                       values=tuple(float(v) for v in vals),
                       verdict=trend_verdict(list(vals)))


def check_growth_condition(gU_values, marginal: mg.MarginalSpec,
                           n_grid: Sequence[int]) -> TrendReport:
    """Evidence for g_U(n) * n * tail(n) -> 0 over a grid of n.

    ``gU_values`` maps n to a dominating coefficient (dict or callable).
    """
    lookup = gU_values if callable(gU_values) else (lambda n: gU_values[n])
    ns = [int(n) for n in n_grid]
    vals = [float(lookup(n)) * n * float(mg.tail(marginal, float(n))) for n in ns]
    return TrendReport(name="dominating-coefficient growth", grid=tuple(ns),
                       values=tuple(vals), verdict=trend_verdict(vals))
