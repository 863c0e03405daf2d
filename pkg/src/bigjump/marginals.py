"""Closed-form one-dimensional laws used as claims, inter-arrivals, summands.

Five sampling families plus a degenerate point mass:

``pareto``       power-law tail ``(x/scale)^-alpha`` on ``[scale, inf)``.
``steppareto``   a power law quantized to factor-2 plateaus: the tail is
                 ``2^-k`` on ``[2^(k/alpha), 2^((k+1)/alpha))``.  Every step
                 drops by exactly one half, so the tail is dominatedly but
                 not consistently varying: its lower tail-ratio constant is
                 1/2 while the power envelope keeps both Matuszewska
                 indices equal to ``alpha``.
``exponential``  light tail ``exp(-rate*x)`` on ``[0, inf)``.
``shifted``      ``X = Y - offset`` for a base family ``Y`` (used to center
                 a heavy-tailed law at mean zero).
``netloss``      ``X = Y - factor*Z`` for two component families; has no
                 closed-form tail and is handled by sampling only.
``fixed``        point mass at ``value`` (degenerate paths in tests and
                 arithmetic checks).

All tail/quantile/moment operations are pure and vectorized; sampling is
inverse-transform from caller-supplied uniforms, so every draw is
replayable from the stream that produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError, NoClosedFormTail

ArrayLike = Union[float, np.ndarray]

_CLOSED_FORM = frozenset({"pareto", "steppareto", "exponential", "shifted", "fixed"})
_FAMILIES = _CLOSED_FORM | {"netloss"}

# Nudges the floor/ceil used by the plateau family off exact FP boundaries
# so the tail stays right-continuous at representable step points.
_STEP_EPS = 1e-9


@dataclass(frozen=True)
class MarginalSpec:
    """A one-dimensional law; use the module constructors to build one."""

    family: str
    alpha: float = 0.0
    scale: float = 0.0
    rate: float = 0.0
    offset: float = 0.0
    value: float = 0.0
    base: Optional["MarginalSpec"] = None
    companion: Optional["MarginalSpec"] = None
    factor: float = 0.0

    def __post_init__(self) -> None:
        f = self.family
        if f not in _FAMILIES:
            raise DomainError(f"unknown marginal family {f!r}")
        if f == "pareto":
            if not (self.alpha > 0 and self.scale > 0):
                raise DomainError("pareto requires alpha > 0 and scale > 0")
        elif f == "steppareto":
            if not self.alpha >= 0.5:
                raise DomainError("steppareto requires alpha >= 0.5")
        elif f == "exponential":
            if not self.rate > 0:
                raise DomainError("exponential requires rate > 0")
        elif f == "shifted":
            if self.base is None:
                raise DomainError("shifted requires a base spec")
            if self.base.family == "shifted":
                raise DomainError("shifted composition depth is limited to 1")
            if self.base.family == "netloss":
                raise DomainError("shifted base must have a closed-form tail")
        elif f == "netloss":
            if self.base is None or self.companion is None:
                raise DomainError("netloss requires base and companion specs")
            for part in (self.base, self.companion):
                if part.family == "netloss":
                    raise DomainError("netloss components must be closed-form")
            if not self.factor >= 0:
                raise DomainError("netloss requires factor >= 0")

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class TailIndices:
    """Theoretical tail-regularity summary of a law.

    ``L`` is the limit, as ``y`` decreases to 1, of the lower tail ratio
    ``liminf tail(x*y)/tail(x)``; ``J_plus``/``J_minus`` are the power-law
    envelope exponents of the tail; ``I`` is the supremum of ``s`` with a
    finite ``s``-th positive moment.  ``in_D`` marks a dominatedly varying
    tail, ``in_C`` a consistently varying one (``L == 1``).
    """

    L: float
    J_plus: float
    J_minus: float
    I: float
    in_D: bool
    in_C: bool


@dataclass(frozen=True)
class Moments:
    """First-moment summary; infinite values are legitimate, not errors."""

    mean: float
    mean_pos: float
    mean_neg: float
    r_max: float


# ---------------------------------------------------------------------------
# constructors

def pareto(alpha: float, scale: float = 1.0) -> MarginalSpec:
    return MarginalSpec("pareto", alpha=float(alpha), scale=float(scale))


def steppareto(alpha: float) -> MarginalSpec:
    return MarginalSpec("steppareto", alpha=float(alpha))


def exponential(rate: float) -> MarginalSpec:
    return MarginalSpec("exponential", rate=float(rate))


def shifted(base: MarginalSpec, offset: float) -> MarginalSpec:
    return MarginalSpec("shifted", base=base, offset=float(offset))


def net_loss(base: MarginalSpec, companion: MarginalSpec, factor: float = 1.0) -> MarginalSpec:
    return MarginalSpec("netloss", base=base, companion=companion, factor=float(factor))


def fixed(value: float) -> MarginalSpec:
    return MarginalSpec("fixed", value=float(value))


def centered(base: MarginalSpec) -> MarginalSpec:
    """Shift a finite-mean base family to mean zero."""
    mu = moments(base).mean
    if not math.isfinite(mu):
        raise DomainError("cannot center a family with infinite mean")
    return shifted(base, mu)


def has_closed_form(spec: MarginalSpec) -> bool:
    return spec.family in _CLOSED_FORM


def uniform_dimension(spec: MarginalSpec) -> int:
    """Uniforms consumed per draw (2 for netloss, else 1)."""
    return 2 if spec.family == "netloss" else 1


def is_continuous(spec: MarginalSpec) -> bool:
    """True when the law has no atoms (plateau tails and point masses do)."""
    if spec.family in ("steppareto", "fixed"):
        return False
    if spec.family == "shifted":
        return is_continuous(spec.base)
    if spec.family == "netloss":
        return is_continuous(spec.base) or is_continuous(spec.companion)
    return True


# ---------------------------------------------------------------------------
# tail / quantile / sampling

def tail(spec: MarginalSpec, x: ArrayLike) -> ArrayLike:
    """Exact survival function P(X > x).

    Nonincreasing, right-continuous, valued in [0, 1].  Raises
    ``NoClosedFormTail`` for the netloss composition, whose tail is only
    accessible by sampling.
    """
    if spec.family == "netloss":
        raise NoClosedFormTail("netloss has no closed-form tail; sample instead")
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    f = spec.family
    if f == "pareto":
        out = np.where(xs < spec.scale, 1.0, np.power(np.maximum(xs, spec.scale) / spec.scale, -spec.alpha))
    elif f == "steppareto":
        out = np.ones_like(xs)
        m = xs >= 1.0
        k = np.floor(spec.alpha * np.log2(xs[m]) + _STEP_EPS)
        out[m] = np.exp2(-k)
    elif f == "exponential":
        out = np.where(xs < 0.0, 1.0, np.exp(-spec.rate * np.maximum(xs, 0.0)))
    elif f == "fixed":
        out = np.where(xs < spec.value, 1.0, 0.0)
    else:  # shifted
        out = np.atleast_1d(tail(spec.base, xs + spec.offset))
    return float(out[0]) if scalar else out


def quantile(spec: MarginalSpec, p: ArrayLike) -> ArrayLike:
    """Upper quantile: the smallest x with ``tail(x) <= p``, for p in (0, 1].

    On a tail plateau the left endpoint is returned, which makes inverse
    transform sampling measurable and reproducible.
    """
    if spec.family == "netloss":
        raise NoClosedFormTail("netloss has no closed-form quantile")
    ps = np.asarray(p, dtype=float)
    scalar = ps.ndim == 0
    ps = np.atleast_1d(ps)
    if np.any(ps <= 0.0) or np.any(ps > 1.0):
        raise DomainError("quantile requires p in (0, 1]")
    f = spec.family
    if f == "pareto":
        out = spec.scale * np.power(ps, -1.0 / spec.alpha)
    elif f == "steppareto":
        k = np.ceil(-np.log2(ps) - _STEP_EPS)
        out = np.exp2(np.maximum(k, 0.0) / spec.alpha)
    elif f == "exponential":
        out = -np.log(ps) / spec.rate
    elif f == "fixed":
        out = np.full_like(ps, spec.value)
    else:  # shifted
        out = np.atleast_1d(quantile(spec.base, ps)) - spec.offset
    return float(out[0]) if scalar else out


def sample(spec: MarginalSpec, u) -> float:
    """Deterministic inverse-transform draw from explicit uniforms.

    Closed-form families take one uniform in (0, 1).  The netloss
    composition takes a pair ``(u_base, u_companion)``, consumed in that
    order, and returns ``base - factor * companion``.
    """
    if spec.family == "netloss":
        u1, u2 = u
        return sample(spec.base, u1) - spec.factor * sample(spec.companion, u2)
    return float(quantile(spec, u))


def sample_iid(spec: MarginalSpec, n: int, stream) -> np.ndarray:
    """Draw ``n`` independent values from a uniform stream.

    Consumes one length-``n`` uniform block (netloss: a base block then a
    companion block).  Uniforms equal to 0.0 are nudged to the smallest
    positive double so the transform stays finite.
    """
    if spec.family == "netloss":
        u1 = _positive_uniforms(stream, n)
        u2 = _positive_uniforms(stream, n)
        base = quantile(spec.base, u1)
        comp = quantile(spec.companion, u2)
        return np.atleast_1d(base - spec.factor * comp)
    return np.atleast_1d(quantile(spec, _positive_uniforms(stream, n)))


def _positive_uniforms(stream, n: int) -> np.ndarray:
    u = np.atleast_1d(np.asarray(stream.random(n), dtype=float))
    return np.maximum(u, np.finfo(float).tiny)


# ---------------------------------------------------------------------------
# moments

def support_infimum(spec: MarginalSpec) -> float:
    if spec.family == "pareto":
        return spec.scale
    if spec.family == "steppareto":
        return 1.0
    if spec.family == "exponential":
        return 0.0
    if spec.family == "fixed":
        return spec.value
    if spec.family == "shifted":
        return support_infimum(spec.base) - spec.offset
    raise NoClosedFormTail("netloss support bound is not tracked")


def tail_upper_integral(spec: MarginalSpec, a: float) -> float:
    """Exact ``integral_a^inf tail(x) dx`` for closed-form families."""
    f = spec.family
    if f == "pareto":
        al, s = spec.alpha, spec.scale
        if al <= 1.0:
            return math.inf
        body = s / (al - 1.0)
        if a <= s:
            return (s - a) + body
        return a * (a / s) ** (-al) / (al - 1.0)
    if f == "exponential":
        if a <= 0.0:
            return -a + 1.0 / spec.rate
        return math.exp(-spec.rate * a) / spec.rate
    if f == "fixed":
        return max(spec.value - a, 0.0)
    if f == "steppareto":
        al = spec.alpha
        if al <= 1.0:
            return math.inf
        ratio = 2.0 ** (1.0 / al - 1.0)  # < 1 when alpha > 1
        full_from = lambda k0: (2.0 ** (1.0 / al) - 1.0) * 2.0 ** (k0 * (1.0 / al - 1.0)) / (1.0 - ratio)
        if a <= 1.0:
            return (1.0 - a) + full_from(0)
        k0 = int(math.floor(al * math.log2(a) + _STEP_EPS))
        plateau_end = 2.0 ** ((k0 + 1) / al)
        partial = 2.0 ** (-k0) * max(plateau_end - a, 0.0)
        return partial + full_from(k0 + 1)
    if f == "shifted":
        return tail_upper_integral(spec.base, a + spec.offset)
    raise NoClosedFormTail("netloss has no closed-form tail integral")


def tail_integral(spec: MarginalSpec, a: float, b: float) -> float:
    """Exact ``integral_a^b tail(x) dx`` over a finite interval."""
    if b <= a:
        return 0.0
    f = spec.family
    if f == "shifted":
        return tail_integral(spec.base, a + spec.offset, b + spec.offset)
    if f == "fixed":
        return max(min(b, spec.value) - min(a, spec.value), 0.0)
    if f == "exponential":
        below = max(min(b, 0.0) - a, 0.0)
        lo, hi = max(a, 0.0), max(b, 0.0)
        return below + (math.exp(-spec.rate * lo) - math.exp(-spec.rate * hi)) / spec.rate
    if f == "pareto":
        al, s = spec.alpha, spec.scale
        below = max(min(b, s) - a, 0.0)
        lo, hi = max(a, s), max(b, s)
        if hi <= lo:
            return below
        if al == 1.0:
            return below + s * math.log(hi / lo)
        return below + (s / (al - 1.0)) * ((lo / s) ** (1.0 - al) - (hi / s) ** (1.0 - al))
    if f == "steppareto":
        al = spec.alpha
        below = max(min(b, 1.0) - a, 0.0)
        lo, hi = max(a, 1.0), max(b, 1.0)
        total = below
        k = int(math.floor(al * math.log2(lo) + _STEP_EPS)) if lo > 1.0 else 0
        while lo < hi:
            edge = min(2.0 ** ((k + 1) / al), hi)
            total += 2.0 ** (-k) * (edge - lo)
            lo, k = edge, k + 1
        return total
    raise NoClosedFormTail("netloss has no closed-form tail integral")


def moments(spec: MarginalSpec) -> Moments:
    """Exact moments; infinite means are represented, never raised.

    The plateau family's mean comes from the geometric series of plateau
    areas: ``1 + (2^(1/a) - 1) / (1 - 2^(1/a - 1))`` for ``a > 1``.
    """
    f = spec.family
    if f == "netloss":
        mb = moments(spec.base)
        mc = moments(spec.companion)
        mean = mb.mean - spec.factor * mc.mean
        # Components are bounded below, so the positive part is governed by
        # the base family's power moments.
        return Moments(mean=mean, mean_pos=math.nan, mean_neg=math.nan, r_max=mb.r_max)
    mean_pos = tail_upper_integral(spec, 0.0)
    s_inf = support_infimum(spec)
    if s_inf >= 0.0:
        mean_neg = 0.0
    else:
        mean_neg = (0.0 - s_inf) - tail_integral(spec, s_inf, 0.0)
        mean_neg = max(mean_neg, 0.0)
    if math.isinf(mean_pos):
        mean = math.inf
    else:
        mean = mean_pos - mean_neg
    if f in ("pareto", "steppareto"):
        r_max = spec.alpha
    elif f == "shifted":
        r_max = moments(spec.base).r_max
    else:
        r_max = math.inf
    return Moments(mean=mean, mean_pos=mean_pos, mean_neg=mean_neg, r_max=r_max)


# ---------------------------------------------------------------------------
# theoretical tail indices

def theoretical_indices(spec: MarginalSpec) -> TailIndices:
    """Known class membership and index values for closed-form families.

    Light or bounded tails report the convention ``L = 0`` with infinite
    envelope indices and ``in_D = False``.
    """
    f = spec.family
    if f == "pareto":
        a = spec.alpha
        return TailIndices(L=1.0, J_plus=a, J_minus=a, I=a, in_D=True, in_C=True)
    if f == "steppareto":
        a = spec.alpha
        return TailIndices(L=0.5, J_plus=a, J_minus=a, I=a, in_D=True, in_C=False)
    if f in ("exponential", "fixed"):
        return TailIndices(L=0.0, J_plus=math.inf, J_minus=math.inf, I=math.inf, in_D=False, in_C=False)
    if f == "shifted":
        return theoretical_indices(spec.base)
    raise NoClosedFormTail("netloss tail indices are not available in closed form")


# ---------------------------------------------------------------------------
# textual form

def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def to_text(spec: MarginalSpec) -> str:
    """Canonical config text, e.g. ``pareto(alpha=2, scale=1)``."""
    f = spec.family
    if f == "pareto":
        return f"pareto(alpha={_fmt(spec.alpha)}, scale={_fmt(spec.scale)})"
    if f == "steppareto":
        return f"steppareto(alpha={_fmt(spec.alpha)})"
    if f == "exponential":
        return f"exponential(rate={_fmt(spec.rate)})"
    if f == "fixed":
        return f"fixed(value={_fmt(spec.value)})"
    if f == "shifted":
        return f"shifted({to_text(spec.base)}, offset={_fmt(spec.offset)})"
    return (
        f"netloss({to_text(spec.base)}, {to_text(spec.companion)}, "
        f"factor={_fmt(spec.factor)})"
    )
