import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import kstest

from bigjump import marginals as mg
from bigjump.errors import DomainError, NoClosedFormTail
from bigjump.streams import substream

PARETO21 = mg.pareto(2, 1)
STEP2 = mg.steppareto(2)
EXP1 = mg.exponential(1.0)
SHIFTED = mg.shifted(PARETO21, 2.0)
NETLOSS = mg.net_loss(PARETO21, EXP1, factor=1.0)

CLOSED = [PARETO21, STEP2, EXP1, SHIFTED, mg.pareto(0.8, 2.0), mg.steppareto(0.5),
          mg.exponential(3.0), mg.fixed(1.5)]


def step_tail_oracle(alpha, x):
    """Walk the plateau list directly: tail is 2**-k on [2**(k/a), 2**((k+1)/a))."""
    if x < 1.0:
        return 1.0
    k = 0
    while 2.0 ** ((k + 1) / alpha) <= x * (1 + 1e-12):
        k += 1
    return 2.0 ** -k


# ---------------------------------------------------------------------------
# tails and quantiles

def test_pareto_tail_examples():
    assert mg.tail(PARETO21, 2.0) == 0.25
    assert mg.tail(PARETO21, 0.5) == 1.0


def test_step_tail_matches_plateau_oracle_on_grid():
    xs = np.geomspace(0.5, 1e5, 4001)
    for alpha in (0.5, 1.0, 2.0, 3.5):
        spec = mg.steppareto(alpha)
        got = mg.tail(spec, xs)
        want = np.array([step_tail_oracle(alpha, x) for x in xs])
        assert np.array_equal(got, want)


def test_step_tail_frozen_values():
    # computed from the plateau-walk oracle for alpha = 2
    assert mg.tail(STEP2, 2.0) == 0.25
    assert mg.tail(STEP2, 4.0) == 0.0625
    assert mg.tail(STEP2, 8.0) == 0.015625
    assert mg.quantile(STEP2, 0.0625) == 4.0


def test_quantile_examples():
    assert mg.quantile(PARETO21, 0.25) == 2.0
    assert mg.quantile(EXP1, math.exp(-3)) == pytest.approx(3.0, rel=1e-12)


@pytest.mark.parametrize("spec", CLOSED)
def test_tail_nonincreasing_and_bounded(spec):
    xs = np.linspace(-5.0, 2000.0, 4001)
    t = np.asarray(mg.tail(spec, xs))
    assert np.all(np.diff(t) <= 1e-15)
    assert np.all((t >= 0.0) & (t <= 1.0))


@pytest.mark.parametrize("spec", CLOSED)
def test_quantile_tail_round_trip_grid(spec):
    ps = np.linspace(1e-6, 1.0, 1000)
    xs = np.asarray(mg.quantile(spec, ps))
    t = np.asarray(mg.tail(spec, xs))
    assert np.all(t <= ps + 1e-12)
    # the left nudge must clear the tail's right-continuity guard
    eps = np.maximum(np.abs(xs) * 1e-6, 1e-9)
    t_left = np.asarray(mg.tail(spec, xs - eps))
    assert np.all(t_left >= ps - 1e-9)


@given(p=st.floats(min_value=1e-12, max_value=1.0),
       alpha=st.floats(min_value=0.5, max_value=6.0))
@settings(max_examples=200, deadline=None)
def test_step_round_trip_property(p, alpha):
    spec = mg.steppareto(alpha)
    x = mg.quantile(spec, p)
    assert mg.tail(spec, x) <= p + 1e-12
    assert mg.tail(spec, x * (1 - 1e-6)) > p - 1e-9


def test_quantile_rejects_bad_p():
    with pytest.raises(DomainError):
        mg.quantile(PARETO21, 0.0)
    with pytest.raises(DomainError):
        mg.quantile(PARETO21, 1.5)


def test_netloss_has_no_closed_form():
    with pytest.raises(NoClosedFormTail):
        mg.tail(NETLOSS, 1.0)
    with pytest.raises(NoClosedFormTail):
        mg.quantile(NETLOSS, 0.5)
    with pytest.raises(NoClosedFormTail):
        mg.theoretical_indices(NETLOSS)


# ---------------------------------------------------------------------------
# sampling

def test_sample_examples():
    assert mg.sample(PARETO21, 0.25) == 2.0
    assert mg.sample(SHIFTED, 0.25) == 0.0
    assert mg.sample(mg.exponential(2.0), math.exp(-1)) == pytest.approx(0.5)


def test_netloss_sample_consumes_pair_in_order():
    # base uniform first, companion second
    v = mg.sample(NETLOSS, (0.25, math.exp(-1)))
    assert v == pytest.approx(2.0 - 1.0)


def test_sample_iid_consumption(fixed_stream):
    s = fixed_stream([0.25, 0.25, 0.25])
    assert np.array_equal(mg.sample_iid(PARETO21, 3, s), [2.0, 2.0, 2.0])
    s = fixed_stream([0.25, 0.5, math.exp(-1), math.exp(-2)])
    got = mg.sample_iid(NETLOSS, 2, s)
    want = [2.0 - 1.0, mg.quantile(PARETO21, 0.5) - 2.0]
    assert np.allclose(got, want)


@pytest.mark.parametrize("spec,label", [
    (PARETO21, "pareto"), (EXP1, "exp"), (SHIFTED, "shifted"), (STEP2, "step"),
])
def test_inverse_transform_ks(spec, label):
    draws = mg.sample_iid(spec, 1_000_000, substream(2024, "ks", label))
    if mg.is_continuous(spec):
        stat = kstest(draws, lambda x: 1.0 - np.asarray(mg.tail(spec, x))).statistic
    else:
        # discrete law: compare empirical and exact tails on the step grid
        grid = np.concatenate([[0.5], 2.0 ** (np.arange(0, 80) / spec.alpha)])
        grid = np.concatenate([grid * (1 - 1e-9), grid])
        emp = (draws[None, :] > grid[:, None]).mean(axis=1)
        stat = np.max(np.abs(emp - np.asarray(mg.tail(spec, grid))))
    assert stat < 0.002


# ---------------------------------------------------------------------------
# moments

def test_pareto_moments():
    m = mg.moments(PARETO21)
    assert m.mean == 2.0 and m.r_max == 2.0 and m.mean_neg == 0.0


def test_exponential_moments():
    m = mg.moments(EXP1)
    assert m.mean == 1.0 and m.r_max == math.inf


def test_shifted_moments_centering():
    m = mg.moments(SHIFTED)
    assert m.mean == pytest.approx(0.0, abs=1e-12)
    assert m.mean_neg <= 2.0
    # quadrature oracle for the positive part
    quad = integrate.quad(lambda x: mg.tail(SHIFTED, x), 0.0, np.inf)[0]
    assert m.mean_pos == pytest.approx(quad, abs=1e-9)


def test_step_mean_matches_plateau_area_oracle():
    # area = 1 + sum of plateau widths times plateau heights
    ks = np.arange(0, 400)
    area = 1.0 + np.sum(2.0 ** -ks * (2 ** ((ks + 1) / 2) - 2 ** (ks / 2)))
    m = mg.moments(STEP2)
    assert m.mean == pytest.approx(area, rel=1e-12)
    assert m.mean == pytest.approx(1 + math.sqrt(2), rel=1e-12)
    assert m.r_max == 2.0


def test_infinite_means_are_values():
    assert mg.moments(mg.pareto(1.0, 1.0)).mean == math.inf
    assert mg.moments(mg.steppareto(0.75)).mean == math.inf
    m = mg.moments(mg.shifted(mg.pareto(0.8, 1.0), 5.0))
    assert m.mean == math.inf and m.mean_neg <= 5.0


def test_netloss_mean_composition():
    m = mg.moments(NETLOSS)
    assert m.mean == pytest.approx(2.0 - 1.0)
    assert m.r_max == 2.0


# ---------------------------------------------------------------------------
# theoretical indices

def test_index_table():
    p = mg.theoretical_indices(PARETO21)
    assert (p.L, p.J_plus, p.J_minus, p.I, p.in_D, p.in_C) == (1.0, 2, 2, 2, True, True)
    s = mg.theoretical_indices(STEP2)
    assert (s.L, s.J_plus, s.in_D, s.in_C) == (0.5, 2.0, True, False)
    e = mg.theoretical_indices(EXP1)
    assert not e.in_D and not e.in_C
    assert mg.theoretical_indices(SHIFTED) == mg.theoretical_indices(PARETO21)


@pytest.mark.parametrize("spec", [PARETO21, STEP2, mg.pareto(0.8, 2.0), mg.steppareto(1.0)])
def test_index_ordering_for_dominated_tails(spec):
    idx = mg.theoretical_indices(spec)
    assert idx.in_D
    assert 0 <= idx.J_minus <= idx.I <= idx.J_plus < math.inf
    mom = mg.moments(spec)
    assert mom.r_max == idx.I


@pytest.mark.parametrize("spec", [PARETO21, STEP2])
def test_tail_grows_past_upper_index(spec):
    # for p above the upper envelope index, tail(x) * x**p diverges
    idx = mg.theoretical_indices(spec)
    p = idx.J_plus + 0.5
    xs = np.geomspace(10.0, 1e6, 200)
    vals = np.asarray(mg.tail(spec, xs)) * xs ** p
    assert vals[-1] > 100 * vals[0]


# ---------------------------------------------------------------------------
# validation and text forms

def test_validation_errors():
    with pytest.raises(DomainError):
        mg.pareto(-1, 1)
    with pytest.raises(DomainError):
        mg.steppareto(0.4)
    with pytest.raises(DomainError):
        mg.exponential(0.0)
    with pytest.raises(DomainError):
        mg.shifted(mg.shifted(PARETO21, 1.0), 1.0)
    with pytest.raises(DomainError):
        mg.net_loss(NETLOSS, EXP1)


def test_text_forms():
    assert mg.to_text(PARETO21) == "pareto(alpha=2, scale=1)"
    assert mg.to_text(SHIFTED) == "shifted(pareto(alpha=2, scale=1), offset=2)"
    assert mg.to_text(mg.exponential(0.5)) == "exponential(rate=0.5)"
    assert "netloss(" in mg.to_text(NETLOSS)
