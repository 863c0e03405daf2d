import math

import pytest
from scipy import integrate

from bigjump import dependence as dp
from bigjump import deviation as dv
from bigjump import marginals as mg
from bigjump.errors import InvalidArg, MethodUnsupported, PreconditionViolated
from bigjump.streams import substream

PARETO21 = mg.pareto(2, 1)
CENTERED = mg.centered(PARETO21)
IND = dp.independent()


def pareto_pair_sum_tail(x):
    """Numerical convolution: P(X1 + X2 > x) for iid Pareto(2, 1)."""
    inner = integrate.quad(lambda y: (x - y) ** -2.0 * 2.0 * y ** -3.0,
                           1.0, x - 1.0, limit=200)[0]
    return inner + (x - 1.0) ** -2.0


def test_single_summand_is_exact_for_ak():
    est = dv.estimate_sum_tail(PARETO21, IND, 1, 10.0, dv.ASMUSSEN_KROESE,
                               10_000, substream(1, "ak1"))
    assert est.p_hat == 0.01
    assert est.stderr == 0.0


def test_single_summand_crude_within_3_sigma():
    est = dv.estimate_sum_tail(PARETO21, IND, 1, 10.0, dv.CRUDE_MC,
                               200_000, substream(1, "cr1"))
    assert abs(est.p_hat - 0.01) <= 3 * est.stderr
    assert est.hits == round(est.p_hat * est.samples)


def test_ak_matches_convolution_oracle():
    exact = pareto_pair_sum_tail(10.0)
    est = dv.estimate_sum_tail(PARETO21, IND, 2, 10.0, dv.ASMUSSEN_KROESE,
                               400_000, substream(2, "akconv"))
    assert abs(est.p_hat - exact) < 1e-4
    assert abs(est.p_hat - exact) <= 3 * est.stderr


def test_crude_self_consistency_across_seeds():
    dep = dp.fgm_chain(0.5)
    a = dv.estimate_sum_tail(PARETO21, dep, 2, 10.0, dv.CRUDE_MC, 1_000_000,
                             substream(3, "a"))
    b = dv.estimate_sum_tail(PARETO21, dep, 2, 10.0, dv.CRUDE_MC, 1_000_000,
                             substream(4, "b"))
    sigma = math.hypot(a.stderr, b.stderr)
    assert abs(a.p_hat - b.p_hat) <= 3 * sigma


@pytest.mark.parametrize("n,x", [(2, 20.0), (5, 60.0), (20, 100.0)])
def test_ak_and_crude_agree(n, x):
    ak = dv.estimate_sum_tail(PARETO21, IND, n, x, dv.ASMUSSEN_KROESE,
                              100_000, substream(5, f"ak{n}"))
    cr = dv.estimate_sum_tail(PARETO21, IND, n, x, dv.CRUDE_MC,
                              400_000, substream(5, f"cr{n}"))
    assert abs(ak.p_hat - cr.p_hat) <= 3 * math.hypot(ak.stderr, cr.stderr)


def test_ak_variance_reduction_deep_in_tail():
    # tail level ~1e-4: the conditioned estimator must cut stderr by >= 3x
    x = mg.quantile(PARETO21, 1e-4)
    ak = dv.estimate_sum_tail(PARETO21, IND, 5, 5 * x / 4, dv.ASMUSSEN_KROESE,
                              200_000, substream(6, "akv"))
    cr = dv.estimate_sum_tail(PARETO21, IND, 5, 5 * x / 4, dv.CRUDE_MC,
                              200_000, substream(6, "crv"))
    assert ak.stderr <= cr.stderr / 3


def test_coupled_monotonicity_in_x():
    cfg = dv.RatioScanConfig(gamma=1.0, n_list=(10,), x_multipliers=(1, 2, 4, 8),
                             samples=50_000, seed=9)
    rep = dv.uniform_ratio_scan(cfg, CENTERED, IND, scope="mono")
    ps = [e.estimate.p_hat for e in rep.entries]
    assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_method_restrictions():
    with pytest.raises(MethodUnsupported):
        dv.estimate_sum_tail(PARETO21, dp.fgm_chain(0.5), 2, 10.0,
                             dv.ASMUSSEN_KROESE, 10_000, substream(7, "x"))
    with pytest.raises(MethodUnsupported):
        dv.estimate_sum_tail(mg.steppareto(2), IND, 2, 10.0,
                             dv.ASMUSSEN_KROESE, 10_000, substream(7, "y"))
    with pytest.raises(InvalidArg):
        dv.estimate_sum_tail(PARETO21, IND, 0, 10.0, dv.CRUDE_MC, 10_000,
                             substream(7, "z"))
    with pytest.raises(InvalidArg):
        dv.estimate_sum_tail(PARETO21, IND, 2, 10.0, dv.CRUDE_MC, 100,
                             substream(7, "w"))


# ---------------------------------------------------------------------------
# exponential upper bound

def test_bound_exact_arithmetic():
    b2 = dv.exponential_upper_bound(10, 100.0, 2.0, 2.0, 1.0, PARETO21)
    assert b2 == pytest.approx(10 * 50.0 ** -2 + (math.e * 2 * 10 / 100) ** 2, rel=1e-12)
    assert b2 == pytest.approx(0.29956, abs=1e-5)
    b1 = dv.exponential_upper_bound(10, 100.0, 1.0, 2.0, 1.0, PARETO21)
    assert b1 == pytest.approx(0.001 + math.e * 20 / 100, rel=1e-9)
    assert b1 == pytest.approx(0.544656, abs=1e-5)


def test_bound_dominates_monte_carlo():
    for n in (10, 25):
        cfg_xs = (50.0, 100.0, 200.0)
        ests = {x: dv.estimate_sum_tail(PARETO21, IND, n, x, dv.CRUDE_MC,
                                        100_000, substream(8, f"b{n}{x}"))
                for x in cfg_xs}
        for x, est in ests.items():
            for u in (1.0, 2.0, 4.0):
                bound = dv.exponential_upper_bound(n, x, u, 2.0, 1.0, PARETO21)
                assert est.p_hat <= bound + 3 * est.stderr


def test_bound_argument_validation():
    with pytest.raises(InvalidArg):
        dv.exponential_upper_bound(10, -1.0, 2.0, 2.0, 1.0, PARETO21)
    with pytest.raises(InvalidArg):
        dv.exponential_upper_bound(10, 1.0, 2.0, math.inf, 1.0, PARETO21)
    with pytest.raises(InvalidArg):
        dv.exponential_upper_bound(10, 1.0, 2.0, 2.0, 0.5, PARETO21)


# ---------------------------------------------------------------------------
# uniform-ratio scans

def test_single_summand_ratios_are_one_for_any_dependence():
    cfg = dv.RatioScanConfig(gamma=1.0, n_list=(1,), x_multipliers=(2, 5, 10),
                             samples=200_000, seed=21)
    rep = dv.uniform_ratio_scan(cfg, CENTERED, dp.fgm_chain(0.8), scope="n1")
    for e in rep.entries:
        assert abs(e.ratio - 1.0) <= 3 * e.estimate.stderr / e.denom + 1e-12


def test_scan_regime_and_band():
    cfg = dv.RatioScanConfig(gamma=1.0, n_list=(20,), x_multipliers=(2, 4),
                             samples=100_000, seed=22)
    rep = dv.uniform_ratio_scan(cfg, CENTERED, IND, scope="band")
    assert rep.regime == "centered"
    assert rep.band == (0.8, 1.2)
    step = mg.centered(mg.steppareto(2))
    rep2 = dv.uniform_ratio_scan(cfg, step, IND, scope="band2")
    assert rep2.band == (0.4, 2.3)
    assert rep2.L == 0.5


def test_scan_marks_starved_entries_inconclusive():
    cfg = dv.RatioScanConfig(gamma=1.0, n_list=(20,), x_multipliers=(50,),
                             samples=2_000, seed=23)
    rep = dv.uniform_ratio_scan(cfg, CENTERED, IND, scope="starve")
    assert rep.entries[0].status == "inconclusive"
    assert rep.verdict == "Inconclusive"


def test_scan_requires_finite_mean():
    with pytest.raises(PreconditionViolated):
        cfg = dv.RatioScanConfig(gamma=1.0, n_list=(5,), x_multipliers=(2,),
                                 samples=10_000, seed=24)
        dv.uniform_ratio_scan(cfg, mg.pareto(1.0, 1.0), IND, scope="inf")


def test_scan_config_validation():
    with pytest.raises(InvalidArg):
        dv.RatioScanConfig(gamma=0.0, n_list=(5,), x_multipliers=(2,), samples=1000)
    with pytest.raises(InvalidArg):
        dv.RatioScanConfig(gamma=1.0, n_list=(5,), x_multipliers=(0.5,), samples=1000)


def test_ak_scan_matches_crude_scan():
    cfg_ak = dv.RatioScanConfig(gamma=1.0, n_list=(10,), x_multipliers=(2, 4),
                                samples=100_000, method=dv.ASMUSSEN_KROESE, seed=25)
    cfg_cr = dv.RatioScanConfig(gamma=1.0, n_list=(10,), x_multipliers=(2, 4),
                                samples=400_000, method=dv.CRUDE_MC, seed=26)
    ra = dv.uniform_ratio_scan(cfg_ak, CENTERED, IND, scope="akscan")
    rc = dv.uniform_ratio_scan(cfg_cr, CENTERED, IND, scope="crscan")
    for ea, ec in zip(ra.entries, rc.entries):
        sigma = math.hypot(ea.estimate.stderr, ec.estimate.stderr)
        assert abs(ea.estimate.p_hat - ec.estimate.p_hat) <= 3 * sigma
