import numpy as np
import pytest

from scipy import stats

from critwalk.cw_structs import QuantumInstance, ParameterError, SizeError, ValidationError
from critwalk.cw_rand import derive_stream, cut_gamma_cdf
from critwalk.cw_quantum import (QuantumParams, Arc, ArcLedger, critical_residual, solve_critical_lambda,
                                 solvability_threshold, reduced_explore, mean_offspring_check,
                                 materialize_quantum, full_explore, _residual_slope)
from critwalk.cw_oracle import union_find_components


def test_params_validation():
    assert QuantumParams(10, 2., .5).theta == 1.
    with pytest.raises(ParameterError):
        QuantumParams(10, 0., 1.)
    with pytest.raises(ParameterError):
        QuantumParams(10, 1., -1.)
    with pytest.raises(ParameterError):
        QuantumParams(10, 1., 1., process='other')


def test_residual_closed_form():
    beta, lam = 2., .5
    theta = beta * lam
    expected = (2 - (theta + 2) * np.exp(-theta)) / lam - 1
    assert critical_residual(beta, lam) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ParameterError):
        critical_residual(1., 0.)


def test_residual_slope_matches_finite_difference():
    slope = _residual_slope()
    for beta, lam in [(2., .3), (5., 1.), (.5, 2.)]:
        h = 1e-6
        fd = (critical_residual(beta, lam + h) - critical_residual(beta, lam - h)) / (2 * h)
        assert slope(beta, lam) == pytest.approx(fd, rel=1e-5)


@pytest.mark.parametrize('beta', [1.5, 2., 5., 50.])
def test_critical_root(beta):
    point = solve_critical_lambda(beta)
    assert len(point.lambdas) == 1
    lam = point.lambdas[0]
    assert 0 < lam <= 2
    assert abs(critical_residual(beta, lam)) < 1e-12
    assert point.residuals == [critical_residual(beta, lam)]


@pytest.mark.parametrize('excess', [1e-6, 1e-7, 1e-8, 1e-10])
def test_critical_root_just_above_threshold(excess):
    beta  = 1. + excess
    point = solve_critical_lambda(beta)
    assert len(point.lambdas) == 1
    lam = point.lambdas[0]
    # F(theta) / theta = 1 - theta^2 / 6 + O(theta^3)
    assert lam * beta == pytest.approx(np.sqrt(6 * excess), rel=1e-3)
    assert abs(point.residuals[0]) < 1e-12


@pytest.mark.parametrize('beta', [.5, .9, 1.])
def test_no_root_below_threshold(beta):
    assert solve_critical_lambda(beta).lambdas == []


def test_solvability_threshold():
    assert solvability_threshold() == pytest.approx(1., abs=1e-6)


def test_reduced_explore_profile():
    params = QuantumParams(500, 2., solve_critical_lambda(2.).lambdas[0])
    prof = reduced_explore(params, derive_stream(1, 0))
    assert sum(prof.sizes) == 500
    assert prof.extras.intervals_total == 500


def test_reduced_explore_huge_lambda():
    params = QuantumParams(50, 1e-300, 1e300)
    prof = reduced_explore(params, derive_stream(1, 1))
    assert prof.sizes == [1] * 50


def test_mean_offspring_near_one_at_criticality():
    beta = 2.
    params = QuantumParams(1000, beta, solve_critical_lambda(beta).lambdas[0])
    assert mean_offspring_check(params, 200_000, derive_stream(2, 0)) == pytest.approx(1., abs=.02)


def test_arc_ledger():
    led = ArcLedger(1.)
    assert led.covers(.3) and led.intact
    led.carve(Arc(0, .2, .3, False))
    assert led.total() == pytest.approx(.7)
    assert not led.covers(.3) and led.covers(.6) and not led.intact
    assert led.segs == [(0., .2), (.5, 1.)]

    led.carve(Arc(0, .9, .25, True))
    assert np.allclose(led.segs, [(.15, .2), (.5, .9)])
    assert not led.covers(.95) and not led.covers(.01)

    x = led.sample(.5)
    assert led.covers(x)
    with pytest.raises(ValidationError):
        led.carve(Arc(0, .25, .5, False))


def test_ledger_total_never_grows():
    s = derive_stream(3, 0)
    theta = 2.
    holes = np.sort(s.generator.random(8) * theta)
    inst = QuantumInstance(1, theta, 1., [holes], {}, np.zeros(8))
    led, last = ArcLedger(theta), theta
    for j in s.generator.permutation(8).tolist():
        led.carve(Arc(0, *inst.interval(0, j)))
        assert led.total() <= last + 1e-12
        last = led.total()
    assert led.empty()


def test_instance_geometry():
    inst = QuantumInstance(2, 1., 1., [[.2, .7], []], {(0, 1): [.5, .9]}, np.zeros(3))
    assert inst.unit_count() == 3
    assert inst.locate(0, .1) == 1 and inst.locate(0, .5) == 0 and inst.locate(0, .8) == 1
    start, length, wraps = inst.interval(0, 1)
    assert (start, length, wraps) == (pytest.approx(.7), pytest.approx(.5), True)
    assert sorted(map(tuple, inst.links().tolist())) == [(0, 2), (1, 2)]
    with pytest.raises(ValidationError):
        QuantumInstance(1, 1., 1., [[.5, .2]], {}, np.zeros(2))
    with pytest.raises(ValidationError):
        QuantumInstance(2, 1., 1., [[], []], {(0, 1): [1.5]}, np.zeros(2))


def test_materialize_cap():
    with pytest.raises(SizeError):
        materialize_quantum(QuantumParams(200, 1., 1.), derive_stream(4, 0))


def test_full_explore_matches_union_find():
    for i in range(40):
        s = derive_stream(5, i)
        n = int(s.generator.integers(1, 24))
        params = QuantumParams(n, s.generator.uniform(.5, 3.), s.generator.uniform(.3, 2.), 'full')
        inst = materialize_quantum(params, s)
        prof = full_explore(inst)
        assert sum(prof.sizes) == inst.unit_count() == prof.steps
        assert prof.sorted_sizes() == union_find_components(inst)


def test_interval_counts_and_lengths():
    theta = 1.5
    params = QuantumParams(100, 1.5, 1.)
    counts, lengths = [], []
    for i in range(200):
        s = derive_stream(6, i)
        inst = materialize_quantum(params, s)
        counts.extend(inst.interval_count(v) for v in range(inst.n))
        # interval around a uniform point is cut-gamma distributed
        for v, u in enumerate(s.generator.random(inst.n)):
            lengths.append(inst.interval(v, inst.locate(v, u * theta))[1])

    counts, lengths = np.array(counts), np.array(lengths)
    mean_count = theta + np.exp(-theta)
    assert abs(counts.mean() - mean_count) < 4 * counts.std() / np.sqrt(counts.size)

    atom = (1 + theta) * np.exp(-theta)
    full = np.isclose(lengths, theta)
    assert abs(full.mean() - atom) < 4 * np.sqrt(atom * (1 - atom) / lengths.size)
    below = lengths[~full]
    assert stats.kstest(below, lambda t: cut_gamma_cdf(t, theta) / (1 - atom)).pvalue > 1e-3


@pytest.mark.slow
def test_critical_first_step_mean_at_scale():
    beta = 2.
    params = QuantumParams(1_000_000, beta, solve_critical_lambda(beta).lambdas[0])
    mc = mean_offspring_check(params, 1_000_000, derive_stream(7, 0))
    assert .98 <= mc <= 1.002 + 4 * np.sqrt(3. / 1_000_000)


@pytest.mark.slow
def test_reduced_never_larger_than_full_on_average():
    n, beta, lam, trials = 40, 2., .6, 20_000
    reduced = np.array([reduced_explore(QuantumParams(n, beta, lam), derive_stream(20, i)).cmax
                        for i in range(trials)])
    full    = np.array([full_explore(materialize_quantum(QuantumParams(n, beta, lam, process='full'),
                                                         derive_stream(21, i))).cmax for i in range(trials)])
    se = np.sqrt(reduced.var() / trials + full.var() / trials)
    assert reduced.mean() <= full.mean() + 4 * se
