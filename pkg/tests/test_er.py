import numpy as np
import pytest

from critwalk.cw_structs import GraphInstance, ParameterError, SizeError, ValidationError
from critwalk.cw_rand import derive_stream
from critwalk.cw_er import ErParams, edge_prob, upper_tail_reference, explore, materialize, explore_on_graph
from critwalk.cw_oracle import union_find_components
from critwalk.utils import two_sample_chi2


def test_edge_prob_window():
    assert edge_prob(ErParams(1000, lam=0.)) == pytest.approx(1e-3)
    assert edge_prob(ErParams(1000, lam=2.)) == pytest.approx((1 + 2 / 10) / 1000)
    assert edge_prob(ErParams(1000, p_override=.25)) == .25


def test_params_validation():
    with pytest.raises(ParameterError):
        ErParams(0)
    with pytest.raises(ParameterError):
        ErParams(8, lam=-10.)
    with pytest.raises(ParameterError):
        ErParams(8, p_override=1.5)


def test_explore_profile_consistent():
    prof = explore(ErParams(500), derive_stream(1, 0))
    assert sum(prof.sizes) == 500
    assert prof.steps == 500
    assert min(prof.sizes) >= 1
    assert prof.excursion_lengths() == prof.sizes
    assert prof.excursion_bounds[-1] == 500
    assert prof.max_active <= 500


def test_explore_deterministic():
    a = explore(ErParams(300), derive_stream(2, 5))
    b = explore(ErParams(300), derive_stream(2, 5))
    assert a == b


def test_explore_extremes():
    assert explore(ErParams(30, p_override=1.), derive_stream(3, 0)).sizes == [30]
    assert explore(ErParams(30, p_override=0.), derive_stream(3, 0)).sizes == [1] * 30


def test_replay_small_graphs():
    K4 = GraphInstance(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    assert explore_on_graph(K4).sizes == [4]
    assert explore_on_graph(GraphInstance(5, [])).sizes == [1] * 5

    triangles = GraphInstance(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert explore_on_graph(triangles, [5, 4, 3, 2, 1, 0]).sizes == [3, 3]


def test_replay_rejects_bad_ordering():
    with pytest.raises(ParameterError):
        explore_on_graph(GraphInstance(3, []), [0, 0, 1])


def test_graph_validation():
    with pytest.raises(ValidationError):
        GraphInstance(3, [(0, 0)])
    with pytest.raises(ValidationError):
        GraphInstance(3, [(0, 1), (1, 0)])
    with pytest.raises(ValidationError):
        GraphInstance(3, [(0, 3)])


def test_materialize_cap():
    with pytest.raises(SizeError):
        materialize(ErParams(20), derive_stream(1, 0), cap=10)


def test_materialize_complete_and_empty():
    full = materialize(ErParams(6, p_override=1.), derive_stream(1, 1))
    assert sorted(map(tuple, full.edges.tolist())) == [(i, j) for i in range(6) for j in range(i + 1, 6)]
    assert materialize(ErParams(6, p_override=0.), derive_stream(1, 2)).edges.shape == (0, 2)
    assert materialize(ErParams(1), derive_stream(1, 3)).edges.shape == (0, 2)


def test_materialize_edge_count_mean():
    counts = [materialize(ErParams(100, p_override=.05), derive_stream(2, i)).edges.shape[0] for i in range(10_000)]
    assert np.mean(counts) == pytest.approx(247.5, abs=2.)


def test_materialize_pairs_uniform():
    n, draws = 5, 20_000
    hits = np.zeros((n, n))
    for i in range(draws):
        e = materialize(ErParams(n, p_override=.3), derive_stream(3, i)).edges
        hits[e[:, 0], e[:, 1]] += 1
    freq = hits[np.triu_indices(n, k=1)] / draws
    assert np.all(np.abs(freq - .3) < 4 * np.sqrt(.3 * .7 / draws))


def test_replay_matches_union_find():
    for i in range(50):
        s    = derive_stream(4, i)
        n    = int(s.generator.integers(1, 40))
        inst = materialize(ErParams(n, p_override=min(1., 1.5 / n)), s)
        assert explore_on_graph(inst, s.generator.permutation(n)).sorted_sizes() == union_find_components(inst)


def test_exploration_law_matches_materialized_graph():
    n, p, trials = 20, 1.5 / 20, 4000
    walk  = [explore(ErParams(n, p_override=p), derive_stream(5, i)).cmax for i in range(trials)]
    graph = [explore_on_graph(materialize(ErParams(n, p_override=p), derive_stream(6, i))).cmax
             for i in range(trials)]
    assert two_sample_chi2(walk, graph) > 1e-3


def test_upper_tail_reference():
    assert upper_tail_reference(0.) == 1.
    assert upper_tail_reference(2., 0.) == pytest.approx(np.exp(-1.))
    assert np.all(np.diff(upper_tail_reference([1., 2., 3.])) < 0)
