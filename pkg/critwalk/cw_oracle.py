import logging
import numpy as np
import networkx as nx

from itertools import combinations
from typing import Dict, List

from tqdm.autonotebook import tqdm

from .cw_structs import (dotdict, GraphInstance, BipartiteInstance,
                         ParameterError, SizeError, _jsonable)
from .cw_defaults import cw_defaults
from .cw_rand import RngStream, derive_stream
from . import cw_er, cw_regular, cw_intersection, cw_quantum


log = logging.getLogger(cw_defaults.logger)


def _union_find(units: int, links) -> List[int]:
    uf = nx.utils.UnionFind(range(units))
    for u, v in np.asarray(links, dtype=np.int64).reshape((-1, 2)).tolist():
        uf.union(u, v)
    return sorted((len(s) for s in uf.to_sets()), reverse=True)


def union_find_components(instance) -> List[int]:
    """ Exact component sizes of a materialized instance, sorted descending.

    Units are vertices, or intervals for the quantum model. Bipartite
    instances are merged attribute by attribute from the incidence, not from
    the stored projection.
    """
    instance.validate()
    if isinstance(instance, BipartiteInstance):
        uf = nx.utils.UnionFind(range(instance.n))
        for m in instance.members():
            if m.size > 1:
                uf.union(*m.tolist())
        return sorted((len(s) for s in uf.to_sets()), reverse=True)
    return _union_find(instance.unit_count(), instance.links())


def enumerate_er_cmax(n: int, p: float) -> Dict[int, float]:
    """ exact law of |C_max| in G(n, p), summed over all 2^C(n,2) graphs """
    cap = cw_defaults.oracle.enumerate_cap
    if n < 1:
        raise ParameterError(f'Enumeration needs n >= 1, got n={n}.')
    if n > cap:
        raise SizeError(f'Exhaustive enumeration is limited to n <= {cap}, got n={n}.')
    if not 0 <= p <= 1:
        raise ParameterError(f'Edge probability must lie in [0, 1], got {p}.')

    pairs = list(combinations(range(n), 2))
    m     = len(pairs)
    dist  = {}
    for mask in range(1 << m):
        edges = [pairs[i] for i in range(m) if mask >> i & 1]
        e     = len(edges)
        c     = _union_find(n, edges)[0]
        dist[c] = dist.get(c, 0.) + p**e * (1. - p)**(m - e)
    return dict(sorted(dist.items()))


def exact_tail(dist: Dict[int, float], n: int, A: float, direction: str = 'lower') -> float:
    """ tail probability of an enumerated |C_max| law, with the harness's thresholds """
    if direction == 'lower':
        return float(sum(q for c, q in dist.items() if c < n ** (2. / 3.) / A))
    return float(sum(q for c, q in dist.items() if c > A * n ** (2. / 3.)))


# Replay suite
# ============

class SuiteResult(dotdict):
    def __init__(self, model: str, count: int, matches: int = 0, first_mismatch=None):
        self.model          : str  = model
        self.count          : int  = count
        self.matches        : int  = matches
        self.first_mismatch : dict = first_mismatch

    @property
    def ok(self) -> bool:
        return self.matches == self.count


def _er_case(stream: RngStream, n_max: int, inject: bool):
    g = stream.generator
    n = int(g.integers(1, n_max + 1))
    p = min(1., g.uniform(.5, 2.) / n)
    inst  = cw_er.materialize(cw_er.ErParams(n, p_override=p), stream)
    order = g.permutation(n)

    replayed = inst
    if inject:
        comp = _component_labels(n, inst.edges)
        pair = next(((u, v) for u, v in combinations(range(n), 2) if comp[u] != comp[v]), None)
        if pair is None:
            return inst, None
        replayed = GraphInstance(n, np.vstack([inst.edges, [pair]]))
    return inst, cw_er.explore_on_graph(replayed, order).sorted_sizes()


def _regular_case(stream: RngStream, n_max: int, inject: bool):
    g = stream.generator
    d = int(g.integers(3, 6))
    n = int(g.integers(1, n_max + 1))
    if (n * d) % 2:
        n = n + 1 if n < n_max else n - 1
    inst  = cw_regular.percolate(cw_regular.pair_full(n, d, stream), g.uniform(0., 1.), stream)
    order = g.permutation(n)

    retained = inst.retained
    if inject:
        comp = _component_labels(n, inst.links())
        vp   = inst.vertex_pairs()
        cand = np.flatnonzero(~retained & (comp[vp[:, 0]] != comp[vp[:, 1]]))
        if cand.size == 0:
            return inst, None
        retained = retained.copy()
        retained[cand[0]] = True
    return inst, cw_regular.explore_on_instance(inst, retained, order).sorted_sizes()


def _intersection_case(stream: RngStream, n_max: int, inject: bool):
    g = stream.generator
    n = int(g.integers(1, n_max + 1))
    beta  = max(g.uniform(.2, 2.), 1. / n)
    gamma = min(g.uniform(.2, 2.), n)
    inst  = cw_intersection.materialize(cw_intersection.IntersectionParams(n, beta, gamma), stream)
    return inst, cw_er.explore_on_graph(cw_intersection.project(inst), g.permutation(n)).sorted_sizes()


def _quantum_case(stream: RngStream, n_max: int, inject: bool):
    g = stream.generator
    n = int(g.integers(1, n_max + 1))
    params = cw_quantum.QuantumParams(n, g.uniform(.5, 3.), g.uniform(.3, 2.), process='full')
    inst   = cw_quantum.materialize_quantum(params, stream)
    return inst, cw_quantum.full_explore(inst).sorted_sizes()


def _component_labels(n: int, links) -> np.ndarray:
    uf = nx.utils.UnionFind(range(n))
    for u, v in np.asarray(links, dtype=np.int64).reshape((-1, 2)).tolist():
        uf.union(u, v)
    return np.array([uf[v] for v in range(n)])


_CASES = dict(er=(_er_case, 64), regular=(_regular_case, 64),
              intersection=(_intersection_case, 64), quantum=(_quantum_case, 24))


def replay_suite(model: str, count: int, seed: int, inject_fault: bool = False,
                 progress: bool = False) -> SuiteResult:
    """ Compare every deterministic replay with union-find on `count` random instances.

    Instance i is drawn from derive_stream(seed, i). With `inject_fault`, the
    replay of the first instance that allows it sees one extra link joining two
    components, so the suite must report a mismatch.
    """
    if model not in _CASES:
        raise ParameterError(f"Unknown model '{model}' (expected one of {', '.join(_CASES)}).")
    if count < 1:
        raise ParameterError(f'Need at least one instance, got count={count}.')
    if inject_fault and model not in ('er', 'regular'):
        raise ParameterError(f'Fault injection is only available for the er and regular models, got {model}.')

    case, n_max = _CASES[model]
    result  = SuiteResult(model, count)
    pending = inject_fault
    for i in tqdm(range(count), desc=f'{model} replays', disable=not progress):
        inst, replayed = case(derive_stream(seed, i), n_max, pending)
        if replayed is None:
            inst, replayed = case(derive_stream(seed, i), n_max, False)
        else:
            pending = False

        truth = union_find_components(inst)
        if replayed == truth:
            result.matches += 1
        elif result.first_mismatch is None:
            result.first_mismatch = dict(index=i, replay=replayed, truth=truth, instance=_jsonable(dict(inst)))

    log.info(f'{model} replay suite: {result.matches}/{count} exact matches')
    return result
