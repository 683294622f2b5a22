import heapq
import logging
import warnings
import numpy as np

from typing import Optional, Sequence

from .cw_structs import dotdict, ComponentProfile, ConfigurationInstance, ParameterError, SizeError
from .cw_defaults import cw_defaults
from .cw_rand import RngStream, derive_stream


log = logging.getLogger(cw_defaults.logger)

UNSEEN, ACTIVE, EXPLORED = 0, 1, 2


class RegParams(dotdict):
    def __init__(self, n: int, d: int, lam: float = 0., p_override: Optional[float] = None):
        self.n          : int             = int(n)      # number of vertices
        self.d          : int             = int(d)      # degree
        self.lam        : float           = float(lam)  # window parameter lambda
        self.p_override : Optional[float] = None if p_override is None else float(p_override)
        self.validate()

    def validate(self):
        if self.n < 1:
            raise ParameterError(f'Regular model needs n >= 1, got n={self.n}.')
        if self.d < 3:
            raise ParameterError(f'Regular model needs d >= 3, got d={self.d}.')
        if (self.d * self.n) % 2:
            raise ParameterError(f'd * n must be even, got d={self.d}, n={self.n}.')
        p = percolation_prob(self)
        if not 0 <= p <= 1:
            raise ParameterError(f'Percolation probability p = (1 + lambda n^(-1/3)) / (d - 1) = {p} '
                                 f'lies outside [0, 1] (n={self.n}, d={self.d}, lambda={self.lam}).')


def percolation_prob(params: RegParams) -> float:
    if params.p_override is not None:
        return params.p_override
    return (1. + params.lam * params.n ** (-1. / 3.)) / (params.d - 1)


def simple_probability_limit(d: int) -> float:
    """ limiting probability that the configuration multigraph is simple """
    return float(np.exp((1. - d**2) / 4.))


class StubState:
    """ Status of every stub during the half-edge exploration.

    Stubs of vertex v are v*d .. v*d + d - 1. The unexplored stubs (active or
    unseen) are kept in an index-swap array so that removing a stub and
    drawing a uniform unexplored stub are both O(1).
    """
    def __init__(self, n: int, d: int):
        self.n, self.d = n, d
        dn = n * d
        self.status   = np.zeros(dn, dtype=np.int8)
        self.pool     = np.arange(dn, dtype=np.int64)
        self.where    = np.arange(dn, dtype=np.int64)
        self.size     = dn          # unexplored stubs are pool[:size]
        self.active   = []          # heap of active stubs (lazy deletion)
        self.n_active = 0
        self.joined   = np.zeros(n, dtype=bool)   # vertex belongs to an explored component
        self.scan     = 0

    def _drop(self, s: int):
        i, last = self.where[s], self.pool[self.size - 1]
        self.pool[i], self.where[last] = last, i
        self.pool[self.size - 1], self.where[s] = s, self.size - 1
        self.size -= 1

    def explore(self, s: int):
        if self.status[s] == ACTIVE:
            self.n_active -= 1
        self.status[s] = EXPLORED
        self._drop(s)

    def activate_vertex(self, v: int) -> int:
        """ declare active every unseen stub of v; returns how many """
        d, k = self.d, 0
        for s in range(v * d, v * d + d):
            if self.status[s] == UNSEEN:
                self.status[s] = ACTIVE
                heapq.heappush(self.active, s)
                k += 1
        self.n_active += k
        self.joined[v] = True
        return k

    def lowest_active(self) -> int:
        while self.status[self.active[0]] != ACTIVE:
            heapq.heappop(self.active)
        return self.active[0]

    def first_unseen(self, order: np.ndarray) -> int:
        """ lowest unseen stub of the first vertex (in `order`) still holding one """
        d = self.d
        while True:
            v  = order[self.scan]
            st = self.status[v * d:v * d + d]
            hit = np.flatnonzero(st == UNSEEN)
            if hit.size:
                return int(v * d + hit[0])
            self.scan += 1


def _run(n: int, d: int, state: StubState, order: np.ndarray, pair_step) -> ComponentProfile:
    """ Common driver of the half-edge exploration.

    `pair_step(e, state)` returns (h, retained) for the active stub e. Component
    sizes are counted in vertices: a vertex joins when its stubs are
    activated. Vertices whose stubs all get explored without being activated
    are isolated in the percolated graph and are reported as singleton
    components after the last excursion, with half-edge length 0.
    """
    bounds, sizes, halfedge = [0], [], []
    members, Ymax = 0, 0
    steps = n * d // 2

    for t in range(1, steps + 1):
        if state.n_active == 0:
            e = state.first_unseen(order)
            state.activate_vertex(e // d)
            members = 1

        e = state.lowest_active()
        h, retained = pair_step(e, state)
        state.explore(e)

        if state.status[h] == UNSEEN and retained:
            state.explore(h)
            state.activate_vertex(h // d)
            members += 1
        else:
            state.explore(h)

        if state.n_active > Ymax:
            Ymax = state.n_active
        if state.n_active == 0:
            sizes.append(members)
            halfedge.append(t - bounds[-1])
            bounds.append(t)

    isolated = np.flatnonzero(~state.joined)
    sizes.extend([1] * isolated.size)
    halfedge.extend([0] * isolated.size)

    return ComponentProfile(sizes, bounds, int(Ymax), steps,
                            halfedge_lengths=halfedge,
                            halfedge_excursion_max=max(halfedge) if halfedge else 0)


def explore(params: RegParams, stream: RngStream) -> ComponentProfile:
    """ Half-edge exploration of G'(n, d, p), pairing stubs on the fly.

    The active stub e_t is the lowest-indexed one; its partner is uniform
    over the unexplored stubs other than e_t and the edge is retained with
    probability p independently.
    """
    n, d  = params.n, params.d
    p     = percolation_prob(params)
    steps = n * d // 2
    g     = stream.generator
    u_h   = g.random(steps)
    u_r   = g.random(steps)
    state = StubState(n, d)
    clock = iter(range(steps))

    def pair_step(e, st):
        t = next(clock)
        # e sits in the pool; draw among the other size - 1 stubs
        i = int(u_h[t] * (st.size - 1))
        if i >= st.where[e]:
            i += 1
        return int(st.pool[i]), bool(u_r[t] < p)

    return _run(n, d, state, np.arange(n), pair_step)


def pair_full(n: int, d: int, stream: RngStream) -> ConfigurationInstance:
    """ uniform perfect matching of the dn labelled stubs """
    if n < 1 or d < 1:
        raise ParameterError(f'Pairing needs n >= 1 and d >= 1, got n={n}, d={d}.')
    if (n * d) % 2:
        raise ParameterError(f'd * n must be even, got d={d}, n={n}.')
    perm = stream.generator.permutation(n * d)
    return ConfigurationInstance(n, d, perm.reshape((-1, 2)))


def simple_count(n: int, d: int, trials: int, master_seed: int) -> int:
    """ number of simple graphs among `trials` pairings, pairing i drawn from derive_stream(master_seed, i) """
    if trials < 1:
        raise ParameterError(f'Need at least one trial, got {trials}.')
    return sum(is_simple(pair_full(n, d, derive_stream(master_seed, i))) for i in range(trials))


def percolate(instance: ConfigurationInstance, p: float, stream: RngStream) -> ConfigurationInstance:
    if not 0 <= p <= 1:
        raise ParameterError(f'Retention probability must lie in [0, 1], got {p}.')
    return instance.with_retention(stream.generator.random(instance.pairs.shape[0]) < p)


def is_simple(instance: ConfigurationInstance) -> bool:
    vp = instance.vertex_pairs()
    if np.any(vp[:, 0] == vp[:, 1]):
        return False
    key = np.minimum(vp[:, 0], vp[:, 1]) * instance.n + np.maximum(vp[:, 0], vp[:, 1])
    return np.unique(key).size == key.size


def explore_on_instance(instance: ConfigurationInstance, retained=None,
                        ordering: Optional[Sequence[int]] = None) -> ComponentProfile:
    """ Deterministic replay of the half-edge exploration on a realized pairing.

    `retained` holds one percolation bit per matched pair (defaults to the
    instance's own marks, or all retained); `ordering` is the vertex order
    used to start new excursions.
    """
    n, d = instance.n, instance.d
    if retained is None:
        retained = instance.retained if instance.retained is not None else np.ones(instance.pairs.shape[0], bool)
    retained = np.asarray(retained, dtype=bool)
    if retained.shape != (instance.pairs.shape[0],):
        raise ParameterError(f'Expected {instance.pairs.shape[0]} retention bits, got {retained.shape}.')

    order = np.arange(n) if ordering is None else np.asarray(ordering, dtype=np.int64)
    if not np.array_equal(np.sort(order), np.arange(n)):
        raise ParameterError('Vertex ordering must be a permutation of 0..n-1.')

    partner = instance.partner()
    pidx    = instance.pair_index()

    def pair_step(e, st):
        return int(partner[e]), bool(retained[pidx[e]])

    return _run(n, d, StubState(n, d), order, pair_step)


def explore_conditioned(params: RegParams, stream: RngStream, cap: Optional[int] = None,
                        max_attempts: int = 10_000) -> ComponentProfile:
    """ exploration conditioned on a simple underlying graph, by rejection """
    cap = cw_defaults.oracle.cap if cap is None else cap
    if params.n > cap:
        raise SizeError(f'Conditioned mode materializes the pairing; n={params.n} exceeds the cap {cap}.')

    p = percolation_prob(params)
    for attempt in range(1, max_attempts + 1):
        inst = pair_full(params.n, params.d, stream)
        if is_simple(inst):
            break
    else:
        raise RuntimeError(f'No simple pairing after {max_attempts} attempts (n={params.n}, d={params.d}).')

    if attempt > 100:
        warnings.warn(f'Conditioned mode needed {attempt} pairings to find a simple graph.')

    prof = explore_on_instance(percolate(inst, p, stream))
    prof.extras.simple_flag = True
    prof.extras.attempts    = attempt
    return prof


def relcomp_violations(profile: ComponentProfile, d: int) -> int:
    """ components whose half-edge excursion exceeds (d - 1) |C| + 1 """
    return int(sum(h > (d - 1) * c + 1 for c, h in zip(profile.sizes, profile.extras.halfedge_lengths)))
