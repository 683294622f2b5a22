import heapq
import numpy as np

from typing import Optional, Sequence

from .cw_structs import dotdict, ComponentProfile, GraphInstance, ParameterError, SizeError
from .cw_defaults import cw_defaults
from .cw_rand import RngStream


class ErParams(dotdict):
    def __init__(self, n: int, lam: float = 0., p_override: Optional[float] = None):
        self.n          : int             = int(n)      # number of vertices
        self.lam        : float           = float(lam)  # window parameter lambda
        self.p_override : Optional[float] = None if p_override is None else float(p_override)
        self.validate()

    def validate(self):
        if self.n < 1:
            raise ParameterError(f'ER model needs n >= 1, got n={self.n}.')
        p = edge_prob(self)
        if not 0 <= p <= 1:
            raise ParameterError(f'Edge probability p = (1 + lambda n^(-1/3)) / n = {p} lies outside [0, 1] '
                                 f'(n={self.n}, lambda={self.lam}).')


def edge_prob(params: ErParams) -> float:
    if params.p_override is not None:
        return params.p_override
    n = params.n
    return (1. + params.lam * n ** (-1. / 3.)) / n


def upper_tail_reference(A, lam: float = 0.):
    """ exp(-A^3/8 + lam A^2/2 - lam^2 A/2), the known shape of P(|C_max| > A n^{2/3}) """
    A = np.asarray(A, dtype=np.float64)
    return np.exp(-A**3 / 8. + lam * A**2 / 2. - lam**2 * A / 2.)


def explore(params: ErParams, stream: RngStream) -> ComponentProfile:
    """ Exploration of G(n, p) one vertex per step.

    Only the active count Y is tracked: given the past, the number of unseen
    vertices revealed at step t is Bin(U_{t-1} - [Y_{t-1} = 0], p) with
    U_{t-1} = n - (t - 1) - Y_{t-1}.
    """
    n = params.n
    p = edge_prob(params)
    binomial = stream.generator.binomial

    bounds = [0]
    sizes  = []
    Y, Ymax = 0, 0
    for t in range(1, n + 1):
        U     = n - (t - 1) - Y
        fresh = Y == 0
        eta   = binomial(U - fresh, p) if p > 0 else 0
        Y     = Y + eta - 1 + fresh
        if Y > Ymax:
            Ymax = Y
        if Y == 0:
            sizes.append(t - bounds[-1])
            bounds.append(t)

    return ComponentProfile(sizes, bounds, int(Ymax), n)


def materialize(params: ErParams, stream: RngStream, cap: Optional[int] = None) -> GraphInstance:
    cap = cw_defaults.oracle.cap if cap is None else cap
    n   = params.n
    if n > cap:
        raise SizeError(f'Refusing to materialize G(n, p) with n={n} above the oracle cap {cap}.')

    # Bin(N, p) edges, then a uniform subset of the N pair indices
    g = stream.generator
    N = n * (n - 1) // 2
    m = int(g.binomial(N, edge_prob(params))) if N else 0
    if m == 0:
        return GraphInstance(n, np.empty((0, 2), dtype=np.int64))
    k = np.sort(g.choice(N, size=m, replace=False))

    # row i of the upper triangle starts at index i n - i (i + 1) / 2
    rows  = np.arange(n - 1, dtype=np.int64)
    start = rows * n - rows * (rows + 1) // 2
    i = np.searchsorted(start, k, side='right') - 1
    j = k - start[i] + i + 1
    return GraphInstance(n, np.stack([i, j], axis=1))


def explore_on_graph(instance: GraphInstance, ordering: Optional[Sequence[int]] = None) -> ComponentProfile:
    """ Deterministic replay of the vertex exploration on a realized graph.

    `ordering` is a permutation of the vertices; "first" active or unseen
    vertex refers to it. Defaults to 0..n-1.
    """
    n     = instance.n
    order = np.arange(n) if ordering is None else np.asarray(ordering, dtype=np.int64)
    if not np.array_equal(np.sort(order), np.arange(n)):
        raise ParameterError('Vertex ordering must be a permutation of 0..n-1.')
    rank  = np.argsort(order)
    adj   = instance.adjacency()

    UNSEEN, ACTIVE, EXPLORED = 0, 1, 2
    status = np.zeros(n, dtype=np.int8)
    active = []      # heap of (rank, vertex)
    scan   = 0       # next candidate in `order` for an excursion start

    bounds = [0]
    sizes  = []
    Y, Ymax = 0, 0
    for t in range(1, n + 1):
        if Y == 0:
            while status[order[scan]] != UNSEEN:
                scan += 1
            u = int(order[scan])
        else:
            u = heapq.heappop(active)[1]

        status[u] = EXPLORED
        eta = 0
        for x in adj[u]:
            if status[x] == UNSEEN:
                status[x] = ACTIVE
                heapq.heappush(active, (rank[x], x))
                eta += 1

        Y = Y + eta - (Y > 0)
        Ymax = max(Ymax, Y)
        if Y == 0:
            sizes.append(t - bounds[-1])
            bounds.append(t)

    return ComponentProfile(sizes, bounds, int(Ymax), n)
