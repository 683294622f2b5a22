import numpy as np

from typing import Optional

from .cw_structs import dotdict, ComponentProfile, BipartiteInstance, GraphInstance, ParameterError, SizeError
from .cw_defaults import cw_defaults
from .cw_rand import RngStream


class IntersectionParams(dotdict):
    def __init__(self, n: int, beta: float, gamma: float):
        self.n     : int   = int(n)          # number of vertices
        self.beta  : float = float(beta)     # attribute density: k = floor(beta n) attributes in total
        self.gamma : float = float(gamma)    # link probability p = gamma / n
        self.validate()

    @property
    def k(self) -> int:
        return int(np.floor(self.beta * self.n))

    @property
    def p(self) -> float:
        return self.gamma / self.n

    @property
    def critical(self) -> bool:
        return abs(self.beta * self.gamma**2 - 1.) < cw_defaults.tol.critical

    def validate(self):
        if self.n < 1:
            raise ParameterError(f'Intersection model needs n >= 1, got n={self.n}.')
        if not (self.beta > 0 and self.gamma >= 0):
            raise ParameterError(f'Intersection model needs beta > 0 and gamma >= 0, '
                                 f'got beta={self.beta}, gamma={self.gamma}.')
        if self.k < 1:
            raise ParameterError(f'k = floor(beta n) must be at least 1, got k={self.k}.')
        if not 0 <= self.p <= 1:
            raise ParameterError(f'p = gamma / n = {self.p} lies outside [0, 1].')


def _hit_prob(N, p: float):
    """ 1 - (1 - p)^N, the chance an unseen vertex shares one of N fresh attributes """
    N = np.asarray(N)
    if p >= 1:
        return np.where(N > 0, 1., 0.)
    return -np.expm1(N * np.log1p(-p))


def explore(params: IntersectionParams, stream: RngStream) -> ComponentProfile:
    """ Vertex exploration of G(n, k, p) tracking only the discovered-attribute count.

    At each step N_t ~ Bin(k - |D_{t-1}|, p) fresh attributes are linked to
    the explored vertex, and each remaining unseen vertex shares one of them
    with probability 1 - (1 - p)^{N_t}.
    """
    n, k, p  = params.n, params.k, params.p
    binomial = stream.generator.binomial

    bounds = [0]
    sizes  = []
    Y, Ymax, D = 0, 0, 0
    for t in range(1, n + 1):
        U     = n - (t - 1) - Y
        fresh = Y == 0
        N     = binomial(k - D, p) if p > 0 else 0
        D    += N
        eta   = binomial(U - fresh, float(_hit_prob(N, p))) if N > 0 else 0
        Y     = Y + eta - 1 + fresh
        if Y > Ymax:
            Ymax = Y
        if Y == 0:
            sizes.append(t - bounds[-1])
            bounds.append(t)

    return ComponentProfile(sizes, bounds, int(Ymax), n, attributes_discovered_total=int(D))


def analytic_mean_offspring(params: IntersectionParams) -> float:
    """ E[eta_1] = (n - 1)(1 - (1 - p^2)^k) from a fresh start """
    n, k, p = params.n, params.k, params.p
    return float((n - 1) * -np.expm1(k * np.log1p(-p * p))) if p < 1 else float(n - 1)


def mean_offspring_check(params: IntersectionParams, samples: int, stream: RngStream) -> float:
    """ Monte Carlo mean of the first-step offspring; at most n k p^2 """
    if samples < 1:
        raise ParameterError(f'Need at least one sample, got {samples}.')
    n, k, p = params.n, params.k, params.p
    g   = stream.generator
    N   = g.binomial(k, p, size=samples)
    eta = g.binomial(n - 1, _hit_prob(N, p))
    return float(eta.mean())


def materialize(params: IntersectionParams, stream: RngStream, cap: Optional[int] = None) -> BipartiteInstance:
    """ bipartite vertex-attribute incidence with independent Bernoulli(p) links """
    cap = cw_defaults.oracle.cap if cap is None else cap
    if params.n > cap:
        raise SizeError(f'Refusing to materialize G(n, k, p) with n={params.n} above the oracle cap {cap}.')

    n, k, p = params.n, params.k, params.p
    g   = stream.generator
    inc = []
    for a, m in enumerate(g.binomial(n, p, size=k).tolist()):
        for v in g.choice(n, size=m, replace=False).tolist():
            inc.append((v, a))
    return BipartiteInstance(n, k, inc)


def project(instance: BipartiteInstance) -> GraphInstance:
    return instance.as_graph()
