import logging
import numpy as np

from typing import List, Optional, Tuple

from .cw_structs import dotdict, ParameterError
from .cw_defaults import cw_defaults
from .cw_rand import RngStream
from .utils import wilson_interval


log = logging.getLogger(cw_defaults.logger)

_CHUNK = 1 << 18


# Increment laws
# ==============
#
# Every law is integer valued on the lattice a + g Z with support in [a, b];
# g = 0 marks a point mass.

class IncrementLaw(dotdict):
    name = 'law'

    def __init__(self, **params):
        self.params : dotdict = dotdict(params)

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def support(self) -> Tuple[int, float, int]:
        """ (min, max, span) of the increment lattice """
        raise NotImplementedError

    @property
    def centered(self) -> bool:
        return abs(self.mean) < cw_defaults.tol.closed_form

    def reachable(self, n: int, j: int, start: int = 0) -> bool:
        """ whether a path with start + S_t > 0 for t in [n] can end at start + S_n = j

        Every law here steps down by at most one, so taking the up-steps first
        keeps a path positive whenever its end point is.
        """
        a, b, g = self.support()
        if j < 1 or n < 1 or start < 0:
            return False
        if start < 1 and b < 1:
            return False
        D = j - start
        if g == 0:
            return D == n * a
        return (D - n * a) % g == 0 and n * a <= D <= n * b

    def describe(self) -> str:
        return ';'.join(f'{k}={v}' for k, v in self.params.items())

    def __repr__(self):
        return f'{type(self).__name__}({self.describe()})'


class PoissonMinusOne(IncrementLaw):
    name = 'poisson'

    def __init__(self):
        super().__init__()

    def sample(self, gen, size):
        return gen.poisson(1., size) - 1

    @property
    def mean(self):
        return 0.

    def support(self):
        return -1, np.inf, 1


class BinomialMinusOne(IncrementLaw):
    name = 'binomial'

    def __init__(self, count: int, prob: float):
        if count < 0 or not 0 <= prob <= 1:
            raise ParameterError(f'Bin(count, prob) - 1 needs count >= 0 and prob in [0, 1], '
                                 f'got count={count}, prob={prob}.')
        super().__init__(count=int(count), prob=float(prob))

    def sample(self, gen, size):
        return gen.binomial(self.params.count, self.params.prob, size) - 1

    @property
    def mean(self):
        return self.params.count * self.params.prob - 1.

    def support(self):
        c, p = self.params.count, self.params.prob
        if p == 0 or c == 0:
            return -1, -1, 0
        if p == 1:
            return c - 1, c - 1, 0
        return -1, c - 1, 1


class RegularStep(IncrementLaw):
    """ (d - 1) Bernoulli(prob) - 1 """
    name = 'regular'

    def __init__(self, d: int, prob: float):
        if d < 2 or not 0 <= prob <= 1:
            raise ParameterError(f'(d - 1) Bernoulli(prob) - 1 needs d >= 2 and prob in [0, 1], '
                                 f'got d={d}, prob={prob}.')
        super().__init__(d=int(d), prob=float(prob))

    def _prob(self) -> float:
        return self.params.prob

    def sample(self, gen, size):
        return (self.params.d - 1) * (gen.random(size) < self._prob()).astype(np.int64) - 1

    @property
    def mean(self):
        return (self.params.d - 1) * self._prob() - 1.

    def support(self):
        d, p = self.params.d, self._prob()
        if p == 0:
            return -1, -1, 0
        if p == 1:
            return d - 2, d - 2, 0
        return -1, d - 2, d - 1


class CutWalk(RegularStep):
    """ d - 2 with probability 1 / (d - 1), else -1; mean zero """
    name = 'cut'

    def __init__(self, d: int):
        if d < 3:
            raise ParameterError(f'Cut walk needs d >= 3, got d={d}.')
        IncrementLaw.__init__(self, d=int(d))

    def _prob(self):
        return 1. / (self.params.d - 1)

    @property
    def mean(self):
        return 0.


class Rademacher(IncrementLaw):
    name = 'rademacher'

    def __init__(self):
        super().__init__()

    def sample(self, gen, size):
        return 2 * (gen.random(size) < .5).astype(np.int64) - 1

    @property
    def mean(self):
        return 0.

    def support(self):
        return -1, 1, 2


LAWS = {cls.name: cls for cls in (PoissonMinusOne, BinomialMinusOne, RegularStep, CutWalk, Rademacher)}


def make_law(name: str, **params) -> IncrementLaw:
    if name not in LAWS:
        raise ParameterError(f"Unknown increment law '{name}' (expected one of {', '.join(LAWS)}).")
    params = {k: v for k, v in params.items() if v is not None}
    try:
        return LAWS[name](**params)
    except TypeError as e:
        raise ParameterError(f"Bad parameters {params} for law '{name}': {e}") from None


# Estimates
# =========

class Estimate(dotdict):
    def __init__(self, law: IncrementLaw, horizon: int, j: Optional[int], trials: int, hits: int, flag: str = ''):
        self.law     : str   = law.name
        self.params  : str   = law.describe()
        self.horizon : int   = int(horizon)
        self.j       : Optional[int] = j
        self.trials  : int   = int(trials)
        self.hits    : int   = int(hits)
        self.phat    : float = hits / trials
        self.ci_lo, self.ci_hi = wilson_interval(hits, trials)
        self.flag    : str   = flag      # diagnostic, e.g. 'unreachable'

    def to_row(self) -> list:
        return [self.get(c) for c in cw_defaults.columns.walk]


def _check(horizon: int, trials: int, start: int = 0):
    if horizon < 1:
        raise ParameterError(f'Horizon must be at least 1, got {horizon}.')
    if trials < 1:
        raise ParameterError(f'Need at least one trial, got {trials}.')
    if start < 0:
        raise ParameterError(f'Walks start at a nonnegative level, got start={start}.')


def _survivors(law: IncrementLaw, horizon: int, trials: int, stream: RngStream, start: int) -> np.ndarray:
    """ end points S_T of the walks that stayed strictly positive up to T """
    g   = stream.generator
    out = []
    for lo in range(0, trials, _CHUNK):
        pos = np.full(min(_CHUNK, trials - lo), start, dtype=np.int64)
        for _ in range(horizon):
            pos = pos + law.sample(g, pos.size)
            pos = pos[pos > 0]
            if pos.size == 0:
                break
        out.append(pos)
    return np.concatenate(out)


def stay_positive_estimate(law: IncrementLaw, horizon: int, trials: int, stream: RngStream,
                           start: int = 1) -> Estimate:
    """ P(start + S_t > 0 for all t <= T) """
    _check(horizon, trials, start)
    hits = _survivors(law, horizon, trials, stream, start).size
    return Estimate(law, horizon, None, trials, hits)


def ballot_estimate(law: IncrementLaw, n: int, j: int, trials: int, stream: RngStream,
                    start: int = 0) -> Estimate:
    """ P(start + S_t > 0 for all t in [n], start + S_n = j) for a centered law """
    _check(n, trials, start)
    if not law.centered:
        raise ParameterError(f'Ballot estimates need a centered law, {law!r} has mean {law.mean}.')
    if j < 0:
        raise ParameterError(f'Ballot end point must be nonnegative, got j={j}.')

    if not law.reachable(n, j, start):
        log.info(f'j={j} is not reachable in {n} steps of {law!r}')
        return Estimate(law, n, j, trials, 0, flag='unreachable')

    end = _survivors(law, n, trials, stream, start)
    return Estimate(law, n, j, trials, int(np.count_nonzero(end == j)))


# Chernoff
# ========

def chernoff_bound(N: int, P: float, x: float) -> float:
    """ upper bound on P(Bin(N, P) >= N P + x) """
    if N < 1 or not 0 <= P <= 1 or x < 0:
        raise ParameterError(f'Chernoff bound needs N >= 1, P in [0, 1] and x >= 0, got N={N}, P={P}, x={x}.')
    if x == 0:
        return 1.
    return float(np.exp(-x**2 / (2. * (N * P + x / 3.))))


class ChernoffEstimate(dotdict):
    def __init__(self, N: int, P: float, x: float, trials: int, hits: int):
        self.N      : int   = int(N)
        self.P      : float = float(P)
        self.x      : float = float(x)
        self.trials : int   = int(trials)
        self.hits   : int   = int(hits)
        self.phat   : float = hits / trials
        self.ci_lo, self.ci_hi = wilson_interval(hits, trials)
        self.bound  : float = chernoff_bound(N, P, x)

    def to_row(self) -> list:
        return [self[c] for c in cw_defaults.columns.chernoff]


def chernoff_exceedance(N: int, P: float, x: float, trials: int, stream: RngStream) -> ChernoffEstimate:
    """ Monte Carlo frequency of Bin(N, P) >= N P + x """
    chernoff_bound(N, P, x)
    if trials < 1:
        raise ParameterError(f'Need at least one trial, got {trials}.')
    g, hits = stream.generator, 0
    for lo in range(0, trials, _CHUNK):
        B = g.binomial(N, P, size=min(_CHUNK, trials - lo))
        hits += int(np.count_nonzero(B >= N * P + x))
    return ChernoffEstimate(N, P, x, trials, hits)


# Excursions
# ==========

def excursion_lengths(path) -> Tuple[List[int], int]:
    """ Lengths t_i - t_{i-1} between successive zeros of a path (t_0 = 0).

    The path holds Y_1, Y_2, ...; a trailing run without a return to zero is
    returned separately as the open length.
    """
    path = np.asarray(path, dtype=np.int64)
    if path.size and path[0] < 0:
        raise ParameterError(f'Path must start nonnegative, got {path[0]}.')
    zeros = np.flatnonzero(path == 0) + 1
    bounds = np.concatenate([[0], zeros])
    return np.diff(bounds).tolist(), int(path.size - bounds[-1])
