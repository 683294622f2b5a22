import heapq
import logging
import warnings
import numpy as np
import symengine as si

from bisect import bisect_right
from functools import lru_cache
from typing import List, Optional

from scipy import optimize

from .cw_structs import dotdict, ComponentProfile, QuantumInstance, ParameterError, SizeError, ValidationError
from .cw_defaults import cw_defaults
from .cw_rand import RngStream, CutGammaParams, sample_cut_gamma, sample_poisson_process
from .cw_symb import compile_symb_func


log = logging.getLogger(cw_defaults.logger)


class QuantumParams(dotdict):
    def __init__(self, n: int, beta: float, lam: float, process: str = 'reduced'):
        self.n       : int   = int(n)         # number of circles
        self.beta    : float = float(beta)    # circle length in the original scaling
        self.lam     : float = float(lam)     # hole intensity in the original scaling
        self.process : str   = process        # 'reduced' or 'full'
        self.validate()

    @property
    def theta(self) -> float:
        return self.lam * self.beta

    def validate(self):
        if self.n < 1:
            raise ParameterError(f'Quantum model needs n >= 1, got n={self.n}.')
        if not (self.beta > 0 and self.lam > 0) or not self.theta > 0:
            raise ParameterError(f'Quantum model needs beta > 0, lambda > 0 and theta = lambda beta > 0, '
                                 f'got beta={self.beta}, lambda={self.lam}.')
        if self.process not in ('reduced', 'full'):
            raise ParameterError(f"Unknown quantum process '{self.process}' (expected 'reduced' or 'full').")


class CriticalPoint(dotdict):
    def __init__(self, beta: float, lambdas: List[float], residuals: List[float]):
        self.beta      : float       = float(beta)
        self.lambdas   : List[float] = list(lambdas)
        self.residuals : List[float] = list(residuals)


# Critical curve
# ==============

def _F(theta):
    """ F(theta) = 2 (1 - e^{-theta}) - theta e^{-theta} = 2 - (theta + 2) e^{-theta} """
    return -2. * np.expm1(-theta) - theta * np.exp(-theta)


def critical_residual(beta: float, lam: float) -> float:
    """ F(beta, lambda) - 1 with F(beta, lambda) = F(lambda beta) / lambda """
    if not (beta > 0 and lam > 0):
        raise ParameterError(f'Critical residual needs beta > 0 and lambda > 0, got beta={beta}, lambda={lam}.')
    return float(_F(lam * beta) / lam - 1.)


@lru_cache(maxsize=None)
def _residual_slope():
    """ d/dlambda of the residual, compiled from its symbolic form """
    def residual(beta, lam):
        th = lam * beta
        return (2 * (1 - si.exp(-th)) - th * si.exp(-th)) / lam - 1
    _, slope = compile_symb_func(residual, 'beta', 'lam', wrt='lam')
    return slope


def solvability_threshold() -> float:
    """ beta_c = 1 / sup_theta F(theta) / theta """
    res = optimize.minimize_scalar(lambda th: -_F(th) / th, bounds=(1e-9, 50.), method='bounded',
                                   options=dict(xatol=1e-12))
    return float(-1. / res.fun)


def solve_critical_lambda(beta: float, lam_lo: float = 1e-3, lam_hi: float = 4.,
                          theta_min: float = 1e-9) -> CriticalPoint:
    """ All roots of F(beta, lambda) = 1 in lambda.

    F(beta, lambda) < beta, so there is no root for beta <= 1. Otherwise the
    knots theta_min / beta < lam_lo / beta < peak < lam_hi are bracketed on the
    residual itself; the peak comes from the sign of the compiled derivative,
    which is only trusted from theta = lam_lo upwards. F(beta, lambda) is
    bounded by 2 / lambda, so roots lie below 2.
    """
    if not beta > 0:
        raise ParameterError(f'beta must be positive, got {beta}.')
    if beta <= 1:
        log.info(f'critical curve at beta={beta}: no root, sup F = beta <= 1')
        return CriticalPoint(beta, [], [])

    tol   = cw_defaults.tol.critical
    G     = lambda l: critical_residual(beta, l)
    slope = _residual_slope()
    dG    = lambda l: slope(beta, l)

    lo, hi = lam_lo / beta, lam_hi
    if dG(lo) <= 0:
        peak = lo
    elif dG(hi) >= 0:
        peak = hi
    else:
        peak = optimize.brentq(dG, lo, hi, xtol=1e-15)

    knots = sorted({theta_min / beta, lo, peak, hi})
    roots = []
    for a, b in zip(knots, knots[1:]):
        Ga, Gb = G(a), G(b)
        if Ga == 0 and a not in roots:
            roots.append(a)
        elif Ga * Gb < 0:
            roots.append(optimize.brentq(G, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
    if G(hi) == 0 and hi not in roots:
        roots.append(hi)

    residuals = [G(l) for l in roots]
    for l, r in zip(roots, residuals):
        if abs(r) >= tol:
            warnings.warn(f'Critical root lambda={l} at beta={beta} has residual {r:.3e} above {tol:.0e}.')

    log.info(f'critical curve at beta={beta}: lambda roots {roots}')
    return CriticalPoint(beta, roots, residuals)


# Reduced exploration
# ===================

def reduced_explore(params: QuantumParams, stream: RngStream) -> ComponentProfile:
    """ Reduced exploration: one interval per circle, so exactly n steps.

    Given the extracted interval length J_t (cut-gamma), each neutral circle
    gets a link with probability 1 - e^{-J_t / (lambda n)}.
    """
    n, lam  = params.n, params.lam
    J       = sample_cut_gamma(CutGammaParams(params.theta), stream, size=n)
    q       = -np.expm1(-J / (lam * n))
    binomial = stream.generator.binomial

    bounds = [0]
    sizes  = []
    Y, Ymax = 0, 0
    for t in range(1, n + 1):
        U     = n - (t - 1) - Y
        fresh = Y == 0
        eta   = binomial(U - fresh, q[t - 1])
        Y     = Y + eta - 1 + fresh
        if Y > Ymax:
            Ymax = Y
        if Y == 0:
            sizes.append(t - bounds[-1])
            bounds.append(t)

    return ComponentProfile(sizes, bounds, int(Ymax), n, intervals_total=n)


def mean_offspring_check(params: QuantumParams, samples: int, stream: RngStream) -> float:
    """ Monte Carlo mean of the first reduced step, Bin(n - 1, 1 - e^{-J/(lambda n)}) """
    if samples < 1:
        raise ParameterError(f'Need at least one sample, got {samples}.')
    n, lam = params.n, params.lam
    J = sample_cut_gamma(CutGammaParams(params.theta), stream, size=samples)
    return float(stream.generator.binomial(n - 1, -np.expm1(-J / (lam * n))).mean())


# Circle geometry
# ===============

class Arc(dotdict):
    def __init__(self, circle_id: int, start: float, length: float, wraps: bool):
        self.circle_id : int   = int(circle_id)
        self.start     : float = float(start)     # in [0, theta)
        self.length    : float = float(length)    # in (0, theta]
        self.wraps     : bool  = bool(wraps)      # crosses the cut at 0

    def segments(self, theta: float):
        """ the arc as half-open segments of [0, theta) """
        end = self.start + self.length
        if self.wraps or end > theta:
            return [(self.start, theta), (0., end - theta)]
        return [(self.start, end)]


class ArcLedger:
    """ Neutral space of one circle, as sorted disjoint segments of [0, theta).

    Carving only ever removes space; pieces shorter than `tol` are dropped.
    """
    def __init__(self, theta: float, tol: float = 1e-9):
        self.theta  = theta
        self.tol    = tol
        self.segs   = [(0., theta)]
        self.intact = True

    def total(self) -> float:
        return sum(hi - lo for lo, hi in self.segs)

    def empty(self) -> bool:
        return not self.segs

    def covers(self, x: float) -> bool:
        i = bisect_right(self.segs, (x, np.inf)) - 1
        return i >= 0 and self.segs[i][0] <= x < self.segs[i][1]

    def carve(self, arc: Arc):
        tol, removed = self.tol, 0.
        for a, b in arc.segments(self.theta):
            out = []
            for lo, hi in self.segs:
                if hi <= a + tol or lo >= b - tol:
                    out.append((lo, hi))
                    continue
                removed += min(hi, b) - max(lo, a)
                if a - lo > tol:
                    out.append((lo, a))
                if hi - b > tol:
                    out.append((b, hi))
            self.segs = out

        if abs(removed - arc.length) > 4 * tol:
            raise ValidationError(f'Arc {dict(arc)} is not contained in the neutral space of its circle '
                                  f'(carved {removed}, expected {arc.length}).')
        self.intact = False

    def sample(self, u: float) -> float:
        """ the point at fraction u in [0, 1) of the neutral length """
        target = u * self.total()
        for lo, hi in self.segs:
            if target < hi - lo:
                return lo + target
            target -= hi - lo
        lo, hi = self.segs[-1]
        return np.nextafter(hi, lo)


# Full exploration
# ================

def materialize_quantum(params: QuantumParams, stream: RngStream, cap: Optional[int] = None) -> QuantumInstance:
    """ Holes, pairwise link processes and the exploration's uniforms, all drawn up front """
    cap = cw_defaults.oracle.quantum_cap if cap is None else cap
    n   = params.n
    if n > cap:
        raise SizeError(f'Refusing to materialize the quantum graph with n={n} above the cap {cap}.')

    theta, lam = params.theta, params.lam
    g     = stream.generator
    holes = [sample_poisson_process(1., theta, stream) for _ in range(n)]

    links = {}
    u, v  = np.triu_indices(n, k=1)
    for a, b, m in zip(u.tolist(), v.tolist(), g.poisson(theta / (lam * n), size=u.size).tolist()):
        if m:
            links[(a, b)] = np.minimum(np.sort(g.random(m) * theta), np.nextafter(theta, 0.))

    total = sum(max(1, h.size) for h in holes)
    return QuantumInstance(n, theta, lam, holes, links, g.random(total), tol=cw_defaults.tol.geometry)


def full_explore(instance: QuantumInstance) -> ComponentProfile:
    """ Deterministic replay of the interval exploration on a materialized instance.

    Each step extracts the interval around the chosen point: the active point
    on the lowest-indexed circle (earliest registered on ties), else a uniform
    point on the lowest-indexed intact circle, else a uniform point of the
    neutral part of the lowest-indexed circle that has one. Active points
    swallowed by the interval are surplus; links into explored space are
    erased; links into neutral space become active points.
    """
    n, theta = instance.n, instance.theta
    total    = instance.unit_count()
    ledgers  = [ArcLedger(theta, instance.tol) for _ in range(n)]
    explored = [set() for _ in range(n)]
    active   = []      # heap of (circle, registration, position, interval)
    reg      = 0

    bounds, sizes = [0], []
    Ymax, surplus, erased = 0, 0, 0
    for t in range(1, total + 1):
        if active:
            v, _, s, _ = heapq.heappop(active)
        else:
            u = float(instance.step_uniforms[t - 1])
            v = next((c for c in range(n) if ledgers[c].intact), None)
            if v is not None:
                s = min(u * theta, np.nextafter(theta, 0.))
            else:
                v = next((c for c in range(n) if not ledgers[c].empty()), None)
                if v is None:
                    raise ValidationError(f'No neutral space left after {t - 1} of {total} intervals.')
                s = ledgers[v].sample(u)

        j = instance.locate(v, s)
        if j in explored[v]:
            raise ValidationError(f'Point ({v}, {s}) lies in an already explored interval.')
        arc = Arc(v, *instance.interval(v, j))
        ledgers[v].carve(arc)
        explored[v].add(j)

        kept = [a for a in active if not (a[0] == v and a[3] == j)]
        absorbed = len(active) - len(kept)
        if absorbed:
            active = kept
            heapq.heapify(active)
        surplus += absorbed

        for i in range(n):
            if i == v:
                continue
            r = instance.pair_links(v, i)
            if r.size == 0:
                continue
            for lo, hi in arc.segments(theta):
                for x in r[(r >= lo) & (r < hi)].tolist():
                    if ledgers[i].covers(x):
                        reg += 1
                        heapq.heappush(active, (i, reg, x, instance.locate(i, x)))
                    else:
                        erased += 1

        if len(active) > Ymax:
            Ymax = len(active)
        if not active:
            sizes.append(t - bounds[-1])
            bounds.append(t)

    return ComponentProfile(sizes, bounds, Ymax, total, intervals_total=total, surplus=surplus, erased=erased)
