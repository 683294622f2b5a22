import json
import numpy as np
import networkx as nx

from networkx.algorithms import bipartite
from typing import List, Optional


class dotdict(dict):
    """dot.notation access to dictionary attributes"""
    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key) from None

    __setattr__ = dict.__setitem__
    __delattr__ = dict.__delitem__


# Errors
# ======

class ParameterError(ValueError):
    """ parameters outside the model's admissible range """


class SizeError(ValueError):
    """ instance too large for a materializing oracle """


class ValidationError(ValueError):
    """ internally inconsistent materialized instance """


class FitError(RuntimeError):
    """ not enough usable rows to fit a stretched exponent """


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(record, **kwargs) -> str:
    return json.dumps(_jsonable(record), **kwargs)


# Exploration output
# ==================

class ComponentProfile(dotdict):
    def __init__(self, sizes=None, excursion_bounds=None, max_active=0, steps=0, **extras):
        self.sizes            : List[int] = [] if sizes is None else list(sizes)  # component sizes, in exploration order
        self.excursion_bounds : List[int] = [0] if excursion_bounds is None else list(excursion_bounds)  # t_0 = 0 < t_1 < ...
        self.max_active       : int       = max_active  # max over t of Y_t
        self.steps            : int       = steps       # number of exploration steps run
        self.extras           : dotdict   = dotdict(extras)

    @property
    def cmax(self) -> int:
        return max(self.sizes) if self.sizes else 0

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    def sorted_sizes(self) -> List[int]:
        return sorted(self.sizes, reverse=True)

    def excursion_lengths(self) -> List[int]:
        b = self.excursion_bounds
        return [b[i] - b[i - 1] for i in range(1, len(b))]

    def to_row(self, trial_index: int) -> list:
        return [trial_index, self.cmax, self.n_components, self.max_active, self.steps]


# Materialized instances
# ======================
#
# Every variant exposes unit_count() (vertices, or intervals for the quantum
# model) and links(), an (m, 2) array of unit pairs whose union-find
# components are the ground truth.

class GraphInstance(dotdict):
    def __init__(self, n: int, edges):
        self.kind  : str        = 'graph'
        self.n     : int        = int(n)
        self.edges : np.ndarray = np.asarray(edges, dtype=np.int64).reshape((-1, 2))
        self.validate()

    def validate(self):
        e = self.edges
        if e.size and (e.min() < 0 or e.max() >= self.n):
            raise ValidationError(f'Edge endpoint outside [0, {self.n}).')
        if np.any(e[:, 0] == e[:, 1]):
            raise ValidationError('A simple graph cannot contain self-loops.')
        key = np.minimum(e[:, 0], e[:, 1]) * self.n + np.maximum(e[:, 0], e[:, 1])
        if np.unique(key).size != key.size:
            raise ValidationError('A simple graph cannot contain repeated edges.')

    def unit_count(self) -> int:
        return self.n

    def links(self) -> np.ndarray:
        return self.edges

    def adjacency(self) -> List[List[int]]:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges.tolist():
            adj[u].append(v)
            adj[v].append(u)
        return adj


class ConfigurationInstance(dotdict):
    def __init__(self, n: int, d: int, pairs, retained=None):
        self.kind     : str        = 'configuration'
        self.n        : int        = int(n)
        self.d        : int        = int(d)
        self.pairs    : np.ndarray = np.asarray(pairs, dtype=np.int64).reshape((-1, 2))  # matched stub ids
        self.retained : Optional[np.ndarray] = None if retained is None else np.asarray(retained, dtype=bool)
        self.validate()

    def validate(self):
        dn = self.n * self.d
        if self.pairs.shape[0] * 2 != dn:
            raise ValidationError(f'A pairing of {dn} stubs needs {dn // 2} pairs, got {self.pairs.shape[0]}.')
        if not np.array_equal(np.sort(self.pairs.ravel()), np.arange(dn)):
            raise ValidationError('Pairing is not a perfect matching of the stubs.')
        if self.retained is not None and self.retained.shape != (self.pairs.shape[0],):
            raise ValidationError(f'Expected one retention bit per pair ({self.pairs.shape[0]}), '
                                  f'got {self.retained.shape}.')

    def with_retention(self, retained) -> 'ConfigurationInstance':
        return ConfigurationInstance(self.n, self.d, self.pairs, retained)

    def vertex_pairs(self) -> np.ndarray:
        return self.pairs // self.d

    def partner(self) -> np.ndarray:
        p = np.empty(self.n * self.d, dtype=np.int64)
        p[self.pairs[:, 0]] = self.pairs[:, 1]
        p[self.pairs[:, 1]] = self.pairs[:, 0]
        return p

    def pair_index(self) -> np.ndarray:
        """ index of the pair each stub belongs to """
        idx = np.empty(self.n * self.d, dtype=np.int64)
        m   = np.arange(self.pairs.shape[0])
        idx[self.pairs[:, 0]] = m
        idx[self.pairs[:, 1]] = m
        return idx

    def unit_count(self) -> int:
        return self.n

    def links(self) -> np.ndarray:
        vp = self.vertex_pairs()
        if self.retained is None:
            return vp
        return vp[self.retained]


class BipartiteInstance(dotdict):
    def __init__(self, n: int, k: int, incidence, projection=None):
        self.kind       : str        = 'bipartite'
        self.n          : int        = int(n)  # vertices
        self.k          : int        = int(k)  # attributes
        self.incidence  : np.ndarray = np.asarray(incidence, dtype=np.int64).reshape((-1, 2))  # (vertex, attribute)
        self.projection : np.ndarray = (self.project_edges() if projection is None
                                        else np.asarray(projection, dtype=np.int64).reshape((-1, 2)))
        self.validate()

    def members(self) -> List[np.ndarray]:
        """ vertices linked to each attribute """
        order = np.lexsort((self.incidence[:, 0], self.incidence[:, 1]))
        inc   = self.incidence[order]
        cuts  = np.searchsorted(inc[:, 1], np.arange(self.k + 1))
        return [inc[cuts[a]:cuts[a + 1], 0] for a in range(self.k)]

    def to_networkx(self) -> nx.Graph:
        B = nx.Graph()
        B.add_nodes_from(range(self.n), bipartite=0)
        B.add_nodes_from(range(self.n, self.n + self.k), bipartite=1)
        B.add_edges_from((v, self.n + a) for v, a in self.incidence.tolist())
        return B

    def project_edges(self) -> np.ndarray:
        """ vertices are adjacent iff they share an attribute """
        P = bipartite.projected_graph(self.to_networkx(), range(self.n))
        edges = sorted((min(u, v), max(u, v)) for u, v in P.edges())
        return np.array(edges, dtype=np.int64).reshape((-1, 2))

    def validate(self):
        inc = self.incidence
        if inc.size and (inc[:, 0].min() < 0 or inc[:, 0].max() >= self.n
                         or inc[:, 1].min() < 0 or inc[:, 1].max() >= self.k):
            raise ValidationError('Incidence entry outside the vertex/attribute ranges.')
        key = inc[:, 0] * self.k + inc[:, 1]
        if np.unique(key).size != key.size:
            raise ValidationError('Repeated (vertex, attribute) incidence.')
        if not np.array_equal(self.projection, self.project_edges()):
            raise ValidationError('Projection does not match the shared-attribute rule.')

    def as_graph(self) -> GraphInstance:
        return GraphInstance(self.n, self.projection)

    def unit_count(self) -> int:
        return self.n

    def links(self) -> np.ndarray:
        return self.projection


class QuantumInstance(dotdict):
    def __init__(self, n: int, theta: float, lam: float, holes, links, step_uniforms, tol: float = 1e-9):
        self.kind          : str   = 'quantum'
        self.n             : int   = int(n)
        self.theta         : float = float(theta)          # circle length
        self.lam           : float = float(lam)            # link intensity is 1/(lam n)
        self.holes         : List[np.ndarray] = [np.asarray(h, dtype=np.float64) for h in holes]
        self.link_times    : dict  = {self._key(*self._pair(k)): np.asarray(r, dtype=np.float64)
                                      for k, r in links.items()}   # 'u,v' -> sorted link times
        self.step_uniforms : np.ndarray = np.asarray(step_uniforms, dtype=np.float64)  # pre-drawn exploration randomness
        self.tol           : float = tol
        self.validate()

    @staticmethod
    def _pair(k):
        if isinstance(k, str):
            k = k.split(',')
        u, v = map(int, k)
        return u, v

    @staticmethod
    def _key(u: int, v: int) -> str:
        u, v = (u, v) if u < v else (v, u)
        return f'{u},{v}'

    def pair_links(self, u: int, v: int) -> np.ndarray:
        return self.link_times.get(self._key(u, v), np.empty(0))

    # interval decomposition of the punctured circles
    # -----------------------------------------------
    def interval_count(self, v: int) -> int:
        return max(1, self.holes[v].size)

    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([self.interval_count(v) for v in range(self.n)])]).astype(np.int64)

    def locate(self, v: int, x: float) -> int:
        """ index (on circle v) of the interval containing position x """
        h = self.holes[v]
        if h.size == 0:
            return 0
        j = int(np.searchsorted(h, x, side='right')) - 1
        return h.size - 1 if j < 0 else j

    def interval(self, v: int, j: int):
        """ (start, length, wraps) of interval j on circle v """
        h = self.holes[v]
        if h.size == 0:
            return 0., self.theta, False
        if j < h.size - 1:
            return float(h[j]), float(h[j + 1] - h[j]), False
        return float(h[-1]), float(h[0] + self.theta - h[-1]), True

    def interval_lengths(self, v: int) -> np.ndarray:
        return np.array([self.interval(v, j)[1] for j in range(self.interval_count(v))])

    def validate(self):
        if len(self.holes) != self.n:
            raise ValidationError(f'Expected {self.n} hole processes, got {len(self.holes)}.')
        for v, h in enumerate(self.holes):
            if h.size and (h[0] < 0 or h[-1] >= self.theta or np.any(np.diff(h) <= 0)):
                raise ValidationError(f'Holes on circle {v} must be strictly increasing in [0, {self.theta}).')
            if abs(self.interval_lengths(v).sum() - self.theta) > self.tol:
                raise ValidationError(f'Intervals on circle {v} do not partition the circle.')
        for key, r in self.link_times.items():
            u, v = map(int, key.split(','))
            if not (0 <= u < v < self.n):
                raise ValidationError(f'Link process keyed by invalid pair {key}.')
            if r.size and (r[0] < 0 or r[-1] >= self.theta or np.any(np.diff(r) < 0)):
                raise ValidationError(f'Link times of pair {key} must be sorted in [0, {self.theta}).')
        if self.step_uniforms.size < self.unit_count():
            raise ValidationError(f'Need at least {self.unit_count()} pre-drawn step uniforms, '
                                  f'got {self.step_uniforms.size}.')

    def unit_count(self) -> int:
        return int(sum(self.interval_count(v) for v in range(self.n)))

    def links(self) -> np.ndarray:
        off = self.offsets()
        out = []
        for key, r in self.link_times.items():
            u, v = map(int, key.split(','))
            for x in r.tolist():
                out.append((off[u] + self.locate(u, x), off[v] + self.locate(v, x)))
        return np.array(out, dtype=np.int64).reshape((-1, 2))
