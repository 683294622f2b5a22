import csv
import logging
import warnings
import numpy as np

from multiprocessing import Pool
from typing import List, Optional, Sequence

from tqdm.autonotebook import tqdm

from .cw_structs import dotdict, ComponentProfile, ParameterError, FitError, to_json, _jsonable
from .cw_defaults import cw_defaults
from .cw_rand import RngStream, derive_stream
from .utils import wilson_interval
from . import cw_er, cw_regular, cw_intersection, cw_quantum


log = logging.getLogger(cw_defaults.logger)

MODELS = ('er', 'regular', 'intersection', 'quantum')


class ModelSpec(dotdict):
    """ One of the four graph models with validated parameters """
    def __init__(self, kind: str, params: dotdict, conditioned: bool = False):
        if kind not in MODELS:
            raise ParameterError(f"Unknown model '{kind}' (expected one of {', '.join(MODELS)}).")
        self.kind        : str     = kind
        self.params      : dotdict = params
        self.conditioned : bool    = bool(conditioned)    # regular model only
        if self.conditioned and kind != 'regular':
            raise ParameterError('Conditioning on simplicity only applies to the regular model.')
        if self.conditioned and params.n > cw_defaults.oracle.cap:
            raise ParameterError(f'Conditioned mode materializes the pairing; '
                                 f'n={params.n} exceeds the cap {cw_defaults.oracle.cap}.')
        if kind == 'quantum' and params.process == 'full' and params.n > cw_defaults.oracle.quantum_cap:
            raise ParameterError(f'Full quantum exploration materializes the instance; '
                                 f'n={params.n} exceeds the cap {cw_defaults.oracle.quantum_cap}.')

    @classmethod
    def build(cls, kind: str, n: int, lam: Optional[float] = None, d: Optional[int] = None,
              beta: Optional[float] = None, gamma: Optional[float] = None, p_override: Optional[float] = None,
              process: str = 'reduced', conditioned: bool = False) -> 'ModelSpec':
        """ model spec from flat (CLI-style) arguments """
        if n is None:
            raise ParameterError('The number of vertices n is required.')
        if kind == 'er':
            params = cw_er.ErParams(n, lam or 0., p_override)
        elif kind == 'regular':
            if d is None:
                raise ParameterError('The regular model needs the degree d.')
            params = cw_regular.RegParams(n, d, lam or 0., p_override)
        elif kind == 'intersection':
            if beta is None or gamma is None:
                raise ParameterError('The intersection model needs beta and gamma.')
            params = cw_intersection.IntersectionParams(n, beta, gamma)
        elif kind == 'quantum':
            if beta is None:
                raise ParameterError('The quantum model needs beta.')
            if lam is None:
                crit = cw_quantum.solve_critical_lambda(beta)
                if not crit.lambdas:
                    raise ParameterError(f'No critical lambda exists at beta={beta}; pass --lambda explicitly.')
                lam = crit.lambdas[0]
            params = cw_quantum.QuantumParams(n, beta, lam, process)
        else:
            raise ParameterError(f"Unknown model '{kind}' (expected one of {', '.join(MODELS)}).")
        return cls(kind, params, conditioned)

    @property
    def extra_columns(self) -> List[str]:
        return list(cw_defaults.columns.extra[self.kind])

    def trial(self, stream: RngStream) -> ComponentProfile:
        k, p = self.kind, self.params
        if k == 'er':
            return cw_er.explore(p, stream)
        if k == 'regular':
            return cw_regular.explore_conditioned(p, stream) if self.conditioned else cw_regular.explore(p, stream)
        if k == 'intersection':
            return cw_intersection.explore(p, stream)
        if p.process == 'full':
            return cw_quantum.full_explore(cw_quantum.materialize_quantum(p, stream))
        return cw_quantum.reduced_explore(p, stream)


class TrialSummary(dotdict):
    def __init__(self, trial: int, cmax: int, n_components: int, max_active: int, steps: int, **extras):
        self.trial        : int = int(trial)
        self.cmax         : int = int(cmax)
        self.n_components : int = int(n_components)
        self.max_active   : int = int(max_active)
        self.steps        : int = int(steps)
        self.update(extras)

    @classmethod
    def from_profile(cls, trial: int, profile: ComponentProfile, extra_columns: Sequence[str] = ()):
        extras = {c: _jsonable(profile.extras.get(c)) for c in extra_columns}
        return cls(trial, profile.cmax, profile.n_components, profile.max_active, profile.steps, **extras)

    def to_row(self, extra_columns: Sequence[str] = ()) -> list:
        return [self.get(c) for c in cw_defaults.columns.summary + list(extra_columns)]


# Running
# =======

def _run_shard(args) -> List[TrialSummary]:
    spec, master_seed, lo, hi = args
    cols = spec.extra_columns
    return [TrialSummary.from_profile(i, spec.trial(derive_stream(master_seed, i)), cols) for i in range(lo, hi)]


def run(spec: ModelSpec, trials: int, master_seed: int, workers: int = 1, progress: Optional[bool] = None,
        first_trial: int = 0) -> List[TrialSummary]:
    """ Run `trials` independent explorations; trial i uses derive_stream(master_seed, i).

    Trials are cut into fixed shards, so the output (ordered by trial index)
    does not depend on `workers`.
    """
    if trials < 1:
        raise ParameterError(f'Need at least one trial, got {trials}.')
    if workers < 1:
        raise ParameterError(f'Need at least one worker, got {workers}.')
    progress = cw_defaults.harness.progress if progress is None else progress

    shard  = cw_defaults.harness.shard
    last   = first_trial + trials
    shards = [(spec, master_seed, lo, min(lo + shard, last)) for lo in range(first_trial, last, shard)]

    log.info(f'running {trials} trials of {spec.kind} {dict(spec.params)} on {workers} worker(s)')
    bar = tqdm(desc='trials', total=trials, disable=not progress)
    out = []
    try:
        if workers == 1:
            for s in shards:
                out.extend(_run_shard(s))
                bar.update(s[3] - s[2])
        else:
            with Pool(processes=workers) as pool:
                for s, res in zip(shards, pool.imap(_run_shard, shards)):
                    out.extend(res)
                    bar.update(s[3] - s[2])
    except (MemoryError, OSError) as e:
        out.clear()
        raise RuntimeError(f'Trial execution failed ({type(e).__name__}: {e}); partial results discarded.') from e
    finally:
        bar.close()

    log.info(f'finished {len(out)} trials')
    return out


# Tail probabilities
# ==================

class TailCurve(dotdict):
    def __init__(self, direction: str, n: int, rows: Optional[List[dotdict]] = None):
        if direction not in ('lower', 'upper'):
            raise ParameterError(f"Tail direction must be 'lower' or 'upper', got '{direction}'.")
        self.direction : str          = direction
        self.n         : int          = int(n)
        self.rows      : List[dotdict] = [] if rows is None else list(rows)

    def to_rows(self) -> List[list]:
        return [[self.direction] + [r[c] for c in cw_defaults.columns.tail[1:]] for r in self.rows]

    @property
    def A(self) -> np.ndarray:
        return np.array([r.A for r in self.rows])

    @property
    def phat(self) -> np.ndarray:
        return np.array([r.phat for r in self.rows])


def _tail_row(A: float, threshold: float, trials: int, hits: int) -> dotdict:
    lo, hi = wilson_interval(hits, trials)
    return dotdict(A=float(A), threshold=float(threshold), trials=int(trials), hits=int(hits),
                   phat=hits / trials, ci_lo=lo, ci_hi=hi)


def _tail(direction: str, summaries: Sequence[TrialSummary], n: int, A_values: Sequence[float]) -> TailCurve:
    A_values = list(A_values)
    if not A_values:
        raise ParameterError('The A grid is empty.')
    if any(not A > 0 for A in A_values):
        raise ParameterError(f'A values must be positive, got {A_values}.')
    if not summaries:
        raise ParameterError('No trial summaries to estimate a tail from.')

    cmax  = np.array([s.cmax for s in summaries])
    scale = n ** (2. / 3.)
    rows  = []
    for A in A_values:
        if direction == 'lower':
            threshold = scale / A
            hits = np.count_nonzero(cmax < threshold)
        else:
            threshold = A * scale
            hits = np.count_nonzero(cmax > threshold)
        rows.append(_tail_row(A, threshold, cmax.size, int(hits)))
    return TailCurve(direction, n, rows)


def lower_tail(summaries: Sequence[TrialSummary], n: int, A_values: Sequence[float]) -> TailCurve:
    """ P(|C_max| < n^{2/3} / A) for each A, real threshold and strict inequality """
    return _tail('lower', summaries, n, A_values)


def upper_tail(summaries: Sequence[TrialSummary], n: int, A_values: Sequence[float]) -> TailCurve:
    """ P(|C_max| > A n^{2/3}) for each A """
    return _tail('upper', summaries, n, A_values)


def merge_curves(a: TailCurve, b: TailCurve) -> TailCurve:
    """ pool the counts of two runs over disjoint trials """
    if a.direction != b.direction or a.n != b.n or not np.array_equal(a.A, b.A):
        raise ParameterError('Only curves with the same direction, n and A grid can be merged.')
    rows = [_tail_row(ra.A, ra.threshold, ra.trials + rb.trials, ra.hits + rb.hits) for ra, rb in zip(a.rows, b.rows)]
    return TailCurve(a.direction, a.n, rows)


# Exponent fit
# ============

class ExponentFit(dotdict):
    def __init__(self, direction: str, slope: float, intercept: float, ci_lo: float, ci_hi: float,
                 rows_used: int, error: Optional[str] = None):
        self.direction : str   = direction
        self.slope     : float = slope
        self.intercept : float = intercept
        self.ci_lo     : float = ci_lo
        self.ci_hi     : float = ci_hi
        self.rows_used : int   = rows_used
        if error is not None:
            self.error : str = error

    @classmethod
    def failed(cls, direction: str, error: str) -> 'ExponentFit':
        return cls(direction, None, None, None, None, 0, error)


def _loglog(A, phat):
    return np.log(A), np.log(-np.log(phat))


def fit_stretch_exponent(curve: TailCurve, resamples: Optional[int] = None,
                         stream: Optional[RngStream] = None) -> ExponentFit:
    """ Least-squares slope of log(-log phat) against log A.

    Only rows with 0 < phat < 1 are used. The confidence interval is the
    2.5 / 97.5 percentile range of slopes refitted on binomial resamples of
    the per-row counts.
    """
    resamples = cw_defaults.stats.bootstrap if resamples is None else resamples
    stream    = derive_stream(0, cw_defaults.bootstrap_stream) if stream is None else stream

    rows = [r for r in curve.rows if 0 < r.phat < 1]
    if len(rows) < 3:
        raise FitError(f'Need at least 3 rows with 0 < phat < 1 to fit the exponent, got {len(rows)}.')

    A      = np.array([r.A for r in rows])
    trials = np.array([r.trials for r in rows])
    hits   = np.array([r.hits for r in rows])
    slope, intercept = np.polyfit(*_loglog(A, hits / trials), 1)

    k = stream.generator.binomial(trials, hits / trials, size=(resamples, len(rows)))
    slopes, dropped = [], 0
    for kb in k:
        ok = (kb > 0) & (kb < trials)
        if ok.sum() < 3:
            dropped += 1
            continue
        slopes.append(np.polyfit(*_loglog(A[ok], kb[ok] / trials[ok]), 1)[0])
    if dropped:
        warnings.warn(f'{dropped} of {resamples} bootstrap resamples left fewer than 3 usable rows and were skipped.')

    lo, hi = np.percentile(slopes, [2.5, 97.5]) if slopes else (np.nan, np.nan)
    log.info(f'{curve.direction} tail: slope {slope:.4f} [{lo:.4f}, {hi:.4f}] on {len(rows)} rows')
    return ExponentFit(curve.direction, float(slope), float(intercept), float(lo), float(hi), len(rows))


# Output
# ======

def _write_csv(path, header, rows):
    with open(path, 'w', newline='') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, records):
    with open(path, 'w') as f:
        f.write(to_json(records, indent=2))
        f.write('\n')


def write_summaries(path, summaries: Sequence[TrialSummary], extra_columns: Sequence[str] = (), fmt: str = 'csv'):
    header = cw_defaults.columns.summary + list(extra_columns)
    if fmt == 'json':
        _write_json(path, [dict(zip(header, s.to_row(extra_columns))) for s in summaries])
    else:
        _write_csv(path, header, [s.to_row(extra_columns) for s in summaries])


def write_tail(path, curves: Sequence[TailCurve], fmt: str = 'csv'):
    header = cw_defaults.columns.tail
    rows   = [r for c in curves for r in c.to_rows()]
    if fmt == 'json':
        _write_json(path, [dict(zip(header, r)) for r in rows])
    else:
        _write_csv(path, header, rows)


def write_fit(path, fits: Sequence[ExponentFit]):
    _write_json(path, [dict(f) for f in fits])
