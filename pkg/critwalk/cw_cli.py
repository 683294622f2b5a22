import argparse
import csv
import json
import logging
import os
import sys

from typing import List, Optional

from .cw_structs import dotdict, ParameterError, SizeError, FitError, to_json
from .cw_defaults import cw_defaults
from .cw_rand import derive_stream
from . import cw_harness, cw_oracle, cw_quantum, cw_regular, cw_walk, cw_viz
from .utils import wilson_interval


log = logging.getLogger(cw_defaults.logger)

SEED_ENV = 'CRITWALK_SEED'

# flag defaults applied after the config file and the environment
_TAIL_DEFAULTS = dict(model=None, n=None, lam=None, d=None, beta=None, gamma=None, p_override=None,
                      trials=None, seed=None, workers=1, a_grid=None, direction='lower', out='.', format='csv',
                      plot=False, progress=False, process='reduced', conditioned=False)


def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == '':
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f'{SEED_ENV} must be an integer, got {raw!r}.') from None


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParameterError(f'Cannot read config file {path}: {e}') from None
    if not isinstance(raw, dict):
        raise ParameterError(f'Config file {path} must hold a JSON object.')
    cfg = {k.replace('-', '_'): v for k, v in raw.items()}
    if 'lambda' in cfg:
        cfg['lam'] = cfg.pop('lambda')
    unknown = set(cfg) - set(_TAIL_DEFAULTS) - {'count', 'inject_fault'}
    if unknown:
        raise ParameterError(f'Unknown config keys: {", ".join(sorted(unknown))}.')
    return cfg


def _a_grid(value) -> List[float]:
    if value is None:
        raise ParameterError('The A grid (--a-grid) is required.')
    if isinstance(value, str):
        parts = [s for s in value.split(',') if s.strip()]
        try:
            value = [float(s) for s in parts]
        except ValueError:
            raise ParameterError(f'Cannot parse the A grid {value!r} as a comma list of numbers.') from None
    grid = [float(a) for a in value]
    if not grid:
        raise ParameterError('The A grid is empty.')
    if any(not a > 0 for a in grid):
        raise ParameterError(f'A values must be positive, got {grid}.')
    return grid


class ExperimentConfig(dotdict):
    """ Everything `tail` needs, validated before any trial runs """
    def __init__(self, spec, trials: int, seed: int, workers: int, a_grid: List[float], directions: List[str],
                 out: str, fmt: str, plot: bool, progress: bool):
        self.spec       = spec
        self.trials     : int         = trials
        self.seed       : int         = seed
        self.workers    : int         = workers
        self.a_grid     : List[float] = a_grid
        self.directions : List[str]   = directions
        self.out        : str         = out
        self.fmt        : str         = fmt
        self.plot       : bool        = plot
        self.progress   : bool        = progress
        self.validate()

    def validate(self):
        if self.trials is None or self.trials < 1:
            raise ParameterError(f'Need at least one trial, got trials={self.trials}.')
        if self.workers < 1:
            raise ParameterError(f'Need at least one worker, got workers={self.workers}.')
        if self.fmt not in ('csv', 'json'):
            raise ParameterError(f"Output format must be 'csv' or 'json', got '{self.fmt}'.")

    @classmethod
    def from_args(cls, args) -> 'ExperimentConfig':
        try:
            return cls._resolve(args)
        except (ParameterError, SizeError):
            raise
        except (TypeError, ValueError) as e:
            raise ParameterError(f'Bad configuration value: {e}') from None

    @classmethod
    def _resolve(cls, args) -> 'ExperimentConfig':
        cfg = _load_config(args.config)
        get = lambda k: getattr(args, k) if getattr(args, k) is not None else cfg.get(k, _TAIL_DEFAULTS[k])

        seed = get('seed')
        seed = _env_seed() if seed is None else int(seed)
        if get('model') is None:
            raise ParameterError('The model (--model) is required.')

        spec = cw_harness.ModelSpec.build(get('model'), get('n'), lam=get('lam'), d=get('d'), beta=get('beta'),
                                          gamma=get('gamma'), p_override=get('p_override'),
                                          process=get('process'), conditioned=bool(get('conditioned')))
        direction  = get('direction')
        if direction not in ('lower', 'upper', 'both'):
            raise ParameterError(f"Direction must be lower, upper or both, got '{direction}'.")
        directions = ['lower', 'upper'] if direction == 'both' else [direction]
        trials     = get('trials')
        return cls(spec, None if trials is None else int(trials), seed, int(get('workers')), _a_grid(get('a_grid')),
                   directions, get('out'), get('format'), bool(get('plot')), bool(get('progress')))


# Subcommands
# ===========

def cmd_tail(args) -> int:
    config = ExperimentConfig.from_args(args)
    spec   = config.spec
    n      = spec.params.n

    summaries = cw_harness.run(spec, config.trials, config.seed, config.workers, config.progress)

    curves, fits = [], []
    for direction in config.directions:
        tail  = cw_harness.lower_tail if direction == 'lower' else cw_harness.upper_tail
        curve = tail(summaries, n, config.a_grid)
        curves.append(curve)
        try:
            fits.append(cw_harness.fit_stretch_exponent(curve))
        except FitError as e:
            log.warning(f'{direction} tail: {e}')
            fits.append(cw_harness.ExponentFit.failed(direction, str(e)))

    os.makedirs(config.out, exist_ok=True)
    ext = config.fmt
    cw_harness.write_summaries(os.path.join(config.out, f'summaries.{ext}'), summaries, spec.extra_columns, ext)
    cw_harness.write_tail(os.path.join(config.out, f'tail.{ext}'), curves, ext)
    cw_harness.write_fit(os.path.join(config.out, 'fit.json'), fits)
    if config.plot:
        cw_viz.write_plot_script(config.out, curves, fits, spec.kind, spec.params.get('lam', 0.))

    log.info(f'wrote outputs to {config.out}')
    return 0


def cmd_oracle_check(args) -> int:
    seed   = _env_seed() if args.seed is None else args.seed
    result = cw_oracle.replay_suite(args.model, args.count, seed, args.inject_fault, args.progress)
    if result.ok:
        print(f'{result.model}: {result.matches}/{result.count} exact matches')
        return 0
    print(f'{result.model}: {result.matches}/{result.count} exact matches; first mismatch:')
    print(to_json(result.first_mismatch))
    return 1


def cmd_critical(args) -> int:
    point = cw_quantum.solve_critical_lambda(args.beta)
    print(to_json(point))
    return 0


def _print_rows(header, rows):
    w = csv.writer(sys.stdout, lineterminator='\n')
    w.writerow(header)
    w.writerows(rows)


def cmd_walk(args) -> int:
    seed   = _env_seed() if args.seed is None else args.seed
    stream = derive_stream(seed, 0)
    if args.trials < 1:
        raise ParameterError(f'Need at least one trial, got {args.trials}.')

    if args.mode == 'chernoff':
        if args.N is None or args.P is None or args.x is None:
            raise ParameterError('Chernoff mode needs --N, --P and --x.')
        est = cw_walk.chernoff_exceedance(args.N, args.P, args.x, args.trials, stream)
        _print_rows(cw_defaults.columns.chernoff, [est.to_row()])
        return 0

    law = cw_walk.make_law(args.law, count=args.count, prob=args.prob, d=args.d)
    if args.mode == 'stay-positive':
        est = cw_walk.stay_positive_estimate(law, args.horizon, args.trials, stream,
                                             start=1 if args.start is None else args.start)
    else:
        if args.j is None:
            raise ParameterError('Ballot mode needs --j.')
        est = cw_walk.ballot_estimate(law, args.horizon, args.j, args.trials, stream,
                                      start=0 if args.start is None else args.start)
        if est.flag:
            print(f'# {est.flag}: j={args.j} after {args.horizon} steps', file=sys.stderr)
    _print_rows(cw_defaults.columns.walk, [est.to_row()])
    return 0


def cmd_simplicity(args) -> int:
    seed = _env_seed() if args.seed is None else args.seed
    cw_regular.RegParams(args.n, args.d)
    simple = cw_regular.simple_count(args.n, args.d, args.trials, seed)
    lo, hi = wilson_interval(simple, args.trials)
    ref    = cw_regular.simple_probability_limit(args.d)
    row    = dict(n=args.n, d=args.d, trials=args.trials, simple=simple, frequency=simple / args.trials,
                  ci_lo=lo, ci_hi=hi, reference=ref, within_ci=lo <= ref <= hi)
    _print_rows(cw_defaults.columns.simplicity, [[row[c] for c in cw_defaults.columns.simplicity]])
    return 0


# Parser
# ======

def _model_flags(p):
    p.add_argument('--model', choices=cw_harness.MODELS, default=None)
    p.add_argument('--n', type=int, default=None)
    p.add_argument('--lambda', dest='lam', type=float, default=None)
    p.add_argument('--d', type=int, default=None)
    p.add_argument('--beta', type=float, default=None)
    p.add_argument('--gamma', type=float, default=None)
    p.add_argument('--p-override', type=float, default=None)
    p.add_argument('--process', choices=('reduced', 'full'), default=None)
    p.add_argument('--conditioned', action='store_true', default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='critwalk',
                                     description='Exploration-process simulations of critical random graphs.')
    parser.add_argument('--verbose', action='store_true', help='log at INFO level')
    parser.add_argument('--debug', action='store_true', help='log at DEBUG level')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('tail', help='estimate lower/upper tails of |C_max| and fit the stretched exponent')
    _model_flags(p)
    p.add_argument('--trials', type=int, default=None)
    p.add_argument('--seed', type=int, default=None, help=f'master seed (default: ${SEED_ENV} or 0)')
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--a-grid', default=None, help='comma list of A values')
    p.add_argument('--direction', choices=('lower', 'upper', 'both'), default=None)
    p.add_argument('--out', default=None, help='output directory')
    p.add_argument('--format', choices=('csv', 'json'), default=None)
    p.add_argument('--plot', action='store_true', default=None, help='also write a plotly script and its data')
    p.add_argument('--progress', action='store_true', default=None)
    p.add_argument('--config', default=None, help='JSON file whose keys mirror the flag names')
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser('oracle-check', help='compare every replay with union-find on random instances')
    p.add_argument('--model', choices=cw_harness.MODELS, required=True)
    p.add_argument('--count', type=int, default=500)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--inject-fault', action='store_true', help=argparse.SUPPRESS)
    p.add_argument('--progress', action='store_true')
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser('critical', help='solve F(beta, lambda) = 1 for the quantum model')
    p.add_argument('--beta', type=float, required=True)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser('walk', help='random-walk estimators')
    p.add_argument('--mode', choices=('stay-positive', 'ballot', 'chernoff'), required=True)
    p.add_argument('--law', choices=tuple(cw_walk.LAWS), default='poisson')
    p.add_argument('--count', type=int, default=None, help='binomial count')
    p.add_argument('--prob', type=float, default=None, help='binomial / regular-step probability')
    p.add_argument('--d', type=int, default=None)
    p.add_argument('--horizon', type=int, default=1)
    p.add_argument('--j', type=int, default=None)
    p.add_argument('--start', type=int, default=None)
    p.add_argument('--N', type=int, default=None)
    p.add_argument('--P', type=float, default=None)
    p.add_argument('--x', type=float, default=None)
    p.add_argument('--trials', type=int, default=10_000)
    p.add_argument('--seed', type=int, default=None)
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser('simplicity', help='frequency of simple configuration-model pairings')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--trials', type=int, default=10_000)
    p.add_argument('--seed', type=int, default=None)
    p.set_defaults(func=cmd_simplicity)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig()
    log.setLevel(logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING)

    try:
        return args.func(args)
    except (ParameterError, SizeError) as e:
        print(f'critwalk: invalid configuration: {e}', file=sys.stderr)
        return 2
    except Exception as e:
        log.debug('failure', exc_info=True)
        print(f'critwalk: {type(e).__name__}: {e}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
