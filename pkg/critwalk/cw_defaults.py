from .cw_structs import dotdict


cw_defaults = dotdict()

cw_defaults.logger = '[CRITWALK]'

# largest instances the materializing oracles will build
cw_defaults.oracle = dotdict(cap=10_000, quantum_cap=128, enumerate_cap=5)

cw_defaults.tol = dotdict(
    closed_form = 1e-12,    # closed-form comparisons
    geometry    = 1e-9,     # endpoint coincidences on circles
    critical    = 1e-12,    # |F(beta, lambda) - 1| at a returned root
)

cw_defaults.stats = dotdict(z=1.96, bootstrap=1000)

cw_defaults.harness = dotdict(shard=64, progress=False)

# reserved stream index for the exponent bootstrap, outside any trial range
cw_defaults.bootstrap_stream = 2**62

cw_defaults.symengine = dotdict()
cw_defaults.symengine.lambdify = dotdict(backend='lambda', cse=True, real=True)

cw_defaults.columns = dotdict(
    summary = ['trial', 'cmax', 'n_components', 'max_active', 'steps'],
    extra   = dotdict(
        er           = [],
        regular      = ['halfedge_excursion_max', 'simple_flag'],
        intersection = ['attributes_discovered_total'],
        quantum      = ['intervals_total'],
    ),
    tail    = ['direction', 'A', 'threshold', 'trials', 'hits', 'phat', 'ci_lo', 'ci_hi'],
    fit     = ['direction', 'slope', 'intercept', 'ci_lo', 'ci_hi', 'rows_used'],
    walk    = ['law', 'params', 'horizon', 'j', 'trials', 'phat', 'ci_lo', 'ci_hi'],
    chernoff = ['N', 'P', 'x', 'trials', 'phat', 'ci_lo', 'ci_hi', 'bound'],
    simplicity = ['n', 'd', 'trials', 'simple', 'frequency', 'ci_lo', 'ci_hi', 'reference', 'within_ci'],
)
