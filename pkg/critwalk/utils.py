import numpy as np

from scipy import stats

from .cw_defaults import cw_defaults


def wilson_interval(hits, trials, z=None):
    """ Wilson score interval for a binomial proportion (vectorized).

    Returns (lo, hi); rows with trials == 0 give the vacuous interval [0, 1].
    """
    z = cw_defaults.stats.z if z is None else z
    k = np.asarray(hits, dtype=np.float64)
    n = np.asarray(trials, dtype=np.float64)

    with np.errstate(divide='ignore', invalid='ignore'):
        phat   = k / n
        denom  = 1. + z**2 / n
        center = (phat + z**2 / (2. * n)) / denom
        half   = z * np.sqrt(phat * (1. - phat) / n + z**2 / (4. * n**2)) / denom
        lo     = np.where(n > 0, np.clip(center - half, 0., 1.), 0.)
        hi     = np.where(n > 0, np.clip(center + half, 0., 1.), 1.)

    # the interval always contains phat; clip away rounding at the ends
    lo = np.where(k == 0, 0., np.minimum(lo, np.nan_to_num(phat)))
    hi = np.where(k == n, 1., np.maximum(hi, np.nan_to_num(phat)))
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def standard_error(phat, trials):
    phat = np.asarray(phat, dtype=np.float64)
    return np.sqrt(phat * (1. - phat) / np.asarray(trials, dtype=np.float64))


def two_sample_chi2(a, b, min_expected: float = 5.):
    """ Chi-square homogeneity test between two samples of integers.

    Values are binned on their joint support; sparse tail bins are merged
    until every expected count reaches `min_expected`. Returns the p-value.
    """
    a, b   = np.asarray(a).ravel(), np.asarray(b).ravel()
    values = np.union1d(a, b)
    table  = np.stack([np.bincount(np.searchsorted(values, a), minlength=values.size),
                       np.bincount(np.searchsorted(values, b), minlength=values.size)])

    merged = []
    acc    = np.zeros(2, dtype=np.int64)
    share  = np.array([a.size, b.size]) / (a.size + b.size)
    for col in table.T:
        acc = acc + col
        if np.all(acc.sum() * share >= min_expected):
            merged.append(acc)
            acc = np.zeros(2, dtype=np.int64)
    if acc.sum():
        if merged:
            merged[-1] = merged[-1] + acc
        else:
            merged.append(acc)

    if len(merged) < 2:
        return 1.
    return float(stats.chi2_contingency(np.array(merged).T)[1])
