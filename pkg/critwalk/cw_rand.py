import struct
import numpy as np

from typing import Optional

from .cw_structs import dotdict, ParameterError


_MASK64 = (1 << 64) - 1
_TOKEN  = struct.Struct('<15Q')   # seed, index, counter[4], key[2], buffer[4], buffer_pos, has_uint32, uinteger


class RngStream:
    """ Deterministic random stream keyed by (master_seed, stream_index).

    The bit generator is Philox, a counter-based generator: the key is derived
    from the pair by hashing, so any trial stream can be built directly without
    advancing through the streams before it. A stream is single-owner.
    """
    def __init__(self, master_seed: int, stream_index: int, bit_generator: Optional[np.random.Philox] = None):
        self.master_seed  : int = int(master_seed) & _MASK64
        self.stream_index : int = int(stream_index) & _MASK64

        if bit_generator is None:
            key = np.random.SeedSequence([self.master_seed, self.stream_index]).generate_state(2, dtype=np.uint64)
            bit_generator = np.random.Philox(key=key)

        self.bit_generator : np.random.Philox   = bit_generator
        self.generator     : np.random.Generator = np.random.Generator(bit_generator)

    def __repr__(self):
        return f'RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})'

    def jumped(self, jumps: int = 1) -> 'RngStream':
        """ substream with the same key, advanced by jumps * 2**128 counter blocks """
        return RngStream(self.master_seed, self.stream_index, self.bit_generator.jumped(jumps))

    # checkpointing
    # -------------
    def to_token(self) -> str:
        s = self.bit_generator.state
        words = [self.master_seed, self.stream_index,
                 *map(int, s['state']['counter']), *map(int, s['state']['key']),
                 *map(int, s['buffer']), int(s['buffer_pos']), int(s['has_uint32']), int(s['uinteger'])]
        return _TOKEN.pack(*words).hex()

    @classmethod
    def from_token(cls, token: str) -> 'RngStream':
        try:
            w = _TOKEN.unpack(bytes.fromhex(token))
        except (ValueError, struct.error) as e:
            raise ParameterError(f'Invalid stream token ({e}).') from None

        bg = np.random.Philox(key=np.array(w[6:8], dtype=np.uint64))
        bg.state = {
            'bit_generator': 'Philox',
            'state'        : {'counter': np.array(w[2:6], dtype=np.uint64), 'key': np.array(w[6:8], dtype=np.uint64)},
            'buffer'       : np.array(w[8:12], dtype=np.uint64),
            'buffer_pos'   : w[12],
            'has_uint32'   : w[13],
            'uinteger'     : w[14],
        }
        return cls(w[0], w[1], bg)


def derive_stream(master_seed: int, stream_index: int) -> RngStream:
    return RngStream(master_seed, stream_index)


class CutGammaParams(dotdict):
    def __init__(self, theta: float):
        self.theta : float = float(theta)   # truncation level (circle length)
        if not self.theta > 0:
            raise ParameterError(f'Cut-gamma truncation theta must be positive, got {theta}.')


# Samplers
# ========

def sample_uniform(stream: RngStream, size=None):
    return stream.generator.random(size)


def sample_exponential(stream: RngStream, size=None):
    return stream.generator.standard_exponential(size)


def sample_binomial(count, prob, stream: RngStream, size=None):
    """ Exact Bin(count, prob) draw.

    numpy's Generator uses inversion when count * min(prob, 1 - prob) < 30 and
    the BTPE accept-reject scheme otherwise; both are exact.
    """
    p = np.asarray(prob, dtype=np.float64)
    if np.any(~(p >= 0)) or np.any(~(p <= 1)):
        raise ParameterError(f'Binomial probability must lie in [0, 1], got {prob}.')
    c = np.asarray(count)
    if np.any(c < 0):
        raise ParameterError(f'Binomial count must be nonnegative, got {count}.')

    out = stream.generator.binomial(count, prob, size)
    return int(out) if np.ndim(out) == 0 else out


def sample_cut_gamma(params: CutGammaParams, stream: RngStream, size=None):
    """ min(E1 + E2, theta) for independent unit exponentials """
    if isinstance(params, (int, float)):
        params = CutGammaParams(params)
    shape = (2,) if size is None else (*np.atleast_1d(size), 2)
    e = stream.generator.standard_exponential(shape).sum(axis=-1)
    out = np.minimum(e, params.theta)
    return float(out) if size is None else out


def cut_gamma_mean(theta: float) -> float:
    """ E[min(E1 + E2, theta)] = 2 - (theta + 2) e^{-theta} """
    return 2. - (theta + 2.) * np.exp(-theta)


def cut_gamma_cdf(x, theta: float):
    """ CDF of the cut-gamma law; atom of mass (1 + theta) e^{-theta} at theta """
    x = np.asarray(x, dtype=np.float64)
    c = -np.expm1(-x) - x * np.exp(-x)
    return np.where(x >= theta, 1., np.where(x < 0, 0., c))


def sample_poisson_process(rate: float, length: float, stream: RngStream) -> np.ndarray:
    """ sorted points of a homogeneous Poisson process on [0, length) """
    if rate < 0 or length < 0:
        raise ParameterError(f'Poisson process needs rate >= 0 and length >= 0, got rate={rate}, length={length}.')
    if rate == 0 or length == 0:
        return np.empty(0)

    g = stream.generator
    m = g.poisson(rate * length)
    x = np.sort(g.random(m) * length)
    # u * length can round up to length
    return np.minimum(x, np.nextafter(length, 0.))
