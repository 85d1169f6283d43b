"""Fractional differencing and integration filters.

The binomial expansion of (1 - B)^(-d) has coefficients

    a_0 = 1,   a_j = a_{j-1} * (j - 1 + d) / j,

equal to the Gamma ratio G(j+d) / {G(d) G(j+1)}.  The recursion is used
everywhere (no overflow, sign preserved for d < 0); the Gamma form is kept
for test oracles only.

Type II integration is the exact finite convolution starting at time 1.
Type I integration approximates the stationary two-sided solution with a
pre-sample burn-in M chosen from the tail variance sum(j>M) a_j^2, whose
total is the closed form G(1-2d) / G(1-d)^2.
"""

from dataclasses import dataclass
from functools import lru_cache
import struct
from typing import NamedTuple

import numpy as np
from scipy.fft import next_fast_len
from scipy.special import gammaln

from . import innovations

__all__ = [
    "FracSpec",
    "Type1Series",
    "TruncationInfeasibleError",
    "frac_coeffs",
    "partial_sums",
    "integrate_type2",
    "fractional_difference",
    "select_burn_in",
    "integrate_type1",
    "integrate_higher",
    "read_series_csv",
    "write_series_csv",
    "read_series_bin",
    "write_series_bin",
]

FFT_MIN_N = 512
BURN_IN_CAP = 10**7
_SCAN_CHUNK = 1 << 20


class TruncationInfeasibleError(RuntimeError):
    """Requested tail tolerance needs a burn-in beyond the hard cap."""


@dataclass(frozen=True)
class FracSpec:
    """Fractional integration order: total order is p + d.

    d     fractional part, in (-1/2, 1/2)
    p     extra integer order, >= 0
    kind  "type1" (stationary, infinite past) or "type2" (started at time 1)
    """

    d: float
    p: int = 0
    kind: str = "type2"

    def __post_init__(self):
        if not -0.5 < self.d < 0.5:
            raise ValueError("need -1/2 < d < 1/2, got d=%g" % self.d)
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 0):
            raise ValueError("need integer p >= 0, got p=%r" % (self.p,))
        if self.kind not in ("type1", "type2"):
            raise ValueError("kind must be 'type1' or 'type2', got %r" % (self.kind,))


class Type1Series(NamedTuple):
    values: np.ndarray
    burn_in: int


def frac_coeffs(d: float, m: int) -> np.ndarray:
    """First m coefficients of (1 - B)^(-d) via the multiplicative recursion.

    For d in (0, 1) all coefficients are >= 0; for d in (-1, 0) every
    coefficient after a_0 = 1 is <= 0 and |a_j| decreases in j.
    """
    if m < 1:
        raise ValueError("need m >= 1 coefficients, got m=%d" % m)
    if not -1.0 < d < 1.0:
        raise ValueError("need -1 < d < 1, got d=%g" % d)
    out = np.empty(m)
    out[0] = 1.0
    if m > 1:
        j = np.arange(1.0, m)
        np.cumprod((j - 1.0 + d) / j, out=out[1:])
    return out


def partial_sums(coeffs: np.ndarray) -> np.ndarray:
    """Cumulative sums A_k = a_0 + ... + a_k."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        raise ValueError("empty coefficient sequence")
    return np.cumsum(coeffs)


@lru_cache(maxsize=8)
def _coeffs_cached(d: float, m: int) -> np.ndarray:
    a = frac_coeffs(d, m)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=8)
def _kernel_rfft_cached(d: float, m: int, nfft: int) -> np.ndarray:
    buf = np.zeros(nfft)
    buf[:m] = _coeffs_cached(d, m)
    freq = np.fft.rfft(buf)
    freq.setflags(write=False)
    return freq


def _causal_filter(x: np.ndarray, d: float, method: str) -> np.ndarray:
    """First n terms of the convolution of x with the (1-B)^(-d) expansion."""
    n = x.size
    if method == "auto":
        method = "fft" if n >= FFT_MIN_N else "direct"
    if method == "direct":
        return np.convolve(x, _coeffs_cached(d, n))[:n]
    if method == "fft":
        nfft = next_fast_len(2 * n - 1)
        kern = _kernel_rfft_cached(d, n, nfft)
        buf = np.zeros(nfft)
        buf[:n] = x
        return np.fft.irfft(np.fft.rfft(buf) * kern, nfft)[:n]
    raise ValueError("method must be 'auto', 'direct' or 'fft', got %r" % (method,))


def integrate_type2(u, d: float, method: str = "auto") -> np.ndarray:
    """Exact Type II fractional integration Y_t = sum(i<t) a_i u_{t-i}.

    The innovation u_t is switched on at time 1, so the finite convolution
    is the process itself (no truncation error).
    """
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        raise ValueError("empty series")
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    return _causal_filter(u, d, method)


def fractional_difference(x, d: float, method: str = "auto") -> np.ndarray:
    """Apply (1 - B)^d as a finite causal convolution (inverse of Type II)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    return _causal_filter(x, -d, method)


def _coeff_sq_total(d: float) -> float:
    # sum(j>=0) a_j^2 = G(1-2d) / G(1-d)^2
    return float(np.exp(gammaln(1.0 - 2.0 * d) - 2.0 * gammaln(1.0 - d)))


def _tail_sq_asymptotic(d: float, m: int) -> float:
    # sum(j>m) a_j^2 ~ m^(2d-1) / ((1-2d) G(d)^2), from a_j ~ j^(d-1)/G(d)
    g2 = float(np.exp(2.0 * gammaln(d)))
    return m ** (2.0 * d - 1.0) / ((1.0 - 2.0 * d) * g2)


def select_burn_in(d: float, eps_tail: float, sigma_u: float = 1.0, cap: int = BURN_IN_CAP) -> int:
    """Smallest M with sigma_u * sqrt(sum(j>M) a_j^2) <= eps_tail.

    The tail sum is the closed-form total minus the running partial sum of
    a_j^2.  Raises TruncationInfeasibleError when M would exceed cap; a
    conservative asymptotic bound short-circuits hopeless requests before
    scanning.
    """
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    if eps_tail <= 0.0:
        raise ValueError("need eps_tail > 0, got %g" % eps_tail)
    if sigma_u < 0.0:
        raise ValueError("need sigma_u >= 0, got %g" % sigma_u)
    if d == 0.0 or sigma_u == 0.0:
        return 0
    target = (eps_tail / sigma_u) ** 2
    if _tail_sq_asymptotic(d, cap) > 4.0 * target:
        raise TruncationInfeasibleError(
            "tail std %.3g at burn-in cap %d exceeds eps_tail %.3g"
            % (sigma_u * np.sqrt(_tail_sq_asymptotic(d, cap)), cap, eps_tail)
        )
    total = _coeff_sq_total(d)
    consumed = 1.0  # a_0^2
    if total - consumed <= target:
        return 0
    last = 1.0
    start = 1
    while start <= cap:
        stop = min(start + _SCAN_CHUNK, cap + 1)
        j = np.arange(float(start), float(stop))
        chunk = np.cumprod((j - 1.0 + d) / j) * last
        tail = total - (consumed + np.cumsum(chunk**2))
        hit = np.nonzero(tail <= target)[0]
        if hit.size:
            return start + int(hit[0])
        consumed += float(np.sum(chunk**2))
        last = float(chunk[-1])
        start = stop
    raise TruncationInfeasibleError(
        "burn-in exceeds cap %d for eps_tail %.3g at d=%g" % (cap, eps_tail, d)
    )


def integrate_type1(
    model,
    d: float,
    n: int,
    eps_tail: float = None,
    seed: int = 0,
    burn_in: int = None,
    cap: int = BURN_IN_CAP,
) -> Type1Series:
    """Stationary Type I series X_t = sum(j>=0) a_j u_{t-j}, truncated at lag M.

    M comes from select_burn_in unless an explicit burn_in is given.  The
    model's own warm-up is handled inside innovations.gen; here M extra
    pre-sample innovations feed the filter so X_1 already sees a long past.

    Returns (values, burn_in); the chosen M is part of the result on purpose.
    """
    if n < 1:
        raise ValueError("need n >= 1, got %d" % n)
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    if burn_in is None:
        if eps_tail is None:
            raise ValueError("give either eps_tail or burn_in")
        sigma_u = innovations.stddev(model)
        burn_in = select_burn_in(d, eps_tail, sigma_u=sigma_u, cap=cap)
    elif burn_in < 0:
        raise ValueError("need burn_in >= 0, got %d" % burn_in)
    m = int(burn_in)
    u = innovations.gen(model, n + m, seed)
    x = _causal_filter(u, d, "fft" if n + m >= FFT_MIN_N else "direct")[m : m + n]
    return Type1Series(np.ascontiguousarray(x), m)


def integrate_higher(
    source,
    spec: FracSpec,
    n: int = None,
    eps_tail: float = None,
    seed: int = 0,
    burn_in: int = None,
) -> np.ndarray:
    """Order p + d integration: order-d filter (per spec.kind), then p cumsums.

    For type2, source is the innovation series itself; for type1, source is
    an innovation model and n must be given.
    """
    if spec.kind == "type2":
        x = integrate_type2(np.asarray(source, dtype=float), spec.d)
    else:
        if n is None:
            raise ValueError("type1 integration needs n")
        x = integrate_type1(source, spec.d, n, eps_tail=eps_tail, seed=seed, burn_in=burn_in).values
    for _ in range(spec.p):
        x = np.cumsum(x)
    return x


# ---------------------------------------------------------------------------
# series files: single-column CSV (header "value") and length-prefixed raw
# little-endian float64

def write_series_csv(path, x) -> None:
    x = np.asarray(x, dtype=float)
    with open(path, "w") as fh:
        fh.write("value\n")
        for v in x:
            fh.write("%.17g\n" % v)


def read_series_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "value":
            raise ValueError("bad series CSV %s: expected header 'value', got %r" % (path, header))
        try:
            return np.array([float(line) for line in fh if line.strip()], dtype=float)
        except ValueError as exc:
            raise ValueError("bad series CSV %s: %s" % (path, exc)) from exc


def write_series_bin(path, x) -> None:
    x = np.asarray(x, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", x.size))
        fh.write(x.tobytes())


def read_series_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(8)
        if len(head) != 8:
            raise ValueError("bad series file %s: missing length prefix" % path)
        (count,) = struct.unpack("<Q", head)
        payload = fh.read()
    if len(payload) != 8 * count:
        raise ValueError(
            "bad series file %s: prefix says %d values, found %d bytes" % (path, count, len(payload))
        )
    return np.frombuffer(payload, dtype="<f8").astype(float)
