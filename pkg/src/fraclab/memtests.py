"""R/S and KPSS long-memory statistics with the Bartlett long-run variance.

The long-run variance estimator is

    w2 = gamma_0 + 2 sum(j=1..l) (1 - j/(l+1)) gamma_j,

with sample autocovariances in the 1/n convention, so l = 0 reduces to the
plain sample variance.  Both statistics divide cumulative mean-deviations by
w (R/S: the range; KPSS: the normalized sum of squared partial sums), and
both are exactly invariant under scaling and shifting of the input.

Under an order-d null the statistics are rescaled by l^d / n^(d+1/2) (R/S)
and l^(2d) / n^(2d) (KPSS) and referred to Monte Carlo tables of the
matching fractional-bridge functional.
"""

from dataclasses import dataclass, asdict
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.fft import next_fast_len

__all__ = [
    "LrvEstimate",
    "TestReport",
    "DegenerateVarianceError",
    "bartlett_lrv",
    "default_bandwidth",
    "rs_statistic",
    "kpss_statistic",
    "normalize_statistic",
    "long_memory_test",
]

FFT_MIN_N = 2048


class DegenerateVarianceError(ValueError):
    """The long-run variance estimate is zero (constant input)."""


class LrvEstimate(NamedTuple):
    w2: float
    l: int
    n: int


def _autocov_direct(dev: np.ndarray, l: int) -> np.ndarray:
    n = dev.size
    out = np.empty(l + 1)
    for j in range(l + 1):
        out[j] = np.dot(dev[: n - j], dev[j:]) / n
    return out


def _autocov_fft(dev: np.ndarray, l: int) -> np.ndarray:
    n = dev.size
    nfft = next_fast_len(2 * n)
    freq = np.fft.rfft(dev, nfft)
    acov = np.fft.irfft(freq * np.conj(freq), nfft)[: l + 1] / n
    return acov


def bartlett_lrv(x, l: int, method: str = "auto") -> LrvEstimate:
    """Bartlett-kernel long-run variance with bandwidth l.

    Direct summation below 2048 points, FFT autocovariances above; the two
    agree to ~1e-15 relative and the cutover is only a speed choice.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need n >= 2, got %d" % n)
    if not 0 <= l < n:
        raise ValueError("need 0 <= l < n, got l=%d, n=%d" % (l, n))
    dev = x - x.mean()
    if method == "auto":
        method = "fft" if n >= FFT_MIN_N else "direct"
    if method == "direct":
        acov = _autocov_direct(dev, l)
    elif method == "fft":
        acov = _autocov_fft(dev, l)
    else:
        raise ValueError("method must be 'auto', 'direct' or 'fft', got %r" % (method,))
    weights = 1.0 - np.arange(1, l + 1) / (l + 1.0)
    w2 = acov[0] + 2.0 * float(np.dot(weights, acov[1:]))
    return LrvEstimate(max(w2, 0.0), l, n)


def default_bandwidth(n: int, rate: float = 1.0 / 3.0) -> int:
    """l = max(1, floor(n^rate)); the default rate 1/3 satisfies l -> inf, l/n -> 0."""
    if n < 2:
        raise ValueError("need n >= 2, got %d" % n)
    if not 0.0 < rate < 1.0:
        raise ValueError("need 0 < rate < 1, got %g" % rate)
    if abs(rate - 1.0 / 3.0) < 1e-12:
        # exact integer cube root; plain floor(n ** (1/3)) misses perfect cubes
        l = int(round(n ** (1.0 / 3.0)))
        while (l + 1) ** 3 <= n:
            l += 1
        while l**3 > n:
            l -= 1
    else:
        l = int(math.floor(n**rate + 1e-9))
    return max(1, l)


def _cumdev(x: np.ndarray) -> np.ndarray:
    return np.cumsum(x - x.mean())


def _checked_w(x: np.ndarray, l: int, method: str) -> LrvEstimate:
    est = bartlett_lrv(x, l, method)
    if est.w2 <= 0.0:
        raise DegenerateVarianceError("long-run variance is zero; statistic undefined")
    return est


def rs_statistic(x, l: int, method: str = "auto") -> float:
    """Rescaled range: (max_k - min_k of cumulative mean-deviations) / w."""
    x = np.asarray(x, dtype=float)
    est = _checked_w(x, l, method)
    s = _cumdev(x)
    return float((s.max() - s.min()) / math.sqrt(est.w2))


def kpss_statistic(x, l: int, method: str = "auto") -> float:
    """KPSS: sum of squared partial sums of mean-deviations over w2 n^2."""
    x = np.asarray(x, dtype=float)
    est = _checked_w(x, l, method)
    s = _cumdev(x)
    return float(np.sum(s**2) / (est.w2 * est.n**2))


def normalize_statistic(stat: str, value: float, n: int, l: int, d: float) -> float:
    """Rate normalization under an order-d null.

    rs:   value * l^d * n^-(d+1/2)
    kpss: value * l^(2d) * n^(-2d)
    """
    if stat == "rs":
        return value * l**d * n ** -(d + 0.5)
    if stat == "kpss":
        return value * l ** (2.0 * d) * n ** (-2.0 * d)
    raise ValueError("stat must be 'rs' or 'kpss', got %r" % (stat,))


_STAT_FUNCTIONAL = {"rs": "range_of_bridge", "kpss": "int_sq_bridge"}


@dataclass
class TestReport:
    statistic: str
    raw: float
    d_assumed: float
    normalized: float
    l: int
    n: int
    p_value: float
    table_id: str
    moment_ok: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)


def long_memory_test(
    x,
    l: Optional[int] = None,
    d_null: float = 0.0,
    tables_dir=None,
    statistic: str = "rs",
    build_missing: bool = False,
    table_m: int = None,
    table_reps: int = None,
    table_seed: int = None,
    innovation=None,
) -> TestReport:
    """Run one long-memory test against a Monte Carlo quantile table.

    The right-tail p-value comes from the RangeOfBridge table (R/S) or the
    IntSqBridge table (KPSS) at d_null; large statistics indicate longer
    memory than the null.  With an innovation spec supplied, the report also
    carries the memory-test moment-compatibility flag.
    """
    from . import fbm

    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need n >= 2, got %d" % n)
    if statistic not in _STAT_FUNCTIONAL:
        raise ValueError("statistic must be 'rs' or 'kpss', got %r" % (statistic,))
    if l is None:
        l = default_bandwidth(n)
    raw = rs_statistic(x, l) if statistic == "rs" else kpss_statistic(x, l)
    normalized = normalize_statistic(statistic, raw, n, l, d_null)
    table = fbm.ensure_table(
        tables_dir,
        functional=_STAT_FUNCTIONAL[statistic],
        kind="type1",
        d=d_null,
        m=table_m if table_m is not None else fbm.TABLE_M_DEFAULT,
        reps=table_reps if table_reps is not None else fbm.TABLE_REPS_DEFAULT,
        seed=table_seed if table_seed is not None else fbm.TABLE_SEED_DEFAULT,
        build_missing=build_missing,
    )
    p = fbm.pvalue_from_table(table, normalized)
    moment_ok = None
    if innovation is not None:
        from .innovations import check_moment_compat

        moment_ok = check_moment_compat(innovation, d_null, "memory_test").ok
    return TestReport(
        statistic=statistic,
        raw=float(raw),
        d_assumed=float(d_null),
        normalized=float(normalized),
        l=int(l),
        n=int(n),
        p_value=float(p),
        table_id=fbm.table_filename(table),
        moment_ok=moment_ok,
    )
