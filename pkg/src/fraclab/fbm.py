"""Fractional Brownian motion reference simulators and quantile tables.

Type I is standard fBm with Hurst index H = d + 1/2, simulated exactly in
distribution by circulant embedding of fractional Gaussian noise with

    gamma(k) = 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H),

increments scaled by m^-H so the path lives on t in [0, 1] with unit
variance at t = 1.  Type II is

    W_d(t_k) = sqrt(2d+1) sum(j<k) w_kj Z_j,

where each cell weight squares to the exact integral of (t_k - s)^2d over
the cell, making Var W_d(t_k) = t_k^(2d+1) exact at every grid point (this
absorbs the endpoint singularity for d < 0).

Tables persist the sorted Monte Carlo sample of a path functional of the
fractional Brownian bridge (or the raw terminal value) in a small
header-plus-float64 file addressed by a name derived from its metadata.
"""

from dataclasses import dataclass
from functools import lru_cache
import json
import logging
import math
import os
from pathlib import Path

import numpy as np
from scipy.fft import next_fast_len
from scipy.integrate import quad
from scipy.linalg import cholesky, toeplitz

from ._rng import child_rng

__all__ = [
    "FbmPath",
    "QuantileTable",
    "TableFormatError",
    "FUNCTIONALS",
    "const_A",
    "kappa1",
    "kappa2",
    "simulate_type1",
    "simulate_type2",
    "to_bridge",
    "path_functionals",
    "int_sq_bridge_mean",
    "build_quantile_table",
    "pvalue_from_table",
    "table_filename",
    "save_table",
    "load_table",
    "ensure_table",
]

log = logging.getLogger(__name__)

FUNCTIONALS = ("range_of_bridge", "sup_of_bridge", "int_sq_bridge", "terminal")
KINDS = ("type1", "type2")

TABLE_M_DEFAULT = 1024
TABLE_REPS_DEFAULT = 100_000
TABLE_SEED_DEFAULT = 771_230_011
TABLE_FORMAT_VERSION = 1
_BATCH = 2048


class TableFormatError(ValueError):
    """Quantile table file failed a format check."""


@dataclass
class FbmPath:
    kind: str
    d: float
    values: np.ndarray  # m+1 points on the uniform grid over [0, 1], value 0 at t=0

    @property
    def m(self) -> int:
        return self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m


def _alg_quad(f, alpha: float, b: float) -> "tuple[float, float]":
    """int_0^b x^alpha f(x) dx with f smooth, via the exact substitution
    x = v^(1/(1+alpha)) which removes the algebraic endpoint singularity."""
    p = 1.0 + alpha
    val, err = quad(lambda v: f(v ** (1.0 / p)), 0.0, b**p, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val / p, err / p


def const_A(d: float) -> float:
    """A(d) = sqrt( 1/(2d+1) + int_0^inf [(1+s)^d - s^d]^2 ds ).

    The integral splits at s = 1.  On [0, 1] the square expands into two
    closed forms plus int s^d (1+s)^d; on [1, inf) the substitution s = 1/w
    gives int_0^1 w^(-2d) [((1+w)^d - 1)/w]^2 dw.  Both remaining pieces are
    algebraic-singularity integrals handled by a power substitution, so the
    result is accurate to ~1e-12 over the whole open interval.
    """
    return _const_A_cached(float(d))


@lru_cache(maxsize=64)
def _const_A_cached(d: float) -> float:
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    if d == 0.0:
        return 1.0
    t1 = (2.0 ** (2.0 * d + 1.0) - 1.0) / (2.0 * d + 1.0)
    t2 = 1.0 / (2.0 * d + 1.0)
    t3, e3 = _alg_quad(lambda s: (1.0 + s) ** d, d, 1.0)

    def h(w):
        if w <= 0.0:
            return d * d
        return (np.expm1(d * np.log1p(w)) / w) ** 2

    i2a, e2a = _alg_quad(h, -2.0 * d, 0.5)
    i2b, e2b = quad(lambda w: w ** (-2.0 * d) * h(w), 0.5, 1.0, epsabs=1e-13, epsrel=1e-13)
    if e3 + e2a + e2b > 1e-10:
        raise RuntimeError("quadrature for A(%g) only reached abs error %g" % (d, e3 + e2a + e2b))
    return math.sqrt(1.0 / (2.0 * d + 1.0) + t1 + t2 - 2.0 * t3 + i2a + i2b)


def kappa1(d: float, zeta_norm: float) -> float:
    """Type I norming constant A(d) ||zeta_0|| / Gamma(d+1)."""
    if zeta_norm <= 0:
        raise ValueError("need zeta_norm > 0, got %g" % zeta_norm)
    return const_A(d) * zeta_norm / math.gamma(d + 1.0)


def kappa2(d: float, zeta_norm: float) -> float:
    """Type II norming constant ||zeta_0|| (2d+1)^-1/2 / Gamma(d+1)."""
    if zeta_norm <= 0:
        raise ValueError("need zeta_norm > 0, got %g" % zeta_norm)
    if d <= -0.5:
        raise ValueError("need d > -1/2, got %g" % d)
    return zeta_norm / (math.sqrt(2.0 * d + 1.0) * math.gamma(d + 1.0))


# ---------------------------------------------------------------------------
# Type I: circulant embedding of fractional Gaussian noise

@lru_cache(maxsize=16)
def _fgn_prep(d: float, m: int):
    """Either ("fft", sqrt eigenvalues) or ("chol", lower factor) for grid m."""
    h2 = 2.0 * (d + 0.5)
    k = np.arange(m + 1, dtype=float)
    gamma = 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
    row = np.concatenate([gamma, gamma[m - 1 : 0 : -1]])
    eig = np.fft.fft(row).real
    if eig.min() < -1e-8 * eig.max():
        log.warning(
            "circulant embedding not nonnegative definite at d=%g, m=%d; falling back to dense Cholesky",
            d,
            m,
        )
        cov = toeplitz(gamma[:m])
        factor = cholesky(cov + 1e-12 * np.eye(m), lower=True)
        factor.setflags(write=False)
        return ("chol", factor)
    sq = np.sqrt(np.maximum(eig, 0.0))
    sq.setflags(write=False)
    return ("fft", sq)


def _fgn_complex_draw(rng: np.random.Generator, m: int) -> np.ndarray:
    z = np.empty(2 * m, dtype=complex)
    z[0] = rng.standard_normal()
    z[m] = rng.standard_normal()
    v = rng.standard_normal((m - 1, 2))
    z[1:m] = (v[:, 0] + 1j * v[:, 1]) / math.sqrt(2.0)
    z[m + 1 :] = np.conj(z[1:m][::-1])
    return z


def _type1_batch(d: float, m: int, seed: int, rep_indices) -> np.ndarray:
    """Rows of path values (len m+1), one per replication index."""
    prep = _fgn_prep(float(d), int(m))
    h = d + 0.5
    reps = len(rep_indices)
    if prep[0] == "fft":
        sq = prep[1]
        z = np.empty((reps, 2 * m), dtype=complex)
        for i, r in enumerate(rep_indices):
            z[i] = _fgn_complex_draw(child_rng(seed, r), m)
        fgn = math.sqrt(2 * m) * np.fft.ifft(sq * z, axis=1).real[:, :m]
    else:
        factor = prep[1]
        normals = np.empty((reps, m))
        for i, r in enumerate(rep_indices):
            normals[i] = child_rng(seed, r).standard_normal(m)
        fgn = normals @ factor.T
    out = np.zeros((reps, m + 1))
    np.cumsum(fgn, axis=1, out=out[:, 1:])
    out *= m ** (-h)
    return out


def simulate_type1(d: float, m: int, seed: int) -> FbmPath:
    """Type I fBm path on m+1 grid points; m must be a power of two."""
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    if m < 2 or m & (m - 1):
        raise ValueError("need m a power of two >= 2, got %d" % m)
    values = _type1_batch(d, m, seed, [0])[0]
    return FbmPath("type1", d, values)


# ---------------------------------------------------------------------------
# Type II: exact-cell-variance moving average

@lru_cache(maxsize=16)
def _type2_kernel_rfft(d: float, m: int, nfft: int) -> np.ndarray:
    i = np.arange(1, m + 1, dtype=float)
    ker = m ** -(d + 0.5) * np.sqrt(i ** (2.0 * d + 1.0) - (i - 1.0) ** (2.0 * d + 1.0))
    buf = np.zeros(nfft)
    buf[:m] = ker
    freq = np.fft.rfft(buf)
    freq.setflags(write=False)
    return freq


def _type2_batch(d: float, m: int, seed: int, rep_indices) -> np.ndarray:
    nfft = next_fast_len(2 * m - 1)
    kern = _type2_kernel_rfft(float(d), int(m), nfft)
    reps = len(rep_indices)
    z = np.zeros((reps, nfft))
    for i, r in enumerate(rep_indices):
        z[i, :m] = child_rng(seed, r).standard_normal(m)
    conv = np.fft.irfft(np.fft.rfft(z, axis=1) * kern, nfft, axis=1)[:, :m]
    out = np.zeros((reps, m + 1))
    out[:, 1:] = conv
    return out


def simulate_type2(d: float, m: int, seed: int) -> FbmPath:
    """Type II fBm path: W_d(0) = 0, Var W_d(t_k) = t_k^(2d+1) exactly."""
    if d <= -0.5:
        raise ValueError("need d > -1/2, got d=%g" % d)
    if m < 2:
        raise ValueError("need m >= 2, got %d" % m)
    values = _type2_batch(d, m, seed, [0])[0]
    return FbmPath("type2", d, values)


def _batch_values(kind: str, d: float, m: int, seed: int, rep_indices) -> np.ndarray:
    if kind == "type1":
        return _type1_batch(d, m, seed, rep_indices)
    if kind == "type2":
        return _type2_batch(d, m, seed, rep_indices)
    raise ValueError("kind must be 'type1' or 'type2', got %r" % (kind,))


# ---------------------------------------------------------------------------
# bridges and path functionals

def to_bridge(path: FbmPath) -> FbmPath:
    """B(t) - t B(1) on the grid; the terminal value is exactly zero."""
    values = path.values - path.times * path.values[-1]
    return FbmPath(path.kind, path.d, values)


def _bridge_rows(values: np.ndarray) -> np.ndarray:
    m = values.shape[1] - 1
    t = np.arange(m + 1) / m
    return values - t * values[:, -1:]


def _functional_rows(values: np.ndarray, functional: str) -> np.ndarray:
    if functional == "terminal":
        return values[:, -1].copy()
    bridge = _bridge_rows(values)
    if functional == "range_of_bridge":
        return bridge.max(axis=1) - bridge.min(axis=1)
    if functional == "sup_of_bridge":
        return bridge.max(axis=1)
    if functional == "int_sq_bridge":
        m = values.shape[1] - 1
        return np.trapezoid(bridge**2, dx=1.0 / m, axis=1)
    raise ValueError("functional must be one of %s, got %r" % (FUNCTIONALS, functional))


def path_functionals(path: FbmPath) -> dict:
    """All four functionals of one path (bridge-based except the raw terminal)."""
    rows = path.values[None, :]
    return {name: float(_functional_rows(rows, name)[0]) for name in FUNCTIONALS}


def int_sq_bridge_mean(d: float) -> float:
    """E int_0^1 bridge(t)^2 dt for the Type I bridge at order d (1/6 at d=0)."""
    h2 = 2.0 * (d + 0.5)
    return 1.0 / (h2 + 1.0) - 1.0 / (h2 + 2.0) + 1.0 / ((h2 + 1.0) * (h2 + 2.0)) - 1.0 / 6.0


# ---------------------------------------------------------------------------
# quantile tables

@dataclass
class QuantileTable:
    functional: str
    kind: str
    d: float
    m: int
    reps: int
    seed: int
    values: np.ndarray  # sorted ascending

    def meta(self) -> dict:
        return {
            "format": "fraclab-qtable",
            "format_version": TABLE_FORMAT_VERSION,
            "functional": self.functional,
            "kind": self.kind,
            "d": self.d,
            "m": self.m,
            "reps": self.reps,
            "seed": self.seed,
        }


def build_quantile_table(
    functional: str, kind: str, d: float, m: int, reps: int, seed: int
) -> QuantileTable:
    """Sorted Monte Carlo sample of one path functional; deterministic in seed."""
    if functional not in FUNCTIONALS:
        raise ValueError("functional must be one of %s, got %r" % (FUNCTIONALS, functional))
    if kind not in KINDS:
        raise ValueError("kind must be one of %s, got %r" % (KINDS, kind))
    if reps < 1000:
        raise ValueError("need reps >= 1000 for a usable table, got %d" % reps)
    samples = np.empty(reps)
    for lo in range(0, reps, _BATCH):
        hi = min(lo + _BATCH, reps)
        vals = _batch_values(kind, d, m, seed, range(lo, hi))
        samples[lo:hi] = _functional_rows(vals, functional)
    samples.sort()
    return QuantileTable(functional, kind, float(d), int(m), int(reps), int(seed), samples)


def pvalue_from_table(table: QuantileTable, observed: float) -> float:
    """Right-tail Monte Carlo p-value with the add-one correction."""
    if table.values.size == 0:
        raise ValueError("empty quantile table")
    n_ge = table.values.size - np.searchsorted(table.values, observed, side="left")
    return float((1 + n_ge) / (table.values.size + 1))


def table_filename(table_or_meta) -> str:
    meta = table_or_meta.meta() if isinstance(table_or_meta, QuantileTable) else table_or_meta
    return "%s__%s__d%+.6f__m%d__r%d__s%d.qtab" % (
        meta["functional"],
        meta["kind"],
        meta["d"],
        meta["m"],
        meta["reps"],
        meta["seed"],
    )


def save_table(table: QuantileTable, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / table_filename(table)
    header = json.dumps(table.meta(), sort_keys=True).encode() + b"\n"
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(table.values, dtype="<f8").tobytes())
    return path


def load_table(path) -> QuantileTable:
    with open(path, "rb") as fh:
        header = fh.readline()
        payload = fh.read()
    try:
        meta = json.loads(header.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TableFormatError("%s: unreadable table header" % path) from exc
    if meta.get("format") != "fraclab-qtable":
        raise TableFormatError("%s: not a quantile table file" % path)
    reps = int(meta["reps"])
    if len(payload) != 8 * reps:
        raise TableFormatError(
            "%s: header says %d samples, payload holds %d bytes" % (path, reps, len(payload))
        )
    values = np.frombuffer(payload, dtype="<f8").astype(float)
    if np.any(np.diff(values) < 0):
        raise TableFormatError("%s: samples are not sorted" % path)
    return QuantileTable(
        meta["functional"], meta["kind"], float(meta["d"]), int(meta["m"]), reps, int(meta["seed"]), values
    )


def ensure_table(
    tables_dir,
    functional: str,
    kind: str,
    d: float,
    m: int,
    reps: int,
    seed: int,
    build_missing: bool = False,
) -> QuantileTable:
    """Load the table for this configuration, building it first if allowed."""
    meta = {"functional": functional, "kind": kind, "d": float(d), "m": m, "reps": reps, "seed": seed}
    if tables_dir is None:
        tables_dir = os.environ.get("FRACLAB_TABLES_DIR", "tables")
    path = Path(tables_dir) / table_filename(meta)
    if path.exists():
        return load_table(path)
    if not build_missing:
        raise FileNotFoundError(
            "quantile table %s not found (pass build_missing or run the tables command)" % path
        )
    table = build_quantile_table(functional, kind, d, m, reps, seed)
    save_table(table, tables_dir)
    return table
