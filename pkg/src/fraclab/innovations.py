"""Causal nonlinear short-memory innovation generators and diagnostics.

Every variant produces a stationary, mean-zero shock sequence u_t driven by
iid draws; recursive models discard a warm-up stretch and, where the
recursion induces a nonzero mean, subtract it (analytic when available,
otherwise estimated once from a fixed-seed calibration run).

The coupled dependence curve D_q(k) = || u_k - u_k* ||_q replaces the time-0
draw by an independent copy and measures how far the effect propagates; it
upper-bounds the conditional-expectation dependence measure and is zero for
iid sequences at every k >= 1.
"""

from dataclasses import dataclass
import math
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.signal import lfilter

from . import _kernels
from ._rng import child_rng

__all__ = [
    "EpsSpec",
    "IidGaussian",
    "IidStudentT",
    "LinearMA",
    "Garch11",
    "Bilinear",
    "ThresholdAr",
    "ArmaFilter",
    "HeavyTailEta",
    "Const",
    "InnovationSpec",
    "MomentCompatibility",
    "DependenceResult",
    "gen",
    "stddev",
    "zeta_norm",
    "check_moment_compat",
    "coupled_dependence",
    "lrv_innovations",
    "gen_heavy_tail_eta",
    "heavy_tail_survival",
    "spec_to_dict",
    "spec_from_dict",
]

DEFAULT_BURN_IN = 1000
_CAL_SEED = 902347173
_CAL_N_MEAN = 400_000
_CAL_N_LRV = 1_000_000


@dataclass(frozen=True)
class EpsSpec:
    """Distribution of the iid driving shocks."""

    kind: str = "gaussian"  # "gaussian" | "student_t"
    sigma: float = 1.0
    nu: Optional[float] = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.sigma <= 0:
                raise ValueError("need sigma > 0, got %g" % self.sigma)
        elif self.kind == "student_t":
            if self.nu is None or self.nu <= 2:
                raise ValueError("student_t shocks need nu > 2 (finite variance), got %r" % (self.nu,))
            if self.sigma <= 0:
                raise ValueError("need scale > 0, got %g" % self.sigma)
        else:
            raise ValueError("eps kind must be 'gaussian' or 'student_t', got %r" % (self.kind,))

    @property
    def sd(self) -> float:
        if self.kind == "gaussian":
            return self.sigma
        return self.sigma * math.sqrt(self.nu / (self.nu - 2.0))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return self.sigma * rng.standard_normal(size)
        return self.sigma * rng.standard_t(self.nu, size)


_GAUSS = EpsSpec()


@dataclass(frozen=True)
class IidGaussian:
    sigma: float = 1.0
    q_moment: float = math.inf
    burn_in: int = 0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("need sigma > 0, got %g" % self.sigma)
        _check_q(self.q_moment)


@dataclass(frozen=True)
class IidStudentT:
    nu: float = 5.0
    scale: float = 1.0
    q_moment: float = 2.0
    burn_in: int = 0

    def __post_init__(self):
        if self.nu <= 2:
            raise ValueError("need nu > 2 for a finite variance, got %g" % self.nu)
        if self.scale <= 0:
            raise ValueError("need scale > 0, got %g" % self.scale)
        _check_q(self.q_moment)
        if self.q_moment >= self.nu:
            raise ValueError(
                "declared q_moment %g not finite for student_t with nu=%g" % (self.q_moment, self.nu)
            )


@dataclass(frozen=True)
class LinearMA:
    b: tuple = (1.0,)
    eps: EpsSpec = _GAUSS
    q_moment: Optional[float] = None
    burn_in: int = 0

    def __post_init__(self):
        if len(self.b) == 0:
            raise ValueError("need at least one MA weight")
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if self.q_moment is None:
            object.__setattr__(
                self, "q_moment", math.inf if self.eps.kind == "gaussian" else self.eps.nu * 0.999
            )
        _check_q(self.q_moment)


@dataclass(frozen=True)
class Garch11:
    omega: float = 0.1
    alpha: float = 0.1
    beta: float = 0.8
    eps: EpsSpec = _GAUSS
    q_moment: float = 2.0
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("need omega > 0, got %g" % self.omega)
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("need alpha >= 0 and beta >= 0")
        if self.alpha + self.beta >= 1:
            raise ValueError(
                "need alpha + beta < 1 for second-moment stationarity, got %g" % (self.alpha + self.beta)
            )
        _check_q(self.q_moment)


@dataclass(frozen=True)
class Bilinear:
    a: float = 0.3
    b: float = 0.3
    eps: EpsSpec = _GAUSS
    q_moment: float = 2.0
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        _check_q(self.q_moment)
        # contraction E log|a + b eps| < 0, checked by a fixed-seed estimate
        draws = self.eps.draw(child_rng(_CAL_SEED, 1), 100_000)
        est = float(np.mean(np.log(np.abs(self.a + self.b * draws) + 1e-300)))
        if est >= 0.0:
            raise ValueError(
                "bilinear contraction fails: estimated E log|a + b eps| = %.4f >= 0" % est
            )


@dataclass(frozen=True)
class ThresholdAr:
    a_pos: float = 0.4
    a_neg: float = -0.3
    eps: EpsSpec = _GAUSS
    q_moment: float = 2.0
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if max(abs(self.a_pos), abs(self.a_neg)) >= 1:
            raise ValueError("need max(|a+|, |a-|) < 1 for stationarity")
        _check_q(self.q_moment)


@dataclass(frozen=True)
class ArmaFilter:
    ar: tuple = ()
    ma: tuple = ()
    inner: "InnovationSpec" = None
    q_moment: Optional[float] = None
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))
        if self.inner is None:
            object.__setattr__(self, "inner", IidGaussian())
        if isinstance(self.inner, (HeavyTailEta, Const)):
            raise ValueError("arma filter cannot wrap %s" % type(self.inner).__name__)
        if self.ar:
            # stationarity: roots of 1 - sum(ar_i z^i) outside the unit circle
            poly = np.concatenate(([-c for c in self.ar[::-1]], [1.0]))
            roots = np.roots(poly)
            if roots.size and np.min(np.abs(roots)) <= 1.0:
                raise ValueError("AR polynomial has a root inside the unit circle")
        if self.q_moment is None:
            object.__setattr__(self, "q_moment", self.inner.q_moment)
        _check_q(self.q_moment)


@dataclass(frozen=True)
class HeavyTailEta:
    """Marginal with P(|eta|^q0 >= g) = c g^-1 (log g)^-2 for g >= v0.

    Only valid in the moment-boundary demo; gen() rejects it.
    """

    q0: float = 4.0
    v0: float = math.e**2
    q_moment: float = 2.0
    burn_in: int = 0

    def __post_init__(self):
        if self.q0 <= 0:
            raise ValueError("need q0 > 0, got %g" % self.q0)
        if self.v0 < math.e**2:
            raise ValueError("need v0 >= e^2 so the tail anchor is valid, got %g" % self.v0)


@dataclass(frozen=True)
class Const:
    """Debug model: u_t identically equal to value (not mean-centered)."""

    value: float = 1.0
    q_moment: float = math.inf
    burn_in: int = 0


InnovationSpec = Union[
    IidGaussian, IidStudentT, LinearMA, Garch11, Bilinear, ThresholdAr, ArmaFilter, HeavyTailEta, Const
]


def _check_q(q) -> None:
    if q < 2:
        raise ValueError("need declared q_moment >= 2, got %g" % q)


def _unit_shocks(eps: EpsSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    return eps.draw(rng, size) / eps.sd


def gen(spec: InnovationSpec, n: int, seed: int) -> np.ndarray:
    """Draw u_1..u_n; bit-identical for fixed (spec, n, seed)."""
    if n < 1:
        raise ValueError("need n >= 1, got %d" % n)
    if isinstance(spec, HeavyTailEta):
        raise ValueError("HeavyTailEta is only valid in the moment-boundary demo; use gen_heavy_tail_eta")
    rng = child_rng(seed)
    if isinstance(spec, IidGaussian):
        return spec.sigma * rng.standard_normal(n)
    if isinstance(spec, IidStudentT):
        return spec.scale * rng.standard_t(spec.nu, n)
    if isinstance(spec, Const):
        return np.full(n, spec.value)
    if isinstance(spec, LinearMA):
        k = len(spec.b) - 1
        draws = spec.eps.draw(rng, n + k)
        return np.convolve(draws, np.asarray(spec.b), mode="full")[k : k + n]
    if isinstance(spec, Garch11):
        z = _unit_shocks(spec.eps, rng, n + spec.burn_in)
        return _kernels.garch11_path(z, spec.omega, spec.alpha, spec.beta)[spec.burn_in :]
    if isinstance(spec, Bilinear):
        draws = spec.eps.draw(rng, n + spec.burn_in)
        u = _kernels.bilinear_path(draws, spec.a, spec.b)[spec.burn_in :]
        return u - _bilinear_mean(spec)
    if isinstance(spec, ThresholdAr):
        draws = spec.eps.draw(rng, n + spec.burn_in)
        u = _kernels.threshold_ar_path(draws, spec.a_pos, spec.a_neg)[spec.burn_in :]
        return u - _estimated_mean(spec)
    if isinstance(spec, ArmaFilter):
        v = gen(spec.inner, n + spec.burn_in, seed)
        return _apply_arma(spec, v)[spec.burn_in :]
    raise TypeError("unknown innovation spec %r" % (spec,))


def _apply_arma(spec: ArmaFilter, v: np.ndarray) -> np.ndarray:
    b = np.concatenate(([1.0], np.asarray(spec.ma, dtype=float)))
    a = np.concatenate(([1.0], -np.asarray(spec.ar, dtype=float)))
    return lfilter(b, a, v)


def _bilinear_mean(spec: Bilinear) -> float:
    # E u = b E[eps^2] / (1 - a): the eps_t term correlates with u_t only
    # through the immediately preceding shock
    return spec.b * spec.eps.sd**2 / (1.0 - spec.a)


@lru_cache(maxsize=32)
def _estimated_mean(spec: ThresholdAr) -> float:
    draws = spec.eps.draw(child_rng(_CAL_SEED, 2), _CAL_N_MEAN + spec.burn_in)
    u = _kernels.threshold_ar_path(draws, spec.a_pos, spec.a_neg)[spec.burn_in :]
    return float(np.mean(u))


def mean_source(spec: InnovationSpec) -> str:
    """How gen() centers this variant: 'zero', 'analytic' or 'estimated'."""
    if isinstance(spec, Bilinear):
        return "analytic"
    if isinstance(spec, ThresholdAr):
        return "estimated"
    if isinstance(spec, ArmaFilter):
        return mean_source(spec.inner)
    if isinstance(spec, Const):
        return "none (debug constant)"
    return "zero"


# ---------------------------------------------------------------------------
# second-moment helpers

def _is_white(spec: InnovationSpec) -> bool:
    return isinstance(spec, (IidGaussian, IidStudentT, Garch11))


def _arma_psi(spec: ArmaFilter, n_terms: int = 10_000) -> np.ndarray:
    impulse = np.zeros(n_terms)
    impulse[0] = 1.0
    return _apply_arma(spec, impulse)


@lru_cache(maxsize=32)
def _calibrated_std(spec: InnovationSpec) -> float:
    u = gen(spec, _CAL_N_MEAN, _CAL_SEED + 3)
    return float(np.std(u))


def stddev(spec: InnovationSpec) -> float:
    """Stationary standard deviation of u_t (analytic where available)."""
    if isinstance(spec, IidGaussian):
        return spec.sigma
    if isinstance(spec, IidStudentT):
        return spec.scale * math.sqrt(spec.nu / (spec.nu - 2.0))
    if isinstance(spec, Const):
        return 0.0
    if isinstance(spec, LinearMA):
        return spec.eps.sd * math.sqrt(float(np.sum(np.square(spec.b))))
    if isinstance(spec, Garch11):
        return math.sqrt(spec.omega / (1.0 - spec.alpha - spec.beta))
    if isinstance(spec, ArmaFilter) and _is_white(spec.inner):
        psi = _arma_psi(spec)
        return math.sqrt(float(np.sum(psi**2))) * stddev(spec.inner)
    if isinstance(spec, HeavyTailEta):
        raise ValueError("HeavyTailEta has no role outside the moment-boundary demo")
    return _calibrated_std(spec)


@lru_cache(maxsize=32)
def _calibrated_zeta(spec: InnovationSpec) -> float:
    from .memtests import bartlett_lrv, default_bandwidth

    u = gen(spec, _CAL_N_LRV, _CAL_SEED + 4)
    w2 = bartlett_lrv(u, default_bandwidth(_CAL_N_LRV)).w2
    return math.sqrt(w2)


def zeta_norm(spec: InnovationSpec) -> "tuple[float, str]":
    """Long-run standard deviation ||zeta_0|| = sqrt(2 pi f_u(0)), with source.

    Martingale-difference variants (iid, GARCH) have ||zeta_0|| equal to the
    plain standard deviation; a finite MA scales by |sum of weights|; an ARMA
    filter scales by |psi(1)|.  Everything else is estimated once from a long
    fixed-seed calibration run.
    """
    if isinstance(spec, (IidGaussian, IidStudentT, Garch11)):
        return stddev(spec), "analytic"
    if isinstance(spec, Const):
        return 0.0, "analytic"
    if isinstance(spec, LinearMA):
        return spec.eps.sd * abs(float(np.sum(spec.b))), "analytic"
    if isinstance(spec, ArmaFilter):
        inner_zeta, source = zeta_norm(spec.inner)
        gain = abs((1.0 + math.fsum(spec.ma)) / (1.0 - math.fsum(spec.ar)))
        return gain * inner_zeta, source
    if isinstance(spec, HeavyTailEta):
        raise ValueError("HeavyTailEta has no role outside the moment-boundary demo")
    return _calibrated_zeta(spec), "estimated"


# ---------------------------------------------------------------------------
# moment compatibility with the limit laws

@dataclass(frozen=True)
class MomentCompatibility:
    d: float
    q_required: float
    q_declared: float
    ok: bool
    context: str
    strict: bool


def check_moment_compat(spec: InnovationSpec, d: float, context: str) -> MomentCompatibility:
    """Does the declared moment order meet the requirement at this d?

    invariance_principle: q > 2/(2d+1) when d < 0, q = 2 suffices when d >= 0.
    memory_test:          q > max(2, 2/(2d+1)) always strictly.
    Never blocks execution; callers surface the flag.
    """
    if not -0.5 < d < 0.5:
        raise ValueError("need -1/2 < d < 1/2, got d=%g" % d)
    q = spec.q_moment
    if context == "invariance_principle":
        if d < 0:
            required, strict = 2.0 / (2.0 * d + 1.0), True
        else:
            required, strict = 2.0, False
    elif context == "memory_test":
        required, strict = max(2.0, 2.0 / (2.0 * d + 1.0)), True
    else:
        raise ValueError("context must be 'invariance_principle' or 'memory_test', got %r" % (context,))
    ok = q > required if strict else q >= required
    return MomentCompatibility(d, required, q, ok, context, strict)


# ---------------------------------------------------------------------------
# coupled dependence curve

@dataclass
class DependenceResult:
    k: np.ndarray
    delta: np.ndarray
    se: np.ndarray
    q: float
    q_exceeds_declared: bool


def _base_eps(spec: InnovationSpec) -> EpsSpec:
    if isinstance(spec, (LinearMA, Garch11, Bilinear, ThresholdAr)):
        return spec.eps
    if isinstance(spec, ArmaFilter):
        return _base_eps(spec.inner)
    if isinstance(spec, IidGaussian):
        return EpsSpec("gaussian", spec.sigma)
    if isinstance(spec, IidStudentT):
        return EpsSpec("student_t", spec.scale, spec.nu)
    if isinstance(spec, Const):
        return _GAUSS
    raise TypeError("unknown innovation spec %r" % (spec,))


def _path_from_eps(spec: InnovationSpec, eps: np.ndarray) -> np.ndarray:
    """Output path driven by an explicit shock array (zero initial state)."""
    if isinstance(spec, (IidGaussian, IidStudentT)):
        return eps
    if isinstance(spec, Const):
        return np.full(eps.size, spec.value)
    if isinstance(spec, LinearMA):
        return np.convolve(eps, np.asarray(spec.b), mode="full")[: eps.size]
    if isinstance(spec, Garch11):
        return _kernels.garch11_path(eps / spec.eps.sd, spec.omega, spec.alpha, spec.beta)
    if isinstance(spec, Bilinear):
        return _kernels.bilinear_path(eps, spec.a, spec.b)
    if isinstance(spec, ThresholdAr):
        return _kernels.threshold_ar_path(eps, spec.a_pos, spec.a_neg)
    if isinstance(spec, ArmaFilter):
        return _apply_arma(spec, _path_from_eps(spec.inner, eps))
    raise TypeError("unknown innovation spec %r" % (spec,))


def _coupled_warmup(spec: InnovationSpec) -> int:
    if isinstance(spec, LinearMA):
        return len(spec.b) - 1
    if isinstance(spec, ArmaFilter):
        return spec.burn_in + _coupled_warmup(spec.inner)
    return spec.burn_in


def coupled_dependence(
    spec: InnovationSpec, k_max: int, q: float, reps: int, seed: int
) -> DependenceResult:
    """Monte Carlo estimate of D_q(k) = || u_k - u_k* ||_q for k = 0..k_max.

    u* is the same path with the time-0 shock replaced by an independent
    copy.  Geometric-moment-contracting recursions show log D_q(k) falling
    linearly in k.
    """
    if isinstance(spec, HeavyTailEta):
        raise ValueError("HeavyTailEta is only valid in the moment-boundary demo")
    if reps < 100:
        raise ValueError("need reps >= 100, got %d" % reps)
    if k_max < 0:
        raise ValueError("need k_max >= 0")
    eps_spec = _base_eps(spec)
    warm = _coupled_warmup(spec)
    total = warm + k_max + 1
    moments = np.zeros((reps, k_max + 1))
    for r in range(reps):
        rng = child_rng(seed, r)
        eps = eps_spec.draw(rng, total)
        eps0_prime = eps_spec.draw(rng, 1)[0]
        base = _path_from_eps(spec, eps)[warm:]
        eps_star = eps.copy()
        eps_star[warm] = eps0_prime
        coupled = _path_from_eps(spec, eps_star)[warm:]
        moments[r] = np.abs(base - coupled) ** q
    mean_q = moments.mean(axis=0)
    se_q = moments.std(axis=0, ddof=1) / math.sqrt(reps)
    delta = mean_q ** (1.0 / q)
    with np.errstate(divide="ignore", invalid="ignore"):
        se = np.where(mean_q > 0, se_q * delta / (q * np.maximum(mean_q, 1e-300)), 0.0)
    return DependenceResult(
        k=np.arange(k_max + 1),
        delta=delta,
        se=se,
        q=q,
        q_exceeds_declared=q > spec.q_moment,
    )


def lrv_innovations(u, l: int) -> float:
    """Bartlett long-run variance of the innovation series (estimates ||zeta_0||^2)."""
    from .memtests import bartlett_lrv

    return bartlett_lrv(u, l).w2


# ---------------------------------------------------------------------------
# heavy-tailed marginal for the moment-boundary demo

def _heavy_tail_params(q0: float, v0: float) -> "tuple[float, float, float]":
    """(c, s0, k_body): tail scale, tail mass, uniform body density.

    Survival of G = |eta|^q0 is c g^-1 (log g)^-2 on [v0, inf); both the cdf
    and the density are continuous at v0, which pins c = v0 L^2 / (2 + 2/L)
    with L = log v0.  The body is uniform on [0, v0].
    """
    big_l = math.log(v0)
    c = v0 * big_l**2 / (2.0 + 2.0 / big_l)
    s0 = c / (v0 * big_l**2)
    k_body = (1.0 - s0) / v0
    return c, s0, k_body


def heavy_tail_survival(q0: float, v0: float, g) -> np.ndarray:
    """P(|eta|^q0 >= g) for the constructed marginal (exact, both branches)."""
    c, s0, k_body = _heavy_tail_params(q0, v0)
    g = np.asarray(g, dtype=float)
    out = np.where(g < v0, 1.0 - k_body * np.maximum(g, 0.0), c / (np.maximum(g, v0) * np.log(np.maximum(g, v0)) ** 2))
    return np.where(g <= 0, 1.0, out)


def gen_heavy_tail_eta(q0: float, v0: float, n: int, seed: int) -> np.ndarray:
    """iid symmetric draws whose q0-th power has the log-corrected tail.

    Tail draws invert the survival function by bisection in x = log g
    (64 halvings of the bracket, well below 1e-12).
    """
    spec = HeavyTailEta(q0, v0)  # validates q0, v0
    c, s0, k_body = _heavy_tail_params(spec.q0, spec.v0)
    rng = child_rng(seed)
    sv = 1.0 - rng.random(n)  # survival levels in (0, 1]
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    g = (1.0 - sv) / k_body
    tail = sv < s0
    if np.any(tail):
        rhs = np.log(c / sv[tail])
        lo = np.full(rhs.size, math.log(spec.v0))
        hi = rhs.copy()  # x + 2 log x is above rhs there
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = mid + 2.0 * np.log(mid) < rhs
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        g[tail] = np.exp(0.5 * (lo + hi))
    return signs * g ** (1.0 / spec.q0)


# ---------------------------------------------------------------------------
# config (de)serialization

_VARIANT_NAMES = {
    IidGaussian: "iid_gauss",
    IidStudentT: "iid_student_t",
    LinearMA: "linear_ma",
    Garch11: "garch11",
    Bilinear: "bilinear",
    ThresholdAr: "threshold_ar",
    ArmaFilter: "arma_filter",
    HeavyTailEta: "heavy_tail_eta",
    Const: "const",
}


def _eps_to_dict(eps: EpsSpec) -> dict:
    out = {"kind": eps.kind, "sigma": eps.sigma}
    if eps.nu is not None:
        out["nu"] = eps.nu
    return out


def _eps_from_dict(data: dict) -> EpsSpec:
    return EpsSpec(data.get("kind", "gaussian"), data.get("sigma", 1.0), data.get("nu"))


def spec_to_dict(spec: InnovationSpec) -> dict:
    out = {"variant": _VARIANT_NAMES[type(spec)], "q_moment": spec.q_moment, "burn_in": spec.burn_in}
    if isinstance(spec, IidGaussian):
        out["sigma"] = spec.sigma
    elif isinstance(spec, IidStudentT):
        out.update(nu=spec.nu, scale=spec.scale)
    elif isinstance(spec, LinearMA):
        out.update(b=list(spec.b), eps=_eps_to_dict(spec.eps))
    elif isinstance(spec, Garch11):
        out.update(omega=spec.omega, alpha=spec.alpha, beta=spec.beta, eps=_eps_to_dict(spec.eps))
    elif isinstance(spec, Bilinear):
        out.update(a=spec.a, b=spec.b, eps=_eps_to_dict(spec.eps))
    elif isinstance(spec, ThresholdAr):
        out.update(a_pos=spec.a_pos, a_neg=spec.a_neg, eps=_eps_to_dict(spec.eps))
    elif isinstance(spec, ArmaFilter):
        out.update(ar=list(spec.ar), ma=list(spec.ma), inner=spec_to_dict(spec.inner))
    elif isinstance(spec, HeavyTailEta):
        out.update(q0=spec.q0, v0=spec.v0)
    elif isinstance(spec, Const):
        out["value"] = spec.value
    if out["q_moment"] == math.inf:
        out["q_moment"] = "inf"
    return out


def spec_from_dict(data: dict) -> InnovationSpec:
    data = dict(data)
    variant = data.pop("variant", None)
    if variant is None:
        raise ValueError("innovation spec needs a 'variant' key")
    if data.get("q_moment") == "inf":
        data["q_moment"] = math.inf
    common = {k: data[k] for k in ("q_moment", "burn_in") if k in data}
    if variant == "iid_gauss":
        return IidGaussian(sigma=data.get("sigma", 1.0), **common)
    if variant == "iid_student_t":
        return IidStudentT(nu=data.get("nu", 5.0), scale=data.get("scale", 1.0), **common)
    if variant == "linear_ma":
        return LinearMA(b=tuple(data.get("b", (1.0,))), eps=_eps_from_dict(data.get("eps", {})), **common)
    if variant == "garch11":
        return Garch11(
            omega=data.get("omega", 0.1),
            alpha=data.get("alpha", 0.1),
            beta=data.get("beta", 0.8),
            eps=_eps_from_dict(data.get("eps", {})),
            **common,
        )
    if variant == "bilinear":
        return Bilinear(a=data.get("a", 0.3), b=data.get("b", 0.3), eps=_eps_from_dict(data.get("eps", {})), **common)
    if variant == "threshold_ar":
        return ThresholdAr(
            a_pos=data.get("a_pos", 0.4),
            a_neg=data.get("a_neg", -0.3),
            eps=_eps_from_dict(data.get("eps", {})),
            **common,
        )
    if variant == "arma_filter":
        return ArmaFilter(
            ar=tuple(data.get("ar", ())),
            ma=tuple(data.get("ma", ())),
            inner=spec_from_dict(data.get("inner", {"variant": "iid_gauss"})),
            **common,
        )
    if variant == "heavy_tail_eta":
        return HeavyTailEta(q0=data.get("q0", 4.0), v0=data.get("v0", math.e**2), **common)
    if variant == "const":
        return Const(value=data.get("value", 1.0))
    raise ValueError("unknown innovation variant %r" % (variant,))
