"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.  The heavy Monte Carlo configurations are shared through
session fixtures so the determinism criterion can re-run them bit-for-bit.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from fraclab import fbm, fracops, harness, memtests
from fraclab.fracops import FracSpec
from fraclab.harness import ExperimentConfig, derive_seed, report_json_bytes
from fraclab.innovations import Garch11, HeavyTailEta, IidGaussian, gen

SEED = 20250810
D_GRID = (-0.45, -0.3, -0.1, 0.1, 0.25, 0.4)


def criterion(num, description, ok, elapsed, budget=None, detail=""):
    status = "PASS" if ok else "FAIL"
    extra = " %s" % detail if detail else ""
    print("\n[%s] criterion %2d: %s (%.1fs)%s" % (status, num, description, elapsed, extra))
    assert ok, "criterion %d failed: %s%s" % (num, description, extra)
    if budget is not None:
        assert elapsed < budget, "criterion %d exceeded its %.0fs budget (%.1fs)" % (
            num,
            budget,
            elapsed,
        )


# ---------------------------------------------------------------------------
# shared heavy fixtures

@pytest.fixture(scope="session")
def tables_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("acceptance_tables"))


def _invariance_config(d, kind, innovation=None, reps=2000):
    checks = ("terminal_variance", "terminal_ks_normal") if d == 0.0 else ("terminal_variance",)
    return ExperimentConfig(
        experiment="invariance_principle",
        innovation=innovation if innovation is not None else IidGaussian(),
        frac=FracSpec(d, 0, kind),
        n_list=(4096,),
        reps=reps,
        seed=SEED,
        functionals=("terminal",),
        checks=checks,
    )


@pytest.fixture(scope="session")
def terminal_law_runs():
    """Criterion 4 reports: d in {-0.25, 0, 0.25} for both process types."""
    t0 = time.monotonic()
    out = {}
    for d in (-0.25, 0.0, 0.25):
        for kind in ("type1", "type2"):
            cfg = _invariance_config(d, kind)
            out[(d, kind)] = (cfg, harness.run_invariance(cfg))
    return out, time.monotonic() - t0


@pytest.fixture(scope="session")
def lrv_scaling_run():
    """Criterion 6 report: d = 0.2, paired seeds across the n ladder."""
    cfg = ExperimentConfig(
        experiment="lrv_scaling",
        innovation=IidGaussian(),
        frac=FracSpec(0.2, 0, "type1"),
        n_list=(2048, 8192, 16384),
        reps=500,
        seed=SEED + 1,
        checks=("lrv_median", "lrv_error_trend"),
        check_n=8192,
    )
    t0 = time.monotonic()
    report = harness.run_lrv_scaling(cfg)
    return cfg, report, time.monotonic() - t0


# ---------------------------------------------------------------------------
# criteria

def test_criterion_01_coefficient_oracle():
    t0 = time.monotonic()
    worst = 0.0
    for d in D_GRID:
        m = 10**4 + 1
        a = fracops.frac_coeffs(d, m)
        j = np.arange(1, m, dtype=np.longdouble)
        logs = np.cumsum(np.log(np.abs(j - 1.0 + np.longdouble(d))) - np.log(j))
        ref = np.exp(logs)
        if d < 0:
            ref = -ref
        ref = np.asarray(ref, dtype=float)
        worst = max(worst, float(np.max(np.abs(a[1:] - ref) / np.abs(ref))))
    elapsed = time.monotonic() - t0
    criterion(
        1,
        "recursion vs log-Gamma coefficients, j <= 1e4, rel 1e-12",
        worst <= 1e-12,
        elapsed,
        budget=1.0,
        detail="worst rel err %.2e" % worst,
    )


def test_criterion_02_filter_round_trip():
    t0 = time.monotonic()
    worst = 0.0
    rng = np.random.default_rng(SEED)
    for n in (1, 2, 10, 1000):
        u = rng.standard_normal(n)
        scale = np.maximum(np.abs(u), 1e-3)
        for d in D_GRID:
            back = fracops.fractional_difference(fracops.integrate_type2(u, d), d)
            worst = max(worst, float(np.max(np.abs(back - u) / scale)))
    elapsed = time.monotonic() - t0
    criterion(
        2,
        "fractional_difference o integrate_type2 = identity to 1e-10",
        worst <= 1e-10,
        elapsed,
        budget=1.0,
        detail="worst rel err %.2e" % worst,
    )


def test_criterion_03_normalization_constants():
    from test_fbm import brute_force_A

    t0 = time.monotonic()
    ok = abs(fbm.const_A(0.0) - 1.0) <= 1e-8
    details = ["A(0) err %.1e" % abs(fbm.const_A(0.0) - 1.0)]
    for d in (0.25, -0.25):
        diff = abs(fbm.const_A(d) - brute_force_A(d))
        ok = ok and diff <= 1e-6
        details.append("A(%+.2f) dual-oracle diff %.1e" % (d, diff))
    reps = 10**4
    tol = 3.0 * math.sqrt(2.0 / reps)
    for d in (0.25, -0.25):
        v1 = fbm._type1_batch(d, 256, SEED + 2, range(reps))[:, -1].var()
        v2 = fbm._type2_batch(d, 256, SEED + 3, range(reps))[:, -1].var()
        ok = ok and abs(v1 - 1.0) <= tol and abs(v2 - 1.0) <= tol
        details.append("Var(B(1))=%.3f Var(W(1))=%.3f at d=%+.2f" % (v1, v2, d))
    elapsed = time.monotonic() - t0
    criterion(3, "A(d) dual oracle and unit path variances", ok, elapsed, budget=60.0,
              detail="; ".join(details))


def test_criterion_04_terminal_law(terminal_law_runs):
    runs, elapsed = terminal_law_runs
    ok = True
    details = []
    for (d, kind), (_cfg, report) in sorted(runs.items()):
        summary = report.per_n[0]
        var = summary["terminal_variance"]
        ok = ok and abs(var - 1.0) <= 0.10
        details.append("%s d=%+.2f var=%.3f" % (kind, d, var))
        if d == 0.0:
            ok = ok and summary["terminal_ks_pvalue"] > 0.01
            details.append("%s d=0 KS p=%.3f" % (kind, summary["terminal_ks_pvalue"]))
    criterion(4, "terminal law: Var within 10%, Gaussian KS at d=0", ok, elapsed,
              budget=300.0, detail="; ".join(details))


def test_criterion_05_garch_innovations():
    t0 = time.monotonic()
    cfg = _invariance_config(0.25, "type1", innovation=Garch11(0.1, 0.1, 0.8))
    report = harness.run_invariance(cfg)
    elapsed = time.monotonic() - t0
    var = report.per_n[0]["terminal_variance"]
    ok = abs(var - 1.0) <= 0.15
    ok = ok and report.targets["zeta_source"] == "analytic"
    ok = ok and abs(report.targets["zeta_norm"] - 1.0) < 1e-12
    criterion(5, "GARCH(0.1,0.1,0.8) terminal variance within 15% (analytic zeta)",
              ok, elapsed, budget=600.0, detail="var=%.3f" % var)


def test_criterion_06_lrv_scaling(lrv_scaling_run):
    cfg, report, elapsed = lrv_scaling_run
    target = report.targets["kappa1_sq"]
    med = {p["n"]: p["median_scaled_w2"] for p in report.per_n}
    err = {p["n"]: p["median_rel_err"] for p in report.per_n}
    ok = abs(med[8192] / target - 1.0) <= 0.20 and err[16384] <= err[2048]
    criterion(
        6,
        "l^-2d w2 median within 20% of kappa1^2(0.2); error shrinks with n",
        ok,
        elapsed,
        budget=600.0,
        detail="median(8192)=%.3f target=%.3f; rel err 2048=%.3f ->16384=%.3f"
        % (med[8192], target, err[2048], err[16384]),
    )


def test_criterion_07_kpss_mean(tmp_path):
    t0 = time.monotonic()
    cfg = ExperimentConfig(
        experiment="stat_convergence",
        innovation=IidGaussian(),
        frac=FracSpec(0.0, 0, "type1"),
        n_list=(8192,),
        reps=500,
        seed=SEED + 4,
        checks=("kpss_mean",),
        # tables only feed the KS summary columns here; keep them small
        tables_dir=str(tmp_path),
        table_reps=2000,
        table_m=512,
    )
    report = harness.run_stat_convergence(cfg)
    elapsed = time.monotonic() - t0
    mean = report.per_n[0]["kpss_mean"]
    ok = abs(mean / (1.0 / 6.0) - 1.0) <= 0.15
    criterion(7, "normalized KPSS mean within 15% of 1/6 at n=8192", ok, elapsed,
              budget=300.0, detail="mean=%.4f" % mean)


def test_criterion_08_size_and_power(tables_dir):
    t0 = time.monotonic()
    n, reps = 4096, 500
    rate = 1.0 / 6.0  # bandwidth knob: l = 4; both tests keep size and reach 80% power
    l = memtests.default_bandwidth(n, rate)
    tabs = {
        "rs": fbm.ensure_table(tables_dir, "range_of_bridge", "type1", 0.0, 1024, 10_000,
                               fbm.TABLE_SEED_DEFAULT, build_missing=True),
        "kpss": fbm.ensure_table(tables_dir, "int_sq_bridge", "type1", 0.0, 1024, 10_000,
                                 fbm.TABLE_SEED_DEFAULT, build_missing=True),
    }
    stats = {"rs": memtests.rs_statistic, "kpss": memtests.kpss_statistic}

    def rejection_rate(alternative_d):
        hits = {"rs": 0, "kpss": 0}
        for r in range(reps):
            if alternative_d == 0.0:
                x = gen(IidGaussian(), n, derive_seed(SEED + 5, r))
            else:
                x = fracops.integrate_type1(
                    IidGaussian(), alternative_d, n, seed=derive_seed(SEED + 6, r), burn_in=32 * n
                ).values
            for name, fn in stats.items():
                norm = memtests.normalize_statistic(name, fn(x, l), n, l, 0.0)
                if fbm.pvalue_from_table(tabs[name], norm) <= 0.05:
                    hits[name] += 1
        return {k: v / reps for k, v in hits.items()}

    size = rejection_rate(0.0)
    power = rejection_rate(0.25)
    elapsed = time.monotonic() - t0
    ok = all(0.02 <= size[k] <= 0.09 for k in size) and all(power[k] > 0.80 for k in power)
    criterion(
        8,
        "size in [2%%, 9%%] and power > 80%% at n=4096, l=%d" % l,
        ok,
        elapsed,
        budget=600.0,
        detail="size rs=%.3f kpss=%.3f; power rs=%.3f kpss=%.3f"
        % (size["rs"], size["kpss"], power["rs"], power["kpss"]),
    )


def test_criterion_09_growth_exponents():
    t0 = time.monotonic()
    cfg = ExperimentConfig(
        experiment="higher_order_scaling",
        innovation=IidGaussian(),
        frac=FracSpec(0.25, 1, "type1"),
        n_list=(512, 1024, 2048, 4096, 8192, 16384),
        reps=200,
        seed=SEED + 7,
    )
    report = harness.run_higher_order_scaling(cfg)
    elapsed = time.monotonic() - t0
    slopes = report.targets["slopes"]
    checks = (
        ("level_abs", 0.75, 0.10),
        ("sum_abs", 1.75, 0.15),
        ("sum_sq", 2.50, 0.15),
    )
    ok = all(abs(slopes[name]["slope"] - target) <= tol for name, target, tol in checks)
    criterion(
        9,
        "log-log slopes match d+p-1/2, d+p+1/2, 2(d+p)",
        ok,
        elapsed,
        budget=600.0,
        detail="; ".join("%s=%.3f (target %.2f)" % (n, slopes[n]["slope"], t) for n, t, _ in checks),
    )


def test_criterion_10_moment_boundary_demo():
    t0 = time.monotonic()
    base = dict(
        experiment="moment_boundary_demo",
        frac=FracSpec(-0.25, 0, "type1"),
        n_list=(2**8, 2**12, 2**18),
        reps=200,
        seed=SEED + 8,
    )
    heavy = harness.run_moment_boundary_demo(
        ExperimentConfig(innovation=HeavyTailEta(4.0, math.e**2), **base)
    )
    gauss = harness.run_moment_boundary_demo(
        ExperimentConfig(innovation=IidGaussian(), **base)
    )
    elapsed = time.monotonic() - t0
    med_h = [p["median_max_ratio"] for p in heavy.per_n]
    med_g = [p["median_max_ratio"] for p in gauss.per_n]
    ok = all(b > a for a, b in zip(med_h, med_h[1:])) and all(b < a for a, b in zip(med_g, med_g[1:]))
    criterion(
        10,
        "sigma_n^-1 max|eta| medians: rising (heavy tail) vs falling (Gaussian)",
        ok,
        elapsed,
        budget=300.0,
        detail="heavy %s; gaussian %s"
        % (["%.3f" % v for v in med_h], ["%.3f" % v for v in med_g]),
    )


def test_criterion_11_hand_value_suite():
    t0 = time.monotonic()
    checks = [
        ("Q([-1,1], l=0) = 1", memtests.rs_statistic([-1.0, 1.0], 0), 1.0),
        ("Q([1,2,3], l=0) = sqrt(3/2)", memtests.rs_statistic([1.0, 2.0, 3.0], 0), math.sqrt(1.5)),
        ("K([-1,1], l=0) = 1/4", memtests.kpss_statistic([-1.0, 1.0], 0), 0.25),
        ("K([1,2,3], l=0) = 1/3", memtests.kpss_statistic([1.0, 2.0, 3.0], 0), 1.0 / 3.0),
        ("w2([1,-1,1,-1], l=1) = 1/4", memtests.bartlett_lrv([1.0, -1.0, 1.0, -1.0], 1).w2, 0.25),
        ("normalize rs example", memtests.normalize_statistic("rs", 100.0, 4096, 16, 0.25), 0.390625),
    ]
    vec_checks = [
        ("coeffs d=0.4", fracops.frac_coeffs(0.4, 4), [1.0, 0.4, 0.28, 0.224]),
        ("coeffs d=-0.3", fracops.frac_coeffs(-0.3, 3), [1.0, -0.3, -0.105]),
        ("impulse conv", fracops.integrate_type2([1.0, 0.0, 0.0], 0.4), [1.0, 0.4, 0.28]),
        ("step conv", fracops.integrate_type2([1.0, 1.0, 1.0], 0.4), [1.0, 1.4, 1.68]),
        ("inverse filter", fracops.fractional_difference([1.0, 0.4, 0.28], 0.4), [1.0, 0.0, 0.0]),
        ("partial sums", fracops.partial_sums([1.0, 0.4, 0.28]), [1.0, 1.4, 1.68]),
        ("cumsum of impulse", fracops.integrate_higher([1.0, 0.0, 0.0], FracSpec(0.4, 1, "type2")),
         [1.0, 1.4, 1.68]),
    ]
    worst = 0.0
    for _name, got, want in checks:
        worst = max(worst, abs(got - want) / max(abs(want), 1.0))
    for _name, got, want in vec_checks:
        want = np.asarray(want)
        scale = np.maximum(np.abs(want), 1.0)
        worst = max(worst, float(np.max(np.abs(np.asarray(got) - want) / scale)))
    elapsed = time.monotonic() - t0
    criterion(11, "hand-value suite exact to 1e-12", worst <= 1e-12, elapsed, budget=1.0,
              detail="worst err %.2e" % worst)


def test_criterion_12_determinism(terminal_law_runs, lrv_scaling_run):
    runs, _ = terminal_law_runs
    cfg4, report4 = runs[(0.25, "type1")]
    cfg6, report6, _ = lrv_scaling_run
    t0 = time.monotonic()
    rerun4 = harness.run_invariance(dataclasses.replace(cfg4, threads=2))
    rerun6 = harness.run_lrv_scaling(dataclasses.replace(cfg6, threads=2))
    elapsed = time.monotonic() - t0
    same4 = report_json_bytes(rerun4) == report_json_bytes(report4)
    same6 = report_json_bytes(rerun6) == report_json_bytes(report6)
    criterion(
        12,
        "criteria 4 and 6 reports byte-identical across thread counts",
        same4 and same6,
        elapsed,
        detail="invariance %s, lrv %s" % (same4, same6),
    )
