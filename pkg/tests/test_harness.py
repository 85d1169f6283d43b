import json
import math

import numpy as np
import pytest

from fraclab import fbm, harness
from fraclab.fracops import FracSpec
from fraclab.harness import (
    ExperimentConfig,
    ks_distance,
    ks_noise_floor,
    load_config,
    partial_sum_scale,
    report_json_bytes,
    run_experiment,
    write_report,
)
from fraclab.innovations import Const, Garch11, HeavyTailEta, IidGaussian


def small_config(**over):
    base = dict(
        experiment="invariance_principle",
        innovation=IidGaussian(),
        frac=FracSpec(0.25, 0, "type2"),
        n_list=(256,),
        reps=120,
        seed=7,
        checks=("terminal_variance",),
        functionals=("terminal",),
    )
    base.update(over)
    return ExperimentConfig(**base)


class TestKsHelpers:
    def test_identical_samples(self):
        assert ks_distance([1.0, 2.0, 3.0], np.array([1.0, 2.0, 3.0])) == 0.0

    def test_single_point_vs_uniform(self):
        assert ks_distance([0.5], lambda x: np.clip(x, 0.0, 1.0)) == 0.5

    def test_disjoint_supports(self):
        assert ks_distance([1.0, 2.0], np.array([5.0, 6.0])) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_distance([], np.array([1.0]))
        with pytest.raises(ValueError):
            ks_distance([1.0], np.array([]))

    def test_noise_floor_deterministic_and_positive(self):
        rng = np.random.default_rng(0)
        ref = rng.standard_normal(2000)
        f1 = ks_noise_floor(ref, 200, seed=5)
        f2 = ks_noise_floor(ref, 200, seed=5)
        assert f1 == f2 > 0.0
        # floors shrink roughly like 1/sqrt(sample size)
        assert ks_noise_floor(ref, 800, seed=5) < f1


class TestPartialSumScale:
    def test_degenerate_beta_one(self):
        assert partial_sum_scale(1.0, 16, ell="one") == pytest.approx(4.0)

    def test_formula(self):
        beta, n = 1.25, 4096
        expected = abs(fbm.const_A(-0.25) * n**0.25 / (math.log(n) * (1.0 - beta)))
        assert partial_sum_scale(beta, n) == pytest.approx(expected, rel=1e-12)

    def test_ell_one(self):
        beta, n = 0.75, 256
        expected = fbm.const_A(0.25) * n**0.75 / 0.25
        assert partial_sum_scale(beta, n, ell="one") == pytest.approx(expected, rel=1e-12)


class TestConfigValidation:
    def test_reps_floor(self):
        with pytest.raises(ValueError):
            small_config(reps=99)

    def test_n_list_must_increase(self):
        with pytest.raises(ValueError):
            small_config(n_list=(256, 256))
        with pytest.raises(ValueError):
            small_config(n_list=(512, 256))

    def test_unknown_tolerance(self):
        with pytest.raises(ValueError):
            small_config(tolerances={"bogus": 1.0})

    def test_unknown_functional(self):
        with pytest.raises(ValueError):
            small_config(functionals=("median_of_bridge",))

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            small_config(experiment="varprofile")

    def test_echo_excludes_execution_details(self):
        cfg = small_config(threads=4, out_dir="somewhere", tables_dir="elsewhere")
        echo = cfg.echo()
        assert "threads" not in echo
        assert "out_dir" not in echo
        assert "tables_dir" not in echo


class TestConfigFile:
    def test_load_round_trip(self, tmp_path):
        cfg_text = """
experiment = "lrv_scaling"
seed = 5
reps = 150
n_list = [512, 1024]
checks = ["lrv_median"]

[frac]
d = 0.2
kind = "type1"

[model]
variant = "garch11"
omega = 0.1
alpha = 0.1
beta = 0.8

[bandwidth]
rate = 0.3333333333333333

[type1]
burn_pad = 8

[tolerances]
lrv_median_rtol = 0.3
"""
        path = tmp_path / "c.cfg"
        path.write_text(cfg_text)
        cfg = load_config(path)
        assert cfg.experiment == "lrv_scaling"
        assert cfg.innovation == Garch11(0.1, 0.1, 0.8)
        assert cfg.frac == FracSpec(0.2, 0, "type1")
        assert cfg.burn_pad == 8
        assert cfg.tol("lrv_median_rtol") == 0.3
        cfg2 = load_config(path, reps=200, threads=3)
        assert cfg2.reps == 200 and cfg2.threads == 3

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text('experiment = "lrv_scaling"\n')
        with pytest.raises(ValueError):
            load_config(path)

    def test_unknown_keys(self, tmp_path):
        path = tmp_path / "bad2.cfg"
        path.write_text(
            'experiment = "lrv_scaling"\nseed = 1\nreps = 100\nn_list = [64]\nwat = 1\n'
            '[frac]\nd = 0.1\n[model]\nvariant = "iid_gauss"\n'
        )
        with pytest.raises(ValueError):
            load_config(path)


class TestRunners:
    def test_thread_count_does_not_change_bytes(self):
        r1 = run_experiment(small_config(threads=1))
        r2 = run_experiment(small_config(threads=3))
        assert report_json_bytes(r1) == report_json_bytes(r2)

    def test_seed_isolation_under_rep_count(self):
        r_small = run_experiment(small_config(reps=110))
        r_big = run_experiment(small_config(reps=140))
        vals_small = {(n, rep, met): v for n, rep, met, v in r_small.metrics}
        for n, rep, met, v in r_big.metrics:
            if rep < 110:
                assert vals_small[(n, rep, met)] == v

    def test_every_verdict_names_a_tolerance(self, tmp_path):
        cfg = small_config(
            checks=None,
            functionals=("terminal", "int_sq_bridge"),
            tables_dir=str(tmp_path),
            table_m=128,
            table_reps=1500,
        )
        report = run_experiment(cfg)
        assert report.verdicts
        for v in report.verdicts:
            assert v.tolerance_name
            assert math.isfinite(v.observed)

    def test_degenerate_innovation_rejected(self):
        with pytest.raises(ValueError):
            run_experiment(small_config(innovation=Const(1.0)))

    def test_moment_flag_recorded_when_incompatible(self):
        cfg = small_config(
            innovation=Garch11(q_moment=2.0),
            frac=FracSpec(-0.25, 0, "type2"),
            n_list=(128,),
        )
        report = run_experiment(cfg)
        compat = report.targets["moment_compat"]
        assert compat["ok"] is False
        assert compat["q_required"] == pytest.approx(4.0)

    def test_invariance_rejects_p(self):
        with pytest.raises(ValueError):
            run_experiment(small_config(frac=FracSpec(0.25, 1, "type2")))

    def test_lrv_requires_type1(self):
        with pytest.raises(ValueError):
            run_experiment(
                small_config(experiment="lrv_scaling", frac=FracSpec(0.2, 0, "type2"), checks=None)
            )

    def test_higher_order_needs_ladder_and_p(self):
        with pytest.raises(ValueError):
            run_experiment(
                small_config(experiment="higher_order_scaling", frac=FracSpec(0.2, 0, "type2"), checks=None)
            )
        with pytest.raises(ValueError):
            run_experiment(
                small_config(
                    experiment="higher_order_scaling",
                    frac=FracSpec(0.2, 1, "type2"),
                    n_list=(64, 128),
                    checks=None,
                )
            )

    def test_moment_demo_rejects_other_variants(self):
        with pytest.raises(ValueError):
            run_experiment(
                small_config(
                    experiment="moment_boundary_demo",
                    innovation=Garch11(),
                    frac=FracSpec(-0.25, 0, "type1"),
                    n_list=(64, 256),
                    checks=None,
                )
            )

    def test_moment_demo_runs_both_directions(self):
        heavy = small_config(
            experiment="moment_boundary_demo",
            innovation=HeavyTailEta(4.0, math.e**2),
            frac=FracSpec(-0.25, 0, "type1"),
            n_list=(256, 4096, 32768),
            reps=100,
            checks=None,
        )
        rh = run_experiment(heavy)
        assert rh.targets["expected_trend"] == "increasing"
        assert rh.targets["q0_matches"] is True
        gauss = small_config(
            experiment="moment_boundary_demo",
            innovation=IidGaussian(),
            frac=FracSpec(-0.25, 0, "type1"),
            n_list=(256, 4096, 32768),
            reps=100,
            checks=None,
        )
        rg = run_experiment(gauss)
        assert rg.targets["expected_trend"] == "decreasing"

    def test_lrv_scaling_at_zero_order(self):
        # iid series, d = 0: the scaled median is just the consistent LRV estimate
        cfg = small_config(
            experiment="lrv_scaling",
            frac=FracSpec(0.0, 0, "type1"),
            n_list=(8192,),
            reps=200,
            checks=("lrv_median",),
            tolerances={"lrv_median_rtol": 0.10},
        )
        report = run_experiment(cfg)
        assert report.per_n[0]["l"] == 20
        assert abs(report.per_n[0]["median_scaled_w2"] - 1.0) < 0.10
        assert report.all_passed

    def test_stat_convergence_trend_at_quarter_order(self, tmp_path):
        cfg = small_config(
            experiment="stat_convergence",
            frac=FracSpec(0.25, 0, "type1"),
            n_list=(1024, 8192),
            reps=300,
            seed=424242,
            checks=("rs_ks_trend", "kpss_ks_trend"),
            tables_dir=str(tmp_path),
            table_m=1024,
            table_reps=4000,
        )
        cfg.burn_pad = 16
        report = run_experiment(cfg)
        assert report.all_passed, [v.line() for v in report.verdicts]

    def test_higher_order_unit_root_slope(self):
        # d = 0, p = 1: the partial-sum exponent collapses to 3/2
        cfg = small_config(
            experiment="higher_order_scaling",
            frac=FracSpec(0.0, 1, "type1"),
            n_list=(256, 512, 1024, 2048, 4096),
            reps=120,
            checks=("slope_sum",),
        )
        report = run_experiment(cfg)
        slope = report.targets["slopes"]["sum_abs"]["slope"]
        assert abs(slope - 1.5) < 0.1
        assert report.all_passed

    def test_write_report_layout(self, tmp_path):
        report = run_experiment(small_config())
        json_path, csv_path = write_report(report, tmp_path)
        data = json.loads(json_path.read_text())
        assert data["experiment"] == "invariance_principle"
        assert "wall_clock_s" not in json.dumps(data)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "n,rep,metric,value"
        assert len(lines) == 1 + len(report.metrics)
        timing = json.loads((tmp_path / "timing.json").read_text())
        assert timing["wall_clock_s"] >= 0.0
