import json
import math

import numpy as np
import pytest
from scipy import special, stats

from sojourn.cli import main
from sojourn.fieldsim import LatticeSpec, fisher_snedecor_field, simulate_vector, stream
from sojourn.harness import (CaseId, ConfigError, ExperimentConfig, case_config, ks_critical,
                             ks_two_sample, normal_qq_data, qq_data, realization_seed,
                             run_experiment, standardize, variance_scaling_report,
                             write_experiment)
from sojourn.hermite import closed_form_cv_f_indicator, enumerate_multiindices
from sojourn.minkowski import excursion_area
from sojourn.reduction import UNIT_SQUARE, ComponentParams, var_krk_asymptote


def test_ks_examples():
    x = np.arange(10.0)
    assert ks_two_sample(x, x) == (0.0, 1.0)
    d, p = ks_two_sample(x, x + 100)
    assert d == 1.0 and p < 1e-3
    with pytest.raises(ValueError):
        ks_two_sample([], x)


def test_ks_matches_scipy():
    rng = stream(3)
    for _ in range(20):
        x, y = rng.normal(size=150), rng.normal(0.2, 1.1, size=90)
        d, p = ks_two_sample(x, y)
        ref = stats.ks_2samp(x, y, method="asymp")
        assert d == pytest.approx(ref.statistic, abs=1e-15)
        assert d == ks_two_sample(y, x)[0]
        # limiting Kolmogorov law at sqrt(n m / (n + m)) D
        assert p == pytest.approx(special.kolmogorov(math.sqrt(150 * 90 / 240) * d), abs=1e-12)


def test_ks_null_rejection_rate():
    rng = stream(4)
    crit = ks_critical(200, 200)
    below = sum(ks_two_sample(rng.normal(size=200), rng.normal(size=200))[0] < crit
                for _ in range(100))
    assert below >= 90


def test_ks_critical():
    assert ks_critical(200, 200) == pytest.approx(1.358 * math.sqrt(0.01))


def test_standardize():
    z = standardize([1.0, 2.0, 3.0, 4.0])
    assert z.mean() == pytest.approx(0.0, abs=1e-15)
    assert z.std(ddof=1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        standardize([2.0, 2.0])


def test_qq_examples():
    x = stream(5).normal(size=300)
    q = qq_data(x, x)
    assert np.array_equal(q[:, 0], q[:, 1])
    q2 = qq_data(x, 2 * x + 1)
    slope = np.polyfit(q2[:, 0], q2[:, 1], 1)[0]
    assert slope == pytest.approx(2.0)
    swapped = qq_data(2 * x + 1, x)
    assert np.array_equal(swapped, q2[:, ::-1])
    assert qq_data(x, x[:50]).shape == (50, 2)
    with pytest.raises(ValueError):
        qq_data([], x)


def test_normal_qq():
    q = normal_qq_data(stream(6).normal(3.0, 2.0, size=2000))
    assert np.corrcoef(q[:, 0], q[:, 1])[0, 1] > 0.995
    assert np.all(np.diff(q[:, 0]) > 0)
    with pytest.warns(RuntimeWarning):
        q = normal_qq_data([1.0, 1.0, 1.0])
    assert np.all(q[:, 1] == 0.0)


def test_realization_seed():
    assert realization_seed(1, 0, 0) == realization_seed(1, 0, 0)
    seeds = {realization_seed(1, k, i) for k in range(4) for i in range(50)}
    assert len(seeds) == 200
    assert all(0 <= s < 2 ** 64 for s in seeds)


def test_case_presets():
    c1 = case_config(1, grid=32, reps=5)
    assert c1.arm_labels == ["b", "a_0.65", "a_0.8", "a_0.9"]
    assert c1.comparisons == (("b", "a_0.65"), ("b", "a_0.8"), ("b", "a_0.9"))
    assert [m.alpha for m in c1.arm("b").components] == [0.65, 0.8, 0.9]
    c3 = case_config("case3", grid=32, reps=5)
    assert c3.arm_labels == ["a", "c"]
    with pytest.raises(ConfigError):
        case_config(CaseId.CUSTOM)


def test_config_validation():
    base = case_config(1, grid=16, reps=4)
    with pytest.raises(ConfigError):
        ExperimentConfig(base.case_id, base.grid, base.arms, n_realizations=1)
    with pytest.raises(ConfigError):
        ExperimentConfig(base.case_id, base.grid, base.arms + base.arms[:1])
    with pytest.raises(ConfigError):
        ExperimentConfig(base.case_id, base.grid, base.arms, comparisons=(("b", "zz"),))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"grid": 16})


def test_config_roundtrip():
    cfg = case_config(2, grid=24, reps=7, seed=5, level=2.0)
    back = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back.to_dict() == cfg.to_dict()
    assert back.arms[0][1] == cfg.arms[0][1]
    assert ExperimentConfig.from_dict(cfg.to_dict(), n_workers=2).n_workers == 2


def test_run_is_deterministic_and_rows_regenerate():
    cfg = case_config(1, grid=32, reps=3, seed=9)
    a, b = run_experiment(cfg), run_experiment(cfg)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.areas, rb.areas)
        assert ra.seeds == rb.seeds
    arm = a[0]
    comps = simulate_vector(cfg.grid, cfg.arm(arm.label), arm.seeds[1])
    s = excursion_area(fisher_snedecor_field(comps, 1), cfg.level)
    assert s.area == arm.areas[1]
    assert arm.fractions[1] == pytest.approx(arm.areas[1] / cfg.grid.window_area)


def test_workers_give_same_answer():
    cfg = case_config(3, grid=32, reps=4, seed=2)
    serial = run_experiment(cfg)
    par = run_experiment(ExperimentConfig.from_dict(cfg.to_dict(), n_workers=2))
    for ra, rb in zip(serial, par):
        assert np.array_equal(ra.areas, rb.areas)


def test_embedding_failure_is_reported():
    cfg = ExperimentConfig.from_dict(case_config(3, grid=32, reps=2).to_dict(), method="circulant")
    res = {r.label: r for r in run_experiment(cfg)}
    assert res["c"].failures == 2 and res["c"].areas.size == 0
    assert res["a"].failures == 0 and res["a"].areas.size == 2


def test_write_experiment(tmp_path):
    cfg = case_config(1, grid=16, reps=6, seed=1)
    ks = write_experiment(cfg, run_experiment(cfg), tmp_path)
    assert len(ks) == 3
    arms = (tmp_path / "arms.csv").read_text().splitlines()
    assert arms[0] == "arm,seed,area,fraction"
    assert len(arms) == 1 + 4 * 6
    ks_lines = (tmp_path / "ks.csv").read_text().splitlines()
    assert ks_lines[0].startswith("arm_x,arm_y,statistic,p")
    assert (tmp_path / "qq_b_a_0.65.csv").exists()
    assert json.loads((tmp_path / "config.echo").read_text()) == cfg.to_dict()


def test_scaling_report_small():
    cfg = case_config(1, grid=32, reps=8, seed=3)
    rows = variance_scaling_report(cfg, [8, 16, 32], n_boot=50)
    assert [r.r for r in rows] == [8, 16, 32]
    for r in rows:
        assert r.ratio == pytest.approx(r.var_krk2 / r.var_sojourn)
        assert -1 <= r.correlation <= 1
    # the analytic column is the rank-2 asymptote for a square of side r dx
    params = ComponentParams((0.65, 0.8, 0.9))
    coeffs = {v: closed_form_cv_f_indicator(v, 1.0, 1, 3) for v in enumerate_multiindices(3, 2)}
    for r in rows:
        assert r.analytic == pytest.approx(var_krk_asymptote(params, UNIT_SQUARE, 2, coeffs, r.r))
    # dominated by the alpha = 0.65 term, so growth is slightly below 2^(4 - 1.3)
    assert 2 ** 2.3 < rows[2].analytic / rows[1].analytic < 2 ** 2.7
    with pytest.raises(ConfigError):
        variance_scaling_report(cfg, [8, 16])
    with pytest.raises(ConfigError):
        variance_scaling_report(cfg, [8, 16, 64])


def test_scaling_report_bessel_has_no_asymptote():
    rows = variance_scaling_report(case_config(3, grid=16, reps=4), [4, 8, 16], arm="c", n_boot=10)
    assert all(math.isnan(r.analytic) for r in rows)


# ----------------------------------------------------------------------------
# command line
# ----------------------------------------------------------------------------

def test_cli_simulate_and_excursion(tmp_path, capsys):
    out = tmp_path / "f.bin"
    assert main(["simulate", "--model", "kind=cauchy alpha=0.65", "--model", "kind=cauchy alpha=0.8",
                 "--model", "kind=cauchy alpha=0.9", "--grid", "32", "--seed", "4",
                 "--out", str(out), "--pgm", str(tmp_path / "m.pgm")]) == 0
    assert out.exists() and (tmp_path / "m.pgm").exists()
    summary = tmp_path / "s.csv"
    for _ in range(2):
        assert main(["excursion", "--field", str(out), "--level", "1", "--summary", str(summary),
                     "--csv", str(tmp_path / "m.csv")]) == 0
    lines = summary.read_text().splitlines()
    assert lines[0] == "seed,r,a,area,fraction,clipped_cells"
    assert len(lines) == 3 and lines[1] == lines[2]
    assert lines[1].startswith("4,32.0,1.0,")


def test_cli_hermite(tmp_path, capsys):
    out = tmp_path / "h.csv"
    assert main(["hermite", "--kappa", "2", "--samples", "20000", "--out", str(out)]) == 0
    assert out.read_text().startswith("k1,k2,k3,estimate")
    assert "hermite_rank" in capsys.readouterr().out


def test_cli_lemmas(capsys):
    assert main(["lemmas", "--lmax", "4"]) == 0
    text = capsys.readouterr().out
    assert "lemma2 k=(2, 0, 0)" in text and "hypothesis_failed" not in text
    assert main(["lemmas", "--alphas", "0.1", "0.5", "0.9", "--lmax", "4"]) == 0
    assert "hypothesis_failed" in capsys.readouterr().out


def test_cli_experiment(tmp_path, capsys):
    assert main(["experiment", "--case", "1", "--grid", "16", "--reps", "4", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "ks.csv").exists()
    cfg = case_config(3, grid=16, reps=3).to_dict()
    cfg["method"] = "circulant"
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["experiment", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == 3
    with pytest.raises(SystemExit) as info:
        main(["experiment", "--case", "7"])
    assert info.value.code == 3
    assert main(["experiment", "--out", str(tmp_path)]) == 3
    assert main(["simulate", "--model", "kind=nope", "--out", str(tmp_path / "x")]) == 3
    assert main(["excursion", "--field", str(tmp_path / "missing.bin")]) == 3
    assert main(["simulate", "--model", "kind=bessel nu=0", "--method", "circulant", "--grid", "64",
                 "--out", str(tmp_path / "b.bin")]) == 2
