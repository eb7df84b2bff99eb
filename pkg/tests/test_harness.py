import math

import numpy as np
import pytest

from langevin_iact.harness import cli, experiments as ex
from langevin_iact.harness.config import ExperimentConfig, load_config, parse_basis, parse_pairs
from langevin_iact.harness.tables import Table, read_csv, to_csv, write_csv
from langevin_iact.preobs import Indicators, Monomials, PhaseHermite


def test_config_file_parsing(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text(
        "# comment\nexperiment = sweep\nmodel = lema\ngamma_grid = 0.5, 1, 2\n"
        "n_steps = 1e4\nno_noise = yes\nbasis = monomials:degree=3\n"
    )
    cfg = load_config(path)
    assert cfg.gamma_grid == (0.5, 1.0, 2.0)
    assert cfg.n_steps == 10_000 and cfg.no_noise
    with pytest.raises(ValueError):
        parse_pairs(["bogus = 1"])
    with pytest.raises(ValueError):
        parse_pairs(["no equals sign"])


def test_grid_helpers():
    g = parse_pairs(["gamma_grid = step:0.05:0.2:0.01"])["gamma_grid"]
    assert len(g) == 16 and g[-1] == pytest.approx(0.2)
    g = parse_pairs(["gamma_grid = geom:0.2:5:25"])["gamma_grid"]
    assert len(g) == 25 and g[0] == pytest.approx(0.2) and g[-1] == pytest.approx(5.0)


def test_config_invariants():
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="sweep", gamma_grid=())
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="sanity", realizations=0)
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="nope")


def test_parse_basis():
    assert parse_basis("monomials:dim=2,degree=2") == Monomials(2, 2)
    assert parse_basis("phase-hermite:k=2") == PhaseHermite(2)
    assert parse_basis("indicators:members=A") == Indicators("three-gauss", ("A",))
    with pytest.raises(ValueError):
        parse_basis("splines")


def test_csv_roundtrip(tmp_path):
    t = Table("x", ("a", "b"), [(1, 0.5), (2, math.nan)], {"seed": 3, "grid": (1.0, 2.0), "tag": 'q"uote'})
    text = to_csv(t)
    assert text.startswith("# seed=3\n# grid=1.0;2.0\n")
    back = read_csv(write_csv(tmp_path / "x.csv", t))
    assert back.header == ("a", "b")
    assert back.rows == [("1", "0.5"), ("2", "nan")]
    assert back.meta["seed"] == "3"


def small_sanity(**kw):
    return ex.sanity_config(realizations=4, n_ladder=(2**12, 2**13), burn_in=1000, **kw)


def test_sanity_requires_two_realizations():
    with pytest.raises(ValueError):
        ex.run_sanity(small_sanity().with_(realizations=1))


def test_sanity_small_and_pool_independent():
    a = ex.run_sanity(small_sanity(threads=1))
    b = ex.run_sanity(small_sanity(threads=3))
    assert a.rows == b.rows
    assert [r[0] for r in a.rows] == [4096, 8192]
    assert math.isfinite(a.meta["result.slope"])
    assert a.meta["result.analytic_tau"] == pytest.approx(4.4278, abs=1e-3)


def lema_small(**kw):
    return ex.lema_config(n_steps=20_000, n_sweep=20_000, n_ref=5_000, burn_in=2000, **kw)


def test_single_point_sweep_one_row():
    t = ex.run_gamma_sweep(lema_small(gamma_grid=(1.0,), gamma_star=1.25))
    assert len(t.rows) == 1
    assert t.rows[0][1] == pytest.approx(0.8)


def test_sweep_sorted_and_reproducible():
    cfg = lema_small(gamma_grid=(2.0, 0.5, 1.0), basis="monomials:degree=3")
    a = ex.run_gamma_sweep(cfg)
    b = ex.run_gamma_sweep(cfg.with_(threads=2))
    assert [r[0] for r in a.rows] == [0.5, 1.0, 2.0]
    assert to_csv(a) == to_csv(b).replace("# threads=2", "# threads=1")


def test_sweep_rejects_phase_space_basis():
    with pytest.raises(ValueError):
        ex.run_gamma_sweep(lema_small(gamma_grid=(1.0,), basis="monomials:degree=2,phase=1", gamma_star=1.0))


def test_sweep_marks_failures():
    # dt far beyond the stability limit of LeMa blows up every run
    t = ex.run_gamma_sweep(lema_small(gamma_grid=(1.0,), gamma_star=1.0, dt=3.0))
    assert t.rows[0][-1].startswith("error:")


def test_basis_comparison_rows():
    t = ex.run_basis_comparison(lema_small(gamma=1.3))
    assert [r[0] for r in t.rows] == ["cubic", "quintic", "septic"]
    taus = t.column("tau_max")
    assert all(np.isfinite(taus)) and all(math.isfinite(v) for v in t.column("tau_max_half"))


def test_basis_comparison_rejects_mixed():
    cfg = lema_small(bases=("a@monomials:degree=1", "b@phase-hermite:k=1"))
    with pytest.raises(ValueError):
        ex.run_basis_comparison(cfg)


def test_analytic_table():
    T, tau = ex.run_analytic_table(ExperimentConfig(experiment="analytic", gamma_grid=(0.5, 1.0, 2.0, 4.0)))
    rows = {(r[0], r[1]): r[2] for r in T.rows}
    assert rows[(1, 2.0)] == pytest.approx(4.0)
    assert rows[(2, 1.0)] == pytest.approx(2.0)
    for g in (0.5, 1.0, 2.0, 4.0):
        top = max(rows[(1, g)], rows[(2, g)])
        assert rows[(3, g)] <= top and rows[(4, g)] <= top
    assert len(tau.rows) == 4 * 4 * 2


def test_cli_analytic(tmp_path, capsys):
    assert cli.main(["analytic", "--out", str(tmp_path), "--seed", "9"]) == 0
    t = read_csv(tmp_path / "analytic_T.csv")
    assert t.meta["seed"] == "9" and t.meta["code_version"]
    assert t.header == ("k", "gamma", "T_k", "status")


def test_cli_sanity_with_config(tmp_path):
    conf = tmp_path / "s.cfg"
    conf.write_text("realizations = 3\nn_ladder = 4096, 8192\nburn_in = 500\n")
    assert cli.main(["sanity", "--config", str(conf), "--out", str(tmp_path), "--threads", "2"]) == 0
    t = read_csv(tmp_path / "sanity.csv")
    assert [r[0] for r in t.rows] == ["4096", "8192"]
    assert t.meta["threads"] == "2"


def test_cli_bad_config(tmp_path, capsys):
    conf = tmp_path / "bad.cfg"
    conf.write_text("unknown_key = 1\n")
    assert cli.main(["sanity", "--config", str(conf), "--out", str(tmp_path)]) == 2


def test_cli_no_noise_and_set(tmp_path):
    args = ["sweep", "--out", str(tmp_path), "--no-noise", "--set", "n_sweep=3000", "--set", "gamma_grid=1.0",
            "--set", "gamma_star=1.0", "--set", "burn_in=100", "--set", "basis=monomials:degree=1"]
    assert cli.main(args) == 0
    t = read_csv(tmp_path / "sweep.csv")
    assert t.meta["no_noise"] == "true"
    assert len(t.rows) == 1
