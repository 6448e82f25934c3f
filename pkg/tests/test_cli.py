import numpy as np
import pytest

from rpswealth import GridMeasure, GridSpec
from rpswealth.cli import main
from rpswealth.config import parse_config
from rpswealth.errors import ConfigError
from rpswealth.io import read_measure_csv, write_measure_csv


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


BASE = """
model.eta = 3
model.h = 0.5
grid.m = 4
grid.K = 60
solver.dt0 = 0.01
solver.t_end = 50
solver.snapshot_every = 20
init.kind = square
init.k0 = 1
"""


class TestConfigParsing:
    def test_defaults_from_empty_file(self, tmp_path):
        cfg = parse_config(write_config(tmp_path / "c.cfg", "# nothing here\n"))
        assert cfg.model.eta == 3.0 and cfg.model.h == 0.5
        assert cfg.grid.m == 32 and cfg.grid.K == 200

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(write_config(tmp_path / "c.cfg", "model.znorp = 3\n"))

    def test_duplicate_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(write_config(tmp_path / "c.cfg", "grid.m = 4\ngrid.m = 8\n"))

    def test_atoms_parsing(self, tmp_path):
        cfg = parse_config(write_config(
            tmp_path / "c.cfg", "init.kind = atoms\ninit.atoms = 0.2:1.0, 1.2:0.5\n"))
        assert cfg.init_atoms == ((0.2, 1.0), (1.2, 0.5))

    def test_grid_h_follows_model_h(self, tmp_path):
        cfg = parse_config(write_config(tmp_path / "c.cfg", "model.h = 0.25\n"))
        assert cfg.grid.h == 0.25

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            parse_config("/nonexistent/path.cfg")


class TestMeasureRoundTrip:
    def test_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        spec = GridSpec(h=0.5, m=4, K=12)
        w = np.zeros(spec.shape)
        idx = rng.choice(w.size, size=9, replace=False)
        w.flat[idx] = rng.normal(size=9) * np.pi
        mu = GridMeasure(spec, w)
        path = tmp_path / "m.csv"
        write_measure_csv(path, mu)
        back = read_measure_csv(path)
        assert back.spec == spec
        np.testing.assert_array_equal(back.w, mu.w)


class TestSimulate:
    def test_writes_trajectory_with_envelope(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", BASE)
        out = tmp_path / "out"
        rc = main(["simulate", "--config", cfg, "--out", str(out)])
        assert rc == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "t,B,theta,tv_dist,v_dist,envelope"
        rows = [l for l in lines if not l.startswith("#")][1:]
        assert len(rows) > 1
        data = np.array([[float(x) for x in r.split(",")] for r in rows])
        v_dist, envelope = data[:, 4], data[:, 5]
        assert np.all(v_dist <= envelope + 1e-12)
        # resolved config is embedded, including the defaulted rate
        joined = "\n".join(l for l in lines if l.startswith("#"))
        assert "model.eta = 3" in joined

    def test_single_row_for_frozen_init(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", BASE.replace("init.k0 = 1", "init.k0 = 0"))
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        rows = [l for l in (out / "trajectory.csv").read_text().splitlines()
                if l and not l.startswith("#")][1:]
        assert len(rows) == 1

    def test_svg_outputs(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", BASE)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--svg"]) == 0
        for name in ("decay.svg", "weight_function.svg"):
            body = (out / name).read_text()
            assert body.lstrip().startswith("<?xml")
            assert "<svg" in body

    def test_exponential_reports_both_tail_values(self, tmp_path):
        text = BASE.replace("init.kind = square", "init.kind = exponential")
        text = text.replace("init.k0 = 1", "init.alpha = 1.0")
        cfg = write_config(tmp_path / "c.cfg", text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        head = (out / "trajectory.csv").read_text()
        assert "exp_mass_above_h_integral" in head
        assert "exp_mass_above_h_complement" in head


class TestLimit:
    def test_square_limit_uniform(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", BASE.replace("init.k0 = 1", "init.k0 = 3"))
        out = tmp_path / "out"
        assert main(["limit", "--config", cfg, "--out", str(out)]) == 0
        mu = read_measure_csv(out / "limit.csv")
        np.testing.assert_allclose(mu.w[:, 0], 0.25)
        assert "wealth_loss" in (out / "limit.csv").read_text()

    def test_atom_limit_and_loss(self, tmp_path):
        text = BASE.replace("init.kind = square", "init.kind = atoms")
        text = text.replace("init.k0 = 1", "init.atoms = 1.2:1.0")  # offset 0.2, level 2
        cfg = write_config(tmp_path / "c.cfg", text)
        out = tmp_path / "out"
        assert main(["limit", "--config", cfg, "--out", str(out)]) == 0
        body = (out / "limit.csv").read_text()
        assert "wealth_loss = 1" in body
        mu = read_measure_csv(out / "limit.csv")
        assert mu.w[1, 0] == 1.0  # offset 0.2 falls in cell j=1 of 4

    def test_exponential_comparison_file(self, tmp_path):
        text = BASE.replace("init.kind = square", "init.kind = exponential")
        text = text.replace("init.k0 = 1", "init.alpha = 1.0")
        cfg = write_config(tmp_path / "c.cfg", text)
        out = tmp_path / "out"
        assert main(["limit", "--config", cfg, "--out", str(out)]) == 0
        rows = [l for l in (out / "limit_comparison.csv").read_text().splitlines()
                if l and not l.startswith("#")][1:]
        assert len(rows) == 4
        errs = [float(r.split(",")[4]) for r in rows]
        assert max(errs) < 1e-6


class TestHarrisCmd:
    def test_tables_both_variants(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", "harris.T_values = 0.5, 1, 2\n")
        out = tmp_path / "out"
        assert main(["harris", "--config", cfg, "--out", str(out)]) == 0
        for variant in ("balanced", "flipped"):
            lines = (out / f"harris_{variant}.csv").read_text().splitlines()
            header = [l for l in lines if not l.startswith("#")][0]
            assert header == "T,gamma_L,K,gamma_H,beta,gamma,C,lambda"
            rows = [l for l in lines if not l.startswith("#")][1:]
            assert len(rows) == 4  # 3 grid times + limiting row
        pc = (out / "harris_balanced.csv").read_text().splitlines()
        last = [l for l in pc if not l.startswith("#")][-1].split(",")
        assert float(last[6]) == pytest.approx(5.5465, abs=5e-5)
        assert float(last[7]) == pytest.approx(0.1202, abs=5e-5)
        at = (out / "harris_flipped.csv").read_text().splitlines()
        last_at = [l for l in at if not l.startswith("#")][-1].split(",")
        assert float(last_at[6]) == pytest.approx(7.0 / 3.0, rel=1e-12)
        mid_at = [l for l in at if not l.startswith("#")][1].split(",")
        assert mid_at[5] == "nan"  # no per-T certificate in that variant


class TestMcCmd:
    def test_deterministic_bytes(self, tmp_path):
        text = BASE + "mc.t_end = 0.5\nmc.n = 300\nmc.replicates = 2\nmc.seed = 11\n"
        text = text.replace("grid.K = 60", "grid.K = 20")
        cfg = write_config(tmp_path / "c.cfg", text)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["mc", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["mc", "--config", cfg, "--out", str(out2)]) == 0
        b1 = (out1 / "mc_report.csv").read_bytes()
        b2 = (out2 / "mc_report.csv").read_bytes()
        assert b1 == b2
        rows = [l for l in b1.decode().splitlines() if l and not l.startswith("#")]
        assert rows[0] == "replicate,t_end,tv_distance"
        assert rows[-2].startswith("mean,") and rows[-1].startswith("stderr,")

    def test_n_flag_overrides(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg",
                           BASE + "mc.t_end = 0.2\nmc.replicates = 2\n")
        out = tmp_path / "out"
        assert main(["mc", "--config", cfg, "--out", str(out), "--n", "50", "--seed", "3"]) == 0
        body = (out / "mc_report.csv").read_text()
        assert "n_agents = 50" in body and "seed = 3" in body


class TestFlatnormCmd:
    def test_norm_table(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", BASE)
        out = tmp_path / "out"
        assert main(["flatnorm", "--config", cfg, "--out", str(out)]) == 0
        rows = dict(
            line.split(",") for line in (out / "norms.csv").read_text().splitlines()
            if line and not line.startswith("#") and not line.startswith("quantity")
        )
        assert float(rows["total_mass"]) == pytest.approx(1.0)
        assert float(rows["mass_above_h"]) == pytest.approx(1.0)
        assert float(rows["norm_tv"]) <= float(rows["norm_v"])
        assert float(rows["flat_V_sum"]) <= float(rows["flat_V_max"]) + 1e-12


class TestExitCodes:
    def test_config_error_is_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.cfg", "grid.m = -3\n")
        assert main(["simulate", "--config", cfg]) == 1
        assert "configuration error" in capsys.readouterr().err

    def test_missing_config_is_one(self):
        assert main(["simulate", "--config", "/no/such/file"]) == 1

    def test_numerical_error_is_two(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path / "c.cfg", BASE)
        from rpswealth import cli as climod
        from rpswealth.errors import NumericalError

        def boom(*a, **k):
            raise NumericalError("synthetic failure", step=17)

        monkeypatch.setattr(climod.dynamics, "solve_nonlinear", boom)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_unwritable_outdir_is_one(self, tmp_path):
        cfg = write_config(tmp_path / "c.cfg", BASE)
        target = tmp_path / "blocked"
        target.write_text("a file, not a directory")
        assert main(["simulate", "--config", cfg, "--out", str(target)]) == 1
