import math
import textwrap

import pytest
import yaml

import nullsheet as ns
from nullsheet.cli import main
from nullsheet.config import apply_env_overrides, load_config, parse_config


def write_config(tmp_path, name="run.yaml", **overrides):
    base = {
        "spacetime": {"type": "schwarzschild", "mass": 1.0},
        "initial_data": {
            "phi": ["0", "10", "pi/2 + 0.3*sin(vartheta)", "vartheta"],
            "psi": ["1.25", "1", "0", "0"],
            "theta_range": [0.0, 2 * math.pi],
            "samples": 16,
            "periodic": True,
        },
        "solver": {"t_end": 10.0, "rel_tol": 1e-10, "abs_tol": 1e-12},
        "output": {
            "format": "csv",
            "path": str(tmp_path / "surface.csv"),
            "t_samples": 6,
        },
        "oracle": {
            "example": 1,
            "case": "auto",
            "params": {
                "r0": 10.0,
                "r1": 1.0,
                "tau0": 0.0,
                "alpha0": "pi/2 + 0.3*sin(vartheta)",
                "sign": 1,
            },
        },
        "compare": {"tol": 1e-6},
        "seed": 0,
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and key in base:
            base[key].update(value)
        else:
            base[key] = value
    path = tmp_path / name
    path.write_text(yaml.safe_dump(base))
    return path


class TestConfigSchema:
    def test_missing_mass_path_in_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(
            textwrap.dedent(
                """
                spacetime: {type: schwarzschild}
                initial_data:
                  phi: ["0", "10", "pi/2", "vartheta"]
                  psi: ["1.25", "1", "0", "0"]
                """
            )
        )
        with pytest.raises(ns.ConfigError) as err:
            load_config(path)
        assert "spacetime.mass" in str(err.value)

    def test_unknown_key_rejected(self):
        with pytest.raises(ns.ConfigError):
            parse_config({"spacetme": {}})

    def test_wrong_phi_arity(self):
        with pytest.raises(ns.ConfigError) as err:
            parse_config(
                {
                    "spacetime": {"type": "schwarzschild", "mass": 1.0},
                    "initial_data": {"phi": ["0", "1"], "psi": ["0", "1"]},
                }
            )
        assert "initial_data.phi" in str(err.value)

    def test_env_overrides(self, tmp_path):
        cfg_path = write_config(tmp_path)
        cfg = load_config(
            cfg_path, environ={"NULLSHEET_SOLVER__REL_TOL": "1e-8"}
        )
        assert cfg.solver.rel_tol == 1e-8

    def test_env_override_nested_creation(self):
        raw = apply_env_overrides(
            {"solver": {}}, environ={"NULLSHEET_OUTPUT__T_SAMPLES": "21"}
        )
        assert raw["output"]["t_samples"] == 21

    def test_expression_tolerated_in_numbers(self):
        cfg = parse_config(
            {
                "spacetime": {"type": "schwarzschild", "mass": 1.0},
                "initial_data": {
                    "phi": ["0", "10", "pi/2", "vartheta"],
                    "psi": ["1.25", "1", "0", "0"],
                    "theta_range": ["0", "2*pi"],
                },
            }
        )
        assert cfg.initial_data.theta_range[1] == pytest.approx(2 * math.pi)


class TestValidateCommand:
    def test_pass(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["validate", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out

    def test_fail_lightlikeness(self, tmp_path):
        cfg = write_config(
            tmp_path, initial_data={"psi": ["1", "0", "0", "0"]}
        )
        assert main(["validate", "--config", str(cfg)]) == 1

    def test_schema_error_exit_2(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("spacetime: {type: schwarzschild}\n")
        assert main(["validate", "--config", str(path)]) == 2


class TestSolveCommand:
    def test_radial_null_run(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["solve", "--config", str(cfg)]) == 0
        rows = ns.import_csv(tmp_path / "surface.csv")
        for row in rows:
            assert row["type"] == "lightlike"
            assert abs(row["r"] - (row["t"] + 10.0)) < 1e-8

    def test_validation_gate_and_force(self, tmp_path):
        cfg = write_config(
            tmp_path, initial_data={"psi": ["1", "0", "0", "0"]},
            solver={"t_end": 1.0},
        )
        assert main(["solve", "--config", str(cfg)]) == 1
        assert main(["solve", "--config", str(cfg), "--force"]) == 0

    def test_threads_match_serial(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["solve", "--config", str(cfg)]) == 0
        serial = (tmp_path / "surface.csv").read_bytes()
        assert main(["solve", "--config", str(cfg), "--threads", "4"]) == 0
        assert (tmp_path / "surface.csv").read_bytes() == serial

    def test_determinism(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["solve", "--config", str(cfg)]) == 0
        first = (tmp_path / "surface.csv").read_bytes()
        assert main(["solve", "--config", str(cfg)]) == 0
        assert (tmp_path / "surface.csv").read_bytes() == first

    def test_dump_characteristics(self, tmp_path):
        cfg = write_config(tmp_path, solver={"t_end": 2.0})
        dump = tmp_path / "chars.csv"
        assert main(
            ["solve", "--config", str(cfg), "--dump-characteristics", str(dump)]
        ) == 0
        lines = dump.read_text().splitlines()
        assert lines[0] == "t,theta,vartheta,lambda,jacobian"
        cells = lines[1].split(",")
        assert len(cells) == 5
        # Lambda = 0 for radial data: theta == vartheta, J == 1
        assert float(cells[1]) == float(cells[2])
        assert float(cells[4]) == 1.0

    def test_minkowski_spherical_cone(self, tmp_path):
        # flat-space cone string: radial null data in spherical coordinates
        cfg = write_config(
            tmp_path,
            spacetime={"type": "minkowski_spherical"},
            initial_data={
                "phi": ["0", "10", "pi/2", "vartheta"],
                "psi": ["1", "1", "0", "0"],
            },
            solver={"t_end": 5.0},
            oracle=None,
        )
        raw = yaml.safe_load(cfg.read_text())
        del raw["spacetime"]["mass"]
        cfg.write_text(yaml.safe_dump(raw))
        assert main(["validate", "--config", str(cfg)]) == 0
        assert main(["solve", "--config", str(cfg)]) == 0
        rows = ns.import_csv(tmp_path / "surface.csv")
        for row in rows:
            assert abs(row["r"] - (row["t"] + 10.0)) < 1e-9
            assert row["type"] == "lightlike"

    def test_json_output(self, tmp_path):
        cfg = write_config(
            tmp_path,
            output={
                "format": "json",
                "path": str(tmp_path / "surface.json"),
                "t_samples": 4,
            },
        )
        assert main(["solve", "--config", str(cfg)]) == 0
        doc = ns.import_json(tmp_path / "surface.json")
        assert len(doc["nodes"]) == 4

    def test_near_horizon_truncation(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            initial_data={
                "phi": ["vartheta", "3", "0.15713484026367722*vartheta", "0"],
                "psi": ["1", "0", "0.15713484026367722", "0"],
                "theta_range": [1.0, 2.0],
                "samples": 8,
                "periodic": False,
            },
            solver={"t_end": 12.0},
            oracle=None,
        )
        assert main(["solve", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "horizon" in out
        rows = ns.import_csv(tmp_path / "surface.csv")
        assert any(r["type"] == "truncated" for r in rows)


class TestCompareCommand:
    def test_example1_pass(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["compare", "--config", str(cfg)]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_wrong_oracle_mass_exit_2(self, tmp_path):
        cfg = write_config(tmp_path)
        raw = yaml.safe_load(cfg.read_text())
        raw["oracle"]["params"]["m"] = 1.05
        cfg.write_text(yaml.safe_dump(raw))
        assert main(["compare", "--config", str(cfg)]) == 2

    def test_wrong_oracle_data_exit_2(self, tmp_path):
        cfg = write_config(tmp_path)
        raw = yaml.safe_load(cfg.read_text())
        raw["oracle"]["params"]["r1"] = 2.0
        cfg.write_text(yaml.safe_dump(raw))
        assert main(["compare", "--config", str(cfg)]) == 2

    def test_missing_oracle_block(self, tmp_path):
        cfg = write_config(tmp_path, oracle=None)
        assert main(["compare", "--config", str(cfg)]) == 2


class TestClassifyCommand:
    def test_photon_sphere_rows(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            initial_data={
                "phi": ["0", "3", "1.0", "vartheta"],
                "psi": ["1", "0", "sqrt(3)/9", "0"],
            },
            oracle=None,
        )
        assert main(["classify", "--config", str(cfg), "--rows", "3"]) == 0
        out = capsys.readouterr().out
        assert "double_root" in out

    def test_radial_data_undefined(self, tmp_path, capsys):
        cfg = write_config(tmp_path, oracle=None)
        assert main(["classify", "--config", str(cfg), "--rows", "2"]) == 0
        assert "psi_2 = 0" in capsys.readouterr().out


class TestShippedConfigs:
    CONFIGS = ("radial_null.yaml", "photon_sphere.yaml", "boosted_circular.yaml")

    @pytest.mark.parametrize("name", CONFIGS)
    def test_validate_and_compare(self, name, tmp_path, monkeypatch):
        import pathlib

        cfg = pathlib.Path(__file__).resolve().parents[1] / "configs" / name
        monkeypatch.chdir(tmp_path)  # configs use relative output paths
        assert main(["validate", "--config", str(cfg)]) == 0
        assert main(["compare", "--config", str(cfg)]) == 0


class TestOracleCommand:
    def test_emits_table(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["oracle", "--config", str(cfg), "--vartheta", "0.5"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "t,tau,r,alpha,beta"
        assert len(lines) == 1 + 6
        first = [float(v) for v in lines[1].split(",")]
        assert first[2] == 10.0

    def test_flag_overrides(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        raw = yaml.safe_load(cfg.read_text())
        raw["oracle"] = {
            "example": 2,
            "case": "auto",
            "params": {"r0": 3.0, "f": "1", "alpha0": "1.0", "sign_alpha": 1},
        }
        cfg.write_text(yaml.safe_dump(raw))
        # forcing an inconsistent case must fail the consistency guard
        assert main(["oracle", "--config", str(cfg), "--case", "III"]) == 2
        assert main(["oracle", "--config", str(cfg), "--case", "I"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert float(lines[1].split(",")[2]) == 3.0
