import json
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
import yaml

from bentguide import cli, io
from bentguide.config import load_config, parse_config, resolve
from bentguide.errors import ConfigError, NumericalError

PRESETS = sorted(p.name for p in resources.files("bentguide.presets").iterdir() if p.name.endswith(".yaml"))


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


PT_MASKED = """
version: 1
profile: {kind: poschl_teller, nu: 1.0, alpha: 0.125, mask: [0.0]}
design: {q1_min: -100, q1_max: 100, step: 0.01}
"""


# io -------------------------------------------------------------------------------------

def test_csv_round_trip_is_exact(tmp_path):
    x = np.array([0.1, 1 / 3, -2.5e-300, 1e300, np.pi])
    p = io.write_csv(tmp_path / "a.csv", ["x", "i"], [x, np.arange(5)])
    header, data = io.read_csv(p)
    assert header == ["x", "i"]
    assert np.array_equal(data[:, 0], x)
    assert p.read_text().splitlines()[2].endswith(",1")


def test_grid_round_trip(tmp_path):
    a = np.arange(12.0).reshape(3, 4) / 7
    p = io.write_grid(tmp_path / "g.bgrid", a, 0.5, 0.25, 3.0)
    assert p.read_bytes().startswith(b"BGRID 1 3 4 0.5 0.25 3\n")
    data, d0, d1, t = io.read_grid(p)
    assert np.array_equal(data, a) and (d0, d1, t) == (0.5, 0.25, 3.0)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        io.read_grid(p)


def test_ppm_heatmap(tmp_path):
    vals = np.array([[0.0, 1.0], [0.5, 2.0]])
    img = io.read_ppm(io.write_ppm(tmp_path / "h.ppm", vals))
    assert img.shape == (2, 2, 3)
    assert tuple(img[0, 0]) == (255, 255, 255)
    assert tuple(img[1, 1]) == (160, 0, 0)


# config ---------------------------------------------------------------------------------

def test_unknown_key_is_rejected_with_line(tmp_path, capsys):
    cfg = write(tmp_path, PT_MASKED + "  bogus_key: 3\n")
    code, _, err = run(["design", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    assert "bogus_key" in err and "line 5" in err and err.startswith("error[config]")


def test_invalid_values_and_version(tmp_path):
    with pytest.raises(ConfigError):
        parse_config("design", "profile: {kind: poschl_teller, nu: 1.0}")
    with pytest.raises(ConfigError):
        parse_config("carpet", "version: 2")
    with pytest.raises(ConfigError):
        parse_config("carpet", "carpet: {eccentricity: 1.5}")
    with pytest.raises(ConfigError):
        parse_config("scatter", "version: 1")
    with pytest.raises(ConfigError):
        parse_config("carpet", "- a list")


@pytest.mark.parametrize("name", PRESETS)
def test_presets_validate_and_round_trip(name):
    text = resources.files("bentguide.presets").joinpath(name).read_text()
    command = {"design": "design", "propagate": "propagate", "compensate": "compensate",
               "carpet": "carpet"}[name.split("_")[-1].split(".")[0]]
    cfg = parse_config(command, text, name)
    again = parse_config(command, yaml.safe_dump(resolve(cfg)))
    assert resolve(again) == resolve(cfg)


def test_missing_config_is_io_error(tmp_path, capsys):
    code, _, err = run(["design", "--config", str(tmp_path / "nope.yaml")], capsys)
    assert code == 4 and err.startswith("error[io]")


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(cfg, out):
        raise NumericalError("non-finite wavefunction", step=7)

    monkeypatch.setitem(cli.COMMANDS, "design", boom)
    code, _, err = run(["design", "--config", write(tmp_path, PT_MASKED), "--out", str(tmp_path / "o")], capsys)
    assert code == 3 and "step 7" in err


# commands -------------------------------------------------------------------------------

def test_design_manifest_and_reproducibility(tmp_path, capsys):
    cfg = write(tmp_path, PT_MASKED)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["design", "--config", cfg, "--out", str(a)], capsys)[0] == 0
    assert run(["design", "--config", cfg, "--out", str(b)], capsys)[0] == 0
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert [o["sha256"] for o in ma["outputs"]] == [o["sha256"] for o in mb["outputs"]]
    for o in ma["outputs"]:
        assert io.sha256_of(a / o["path"]) == o["sha256"]
    assert json.loads((a / "summary.json").read_text())["crossings"] == 0
    assert (a / "intersections.txt").exists() and (a / "validity.json").exists()
    # the resolved config reproduces the run
    resolved = write(tmp_path, yaml.safe_dump(ma["config"]), "resolved.yaml")
    assert run(["design", "--config", resolved, "--out", str(tmp_path / "c")], capsys)[0] == 0
    mc = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert mc["config"] == ma["config"]
    assert [o["sha256"] for o in mc["outputs"]] == [o["sha256"] for o in ma["outputs"]]


def test_design_sukumar_lift(tmp_path, capsys):
    cfg = write(tmp_path, "profile: {kind: sukumar, eta: [1.0, 1.5]}\ndesign: {step: 0.001, lift_torsion: 20}\n")
    assert run(["design", "--config", cfg, "--out", str(tmp_path / "o")], capsys)[0] == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert s["crossings"] >= 1 and s["crossings_lifted"] == 0


def test_output_root_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "root"))
    assert run(["design", "--config", write(tmp_path, PT_MASKED)], capsys)[0] == 0
    assert (tmp_path / "root" / "design" / "manifest.json").exists()


def test_scatter_and_spectrum_alias(tmp_path, capsys):
    cfg = write(tmp_path, "profile: {kind: poschl_teller, nu: 0.5, alpha: 0.125}\n")
    assert run(["scatter", "--config", cfg, "--out", str(tmp_path / "s")], capsys)[0] == 0
    s = json.loads((tmp_path / "s" / "summary.json").read_text())
    assert s["max_dev_analytic"] < 1e-4
    header, data = io.read_csv(tmp_path / "s" / "scattering.csv")
    assert "abs_T_sq_analytic" in header and data.shape[0] == 64
    cfg = write(tmp_path, "profile: {kind: sukumar, eta: [1.0, 1.5]}\nscatter: {dq: 0.01}\n", "s2.yaml")
    assert run(["spectrum", "--config", cfg, "--out", str(tmp_path / "p")], capsys)[0] == 0
    _, spec = io.read_csv(tmp_path / "p" / "spectrum.csv")
    assert np.allclose(spec[:, 1], [-1.125, -0.5], atol=1e-3)


def test_scatter_from_potential_file(tmp_path, capsys):
    q = np.arange(-40, 40.01, 0.05)
    io.write_csv(tmp_path / "v.csv", ["q1", "v"], [q, -0.5 * 2 * 0.25 / np.cosh(0.5 * q) ** 2])
    cfg = write(tmp_path, f"scatter: {{potential_file: {tmp_path / 'v.csv'}}}\n")
    assert run(["scatter", "--config", cfg, "--out", str(tmp_path / "o")], capsys)[0] == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["max_R_sq"] < 1e-8


def test_carpet_ring(tmp_path, capsys):
    cfg = write(tmp_path, "carpet: {shape: ring, n: 128, revivals: 1, n_frames: 9}\n")
    assert run(["carpet", "--config", cfg, "--out", str(tmp_path / "o")], capsys)[0] == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert s["F_revival"] > 0.99
    data, *_ = io.read_grid(tmp_path / "o" / "carpet.bgrid")
    assert data.shape == (9, 128)


def test_compensate_circle_baseline_is_flat(tmp_path, capsys):
    cfg = write(tmp_path, "compensate: {eccentricity: 0.0, n: 64}\n")
    assert run(["compensate", "--config", cfg, "--out", str(tmp_path / "o")], capsys)[0] == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    # residual set by the imaginary-time stopping rule, not by the potential
    assert s["uniformity_uncompensated"] < 1e-3 and s["uniformity_compensated"] < 1e-3


def test_propagate_1d(tmp_path, capsys):
    cfg = write(tmp_path, """
profile: {kind: poschl_teller, nu: 1.0, alpha: 0.5}
propagate: {mode: 1d, fwhm: 20.0, k0: 0.5, dt: 0.1, t_max: 300, snapshot_interval: 100, dq: 0.25}
""")
    assert run(["propagate", "--config", cfg, "--out", str(tmp_path / "o")], capsys)[0] == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert s["transmitted_final"] > 0.99 and s["analytic_prediction"] == 1.0
    header, data = io.read_csv(tmp_path / "o" / "transmitted.csv")
    assert header[:2] == ["t", "transmitted"] and data.shape[0] == 4


def test_time_step_budget_is_a_config_error(tmp_path, capsys):
    cfg = write(tmp_path, """
profile: {kind: poschl_teller, nu: 1.0, alpha: 0.5}
propagate: {mode: 1d, fwhm: 2.0, k0: 3.0, dt: 1.0, t_max: 10, dq: 0.1}
""")
    code, _, err = run(["propagate", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "time step" in err


def test_threads_must_be_positive(tmp_path, capsys):
    code, _, _ = run(["design", "--config", write(tmp_path, PT_MASKED), "--threads", "0"], capsys)
    assert code == 2
