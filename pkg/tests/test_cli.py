import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from relwave.cli import main
from relwave.config import load_config, parse_method, validate_config
from relwave.errors import ConfigError
from relwave.grid import ComplexField, SpectralGrid
from relwave.io import atomic_write_text, read_field_csv, write_field_csv
from relwave.wavefield import gaussian_packet


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1
    return code, json.loads(out[0])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_dispersion_table(tmp_path, capsys):
    code, summary = run(["dispersion", "--kmax", "3", "--steps", "7", "--output-dir", str(tmp_path)], capsys)
    assert code == 0 and summary["rows"] == 7
    table = rows(tmp_path / "dispersion.csv")
    assert table[0] == ["k", "omega_plus", "omega_minus", "v_group"]
    assert len(table) == 8
    assert float(table[1][1]) == 0.0 and float(table[1][2]) == 2.0
    manifest = json.loads((tmp_path / "dispersion.json").read_text())
    assert manifest["artifacts"] == ["dispersion.csv"]
    assert len(manifest["config_hash"]) == 64
    assert "version" in manifest


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "bad.yaml", {"grid": {"n": 64, "colour": "blue"}})
    out = tmp_path / "out"
    code, summary = run(["dispersion", "--config", cfg, "--output-dir", str(out)], capsys)
    assert code == 2
    assert "grid.colour" in summary["error"]
    assert not out.exists()


def test_bad_value_reports_field_path(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "bad.yaml", {"grid": {"n": 63}})
    code, summary = run(["dispersion", "--config", cfg, "--output-dir", str(tmp_path / "o")], capsys)
    assert code == 2 and summary["error"].startswith("grid.n")


def test_conserve_reports_small_norm_drift(tmp_path, capsys):
    cfg = write_yaml(
        tmp_path / "c.yaml",
        {"grid": {"n": 128, "box": 40.0}, "state": {"kind": "gaussian", "k0": 0.3, "sigma": 3.0, "branch": "plus"}},
    )
    code, summary = run(["conserve", "--config", cfg, "--t", "10", "--steps", "20", "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    assert summary["norm_drift"] < 1e-10
    assert summary["energy_drift"] < 1e-10
    table = rows(tmp_path / "conservation.csv")
    assert len(table) == 22


def test_evolve_snapshots(tmp_path, capsys):
    code, summary = run(
        ["evolve", "--method", "truncated:2", "--t", "2", "--snapshots", "3", "--output-dir", str(tmp_path)], capsys
    )
    assert code == 0
    assert summary["times"] == [0.0, 1.0, 2.0]
    for i in range(3):
        assert rows(tmp_path / f"snapshot_{i:04d}.csv")[0] == ["x", "re", "im"]
    manifest = json.loads((tmp_path / "evolve.json").read_text())
    assert manifest["summary"]["method"] == "truncated:2"
    assert len(manifest["summary"]["norms"]) == 3


def test_evolve_bad_method(tmp_path, capsys):
    code, _ = run(["evolve", "--method", "leapfrog", "--output-dir", str(tmp_path)], capsys)
    assert code == 2


def test_split_from_input_file(tmp_path, capsys):
    g = SpectralGrid(1, 64, 20.0)
    d = gaussian_packet(0.0, 0.5, 2.0, "minus", g)
    write_field_csv(tmp_path / "psi.csv", d.psi0)
    write_field_csv(tmp_path / "dot.csv", d.psi_dot0)
    code, summary = run(
        ["split", "--input", str(tmp_path / "psi.csv"), "--velocity", str(tmp_path / "dot.csv"), "--output-dir", str(tmp_path)],
        capsys,
    )
    assert code == 0
    assert summary["norm_plus"] < 1e-12
    assert summary["reconstruct_max_error"] < 1e-12
    assert rows(tmp_path / "split.csv")[0] == ["kx", "re_aplus", "im_aplus", "re_aminus", "im_aminus"]


def test_split_branch_flag(tmp_path, capsys):
    g = SpectralGrid(1, 32, 10.0)
    write_field_csv(tmp_path / "psi.csv", gaussian_packet(0.0, 0.0, 1.5, "plus", g).psi0)
    code, summary = run(["split", "--input", str(tmp_path / "psi.csv"), "--branch", "minus", "--output-dir", str(tmp_path)], capsys)
    assert code == 0 and summary["norm_plus"] < 1e-12


def test_velocity_without_input(tmp_path, capsys):
    code, _ = run(["split", "--velocity", "x.csv", "--output-dir", str(tmp_path)], capsys)
    assert code == 2


def test_missing_input_file(tmp_path, capsys):
    code, summary = run(["split", "--input", str(tmp_path / "nope.csv"), "--output-dir", str(tmp_path)], capsys)
    assert code == 2 and "not found" in summary["error"]


def test_quantize(tmp_path, capsys):
    code, summary = run(
        ["quantize", "--modes", f"0,{-2 * np.pi / 3}", "--nmax", "3", "--box", "3", "--output-dir", str(tmp_path)], capsys
    )
    assert code == 0
    assert summary["ccr_exact_max_deviation"] == 0.0
    assert summary["complete_lattice"] is True
    report = json.loads((tmp_path / "quantize_report.json").read_text())
    assert report["fock_dim"] == 256
    assert max(r["deviation"] for r in report["delta_function"]["rows"]) < 1e-12


def test_quantize_cap_is_runtime_error(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RELWAVE_MAX_FOCK_DIM", "10")
    code, summary = run(["quantize", "--modes", "0,1", "--nmax", "2", "--output-dir", str(tmp_path)], capsys)
    assert code == 1 and summary["status"] == "failed"


def test_deterministic_csv(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "r.yaml", {"grid": {"n": 64, "box": 20.0}, "state": {"kind": "random", "branch": None}, "seed": 7})
    for name in ("a", "b"):
        code, _ = run(["evolve", "--config", cfg, "--output-dir", str(tmp_path / name)], capsys)
        assert code == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_seed_changes_output(tmp_path, capsys):
    outs = []
    for seed in (1, 2):
        cfg = write_yaml(tmp_path / f"s{seed}.yaml", {"grid": {"n": 32}, "state": {"kind": "random"}, "seed": seed})
        run(["split", "--config", cfg, "--output-dir", str(tmp_path / str(seed))], capsys)
        outs.append((tmp_path / str(seed) / "split.csv").read_bytes())
    assert outs[0] != outs[1]


def test_formats_json_only(tmp_path, capsys):
    cfg = write_yaml(tmp_path / "j.yaml", {"output": {"formats": ["json"]}})
    code, summary = run(["dispersion", "--config", cfg, "--output-dir", str(tmp_path / "o")], capsys)
    assert code == 0 and summary["artifacts"] == ["dispersion.json"]


def test_config_aliases_and_defaults(tmp_path):
    cfg = validate_config({"grid": {"n_per_axis": 32, "box_length": 5.0}, "units": {"mass": 2.0}})
    assert cfg.grid.grid() == SpectralGrid(1, 32, 5.0)
    assert cfg.units.params().mu == 2.0
    assert validate_config(None).seed == validate_config({}).seed
    with pytest.raises(ConfigError):
        validate_config([1, 2])
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"run": {"method": "truncated:4"}}))
    assert load_config(p).run.method == "truncated:4"


def test_parse_method():
    assert parse_method("exact") == ("exact", None)
    assert parse_method("truncated:12") == ("truncated", 12)
    for bad in ("truncated:0", "truncated:x", "rk4"):
        with pytest.raises(ValueError):
            parse_method(bad)


def test_field_csv_round_trip(tmp_path):
    g = SpectralGrid(1, 16, 4.0)
    f = ComplexField(g, np.arange(16) * (1 + 0.5j))
    write_field_csv(tmp_path / "f.csv", f)
    back = read_field_csv(tmp_path / "f.csv")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_field_csv_validation(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("x,re,im\n0,1,0\n1,1,0\n3,1,0\n")
    with pytest.raises(ConfigError):
        read_field_csv(p)
    p.write_text("a,b,c\n-1,0,0\n0,0,0\n")
    with pytest.raises(ConfigError):
        read_field_csv(p)


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write_text(tmp_path / "sub" / "x.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["x.txt"]


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "relwave", "dispersion", "--kmax", "1", "--steps", "3", "--output-dir", str(tmp_path)],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["rows"] == 3
