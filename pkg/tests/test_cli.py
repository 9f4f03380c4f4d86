import json

import pytest

from akgup.cli import SchemaMismatch, load_config, main, parse_config, report_diff
from akgup.params import SystemParams

PARAMS = """
[params]
m1 = 1.3
m2 = 0.8
m3 = 1.7
kappa = 0.9
beta = {beta}
t = 0.7
"""
POINTS = """
[points]
a = 0.3 -0.2 0.5 0.1 0.4 -0.3
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def last_error(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


# -- config parsing -----------------------------------------------------------------
def test_t_key_sets_time():
    cfg = parse_config(PARAMS.format(beta=1e-4), "derive-coefficients")
    assert cfg.params == SystemParams(1.3, 0.8, 1.7, kappa=0.9, beta=1e-4, T=0.7)


def test_field_level_diagnostics():
    from akgup.cli import ConfigError

    with pytest.raises(ConfigError) as info:
        parse_config(PARAMS.format(beta=1e-4) + "\n[points]\na = 1 2 3\n", "eval-kernel")
    assert info.value.field == "points.a"
    with pytest.raises(ConfigError) as info:
        parse_config("[params]\nmass = 2\n", "eval-kernel")
    assert info.value.field == "params.mass"


def test_measurement_time_required_for_ak_product():
    from akgup.cli import ConfigError

    with pytest.raises(ConfigError) as info:
        parse_config("[params]\nkappa = 1.0\nt = 0.5\n", "ak-product")
    assert info.value.field == "params.T"


def test_load_config_reads_file(tmp_path):
    path = write(tmp_path, PARAMS.format(beta=0.0) + POINTS)
    assert len(load_config(path, "eval-kernel").points) == 1


# -- commands -----------------------------------------------------------------------
def test_verify_algebra(tmp_path, capsys):
    assert main(["verify-algebra", "--t-order", "6", "--output", str(tmp_path)]) == 0
    assert "0 terms" in capsys.readouterr().out
    record = json.loads((tmp_path / "verify-algebra.json").read_text())
    assert record["ok"] and record["residual_terms"] == 0


def test_derive_coefficients_entry(tmp_path):
    cfg = write(tmp_path, PARAMS.format(beta=1e-4))
    assert main(["derive-coefficients", "--config", cfg, "--output", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "coefficients.json").read_text())
    prm = SystemParams(1.3, 0.8, 1.7, kappa=0.9, beta=1e-4, T=0.7)
    re, im = data["entries"]["0,4,0"][0]
    assert re == 0.0
    assert im == pytest.approx(5 * prm.m2**3 * prm.a() ** 4, rel=1e-12)
    assert data["provenance"]["0,4,0"] == "paper-given"


def test_eval_kernel_beta_zero(tmp_path):
    cfg = write(tmp_path, PARAMS.format(beta=0.0) + POINTS)
    assert main(["eval-kernel", "--config", cfg, "--output", str(tmp_path)]) == 0
    records = json.loads((tmp_path / "kernel.json").read_text())
    assert records[0]["correction"] == [1.0, 0.0]
    assert records[0]["base"] == records[0]["total"]


def test_compare_oracle_deterministic(tmp_path):
    cfg = write(tmp_path, PARAMS.format(beta=1e-4) + "\n[oracle]\nrandom_points = 2\n")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["compare-oracle", "--config", cfg, "--output", str(out), "--seed", "7"]) == 0
        outs.append((out / "compare-oracle.json").read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert len(data["configs"]) == 2 and data["diff"]["ok"]


def test_compare_oracle_seed_changes_points(tmp_path):
    cfg = write(tmp_path, PARAMS.format(beta=0.0) + "\n[oracle]\nrandom_points = 1\n")
    main(["compare-oracle", "--config", cfg, "--output", str(tmp_path / "a"), "--seed", "1"])
    main(["compare-oracle", "--config", cfg, "--output", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "compare-oracle.json").read_bytes() != (tmp_path / "b" / "compare-oracle.json").read_bytes()


def test_evolve_writes_state(tmp_path):
    text = "[params]\nm2 = 2\nkappa = 0.8\nt = 0.5\n[grid]\nn = 64\np_max = 9\n"
    cfg = write(tmp_path, text)
    assert main(["evolve", "--config", cfg, "--output", str(tmp_path)]) == 0
    assert (tmp_path / "state.bin").stat().st_size == 16 * 64**3
    summary = json.loads((tmp_path / "evolve.json").read_text())
    assert abs(summary["norm"] - 1) < 1e-10


def test_sweep_writes_csv(tmp_path):
    text = "[params]\nm2 = 2\nkappa = 1\nt = 1\n[sweep]\nbetas = 0 1e-6\n"
    cfg = write(tmp_path, text)
    assert main(["sweep", "--config", cfg, "--output", str(tmp_path)]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "beta,var_x1,var_x2,product"
    assert len(lines) == 3


# -- exit codes ---------------------------------------------------------------------
def test_exit_verification_failure(tmp_path, capsys, monkeypatch):
    import akgup.coefficients as coeffs

    real = coeffs.quoted_coefficients

    def tampered(params):
        out = real(params)
        out[(4, 0, 0)] = 2 * out[(4, 0, 0)]
        return out

    monkeypatch.setattr(coeffs, "quoted_coefficients", tampered)
    cfg = write(tmp_path, PARAMS.format(beta=1e-4))
    assert main(["derive-coefficients", "--config", cfg, "--output", str(tmp_path)]) == 2
    assert last_error(capsys)["error"] == "verification"


def test_exit_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "[params]\nm1 = -1\n")
    assert main(["derive-coefficients", "--config", cfg, "--output", str(tmp_path)]) == 3
    rec = last_error(capsys)
    assert rec["error"] == "config" and rec["exit_code"] == 3 and rec["field"] == "params"


def test_exit_config_singular(tmp_path, capsys):
    cfg = write(tmp_path, "[params]\nkappa = 1\n" + POINTS)
    assert main(["eval-kernel", "--config", cfg]) == 3


def test_exit_unknown_command():
    assert main(["frobnicate"]) == 3


def test_exit_missing_config(tmp_path, capsys):
    assert main(["eval-kernel", "--config", str(tmp_path / "absent.ini")]) == 4
    assert last_error(capsys)["error"] == "io"


def test_exit_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["verify-algebra", "--t-order", "5", "--output", str(blocker / "sub")]) == 4
    assert last_error(capsys)["exit_code"] == 4


# -- report_diff --------------------------------------------------------------------
def test_diff_identical_is_empty():
    doc = {"a": [1.0, 2.0], "b": {"c": 3.0, "d": "x"}}
    rep = report_diff(doc, doc, 1e-12)
    assert rep.ok and rep.entries == []


def test_diff_flags_perturbed_field():
    e = {"x": 1.0, "y": [2.0, 0.5], "z": 4.0}
    a = {"x": 1.0 + 1e-3, "y": [2.0, 0.5], "z": 4.0 * (1 + 1e-9)}
    rep = report_diff(e, a, 1e-6)
    assert [d["field"] for d in rep.entries] == ["x"]
    assert rep.entries[0]["relative"] == pytest.approx(1e-3)


def test_diff_worst_first():
    rep = report_diff({"a": 1.0, "b": 1.0}, {"a": 1.01, "b": 1.5}, 1e-6)
    assert [d["field"] for d in rep.entries] == ["b", "a"]


def test_diff_schema_mismatch():
    with pytest.raises(SchemaMismatch):
        report_diff({"a": 1.0}, {"b": 1.0}, 1e-6)
    with pytest.raises(SchemaMismatch):
        report_diff({"a": [1.0, 0.0]}, {"a": 1.0}, 1e-6)


def test_inline_comments_allowed():
    cfg = parse_config("[params]\nkappa = 0.9   ; coupling\nt = 0.7 # time\n", "derive-coefficients")
    assert (cfg.params.kappa, cfg.params.T) == (0.9, 0.7)
