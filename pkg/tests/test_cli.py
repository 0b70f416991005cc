import json
import os

import jsonschema
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conormal_verify import checks, cli
from conormal_verify.checks import CheckResult, InternalInconsistency


@pytest.fixture
def fake_registry(monkeypatch):
    """Replace the registry with instant checks reusing real ids."""

    def install(*behaviours, suite="symbols"):
        ids = list(checks.REGISTRY)
        reg = {}
        for cid, beh in zip(ids, behaviours):

            def fn(ctx, cid=cid, beh=beh):
                if isinstance(beh, Exception):
                    raise beh
                rows = [{"sample_id": f"s{i}", "gamma": float(g), "lhs": 1.0, "rhs": 2.0, "ratio": 0.5} for i in range(2) for g in ctx.sweep]
                return CheckResult(cid, beh, {"value": 1.0, "seed": ctx.seed}, {"value": 2.0}, tables={"sweep": rows})

            reg[cid] = (suite, fn)
        monkeypatch.setattr(checks, "REGISTRY", reg)
        return list(reg)

    return install


def read_report(path):
    doc = json.loads((path / "report.json").read_text())
    jsonschema.validate(doc, cli.load_schema("report.schema.json"))
    return doc


def write_config(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw) if not isinstance(raw, str) else raw)
    return str(p)


class TestExitCodes:
    def test_pass_and_inconclusive_exit_zero(self, fake_registry, tmp_path, capsys):
        ids = fake_registry("PASS", "INCONCLUSIVE")
        code = cli.main(["--suite", "symbols", "--out", str(tmp_path)])
        assert code == 0
        doc = read_report(tmp_path)
        assert doc["overall"] == "PASS" and doc["exit_code"] == 0
        assert [c["check_id"] for c in doc["checks"]] == ids
        assert (tmp_path / "timings.json").exists()
        out = capsys.readouterr().out
        assert "INCONCLUSIVE" in out and ids[0] in out

    def test_failure_exit_one(self, fake_registry, tmp_path):
        fake_registry("PASS", "FAIL")
        assert cli.main(["--suite", "symbols", "--out", str(tmp_path)]) == 1
        assert read_report(tmp_path)["overall"] == "FAIL"

    def test_internal_inconsistency_exit_three(self, fake_registry, tmp_path):
        fake_registry("FAIL", InternalInconsistency("parseval defect 1e-3"))
        assert cli.main(["--suite", "symbols", "--out", str(tmp_path)]) == 3
        doc = read_report(tmp_path)
        assert doc["exit_code"] == 3
        assert "parseval" in doc["checks"][1]["error"]

    def test_every_enabled_check_once(self, fake_registry, tmp_path):
        ids = fake_registry("PASS", "PASS", "PASS")
        cfg = write_config(tmp_path, {"disabled_checks": [ids[1]]})
        cli.main(["--config", cfg, "--suite", "symbols", "--out", str(tmp_path / "o")])
        assert [c["check_id"] for c in read_report(tmp_path / "o")["checks"]] == [ids[0], ids[2]]


class TestConfigErrors:
    def test_malformed_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "{not json")
        assert cli.main(["--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "line 1" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    @pytest.mark.parametrize(
        "raw, pointer",
        [
            ({"seed": "seven"}, "/seed"),
            ({"grid": {"sizes": [512]}}, "/grid/sizes"),
            ({"gamma_sweep": [0.5, 2]}, "/gamma_sweep/0"),
            ({"tolerances": {"no-such-check": {"x": 1}}}, "/tolerances"),
            ({"toy": {"N": 1}}, "/toy/N"),
            ({"colour": "blue"}, "/"),
        ],
    )
    def test_schema_violation_points_at_field(self, tmp_path, capsys, raw, pointer):
        cfg = write_config(tmp_path, raw)
        assert cli.main(["--config", cfg, "--out", str(tmp_path / "o")]) == 2
        err = capsys.readouterr().err
        assert f"config error at {pointer}:" in err
        assert not (tmp_path / "o").exists()

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["--config", str(tmp_path / "absent.json")]) == 2

    def test_invalid_grid_semantics(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"grid": {"sizes": [1000, 512]}})
        assert cli.main(["--config", cfg, "--suite", "symbols", "--out", str(tmp_path / "o")]) == 2
        assert "/grid" in capsys.readouterr().err

    def test_duplicate_sweep_override(self, tmp_path):
        assert cli.main(["--suite", "symbols", "--gamma-sweep", "2", "2", "--out", str(tmp_path)]) == 2

    def test_unknown_suite_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--suite", "everything"])
        assert exc.value.code == 2


class TestOutput:
    def test_empty_suite_guard_writes_nothing(self, fake_registry, tmp_path):
        ids = fake_registry("PASS", "PASS")
        cfg = write_config(tmp_path, {"disabled_checks": ids})
        out = tmp_path / "o"
        assert cli.main(["--config", cfg, "--suite", "symbols", "--out", str(out)]) == 2
        assert not out.exists()
        with pytest.raises(cli.ConfigError):
            cli.emit_report([], {}, 0, out, "json")

    def test_unwritable_output(self, fake_registry, tmp_path, capsys):
        fake_registry("PASS")
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert cli.main(["--suite", "symbols", "--out", str(blocker / "sub")]) == 2
        assert "not writable" in capsys.readouterr().err

    def test_no_temporary_files_left(self, fake_registry, tmp_path):
        fake_registry("PASS", "FAIL")
        cli.main(["--suite", "symbols", "--out", str(tmp_path)])
        assert sorted(p.name for p in tmp_path.iterdir()) == ["report.json", "timings.json"]

    def test_output_directory_precedence(self, fake_registry, tmp_path, monkeypatch):
        fake_registry("PASS")
        cfg = write_config(tmp_path, {"output_dir": str(tmp_path / "from-config")})
        cli.main(["--config", cfg, "--suite", "symbols"])
        assert (tmp_path / "from-config" / "report.json").exists()
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "from-env"))
        cli.main(["--config", cfg, "--suite", "symbols"])
        assert (tmp_path / "from-env" / "report.json").exists()
        cli.main(["--config", cfg, "--suite", "symbols", "--out", str(tmp_path / "from-flag")])
        assert (tmp_path / "from-flag" / "report.json").exists()

    def test_default_output_directory(self, fake_registry, tmp_path, monkeypatch):
        fake_registry("PASS")
        monkeypatch.delenv(cli.OUT_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        cli.main(["--suite", "symbols"])
        assert (tmp_path / cli.DEFAULT_OUT / "report.json").exists()

    def test_csv_tables(self, fake_registry, tmp_path):
        ids = fake_registry("PASS", "FAIL")
        sweep = ["1", "4", "16"]
        assert cli.main(["--suite", "symbols", "--format", "csv", "--gamma-sweep", *sweep, "--out", str(tmp_path)]) == 1
        summary = (tmp_path / "report.csv").read_text().splitlines()
        assert summary == ["check_id,status", f"{ids[0]},PASS", f"{ids[1]},FAIL"]
        rows = (tmp_path / f"{ids[0]}.sweep.csv").read_text().splitlines()
        assert rows[0] == "sample_id,gamma,lhs,rhs,ratio"
        assert len(rows) - 1 == 2 * len(sweep)
        assert not (tmp_path / "report.json").exists()

    def test_overrides_recorded(self, fake_registry, tmp_path):
        fake_registry("PASS")
        cli.main(["--suite", "symbols", "--seed", "11", "--gamma-sweep", "8", "2", "--out", str(tmp_path)])
        doc = read_report(tmp_path)
        assert doc["seed"] == 11 and doc["checks"][0]["measured"]["seed"] == 11
        assert doc["config"]["gamma_sweep"] == [2.0, 8.0]

    def test_report_keys_sorted_and_runtime_free(self, fake_registry, tmp_path):
        fake_registry("PASS")
        cli.main(["--suite", "symbols", "--out", str(tmp_path)])
        text = (tmp_path / "report.json").read_text()
        assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text
        assert "runtime" not in text


def test_plain_handles_non_finite_and_numpy():
    import numpy as np

    out = cli.plain({1: np.float64("inf"), "a": np.arange(2), "b": (np.bool_(True), 1j)})
    assert out == {"1": "inf", "a": [0, 1], "b": [True, [0.0, 1.0]]}


def test_symbols_suite_is_byte_deterministic(tmp_path):
    codes = [cli.main(["--suite", "symbols", "--seed", "3", "--out", str(tmp_path / d)]) for d in ("a", "b")]
    assert codes == [0, 0]
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


@settings(max_examples=40, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    suite=st.sampled_from(list(checks.SUITES) + ["all"]),
    sweep=st.lists(st.integers(1, 128), min_size=1, max_size=7, unique=True),
    seed=st.integers(0, 2**31),
    fmt=st.sampled_from(["json", "csv"]),
    safety=st.floats(0.1, 1.0),
)
def test_effective_config_round_trips_through_schema(suite, sweep, seed, fmt, safety):
    cfg = cli.RunConfig({"cutoff": {"safety": safety}})
    eff = cfg.effective(suite, sweep, seed, fmt)
    raw = {k: v for k, v in eff.items() if v is not None}
    again = cli.RunConfig(json.loads(json.dumps(raw)))
    cli.validate_config(again.raw)
    assert again.effective() == eff
