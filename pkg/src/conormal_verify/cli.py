"""Batch driver: ``verify --config <path> --suite <name> ...``.

Exit codes: 0 all checks pass (or are inconclusive), 1 some check failed,
2 invalid configuration or command line, 3 an identity that holds by
construction was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import checks
from .half_space_core import HalfSpaceGrid
from .mollified_calculus import build_cutoff
from .symbol_calculus import DEFAULT_SWEEP

OUT_ENV = "CONORMAL_VERIFY_OUT"
DEFAULT_OUT = "verify-out"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("conormal_verify")


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("conormal_verify").joinpath("schemas", name).read_text())


def _pointer(err: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def validate_config(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(load_schema("run_config.schema.json"))
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise ConfigError(f"config error at {_pointer(e)}: {e.message}")


@dataclass
class RunConfig:
    raw: dict

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            raw = {}
        else:
            try:
                raw = json.loads(Path(path).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config error at /: top level must be an object")
        validate_config(raw)
        return cls(raw)

    def effective(self, suite=None, sweep=None, seed=None, fmt=None) -> dict:
        """Config with command-line overrides applied and defaults filled in."""
        raw = json.loads(json.dumps(self.raw))
        if suite is not None:
            raw["suite"] = suite
        if sweep is not None:
            raw["gamma_sweep"] = list(sweep)
        if seed is not None:
            raw["seed"] = seed
        if fmt is not None:
            raw["format"] = fmt
        validate_config(raw)
        grid = HalfSpaceGrid().metadata() | raw.get("grid", {})
        return {
            "grid": grid,
            "cutoff": {"safety": 0.9} | raw.get("cutoff", {}),
            "gamma_sweep": sorted(float(g) for g in raw.get("gamma_sweep", DEFAULT_SWEEP)),
            "tolerances": raw.get("tolerances", {}),
            "toy": raw.get("toy", {}),
            "suite": raw.get("suite", "all"),
            "disabled_checks": sorted(raw.get("disabled_checks", [])),
            "families": list(raw.get("families", checks.SAMPLE_FAMILIES)),
            "pipeline_families": list(raw.get("pipeline_families", checks.bp.DEFAULT_FAMILIES)),
            "seed": int(raw.get("seed", 0)),
            "format": raw.get("format", "json"),
            "output_dir": raw.get("output_dir"),
        }


def build_context(eff: dict) -> checks.Context:
    g = dict(eff["grid"])
    g["sizes"] = tuple(g["sizes"])
    try:
        grid = HalfSpaceGrid(**g)
        cut = build_cutoff(grid.delta0, grid.n, eff["cutoff"]["safety"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config error at /grid: {exc}") from exc
    return checks.Context(
        grid,
        cut,
        tuple(eff["gamma_sweep"]),
        eff["seed"],
        tuple(eff["families"]),
        tuple(eff["pipeline_families"]),
        dict(eff["toy"]),
        dict(eff["tolerances"]),
    )


# ----------------------------------------------------------------------------
# serialization


def plain(obj):
    """JSON-ready copy with numpy scalars unwrapped and non-finite floats spelled out."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dumps(obj) -> str:
    return json.dumps(plain(obj), indent=2, sort_keys=True) + "\n"


def _csv(rows: list) -> str:
    buf = io.StringIO()
    cols = list(rows[0].keys()) if rows else []
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r[k] is None else (repr(float(r[k])) if isinstance(r[k], (float, np.floating)) else r[k])) for k in cols})
    return buf.getvalue()


def report_document(results: list, eff: dict, exit_code: int) -> dict:
    entries = []
    for r in results:
        e = r.to_json()
        if r.tables:
            e["tables"] = r.tables
        if r.error:
            e["error"] = r.error
        entries.append(e)
    return {
        "suite": eff["suite"],
        "seed": eff["seed"],
        "overall": "FAIL" if exit_code else "PASS",
        "exit_code": exit_code,
        "config": {k: v for k, v in eff.items() if k != "output_dir"},
        "checks": entries,
    }


def emit_report(results: list, eff: dict, exit_code: int, out_dir: Path, fmt: str) -> list:
    """Render every file in memory, then move each into place atomically."""
    if not results:
        raise ConfigError("empty suite: nothing to report")
    doc = plain(report_document(results, eff, exit_code))
    jsonschema.validate(doc, load_schema("report.schema.json"))
    files = {}
    if fmt == "json":
        files["report.json"] = _dumps(doc)
    else:
        summary = [{"check_id": r.check_id, "status": r.status} for r in results]
        files["report.csv"] = _csv(summary)
        for r in results:
            for name, rows in r.tables.items():
                if rows:
                    files[f"{r.check_id}.{name}.csv"] = _csv(rows)
    files["timings.json"] = _dumps({r.check_id: r.runtime for r in results})
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, out_dir / name)
            except BaseException:
                Path(tmp).unlink(missing_ok=True)
                raise
            written.append(out_dir / name)
    except OSError as exc:
        raise ConfigError(f"output directory {out_dir} is not writable: {exc}") from exc
    return written


# ----------------------------------------------------------------------------
# driver


def resolve_out(cli_out: str | None, eff: dict) -> Path:
    if cli_out:
        return Path(cli_out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(eff.get("output_dir") or DEFAULT_OUT)


def run(config_path, suite, sweep=None, seed=None, out=None, fmt=None) -> tuple:
    """Run a suite; returns (results, exit code, written files)."""
    cfg = RunConfig.load(config_path)
    eff = cfg.effective(suite, sweep, seed, fmt)
    ids = checks.checks_for(eff["suite"], eff["disabled_checks"])
    if not ids:
        raise ConfigError(f"suite {eff['suite']!r} selects no checks")
    ctx = build_context(eff)
    results, internal = [], False
    for cid in ids:
        log.info("running %s", cid)
        try:
            res = checks.run_check(cid, ctx)
        except checks.InternalInconsistency as exc:
            internal = True
            res = checks.CheckResult(cid, "FAIL", {}, {}, error=f"internal inconsistency: {exc}")
        log.info("%s %s (%.1f s)", cid, res.status, res.runtime)
        results.append(res)
    if internal:
        code = EXIT_INTERNAL
    elif any(r.status == "FAIL" for r in results):
        code = EXIT_FAIL
    else:
        code = EXIT_OK
    written = emit_report(results, eff, code, resolve_out(out, eff), eff["format"])
    return results, code, written


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description="Run named verification suites and write machine-readable reports.")
    p.add_argument("--config", help="RunConfig JSON file (defaults reproduce the acceptance suite)")
    p.add_argument("--suite", choices=list(checks.SUITES) + ["all"], help="suite to run (default: config value, else all)")
    p.add_argument("--gamma-sweep", nargs="+", type=float, metavar="G", help="override the gamma sweep")
    p.add_argument("--seed", type=int, help="override the sample seed")
    p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    p.add_argument("--format", choices=("json", "csv"), help="report format")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        results, code, written = run(args.config, args.suite, args.gamma_sweep, args.seed, args.out, args.format)
    except ConfigError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for r in results:
        print(f"{r.status:12s} {r.check_id}")
    print(f"reports: {', '.join(str(w) for w in written)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
