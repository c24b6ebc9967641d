"""Command-line front end.

Subcommands:
    validate   check the coefficient bound of a model config; exit 2 on failure
    report     full verification report (correlations + regressions) as JSON
    maxcorr    singular spectrum and optimizer samples of a model or fixture
    sample     draws from a model by rejection sampling
    bench      run every built-in fixture and tabulate the estimates

Models come from ``--model PATH`` (JSON config) or ``--fixture NAME`` for the
built-ins (disc, pball:p, fourpoint, fgm:rho1). Exit codes: 0 success,
1 config error, 2 validation failure (coefficient bound), 3 numerical
failure; each failure prints one machine-parsable line on stderr.

CSV output uses '.' decimals, 17 significant digits and LF line endings so
doubles round-trip losslessly and runs diff cleanly. Files are written
atomically (temp file + rename). The environment variable
LANCASTER_LAB_THREADS caps BLAS parallelism when set before start-up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

from .correlation import (
    AceConvergenceError,
    SpectralFailureError,
    correlation_report,
    discretize_model,
    maxcorr_svd,
    singular_spectrum,
)
from .fixtures import BENCH_FIXTURES, resolve_fixture
from .lancaster import (
    BoundViolationError,
    model_from_config,
    model_to_config,
    sample_joint,
)
from .regression import counterexample_report

__all__ = ["RunConfig", "run", "main"]

_COMMANDS = ("validate", "report", "maxcorr", "sample", "bench")


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation, fully resolved."""

    command: str
    model_path: str | None = None
    fixture: str | None = None
    grid: int | None = None
    seed: int = 0
    output_path: str | None = None
    format: str = "json"
    count: int = 1000
    tol: float = 1e-9

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.grid is not None and self.grid < 16:
            raise ValueError("grid must be at least 16 nodes per axis")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        if self.count < 1:
            raise ValueError("count must be positive")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lancaster-lab-")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(config: RunConfig, text: str) -> None:
    if config.output_path:
        _write_atomic(config.output_path, text)
    else:
        sys.stdout.write(text)


def _csv(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(str(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_model_config(config: RunConfig) -> dict:
    if config.model_path is None:
        raise ValueError("this command needs --model PATH (a JSON model config)")
    with open(config.model_path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _resolve_model(config: RunConfig):
    """A LancasterModel from --model, or from a model-backed fixture."""
    if config.model_path is not None and config.fixture is not None:
        raise ValueError("--model and --fixture are mutually exclusive")
    if config.model_path is not None:
        return model_from_config(_load_model_config(config))
    if config.fixture is not None:
        fixture = resolve_fixture(config.fixture)
        if fixture.model is None:
            raise ValueError(
                f"fixture {config.fixture!r} is not an expansion model; this command"
                " needs --model or an fgm fixture"
            )
        return fixture.model
    raise ValueError("one of --model or --fixture is required")


def _resolve_joint(config: RunConfig):
    if config.model_path is not None and config.fixture is not None:
        raise ValueError("--model and --fixture are mutually exclusive")
    if config.fixture is not None:
        fixture = resolve_fixture(config.fixture)
        return fixture.joint(config.grid), fixture.model
    model = model_from_config(_load_model_config(config))
    return discretize_model(model, config.grid or 200), model


# -- subcommands -------------------------------------------------------------


def _cmd_validate(config: RunConfig) -> int:
    cfg = _load_model_config(config)
    try:
        model = model_from_config(cfg)
        bound = model.coeffs.bound_value
        ok = True
    except BoundViolationError as exc:
        bound = exc.bound_value
        ok = False
    if config.format == "json":
        _emit(config, _json_text({"bound_value": bound, "pass": ok}))
    else:
        _emit(config, f"bound_value={_fmt(bound)} {'pass' if ok else 'fail'}\n")
    if not ok:
        print(f"error: bound-violated: bound_value={_fmt(bound)}", file=sys.stderr)
        return 2
    return 0


def _regression_entries(report) -> list[dict]:
    entries = []
    for checks in report.degree_checks:
        entry: dict = {
            "degree": checks.degree,
            "eigen": {
                "x_given_y": {
                    "target": checks.eigen_x_given_y.target_leading,
                    "max_residual": checks.eigen_x_given_y.max_residual,
                },
                "y_given_x": {
                    "target": checks.eigen_y_given_x.target_leading,
                    "max_residual": checks.eigen_y_given_x.max_residual,
                },
            },
            "polynomial": {
                "x_given_y": {
                    "target_leading": checks.poly_x_given_y.target_leading,
                    "fitted_coeffs": list(checks.poly_x_given_y.fitted_coeffs),
                    "max_residual": checks.poly_x_given_y.max_residual,
                },
                "y_given_x": {
                    "target_leading": checks.poly_y_given_x.target_leading,
                    "fitted_coeffs": list(checks.poly_y_given_x.fitted_coeffs),
                    "max_residual": checks.poly_y_given_x.max_residual,
                },
            },
        }
        if checks.degree == 1:
            linear = report.linear
            entry["linear"] = {
                "a1": linear.a1,
                "a0": linear.a0,
                "b1": linear.b1,
                "b0": linear.b0,
                "residual": linear.residual,
                "strict": linear.strict,
            }
        entries.append(entry)
    return entries


def _report_document(report, model) -> dict:
    return {
        "pearson": report.correlation.pearson,
        "maxcorr_analytic": report.correlation.maxcorr_analytic,
        "maxcorr_svd": report.correlation.maxcorr_svd,
        "maxcorr_ace": report.correlation.maxcorr_ace,
        "gap": report.correlation.gap,
        "regressions": _regression_entries(report),
        "bound_value": report.bound_value,
        "summary": {
            "strict_linear": report.strict_linear,
            "gap_positive": report.gap_positive,
            "degenerate_comparison": report.degenerate_comparison,
            "counterexample_confirmed": report.counterexample_confirmed,
        },
        "model": model_to_config(model),
    }


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            rows.extend(_flatten(value, f"{prefix}{key}."))
    elif isinstance(obj, list):
        for index, value in enumerate(obj):
            rows.extend(_flatten(value, f"{prefix}{index}."))
    else:
        key = prefix[:-1]
        if isinstance(obj, bool):
            rows.append((key, "true" if obj else "false"))
        elif isinstance(obj, float):
            rows.append((key, _fmt(obj)))
        else:
            rows.append((key, str(obj)))
    return rows


def _cmd_report(config: RunConfig) -> int:
    model = _resolve_model(config)
    report = counterexample_report(model, grid=config.grid or 200, ace_tol=config.tol)
    document = _report_document(report, model)
    if config.format == "json":
        _emit(config, _json_text(document))
    else:
        _emit(config, _csv("key,value", _flatten(document)))
    return 0


def _sibling_path(path: str, tag: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}.{tag}{ext or '.csv'}"


def _cmd_maxcorr(config: RunConfig) -> int:
    joint, _ = _resolve_joint(config)
    spectrum = singular_spectrum(joint)
    result = maxcorr_svd(joint)
    if config.format == "json":
        _emit(
            config,
            _json_text(
                {
                    "R": result.R,
                    "spectrum": [float(s) for s in spectrum],
                    "g1": [float(v) for v in result.g1_values],
                    "g2": [float(v) for v in result.g2_values],
                }
            ),
        )
        return 0
    spectrum_csv = _csv("index,value", ((i, _fmt(s)) for i, s in enumerate(spectrum)))
    g1_csv = _csv("index,value", ((i, _fmt(v)) for i, v in enumerate(result.g1_values)))
    g2_csv = _csv("index,value", ((i, _fmt(v)) for i, v in enumerate(result.g2_values)))
    if config.output_path:
        _write_atomic(config.output_path, spectrum_csv)
        _write_atomic(_sibling_path(config.output_path, "g1"), g1_csv)
        _write_atomic(_sibling_path(config.output_path, "g2"), g2_csv)
    else:
        sys.stdout.write(f"# spectrum\n{spectrum_csv}# g1\n{g1_csv}# g2\n{g2_csv}")
    return 0


def _cmd_sample(config: RunConfig) -> int:
    model = _resolve_model(config)
    samples = sample_joint(model, config.count, config.seed)
    if config.format == "json":
        _emit(config, _json_text([[float(x), float(y)] for x, y in samples]))
    else:
        _emit(config, _csv("x,y", ((_fmt(x), _fmt(y)) for x, y in samples)))
    return 0


def _cmd_bench(config: RunConfig) -> int:
    rows = []
    for name in BENCH_FIXTURES:
        fixture = resolve_fixture(name)
        joint = fixture.joint(config.grid)
        report = correlation_report(joint, model=fixture.model, ace_tol=config.tol)
        rows.append(
            {
                "fixture": name,
                "pearson": report.pearson,
                "R_analytic": fixture.reference_maxcorr,
                "R_svd": report.maxcorr_svd,
                "R_ace": report.maxcorr_ace,
                "gap": report.gap,
            }
        )
    if config.format == "json":
        _emit(config, _json_text(rows))
    else:
        _emit(
            config,
            _csv(
                "fixture,pearson,R_analytic,R_svd,R_ace,gap",
                (
                    (
                        row["fixture"],
                        _fmt(row["pearson"]),
                        _fmt(row["R_analytic"]),
                        _fmt(row["R_svd"]),
                        _fmt(row["R_ace"]),
                        _fmt(row["gap"]),
                    )
                    for row in rows
                ),
            ),
        )
    return 0


_DISPATCH = {
    "validate": _cmd_validate,
    "report": _cmd_report,
    "maxcorr": _cmd_maxcorr,
    "sample": _cmd_sample,
    "bench": _cmd_bench,
}


def run(config: RunConfig) -> int:
    """Execute one resolved configuration; returns the process exit code."""
    try:
        return _DISPATCH[config.command](config)
    except BoundViolationError as exc:
        print(f"error: bound-violated: {exc}", file=sys.stderr)
        return 2
    except SpectralFailureError as exc:
        print(f"error: spectral-failure: {exc}", file=sys.stderr)
        return 3
    except AceConvergenceError as exc:
        print(f"error: no-convergence: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: config-error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lancaster-lab",
        description="Verify expansion joints whose maximal correlation exceeds |pearson|.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "check the coefficient bound of a model config"),
        ("report", "full correlation + regression verification report"),
        ("maxcorr", "singular spectrum and optimizing transformations"),
        ("sample", "rejection-sample (x, y) pairs from a model"),
        ("bench", "run all built-in fixtures against their known values"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--model", metavar="PATH", help="JSON model config file")
        cmd.add_argument("--fixture", metavar="NAME", help="built-in fixture name")
        cmd.add_argument("--grid", type=int, default=None, help="quadrature nodes per axis")
        cmd.add_argument("--seed", type=int, default=0, help="sampler seed (64-bit)")
        cmd.add_argument("--out", metavar="PATH", default=None, help="output file (default stdout)")
        cmd.add_argument(
            "--format",
            choices=("csv", "json"),
            default="json" if name in ("validate", "report") else "csv",
        )
        cmd.add_argument("--count", type=int, default=1000, help="number of samples")
        cmd.add_argument("--tol", type=float, default=1e-9, help="ACE convergence tolerance")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            model_path=args.model,
            fixture=args.fixture,
            grid=args.grid,
            seed=args.seed,
            output_path=args.out,
            format=args.format,
            count=args.count,
            tol=args.tol,
        )
    except ValueError as exc:
        print(f"error: config-error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
