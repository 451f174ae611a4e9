"""Command-line front end.

    framesum <command> --spec <path> [--report <path>] [--csv <path>]
                       [--seed <int>] [--json]

Commands map one-to-one onto experiment kinds (``sum`` runs ``finite-sum``,
``op-sum`` runs ``operator-sum``), except ``paper-suite``, which executes
every bundled fixture and prints a pass/flagged table.

Exit codes: 0 success (including flagged discrepancies), 2 a sufficiency
condition or certification failed (report still written), 1 usage, parse, or
I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import FrameToolkitError, SpecParseError, SpecSchemaError
from .experiments import ExperimentResult, parse_spec, parse_spec_text, run_experiment

_COMMAND_KINDS = {
    "bounds": "bounds",
    "dual": "dual",
    "sum": "finite-sum",
    "op-sum": "operator-sum",
    "perturbed-sum": "perturbed-sum",
    "gabor": "gabor",
    "algo": "algo",
    "width": "width",
}


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def emit_csv(header, rows, path) -> None:
    """Write a deterministic CSV: header row, 12-significant-digit cells,
    LF line endings, trailing newline."""
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(_csv_cell(cell) for cell in row))
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _write_report(result: ExperimentResult, report_path, as_json: bool) -> None:
    text = result.report_json() if as_json else result.report_text()
    if report_path is None:
        sys.stdout.write(text)
    else:
        Path(report_path).write_text(text, encoding="utf-8", newline="\n")


def _run_single(args) -> int:
    try:
        spec = parse_spec(args.spec)
    except (SpecParseError, SpecSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    expected_kind = _COMMAND_KINDS[args.command]
    if spec.kind != expected_kind:
        print(
            f"error: command {args.command!r} expects kind {expected_kind!r}, "
            f"but {args.spec} has kind {spec.kind!r}",
            file=sys.stderr,
        )
        return 1
    rng = np.random.default_rng(args.seed)
    try:
        result = run_experiment(spec, rng)
    except FrameToolkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    try:
        _write_report(result, args.report, args.json)
        csv_path = getattr(args, "csv", None)
        if csv_path is not None:
            if result.csv is None:
                print("error: this experiment kind produces no CSV", file=sys.stderr)
                return 1
            emit_csv(result.csv[0], result.csv[1], csv_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return result.exit_code


def bundled_fixture_names() -> list[str]:
    """Sorted names of the fixtures shipped inside the package."""
    root = resources.files("framesum") / "fixtures"
    return sorted(entry.name for entry in root.iterdir() if entry.name.endswith(".json"))


def load_bundled_fixture(name: str):
    root = resources.files("framesum") / "fixtures"
    return parse_spec_text((root / name).read_text(encoding="utf-8"), origin=name)


def _run_suite(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = bundled_fixture_names()
    extension = "json" if args.json else "txt"
    rows = []
    worst = 0
    for name in names:
        spec = load_bundled_fixture(name)
        rng = np.random.default_rng(args.seed)
        result = run_experiment(spec, rng)
        report_path = out_dir / f"{spec.label}.report.{extension}"
        report_path.write_text(
            result.report_json() if args.json else result.report_text(),
            encoding="utf-8",
            newline="\n",
        )
        if result.csv is not None:
            csv_name = result.csv_name or f"{spec.label}.csv"
            emit_csv(result.csv[0], result.csv[1], out_dir / csv_name)
        rows.append((spec.label, spec.kind, result.status))
        worst = max(worst, result.exit_code)
    label_width = max(len(r[0]) for r in rows)
    kind_width = max(len(r[1]) for r in rows)
    lines = [f"{'fixture':<{label_width}}  {'kind':<{kind_width}}  status"]
    for label, kind, status in rows:
        lines.append(f"{label:<{label_width}}  {kind:<{kind_width}}  {status}")
    counts = {status: sum(1 for r in rows if r[2] == status) for status in ("pass", "flagged", "fail")}
    lines.append(
        f"{counts['pass']} pass, {counts['flagged']} flagged, {counts['fail']} fail "
        f"out of {len(rows)} fixtures"
    )
    summary = "\n".join(lines) + "\n"
    sys.stdout.write(summary)
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8", newline="\n")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framesum",
        description="Frame bounds, sums-of-frames predictions with certification, "
        "window-based bound estimates, and the frame reconstruction algorithm.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for command, kind in _COMMAND_KINDS.items():
        p = sub.add_parser(command, help=f"run a {kind} experiment from a JSON file")
        p.add_argument("--spec", required=True, help="path to the experiment JSON file")
        p.add_argument("--report", default=None, help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
        p.add_argument("--json", action="store_true", help="emit a machine-readable report")
        if command == "algo":
            p.add_argument("--csv", default=None, help="write the per-iteration table as CSV")
        p.set_defaults(func=_run_single)

    suite = sub.add_parser("paper-suite", help="run every bundled fixture and summarize")
    suite.add_argument("--out", default="framesum-suite", help="output directory (default framesum-suite)")
    suite.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    suite.add_argument("--json", action="store_true", help="write JSON reports instead of text")
    suite.set_defaults(func=_run_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
