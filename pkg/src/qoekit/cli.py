"""Command-line front end.

Subcommands: ``ahp elicit``, ``ahp weights``, ``mos``, ``trace gen``,
``trace analyze``, ``models list``.  Every command is deterministic given
its inputs (randomness is always seeded), report files are written
atomically, and JSON reports are stamped with the tool version and the
SHA-256 of each input so results stay traceable to the files that
produced them.

Exit codes: 0 success, 2 input validation, 3 I/O, 4 convergence failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from . import __version__, ahp, composite, emodel
from . import trace as tracemod

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONVERGENCE = 4

PROFILE_DIR_ENV = "QOEKIT_PROFILE_DIR"

DISPLAY_DP = 3
TABLE_DP = 2


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def stamp(payload: dict, inputs: list[str | Path]) -> dict:
    """Prefix a report payload with tool version and input hashes."""
    return {
        "tool": {"name": "qoekit", "version": __version__},
        "inputs": [
            {"path": str(p), "sha256": sha256_file(p)} for p in inputs
        ],
        **payload,
    }


class SessionStore:
    """Directory of stamped JSON documents with atomic writes."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def write_json(self, name: str, payload: dict) -> Path:
        path = self.directory / name
        atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.directory / name
        atomic_write_text(path, text)
        return path


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid config JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return data


def effective(flag, config: dict, key: str, default):
    """Precedence: CLI flag, then config file, then built-in default."""
    if flag is not None:
        return flag
    return config.get(key, default)


def resolve_profile(ident: str | None) -> emodel.CodecProfile:
    """Resolve a --profile value: built-in name, profile-dir name, or path."""
    if ident is None or ident.lower() in ("g729", "g.729"):
        return emodel.G729
    profile_dir = os.environ.get(PROFILE_DIR_ENV)
    if profile_dir and Path(profile_dir).is_dir():
        for candidate in sorted(Path(profile_dir).glob("*.json")):
            try:
                profile = emodel.load_profile(candidate)
            except (ValueError, OSError):
                continue
            if ident in (profile.name, candidate.stem):
                return profile
    if Path(ident).exists():
        return emodel.load_profile(ident)
    raise ValueError(
        f"unknown profile {ident!r}: not a built-in, not found under "
        f"${PROFILE_DIR_ENV}, and not a readable file"
    )


# ---------------------------------------------------------------------------
# ahp elicit

def parse_scale_entry(text: str) -> float:
    """Parse a 9-level scale entry: an integer 1..9 or a reciprocal '1/k'."""
    text = text.strip()
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{text!r} is not a valid scale entry") from None
    allowed = [Fraction(k) for k in range(1, 10)]
    allowed += [Fraction(1, k) for k in range(2, 10)]
    if value not in allowed:
        raise ValueError(
            f"{text!r} is not on the 1-9 scale (use 1..9 or reciprocals like 1/3)"
        )
    return float(value)


class _AnswerSource:
    """Uniform prompt/answer stream over an answers file or the terminal."""

    def __init__(self, answers_path: str | None) -> None:
        self.scripted = answers_path is not None
        self._lines: list[str] = []
        if answers_path is not None:
            raw = Path(answers_path).read_text(encoding="utf-8").splitlines()
            self._lines = [
                ln.strip() for ln in raw if ln.strip() and not ln.lstrip().startswith("#")
            ]
        self._pos = 0

    def ask(self, prompt: str, allow_empty: bool = False) -> str | None:
        """Next answer, or None when an optional prompt has no more input."""
        if self.scripted:
            if self._pos >= len(self._lines):
                if allow_empty:
                    return None
                raise ValueError("answers file ended before all pairs were judged")
            line = self._lines[self._pos]
            self._pos += 1
            print(f"{prompt}{line}")
            return line
        try:
            reply = input(prompt)
        except EOFError:
            if allow_empty:
                return None
            raise ValueError("input ended before all pairs were judged") from None
        return reply.strip() or (None if allow_empty else reply.strip())


def _echo_judgment_summary(js: ahp.JudgmentSet) -> ahp.ConsistencyReport:
    matrix = js.matrix()
    print_matrix_table(matrix, corner="Importance")
    weights, _ = ahp.column_average_weights(matrix)
    print(
        "weights: "
        + " ".join(f"{c}={w:.{DISPLAY_DP}f}" for c, w in weights.as_dict().items())
    )
    report = ahp.consistency(matrix)
    print(
        f"consistency: lambda_max={report.lambda_max:.{DISPLAY_DP}f} "
        f"CI={report.consistency_index:.{DISPLAY_DP}f} "
        f"CR={report.consistency_ratio:.{DISPLAY_DP}f} "
        f"acceptable={'yes' if report.acceptable else 'no'}"
    )
    return report


def cmd_ahp_elicit(args: argparse.Namespace) -> int:
    criteria = tuple(args.criteria)
    if len(criteria) < 2:
        raise ValueError("at least 2 criteria are required")
    if len(set(criteria)) != len(criteria):
        raise ValueError("criteria must be unique")
    if args.answers is None and not sys.stdin.isatty():
        raise ValueError(
            "stdin is not a terminal; use --answers FILE for scripted sessions"
        )
    source = _AnswerSource(args.answers)

    judgments: dict[tuple[str, str], float] = {}
    for a, b in combinations(criteria, 2):
        prompt = f"importance of {a} vs {b} [1..9 or 1/k]: "
        while True:
            reply = source.ask(prompt)
            try:
                judgments[(a, b)] = parse_scale_entry(reply)
                break
            except ValueError as exc:
                print(f"  {exc}")
                if source.scripted:
                    # A scripted session cannot recover interactively.
                    raise

    js = ahp.JudgmentSet(args.evaluator_id, criteria, judgments)
    report = _echo_judgment_summary(js)

    while report.consistency_ratio > ahp.CR_THRESHOLD:
        print(
            f"consistency ratio {report.consistency_ratio:.{DISPLAY_DP}f} exceeds "
            f"{ahp.CR_THRESHOLD}; you may revise a pair before saving"
        )
        reply = source.ask(
            "revise [criterion criterion value], or press Enter to save: ",
            allow_empty=True,
        )
        if not reply:
            break
        try:
            a, b, raw = reply.split()
            if (a, b) not in judgments and (b, a) in judgments:
                a, b = b, a
            if (a, b) not in judgments:
                raise ValueError(f"unknown pair {a!r}/{b!r}")
            judgments[(a, b)] = parse_scale_entry(raw)
        except ValueError as exc:
            print(f"  {exc}")
            continue
        js = ahp.JudgmentSet(args.evaluator_id, criteria, judgments)
        report = _echo_judgment_summary(js)

    atomic_write_text(
        args.out, json.dumps(ahp.judgments_to_dict(js), indent=2) + "\n"
    )
    print(f"saved judgment set to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ahp weights

def print_matrix_table(
    matrix: ahp.PairwiseMatrix, corner: str, dp: int = TABLE_DP
) -> None:
    _print_table(
        corner, matrix.criteria, matrix.criteria, matrix.cells.tolist(), dp
    )


def _print_table(corner, columns, row_labels, rows, dp, extra_col=None):
    header = [corner, *columns] + ([extra_col[0]] if extra_col else [])
    body = []
    for i, (label, row) in enumerate(zip(row_labels, rows)):
        cells = [f"{v:.{dp}f}" for v in row]
        if extra_col:
            cells.append(f"{extra_col[1][i]:.{dp}f}")
        body.append([label, *cells])
    widths = [max(len(r[c]) for r in [header, *body]) for c in range(len(header))]
    for r in [header, *body]:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())


def cmd_ahp_weights(args: argparse.Namespace) -> int:
    if args.matrix and args.judgments:
        raise ValueError("give either judgment files or --matrix, not both")
    inputs: list[Path]
    if args.matrix:
        matrix = ahp.read_matrix_csv(args.matrix)
        inputs = [Path(args.matrix)]
        aggregate_note = "pre-aggregated"
    elif args.judgments:
        sets = [ahp.read_judgments(p) for p in args.judgments]
        matrix = ahp.aggregate_judgments(sets, method=args.aggregate)
        inputs = [Path(p) for p in args.judgments]
        aggregate_note = args.aggregate
    else:
        raise ValueError("at least one judgment file (or --matrix) is required")

    col_weights, normalized = ahp.column_average_weights(matrix)
    if args.method == "column-average":
        weights = col_weights
    else:
        weights = ahp.eigenvector_weights(matrix)
    report = ahp.consistency(matrix)

    print_matrix_table(matrix, corner="Importance")
    print()
    _print_table(
        "Weight",
        matrix.criteria,
        matrix.criteria,
        normalized.tolist(),
        TABLE_DP,
        extra_col=("Average", list(weights.values)),
    )
    print()
    print(
        "weights: "
        + " ".join(f"{c}={w:.{TABLE_DP}f}" for c, w in weights.as_dict().items())
    )
    print(
        f"consistency: lambda_max={report.lambda_max:.{DISPLAY_DP}f} "
        f"CI={report.consistency_index:.{DISPLAY_DP}f} "
        f"CR={report.consistency_ratio:.{DISPLAY_DP}f} "
        f"acceptable={'yes' if report.acceptable else 'no'}"
    )

    payload = stamp(
        {
            "criteria": list(matrix.criteria),
            "aggregate": aggregate_note,
            "method": args.method,
            "matrix": matrix.cells.tolist(),
            "normalized": normalized.tolist(),
            "weights": list(weights.values),
            "consistency": {
                "lambda_max": report.lambda_max,
                "consistency_index": report.consistency_index,
                "consistency_ratio": report.consistency_ratio,
                "acceptable": report.acceptable,
            },
        },
        inputs,
    )
    if args.json:
        print(json.dumps(payload, indent=2))
    if args.out_dir:
        store = SessionStore(args.out_dir)
        store.write_json("weights.json", payload)
        store.write_text("matrix.csv", ahp.matrix_to_csv_text(matrix))
        store.write_text(
            "weights.csv",
            ahp.weight_table_to_csv_text(matrix.criteria, normalized, weights),
        )
        print(f"wrote weights.json, matrix.csv, weights.csv to {store.directory}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# mos

def _mos_payload(
    sample: composite.QosSample,
    model: composite.CompositeModel,
    profile: emodel.CodecProfile,
) -> dict:
    components = composite.component_mos(sample, profile)
    overall = composite.combine(model, components)
    return {
        "model": model.name,
        "profile": profile.name,
        "sample": {
            "loss_pct": sample.loss_pct,
            "delay_ms": sample.delay_ms,
            "jitter_ms": sample.jitter_ms,
        },
        "r_factors": dict(components.r_factors),
        "mos": {**{c: components[c] for c in model.criteria}, "overall": overall},
    }


def _format_mos_line(payload: dict) -> str:
    mos = payload["mos"]
    r = payload["r_factors"]
    parts = [f"mos_overall={mos['overall']:.{DISPLAY_DP}f}"]
    parts += [
        f"mos_{c}={mos[c]:.{DISPLAY_DP}f}" for c in ("loss", "delay", "jitter")
    ]
    parts += [
        f"r_{c}=" + ("n/a" if r[c] is None else f"{r[c]:.{DISPLAY_DP}f}")
        for c in ("loss", "delay", "jitter")
    ]
    parts.append(f"model={payload['model']}")
    parts.append(f"profile={payload['profile']}")
    return " ".join(parts)


def _load_models_config(path: str | None) -> None:
    if path:
        composite.load_models(path)


def _profile_with_overrides(args: argparse.Namespace, config: dict):
    profile = resolve_profile(effective(args.profile, config, "profile", None))
    overrides = {}
    if getattr(args, "jitter_h", None) is not None:
        overrides["pareto_h"] = args.jitter_h
    if getattr(args, "jitter_t", None) is not None:
        overrides["jitter_t_ms"] = args.jitter_t
    return replace(profile, **overrides) if overrides else profile


def cmd_mos(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _load_models_config(args.models_config)
    model = composite.get_model(
        effective(args.model, config, "model", "paper-5g-ahp")
    )
    profile = _profile_with_overrides(args, config)
    sample = composite.QosSample(args.loss, args.delay, args.jitter)
    payload = _mos_payload(sample, model, profile)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(_format_mos_line(payload))
    return EXIT_OK


# ---------------------------------------------------------------------------
# trace gen / trace analyze

def cmd_trace_gen(args: argparse.Namespace) -> int:
    spec = tracemod.load_impairment_spec(args.spec)
    trace = tracemod.generate(spec)
    out = Path(args.out)
    atomic_write_text(out, tracemod.trace_to_csv_text(trace))

    received = sum(1 for p in trace.packets if p.received)
    line = (
        f"wrote {len(trace.packets)} packets to {out} "
        f"(loss {tracemod.loss_rate(trace):.{DISPLAY_DP}f}%"
    )
    if received:
        line += f", mean delay {tracemod.mean_delay(trace):.{DISPLAY_DP}f} ms"
    if received >= 2:
        line += f", jitter {tracemod.jitter_rfc3550(trace):.{DISPLAY_DP}f} ms"
    print(line + ")")
    return EXIT_OK


REPORT_CSV_COLUMNS = (
    "window_id",
    "loss_pct",
    "delay_ms",
    "jitter_ms",
    "mos_loss",
    "mos_delay",
    "mos_jitter",
    "mos_overall",
)


def _csv_cell(value, dp: int = DISPLAY_DP) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{dp}f}"
    return str(value)


def cmd_trace_analyze(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _load_models_config(args.models_config)
    model = composite.get_model(
        effective(args.model, config, "model", "paper-5g-ahp")
    )
    profile = _profile_with_overrides(args, config)
    window_s = effective(args.window, config, "window_s", 10.0)

    trace = tracemod.read_trace(args.trace)
    metrics = tracemod.windows(trace, window_s, args.jitter_estimator)

    rows = []
    for wm in metrics:
        components = composite.component_mos(wm.sample, profile)
        overall = composite.combine(model, components)
        rows.append(
            {
                "window_id": wm.window_id,
                "start_ms": wm.start_ms,
                "end_ms": wm.end_ms,
                "expected": wm.packet_count,
                "received": wm.received_count,
                "lost": wm.lost_count,
                "partial": wm.partial,
                "loss_pct": wm.sample.loss_pct,
                "delay_ms": wm.sample.delay_ms,
                "jitter_ms": wm.sample.jitter_ms,
                "r_factors": dict(components.r_factors),
                "mos_loss": components["loss"],
                "mos_delay": components["delay"],
                "mos_jitter": components["jitter"],
                "mos_overall": overall,
            }
        )

    overall_values = [r["mos_overall"] for r in rows]
    payload = stamp(
        {
            "model": model.name,
            "profile": profile.name,
            "window_s": window_s,
            "jitter_estimator": args.jitter_estimator,
            "windows": rows,
            "summary": {
                "window_count": len(rows),
                "mean_mos": sum(overall_values) / len(overall_values),
                "min_mos": min(overall_values),
            },
        },
        [args.trace],
    )

    header = " ".join(REPORT_CSV_COLUMNS)
    print(header)
    for r in rows:
        print(
            " ".join(
                _csv_cell(r[c]) if r[c] is not None else "n/a"
                for c in REPORT_CSV_COLUMNS
            )
        )
    print(
        f"summary: windows={len(rows)} "
        f"mean_mos={payload['summary']['mean_mos']:.{DISPLAY_DP}f} "
        f"min_mos={payload['summary']['min_mos']:.{DISPLAY_DP}f}"
    )

    if args.out:
        atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")
        print(f"wrote report to {args.out}")
    if args.csv:
        lines = [",".join(REPORT_CSV_COLUMNS)]
        for r in rows:
            lines.append(",".join(_csv_cell(r[c]) for c in REPORT_CSV_COLUMNS))
        atomic_write_text(args.csv, "\n".join(lines) + "\n")
        print(f"wrote table to {args.csv}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# models list

def cmd_models_list(args: argparse.Namespace) -> int:
    _load_models_config(args.models_config)
    for model in composite.list_models():
        weights = " ".join(
            f"{c}={w:.{DISPLAY_DP}f}" for c, w in model.weights.as_dict().items()
        )
        print(f"{model.name} [{model.scale}] {weights}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qoekit",
        description=(
            "Derive QoE-model weights from pairwise judgments, score QoS "
            "samples on the MOS scale, and measure loss/delay/jitter from "
            "packet traces."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ahp = sub.add_parser("ahp", help="judgment elicitation and weighting")
    ahp_sub = p_ahp.add_subparsers(dest="subcommand", required=True)

    p_elicit = ahp_sub.add_parser(
        "elicit", help="interactively collect pairwise judgments"
    )
    p_elicit.add_argument(
        "--criteria", nargs="+", default=list(composite.VOICE_CRITERIA)
    )
    p_elicit.add_argument("--evaluator-id", required=True)
    p_elicit.add_argument("--out", required=True, help="judgment JSON to write")
    p_elicit.add_argument(
        "--answers", help="scripted answers file (one entry per line)"
    )
    p_elicit.set_defaults(func=cmd_ahp_elicit)

    p_weights = ahp_sub.add_parser(
        "weights", help="aggregate judgments and derive weights"
    )
    p_weights.add_argument("judgments", nargs="*", help="judgment JSON files")
    p_weights.add_argument("--matrix", help="pre-aggregated matrix CSV instead")
    p_weights.add_argument(
        "--aggregate",
        choices=ahp.AGGREGATION_METHODS,
        default="arithmetic-mean",
    )
    p_weights.add_argument(
        "--method", choices=ahp.WEIGHT_METHODS, default="column-average"
    )
    p_weights.add_argument("--out-dir", help="write weights.json + CSV tables here")
    p_weights.add_argument("--json", action="store_true", help="print full JSON")
    p_weights.set_defaults(func=cmd_ahp_weights)

    p_mos = sub.add_parser("mos", help="score one QoS sample")
    p_mos.add_argument("--loss", type=float, required=True, help="loss percent")
    p_mos.add_argument("--delay", type=float, required=True, help="one-way ms")
    p_mos.add_argument("--jitter", type=float, default=0.0, help="measured ms")
    p_mos.add_argument(
        "--jitter-h", type=float, help="override profile heavy-tail shape"
    )
    p_mos.add_argument(
        "--jitter-t", type=float, help="override profile buffer size (ms)"
    )
    p_mos.add_argument("--model")
    p_mos.add_argument("--profile")
    p_mos.add_argument("--models-config")
    p_mos.add_argument("--config")
    p_mos.add_argument("--json", action="store_true")
    p_mos.set_defaults(func=cmd_mos)

    p_trace = sub.add_parser("trace", help="generate or analyze packet traces")
    trace_sub = p_trace.add_subparsers(dest="subcommand", required=True)

    p_gen = trace_sub.add_parser("gen", help="generate an impairment trace")
    p_gen.add_argument("spec", help="impairment spec JSON")
    p_gen.add_argument("--out", required=True, help="trace CSV to write")
    p_gen.set_defaults(func=cmd_trace_gen)

    p_analyze = trace_sub.add_parser(
        "analyze", help="windowed metrics and MOS for a trace"
    )
    p_analyze.add_argument("trace", help="trace CSV")
    p_analyze.add_argument("--window", type=float, help="window length (s)")
    p_analyze.add_argument(
        "--jitter-estimator",
        choices=tracemod.JITTER_ESTIMATORS,
        default="rfc3550",
    )
    p_analyze.add_argument("--model")
    p_analyze.add_argument("--profile")
    p_analyze.add_argument(
        "--jitter-h", type=float, help="override profile heavy-tail shape"
    )
    p_analyze.add_argument(
        "--jitter-t", type=float, help="override profile buffer size (ms)"
    )
    p_analyze.add_argument("--models-config")
    p_analyze.add_argument("--config")
    p_analyze.add_argument("--out", help="report JSON to write")
    p_analyze.add_argument("--csv", help="plot-ready CSV table to write")
    p_analyze.set_defaults(func=cmd_trace_analyze)

    p_models = sub.add_parser("models", help="model registry")
    models_sub = p_models.add_subparsers(dest="subcommand", required=True)
    p_list = models_sub.add_parser("list", help="list registered models")
    p_list.add_argument("--models-config")
    p_list.set_defaults(func=cmd_models_list)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ahp.ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
