"""kinecoach command-line interface.

Subcommands: ingest, features, compare, feedback, validate, stats, run,
plot. See README.md for examples.
"""

import argparse
import glob as globmod
import json
import sys
from pathlib import Path

from .cohort_stats import load_samples_csv, run_cohort_analysis
from .compliance import check_feedback
from .errors import KinecoachError
from .feedback import build_context_summary, generate_feedback
from .grounding import compare_to_reference, load_reference_table
from .kinematics import FeatureReport, build_feature_report
from .pipeline import PipelineConfig, emit_dashboard_data, run_pipeline
from .skeleton_io import load_sequence, validate_sequence


def _add_input_args(p):
    p.add_argument("--input", required=True, help="motion file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--rate", type=float, default=None,
                   help="sample rate in Hz (default: file value or 60)")


def _load_report(path):
    with open(path, encoding="utf-8") as fh:
        return FeatureReport.from_dict(json.load(fh))


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_ingest(args):
    seq = load_sequence(args.input, fmt=args.format, sample_rate_hz=args.rate)
    metrics = validate_sequence(seq)
    if args.report:
        _print_json(metrics.to_dict())
    else:
        print(
            f"{seq.source_id}: {seq.frames} frames, {len(seq.joints)} joints, "
            f"{seq.sample_rate_hz:g} Hz"
        )
        for warning in seq.warnings:
            print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_features(args):
    seq = load_sequence(args.input, fmt=args.format, sample_rate_hz=args.rate)
    report = build_feature_report(seq, args.stroke, up_axis=args.up_axis)
    payload = report.to_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        _print_json(payload)
    return 0


def cmd_compare(args):
    report = _load_report(args.report)
    table = load_reference_table(args.ranges)
    findings = compare_to_reference(report, table)
    lines = [f.rendered for f in findings]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)
    for warning in table.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_feedback(args):
    report = _load_report(args.report)
    table = load_reference_table(args.ranges)
    findings = compare_to_reference(report, table)
    bundle = build_context_summary(report, findings)
    if args.dry_run:
        print("=== system ===")
        print(bundle.system_prompt)
        print("=== user ===")
        print(bundle.user_prompt)
        return 0
    result = generate_feedback(bundle)
    print(result.text)
    return 0 if result.ok else 1


def cmd_validate(args):
    report = _load_report(args.report)
    table = load_reference_table(args.ranges)
    findings = compare_to_reference(report, table)
    bundle = build_context_summary(report, findings)
    with open(args.feedback, encoding="utf-8") as fh:
        text = fh.read()
    result = check_feedback(text, bundle, findings)
    if args.json:
        _print_json(result.to_dict())
    else:
        for key, value in result.to_dict().items():
            print(f"{key}: {value}")
    return 0 if result.passed else 1


def cmd_stats(args):
    samples = load_samples_csv(args.samples)
    results = run_cohort_analysis(samples, plots_dir=args.plots)
    payload = {
        "features": {r.feature: r.to_dict() for r in results},
        "n_samples": len(samples),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        _print_json(payload)
    return 0


def cmd_run(args):
    inputs = list(args.inputs)
    if args.glob:
        inputs.extend(sorted(globmod.glob(args.glob)))
    if not inputs:
        print("error: no inputs (pass files or --glob)", file=sys.stderr)
        return 2
    config = PipelineConfig(
        inputs=inputs,
        fmt=args.format,
        sample_rate_hz=args.rate,
        up_axis=args.up_axis,
        ranges_path=args.ranges,
        out_dir=args.out,
        stroke=args.stroke,
        dry_run=args.dry_run,
        jobs=args.jobs,
    )
    return run_pipeline(config)


def cmd_plot(args):
    report = _load_report(args.report)
    written, notes = emit_dashboard_data(report, args.out)
    for note in notes:
        print(f"note: {note}")
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kinecoach",
        description="Biomechanical stroke reports and range-grounded coaching feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, map, and impute a motion file")
    _add_input_args(p)
    p.add_argument("--report", action="store_true", help="print validation metrics JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="compute the stroke feature report")
    _add_input_args(p)
    p.add_argument("--stroke", default=None, help="predicted stroke label")
    p.add_argument("--up-axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--out", default=None, help="write report JSON here")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("compare", help="compare a report against reference ranges")
    p.add_argument("--report", required=True)
    p.add_argument("--ranges", default=None, help="ranges JSON (default: bundled)")
    p.add_argument("--out", default=None, help="write findings here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("feedback", help="build the prompt and request feedback")
    p.add_argument("--report", required=True)
    p.add_argument("--ranges", default=None)
    p.add_argument("--dry-run", action="store_true",
                   help="print the prompt bundle and exit without network")
    p.set_defaults(func=cmd_feedback)

    p = sub.add_parser("validate", help="check feedback text against the constraints")
    p.add_argument("--feedback", required=True, help="feedback text file")
    p.add_argument("--report", required=True)
    p.add_argument("--ranges", default=None)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="expert-vs-beginner cohort statistics")
    p.add_argument("--samples", required=True, help="cohort CSV")
    p.add_argument("--out", default=None, help="write stats JSON here")
    p.add_argument("--plots", default=None, help="directory for box-plot CSVs")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="full pipeline over one or more inputs")
    p.add_argument("inputs", nargs="*", help="motion files")
    p.add_argument("--glob", default=None, help="glob pattern for batch inputs")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--up-axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--ranges", default=None)
    p.add_argument("--stroke", default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("plot", help="emit per-series CSV and SVG charts")
    p.add_argument("--report", required=True)
    p.add_argument("--out", default="plots")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except KinecoachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 1
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
