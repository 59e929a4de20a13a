"""End-to-end pipeline: ingest -> features -> grounding -> feedback ->
compliance, with per-stroke artifact directories and a batch summary.

Each input stroke gets its own directory under the output root, so
concurrent strokes never contend for a file. A per-stroke failure is
recorded in the summary and does not abort the batch.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .compliance import check_feedback
from .errors import KinecoachError
from .feedback import build_context_summary, generate_feedback
from .grounding import compare_to_reference, load_reference_table
from .kinematics import build_feature_report
from .skeleton_io import load_sequence


@dataclass
class PipelineConfig:
    inputs: list
    fmt: str = "csv"
    sample_rate_hz: float = None  # None: file value or 60
    up_axis: str = "z"
    ranges_path: str = None  # None: bundled default table
    out_dir: str = "out"
    stroke: str = None  # predicted label applied to every input
    dry_run: bool = False
    jobs: int = 1
    env: dict = field(default_factory=dict)  # overrides os.environ in tests


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _unique_stems(paths):
    """Deterministic per-input directory names, deduplicated."""
    stems = {}
    counts = {}
    for path in paths:
        stem = Path(path).stem
        n = counts.get(stem, 0) + 1
        counts[stem] = n
        stems[str(path)] = stem if n == 1 else f"{stem}_{n}"
    return stems


def process_stroke(path, stem, config, table):
    """Run one input through the full chain, writing its artifact dir."""
    stroke_dir = Path(config.out_dir) / stem
    stroke_dir.mkdir(parents=True, exist_ok=True)
    record = {"source": stem, "input": str(path), "ok": False, "error": None,
              "feedback_ok": None, "compliance_pass": None}
    try:
        seq = load_sequence(path, fmt=config.fmt, sample_rate_hz=config.sample_rate_hz)
        report = build_feature_report(seq, config.stroke, up_axis=config.up_axis)
        _dump_json(stroke_dir / "report.json", report.to_dict())

        findings = compare_to_reference(report, table)
        with open(stroke_dir / "findings.txt", "w", encoding="utf-8") as fh:
            for finding in findings:
                fh.write(finding.rendered + "\n")

        bundle = build_context_summary(report, findings)
        with open(stroke_dir / "prompt.txt", "w", encoding="utf-8") as fh:
            fh.write("=== system ===\n")
            fh.write(bundle.system_prompt + "\n")
            fh.write("=== user ===\n")
            fh.write(bundle.user_prompt + "\n")

        if config.dry_run:
            _dump_json(
                stroke_dir / "compliance.json",
                {"skipped": "dry-run: no feedback to validate"},
            )
        else:
            result = generate_feedback(bundle, env=config.env or None)
            record["feedback_ok"] = result.ok
            with open(stroke_dir / "feedback.txt", "w", encoding="utf-8") as fh:
                fh.write(result.text + "\n")
            if result.ok:
                compliance = check_feedback(result.text, bundle, findings)
                _dump_json(stroke_dir / "compliance.json", compliance.to_dict())
                record["compliance_pass"] = compliance.passed
            else:
                _dump_json(
                    stroke_dir / "compliance.json",
                    {"skipped": f"feedback unavailable: {result.text}"},
                )
        record["ok"] = True
    except (KinecoachError, OSError) as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
        with open(stroke_dir / "error.txt", "w", encoding="utf-8") as fh:
            fh.write(record["error"] + "\n")
    return record


def run_pipeline(config):
    """Process every input; returns the process exit code.

    Exit code 0 means zero hard failures (feedback-API errors are
    handled outcomes, not hard failures).
    """
    table = load_reference_table(config.ranges_path)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stems = _unique_stems(config.inputs)
    inputs = sorted(config.inputs, key=lambda p: stems[str(p)])
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(
                pool.map(lambda p: process_stroke(p, stems[str(p)], config, table), inputs)
            )
    else:
        records = [process_stroke(p, stems[str(p)], config, table) for p in inputs]
    records.sort(key=lambda r: r["source"])
    failures = sum(1 for r in records if not r["ok"])
    _dump_json(
        out_dir / "summary.json",
        {"strokes": records, "hard_failures": failures, "dry_run": config.dry_run},
    )
    return 0 if failures == 0 else 1


# --- dashboard data (per-series CSV + minimal SVG line charts) ---------

SVG_WIDTH = 640
SVG_HEIGHT = 240
SVG_MARGIN = 42


def _svg_line_chart(xs, ys, title):
    """A minimal polyline chart with axes and min/max tick labels."""
    x_lo, x_hi = float(min(xs)), float(max(xs))
    y_lo, y_hi = float(min(ys)), float(max(ys))
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:  # flat series: pad so the line sits mid-chart
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    plot_w = SVG_WIDTH - 2 * SVG_MARGIN
    plot_h = SVG_HEIGHT - 2 * SVG_MARGIN

    def px(x):
        return SVG_MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return SVG_HEIGHT - SVG_MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h

    points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    left, right = SVG_MARGIN, SVG_WIDTH - SVG_MARGIN
    top, bottom = SVG_MARGIN, SVG_HEIGHT - SVG_MARGIN
    return "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" '
            f'height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
            f'<text x="{SVG_WIDTH / 2:.0f}" y="16" text-anchor="middle" '
            f'font-size="12" font-family="sans-serif">{title}</text>',
            f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" '
            'stroke="black" stroke-width="1"/>',
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" '
            'stroke="black" stroke-width="1"/>',
            f'<text x="{left}" y="{bottom + 14}" font-size="10" '
            f'font-family="sans-serif">{x_lo:g}</text>',
            f'<text x="{right}" y="{bottom + 14}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{x_hi:g}</text>',
            f'<text x="{left - 4}" y="{bottom}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{y_lo:.3g}</text>',
            f'<text x="{left - 4}" y="{top + 4}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{y_hi:.3g}</text>',
            f'<polyline fill="none" stroke="#2266cc" stroke-width="1.5" '
            f'points="{points}"/>',
            "</svg>",
        ]
    )


def emit_dashboard_data(report, out_dir):
    """One (frame,value) CSV and one SVG line chart per raw series.

    Returns (written paths, notes); a missing series is skipped with a
    note instead of failing.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    notes = []
    series_map = report.raw_series() if hasattr(report, "raw_series") else dict(report)
    for name in ("trunk_rotation", "trunk_angular_velocity", "racket_speed",
                 "racket_kinetic_energy"):
        if name not in series_map:
            notes.append(f"series '{name}' unavailable; skipped")
    for name, series in series_map.items():
        frames = [series.start_frame + i for i in range(len(series.values))]
        values = [float(v) for v in series.values]
        csv_path = out_dir / f"series_{name}.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("frame,value\n")
            for frame, value in zip(frames, values):
                fh.write(f"{frame},{value!r}\n")
        svg_path = out_dir / f"series_{name}.svg"
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(_svg_line_chart(frames, values, name) + "\n")
        written.extend([csv_path, svg_path])
    return written, notes
