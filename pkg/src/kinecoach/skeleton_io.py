"""Ingest, validate, repair, and canonicalize raw 3D joint trajectories.

Two durable input formats are supported:

* long-form CSV with header ``frame,joint,x,y,z`` where an empty x/y/z
  cell marks the observation invalid;
* wide JSON ``{"sample_rate_hz": 60, "joints": [...], "frames":
  [[[x,y,z]|null, ...], ...]}`` where ``null`` marks a missing
  joint-frame.

Joint names are normalized into a fixed canonical vocabulary; gaps are
filled by per-coordinate linear interpolation (edges hold the nearest
valid value).
"""

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    AmbiguousJointError,
    DuplicateObservationError,
    ImputationError,
    ParseError,
)

CANONICAL_JOINTS = (
    "head",
    "neck",
    "spine",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hand",
    "right_hand",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
    "racket_tip",
)

_CENTER_BASES = {
    "head": "head",
    "neck": "neck",
    "spine": "spine",
    "rackettip": "racket_tip",
    "racket": "racket_tip",
}
_SIDED_BASES = ("shoulder", "elbow", "wrist", "hand", "hip", "knee", "ankle")
_SIDE_TOKENS = {"l": "left", "left": "left", "r": "right", "right": "right"}

_CAMEL_RE = re.compile(r"(?<=[a-zA-Z0-9])(?=[A-Z][a-z])")
_SPLIT_RE = re.compile(r"[^a-z0-9]+")

_NAN = float("nan")


def canonical_joint_name(raw, extra_aliases=None):
    """Map a raw joint label to the canonical vocabulary, or return None.

    Normalization is deterministic: camelCase boundaries become
    separators, everything is lowercased, separators are stripped, and
    l/left/r/right side tokens are resolved whether prefix or suffix
    (separated or fused, as in "RShoulder", "shoulder_r", "rshoulder").
    ``extra_aliases`` may extend the vocabulary with exact-match
    normalized names (e.g. {"pelvis": "spine"}).
    """
    s = _CAMEL_RE.sub("_", str(raw).strip()).lower()
    tokens = [t for t in _SPLIT_RE.split(s) if t]
    if not tokens:
        return None
    side = None
    rest = tokens
    if len(tokens) > 1 and tokens[0] in _SIDE_TOKENS:
        side, rest = _SIDE_TOKENS[tokens[0]], tokens[1:]
    elif len(tokens) > 1 and tokens[-1] in _SIDE_TOKENS:
        side, rest = _SIDE_TOKENS[tokens[-1]], tokens[:-1]
    base = "".join(rest)
    if extra_aliases and base in extra_aliases and side is None:
        return extra_aliases[base]
    if side is not None:
        if base in _SIDED_BASES:
            return f"{side}_{base}"
        return None
    if base in _CENTER_BASES:
        return _CENTER_BASES[base]
    # fused side prefix/suffix without separators, longest token first
    for tok in ("left", "right", "l", "r"):
        if base.startswith(tok) and base[len(tok):] in _SIDED_BASES:
            return f"{_SIDE_TOKENS[tok]}_{base[len(tok):]}"
        if base.endswith(tok) and base[: -len(tok)] in _SIDED_BASES:
            return f"{_SIDE_TOKENS[tok]}_{base[: -len(tok)]}"
    return None


@dataclass
class RawMotionTable:
    """Long-form observations: one row per (frame, joint)."""

    rows: list  # (frame: int, joint: str, x, y, z, valid: bool)
    sample_rate_hz: float = 60.0
    source_id: str = ""
    warnings: list = field(default_factory=list)

    def frame_indices(self):
        return sorted({r[0] for r in self.rows})

    def joint_names(self):
        seen = {}
        for r in self.rows:
            seen.setdefault(r[1], None)
        return list(seen)


@dataclass
class SkeletonSequence:
    """Canonical, gap-free joint trajectories (frames x joints x 3)."""

    joints: tuple
    positions: np.ndarray  # (T, J, 3), float64, all finite
    sample_rate_hz: float
    source_id: str = ""
    imputed: np.ndarray = None  # (T, J) bool, True where a value was filled
    warnings: tuple = ()

    @property
    def frames(self):
        return int(self.positions.shape[0])

    @property
    def dt(self):
        return 1.0 / self.sample_rate_hz

    def has(self, joint):
        return joint in self.joints

    def positions_of(self, joint):
        """(T, 3) trajectory of one joint."""
        return self.positions[:, self.joints.index(joint), :]


@dataclass
class ValidationMetrics:
    """Data-quality report for a sequence; never mutates it."""

    frames: int
    imputed_fraction: dict
    available_joints: tuple
    missing_joints: tuple
    warnings: tuple = ()

    def to_dict(self):
        return {
            "frames": self.frames,
            "imputed_fraction": dict(self.imputed_fraction),
            "available_joints": list(self.available_joints),
            "missing_joints": list(self.missing_joints),
            "warnings": list(self.warnings),
        }


def _parse_csv(path, sample_rate_hz):
    expected = ["frame", "joint", "x", "y", "z"]
    rows = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file")
        if [h.strip().lower() for h in header] != expected:
            raise ParseError(f"expected header {','.join(expected)}", line=1)
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not cell.strip() for cell in rec):
                continue
            if len(rec) != 5:
                raise ParseError(f"expected 5 columns, got {len(rec)}", line=lineno)
            try:
                frame = int(rec[0])
            except ValueError:
                raise ParseError(f"bad frame index {rec[0]!r}", line=lineno) from None
            if frame < 0:
                raise ParseError(f"negative frame index {frame}", line=lineno)
            joint = rec[1].strip()
            if not joint:
                raise ParseError("empty joint name", line=lineno)
            coords = []
            valid = True
            for cell in rec[2:5]:
                cell = cell.strip()
                if not cell:
                    valid = False
                    coords.append(_NAN)
                    continue
                try:
                    val = float(cell)
                except ValueError:
                    raise ParseError(f"bad coordinate {cell!r}", line=lineno) from None
                if not math.isfinite(val):
                    valid = False
                    val = _NAN
                coords.append(val)
            if not valid:
                coords = [_NAN, _NAN, _NAN]
            key = (frame, joint)
            if key in seen:
                raise DuplicateObservationError(
                    f"duplicate observation for joint {joint!r} at frame {frame}",
                    line=lineno,
                )
            seen.add(key)
            rows.append((frame, joint, coords[0], coords[1], coords[2], valid))
    return rows, (sample_rate_hz if sample_rate_hz is not None else 60.0)


def _parse_json(path, sample_rate_hz):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    joints = doc.get("joints")
    frames = doc.get("frames")
    if not isinstance(joints, list) or not all(isinstance(j, str) and j for j in joints):
        raise ParseError("'joints' must be a list of non-empty names")
    dup = {j for j in joints if joints.count(j) > 1}
    if dup:
        raise DuplicateObservationError(f"duplicate joints in 'joints': {sorted(dup)}")
    if not isinstance(frames, list):
        raise ParseError("'frames' must be a list")
    rows = []
    for t, frame in enumerate(frames):
        if not isinstance(frame, list) or len(frame) != len(joints):
            raise ParseError(f"frame {t}: expected {len(joints)} joint entries")
        for j, entry in enumerate(frame):
            if entry is None:
                rows.append((t, joints[j], _NAN, _NAN, _NAN, False))
                continue
            if not isinstance(entry, list) or len(entry) != 3:
                raise ParseError(f"frame {t}, joint {joints[j]!r}: expected [x,y,z] or null")
            coords = []
            valid = True
            for comp in entry:
                if isinstance(comp, (int, float)) and math.isfinite(comp):
                    coords.append(float(comp))
                else:
                    valid = False
                    coords.append(_NAN)
            if not valid:
                coords = [_NAN, _NAN, _NAN]
            rows.append((t, joints[j], coords[0], coords[1], coords[2], valid))
    rate = sample_rate_hz if sample_rate_hz is not None else doc.get("sample_rate_hz", 60.0)
    return rows, float(rate)


def parse_motion_file(path, fmt="csv", sample_rate_hz=None):
    """Read a motion file into a RawMotionTable.

    ``sample_rate_hz=None`` means: use the file's own rate (JSON) or
    the 60 Hz default (CSV). An explicit rate always wins.
    """
    path = Path(path)
    if fmt == "csv":
        rows, rate = _parse_csv(path, sample_rate_hz)
    elif fmt == "json":
        rows, rate = _parse_json(path, sample_rate_hz)
    else:
        raise ParseError(f"unknown format {fmt!r} (expected 'csv' or 'json')")
    if not rows:
        raise ParseError("no observations in file")
    if rate <= 0:
        raise ParseError(f"sample rate must be positive, got {rate}")
    if len({r[0] for r in rows}) < 3:
        raise ParseError("need at least 3 distinct frames")
    return RawMotionTable(rows=rows, sample_rate_hz=rate, source_id=path.stem)


def map_joints(table, extra_aliases=None):
    """Replace joint names by canonical vocabulary names.

    Unmapped joints are dropped and recorded in the returned table's
    warnings. Two distinct input names resolving to the same canonical
    joint within one frame raise AmbiguousJointError.
    """
    mapping = {}
    for name in table.joint_names():
        mapping[name] = canonical_joint_name(name, extra_aliases)
    unmapped = sorted(name for name, canon in mapping.items() if canon is None)
    rows = []
    claimed = {}  # (frame, canonical) -> raw name
    for frame, joint, x, y, z, valid in table.rows:
        canon = mapping[joint]
        if canon is None:
            continue
        prev = claimed.get((frame, canon))
        if prev is not None and prev != joint:
            raise AmbiguousJointError(
                f"{prev!r} and {joint!r} both map to {canon!r} at frame {frame}"
            )
        claimed[(frame, canon)] = joint
        rows.append((frame, canon, x, y, z, valid))
    warnings = list(table.warnings)
    warnings.extend(f"unmapped joint {name!r} dropped" for name in unmapped)
    return RawMotionTable(
        rows=rows,
        sample_rate_hz=table.sample_rate_hz,
        source_id=table.source_id,
        warnings=warnings,
    )


def impute_gaps(table):
    """Fill every gap and assemble the SkeletonSequence.

    Interior gaps are linearly interpolated per coordinate between the
    nearest valid frames; leading/trailing gaps hold the nearest valid
    value. A joint with fewer than 2 valid frames raises
    ImputationError.
    """
    frames = table.frame_indices()
    if len(frames) < 3:
        raise ImputationError("need at least 3 distinct frames")
    index_of = {f: i for i, f in enumerate(frames)}
    names = table.joint_names()
    joints = tuple(j for j in CANONICAL_JOINTS if j in names) + tuple(
        sorted(n for n in names if n not in CANONICAL_JOINTS)
    )
    jindex = {j: k for k, j in enumerate(joints)}
    T, J = len(frames), len(joints)
    pos = np.full((T, J, 3), np.nan)
    observed = np.zeros((T, J), dtype=bool)
    for frame, joint, x, y, z, valid in table.rows:
        t, j = index_of[frame], jindex[joint]
        if valid:
            pos[t, j, 0] = x
            pos[t, j, 1] = y
            pos[t, j, 2] = z
            observed[t, j] = True
    for j, name in enumerate(joints):
        n_valid = int(observed[:, j].sum())
        if n_valid < 2:
            raise ImputationError(
                f"joint {name!r} has {n_valid} valid frame(s); need at least 2"
            )
        pos[:, j, :] = kernels.fill_gaps(pos[:, j, :])
    return SkeletonSequence(
        joints=joints,
        positions=pos,
        sample_rate_hz=table.sample_rate_hz,
        source_id=table.source_id,
        imputed=~observed,
        warnings=tuple(table.warnings),
    )


def validate_sequence(seq):
    """Report per-joint imputed fractions and joint coverage."""
    T = seq.frames
    fractions = {}
    for k, name in enumerate(seq.joints):
        filled = int(seq.imputed[:, k].sum()) if seq.imputed is not None else 0
        fractions[name] = filled / T
    missing = tuple(j for j in CANONICAL_JOINTS if j not in seq.joints)
    return ValidationMetrics(
        frames=T,
        imputed_fraction=fractions,
        available_joints=tuple(seq.joints),
        missing_joints=missing,
        warnings=tuple(seq.warnings),
    )


def load_sequence(path, fmt="csv", sample_rate_hz=None, extra_aliases=None):
    """parse -> map -> impute in one call."""
    table = parse_motion_file(path, fmt=fmt, sample_rate_hz=sample_rate_hz)
    return impute_gaps(map_joints(table, extra_aliases))
