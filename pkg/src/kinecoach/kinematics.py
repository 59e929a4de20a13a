"""Biomechanical feature extraction from canonical skeleton sequences.

Derivatives use the central difference (x[t+1] - x[t-1]) / (2 dt), which
is exact for quadratic trajectories; angles use the three-point method
with a clamped dot product; trunk rotation is the unwrapped arctan2 of
the shoulder line's ground-plane components.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    DegenerateGeometryError,
    InsufficientFramesError,
    MissingEndEffectorError,
)
from .skeleton_io import validate_sequence

# Ground-plane component pairs (first, second) per up axis, so that
# theta = arctan2(second, first) and (first, second, up) is right-handed.
_GROUND_PLANE = {"z": (0, 1), "y": (2, 0), "x": (1, 2)}

# angle name -> (joint a, vertex b, joint c), per side
_SIDED_ANGLE_DEFS = (
    ("{s}_shoulder_flexion", ("{s}_hip", "{s}_shoulder", "{s}_elbow")),
    ("{s}_elbow_flexion", ("{s}_shoulder", "{s}_elbow", "{s}_wrist")),
    ("{s}_wrist_extension", ("{s}_elbow", "{s}_wrist", "{s}_hand")),
    ("{s}_hip_rotation", ("spine", "{s}_hip", "{s}_knee")),
    ("{s}_knee_flexion", ("{s}_hip", "{s}_knee", "{s}_ankle")),
)


def angle_definitions():
    """(angle name, joint triple) pairs for both sides, in fixed order."""
    defs = []
    for side in ("left", "right"):
        for name_tpl, triple in _SIDED_ANGLE_DEFS:
            name = name_tpl.format(s=side)
            defs.append((name, tuple(j.format(s=side) for j in triple)))
    return tuple(defs)


@dataclass
class TimeSeries:
    """A uniformly sampled series with its frame offset into the stroke."""

    values: np.ndarray
    dt: float
    start_frame: int = 0

    def __len__(self):
        return len(self.values)

    def to_dict(self):
        return {
            "values": [float(v) for v in self.values],
            "dt": self.dt,
            "start_frame": self.start_frame,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            values=np.asarray(d["values"], dtype=np.float64),
            dt=float(d["dt"]),
            start_frame=int(d.get("start_frame", 0)),
        )


def central_velocity(positions, dt):
    """Velocity over interior frames 1 .. T-2; needs T >= 3 and dt > 0."""
    p = np.asarray(positions, dtype=np.float64)
    if p.shape[0] < 3:
        raise InsufficientFramesError("central velocity needs at least 3 frames")
    return kernels.central_diff(p, dt)


def central_acceleration(positions, dt):
    """Second derivative: central difference applied to the velocity series.

    Covers frames 2 .. T-3 (length T - 4); needs T >= 5.
    """
    p = np.asarray(positions, dtype=np.float64)
    if p.shape[0] < 5:
        raise InsufficientFramesError("central acceleration needs at least 5 frames")
    return kernels.central_diff(kernels.central_diff(p, dt), dt)


def joint_angle(a, b, c):
    """Angle at vertex b between rays (a-b) and (c-b), in [0, pi]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    u = a - b
    w = c - b
    nu = math.sqrt(float(u @ u))
    nw = math.sqrt(float(w @ w))
    if nu < kernels.DEGENERATE_NORM or nw < kernels.DEGENERATE_NORM:
        raise DegenerateGeometryError(
            f"zero-length ray at vertex (|a-b|={nu:.3g}, |c-b|={nw:.3g})"
        )
    cosang = float(u @ w) / (nu * nw)
    return math.acos(max(-1.0, min(1.0, cosang)))


def _fill_series_gaps(values):
    """Apply the gap rule to a 1-D series with NaN gaps.

    Returns None when fewer than 2 frames are valid (the series is then
    omitted rather than fabricated).
    """
    finite = np.isfinite(values)
    if finite.sum() < 2:
        return None
    return kernels.fill_gaps(values)


def tennis_joint_angles(seq):
    """Per-frame series for each tennis angle whose joints are available.

    Frames with degenerate geometry become gaps and are filled with the
    linear interpolation rule; angles with fewer than 2 well-defined
    frames are omitted.
    """
    angles = {}
    for name, (ja, jb, jc) in angle_definitions():
        if not all(seq.has(j) for j in (ja, jb, jc)):
            continue
        series = kernels.angle_series(
            seq.positions_of(ja), seq.positions_of(jb), seq.positions_of(jc)
        )
        filled = _fill_series_gaps(series)
        if filled is None:
            continue
        angles[name] = TimeSeries(values=filled, dt=seq.dt, start_frame=0)
    return angles


def trunk_rotation(seq, up_axis="z"):
    """Unwrapped shoulder-line orientation, radians, one value per frame.

    The shoulder vector (right minus left) is projected onto the ground
    plane of ``up_axis``; frames where the projection is shorter than
    the degeneracy threshold are treated as gaps and interpolated.
    """
    if up_axis not in _GROUND_PLANE:
        raise ValueError(f"unknown up axis {up_axis!r}")
    if not (seq.has("left_shoulder") and seq.has("right_shoulder")):
        raise MissingEndEffectorError("trunk rotation needs both shoulders")
    i1, i2 = _GROUND_PLANE[up_axis]
    vec = seq.positions_of("right_shoulder") - seq.positions_of("left_shoulder")
    c1 = vec[:, i1]
    c2 = vec[:, i2]
    norm = np.hypot(c1, c2)
    raw = np.full(seq.frames, np.nan)
    ok = norm >= kernels.DEGENERATE_NORM
    raw[ok] = np.arctan2(c2[ok], c1[ok])
    valid_idx = np.flatnonzero(ok)
    if valid_idx.size < 2:
        raise DegenerateGeometryError("shoulders coincide in nearly every frame")
    # unwrap over the valid subsequence, then interpolate the gaps in
    # unwrapped space (interpolating wrapped angles would jump at +-pi)
    series = np.full(seq.frames, np.nan)
    series[valid_idx] = kernels.unwrap_angles(raw[valid_idx])
    return TimeSeries(values=kernels.fill_gaps(series), dt=seq.dt, start_frame=0)


def trunk_angular_velocity(theta):
    """Central difference of the unwrapped trunk-rotation series (rad/s)."""
    if len(theta.values) < 3:
        raise InsufficientFramesError("angular velocity needs at least 3 frames")
    return TimeSeries(
        values=kernels.central_diff(theta.values, theta.dt),
        dt=theta.dt,
        start_frame=theta.start_frame + 1,
    )


def resolve_racket_marker(seq):
    """Racket marker name and proxy flag: racket_tip, else right hand."""
    if seq.has("racket_tip"):
        return "racket_tip", False
    if seq.has("right_hand"):
        return "right_hand", True
    raise MissingEndEffectorError(
        "neither 'racket_tip' nor 'right_hand' is available"
    )


@dataclass
class RacketDynamics:
    speed: TimeSeries  # m/s, interior frames
    max_speed: float
    impact_frame: int
    impact_timing_pct: float
    peak_accel_mag: float
    marker: str
    proxy: bool


def racket_dynamics(seq):
    """Racket (or right-hand proxy) speed profile and impact detection.

    Impact is the frame with the largest acceleration magnitude,
    earliest on ties; needs T >= 5 because acceleration is the second
    central difference.
    """
    marker, proxy = resolve_racket_marker(seq)
    T = seq.frames
    if T < 5:
        raise InsufficientFramesError("impact detection needs at least 5 frames")
    pos = seq.positions_of(marker)
    vel = central_velocity(pos, seq.dt)
    speed = np.sqrt(np.sum(vel * vel, axis=1))
    accel = kernels.central_diff(vel, seq.dt)
    accel_mag = np.sqrt(np.sum(accel * accel, axis=1))
    rel = int(np.argmax(accel_mag))  # first occurrence wins ties
    impact_frame = 2 + rel
    return RacketDynamics(
        speed=TimeSeries(values=speed, dt=seq.dt, start_frame=1),
        max_speed=float(np.max(speed)),
        impact_frame=impact_frame,
        impact_timing_pct=100.0 * impact_frame / (T - 1),
        peak_accel_mag=float(accel_mag[rel]),
        marker=marker,
        proxy=proxy,
    )


def kinetic_chain_timing(speed, n_frames, start_frame=1):
    """Peak-speed timing as percent of the stroke, earliest frame on ties.

    ``speed`` may be a TimeSeries (its own start_frame wins) or a plain
    array interpreted as starting at ``start_frame``.
    """
    if isinstance(speed, TimeSeries):
        values = speed.values
        start_frame = speed.start_frame
    else:
        values = np.asarray(speed, dtype=np.float64)
    if values.size == 0:
        raise InsufficientFramesError("empty speed series")
    peak = start_frame + int(np.argmax(values))
    return 100.0 * peak / (n_frames - 1)


def segment_phases(n_frames):
    """Preparation / execution / follow-through frame ranges.

    Boundaries are floor(0.33 T) and floor(0.67 T), nudged minimally so
    every phase holds at least one frame (possible for any T >= 3).
    The three half-open ranges partition [0, T) exactly.
    """
    if n_frames < 3:
        raise InsufficientFramesError("phases need at least 3 frames")
    b1 = math.floor(0.33 * n_frames)
    b2 = math.floor(0.67 * n_frames)
    b1 = min(max(b1, 1), n_frames - 2)
    b2 = min(max(b2, b1 + 1), n_frames - 1)
    return {
        "preparation": (0, b1),
        "execution": (b1, b2),
        "follow_through": (b2, n_frames),
    }


def kinetic_energy(speed):
    """Unit-mass kinetic energy 0.5 * v^2 (joules per kilogram)."""
    if isinstance(speed, TimeSeries):
        return TimeSeries(
            values=0.5 * speed.values * speed.values,
            dt=speed.dt,
            start_frame=speed.start_frame,
        )
    v = np.asarray(speed, dtype=np.float64)
    return 0.5 * v * v


def peak_power(ke, dt=None):
    """Largest |dKE/dt| over the interior of the kinetic-energy series."""
    if isinstance(ke, TimeSeries):
        values, dt = ke.values, ke.dt
    else:
        values = np.asarray(ke, dtype=np.float64)
        if dt is None:
            raise ValueError("dt is required for a plain array")
    if values.shape[0] < 3:
        raise InsufficientFramesError("peak power needs at least 3 samples")
    return float(np.max(np.abs(kernels.central_diff(values, dt))))


def summary_stats(values):
    v = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(np.mean(v)),
        "std": float(np.std(v)),
        "min": float(np.min(v)),
        "max": float(np.max(v)),
    }


@dataclass
class FeatureReport:
    """Structured per-stroke feature dictionary.

    Scalars that could not be computed are None and the reason is
    recorded under ``metadata["omitted"]``.
    """

    predicted_stroke: str
    racket_velocity_max: float
    peak_power: float
    rotation_range_deg: float
    stroke_duration_frames: int
    stroke_duration_s: float
    peak_angular_velocity: float
    impact_timing_pct: float
    kinetic_chain_timing_pct: float
    joint_angles: dict = field(default_factory=dict)
    segment_speeds: dict = field(default_factory=dict)
    trunk_rotation: TimeSeries = None
    trunk_angular_velocity: TimeSeries = None
    racket_speed: TimeSeries = None
    racket_kinetic_energy: TimeSeries = None
    phases: dict = field(default_factory=dict)
    summary_stats: dict = field(default_factory=dict)
    validation: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def scalars(self):
        """The named scalar features, in their fixed order."""
        return {
            "predicted_stroke": self.predicted_stroke,
            "racket_velocity_max": self.racket_velocity_max,
            "peak_power": self.peak_power,
            "rotation_range_deg": self.rotation_range_deg,
            "stroke_duration_frames": self.stroke_duration_frames,
            "stroke_duration_s": self.stroke_duration_s,
            "peak_angular_velocity": self.peak_angular_velocity,
            "impact_timing_pct": self.impact_timing_pct,
            "kinetic_chain_timing_pct": self.kinetic_chain_timing_pct,
        }

    def raw_series(self):
        """Flat name -> TimeSeries map of every available raw series."""
        series = {}
        if self.trunk_rotation is not None:
            series["trunk_rotation"] = self.trunk_rotation
        if self.trunk_angular_velocity is not None:
            series["trunk_angular_velocity"] = self.trunk_angular_velocity
        if self.racket_speed is not None:
            series["racket_speed"] = self.racket_speed
        if self.racket_kinetic_energy is not None:
            series["racket_kinetic_energy"] = self.racket_kinetic_energy
        series.update(self.joint_angles)
        series.update(self.segment_speeds)
        return series

    def to_dict(self):
        d = self.scalars()
        d["raw"] = {
            "trunk_rotation": _series_dict(self.trunk_rotation),
            "trunk_angular_velocity": _series_dict(self.trunk_angular_velocity),
            "racket_speed": _series_dict(self.racket_speed),
            "racket_kinetic_energy": _series_dict(self.racket_kinetic_energy),
            "joint_angles": {k: v.to_dict() for k, v in self.joint_angles.items()},
            "segment_speeds": {k: v.to_dict() for k, v in self.segment_speeds.items()},
        }
        d["phases"] = {k: list(v) for k, v in self.phases.items()}
        d["summary_stats"] = self.summary_stats
        d["validation"] = self.validation
        d["metadata"] = self.metadata
        return d

    @classmethod
    def from_dict(cls, d):
        raw = d.get("raw", {})

        def series(key):
            entry = raw.get(key)
            return TimeSeries.from_dict(entry) if entry else None

        return cls(
            predicted_stroke=d.get("predicted_stroke"),
            racket_velocity_max=d.get("racket_velocity_max"),
            peak_power=d.get("peak_power"),
            rotation_range_deg=d.get("rotation_range_deg"),
            stroke_duration_frames=d.get("stroke_duration_frames"),
            stroke_duration_s=d.get("stroke_duration_s"),
            peak_angular_velocity=d.get("peak_angular_velocity"),
            impact_timing_pct=d.get("impact_timing_pct"),
            kinetic_chain_timing_pct=d.get("kinetic_chain_timing_pct"),
            joint_angles={
                k: TimeSeries.from_dict(v)
                for k, v in raw.get("joint_angles", {}).items()
            },
            segment_speeds={
                k: TimeSeries.from_dict(v)
                for k, v in raw.get("segment_speeds", {}).items()
            },
            trunk_rotation=series("trunk_rotation"),
            trunk_angular_velocity=series("trunk_angular_velocity"),
            racket_speed=series("racket_speed"),
            racket_kinetic_energy=series("racket_kinetic_energy"),
            phases={k: tuple(v) for k, v in d.get("phases", {}).items()},
            summary_stats=d.get("summary_stats", {}),
            validation=d.get("validation", {}),
            metadata=d.get("metadata", {}),
        )


def _series_dict(series):
    return series.to_dict() if series is not None else None


def build_feature_report(seq, predicted_stroke, up_axis="z"):
    """Assemble the full feature report for one stroke.

    Sub-features that cannot be computed (missing joints, too few
    frames) are omitted and noted under metadata["omitted"] instead of
    failing the report; only a missing end effector aborts.
    """
    T = seq.frames
    dt = seq.dt
    omitted = {}

    # racket / proxy dynamics (hard requirement: some end effector)
    marker, proxy = resolve_racket_marker(seq)
    dynamics = None
    try:
        dynamics = racket_dynamics(seq)
    except InsufficientFramesError as exc:
        omitted["impact_detection"] = str(exc)
    if dynamics is not None:
        speed = dynamics.speed
    else:
        vel = central_velocity(seq.positions_of(marker), dt)
        speed = TimeSeries(
            values=np.sqrt(np.sum(vel * vel, axis=1)), dt=dt, start_frame=1
        )
    ke = kinetic_energy(speed)
    try:
        power = peak_power(ke)
    except InsufficientFramesError as exc:
        power = None
        omitted["peak_power"] = str(exc)

    # trunk rotation features
    theta = omega = None
    rotation_range_deg = peak_angular = None
    try:
        theta = trunk_rotation(seq, up_axis=up_axis)
    except (MissingEndEffectorError, DegenerateGeometryError) as exc:
        omitted["trunk_rotation"] = str(exc)
    if theta is not None:
        rotation_range_deg = math.degrees(
            float(np.max(theta.values) - np.min(theta.values))
        )
        try:
            omega = trunk_angular_velocity(theta)
            peak_angular = float(np.max(np.abs(omega.values)))
        except InsufficientFramesError as exc:
            omitted["trunk_angular_velocity"] = str(exc)

    angles = tennis_joint_angles(seq)
    for name, triple in angle_definitions():
        missing = [j for j in triple if not seq.has(j)]
        if missing:
            omitted[f"angle:{name}"] = "missing " + ", ".join(missing)
        elif name not in angles:
            omitted[f"angle:{name}"] = "too few well-defined frames"

    segment_speeds = {}
    for joint in seq.joints:
        vel = central_velocity(seq.positions_of(joint), dt)
        segment_speeds[joint] = TimeSeries(
            values=np.sqrt(np.sum(vel * vel, axis=1)), dt=dt, start_frame=1
        )

    report = FeatureReport(
        predicted_stroke=predicted_stroke,
        racket_velocity_max=float(np.max(speed.values)),
        peak_power=power,
        rotation_range_deg=rotation_range_deg,
        stroke_duration_frames=T,
        stroke_duration_s=T / seq.sample_rate_hz,
        peak_angular_velocity=peak_angular,
        impact_timing_pct=dynamics.impact_timing_pct if dynamics else None,
        kinetic_chain_timing_pct=kinetic_chain_timing(speed, T),
        joint_angles=angles,
        segment_speeds=segment_speeds,
        trunk_rotation=theta,
        trunk_angular_velocity=omega,
        racket_speed=speed,
        racket_kinetic_energy=ke,
        phases=segment_phases(T),
        validation=validate_sequence(seq).to_dict(),
        metadata={
            "dimensions": {"frames": T, "joints": len(seq.joints)},
            "available_joints": list(seq.joints),
            "racket_marker": marker,
            "racket_proxy": proxy,
            "impact_frame": dynamics.impact_frame if dynamics else None,
            "peak_accel_mag": dynamics.peak_accel_mag if dynamics else None,
            "sample_rate_hz": seq.sample_rate_hz,
            "up_axis": up_axis,
            "source": seq.source_id,
            "omitted": omitted,
        },
    )
    report.summary_stats = {
        name: summary_stats(series.values) for name, series in report.raw_series().items()
    }
    return report
