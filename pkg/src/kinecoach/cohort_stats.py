"""Expert-vs-beginner comparison over the four scalar stroke features.

Test selection follows a normality rule: Shapiro-Wilk (Royston's
approximation) on each group at alpha = 0.05; when both groups look
normal a Welch two-sample t-test is used, otherwise Mann-Whitney U with
normal approximation, midrank tie correction, and continuity
correction. Effect sizes are Cohen's d with the pooled
(Bessel-corrected) standard deviation. All tests are two-sided.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri, stdtr

from . import kernels
from .errors import ConfigError, DegenerateSampleError

COHORT_FEATURES = (
    "racket_velocity_max",
    "rotation_range_deg",
    "peak_angular_velocity",
    "stroke_duration_s",
)
GROUPS = ("expert", "beginner")
NORMALITY_ALPHA = 0.05


@dataclass
class CohortSample:
    group: str
    source_id: str
    values: dict  # feature -> float


@dataclass
class FeatureStats:
    feature: str
    test_used: str  # "welch-t" | "mann-whitney-u"
    statistic: float
    p_value: float
    cohens_d: float
    n_expert: int
    n_beginner: int
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "feature": self.feature,
            "test_used": self.test_used,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "cohens_d": self.cohens_d,
            "n_expert": self.n_expert,
            "n_beginner": self.n_beginner,
            "warnings": list(self.warnings),
        }


def _as_array(x, name="sample"):
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        a = a.ravel()
    if not np.all(np.isfinite(a)):
        raise DegenerateSampleError(f"{name} contains non-finite values")
    return a


def _normal_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def cohens_d(a, b):
    """Standardized mean difference (mean(a) - mean(b)) / pooled sd."""
    a, b = _as_array(a), _as_array(b)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise DegenerateSampleError("cohens_d needs at least 2 values per group")
    s1, s2 = np.var(a, ddof=1), np.var(b, ddof=1)
    pooled = math.sqrt(((n1 - 1) * s1 + (n2 - 1) * s2) / (n1 + n2 - 2))
    if pooled == 0.0:
        raise DegenerateSampleError("pooled variance is zero")
    return float((np.mean(a) - np.mean(b)) / pooled)


def welch_t(a, b):
    """Welch's unequal-variance t-test; returns (statistic, two-sided p)."""
    a, b = _as_array(a), _as_array(b)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise DegenerateSampleError("welch_t needs at least 2 values per group")
    v1, v2 = np.var(a, ddof=1) / n1, np.var(b, ddof=1) / n2
    if v1 + v2 == 0.0:
        raise DegenerateSampleError("both groups have zero variance")
    t = float((np.mean(a) - np.mean(b)) / math.sqrt(v1 + v2))
    df = (v1 + v2) ** 2 / (v1**2 / (n1 - 1) + v2**2 / (n2 - 1))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return t, min(1.0, p)


def _midranks(values):
    """Fractional ranks (ties get the mean rank) and tie counts."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    ties = []
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        ties.append(j - i + 1)
        i = j + 1
    return ranks, np.asarray(ties, dtype=np.float64)


def mann_whitney_u(a, b):
    """Mann-Whitney U (pairwise wins of a over b, ties count 0.5).

    p is two-sided via the normal approximation with midrank tie
    correction and a 0.5 continuity correction on the larger U.
    """
    a, b = _as_array(a), _as_array(b)
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise DegenerateSampleError("mann_whitney_u needs non-empty groups")
    ranks, ties = _midranks(np.concatenate([a, b]))
    r1 = float(np.sum(ranks[:n1]))
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    n = n1 + n2
    tie_term = float(np.sum(ties**3 - ties))
    sigma_sq = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0.0:
        # every value identical: no evidence either way
        return u1, 1.0
    z = (max(u1, u2) - n1 * n2 / 2.0 - 0.5) / math.sqrt(sigma_sq)
    p = 2.0 * _normal_sf(z)
    return u1, min(1.0, p)


def shapiro_wilk(x):
    """Shapiro-Wilk W and p-value (Royston's approximation), 3 <= n <= 5000."""
    x = np.sort(_as_array(x))
    n = len(x)
    if n < 3:
        raise DegenerateSampleError("shapiro_wilk needs at least 3 values")
    if n > 5000:
        raise DegenerateSampleError("shapiro_wilk supports at most 5000 values")
    if x[-1] == x[0]:
        raise DegenerateSampleError("all values identical")
    m = ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    mm = float(m @ m)
    c = m / math.sqrt(mm)
    u = 1.0 / math.sqrt(n)
    a = np.empty(n)
    if n == 3:
        a[0], a[1], a[2] = -math.sqrt(0.5), 0.0, math.sqrt(0.5)
    else:
        an = (
            -2.706056 * u**5
            + 4.434685 * u**4
            - 2.071190 * u**3
            - 0.147981 * u**2
            + 0.221157 * u
            + c[-1]
        )
        if n > 5:
            anm1 = (
                -3.582633 * u**5
                + 5.682633 * u**4
                - 1.752461 * u**3
                - 0.293762 * u**2
                + 0.042981 * u
                + c[-2]
            )
            phi = (mm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
                1.0 - 2.0 * an**2 - 2.0 * anm1**2
            )
            a[2:-2] = m[2:-2] / math.sqrt(phi)
            a[-1], a[-2] = an, anm1
            a[0], a[1] = -an, -anm1
        else:
            phi = (mm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * an**2)
            a[1:-1] = m[1:-1] / math.sqrt(phi)
            a[-1] = an
            a[0] = -an
    w = float(a @ x) ** 2 / float(np.sum((x - np.mean(x)) ** 2))
    w = min(w, 1.0)
    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return w, min(1.0, max(0.0, p))
    if n <= 11:
        g = -2.273 + 0.459 * n
        mu = 0.5440 - 0.39978 * n + 0.025054 * n**2 - 0.0006714 * n**3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n**2 - 0.0020322 * n**3)
        if g - math.log1p(-w) <= 0.0:
            return w, 0.0
        z = (-math.log(g - math.log1p(-w)) - mu) / sigma
    else:
        ln_n = math.log(n)
        mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n**2 + 0.0038915 * ln_n**3
        sigma = math.exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n**2)
        z = (math.log1p(-w) - mu) / sigma
    return w, min(1.0, max(0.0, _normal_sf(z)))


def choose_test(a, b, alpha=NORMALITY_ALPHA):
    """Pick the comparison test from per-group normality.

    Returns (name, warnings). Groups too small for the normality
    approximation (or with zero variance) fall back to Mann-Whitney U.
    """
    warnings = []
    for label, x in (("a", a), ("b", b)):
        x = np.asarray(x, dtype=np.float64)
        if len(x) < 3:
            warnings.append(
                f"group {label} has n={len(x)} < 3; defaulting to mann-whitney-u"
            )
            return "mann-whitney-u", warnings
    try:
        _, p_a = shapiro_wilk(a)
        _, p_b = shapiro_wilk(b)
    except DegenerateSampleError as exc:
        warnings.append(f"normality test unavailable ({exc}); using mann-whitney-u")
        return "mann-whitney-u", warnings
    if p_a > alpha and p_b > alpha:
        return "welch-t", warnings
    return "mann-whitney-u", warnings


@dataclass
class AlignedSeries:
    """Rotation series unwrapped and shifted so impact sits at offset 0."""

    offsets: np.ndarray  # (L,) ints, 0 = impact
    values: np.ndarray  # (n_series, L) with NaN padding

    def row(self, i):
        return self.values[i]


def align_and_unwrap(rotation_series, impact_frames):
    """Unwrap each series and time-shift it so its impact frame is offset 0.

    Values are preserved exactly (a pure shift); rows are padded with
    NaN where series lengths differ.
    """
    if len(rotation_series) != len(impact_frames):
        raise ValueError("need exactly one impact frame per series")
    arrays = [np.asarray(s, dtype=np.float64) for s in rotation_series]
    for arr, impact in zip(arrays, impact_frames):
        if not 0 <= impact < len(arr):
            raise ValueError(
                f"impact frame {impact} out of range for series of length {len(arr)}"
            )
    unwrapped = [kernels.unwrap_angles(arr) for arr in arrays]
    before = max(int(i) for i in impact_frames)
    after = max(len(arr) - int(i) - 1 for arr, i in zip(arrays, impact_frames))
    width = before + after + 1
    values = np.full((len(arrays), width), np.nan)
    for row, (arr, impact) in enumerate(zip(unwrapped, impact_frames)):
        start = before - int(impact)
        values[row, start : start + len(arr)] = arr
    return AlignedSeries(offsets=np.arange(-before, after + 1), values=values)


def load_samples_csv(path):
    """Read a cohort CSV: group,source_id,<the four feature columns>."""
    expected = ["group", "source_id", *COHORT_FEATURES]
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
            raise ConfigError(f"samples CSV must have header {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            group = row["group"].strip().lower()
            if group not in GROUPS:
                raise ConfigError(f"line {lineno}: unknown group {row['group']!r}")
            values = {}
            for feature in COHORT_FEATURES:
                try:
                    v = float(row[feature])
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"line {lineno}: bad value for {feature}: {row[feature]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise ConfigError(f"line {lineno}: non-finite {feature}")
                values[feature] = v
            samples.append(
                CohortSample(group=group, source_id=row["source_id"], values=values)
            )
    return samples


def boxplot_stats(values):
    """Quartiles, Tukey whiskers, and outliers for one group of values."""
    v = np.sort(_as_array(values))
    q1, median, q3 = (float(np.percentile(v, q)) for q in (25, 50, 75))
    iqr = q3 - q1
    in_lo, in_hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= in_lo) & (v <= in_hi)]
    lo_whisker = float(inside[0]) if inside.size else q1
    hi_whisker = float(inside[-1]) if inside.size else q3
    outliers = [float(x) for x in v[(v < lo_whisker) | (v > hi_whisker)]]
    return {
        "q1": q1,
        "median": median,
        "q3": q3,
        "lo_whisker": lo_whisker,
        "hi_whisker": hi_whisker,
        "outliers": outliers,
    }


def run_cohort_analysis(samples, plots_dir=None):
    """Per-feature stats for expert vs beginner, plus box-plot CSV data.

    Returns a list of FeatureStats in the fixed feature order. When
    ``plots_dir`` is given, one CSV per feature is written with columns
    group,q1,median,q3,lo_whisker,hi_whisker,outliers.
    """
    by_group = {g: [s for s in samples if s.group == g] for g in GROUPS}
    for g, members in by_group.items():
        if not members:
            raise DegenerateSampleError(f"group {g!r} is empty")
    results = []
    for feature in COHORT_FEATURES:
        expert = np.asarray([s.values[feature] for s in by_group["expert"]])
        beginner = np.asarray([s.values[feature] for s in by_group["beginner"]])
        test, warnings = choose_test(expert, beginner)
        if test == "welch-t":
            statistic, p = welch_t(expert, beginner)
        else:
            statistic, p = mann_whitney_u(expert, beginner)
        try:
            d = cohens_d(expert, beginner)
        except DegenerateSampleError as exc:
            d = float("nan")
            warnings.append(f"cohens_d unavailable ({exc})")
        results.append(
            FeatureStats(
                feature=feature,
                test_used=test,
                statistic=float(statistic),
                p_value=float(p),
                cohens_d=d,
                n_expert=len(expert),
                n_beginner=len(beginner),
                warnings=warnings,
            )
        )
        if plots_dir is not None:
            _write_boxplot_csv(plots_dir, feature, expert, beginner)
    return results


def _write_boxplot_csv(plots_dir, feature, expert, beginner):
    from pathlib import Path

    plots_dir = Path(plots_dir)
    plots_dir.mkdir(parents=True, exist_ok=True)
    path = plots_dir / f"boxplot_{feature}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["group", "q1", "median", "q3", "lo_whisker", "hi_whisker", "outliers"]
        )
        for group, values in (("expert", expert), ("beginner", beginner)):
            stats = boxplot_stats(values)
            writer.writerow(
                [
                    group,
                    f"{stats['q1']:.6g}",
                    f"{stats['median']:.6g}",
                    f"{stats['q3']:.6g}",
                    f"{stats['lo_whisker']:.6g}",
                    f"{stats['hi_whisker']:.6g}",
                    ";".join(f"{x:.6g}" for x in stats["outliers"]),
                ]
            )
    return path
