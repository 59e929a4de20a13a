"""kinecoach: biomechanical stroke reports and range-grounded coaching
feedback from 3D skeleton motion data."""

__version__ = "0.1.0"

from .compliance import ComplianceReport, check_feedback
from .feedback import (
    FeedbackResult,
    PromptBundle,
    build_context_summary,
    generate_feedback,
)
from .grounding import Finding, ReferenceTable, compare_to_reference, load_reference_table
from .kinematics import FeatureReport, TimeSeries, build_feature_report
from .skeleton_io import (
    RawMotionTable,
    SkeletonSequence,
    impute_gaps,
    load_sequence,
    map_joints,
    parse_motion_file,
    validate_sequence,
)

__all__ = [
    "ComplianceReport",
    "FeatureReport",
    "FeedbackResult",
    "Finding",
    "PromptBundle",
    "RawMotionTable",
    "ReferenceTable",
    "SkeletonSequence",
    "TimeSeries",
    "build_context_summary",
    "build_feature_report",
    "check_feedback",
    "compare_to_reference",
    "generate_feedback",
    "impute_gaps",
    "load_reference_table",
    "load_sequence",
    "map_joints",
    "parse_motion_file",
    "validate_sequence",
]
