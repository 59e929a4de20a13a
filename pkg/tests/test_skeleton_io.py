"""Ingestion, joint mapping, and gap imputation."""

import numpy as np
import pytest

from kinecoach.errors import (
    AmbiguousJointError,
    DuplicateObservationError,
    ImputationError,
    ParseError,
)
from kinecoach.skeleton_io import (
    CANONICAL_JOINTS,
    RawMotionTable,
    canonical_joint_name,
    impute_gaps,
    map_joints,
    parse_motion_file,
    validate_sequence,
)


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def table_from(rows, rate=60.0):
    return RawMotionTable(rows=rows, sample_rate_hz=rate, source_id="t")


class TestParseCsv:
    def test_full_file_echoes_rows(self, tmp_path):
        p = write_csv(
            tmp_path / "a.csv",
            "frame,joint,x,y,z\n"
            "0,right_wrist,0,0,0\n0,left_wrist,1,1,1\n"
            "1,right_wrist,0.1,0,0\n1,left_wrist,1,1,1\n"
            "2,right_wrist,0.2,0,0\n2,left_wrist,1,1,1\n",
        )
        table = parse_motion_file(p, "csv")
        assert len(table.rows) == 6
        assert all(r[5] for r in table.rows)
        assert table.sample_rate_hz == 60.0

    def test_empty_cell_marks_invalid(self, tmp_path):
        p = write_csv(
            tmp_path / "a.csv",
            "frame,joint,x,y,z\n0,w,1,2,\n1,w,1,2,3\n2,w,1,2,3\n",
        )
        table = parse_motion_file(p, "csv")
        row = [r for r in table.rows if r[0] == 0][0]
        assert row[5] is False
        assert np.isnan(row[4])

    def test_duplicate_frame_joint_rejected(self, tmp_path):
        p = write_csv(
            tmp_path / "a.csv",
            "frame,joint,x,y,z\n4,right_wrist,0,0,0\n5,right_wrist,0,0,0\n"
            "5,right_wrist,1,1,1\n6,right_wrist,0,0,0\n",
        )
        with pytest.raises(DuplicateObservationError, match="frame 5"):
            parse_motion_file(p, "csv")

    def test_empty_file_rejected(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", "")
        with pytest.raises(ParseError):
            parse_motion_file(p, "csv")
        p2 = write_csv(tmp_path / "b.csv", "frame,joint,x,y,z\n")
        with pytest.raises(ParseError, match="no observations"):
            parse_motion_file(p2, "csv")

    def test_malformed_row_names_line(self, tmp_path):
        p = write_csv(
            tmp_path / "a.csv",
            "frame,joint,x,y,z\n0,w,1,2,3\n1,w,oops,2,3\n2,w,1,2,3\n",
        )
        with pytest.raises(ParseError, match="line 3") as err:
            parse_motion_file(p, "csv")
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", "t,name,x,y,z\n0,w,1,2,3\n")
        with pytest.raises(ParseError, match="header"):
            parse_motion_file(p, "csv")

    def test_negative_frame(self, tmp_path):
        p = write_csv(
            tmp_path / "a.csv",
            "frame,joint,x,y,z\n-1,w,1,2,3\n0,w,1,2,3\n1,w,1,2,3\n",
        )
        with pytest.raises(ParseError, match="negative"):
            parse_motion_file(p, "csv")

    def test_fewer_than_three_frames(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", "frame,joint,x,y,z\n0,w,1,2,3\n1,w,1,2,3\n")
        with pytest.raises(ParseError, match="3 distinct frames"):
            parse_motion_file(p, "csv")


class TestParseJson:
    def test_wide_format(self, tmp_path):
        p = tmp_path / "a.json"
        p.write_text(
            '{"sample_rate_hz": 120, "joints": ["right_wrist"],'
            ' "frames": [[[0,0,0]], [null], [[2,0,0]]]}'
        )
        table = parse_motion_file(p, "json")
        assert table.sample_rate_hz == 120
        assert [r[5] for r in table.rows] == [True, False, True]

    def test_rate_argument_wins(self, tmp_path):
        p = tmp_path / "a.json"
        p.write_text(
            '{"sample_rate_hz": 120, "joints": ["w"],'
            ' "frames": [[[0,0,0]], [[1,0,0]], [[2,0,0]]]}'
        )
        assert parse_motion_file(p, "json", sample_rate_hz=30).sample_rate_hz == 30

    def test_duplicate_joint_names(self, tmp_path):
        p = tmp_path / "a.json"
        p.write_text('{"joints": ["w", "w"], "frames": [[[0,0,0],[0,0,0]]]}')
        with pytest.raises(DuplicateObservationError):
            parse_motion_file(p, "json")

    def test_wrong_joint_count(self, tmp_path):
        p = tmp_path / "a.json"
        p.write_text('{"joints": ["a", "b"], "frames": [[[0,0,0]]]}')
        with pytest.raises(ParseError, match="frame 0"):
            parse_motion_file(p, "json")

    def test_invalid_json_is_parse_error(self, tmp_path):
        p = tmp_path / "a.json"
        p.write_text("{nope")
        with pytest.raises(ParseError):
            parse_motion_file(p, "json")


class TestJointMapping:
    @pytest.mark.parametrize(
        "raw",
        ["RShoulder", "shoulder_r", "Right_Shoulder", "rshoulder", "SHOULDER_R",
         "right shoulder", "shoulder-R", "rightShoulder"],
    )
    def test_right_shoulder_aliases(self, raw):
        assert canonical_joint_name(raw) == "right_shoulder"

    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("LAnkle", "left_ankle"),
            ("hand_l", "left_hand"),
            ("racket_tip", "racket_tip"),
            ("RacketTip", "racket_tip"),
            ("racket", "racket_tip"),
            ("Spine", "spine"),
            ("HEAD", "head"),
            ("l_hip", "left_hip"),
            ("kneeR", "right_knee"),
        ],
    )
    def test_more_aliases(self, raw, expected):
        assert canonical_joint_name(raw) == expected

    @pytest.mark.parametrize("raw", ["torso_widget", "shoulder", "left", "x", ""])
    def test_unmappable(self, raw):
        assert canonical_joint_name(raw) is None

    def test_extra_aliases_extend_vocabulary(self):
        assert canonical_joint_name("pelvis") is None
        assert canonical_joint_name("pelvis", {"pelvis": "spine"}) == "spine"

    def test_unmapped_joint_dropped_with_warning(self):
        rows = [(t, j, 0.0, 0.0, 0.0, True)
                for t in range(3) for j in ("RShoulder", "torso_widget")]
        mapped = map_joints(table_from(rows))
        assert mapped.joint_names() == ["right_shoulder"]
        assert any("torso_widget" in w for w in mapped.warnings)

    def test_ambiguous_names_same_frame(self):
        rows = [
            (0, "RShoulder", 0.0, 0.0, 0.0, True),
            (0, "shoulder_r", 1.0, 1.0, 1.0, True),
        ]
        with pytest.raises(AmbiguousJointError) as err:
            map_joints(table_from(rows))
        assert "RShoulder" in str(err.value) and "shoulder_r" in str(err.value)


class TestImputation:
    def test_interior_midpoint(self):
        rows = [
            (0, "right_wrist", 0.0, 0.0, 0.0, True),
            (1, "right_wrist", np.nan, np.nan, np.nan, False),
            (2, "right_wrist", 2.0, 0.0, 0.0, True),
        ]
        seq = impute_gaps(table_from(rows))
        assert np.allclose(seq.positions_of("right_wrist")[1], [1.0, 0.0, 0.0])

    def test_leading_gap_holds_nearest(self):
        rows = [
            (0, "right_wrist", np.nan, np.nan, np.nan, False),
            (1, "right_wrist", 5.0, 5.0, 5.0, True),
            (2, "right_wrist", 6.0, 6.0, 6.0, True),
        ]
        seq = impute_gaps(table_from(rows))
        assert np.array_equal(seq.positions_of("right_wrist")[0], [5.0, 5.0, 5.0])

    def test_all_valid_is_identity(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(0, 1, (5, 3))
        rows = [(t, "spine", *pts[t], True) for t in range(5)]
        seq = impute_gaps(table_from(rows))
        assert np.array_equal(seq.positions_of("spine"), pts)
        assert not seq.imputed.any()

    def test_too_few_valid_frames_errors(self):
        rows = [
            (0, "spine", 0.0, 0.0, 0.0, True),
            (1, "spine", np.nan, np.nan, np.nan, False),
            (2, "spine", np.nan, np.nan, np.nan, False),
        ]
        with pytest.raises(ImputationError, match="spine"):
            impute_gaps(table_from(rows))

    def test_missing_rows_count_as_gaps(self):
        # a joint absent from a frame entirely is a gap, not an error
        rows = [
            (0, "spine", 0.0, 0.0, 0.0, True),
            (2, "spine", 2.0, 2.0, 2.0, True),
            (0, "head", 0.0, 0.0, 1.0, True),
            (1, "head", 0.0, 0.0, 1.0, True),
            (2, "head", 0.0, 0.0, 1.0, True),
        ]
        seq = impute_gaps(table_from(rows))
        assert np.allclose(seq.positions_of("spine")[1], [1.0, 1.0, 1.0])
        assert seq.imputed[1, seq.joints.index("spine")]

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        rows = []
        for t in range(10):
            for j in ("spine", "head"):
                if rng.random() < 0.3 and t not in (0, 9):
                    rows.append((t, j, np.nan, np.nan, np.nan, False))
                else:
                    rows.append((t, j, *rng.normal(0, 1, 3), True))
        seq1 = impute_gaps(table_from(rows))
        rows2 = [
            (t, j, *seq1.positions[t, k], True)
            for t in range(seq1.frames)
            for k, j in enumerate(seq1.joints)
        ]
        seq2 = impute_gaps(table_from(rows2))
        assert np.array_equal(seq1.positions, seq2.positions)

    def test_never_changes_valid_frames_and_convexity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            T = int(rng.integers(3, 20))
            rows = []
            observed = {}
            n_valid = 0
            for t in range(T):
                if rng.random() < 0.35 and n_valid >= 2:
                    rows.append((t, "spine", np.nan, np.nan, np.nan, False))
                else:
                    pt = rng.normal(0, 3, 3)
                    rows.append((t, "spine", *pt, True))
                    observed[t] = pt
                    n_valid += 1
            seq = impute_gaps(table_from(rows))
            pos = seq.positions_of("spine")
            for t, pt in observed.items():
                assert np.array_equal(pos[t], pt)
            lo = np.min([p for p in observed.values()], axis=0)
            hi = np.max([p for p in observed.values()], axis=0)
            assert np.all(pos >= lo - 1e-12) and np.all(pos <= hi + 1e-12)


class TestValidation:
    def test_fraction_imputed(self):
        rows = [(t, "spine", *(np.nan,) * 3, False) if t == 3
                else (t, "spine", 0.0, 0.0, float(t), True)
                for t in range(10)]
        seq = impute_gaps(table_from(rows))
        metrics = validate_sequence(seq)
        assert metrics.imputed_fraction["spine"] == pytest.approx(0.1)
        assert metrics.frames == 10

    def test_zero_when_fully_valid(self):
        rows = [(t, "spine", 0.0, 0.0, float(t), True) for t in range(4)]
        metrics = validate_sequence(impute_gaps(table_from(rows)))
        assert set(metrics.imputed_fraction.values()) == {0.0}

    def test_missing_racket_listed(self):
        rows = [(t, "spine", 0.0, 0.0, float(t), True) for t in range(4)]
        metrics = validate_sequence(impute_gaps(table_from(rows)))
        assert "racket_tip" in metrics.missing_joints
        assert set(CANONICAL_JOINTS) - {"spine"} == set(metrics.missing_joints)


def test_fixture_file_loads_with_warning(stroke_csv):
    table = map_joints(parse_motion_file(stroke_csv, "csv"))
    assert any("torso_widget" in w for w in table.warnings)
    seq = impute_gaps(table)
    assert seq.frames == 60
    assert seq.has("racket_tip")
    assert np.isfinite(seq.positions).all()
    fractions = validate_sequence(seq).imputed_fraction
    assert fractions["racket_tip"] == pytest.approx(3 / 60)
    assert fractions["left_ankle"] == pytest.approx(2 / 60)
