from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.preprocess import (
    UNK_CODE,
    PatientRecord,
    RawEvent,
    Visit,
    Vocabulary,
    make_mortality_task,
    make_phenotyping_task,
)

VOCAB = Vocabulary({"A": 0, "B": 1, "C": 2, UNK_CODE: 3})
BASE = datetime(2020, 1, 1, tzinfo=timezone.utc)


def visit(codes, days=0):
    start = BASE + timedelta(days=days)
    return Visit(start, [RawEvent("p", start, "diagnosis", c) for c in codes])


def patient(pid, visit_codes, deceased_days_after_last=None):
    visits = [visit(codes, days=3 * i) for i, codes in enumerate(visit_codes)]
    deceased_at = None
    if deceased_days_after_last is not None:
        deceased_at = visits[-1].visit_start + timedelta(days=deceased_days_after_last)
    return PatientRecord(pid, visits, deceased_at)


class TestMortality:
    def test_death_within_horizon_is_positive(self):
        examples = make_mortality_task(
            [patient("p1", [["A"]], deceased_days_after_last=2)],
            VOCAB, 4, timedelta(days=30),
        )
        assert examples[0].y.tolist() == [1.0]

    def test_no_death_is_negative(self):
        examples = make_mortality_task([patient("p1", [["A"]])], VOCAB, 4, timedelta(days=30))
        assert examples[0].y.tolist() == [0.0]

    def test_death_outside_horizon_is_negative(self):
        examples = make_mortality_task(
            [patient("p1", [["A"]], deceased_days_after_last=31)],
            VOCAB, 4, timedelta(days=30),
        )
        assert examples[0].y.tolist() == [0.0]

    def test_horizon_boundary_inclusive(self):
        examples = make_mortality_task(
            [patient("p1", [["A"]], deceased_days_after_last=30)],
            VOCAB, 4, timedelta(days=30),
        )
        assert examples[0].y.tolist() == [1.0]

    def test_zero_visit_patients_skipped(self):
        patients = [PatientRecord("p0"), patient("p1", [["A"]])]
        examples = make_mortality_task(patients, VOCAB, 4, timedelta(days=30))
        assert [e.patient_id for e in examples] == ["p1"]

    def test_empty_patients_rejected(self):
        with pytest.raises(ValidationError) as excinfo:
            make_mortality_task([], VOCAB, 4, timedelta(days=30))
        assert excinfo.value.code == ErrorCode.EMPTY_INPUT


class TestPhenotyping:
    def test_final_visit_defines_labels_and_is_excluded_from_features(self):
        examples = make_phenotyping_task(
            [patient("p1", [["A"], ["B"]])], VOCAB, 4, [{"B"}, {"C"}]
        )
        ex = examples[0]
        assert ex.y.tolist() == [1.0, 0.0]
        # features come from the first visit only
        assert ex.x.features[0].tolist() == [1, 0, 0, 0]
        assert ex.x.mask.tolist() == [1, 0, 0, 0]

    def test_single_visit_patient_skipped(self):
        patients = [patient("p1", [["A"]]), patient("p2", [["A"], ["B"]])]
        examples = make_phenotyping_task(patients, VOCAB, 4, [{"B"}, {"C"}])
        assert [e.patient_id for e in examples] == ["p2"]

    def test_multiple_phenotypes_can_fire(self):
        examples = make_phenotyping_task(
            [patient("p1", [["A"], ["B", "C"]])], VOCAB, 4, [{"B"}, {"C"}]
        )
        assert examples[0].y.tolist() == [1.0, 1.0]

    def test_no_leakage_from_final_visit(self):
        # Perturbing the final visit's codes must not change features.
        p_original = patient("p1", [["A"], ["B"]])
        p_changed = patient("p1", [["A"], ["B", "C", "A"]])
        ex_a = make_phenotyping_task([p_original], VOCAB, 4, [{"B"}, {"ZZ"}])[0]
        ex_b = make_phenotyping_task([p_changed], VOCAB, 4, [{"B"}, {"ZZ"}])[0]
        assert np.array_equal(ex_a.x.features, ex_b.x.features)
        assert np.array_equal(ex_a.x.mask, ex_b.x.mask)

    def test_too_few_phenotypes_rejected(self):
        with pytest.raises(ValidationError) as excinfo:
            make_phenotyping_task([patient("p1", [["A"], ["B"]])], VOCAB, 4, [{"B"}])
        assert excinfo.value.code == ErrorCode.RANGE_VIOLATION

    def test_empty_code_set_rejected(self):
        with pytest.raises(ValidationError) as excinfo:
            make_phenotyping_task([patient("p1", [["A"], ["B"]])], VOCAB, 4, [{"B"}, set()])
        assert excinfo.value.code == ErrorCode.EMPTY_INPUT

    def test_all_patients_skipped_is_empty_input(self):
        with pytest.raises(ValidationError) as excinfo:
            make_phenotyping_task([patient("p1", [["A"]])], VOCAB, 4, [{"B"}, {"C"}])
        assert excinfo.value.code == ErrorCode.EMPTY_INPUT
