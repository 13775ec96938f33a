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
    build_vocabulary,
    tensorize,
)


def visit(codes, hours=0):
    start = datetime(2020, 1, 1, tzinfo=timezone.utc) + timedelta(hours=hours)
    return Visit(
        visit_start=start,
        events=[RawEvent("p", start, "diagnosis", code) for code in codes],
    )


def patient(pid, visit_codes):
    return PatientRecord(
        patient_id=pid,
        visits=[visit(codes, hours=48 * i) for i, codes in enumerate(visit_codes)],
    )


class TestBuildVocabulary:
    def test_frequency_order_with_unk_last(self):
        patients = [patient("p1", [["A", "B"], ["A"]]), patient("p2", [["A"]])]
        vocab = build_vocabulary(patients, min_count=1)
        assert vocab.code_to_index == {"A": 0, "B": 1, UNK_CODE: 2}
        assert vocab.size == 3

    def test_min_count_threshold(self):
        patients = [patient("p1", [["A", "B"], ["A", "A"]])]
        # A appears 3 times (dedup is per tensorize, not per vocab), B once
        vocab = build_vocabulary(patients, min_count=2)
        assert vocab.code_to_index == {"A": 0, UNK_CODE: 1}

    def test_lexicographic_tie_break(self):
        patients = [patient("p1", [["B", "A"], ["B", "A"]])]
        vocab = build_vocabulary(patients, min_count=1)
        assert vocab.code_to_index == {"A": 0, "B": 1, UNK_CODE: 2}

    def test_no_events_is_empty_input(self):
        with pytest.raises(ValidationError) as excinfo:
            build_vocabulary([PatientRecord(patient_id="p1")], min_count=1)
        assert excinfo.value.code == ErrorCode.EMPTY_INPUT

    def test_all_below_threshold_keeps_unk_only(self):
        patients = [patient("p1", [["A"]])]
        vocab = build_vocabulary(patients, min_count=5)
        assert vocab.code_to_index == {UNK_CODE: 0}

    def test_codes_in_order_matches_indices(self):
        patients = [patient("p1", [["C", "A", "B"], ["C"]])]
        vocab = build_vocabulary(patients, min_count=1)
        assert vocab.codes_in_order() == ["C", "A", "B", UNK_CODE]


class TestTensorize:
    VOCAB = Vocabulary({"A": 0, "B": 1, UNK_CODE: 2})

    def test_direct_encoding(self):
        episode = tensorize([visit(["A"]), visit(["A", "B"], hours=48)], self.VOCAB, 2)
        assert episode.features.tolist() == [[1, 0, 0], [1, 1, 0]]
        assert episode.mask.tolist() == [1, 1]

    def test_padding_rows_zero_with_zero_mask(self):
        episode = tensorize([visit(["A"]), visit(["A", "B"], hours=48)], self.VOCAB, 3)
        assert episode.features[2].tolist() == [0, 0, 0]
        assert episode.mask.tolist() == [1, 1, 0]

    def test_truncation_keeps_most_recent(self):
        visits = [visit(["A"]), visit(["B"], hours=48), visit(["A"], hours=96)]
        episode = tensorize(visits, self.VOCAB, 2)
        assert episode.features.tolist() == [[0, 1, 0], [1, 0, 0]]

    def test_unknown_code_hits_unk(self):
        episode = tensorize([visit(["ZZZ"])], self.VOCAB, 1)
        assert episode.features.tolist() == [[0, 0, 1]]

    def test_mask_is_prefix_of_ones(self):
        episode = tensorize([visit(["A"])], self.VOCAB, 4)
        mask = episode.mask
        ones = int(mask.sum())
        assert mask[:ones].all() and not mask[ones:].any()
        assert not episode.features[ones:].any()

    def test_duplicate_codes_stay_binary(self):
        episode = tensorize([visit(["A", "A", "A"])], self.VOCAB, 1)
        assert episode.features.max() == 1.0
        assert episode.features.dtype == np.float64
