"""Code vocabulary and multi-hot visit tensorization."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.preprocess.events import PatientRecord, Visit

UNK_CODE = "<UNK>"


@dataclass
class Vocabulary:
    """Bijective code -> dense index map with ``<UNK>`` reserved at index V-1."""

    code_to_index: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.code_to_index)

    def index_of(self, code: str) -> int:
        idx = self.code_to_index.get(code)
        if idx is None:
            return self.code_to_index[UNK_CODE]
        return idx

    def codes_in_order(self) -> list[str]:
        return sorted(self.code_to_index, key=self.code_to_index.__getitem__)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.code_to_index == other.code_to_index


@dataclass(eq=False)
class EpisodeTensor:
    """[T x V] multi-hot visit encoding with a prefix-of-ones validity mask."""

    features: np.ndarray
    mask: np.ndarray

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, EpisodeTensor)
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.mask, other.mask)
        )


def build_vocabulary(patients: list[PatientRecord], min_count: int = 1) -> Vocabulary:
    """Index codes by descending corpus frequency (lexicographic tie-break).

    Codes below ``min_count`` map to the reserved ``<UNK>`` index, which is
    always present at V-1. EmptyInput if the corpus contains no events at all.
    """
    if not patients:
        raise ValidationError(ErrorCode.EMPTY_INPUT, "'patients' is empty")
    if min_count < 0:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'min_count' = {min_count} outside [0, inf)",
            context=min_count,
        )
    counts: Counter[str] = Counter()
    for patient in patients:
        for visit in patient.visits:
            counts.update(visit.codes())
    if not counts:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, "'patients' contain no visit events to index"
        )
    kept = sorted(
        (code for code, n in counts.items() if n >= min_count),
        key=lambda code: (-counts[code], code),
    )
    code_to_index = {code: i for i, code in enumerate(kept)}
    code_to_index[UNK_CODE] = len(kept)
    return Vocabulary(code_to_index)


def tensorize(visits: list[Visit], vocab: Vocabulary, max_visits: int) -> EpisodeTensor:
    """Encode the last ``max_visits`` visits as a [T x V] 0/1 matrix plus mask.

    Older visits are truncated first (recency matters for risk prediction);
    unknown codes hit the ``<UNK>`` index; padding rows at the tail are
    all-zero with mask 0.
    """
    if not visits:
        raise ValidationError(ErrorCode.EMPTY_INPUT, "'visits' is empty")
    if max_visits < 1:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'max_visits' = {max_visits} outside [1, inf)",
            context=max_visits,
        )
    kept = visits[-max_visits:]
    features = np.zeros((max_visits, vocab.size), dtype=np.float64)
    mask = np.zeros(max_visits, dtype=np.float64)
    for t, visit in enumerate(kept):
        mask[t] = 1.0
        for code in visit.codes():
            features[t, vocab.index_of(code)] = 1.0
    return EpisodeTensor(features=features, mask=mask)
