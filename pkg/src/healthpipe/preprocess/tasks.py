"""Task-dataset builders: mortality (binary) and phenotyping (multilabel).

Each builder has a per-patient helper returning one example or None; the
public functions and the parallel fan-out in ``dataset`` both go through those
helpers, so worker count can never change the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta
from typing import Optional

import numpy as np

from healthpipe.core import ErrorCode, ValidationError
from healthpipe.preprocess.encode import EpisodeTensor, Vocabulary, tensorize
from healthpipe.preprocess.events import PatientRecord


@dataclass(eq=False)
class LabeledExample:
    patient_id: str
    x: EpisodeTensor
    y: np.ndarray

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, LabeledExample)
            and self.patient_id == other.patient_id
            and self.x == other.x
            and np.array_equal(self.y, other.y)
        )


def mortality_example(
    patient: PatientRecord,
    vocab: Vocabulary,
    max_visits: int,
    horizon: timedelta,
) -> Optional[LabeledExample]:
    """One binary example, or None for patients with no visits."""
    if not patient.visits:
        return None
    last_start = patient.visits[-1].visit_start
    died_in_horizon = (
        patient.deceased_at is not None
        and patient.deceased_at - last_start <= horizon
    )
    return LabeledExample(
        patient_id=patient.patient_id,
        x=tensorize(patient.visits, vocab, max_visits),
        y=np.array([1.0 if died_in_horizon else 0.0]),
    )


def phenotyping_example(
    patient: PatientRecord,
    vocab: Vocabulary,
    max_visits: int,
    phenotypes: list[set[str]],
) -> Optional[LabeledExample]:
    """One multilabel example from the final visit, or None for < 2 visits.

    Features come from visits 1..last-1 only, so nothing from the labeled
    visit leaks into the input.
    """
    if len(patient.visits) < 2:
        return None
    final_codes = set(patient.visits[-1].codes())
    y = np.array([1.0 if final_codes & code_set else 0.0 for code_set in phenotypes])
    return LabeledExample(
        patient_id=patient.patient_id,
        x=tensorize(patient.visits[:-1], vocab, max_visits),
        y=y,
    )


def check_mortality_args(horizon: timedelta) -> None:
    if horizon <= timedelta(0):
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'horizon' = {horizon} outside (0, inf)",
            context=horizon,
        )


def check_phenotyping_args(phenotypes: list[set[str]]) -> None:
    if len(phenotypes) < 2:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'phenotypes' needs >= 2 code-sets, got {len(phenotypes)}",
            context=len(phenotypes),
        )
    for c, code_set in enumerate(phenotypes):
        if not code_set:
            raise ValidationError(
                ErrorCode.EMPTY_INPUT,
                f"parameter 'phenotypes[{c}]' is an empty code-set",
                context=c,
            )


def make_mortality_task(
    patients: list[PatientRecord],
    vocab: Vocabulary,
    max_visits: int,
    horizon: timedelta,
) -> list[LabeledExample]:
    """Label each patient 1 iff death occurs within ``horizon`` of the last
    visit start (inclusive boundary). Patients with no visits are skipped."""
    if not patients:
        raise ValidationError(ErrorCode.EMPTY_INPUT, "'patients' is empty")
    check_mortality_args(horizon)
    examples = [
        ex
        for patient in patients
        if (ex := mortality_example(patient, vocab, max_visits, horizon)) is not None
    ]
    if not examples:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, "'patients' produced no mortality examples"
        )
    return examples


def make_phenotyping_task(
    patients: list[PatientRecord],
    vocab: Vocabulary,
    max_visits: int,
    phenotypes: list[set[str]],
) -> list[LabeledExample]:
    """Multilabel task over the final visit's codes; see ``phenotyping_example``."""
    if not patients:
        raise ValidationError(ErrorCode.EMPTY_INPUT, "'patients' is empty")
    check_phenotyping_args(phenotypes)
    examples = [
        ex
        for patient in patients
        if (ex := phenotyping_example(patient, vocab, max_visits, phenotypes)) is not None
    ]
    if not examples:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT,
            "'patients' all have fewer than two visits; no phenotyping examples",
        )
    return examples
