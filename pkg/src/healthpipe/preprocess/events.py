"""Clinical event ingestion and visit/episode construction.

Input is a UTF-8 CSV with header ``patient_id,timestamp,event_type,code,value``
and RFC 3339 timestamps. Events are grouped per patient into visits by a
configurable time-gap rule; ``death`` events set the patient's time of death
and never contribute features.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Optional

from healthpipe.core import ErrorCode, ValidationError

EXPECTED_HEADER = ["patient_id", "timestamp", "event_type", "code", "value"]
DEATH_EVENT_TYPE = "death"


@dataclass(frozen=True)
class RawEvent:
    patient_id: str
    timestamp: datetime
    event_type: str
    code: str
    value: Optional[float] = None


@dataclass
class Visit:
    visit_start: datetime
    events: list[RawEvent] = field(default_factory=list)

    def codes(self) -> list[str]:
        return [e.code for e in self.events]


@dataclass
class PatientRecord:
    """One patient's time-ordered events grouped into visits.

    Visits are strictly increasing by ``visit_start``; ``deceased_at`` is set
    from death events, which are excluded from visit features.
    """

    patient_id: str
    visits: list[Visit] = field(default_factory=list)
    deceased_at: Optional[datetime] = None


def _parse_timestamp(text: str, line_num: int) -> datetime:
    # RFC 3339 "Z" suffix is not understood by fromisoformat until 3.11.
    normalized = text.strip().replace("Z", "+00:00").replace("z", "+00:00")
    try:
        ts = datetime.fromisoformat(normalized)
    except ValueError:
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"unparseable timestamp {text!r} at line {line_num}",
            context=text,
        ) from None
    if ts.tzinfo is None:
        # Offset-free timestamps are tolerated and read as UTC.
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_value(text: str, line_num: int) -> Optional[float]:
    if text.strip() == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"unparseable value {text!r} at line {line_num}",
            context=text,
        ) from None
    if not math.isfinite(value):
        raise ValidationError(
            ErrorCode.TYPE_MISMATCH,
            f"non-finite value {text!r} at line {line_num}",
            context=text,
        )
    return value


def parse_events(stream: IO[str] | Iterable[str]) -> list[RawEvent]:
    """Parse an event CSV stream into a list of RawEvent, preserving row order.

    Raises SchemaViolation for header/field-count problems (with the 1-based
    line number), TypeMismatch for unparseable timestamps or values, and
    EmptyInput when no data rows are present.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, "input CSV 'stream' has no header row"
        ) from None
    header = [h.strip().lstrip("﻿") for h in header]
    if header != EXPECTED_HEADER:
        raise ValidationError(
            ErrorCode.SCHEMA_VIOLATION,
            f"bad header at line 1: expected {','.join(EXPECTED_HEADER)!r}, "
            f"got {','.join(header)!r}",
            context=",".join(header),
        )

    events: list[RawEvent] = []
    for row in reader:
        line_num = reader.line_num
        if not row:
            continue
        if len(row) != len(EXPECTED_HEADER):
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"expected {len(EXPECTED_HEADER)} fields at line {line_num}, "
                f"got {len(row)}",
                context=",".join(row),
            )
        patient_id, ts_text, event_type, code, value_text = row
        for name, text in (("patient_id", patient_id), ("event_type", event_type), ("code", code)):
            if text.strip() == "":
                raise ValidationError(
                    ErrorCode.SCHEMA_VIOLATION,
                    f"empty {name} at line {line_num}",
                    context=name,
                )
            if "\n" in text or "\r" in text:
                raise ValidationError(
                    ErrorCode.SCHEMA_VIOLATION,
                    f"{name} contains a line break at line {line_num}",
                    context=name,
                )
        events.append(
            RawEvent(
                patient_id=patient_id.strip(),
                timestamp=_parse_timestamp(ts_text, line_num),
                event_type=event_type.strip(),
                code=code.strip(),
                value=_parse_value(value_text, line_num),
            )
        )
    if not events:
        raise ValidationError(
            ErrorCode.EMPTY_INPUT, "input CSV 'stream' has a header but zero data rows"
        )
    return events


def build_patients(events: list[RawEvent], visit_gap: timedelta) -> list[PatientRecord]:
    """Group events into per-patient visit sequences.

    Events are grouped by patient and time-sorted (stable, so equal timestamps
    keep input order). Consecutive events no more than ``visit_gap`` apart
    share a visit. Death events set ``deceased_at`` (last one wins) and are
    excluded from visits; patients come back sorted by ascending patient_id.
    """
    if not events:
        raise ValidationError(ErrorCode.EMPTY_INPUT, "'events' is empty")
    by_patient: dict[str, list[RawEvent]] = {}
    for event in events:
        by_patient.setdefault(event.patient_id, []).append(event)

    patients = []
    for patient_id in sorted(by_patient):
        ordered = sorted(by_patient[patient_id], key=lambda e: e.timestamp)
        record = PatientRecord(patient_id=patient_id)
        for event in ordered:
            if event.event_type == DEATH_EVENT_TYPE:
                record.deceased_at = event.timestamp
                continue
            if (
                record.visits
                and event.timestamp - record.visits[-1].events[-1].timestamp <= visit_gap
            ):
                record.visits[-1].events.append(event)
            else:
                record.visits.append(Visit(visit_start=event.timestamp, events=[event]))
        patients.append(record)
    return patients
