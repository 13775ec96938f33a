"""Synthetic clinical event streams for demos, benchmarks, and tests.

The generator emits the same CSV schema the ingestion layer reads
(patient_id, timestamp, event_type, code, value). Outcomes follow a simple
planted rule: a sentinel diagnosis code in the final visit marks the patient
as high risk, a 5% noise rate flips the outcome, and patients with the bad
outcome receive a death event three days after their last visit starts. Two
auxiliary codes carry weaker, probabilistic signal so the mapping from
features to outcome is not a pure lookup:

  - RISK_LAST appears in the final visit with p=0.65 for positives vs 0.15
    for negatives,
  - RISK_EARLY appears in each earlier visit with p=0.5 vs 0.1.

Everything is driven by one seeded stream, so a (n_patients, seed) pair
always produces byte-identical output.
"""

from __future__ import annotations

import csv
import io
from datetime import datetime, timedelta, timezone
from pathlib import Path

from healthpipe.core import check_parameter
from healthpipe.fsutil import atomic_write_text
from healthpipe.rng import SplitMix64

SENTINEL_CODE = "dx-sentinel"
RISK_LAST = "dx-risk-late"
RISK_EARLY = "dx-risk-early"
NOISE_RATE = 0.05
DEATH_LAG = timedelta(days=3)

_BASE_TIME = datetime(2024, 1, 1, 8, 0, 0, tzinfo=timezone.utc)
_FILLER_CODES = [f"dx-{i:03d}" for i in range(40)]
_LAB_CODES = [f"lab-{i}" for i in range(5)]


def _stamp(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def demo_rows(n_patients: int, seed: int) -> list[tuple[str, str, str, str, str]]:
    """Event rows (header excluded) for a planted-outcome cohort.

    Patients have 2..6 visits roughly five days apart; within a visit events
    sit minutes apart so the default visit-gap rule groups them back exactly.
    """
    check_parameter(n_patients, 1, 10**7, "n_patients")
    rng = SplitMix64(seed)
    rows: list[tuple[str, str, str, str, str]] = []
    for i in range(n_patients):
        pid = f"p{i:05d}"
        n_visits = 2 + rng.bounded(5)
        has_sentinel = rng.uniform() < 0.5
        flipped = rng.uniform() < NOISE_RATE
        dies = has_sentinel != flipped

        last_start = _BASE_TIME
        for v in range(n_visits):
            start = _BASE_TIME + timedelta(days=5 * v, hours=rng.uniform_range(0.0, 12.0))
            last_start = start
            codes = []
            is_last = v == n_visits - 1
            if is_last and has_sentinel:
                codes.append(SENTINEL_CODE)
            if is_last:
                if rng.uniform() < (0.65 if dies else 0.15):
                    codes.append(RISK_LAST)
            elif rng.uniform() < (0.5 if dies else 0.1):
                codes.append(RISK_EARLY)
            for _ in range(2 + rng.bounded(3)):
                codes.append(_FILLER_CODES[rng.bounded(len(_FILLER_CODES))])
            for j, code in enumerate(codes):
                rows.append((pid, _stamp(start + timedelta(minutes=j)), "diagnosis", code, ""))
            if rng.uniform() < 0.1:
                lab = _LAB_CODES[rng.bounded(len(_LAB_CODES))]
                value = f"{rng.uniform_range(0.1, 9.9):.2f}"
                rows.append(
                    (pid, _stamp(start + timedelta(minutes=len(codes))), "lab", lab, value)
                )
        if dies:
            rows.append((pid, _stamp(last_start + DEATH_LAG), "death", "expired", ""))
    return rows


def write_demo_events(path: Path | str, n_patients: int, seed: int) -> Path:
    """Write the demo cohort as an event CSV; returns the path written."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["patient_id", "timestamp", "event_type", "code", "value"])
    writer.writerows(demo_rows(n_patients, seed))
    path = Path(path)
    atomic_write_text(path, buffer.getvalue())
    return path
