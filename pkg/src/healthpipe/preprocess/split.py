"""Seeded holdout and k-fold splitting.

Both operations shuffle with the package's SplitMix64 generator, never the
platform RNG, so the same (input, seed) always yields bit-identical splits.
"""

from __future__ import annotations

from dataclasses import dataclass

from healthpipe.core import ErrorCode, ValidationError, check_parameter
from healthpipe.rng import SplitMix64

RATIO_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float]
    seed: int = 42

    def __post_init__(self):
        if len(self.ratios) != 3:
            raise ValidationError(
                ErrorCode.SCHEMA_VIOLATION,
                f"parameter 'ratios' needs 3 entries (train, valid, test), got {len(self.ratios)}",
                context=self.ratios,
            )
        for name, ratio in zip(("train", "valid", "test"), self.ratios):
            check_parameter(ratio, 0.0, 1.0, f"ratios.{name}")
        if abs(sum(self.ratios) - 1.0) > RATIO_TOLERANCE:
            raise ValidationError(
                ErrorCode.RANGE_VIOLATION,
                f"parameter 'ratios' = {self.ratios} must sum to 1 within {RATIO_TOLERANCE}",
                context=self.ratios,
            )
        if self.ratios[0] <= 0.0:
            raise ValidationError(
                ErrorCode.RANGE_VIOLATION,
                f"parameter 'ratios.train' = {self.ratios[0]} outside (0, 1]",
                context=self.ratios[0],
            )


def _floor_cut(x: float) -> int:
    # Absorbs float representation error (~1e-15 relative) so cut points land
    # where exact-rational ratios intend, e.g. 10 * (0.7 + 0.1) -> 8, not 7.
    return int(x + 1e-9)


def split(examples: list, spec: SplitSpec) -> tuple[list, list, list]:
    """Shuffle deterministically, then cut at floor(n*r_train) and floor(n*(r_train+r_valid))."""
    n = len(examples)
    if all(r > 0 for r in spec.ratios) and n < 3:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'examples' needs >= 3 entries for a three-way split, got {n}",
            context=n,
        )
    shuffled = list(examples)
    SplitMix64(spec.seed).shuffle(shuffled)
    r_train, r_valid, _ = spec.ratios
    cut_train = _floor_cut(n * r_train)
    cut_valid = _floor_cut(n * (r_train + r_valid))
    return shuffled[:cut_train], shuffled[cut_train:cut_valid], shuffled[cut_valid:]


def kfold(examples: list, k: int, seed: int) -> list[tuple[list, list]]:
    """Seeded shuffle, then k (train, test) pairs whose test folds partition the input."""
    n = len(examples)
    if k < 2 or k > n:
        raise ValidationError(
            ErrorCode.RANGE_VIOLATION,
            f"parameter 'k' = {k} outside [2, {n}] for {n} examples",
            context=k,
        )
    shuffled = list(examples)
    SplitMix64(seed).shuffle(shuffled)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test = shuffled[start : start + size]
        train = shuffled[:start] + shuffled[start + size :]
        folds.append((train, test))
        start += size
    return folds
