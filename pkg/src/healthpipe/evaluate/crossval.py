"""K-fold cross-validation over a predictor factory."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from healthpipe.core import check_parameter
from healthpipe.evaluate.report import MetricReport, evaluate
from healthpipe.preprocess.split import SplitSpec, kfold, split

# checkpoint selection inside each fold needs held-out data; 10% is carved
# off the fold's training part
SUB_SPLIT_RATIOS = (0.9, 0.1, 0.0)


class FoldFailure(Exception):
    """A fold's train/eval raised; carries the fold index and the cause."""

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold} failed: {cause}")
        self.fold = fold
        self.cause = cause


@dataclass
class CrossValidationReport:
    task: object
    k: int
    folds: list[MetricReport] = field(default_factory=list)
    mean: dict[str, float] = field(default_factory=dict)
    std: dict[str, float] = field(default_factory=dict)


def cross_validate(examples, factory, k: int, config) -> CrossValidationReport:
    """Train and evaluate factory(fold) on each of k folds.

    `config` supplies the seed that drives fold assignment and each fold's
    internal train/valid sub-split; the factory returns fresh, fully
    configured predictors. The aggregate covers the metrics present in every
    fold's report, in first-fold order.
    """
    check_parameter(k, 2, 10**6, "k")
    seed = int(config.seed)
    folds = kfold(examples, k, seed)

    reports: list[MetricReport] = []
    for i, (train_part, test_part) in enumerate(folds):
        try:
            sub_train, sub_valid, _ = split(
                train_part, SplitSpec(ratios=SUB_SPLIT_RATIOS, seed=seed + i)
            )
            predictor = factory(i)
            predictor.fit(sub_train, sub_valid)
            predictor.load_model()
            predictor.inference(test_part)
            bundle = predictor.get_results()
            reports.append(evaluate(bundle.hat_y, bundle.y))
        except Exception as exc:
            raise FoldFailure(i, exc) from exc

    shared = [
        name
        for name in reports[0].metrics
        if all(name in r.metrics for r in reports[1:])
    ]
    out = CrossValidationReport(task=reports[0].task, k=k, folds=reports)
    for name in shared:
        values = np.array([r.metrics[name] for r in reports])
        out.mean[name] = float(values.mean())
        out.std[name] = float(values.std())
    return out
