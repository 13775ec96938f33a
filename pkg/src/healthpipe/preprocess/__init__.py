"""Data preprocessing: event ingestion, episode construction, task datasets."""

from healthpipe.preprocess.events import (
    RawEvent,
    Visit,
    PatientRecord,
    parse_events,
    build_patients,
)
from healthpipe.preprocess.encode import (
    UNK_CODE,
    Vocabulary,
    EpisodeTensor,
    build_vocabulary,
    tensorize,
)
from healthpipe.preprocess.tasks import (
    LabeledExample,
    make_mortality_task,
    make_phenotyping_task,
)
from healthpipe.preprocess.split import SplitSpec, split, kfold
from healthpipe.preprocess.dataset import (
    ExperimentDataset,
    PreprocessConfig,
    TASK_BUILDERS,
    generate_dataset,
    save_dataset,
    load_dataset,
)

__all__ = [
    "RawEvent",
    "Visit",
    "PatientRecord",
    "parse_events",
    "build_patients",
    "UNK_CODE",
    "Vocabulary",
    "EpisodeTensor",
    "build_vocabulary",
    "tensorize",
    "LabeledExample",
    "make_mortality_task",
    "make_phenotyping_task",
    "SplitSpec",
    "split",
    "kfold",
    "ExperimentDataset",
    "PreprocessConfig",
    "TASK_BUILDERS",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]
