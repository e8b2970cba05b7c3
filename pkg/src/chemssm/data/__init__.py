"""Dataset ingestion, vocabulary building, scaffold splits, batching."""

from .batching import Batch, SequenceTooLongError, encode_sequences, make_batches
from .corpus import CorpusReport, EmptyCorpusError, build_vocab, load_corpus
from .split import (
    SPLIT_NAMES,
    EmptyDatasetError,
    SplitAssignment,
    load_split,
    save_split,
    scaffold_split,
)
from .tasks import (
    BINARY,
    CONTINUOUS,
    TASKS,
    LabelParseError,
    MissingColumnError,
    TaskDataset,
    TaskRecord,
    TaskSpec,
    load_task_csv,
)

__all__ = [
    "BINARY",
    "Batch",
    "CONTINUOUS",
    "CorpusReport",
    "EmptyCorpusError",
    "EmptyDatasetError",
    "LabelParseError",
    "MissingColumnError",
    "SPLIT_NAMES",
    "SequenceTooLongError",
    "SplitAssignment",
    "TASKS",
    "TaskDataset",
    "TaskRecord",
    "TaskSpec",
    "build_vocab",
    "encode_sequences",
    "load_corpus",
    "load_split",
    "load_task_csv",
    "make_batches",
    "save_split",
    "scaffold_split",
]
