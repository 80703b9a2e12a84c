from gfd.capture.interchange import parse_sequences, read_dataset, write_dataset, write_sequences
from gfd.capture.types import Dataset, RawSequence

__all__ = [
    "Dataset",
    "RawSequence",
    "parse_sequences",
    "read_dataset",
    "write_dataset",
    "write_sequences",
]
