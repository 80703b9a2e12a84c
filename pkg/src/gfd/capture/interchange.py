"""Line-oriented interchange format for labeled sequences.

One row per sample, comma separated, header required::

    id,time_ms,value,label,anomaly_at_ms

``time_ms`` is the sample index (1 kHz), so every id must cover
``0..n-1`` without gaps or duplicates. ``label`` and ``anomaly_at_ms`` are
constant per id. UTF-8, ``\\n`` line endings, no quoting.
"""

from __future__ import annotations

import os
import re
from array import array
from pathlib import Path
from typing import BinaryIO, Iterable, Optional

import numpy as np

from gfd.capture.types import ANOMALOUS, Dataset, RawSequence
from gfd.common.errors import ParseError, ValidationError
from gfd.common.io import atomic_writer
from gfd.common.logging import get_logger

logger = get_logger(__name__)

HEADER = "id,time_ms,value,label,anomaly_at_ms"
_INT_RE = re.compile(r"^\d+$")


class _Accumulator:
    __slots__ = ("times", "values", "label", "anomaly_at_ms", "first_line")

    def __init__(self, label: int, anomaly_at_ms: Optional[int], first_line: int):
        self.times = array("q")
        self.values = array("d")
        self.label = label
        self.anomaly_at_ms = anomaly_at_ms
        self.first_line = first_line


def _parse_value(tok: str, lineno: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(f"value {tok!r} is not a decimal number", line=lineno)
    if not np.isfinite(value):
        raise ParseError(f"value {tok!r} is not finite", line=lineno)
    return value


def _iter_lines(reader: BinaryIO) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(reader, start=1):
        try:
            line = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
        except UnicodeDecodeError:
            raise ParseError("row is not valid UTF-8", line=lineno)
        yield lineno, line.rstrip("\n").rstrip("\r")


def parse_sequences(reader: BinaryIO, source_name: str = "stream") -> Dataset:
    """Parse an interchange stream into a :class:`Dataset`.

    Sequences appear in order of first appearance of their id; rows of one id
    may be interleaved with other ids and in any time order.
    """
    groups: dict[str, _Accumulator] = {}
    header_seen = False
    for lineno, line in _iter_lines(reader):
        if not header_seen:
            if line.strip() != HEADER:
                raise ParseError(f"expected header {HEADER!r}", line=lineno)
            header_seen = True
            continue
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ParseError(f"expected 5 fields, got {len(fields)}", line=lineno)
        seq_id, t_tok, v_tok, label_tok, onset_tok = fields
        if not seq_id:
            raise ParseError("empty id", line=lineno)
        if not _INT_RE.match(t_tok):
            raise ParseError(f"time_ms {t_tok!r} is not a non-negative integer", line=lineno)
        if label_tok not in ("0", "1"):
            raise ParseError(f"label {label_tok!r} must be 0 or 1", line=lineno)
        if onset_tok and not _INT_RE.match(onset_tok):
            raise ParseError(f"anomaly_at_ms {onset_tok!r} is not a non-negative integer", line=lineno)
        label = int(label_tok)
        onset = int(onset_tok) if onset_tok else None

        acc = groups.get(seq_id)
        if acc is None:
            acc = groups[seq_id] = _Accumulator(label, onset, lineno)
        elif acc.label != label or acc.anomaly_at_ms != onset:
            raise ParseError(
                f"label/anomaly_at_ms for id {seq_id!r} differ from line {acc.first_line}", line=lineno
            )
        acc.times.append(int(t_tok))
        acc.values.append(_parse_value(v_tok, lineno))

    if not groups:
        raise ParseError("no sequences")

    sequences = [_assemble(seq_id, acc) for seq_id, acc in groups.items()]
    logger.debug("parsed %d sequences from %s", len(sequences), source_name)
    return Dataset(tuple(sequences), source_name)


def _assemble(seq_id: str, acc: _Accumulator) -> RawSequence:
    times = np.frombuffer(acc.times, dtype=np.int64)
    values = np.frombuffer(acc.values, dtype=np.float64)
    order = np.argsort(times, kind="stable")
    times = times[order]
    if times.size > 1:
        dup = np.flatnonzero(np.diff(times) == 0)
        if dup.size:
            raise ParseError(f"duplicate timestamp {int(times[dup[0]])} for id {seq_id!r}")
    if not np.array_equal(times, np.arange(times.size)):
        missing = int(np.flatnonzero(times != np.arange(times.size))[0])
        raise ParseError(f"gap in time_ms for id {seq_id!r}: expected {missing}, got {int(times[missing])}")
    try:
        return RawSequence(seq_id, values[order], acc.label, acc.anomaly_at_ms)
    except ValidationError as exc:
        raise ParseError(exc.message, line=acc.first_line) from exc


def _format_rows(seq: RawSequence) -> str:
    onset = "" if seq.anomaly_at_ms is None else str(seq.anomaly_at_ms)
    suffix = f",{seq.label},{onset}\n"
    prefix = seq.id + ","
    return "".join(f"{prefix}{t},{float(v)!r}{suffix}" for t, v in enumerate(seq.samples.tolist()))


def write_sequences(dataset: Dataset, writer: BinaryIO) -> None:
    """Serialize ``dataset``; values use shortest round-trip float repr."""
    writer.write((HEADER + "\n").encode("utf-8"))
    for seq in dataset:
        if not isinstance(seq, RawSequence) or len(seq) == 0:
            raise ValidationError("dataset contains an invalid sequence", field="sequences")
        if seq.anomaly_at_ms is not None and seq.label != ANOMALOUS:
            raise ValidationError(f"sequence {seq.id!r}: anomaly_at_ms requires label 1", field="anomaly_at_ms")
        writer.write(_format_rows(seq).encode("utf-8"))


def read_dataset(path: str | os.PathLike[str]) -> Dataset:
    path = Path(path)
    with path.open("rb") as fh:
        return parse_sequences(fh, source_name=path.stem)


def write_dataset(dataset: Dataset, path: str | os.PathLike[str]) -> None:
    with atomic_writer(path) as fh:
        write_sequences(dataset, fh)
