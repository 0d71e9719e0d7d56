from __future__ import annotations

import numpy as np
import pytest

from fmean.core.exceptions import ValidationError
from fmean.stats.streams import Chunk, chunk_ranges, run_chunks, stream


def test_streams_are_reproducible_and_keyed() -> None:
    first = stream(42, 1, 0).random(5)

    assert np.array_equal(first, stream(42, 1, 0).random(5))
    assert not np.array_equal(first, stream(42, 1, 1).random(5))
    assert not np.array_equal(first, stream(43, 1, 0).random(5))


def test_stream_rejects_negative_keys() -> None:
    with pytest.raises(ValidationError, match="non-negative"):
        stream(-1)


def test_chunk_ranges_cover_the_total() -> None:
    chunks = chunk_ranges(10, 4)

    assert [(c.start, c.stop) for c in chunks] == [(0, 4), (4, 8), (8, 10)]
    assert [c.size for c in chunks] == [4, 4, 2]
    assert chunk_ranges(0) == []


def test_chunk_ranges_validate_arguments() -> None:
    with pytest.raises(ValidationError):
        chunk_ranges(-1)
    with pytest.raises(ValidationError):
        chunk_ranges(10, 0)


def test_run_chunks_returns_results_in_chunk_order() -> None:
    chunks = chunk_ranges(100, 7)

    def draw(chunk: Chunk) -> float:
        return float(stream(5, chunk.index).random(chunk.size).sum())

    single = run_chunks(draw, chunks, workers=1)
    pooled = run_chunks(draw, chunks, workers=4)

    assert single == pooled
    assert len(single) == len(chunks)


def test_run_chunks_needs_a_worker() -> None:
    with pytest.raises(ValidationError, match="Worker"):
        run_chunks(lambda chunk: chunk.size, chunk_ranges(3), workers=0)
