"""Reproducible random streams for Monte Carlo work.

All randomness comes from numpy's Philox counter-based bit generator, keyed
by a SeedSequence built from (seed, *key). Work is cut into chunks of a fixed
size; chunk i always draws from the stream keyed (seed, tag, i). Results
therefore do not depend on how many workers process the chunks.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

from ..core.exceptions import ValidationError

LOGGER = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 8192

T = TypeVar("T")


def stream(seed: int, *key: int) -> np.random.Generator:
    """A Philox generator for the stream identified by (seed, *key)."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValidationError("Stream seeds and keys must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


@dataclass(frozen=True)
class Chunk:
    index: int
    start: int
    stop: int

    @property
    def size(self) -> int:
        return self.stop - self.start


def chunk_ranges(total: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[Chunk]:
    """Split range(total) into consecutive chunks of at most `chunk_size`."""
    if total < 0:
        raise ValidationError("Cannot split a negative number of replicates")
    if chunk_size < 1:
        raise ValidationError("Chunk size must be positive")
    return [
        Chunk(index=i, start=start, stop=min(start + chunk_size, total))
        for i, start in enumerate(range(0, total, chunk_size))
    ]


def run_chunks(
    task: Callable[[Chunk], T],
    chunks: list[Chunk],
    workers: int = 1,
) -> list[T]:
    """Run `task` on every chunk and return results in chunk order."""
    if workers < 1:
        raise ValidationError("Worker count must be positive")
    LOGGER.debug("running %d chunk(s) on %d worker(s)", len(chunks), workers)
    if workers == 1 or len(chunks) <= 1:
        return [task(chunk) for chunk in chunks]

    results: dict[int, T] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(task, chunk): chunk.index for chunk in chunks}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[chunk.index] for chunk in chunks]
