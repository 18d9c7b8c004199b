"""Reproducible random streams and order-independent chunked execution.

Work is split into fixed-size chunks; chunk ``k`` of stream ``(seed, id)``
always draws from the same generator, so results do not depend on how many
workers process the chunks.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .errors import DomainError

DEFAULT_CHUNK = 1 << 14


@dataclass(frozen=True)
class RngStream:
    """Named random stream.

    Parameters
    ----------
    seed : int
        64-bit seed.
    stream_id : int
        Index of the stream.  Distinct ids give independent streams.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise DomainError("stream_id must be nonnegative")

    def generator(self, chunk: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed),
                                    spawn_key=(int(self.stream_id), int(chunk)))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a numpy Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator(0)
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator(0)
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def chunk_sizes(n: int, chunk_size: int = DEFAULT_CHUNK) -> List[int]:
    if n < 1:
        raise DomainError("need at least one sample")
    full, rest = divmod(int(n), int(chunk_size))
    return [chunk_size] * full + ([rest] if rest else [])


def _run(job):
    fn, stream, k, m = job
    return fn(stream.generator(k), m)


def map_chunks(fn: Callable, n: int, rng: RngStream, chunk_size: int = DEFAULT_CHUNK,
               workers: int = 1) -> list:
    """Evaluate ``fn(generator_k, size_k)`` on every chunk, in chunk order.

    ``fn`` must be picklable when ``workers > 1``.
    """
    if not isinstance(rng, RngStream):
        raise TypeError("chunked execution needs an RngStream")
    jobs = [(fn, rng, k, m) for k, m in enumerate(chunk_sizes(n, chunk_size))]
    if workers <= 1 or len(jobs) == 1:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run, jobs))


@dataclass(frozen=True)
class Moments:
    """Count, mean and centred sum of squares; merges exactly in any grouping."""

    n: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def of(cls, x) -> "Moments":
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        mu = x.mean(axis=0)
        return cls(x.shape[0], mu, ((x - mu) ** 2).sum(axis=0))

    def merge(self, other: "Moments") -> "Moments":
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + delta ** 2 * (self.n * other.n / n)
        return Moments(n, mean, m2)

    @property
    def var(self) -> np.ndarray:
        return self.m2 / max(self.n - 1, 1)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.var / self.n)


def merge_all(parts) -> Moments:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = out.merge(p)
    return out
