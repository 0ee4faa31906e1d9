"""Counter-based random streams.

Every (master seed, repetition, role) triple gets its own Philox key, and round
``t`` of that stream is the counter value ``t``. A round's draws therefore do
not depend on how many draws earlier rounds made.
"""

from __future__ import annotations

import os

import numpy as np

ENV = 0
ADVERSARY = 1
LEARNER = 2
SETUP = 3

_MASK64 = (1 << 64) - 1


def master_seed(cli_seed: int | None, default: int = 0) -> int:
    """``CAL_SEED`` from the environment wins over the command-line value."""
    env = os.environ.get("CAL_SEED")
    if env is not None and env.strip():
        return int(env) & _MASK64
    return (default if cli_seed is None else int(cli_seed)) & _MASK64


class Streams:
    def __init__(self, seed: int, *path: int):
        self.seed = int(seed) & _MASK64
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence([self.seed, *self.path])
        self.key = ss.generate_state(2, dtype=np.uint64)

    def at(self, t: int) -> np.random.Generator:
        counter = np.array([0, 0, int(t), 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self.key, counter=counter))

    def child(self, *path: int) -> Streams:
        return Streams(self.seed, *self.path, *path)


def as_streams(seed_or_streams, role: int) -> Streams:
    if isinstance(seed_or_streams, Streams):
        return seed_or_streams
    return Streams(0 if seed_or_streams is None else seed_or_streams, 0, role)


def categorical(gen: np.random.Generator, p: np.ndarray) -> int:
    """Inverse-CDF draw from probability vector ``p`` with one uniform."""
    cdf = np.cumsum(p)
    u = gen.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(p) - 1))
