"""BPSK over AWGN with code-rate aware Eb/N0 bookkeeping.

Convention: bit 0 -> +1.0, bit 1 -> -1.0; an exact 0.0 sample decides to bit 0.
Randomness comes from numpy's PCG64 generator; Gaussian samples use numpy's
ziggurat ``standard_normal``. Per-trial streams are derived with
``SeedSequence(master_seed, spawn_key=(stream, trial_index))`` so a trial's
draws do not depend on which worker runs it or in what order; ``stream``
separates independent families of trials (e.g. grid points).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float = 1.0

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * db_to_linear(self.ebn0_db))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def trial_rng(master_seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream), int(trial_index)))
    return np.random.Generator(np.random.PCG64(ss))


def modulate(c) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(c, dtype=np.float64)


def add_noise(x, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x + params.sigma * rng.standard_normal(x.shape)


def hard_decision(y) -> np.ndarray:
    return (np.asarray(y) < 0).astype(np.uint8)


def llr(y, params: ChannelParams) -> np.ndarray:
    """Channel LLR log P(0|y)/P(1|y) = 2y/sigma^2."""
    return 2.0 * np.asarray(y, dtype=np.float64) / params.sigma2
