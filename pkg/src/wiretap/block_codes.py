"""Systematic linear block codes: unitary rate and an ideal t-error-correcting model.

The t-error-correcting code is a genie-aided bounded-distance decoder, not an
algebraic BCH decoder: up to ``t`` channel errors are always corrected and
heavier patterns pass through unchanged (no miscorrection).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitMatrix, DimensionError, mat_vec_mul

CODE_KINDS = ("unitary", "bch_model")


@dataclass(frozen=True)
class CodeSpec:
    kind: str
    n: int
    k: int
    t: int = 0

    def __post_init__(self):
        if self.kind not in CODE_KINDS:
            raise ValueError(f"unknown code kind {self.kind!r}; expected one of {CODE_KINDS}")
        if not self.n >= self.k >= 1:
            raise ValueError(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        if self.kind == "unitary" and (self.n != self.k or self.t != 0):
            raise ValueError("a unitary code has n == k and corrects nothing")
        if not 0 <= self.t <= self.n:
            raise ValueError(f"need 0 <= t <= n, got t={self.t}")

    @classmethod
    def unitary(cls, k: int) -> CodeSpec:
        return cls("unitary", k, k, 0)

    @classmethod
    def bounded_distance(cls, n: int, k: int, t: int) -> CodeSpec:
        return cls("bch_model", n, k, t)

    @property
    def rate(self) -> float:
        return self.k / self.n


BCH_2047 = CodeSpec.bounded_distance(2047, 1354, 69)


@dataclass(frozen=True)
class SystematicGenerator:
    """G = [I | C]; ``C`` is ``None`` for the unitary code."""

    k: int
    n: int
    C: BitMatrix | None = None

    def __post_init__(self):
        if self.C is None:
            if self.n != self.k:
                raise DimensionError("a generator without parity part must have n == k")
        elif self.C.shape != (self.k, self.n - self.k):
            raise DimensionError(f"C must be {self.k}x{self.n - self.k}, got {self.C.rows}x{self.C.cols}")

    @property
    def G(self) -> BitMatrix:
        eye = np.eye(self.k, dtype=np.uint8)
        if self.C is None:
            return BitMatrix.from_array(eye)
        return BitMatrix.from_array(np.hstack([eye, self.C.to_array()]))


def random_generator(spec: CodeSpec, seed: int = 0) -> SystematicGenerator:
    """Generator for ``spec``; the parity part of a bch_model code is random.

    Only needed when actual codewords are transmitted: the bounded-distance
    model depends on the channel error pattern alone.
    """
    if spec.n == spec.k:
        return SystematicGenerator(spec.k, spec.n)
    rng = np.random.default_rng(seed)
    C = BitMatrix.from_array(rng.integers(0, 2, (spec.k, spec.n - spec.k), dtype=np.uint8))
    return SystematicGenerator(spec.k, spec.n, C)


def encode(u, gen: SystematicGenerator) -> np.ndarray:
    """``[u | u.C]`` for one word or a batch."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != gen.k:
        raise DimensionError(f"input length {u.shape[-1]} != k={gen.k}")
    if gen.C is None:
        return u.copy()
    return np.concatenate([u, mat_vec_mul(u, gen.C)], axis=-1)


def bounded_distance_decode(received, transmitted, t: int):
    """Ideal decoder: correct iff the error weight is at most ``t``.

    Works on single words or ``(batch, n)`` arrays; returns ``(decoded,
    frame_error)`` with a bool or a bool array.
    """
    received = np.asarray(received, dtype=np.uint8)
    transmitted = np.asarray(transmitted, dtype=np.uint8)
    if received.shape != transmitted.shape:
        raise DimensionError(f"shape mismatch {received.shape} vs {transmitted.shape}")
    wt = np.count_nonzero(received != transmitted, axis=-1)
    failed = wt > t
    decoded = np.where(np.expand_dims(failed, -1), received, transmitted)
    if received.ndim == 1:
        return decoded, bool(failed)
    return decoded, failed
