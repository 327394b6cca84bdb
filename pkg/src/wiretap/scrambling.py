"""Scrambling matrix pairs (S, S^-1) and the scramble/descramble maps."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gf2 import BitMatrix, DimensionError, column_weights, dumps, invert, loads, mat_vec_mul

KINDS = ("identity", "regular", "dense", "perfect")
MAX_ATTEMPTS = 100


class ScramblerConstructionError(RuntimeError):
    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (attempts made: {attempts})")
        self.attempts = attempts


@dataclass(frozen=True)
class ScramblerSpec:
    """What scrambler to build.

    ``regular`` fixes every column weight of S^-1 to ``w``; ``dense`` draws
    i.i.d. Bernoulli(``density``) entries for S^-1. ``perfect`` is an
    analysis-only marker and never becomes a matrix.
    """

    kind: str
    k: int
    w: int | None = None
    density: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scrambler kind {self.kind!r}; expected one of {KINDS}")
        if self.k < 1:
            raise ValueError("scrambler dimension k must be positive")
        if self.kind == "regular" and (self.w is None or not 1 <= self.w <= self.k):
            raise ValueError(f"regular scrambler needs 1 <= w <= k, got w={self.w}")
        if self.kind == "dense" and (self.density is None or not 0 < self.density <= 1):
            raise ValueError(f"dense scrambler needs 0 < density <= 1, got {self.density}")


@dataclass(frozen=True)
class ScramblerPair:
    S: BitMatrix
    S_inv: BitMatrix
    spec: ScramblerSpec | None = None

    @property
    def k(self) -> int:
        return self.S.rows

    def inverse_column_weights(self) -> np.ndarray:
        return column_weights(self.S_inv)


def _regular_candidate(rng: np.random.Generator, k: int, w: int) -> np.ndarray:
    # per column: w distinct rows chosen uniformly
    rows = np.argpartition(rng.random((k, k)), w - 1, axis=0)[:w]
    m = np.zeros((k, k), dtype=np.uint8)
    m[rows, np.arange(k)[None, :]] = 1
    return m


def generate(spec: ScramblerSpec, max_attempts: int = MAX_ATTEMPTS) -> ScramblerPair:
    """Build (S, S^-1) deterministically from ``spec.seed``.

    The weight or density constraint is imposed on S^-1; S is its inverse.
    """
    k = spec.k
    if spec.kind == "perfect":
        raise ValueError("perfect scrambling is an analytic model and has no matrix realization")
    if spec.kind == "identity":
        eye = BitMatrix.identity(k)
        return ScramblerPair(eye, eye, spec)

    rng = np.random.default_rng(spec.seed)
    if spec.kind == "regular":
        if spec.w == 1:
            # weight-1 columns are invertible only as a permutation
            perm = rng.permutation(k)
            s_inv = BitMatrix.from_array(np.eye(k, dtype=np.uint8)[perm])
            return ScramblerPair(invert(s_inv), s_inv, spec)
        if spec.w % 2 == 0:
            # all columns even => the all-ones row combination vanishes => singular
            raise ScramblerConstructionError(
                f"no invertible {k}x{k} matrix has every column of even weight w={spec.w}", 0
            )

    for attempt in range(1, max_attempts + 1):
        if spec.kind == "regular":
            cand = _regular_candidate(rng, k, spec.w)
        else:
            cand = (rng.random((k, k)) < spec.density).astype(np.uint8)
        s_inv = BitMatrix.from_array(cand)
        s = invert(s_inv)
        if s is not None:
            return ScramblerPair(s, s_inv, spec)
    raise ScramblerConstructionError(f"no invertible {spec.kind} scrambler found for k={k}", max_attempts)


def scramble(u, pair: ScramblerPair) -> np.ndarray:
    """``u . S`` for one message or a batch of messages."""
    u = np.asarray(u)
    if u.shape[-1] != pair.k:
        raise DimensionError(f"message length {u.shape[-1]} != scrambler size {pair.k}")
    return mat_vec_mul(u, pair.S)


def descramble(c_l, pair: ScramblerPair) -> np.ndarray:
    """``c_l . S^-1``; residual errors ``e_l`` come out as ``e_l . S^-1``."""
    c_l = np.asarray(c_l)
    if c_l.shape[-1] != pair.k:
        raise DimensionError(f"word length {c_l.shape[-1]} != scrambler size {pair.k}")
    return mat_vec_mul(c_l, pair.S_inv)


def save(pair: ScramblerPair, path: str | Path) -> None:
    spec = pair.spec
    header = f"# scrambler kind={spec.kind if spec else 'explicit'} k={pair.k}"
    if spec is not None:
        header += f" w={spec.w if spec.w is not None else ''}"
        header += f" density={spec.density if spec.density is not None else ''} seed={spec.seed}"
    Path(path).write_text(header + "\n" + dumps(pair.S) + dumps(pair.S_inv))


def load(path: str | Path) -> ScramblerPair:
    lines = Path(path).read_text().splitlines()
    meta = {}
    if lines and lines[0].startswith("# scrambler"):
        for tok in lines[0].split()[2:]:
            key, _, val = tok.partition("=")
            meta[key] = val
    body = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    rows = int(body[0].split()[0])
    S = loads(body[: rows + 1])
    S_inv = loads(body[rows + 1 :])
    if S @ S_inv != BitMatrix.identity(S.rows):
        raise ValueError(f"{path}: stored matrices are not inverses of each other")
    spec = None
    if meta.get("kind") in KINDS:
        spec = ScramblerSpec(
            kind=meta["kind"],
            k=int(meta["k"]),
            w=int(meta["w"]) if meta.get("w") else None,
            density=float(meta["density"]) if meta.get("density") else None,
            seed=int(meta.get("seed") or 0),
        )
    return ScramblerPair(S, S_inv, spec)
