"""Dense GF(2) linear algebra on bit-packed rows.

Matrices store each row as little-endian 64-bit words: column ``j`` lives in
word ``j // 64`` at bit ``j % 64``. Vectors are plain numpy arrays of 0/1
values (``uint8``); a 2-D array is treated as a batch of row vectors.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

WORD = 64


class DimensionError(ValueError):
    """Operand shapes do not agree."""


def _pack(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    rows, cols = bits.shape
    nwords = max(1, -(-cols // WORD))
    padded = np.zeros((rows, nwords * WORD), dtype=np.uint8)
    padded[:, :cols] = bits & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(raw, axis=-1, bitorder="little")[..., :cols]


class BitMatrix:
    """Immutable ``rows x cols`` binary matrix."""

    __slots__ = ("_words", "_rows", "_cols", "_dense")

    def __init__(self, words: np.ndarray, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise DimensionError(f"matrix dimensions must be positive, got {rows}x{cols}")
        words = np.array(words, dtype=np.uint64).reshape(rows, -1)
        if words.shape[1] != max(1, -(-cols // WORD)):
            raise DimensionError("word count does not match column count")
        tail = cols % WORD
        if tail:
            # bits beyond `cols` must never become observable
            words[:, -1] &= np.uint64((1 << tail) - 1)
        words.flags.writeable = False
        self._words = words
        self._rows = rows
        self._cols = cols
        self._dense = None

    @classmethod
    def from_array(cls, bits) -> BitMatrix:
        a = np.atleast_2d(np.asarray(bits))
        if a.ndim != 2:
            raise DimensionError("expected a 2-D array of bits")
        if np.any((a != 0) & (a != 1)):
            raise ValueError("matrix entries must be 0 or 1")
        return cls(_pack(a), a.shape[0], a.shape[1])

    @classmethod
    def identity(cls, k: int) -> BitMatrix:
        return cls.from_array(np.eye(k, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(np.zeros((rows, max(1, -(-cols // WORD))), dtype=np.uint64), rows, cols)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self._rows, self._cols

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_array(self) -> np.ndarray:
        return _unpack(self._words, self._cols)

    def row(self, i: int) -> np.ndarray:
        return _unpack(self._words[i : i + 1], self._cols)[0]

    def dense_float(self) -> np.ndarray:
        # cached float32 copy for BLAS-backed batch products; exact while inner dim < 2**24
        if self._dense is None:
            self._dense = self.to_array().astype(np.float32)
        return self._dense

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(f"bit ({i}, {j}) outside {self._rows}x{self._cols} matrix")
        return int((self._words[i, j // WORD] >> np.uint64(j % WORD)) & np.uint64(1))

    def weight(self) -> int:
        return int(np.unpackbits(self._words.view(np.uint8)).sum())

    def density(self) -> float:
        return self.weight() / (self._rows * self._cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._words.tobytes()))

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return mat_mul(self, other)

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols}, weight={self.weight()})"


def _as_bits(v) -> np.ndarray:
    a = np.asarray(v)
    if a.dtype != np.uint8:
        a = a.astype(np.uint8)
    return a


def mat_vec_mul(v, M: BitMatrix) -> np.ndarray:
    """Row vector times matrix over GF(2).

    ``v`` may be a single length-``M.rows`` vector or a ``(batch, M.rows)``
    array; the result has the matching shape with ``M.cols`` columns.
    """
    v = _as_bits(v)
    if v.shape[-1] != M.rows:
        raise DimensionError(f"vector length {v.shape[-1]} does not match {M.rows} matrix rows")
    if v.ndim == 1:
        idx = np.flatnonzero(v)
        if idx.size == 0:
            return np.zeros(M.cols, dtype=np.uint8)
        acc = np.bitwise_xor.reduce(M.words[idx], axis=0)
        return _unpack(acc[None, :], M.cols)[0]
    if v.ndim != 2:
        raise DimensionError("expected a vector or a 2-D batch of vectors")
    prod = v.astype(np.float32) @ M.dense_float()
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def mat_mul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    return BitMatrix.from_array(mat_vec_mul(A.to_array(), B))


def _column_bits(words: np.ndarray, c: int) -> np.ndarray:
    return ((words[:, c // WORD] >> np.uint64(c % WORD)) & np.uint64(1)).astype(bool)


def invert(M: BitMatrix) -> BitMatrix | None:
    """Gauss-Jordan inverse over GF(2); ``None`` when ``M`` is singular."""
    if M.rows != M.cols:
        raise DimensionError(f"only square matrices are invertible, got {M.rows}x{M.cols}")
    k = M.rows
    nw = M.words.shape[1]
    work = np.hstack([M.words, BitMatrix.identity(k).words])
    for c in range(k):
        below = np.flatnonzero(_column_bits(work[c:], c))
        if below.size == 0:
            return None
        p = c + below[0]
        if p != c:
            work[[c, p]] = work[[p, c]]
        hit = _column_bits(work, c)
        hit[c] = False
        work[hit] ^= work[c]
    return BitMatrix(work[:, nw:], k, k)


def rank(M: BitMatrix) -> int:
    work = M.words.copy()
    r = 0
    for c in range(M.cols):
        if r == M.rows:
            break
        below = np.flatnonzero(_column_bits(work[r:], c))
        if below.size == 0:
            continue
        p = r + below[0]
        if p != r:
            work[[r, p]] = work[[p, r]]
        hit = _column_bits(work, c)
        hit[r] = False
        work[hit] ^= work[r]
        r += 1
    return r


def column_weight(M: BitMatrix, i: int) -> int:
    """Number of ones in column ``i`` (zero-based)."""
    if not 0 <= i < M.cols:
        raise IndexError(f"column {i} outside 0..{M.cols - 1}")
    return int(_column_bits(M.words, i).sum())


def column_weights(M: BitMatrix) -> np.ndarray:
    return M.to_array().sum(axis=0, dtype=np.int64)


def dumps(M: BitMatrix) -> str:
    lines = [f"{M.rows} {M.cols}"]
    for row in M.to_array():
        lines.append("".join("1" if b else "0" for b in row))
    return "\n".join(lines) + "\n"


def loads(text: str | Iterable[str]) -> BitMatrix:
    """Parse the ``rows cols`` + one 0/1 string per row format; ``#`` lines are skipped."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    lines = [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad matrix header {lines[0]!r}") from exc
    body = lines[1 : 1 + rows]
    if len(body) != rows:
        raise ValueError(f"expected {rows} rows, found {len(body)}")
    bits = np.zeros((rows, cols), dtype=np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != cols or set(ln) - {"0", "1"}:
            raise ValueError(f"row {i} is not a {cols}-character 0/1 string")
        bits[i] = np.frombuffer(ln.encode(), dtype=np.uint8) - ord("0")
    return BitMatrix.from_array(bits)
