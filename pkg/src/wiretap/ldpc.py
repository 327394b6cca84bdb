"""PEG-built LDPC codes with a lower-triangular parity part.

Layout: columns ``0..k-1`` carry information bits, columns ``k..n-1`` parity
bits. The parity part of H is a staircase (dual diagonal): parity column
``j`` touches checks ``j`` and ``j+1``. It is laid down first, and PEG then
places the information-column edges on top of it, so the girth it maximizes
accounts for the staircase cycles too.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

LLR_CLAMP = 30.0
DEFAULT_MAX_ITERS = 100


class GraphConstructionError(RuntimeError):
    pass


class NotTriangularError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Check-to-variable adjacency plus the CSR arrays the decoder needs."""

    n: int
    k: int
    check_vars: tuple[np.ndarray, ...]
    # derived
    edge_var: np.ndarray = field(init=False, repr=False)
    check_ptr: np.ndarray = field(init=False, repr=False)
    var_ptr: np.ndarray = field(init=False, repr=False)
    var_edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.check_vars) != self.n - self.k:
            raise ValueError(f"expected {self.n - self.k} checks, got {len(self.check_vars)}")
        rows = tuple(np.array(sorted(int(v) for v in c), dtype=np.int64) for c in self.check_vars)
        for i, r in enumerate(rows):
            if r.size and (r[0] < 0 or r[-1] >= self.n):
                raise ValueError(f"check {i} references a variable outside 0..{self.n - 1}")
            if np.any(np.diff(r) == 0):
                raise ValueError(f"check {i} has parallel edges")
        object.__setattr__(self, "check_vars", rows)
        edge_var = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        check_ptr = np.zeros(len(rows) + 1, dtype=np.int64)
        check_ptr[1:] = np.cumsum([r.size for r in rows])
        deg = np.bincount(edge_var, minlength=self.n)
        if np.any(deg == 0):
            raise ValueError(f"variable {int(np.argmin(deg))} has no edges")
        order = np.argsort(edge_var, kind="stable")
        var_ptr = np.zeros(self.n + 1, dtype=np.int64)
        var_ptr[1:] = np.cumsum(deg)
        for name, arr in (("edge_var", edge_var), ("check_ptr", check_ptr),
                          ("var_ptr", var_ptr), ("var_edges", order.astype(np.int64))):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.n - self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def num_edges(self) -> int:
        return int(self.edge_var.size)

    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    @functools.cached_property
    def H(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for i, r in enumerate(self.check_vars):
            h[i, r] = 1
        h.flags.writeable = False
        return h

    def syndrome(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.uint8)
        return (c.astype(np.int64) @ self.H.T.astype(np.int64)) & 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and all(
            np.array_equal(a, b) for a, b in zip(self.check_vars, other.check_vars)
        )

    __hash__ = object.__hash__


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _staircase(k: int, m: int) -> list[list[int]]:
    checks = [[] for _ in range(m)]
    for j in range(m):
        checks[j].append(k + j)
        if j + 1 < m:
            checks[j + 1].append(k + j)
    return checks


def peg_construct(n: int, k: int, column_weights: int | Sequence[int] = 3,
                  seed: int | None = 0) -> TannerGraph:
    """Progressive edge growth over the information columns.

    Each new edge of a variable goes to a check at maximum tree distance from
    it (or an unreachable check), ties broken by lowest current check degree
    and then by check rank. ``seed`` fixes a random check ranking; ``None``
    ranks checks by index.
    """
    if not n > k >= 1:
        raise ValueError(f"need n > k >= 1, got n={n}, k={k}")
    m = n - k
    degrees = [column_weights] * k if isinstance(column_weights, int) else list(column_weights)
    if len(degrees) != k:
        raise ValueError(f"degree profile has {len(degrees)} entries for {k} information columns")
    if min(degrees) < 1:
        raise ValueError("variable degrees must be at least 1")
    if max(degrees) > m:
        raise GraphConstructionError(f"degree {max(degrees)} exceeds the {m} available checks")

    rank = list(range(m)) if seed is None else [int(r) for r in np.random.default_rng(seed).permutation(m)]
    checks = _staircase(k, m)
    check_mask = [0] * m
    var_mask = [0] * n
    deg = [0] * m
    for c, vs in enumerate(checks):
        for v in vs:
            check_mask[c] |= 1 << v
            var_mask[v] |= 1 << c
        deg[c] = len(vs)
    all_checks = (1 << m) - 1

    def pick(cands: int) -> int:
        return min(_bits(cands), key=lambda c: (deg[c], rank[c]))

    def farthest(v: int) -> int:
        reached = var_mask[v]
        frontier = reached
        seen = 1 << v
        while True:
            nxt_vars = 0
            for c in _bits(frontier):
                nxt_vars |= check_mask[c]
            nxt_vars &= ~seen
            seen |= nxt_vars
            new = 0
            for u in _bits(nxt_vars):
                new |= var_mask[u]
            new &= ~reached
            if not new:
                rest = all_checks & ~reached
                return rest if rest else frontier
            if reached | new == all_checks:
                return new
            reached |= new
            frontier = new

    for v in sorted(range(k), key=lambda i: degrees[i]):
        for e in range(degrees[v]):
            cands = all_checks if e == 0 else farthest(v)
            cands &= ~var_mask[v]
            if not cands:
                raise GraphConstructionError(f"no free check left for variable {v}")
            c = pick(cands)
            checks[c].append(v)
            check_mask[c] |= 1 << v
            var_mask[v] |= 1 << c
            deg[c] += 1
    return TannerGraph(n, k, tuple(np.array(c) for c in checks))


def girth(graph: TannerGraph) -> int | float:
    """Length of the shortest cycle (``inf`` for a forest), by BFS from each variable."""
    var_checks = [[] for _ in range(graph.n)]
    for c, vs in enumerate(graph.check_vars):
        for v in vs:
            var_checks[int(v)].append(c)
    best = math.inf
    n = graph.n
    for root in range(n):
        # nodes: variables 0..n-1, checks n..n+m-1
        dist = {root: 0}
        parent = {root: -1}
        queue = [root]
        head = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            if 2 * dist[x] + 1 >= best:
                break
            nbrs = [n + c for c in var_checks[x]] if x < n else [int(v) for v in graph.check_vars[x - n]]
            for y in nbrs:
                if y == parent[x]:
                    continue
                if y in dist:
                    best = min(best, dist[x] + dist[y] + 1)
                else:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
    return best


def parity_is_lower_triangular(graph: TannerGraph) -> bool:
    hp = graph.H[:, graph.k:]
    return bool(np.all(np.diag(hp) == 1) and not np.any(np.triu(hp, 1)))


@functools.lru_cache(maxsize=16)
def _encoder_tables(graph: TannerGraph):
    if not parity_is_lower_triangular(graph):
        raise NotTriangularError("parity part of H is not lower triangular with unit diagonal")
    h_info = graph.H[:, : graph.k].astype(np.float32)
    lower = [np.flatnonzero(graph.H[i, graph.k : graph.k + i]) for i in range(graph.m)]
    return h_info, lower


def ldpc_encode(u, graph: TannerGraph) -> np.ndarray:
    """Systematic encoding ``[u | p]`` by forward substitution on the parity part."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != graph.k:
        raise ValueError(f"message length {u.shape[-1]} != k={graph.k}")
    h_info, lower = _encoder_tables(graph)
    batch = np.atleast_2d(u)
    s = ((batch.astype(np.float32) @ h_info.T).astype(np.int64) & 1).astype(np.uint8)
    p = np.empty_like(s)
    for i in range(graph.m):
        acc = s[:, i].copy()
        for j in lower[i]:
            acc ^= p[:, j]
        p[:, i] = acc
    out = np.concatenate([batch, p], axis=1)
    return out[0] if u.ndim == 1 else out


@numba.njit(cache=True)
def _decode_one(llr, check_ptr, edge_var, var_ptr, var_edges, max_iters, hard, v2c, c2v):
    n = llr.shape[0]
    m = check_ptr.shape[0] - 1
    tmax = math.tanh(LLR_CLAMP / 2.0)
    for v in range(n):
        hard[v] = 1 if llr[v] < 0.0 else 0
    ok = True
    for c in range(m):
        s = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            s ^= hard[edge_var[e]]
        if s:
            ok = False
            break
    if ok:
        return 0, True
    for e in range(edge_var.shape[0]):
        v2c[e] = llr[edge_var[e]]
    for it in range(max_iters):
        # check nodes: pairwise boxplus carried as prefix/suffix tanh products
        for c in range(m):
            lo = check_ptr[c]
            hi = check_ptr[c + 1]
            acc = 1.0
            for e in range(lo, hi):
                c2v[e] = acc
                x = v2c[e]
                if x > LLR_CLAMP:
                    x = LLR_CLAMP
                elif x < -LLR_CLAMP:
                    x = -LLR_CLAMP
                # tanh(x/2) through one exp; cheaper than libm tanh
                a = math.expm1(-abs(x))
                t = -a / (2.0 + a)
                if x < 0.0:
                    t = -t
                v2c[e] = t
                acc *= t
            acc = 1.0
            for e in range(hi - 1, lo - 1, -1):
                p = c2v[e] * acc
                acc *= v2c[e]
                if p > tmax:
                    p = tmax
                elif p < -tmax:
                    p = -tmax
                c2v[e] = math.log((1.0 + p) / (1.0 - p))
        # variable nodes
        for v in range(n):
            total = llr[v]
            for j in range(var_ptr[v], var_ptr[v + 1]):
                total += c2v[var_edges[j]]
            hard[v] = 1 if total < 0.0 else 0
            for j in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edges[j]
                v2c[e] = total - c2v[e]
        ok = True
        for c in range(m):
            s = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                s ^= hard[edge_var[e]]
            if s:
                ok = False
                break
        if ok:
            return it + 1, True
    return max_iters, False


@numba.njit(cache=True)
def _decode_batch(llrs, check_ptr, edge_var, var_ptr, var_edges, max_iters, hard, iters, conv):
    ne = edge_var.shape[0]
    v2c = np.empty(ne)
    c2v = np.empty(ne)
    for b in range(llrs.shape[0]):
        it, ok = _decode_one(llrs[b], check_ptr, edge_var, var_ptr, var_edges, max_iters,
                             hard[b], v2c, c2v)
        iters[b] = it
        conv[b] = ok


# Lane engine: ``lanes`` frames are decoded side by side in an (edges, lanes)
# layout so numpy's SIMD tanh/arctanh do the transcendental work and the numba
# passes vectorize over lanes. A lane whose frame stops is refilled at once.

@numba.njit(cache=True)
def _check_pass(t, p, check_ptr, tmax):
    lanes = t.shape[1]
    acc = np.empty(lanes)
    for c in range(check_ptr.shape[0] - 1):
        lo = check_ptr[c]
        hi = check_ptr[c + 1]
        acc[:] = 1.0
        for e in range(lo, hi):
            for b in range(lanes):
                p[e, b] = acc[b]
                acc[b] *= t[e, b]
        acc[:] = 1.0
        for e in range(hi - 1, lo - 1, -1):
            for b in range(lanes):
                q = p[e, b] * acc[b]
                acc[b] *= t[e, b]
                p[e, b] = min(max(q, -tmax), tmax)


@numba.njit(cache=True)
def _var_pass(lv, half_c2v, half_v2c, hard, var_ptr, var_edges):
    """Variable update on half-LLRs: reads atanh outputs, writes clamped x/2 for tanh."""
    lanes = lv.shape[1]
    total = np.empty(lanes)
    half_clamp = 0.5 * LLR_CLAMP
    for v in range(lv.shape[0]):
        total[:] = lv[v]
        for j in range(var_ptr[v], var_ptr[v + 1]):
            e = var_edges[j]
            for b in range(lanes):
                total[b] += 2.0 * half_c2v[e, b]
        for b in range(lanes):
            hard[v, b] = 1 if total[b] < 0.0 else 0
        for j in range(var_ptr[v], var_ptr[v + 1]):
            e = var_edges[j]
            for b in range(lanes):
                x = 0.5 * total[b] - half_c2v[e, b]
                half_v2c[e, b] = min(max(x, -half_clamp), half_clamp)


@numba.njit(cache=True)
def _lane_ok(hard, b, check_ptr, edge_var):
    for c in range(check_ptr.shape[0] - 1):
        s = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            s ^= hard[edge_var[e], b]
        if s:
            return False
    return True


@numba.njit(cache=True)
def _retire_and_refill(llrs, lv, v2c, hard, lane_frame, lane_iter, next_frame, first,
                       check_ptr, edge_var, max_iters, out_hard, out_iters, out_conv):
    """Retire finished lanes and load pending frames; returns the new ``next_frame``."""
    n = lv.shape[0]
    for b in range(lv.shape[1]):
        f = lane_frame[b]
        if f >= 0 and not first:
            lane_iter[b] += 1
            ok = _lane_ok(hard, b, check_ptr, edge_var)
            if not ok and lane_iter[b] < max_iters:
                continue
            for v in range(n):
                out_hard[f, v] = hard[v, b]
            out_iters[f] = lane_iter[b]
            out_conv[f] = ok
            lane_frame[b] = -1
        elif f >= 0:
            continue
        # load frames until one needs decoding or none are left
        while next_frame < llrs.shape[0]:
            f = next_frame
            next_frame += 1
            for v in range(n):
                lv[v, b] = llrs[f, v]
                hard[v, b] = 1 if llrs[f, v] < 0.0 else 0
            if _lane_ok(hard, b, check_ptr, edge_var):
                for v in range(n):
                    out_hard[f, v] = hard[v, b]
                out_iters[f] = 0
                out_conv[f] = True
                continue
            for e in range(edge_var.shape[0]):
                x = 0.5 * lv[edge_var[e], b]
                v2c[e, b] = min(max(x, -0.5 * LLR_CLAMP), 0.5 * LLR_CLAMP)
            lane_frame[b] = f
            lane_iter[b] = 0
            break
        if lane_frame[b] < 0:
            for v in range(n):
                lv[v, b] = 0.0
            for e in range(edge_var.shape[0]):
                v2c[e, b] = 0.0
    return next_frame


def _decode_lanes(llrs, graph: TannerGraph, max_iters: int, lanes: int = 16):
    frames, n = llrs.shape
    ne = graph.num_edges
    lanes = max(1, min(lanes, frames))
    lv = np.zeros((n, lanes))
    v2c = np.zeros((ne, lanes))
    buf = np.empty((ne, lanes))
    c2v = np.empty((ne, lanes))
    hard = np.zeros((n, lanes), dtype=np.uint8)
    lane_frame = np.full(lanes, -1, dtype=np.int64)
    lane_iter = np.zeros(lanes, dtype=np.int64)
    out_hard = np.zeros((frames, n), dtype=np.uint8)
    out_iters = np.zeros(frames, dtype=np.int64)
    out_conv = np.zeros(frames, dtype=np.bool_)
    tmax = math.tanh(LLR_CLAMP / 2.0)
    nxt = _retire_and_refill(llrs, lv, v2c, hard, lane_frame, lane_iter, 0, True,
                             graph.check_ptr, graph.edge_var, max_iters, out_hard, out_iters, out_conv)
    # v2c holds clamped half-LLRs and c2v holds atanh outputs (half-LLRs), so
    # the only full passes outside numba are the two transcendental ones
    while np.any(lane_frame >= 0):
        np.tanh(v2c, out=buf)
        _check_pass(buf, c2v, graph.check_ptr, tmax)
        np.arctanh(c2v, out=c2v)
        _var_pass(lv, c2v, v2c, hard, graph.var_ptr, graph.var_edges)
        nxt = _retire_and_refill(llrs, lv, v2c, hard, lane_frame, lane_iter, nxt, False,
                                 graph.check_ptr, graph.edge_var, max_iters, out_hard, out_iters, out_conv)
    return out_hard, out_conv, out_iters


def sum_product_decode(llr, graph: TannerGraph, max_iters: int = DEFAULT_MAX_ITERS,
                       engine: str = "lanes"):
    """Flooding sum-product decoding with early exit on a zero syndrome.

    ``llr`` holds log P(0)/P(1) per variable (0 at punctured positions); it can
    be one frame or a ``(batch, n)`` array. Returns ``(hard, converged,
    iters_used)`` with per-frame arrays for batched input. Ties decide to 0.

    ``engine="lanes"`` decodes many frames side by side; ``"scalar"`` runs
    one frame at a time and serves as a cross-check.
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape[-1] != graph.n:
        raise ValueError(f"expected {graph.n} LLRs per frame, got {llr.shape[-1]}")
    if not np.all(np.isfinite(llr)):
        raise ValueError("input LLRs must be finite")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    batch = np.ascontiguousarray(np.atleast_2d(llr))
    if engine == "lanes":
        hard, conv, iters = _decode_lanes(batch, graph, max_iters)
    elif engine == "scalar":
        hard = np.zeros(batch.shape, dtype=np.uint8)
        iters = np.zeros(batch.shape[0], dtype=np.int64)
        conv = np.zeros(batch.shape[0], dtype=np.bool_)
        _decode_batch(batch, graph.check_ptr, graph.edge_var, graph.var_ptr, graph.var_edges,
                      max_iters, hard, iters, conv)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if llr.ndim == 1:
        return hard[0], bool(conv[0]), int(iters[0])
    return hard, conv, iters


def boxplus(a: float, b: float) -> float:
    """Exact pairwise check combination in its log-domain (Jacobian) form."""
    return (math.copysign(1.0, a) * math.copysign(1.0, b) * min(abs(a), abs(b))
            + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b))))


@dataclass(frozen=True)
class PunctureSet:
    n: int
    positions: frozenset[int]

    def __post_init__(self):
        bad = [p for p in self.positions if not 0 <= p < self.n]
        if bad:
            raise ValueError(f"puncture positions {sorted(bad)[:5]} outside 0..{self.n - 1}")
        if len(self.positions) >= self.n:
            raise ValueError("cannot puncture every position")

    @classmethod
    def of(cls, n: int, positions) -> PunctureSet:
        return cls(n, frozenset(int(p) for p in positions))

    @functools.cached_property
    def kept(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.positions)] = False
        return np.flatnonzero(mask)

    @property
    def transmitted_length(self) -> int:
        return self.n - len(self.positions)


def puncture_transmit(c, ps: PunctureSet) -> np.ndarray:
    c = np.asarray(c)
    if c.shape[-1] != ps.n:
        raise ValueError(f"codeword length {c.shape[-1]} != puncture set length {ps.n}")
    return c[..., ps.kept]


def depuncture_llr(llr_tx, ps: PunctureSet) -> np.ndarray:
    """Re-expand received LLRs to length n with exact zeros at punctured slots."""
    llr_tx = np.asarray(llr_tx, dtype=np.float64)
    out = np.zeros(llr_tx.shape[:-1] + (ps.n,), dtype=np.float64)
    out[..., ps.kept] = llr_tx
    return out


# --- alist persistence -------------------------------------------------------

def to_alist(graph: TannerGraph) -> str:
    var_checks = [[] for _ in range(graph.n)]
    for c, vs in enumerate(graph.check_vars):
        for v in vs:
            var_checks[int(v)].append(c + 1)
    dv = max(len(x) for x in var_checks)
    dc = max(len(x) for x in graph.check_vars)
    lines = [f"{graph.n} {graph.m}", f"{dv} {dc}",
             " ".join(str(len(x)) for x in var_checks),
             " ".join(str(len(x)) for x in graph.check_vars)]
    for x in var_checks:
        lines.append(" ".join(str(i) for i in x + [0] * (dv - len(x))))
    for x in graph.check_vars:
        vals = [int(v) + 1 for v in x]
        lines.append(" ".join(str(i) for i in vals + [0] * (dc - len(vals))))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> TannerGraph:
    tokens = text.split("\n")
    rows = [ln.split() for ln in tokens if ln.strip()]
    n, m = int(rows[0][0]), int(rows[0][1])
    check_rows = rows[4 + n : 4 + n + m]
    if len(check_rows) != m:
        raise ValueError(f"alist declares {m} checks but lists {len(check_rows)}")
    checks = tuple(np.array([int(x) - 1 for x in r if int(x) > 0]) for r in check_rows)
    return TannerGraph(n, n - m, checks)


def save_alist(graph: TannerGraph, path: str | Path) -> None:
    Path(path).write_text(to_alist(graph))


def load_alist(path: str | Path) -> TannerGraph:
    return from_alist(Path(path).read_text())


# --- presets -----------------------------------------------------------------

@dataclass(frozen=True)
class LdpcPreset:
    """A named code: ``profile`` lists ``(degree, count)`` for the information columns."""

    name: str
    n: int
    k: int
    seed: int
    profile: tuple[tuple[int, int], ...]

    def column_weights(self) -> list[int]:
        out = []
        for degree, count in self.profile:
            out += [degree] * count
        return out


# Information-column profiles. Unpunctured codes use degree 4, which gave a
# steeper waterfall than degree 3 at these lengths. Mother codes for
# puncturing mix in 1.5% degree-2 columns: with all-degree-3 columns PEG gives
# nearly every check two punctured neighbours, so belief propagation has
# almost no check with a single erased input to start from and stalls.
# Each degree-2 column frees one such starting check. More of them move the
# punctured waterfall toward the systematic one; fewer flatten it.
PRESETS = {
    "paper": LdpcPreset("paper", 2364, 1576, 2364, ((4, 1576),)),
    "paper-mother": LdpcPreset("paper-mother", 3940, 1576, 3940, ((2, 24), (3, 1552))),
    "desk": LdpcPreset("desk", 1200, 800, 1200, ((4, 800),)),
    "desk-mother": LdpcPreset("desk-mother", 2000, 800, 2001, ((2, 12), (3, 788))),
}


@functools.lru_cache(maxsize=None)
def preset_graph(name: str) -> TannerGraph:
    try:
        p = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown LDPC preset {name!r}; known: {sorted(PRESETS)}") from None
    return peg_construct(p.n, p.k, p.column_weights(), seed=p.seed)
