"""End-to-end frame simulation: scramble, encode, BPSK/AWGN, decode, descramble.

Each trial is a block of frames with its own RNG stream keyed by
``(master seed, grid point, trial index)``. A trial first draws the
scrambled-domain word ``x = u.S`` uniformly (``u = x.S^-1`` is then uniform as
well), then the channel noise. Schemes that share ``k`` and the transmitted
length therefore see identical channel realizations for the same seed, which
gives common random numbers across scheme variants for free.

Only frames with residual errors are descrambled: for an error-free frame the
descrambled word equals ``u`` exactly, since ``S.S^-1 = I``.
"""

from __future__ import annotations

import csv
import functools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import block_codes, ldpc
from .channel import ChannelParams, add_noise, hard_decision, llr, modulate, trial_rng
from .scrambling import ScramblerPair, ScramblerSpec, descramble, generate

SCHEMES = ("unitary-scrambled", "bch-model-scrambled", "ldpc-systematic", "ldpc-scrambled", "ldpc-punctured")
SCRAMBLED = ("unitary-scrambled", "bch-model-scrambled", "ldpc-scrambled")
MOTHER_OF = {"desk": "desk-mother", "paper": "paper-mother"}
CSV_FIELDS = ("scheme", "ebn0_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "flag")
LOW_CONFIDENCE = "low-confidence"


class CheckpointError(IOError):
    pass


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    ebn0_db: tuple[float, ...]
    preset: str | None = None
    k: int | None = None
    n: int | None = None
    t: int | None = None
    scrambler: ScramblerSpec | None = None
    min_frame_errors: int = 100
    max_frames: int = 10_000_000
    batch_size: int = 256
    seed: int = 0
    max_iters: int = ldpc.DEFAULT_MAX_ITERS
    label: str | None = None
    # also emit rows counting message errors before descrambling under this label
    pre_label: str | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.ebn0_db:
            raise ValueError("Eb/N0 grid is empty")
        object.__setattr__(self, "ebn0_db", tuple(float(x) for x in self.ebn0_db))
        if self.min_frame_errors < 1 or self.max_frames < 1 or self.batch_size < 1:
            raise ValueError("min_frame_errors, max_frames and batch_size must be positive")
        if self.scheme in SCRAMBLED and self.scrambler is None:
            raise ValueError(f"scheme {self.scheme} needs a scrambler")
        if self.scheme not in SCRAMBLED and self.scrambler is not None:
            raise ValueError(f"scheme {self.scheme} takes no scrambler")
        if self.scheme == "unitary-scrambled" and not self.k:
            raise ValueError("unitary-scrambled needs k")
        if self.scheme == "bch-model-scrambled" and None in (self.n, self.k, self.t):
            raise ValueError("bch-model-scrambled needs n, k and t")
        if self.scheme.startswith("ldpc") and self.preset is None:
            raise ValueError(f"{self.scheme} needs an LDPC preset")
        if self.pre_label is not None and (self.scheme not in SCRAMBLED or self.pre_label == self.name):
            raise ValueError("pre_label needs a scrambled scheme and a label distinct from the scheme's own")
        if self.scrambler is not None and self.scrambler.k != self.info_length:
            raise ValueError(f"scrambler size {self.scrambler.k} != message length {self.info_length}")

    @property
    def name(self) -> str:
        return self.label or self.scheme

    @property
    def graph_name(self) -> str | None:
        if self.preset is None:
            return None
        if self.scheme == "ldpc-punctured":
            return MOTHER_OF.get(self.preset, self.preset)
        return self.preset

    @property
    def info_length(self) -> int:
        if self.scheme.startswith("ldpc"):
            return ldpc.PRESETS[self.graph_name].k
        return self.k


@dataclass
class PointResult:
    scheme: str
    ebn0_db: float
    k: int
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    # message-position errors before descrambling
    pre_bit_errors: int = 0
    # channel/decoder residual errors over all n positions of failed frames
    residual_errors: int = 0
    n: int = 0
    bit_errors_sq: int = 0
    pre_bit_errors_sq: int = 0
    wall_time: float = 0.0
    min_frame_errors: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.k) if self.frames else math.nan

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan

    @property
    def pre_ber(self) -> float:
        return self.pre_bit_errors / (self.frames * self.k) if self.frames else math.nan

    @property
    def residual_ber(self) -> float:
        """Codeword-level residual BER (errors over all n positions)."""
        return self.residual_errors / (self.frames * self.n) if self.frames else math.nan

    @property
    def ber_stderr(self) -> float:
        """Standard error of ``ber`` from the per-frame error counts."""
        if self.frames < 2:
            return math.nan
        mean = self.bit_errors / self.frames
        var = (self.bit_errors_sq / self.frames - mean * mean) * self.frames / (self.frames - 1)
        return math.sqrt(max(var, 0.0) / self.frames) / self.k

    @property
    def low_confidence(self) -> bool:
        return self.frame_errors < self.min_frame_errors

    def unscrambled(self, label: str) -> PointResult:
        """The same frames scored on the message before descrambling."""
        return PointResult(label, self.ebn0_db, self.k, frames=self.frames, bit_errors=self.pre_bit_errors,
                           frame_errors=self.frame_errors, pre_bit_errors=self.pre_bit_errors,
                           residual_errors=self.residual_errors, n=self.n, bit_errors_sq=self.pre_bit_errors_sq,
                           pre_bit_errors_sq=self.pre_bit_errors_sq, wall_time=self.wall_time,
                           min_frame_errors=self.min_frame_errors)

    def add(self, other: TrialCounts) -> None:
        self.frames += other.frames
        self.bit_errors += other.bit_errors
        self.frame_errors += other.frame_errors
        self.pre_bit_errors += other.pre_bit_errors
        self.residual_errors += other.residual_errors
        self.bit_errors_sq += other.bit_errors_sq
        self.pre_bit_errors_sq += other.pre_bit_errors_sq


@dataclass(frozen=True)
class TrialCounts:
    frames: int
    bit_errors: int
    frame_errors: int
    pre_bit_errors: int
    residual_errors: int
    bit_errors_sq: int
    pre_bit_errors_sq: int


@dataclass
class _Context:
    cfg: SimConfig
    k: int
    n: int
    n_tx: int
    graph: ldpc.TannerGraph | None = None
    generator: block_codes.SystematicGenerator | None = None
    pair: ScramblerPair | None = None
    punct: ldpc.PunctureSet | None = None
    meta: dict = field(default_factory=dict)


@functools.lru_cache(maxsize=8)
def _scrambler(spec: ScramblerSpec) -> ScramblerPair:
    return generate(spec)


def build_context(cfg: SimConfig) -> _Context:
    pair = _scrambler(cfg.scrambler) if cfg.scrambler is not None else None
    if cfg.scheme == "unitary-scrambled":
        return _Context(cfg, cfg.k, cfg.k, cfg.k, pair=pair)
    if cfg.scheme == "bch-model-scrambled":
        spec = block_codes.CodeSpec.bounded_distance(cfg.n, cfg.k, cfg.t)
        gen = block_codes.random_generator(spec, seed=cfg.seed)
        return _Context(cfg, cfg.k, cfg.n, cfg.n, generator=gen, pair=pair)
    graph = ldpc.preset_graph(cfg.graph_name)
    if cfg.scheme == "ldpc-punctured":
        ps = ldpc.PunctureSet.of(graph.n, range(graph.k))
        return _Context(cfg, graph.k, graph.n, ps.transmitted_length, graph=graph, punct=ps)
    return _Context(cfg, graph.k, graph.n, graph.n, graph=graph, pair=pair)


def _point_stream(ebn0_db: float) -> int:
    return int(round(ebn0_db * 1000)) + 1_000_000


def run_trial(ctx: _Context, ebn0_db: float, trial_index: int, frames: int) -> TrialCounts:
    cfg = ctx.cfg
    rng = trial_rng(cfg.seed, trial_index, _point_stream(ebn0_db))
    x = rng.integers(0, 2, (frames, ctx.k), dtype=np.uint8)
    params = ChannelParams(ebn0_db, ctx.k / ctx.n_tx)

    if cfg.scheme == "unitary-scrambled":
        c = x
        y = add_noise(modulate(c), params, rng)
        c_hat = hard_decision(y)
        failed = np.any(c_hat != c, axis=1)
        residual = c_hat ^ c
    elif cfg.scheme == "bch-model-scrambled":
        c = block_codes.encode(x, ctx.generator)
        y = add_noise(modulate(c), params, rng)
        c_hat, failed = block_codes.bounded_distance_decode(hard_decision(y), c, cfg.t)
        residual = c_hat ^ c
    else:
        c = ldpc.ldpc_encode(x, ctx.graph)
        if ctx.punct is not None:
            y = add_noise(modulate(ldpc.puncture_transmit(c, ctx.punct)), params, rng)
            llrs = ldpc.depuncture_llr(llr(y, params), ctx.punct)
        else:
            y = add_noise(modulate(c), params, rng)
            llrs = llr(y, params)
        c_hat, _, _ = ldpc.sum_product_decode(llrs, ctx.graph, cfg.max_iters)
        residual = c_hat ^ c
        failed = np.any(residual != 0, axis=1)

    x_hat = c_hat[:, : ctx.k]
    pre = np.count_nonzero(x_hat != x, axis=1)
    if ctx.pair is not None:
        per_frame = np.zeros(frames, dtype=np.int64)
        bad = np.flatnonzero(pre)
        if bad.size:
            u = descramble(x[bad], ctx.pair)
            u_hat = descramble(x_hat[bad], ctx.pair)
            per_frame[bad] = np.count_nonzero(u_hat != u, axis=1)
    else:
        per_frame = pre
    return TrialCounts(
        frames=frames,
        bit_errors=int(per_frame.sum()),
        frame_errors=int(np.count_nonzero(failed)),
        pre_bit_errors=int(pre.sum()),
        residual_errors=int(np.count_nonzero(residual[failed])),
        bit_errors_sq=int(np.sum(per_frame.astype(np.int64) ** 2)),
        pre_bit_errors_sq=int(np.sum(pre.astype(np.int64) ** 2)),
    )


_WORKER_CTX: _Context | None = None


def _init_worker(cfg: SimConfig) -> None:
    global _WORKER_CTX
    _WORKER_CTX = build_context(cfg)


def _worker_trial(ebn0_db: float, trial_index: int, frames: int) -> TrialCounts:
    return run_trial(_WORKER_CTX, ebn0_db, trial_index, frames)


def run_point(cfg: SimConfig, ebn0_db: float, parallel: int = 1,
              ctx: _Context | None = None, pool: ProcessPoolExecutor | None = None) -> PointResult:
    """Simulate until ``min_frame_errors`` frame errors or ``max_frames`` frames.

    Trials are folded in index order and the stop rule is checked after each
    one, so the counts do not depend on ``parallel``.
    """
    ctx = ctx or build_context(cfg)
    res = PointResult(cfg.name, float(ebn0_db), ctx.k, n=ctx.n, min_frame_errors=cfg.min_frame_errors)
    start = time.perf_counter()
    trial = 0

    def sizes():
        nonlocal trial
        done = trial * cfg.batch_size
        return min(cfg.batch_size, cfg.max_frames - done)

    def finished():
        return res.frame_errors >= cfg.min_frame_errors or res.frames >= cfg.max_frames

    if parallel <= 1 or pool is None:
        while not finished():
            res.add(run_trial(ctx, ebn0_db, trial, sizes()))
            trial += 1
    else:
        while not finished():
            wave = []
            for _ in range(parallel):
                size = sizes()
                if size <= 0:
                    break
                wave.append(pool.submit(_worker_trial, ebn0_db, trial, size))
                trial += 1
            for fut in wave:
                counts = fut.result()
                if not finished():
                    res.add(counts)
    res.wall_time = time.perf_counter() - start
    return res


def run_sweep(cfg: SimConfig, checkpoint: str | Path | None = None, parallel: int = 1,
              resume: bool = False, header: Sequence[str] = ()) -> list[PointResult]:
    """All grid points in order; each finished point is appended to ``checkpoint``.

    With ``resume`` the rows already present for this scheme are reused and
    only the missing grid points are simulated.
    """
    done: dict[float, PointResult] = {}
    path = Path(checkpoint) if checkpoint is not None else None
    if path is not None and resume and path.exists():
        for row in read_csv(path):
            if row.scheme == cfg.name:
                row.min_frame_errors = cfg.min_frame_errors
                done[row.ebn0_db] = row
    elif path is not None:
        _write(path, "w", list(header), None)

    ctx = build_context(cfg)
    pool = None
    if parallel > 1:
        pool = ProcessPoolExecutor(max_workers=parallel, initializer=_init_worker, initargs=(cfg,))
    results = []
    last = None
    try:
        for eb in cfg.ebn0_db:
            if eb in done:
                results.append(done[eb])
                continue
            res = run_point(cfg, eb, parallel, ctx=ctx, pool=pool)
            results.append(res)
            if path is not None:
                extra = [res.unscrambled(cfg.pre_label)] if cfg.pre_label else []
                try:
                    _write(path, "a", [], res, *extra)
                except OSError as exc:
                    raise CheckpointError(
                        f"could not write checkpoint {path}: {exc}; last completed point: {last}"
                    ) from exc
            last = eb
    finally:
        if pool is not None:
            pool.shutdown()
    return results


def _fmt(x: float) -> str:
    return repr(float(x))


def csv_row(res: PointResult) -> list[str]:
    return [res.scheme, _fmt(res.ebn0_db), str(res.frames), str(res.bit_errors), str(res.frame_errors),
            _fmt(res.ber), _fmt(res.fer), LOW_CONFIDENCE if res.low_confidence else ""]


def _write(path: Path, mode: str, header: list[str], *results: PointResult | None) -> None:
    new = mode == "w" or not path.exists() or path.stat().st_size == 0
    with open(path, mode, newline="") as fh:
        if new:
            for line in header:
                fh.write(f"# {line}\n")
            csv.writer(fh).writerow(CSV_FIELDS)
        for res in results:
            if res is not None:
                csv.writer(fh).writerow(csv_row(res))


def write_csv(results: Sequence[PointResult], path: str | Path, header: Sequence[str] = ()) -> None:
    path = Path(path)
    _write(path, "w", list(header), None)
    for r in results:
        _write(path, "a", [], r)


def read_csv(path: str | Path) -> list[PointResult]:
    """Rows of a simulation CSV as partial ``PointResult`` objects (k recovered from BER)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        frames = int(row["frames"])
        bits = int(row["bit_errors"])
        ber = float(row["ber"])
        k = round(bits / (ber * frames)) if bits and ber else 1
        out.append(PointResult(row["scheme"], float(row["ebn0_db"]), k, frames=frames,
                               bit_errors=bits, frame_errors=int(row["frame_errors"])))
    return out
