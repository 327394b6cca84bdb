"""``wiretap`` command line: analytic sweeps, simulations, gap reports.

Exit codes: 0 success (possibly with warnings), 1 config error, 2 runtime
error, 3 I/O error. See README.md for the config schema.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import math
import os
import sys
from pathlib import Path

from . import analytic, ldpc, montecarlo, secgap
from .config import Config, ConfigError, Section
from .scrambling import ScramblerSpec

OUT_DIR_ENV = "WIRETAP_OUT_DIR"
COMMANDS = ("analytic", "simulate", "gap", "ber-vs-gap")
ANALYTIC_FIELDS = ("scheme", "ebn0_db", "ber", "fer")
GAP_FIELDS = ("scheme", "pe_b_target", "pe_e_target", "ebn0_b_db", "ebn0_e_db", "gap_db", "error")
BER_GAP_FIELDS = ("scheme", "gap_db", "pe_e")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


def _fmt(x: float) -> str:
    return repr(float(x))


def _header(command: str, seed: int, cfg: Config) -> list[str]:
    return [f"wiretap {command} seed={seed} config={cfg.digest}"]


def _stamp() -> str:
    return f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n"


def _open_csv(path: Path, header: list[str], fields) -> tuple:
    fh = open(path, "w", newline="")
    for line in header:
        fh.write(f"# {line}\n")
    fh.write(_stamp())
    writer = csv.writer(fh)
    writer.writerow(fields)
    return fh, writer


def _section_label(name: str, prefix: str) -> str | None:
    rest = name[len(prefix):].strip()
    return rest or None


def _w_values(sec: Section, key: str = "w") -> list:
    out = []
    for item in sec.get_list(key):
        if item == analytic.PERFECT:
            out.append(analytic.PERFECT)
            continue
        try:
            w = int(item)
        except ValueError:
            sec.fail(key, f"w entry {item!r} is neither an integer nor 'perfect'")
        if w < 1:
            sec.fail(key, f"w entries must be >= 1, got {w}")
        out.append(w)
    return out


def _code_params(sec: Section, scheme: str) -> dict:
    k = sec.get_int("k", required=True, minimum=1)
    n = t = None
    if scheme == "bch_model":
        n = sec.get_int("n", required=True, minimum=1)
        t = sec.get_int("t", required=True, minimum=0)
        if n < k:
            sec.fail("n", f"n={n} must be >= k={k}")
    return {"k": k, "n": n, "t": t}


# ---------------------------------------------------------------- analytic

def cmd_analytic(cfg: Config, out: Path, seed: int) -> int:
    jobs = []
    for name in cfg.sections("analytic") or [None]:
        if name is None:
            raise ConfigError(f"{cfg.path}:1: no [analytic] section")
        sec = cfg.section(name)
        scheme = sec.get_str("scheme", required=True, choices=("unitary", "bch_model"))
        params = _code_params(sec, scheme)
        ws = _w_values(sec)
        grid = sec.get_grid("ebn0_db")
        sec.check_unknown()
        jobs.append((scheme, params, ws, grid))
    _check_extra_sections(cfg, ("run", "analytic"))
    fh, writer = _open_csv(out, _header("analytic", seed, cfg), ANALYTIC_FIELDS)
    with fh:
        for scheme, params, ws, grid in jobs:
            for w in ws:
                for eb in grid:
                    p = analytic.curve_point(scheme, eb, w=w, **params)
                    writer.writerow([p.scheme, _fmt(eb), _fmt(p.p_e), _fmt(p.p_f)])
    return EXIT_OK


# ---------------------------------------------------------------- simulate

def _scrambler(sec: Section, k: int, seed: int) -> ScramblerSpec | None:
    kind = sec.get_str("scrambler", None, choices=("identity", "regular", "dense"))
    w = sec.get_int("w", None, minimum=1)
    density = sec.get_float("density", None)
    sseed = sec.get_int("scrambler_seed", seed, minimum=0)
    if kind is None:
        if w is not None or density is not None:
            sec.fail("w" if w is not None else "density", "scrambler parameters given without 'scrambler'")
        return None
    try:
        return ScramblerSpec(kind, k, w=w, density=density, seed=sseed)
    except ValueError as exc:
        sec.fail("scrambler", str(exc))


def sim_config(sec: Section, seed: int) -> montecarlo.SimConfig:
    scheme = sec.get_str("scheme", required=True, choices=montecarlo.SCHEMES)
    preset = sec.get_str("preset", None)
    k = n = t = None
    if scheme.startswith("ldpc"):
        if preset is None:
            sec.fail(None, f"{scheme} needs 'preset' (one of {', '.join(sorted(ldpc.PRESETS))})")
        if preset not in ldpc.PRESETS:
            sec.fail("preset", f"unknown preset {preset!r}; known: {', '.join(sorted(ldpc.PRESETS))}")
        k = ldpc.PRESETS[montecarlo.MOTHER_OF.get(preset, preset) if scheme == "ldpc-punctured" else preset].k
    else:
        k = sec.get_int("k", required=True, minimum=1)
        if scheme == "bch-model-scrambled":
            n = sec.get_int("n", required=True, minimum=1)
            t = sec.get_int("t", required=True, minimum=0)
    scr = _scrambler(sec, k, seed)
    kw = dict(
        scheme=scheme, ebn0_db=tuple(sec.get_grid("ebn0_db")), preset=preset,
        k=k if not scheme.startswith("ldpc") else None, n=n, t=t, scrambler=scr,
        min_frame_errors=sec.get_int("min_frame_errors", 100, minimum=1),
        max_frames=sec.get_int("max_frames", 10_000_000, minimum=1),
        batch_size=sec.get_int("batch_size", 256, minimum=1),
        max_iters=sec.get_int("max_iters", ldpc.DEFAULT_MAX_ITERS, minimum=1),
        seed=seed, label=sec.get_str("label", _section_label(sec.name, "simulate")),
        pre_label=sec.get_str("unscrambled_label", None),
    )
    sec.check_unknown()
    try:
        return montecarlo.SimConfig(**kw)
    except ValueError as exc:
        sec.fail(None, str(exc))


def _read_header(path: Path) -> str | None:
    with open(path) as fh:
        for line in fh:
            if line.startswith("# wiretap "):
                return line[2:].strip()
            if not line.startswith("#"):
                break
    return None


def cmd_simulate(cfg: Config, out: Path, seed: int, parallel: int = 1, resume: bool = False,
                 log=None) -> int:
    log = log or sys.stderr
    names = cfg.sections("simulate")
    if not names:
        raise ConfigError(f"{cfg.path}:1: no [simulate] section")
    sims = [sim_config(cfg.section(name), seed) for name in names]
    labels = [s.name for s in sims] + [s.pre_label for s in sims if s.pre_label]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{cfg.path}:1: duplicate simulation labels {labels}; set 'label'")
    _check_extra_sections(cfg, ("run", "simulate"))
    header = _header("simulate", seed, cfg)
    if resume and out.exists():
        found = _read_header(out)
        if found != header[0]:
            raise ConfigError(
                f"{cfg.path}:1: refusing to resume {out}: it was written by {found!r}, "
                f"this run is {header[0]!r}")
    elif not resume or not out.exists():
        with open(out, "w", newline="") as fh:
            for line in header:
                fh.write(f"# {line}\n")
            fh.write(_stamp())
            csv.writer(fh).writerow(montecarlo.CSV_FIELDS)
    flagged = 0
    for sim in sims:
        rows = montecarlo.run_sweep(sim, out, parallel=parallel, resume=True)
        for r in rows:
            print(f"{sim.name} {r.ebn0_db:g} dB: frames={r.frames} fe={r.frame_errors} "
                  f"ber={r.ber:.3e}", file=log)
            flagged += r.frames > 0 and r.frame_errors < sim.min_frame_errors
    if flagged:
        print(f"warning: {flagged} point(s) flagged {montecarlo.LOW_CONFIDENCE}", file=log)
    return EXIT_OK


# ---------------------------------------------------------------- gap / ber-vs-gap

def _targets(cfg: Config) -> tuple[float, float, list[float] | None, Section | None]:
    if not cfg.parser.has_section("targets"):
        return secgap.DEFAULT_PE_B, secgap.DEFAULT_PE_E, None, None
    sec = cfg.section("targets")
    pe_b = sec.get_float("pe_b", secgap.DEFAULT_PE_B)
    pe_e = sec.get_float("pe_e", secgap.DEFAULT_PE_E)
    for key, val in (("pe_b", pe_b), ("pe_e", pe_e)):
        if not 0 < val < 1:
            sec.fail(key, f"{key} must lie in (0, 1), got {val}")
    gaps = sec.get_grid("gaps", required=False) or None
    sec.check_unknown()
    return pe_b, pe_e, gaps, sec


def _curve(cfg: Config, name: str):
    """Returns ``(label, builder)``; the builder raises per-curve runtime errors."""
    sec = cfg.section(name)
    label = _section_label(name, "curve") or "curve"
    source = sec.get_str("source", required=True, choices=("analytic", "simulated"))
    if source == "analytic":
        scheme = sec.get_str("scheme", required=True, choices=("unitary", "bch_model"))
        params = _code_params(sec, scheme)
        ws = _w_values(sec)
        if len(ws) != 1:
            sec.fail("w", "a gap curve takes exactly one w")
        lo = sec.get_float("domain_min", -10.0)
        hi = sec.get_float("domain_max", 20.0)
        if not lo < hi:
            sec.fail("domain_max", "domain_max must exceed domain_min")
        sec.check_unknown()
        return label, lambda: secgap.analytic_curve(scheme, w=ws[0], domain=(lo, hi), **params)
    csv_path = Path(sec.get_str("csv", required=True))
    if not csv_path.is_absolute():
        csv_path = Path(cfg.path).parent / csv_path
    row_scheme = sec.get_str("scheme", label)
    sec.check_unknown()

    def build():
        rows = [r for r in montecarlo.read_csv(csv_path) if r.scheme == row_scheme]
        pts = [secgap.CurvePoint(r.ebn0_db, r.ber, r.frame_errors) for r in rows]
        return secgap.SimulatedCurve(pts, row_scheme)

    return label, build


def _curves(cfg: Config):
    names = cfg.sections("curve")
    if not names:
        raise ConfigError(f"{cfg.path}:1: no [curve NAME] sections")
    curves = [_curve(cfg, n) for n in names]
    _check_extra_sections(cfg, ("run", "targets", "curve"))
    return curves


def cmd_gap(cfg: Config, out: Path, seed: int, log=None) -> int:
    log = log or sys.stderr
    pe_b, pe_e, _, sec = _targets(cfg)
    if pe_b > pe_e:
        sec.fail("pe_b", f"pe_b={pe_b} exceeds pe_e={pe_e}")
    curves = _curves(cfg)
    warnings = 0
    fh, writer = _open_csv(out, _header("gap", seed, cfg), GAP_FIELDS)
    with fh:
        for label, build in curves:
            try:
                g = secgap.security_gap(build(), pe_b, pe_e)
            except (ValueError, OSError) as exc:
                warnings += 1
                print(f"warning: {label}: {exc}", file=log)
                writer.writerow([label, _fmt(pe_b), _fmt(pe_e), "nan", "nan", "nan", str(exc)])
                continue
            writer.writerow([label, _fmt(pe_b), _fmt(pe_e), _fmt(g.ebn0_b_db), _fmt(g.ebn0_e_db),
                             _fmt(g.gap_db), ""])
    if warnings:
        print(f"{warnings} warning(s)", file=log)
    return EXIT_OK


def cmd_ber_vs_gap(cfg: Config, out: Path, seed: int, log=None) -> int:
    log = log or sys.stderr
    pe_b, _, gaps, sec = _targets(cfg)
    if gaps is None:
        raise ConfigError(f"{cfg.path}:1: ber-vs-gap needs [targets] gaps = start:stop:step")
    curves = _curves(cfg)
    warnings = 0
    fh, writer = _open_csv(out, _header("ber-vs-gap", seed, cfg), BER_GAP_FIELDS)
    with fh:
        for label, build in curves:
            try:
                pts = secgap.ber_vs_gap(build(), pe_b, gaps)
            except (ValueError, OSError) as exc:
                warnings += 1
                print(f"warning: {label}: {exc}", file=log)
                continue
            for g, pe in pts:
                warnings += math.isnan(pe)
                writer.writerow([label, _fmt(g), _fmt(pe)])
    if warnings:
        print(f"{warnings} warning(s)", file=log)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def _check_extra_sections(cfg: Config, allowed) -> None:
    for name in cfg.sections():
        if not any(name == a or name.startswith(a + " ") for a in allowed):
            raise ConfigError(f"{cfg.path}:{cfg.line_of(name)}: unexpected section [{name}]")


def _seed(cfg: Config, override: int | None) -> int:
    if override is not None:
        return override
    if cfg.parser.has_section("run"):
        sec = cfg.section("run")
        seed = sec.get_int("seed", 0, minimum=0)
        sec.check_unknown()
        return seed
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wiretap", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--out", help=f"output CSV (default: ${OUT_DIR_ENV} or cwd, <command>.csv)")
    p.add_argument("--seed", type=int, help="master seed; overrides [run] seed")
    p.add_argument("--parallel", type=int, default=1, help="worker processes for simulate")
    p.add_argument("--resume", action="store_true", help="continue an interrupted simulate run")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.parallel < 1:
        print("error: --parallel must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else Path(os.environ.get(OUT_DIR_ENV, ".")) / f"{args.command}.csv"
    try:
        cfg = Config.load(args.config)
        seed = _seed(cfg, args.seed)
        out.parent.mkdir(parents=True, exist_ok=True)
        if args.command == "analytic":
            return cmd_analytic(cfg, out, seed)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, seed, args.parallel, args.resume)
        if args.command == "gap":
            return cmd_gap(cfg, out, seed)
        return cmd_ber_vs_gap(cfg, out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - any library failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
