"""Run configuration: INI-style sections of ``key = value`` lines.

Parsing is done by :mod:`configparser`; this module adds typed accessors whose
errors carry ``path:line`` so a bad value points at the offending line.

Grids accept a comma list (``-1, 0, 2.5``) or an inclusive range
``start:stop:step`` (``-6:12:0.25``); both forms can be mixed.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from pathlib import Path


class ConfigError(ValueError):
    pass


class Section:
    """Typed view of one config section that remembers where each key lives."""

    def __init__(self, cfg: Config, name: str):
        self.cfg = cfg
        self.name = name
        self._data = cfg.parser[name]
        self._used: set[str] = set()

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def keys(self):
        return list(self._data.keys())

    def where(self, key: str | None = None) -> str:
        return f"{self.cfg.path}:{self.cfg.line_of(self.name, key)}"

    def fail(self, key: str | None, msg: str):
        raise ConfigError(f"{self.where(key)}: [{self.name}] {msg}")

    def raw(self, key: str, default=None, required: bool = False) -> str | None:
        self._used.add(key)
        if key not in self._data:
            if required:
                self.fail(None, f"missing required key {key!r}")
            return default
        return self._data[key].strip()

    def get_str(self, key: str, default: str | None = None, required: bool = False,
                choices=None) -> str | None:
        val = self.raw(key, default, required)
        if val is not None and choices is not None and val not in choices:
            self.fail(key, f"{key} = {val!r} is not one of {', '.join(choices)}")
        return val

    def get_int(self, key: str, default: int | None = None, required: bool = False,
                minimum: int | None = None) -> int | None:
        val = self.raw(key, None, required)
        if val is None:
            return default
        try:
            out = int(val)
        except ValueError:
            self.fail(key, f"{key} = {val!r} is not an integer")
        if minimum is not None and out < minimum:
            self.fail(key, f"{key} must be >= {minimum}, got {out}")
        return out

    def get_float(self, key: str, default: float | None = None, required: bool = False) -> float | None:
        val = self.raw(key, None, required)
        if val is None:
            return default
        try:
            out = float(val)
        except ValueError:
            self.fail(key, f"{key} = {val!r} is not a number")
        if not math.isfinite(out):
            self.fail(key, f"{key} must be finite")
        return out

    def get_grid(self, key: str, required: bool = True) -> list[float]:
        val = self.raw(key, None, required)
        if val is None:
            return []
        try:
            grid = parse_grid(val)
        except ValueError as exc:
            self.fail(key, f"{key}: {exc}")
        if not grid:
            self.fail(key, f"{key} is empty")
        return grid

    def get_list(self, key: str, required: bool = True) -> list[str]:
        val = self.raw(key, None, required)
        items = [x.strip() for x in (val or "").split(",") if x.strip()]
        if required and not items:
            self.fail(key, f"{key} is empty")
        return items

    def check_unknown(self) -> None:
        for key in self._data:
            if key not in self._used:
                self.fail(key, f"unknown key {key!r}")


def parse_grid(text: str) -> list[float]:
    out: list[float] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise ValueError(f"range {part!r} must be start:stop:step")
            start, stop, step = (float(b) for b in bits)
            if step <= 0:
                raise ValueError(f"range step must be positive in {part!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            # rounding keeps grid values free of accumulated float noise
            out.extend(round(start + i * step, 10) for i in range(max(count, 0)))
        else:
            out.append(float(part))
    return out


class Config:
    def __init__(self, path: str | Path, text: str):
        self.path = str(path)
        self.text = text
        self.parser = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#", ";"), strict=True,
            default_section="\x00defaults")
        try:
            self.parser.read_string(text, source=self.path)
        except configparser.MissingSectionHeaderError as exc:
            raise ConfigError(f"{self.path}:{exc.lineno}: key outside of any [section]") from None
        except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
            raise ConfigError(f"{self.path}:{exc.lineno}: {exc.message.split(': ', 1)[-1]}") from None
        except configparser.ParsingError as exc:
            lineno, line = exc.errors[0]
            raise ConfigError(f"{self.path}:{lineno}: cannot parse {line.strip()!r}") from None
        self._lines = text.splitlines()

    @classmethod
    def load(cls, path: str | Path) -> Config:
        return cls(path, Path(path).read_text())

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]

    def sections(self, prefix: str | None = None) -> list[str]:
        names = self.parser.sections()
        if prefix is None:
            return names
        return [s for s in names if s == prefix or s.startswith(prefix + " ")]

    def section(self, name: str) -> Section:
        if not self.parser.has_section(name):
            raise ConfigError(f"{self.path}:1: missing section [{name}]")
        return Section(self, name)

    def line_of(self, section: str, key: str | None = None) -> int:
        header = re.compile(r"^\s*\[\s*" + re.escape(section) + r"\s*\]")
        keyline = re.compile(r"^\s*" + re.escape(key or "") + r"\s*[=:]", re.IGNORECASE)
        inside = False
        found = 1
        for i, line in enumerate(self._lines, 1):
            if header.match(line):
                inside = True
                found = i
                if key is None:
                    return i
                continue
            if inside and re.match(r"^\s*\[", line):
                break
            if inside and key and keyline.match(line):
                return i
        return found
