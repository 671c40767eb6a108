"""Run configuration files and CSV output.

Configuration grammar (read with :mod:`configparser`, UTF-8): ``key = value``
lines grouped under ``[grid]``, ``[fields]`` and ``[physics]``; ``#`` and ``;``
start comments. Lists are comma separated. Unknown sections or keys are
errors so that typos do not silently fall back to defaults.

Snapshot CSV columns are ``t,x,y,z,component_id,value``. For spinors
``component_id`` 0..7 indexes the blades
``1, g0g1, g0g2, g1g2, g0g3, g1g3, g2g3, g0g1g2g3``; for bivectors 0..5
indexes ``g0g1, g0g2, g1g2, g0g3, g1g3, g2g3`` (ascending bitmask order).
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .fields import BIVECTOR_MASKS, SPINOR_MASKS

SECTIONS = ("grid", "fields", "physics")

SPINOR_COMPONENTS = tuple(
    "1" if m == 0 else "".join(f"g{i}" for i in range(4) if m >> i & 1) for m in SPINOR_MASKS
)
BIVECTOR_COMPONENTS = tuple("".join(f"g{i}" for i in range(4) if m >> i & 1) for m in BIVECTOR_MASKS)


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    """Parsed configuration: one ``{key: raw string}`` map per section."""

    path: Path
    grid: dict
    fields: dict
    physics: dict

    def _take(self, section: str, key: str):
        table = getattr(self, section)
        if key not in table:
            return None
        return table[key]

    def get_float(self, section: str, key: str, default: float | None = None) -> float:
        raw = self._take(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"[{section}] {key} is required")
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None

    def get_int(self, section: str, key: str, default: int | None = None) -> int:
        raw = self._take(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"[{section}] {key} is required")
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None

    def get_str(self, section: str, key: str, default: str | None = None) -> str:
        raw = self._take(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"[{section}] {key} is required")
            return default
        return raw.strip()

    def get_list(self, section: str, key: str, length: int | None = None,
                 default: Iterable[float] | None = None) -> np.ndarray:
        raw = self._take(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"[{section}] {key} is required")
            return np.asarray(list(default), dtype=float)
        try:
            values = np.array([float(v) for v in raw.split(",") if v.strip()])
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected comma-separated numbers") from None
        if length is not None and len(values) != length:
            raise ConfigError(f"[{section}] {key}: expected {length} values, got {len(values)}")
        return values

    def check_keys(self, allowed: dict[str, set[str]]):
        for section in SECTIONS:
            extra = set(getattr(self, section)) - allowed.get(section, set())
            if extra:
                raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(extra))}")


def read_config(path) -> Config:
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    unknown = set(parser.sections()) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(sorted(unknown))}")
    tables = {s: dict(parser[s]) if parser.has_section(s) else {} for s in SECTIONS}
    return Config(path, **tables)


# -- CSV writers ----------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def write_spinor_snapshots(path, times, points, states):
    """``states`` has shape (K, N, 16); ``points`` is a callable t -> (N, 4)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "component_id", "value"])
        for t, psi in zip(times, states):
            for x, row in zip(points(t), psi):
                for cid, mask in enumerate(SPINOR_MASKS):
                    w.writerow([_fmt(t), _fmt(x[1]), _fmt(x[2]), _fmt(x[3]), cid, _fmt(row[mask])])


def write_monitors(path, times, residual_max, charge):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "residual_max", "charge"])
        for i, t in enumerate(times):
            r = "" if residual_max is None else _fmt(residual_max[i])
            w.writerow([_fmt(t), r, _fmt(charge[i])])


def write_strength(path, points, F):
    """``F`` of shape (P, 4, 4, 16); only ``mu < nu`` rows are written."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "mu", "nu", "component_id", "value"])
        for x, f in zip(points, F):
            for mu in range(4):
                for nu in range(mu + 1, 4):
                    for cid, mask in enumerate(BIVECTOR_MASKS):
                        w.writerow([_fmt(x[0]), _fmt(x[1]), _fmt(x[2]), _fmt(x[3]),
                                    mu, nu, cid, _fmt(f[mu, nu, mask])])


def write_potential_table(path, points, A):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "A0", "A1", "A2", "A3"])
        for x, a in zip(points, A):
            w.writerow([_fmt(v) for v in x] + [_fmt(v) for v in a])


def read_csv_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
