"""Bundled exact polynomial data with content-hash verification.

The directory can be overridden with the ``CPGROWTH_DATA`` environment
variable; files found there are still checked against the bundled manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .formats import parse_mpoly, parse_poly
from .multipoly import MultiPoly
from .unipoly import UniPoly

ENV_VAR = "CPGROWTH_DATA"


class DataHashMismatch(RuntimeError):
    pass


def _bundled_dir() -> Path:
    return Path(str(resources.files("cpgrowth") / "data"))


def data_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else _bundled_dir()


@lru_cache(maxsize=1)
def manifest() -> dict[str, str]:
    return json.loads((_bundled_dir() / "manifest.json").read_text())


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_verified(name: str) -> str:
    path = data_dir() / name
    expected = manifest().get(name)
    if expected is None:
        raise KeyError(f"{name} is not a bundled data file")
    raw = path.read_bytes()
    got = hashlib.sha256(raw).hexdigest()
    if got != expected:
        raise DataHashMismatch(f"{path}: sha256 {got} does not match manifest {expected}")
    return raw.decode()


def verify_all() -> dict[str, bool]:
    out = {}
    for name in manifest():
        try:
            read_verified(name)
            out[name] = True
        except (DataHashMismatch, FileNotFoundError):
            out[name] = False
    return out


def load_poly(name: str) -> UniPoly:
    """``load_poly("p5")`` reads p5.poly."""
    return parse_poly(read_verified(f"{name}.poly"))


def load_mpoly(name: str) -> MultiPoly:
    return parse_mpoly(read_verified(f"{name}.mpoly"))


def write_manifest(directory: Path | None = None) -> dict[str, str]:
    directory = directory or _bundled_dir()
    entries = {
        p.name: sha256_file(p)
        for p in sorted(directory.iterdir())
        if p.suffix in (".poly", ".mpoly")
    }
    (directory / "manifest.json").write_text(json.dumps(entries, indent=1, sort_keys=True) + "\n")
    return entries
