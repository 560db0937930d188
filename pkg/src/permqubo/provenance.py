"""Provenance helpers: content hashes embedded in emitted files."""

from __future__ import annotations

import hashlib
from pathlib import Path


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_of_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_provenance(version: str, seed: int | None, input_hashes: dict | None = None) -> dict:
    """Standard provenance block: tool version, seed and input-file hashes."""
    return {"version": version, "seed": seed, "inputs": dict(input_hashes or {})}
