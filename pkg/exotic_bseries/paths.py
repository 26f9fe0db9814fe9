from __future__ import annotations

import os
from pathlib import Path


CONFIG_FILENAME = "exotic-bseries.toml"


def find_config(start: Path | None = None) -> Path | None:
    """Locate the settings file.

    `EXOTIC_BSERIES_CONFIG` wins; otherwise walk up from `start` (default cwd)
    looking for exotic-bseries.toml.
    """

    override = os.environ.get("EXOTIC_BSERIES_CONFIG")
    if override:
        return Path(override).expanduser().resolve()

    cur = (start or Path.cwd()).resolve()
    for p in (cur, *cur.parents):
        candidate = p / CONFIG_FILENAME
        if candidate.exists():
            return candidate
    return None


def worker_count() -> int:
    """Worker cap from EXOTIC_BSERIES_THREADS, defaulting to the CPU count."""

    raw = os.environ.get("EXOTIC_BSERIES_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, os.cpu_count() or 1)
