"""Text table output: ``#`` header echoing the run config, then CSV rows.

Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

FORMAT_VERSION = "siegel-table/1"
OUTPUT_DIR_ENV = "SIEGEL_OUTPUT_DIR"


def resolve_output(path) -> Path:
    """Relative paths land in ``$SIEGEL_OUTPUT_DIR`` when that is set."""
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def header_lines(kind: str, config: dict, meta: dict | None = None) -> list[str]:
    lines = [f"# format: {FORMAT_VERSION}", f"# kind: {kind}",
             "# config: " + json.dumps(config, sort_keys=True)]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def atomic_write(path, text: str) -> Path:
    path = resolve_output(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_table(path, kind: str, config: dict, rows: list[str], meta: dict | None = None) -> Path:
    text = "\n".join(header_lines(kind, config, meta) + rows) + "\n"
    return atomic_write(path, text)


def read_table(path) -> tuple[dict, dict, list[str], list[list[str]]]:
    """Return ``(config, meta, columns, rows)`` from a file written by :func:`write_table`.

    Lines after the first data block that start with ``#`` are kept in ``meta``
    under their key, so trailing summary blocks survive a round trip.
    """
    config: dict = {}
    meta: dict = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                if key == "config":
                    config = json.loads(value)
                else:
                    meta[key] = value
            elif not columns:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return config, meta, columns, rows


def payload(path) -> str:
    """The file text without its header lines."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith("#"))
