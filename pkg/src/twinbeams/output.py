"""Deterministic output writers: CSV with comment headers, JSON summaries,
and 16-bit binary PGM images.

Every file carries the config hash and tool version; numbers in CSV are
printed at 9 significant digits with a '.' decimal separator, so repeated
runs with the same config and seed are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__

TOOL_VERSION = f"twinbeams {__version__}"


def fmt9(value) -> str:
    return format(float(value), ".9g")


def _comment_lines(config_hash: str) -> list[str]:
    return [f"# tool_version: {TOOL_VERSION}", f"# config_hash: {config_hash}"]


def write_csv(path: str | Path, columns: list[str], rows: list[tuple],
              config_hash: str) -> Path:
    path = Path(path)
    lines = _comment_lines(config_hash)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt9(cell)
                              for cell in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_kv_csv(path: str | Path, pairs: list[tuple[str, object]],
                 config_hash: str) -> Path:
    rows = [(key, value if isinstance(value, str) else fmt9(value))
            for key, value in pairs]
    return write_csv(path, ["quantity", "value"], rows, config_hash)


def write_json(path: str | Path, payload: dict, config_hash: str) -> Path:
    path = Path(path)
    body = {"tool_version": TOOL_VERSION, "config_hash": config_hash, **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def write_pgm(path: str | Path, values: np.ndarray, config_hash: str,
              maxval: int = 65535) -> Path:
    """Binary (P5) PGM, 16-bit big-endian, normalized to the image maximum."""
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {values.shape}")
    if not 0 < maxval <= 65535:
        raise ValueError(f"maxval must be in (0, 65535], got {maxval}")
    top = values.max()
    scaled = values / top if top > 0.0 else values
    pixels = np.rint(scaled * maxval).astype(">u2" if maxval > 255 else ">u1")
    header = "\n".join(
        ["P5", *_comment_lines(config_hash),
         f"{values.shape[1]} {values.shape[0]}", str(maxval)]) + "\n"
    # PGM rows run top to bottom; our grids index y upward
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels[::-1].tobytes())
    return path


def read_pgm(path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Read back a P5 file written by :func:`write_pgm` (tests, round trips)."""
    data = Path(path).read_bytes()
    pos = 0
    tokens: list[bytes] = []
    comments: list[str] = []
    while len(tokens) < 4:
        end = data.index(b"\n", pos)
        line = data[pos:end]
        pos = end + 1
        if line.startswith(b"#"):
            comments.append(line.decode("ascii"))
            continue
        tokens.extend(line.split())
    magic, width, height, maxval = tokens[:4]
    if magic != b"P5":
        raise ValueError(f"not a binary PGM: magic {magic!r}")
    width, height, maxval = int(width), int(height), int(maxval)
    dtype = ">u2" if maxval > 255 else ">u1"
    pixels = np.frombuffer(data[pos:], dtype=dtype).reshape(height, width)
    return pixels[::-1].astype(float) / maxval, comments
