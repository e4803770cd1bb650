"""Binary PGM (P5) I/O.

Probability maps travel as 16-bit big-endian PGM with maxval 65535; a
stored value v means probability v / 65535. Binary masks are 8-bit PGM
written as 0/255 (any nonzero byte reads back as foreground). Header
comments (`#` to end of line) are tolerated on read, never written.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .bandcore import BinaryMask, ProbabilityMap
from .errors import ParseError

PROB_MAXVAL = 65535
PROB_SUFFIX = ".prob.pgm"
MASK_SUFFIX = ".mask.pgm"


def _read_header(data: bytes, path: str) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, data_offset)."""
    if data[:2] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (missing P5 magic)")
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token:
            raise ParseError(f"{path}: truncated PGM header")
        try:
            fields.append(int(token))
        except ValueError as exc:
            raise ParseError(f"{path}: bad PGM header token {token!r}") from exc
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise ParseError(f"{path}: non-positive PGM dimensions {width}x{height}")
    return width, height, maxval, pos


def read_prob_pgm(path: str | Path, image_id: str | None = None) -> ProbabilityMap:
    path = Path(path)
    if image_id is None:
        image_id = path.name.removesuffix(PROB_SUFFIX).removesuffix(".pgm")
    data = path.read_bytes()
    width, height, maxval, offset = _read_header(data, str(path))
    if maxval != PROB_MAXVAL:
        raise ParseError(f"{path}: probability PGM must have maxval {PROB_MAXVAL}, got {maxval}")
    expected = width * height * 2
    raw = data[offset : offset + expected]
    if len(raw) != expected:
        raise ParseError(f"{path}: expected {expected} data bytes, got {len(raw)}")
    grid = np.frombuffer(raw, dtype=">u2").reshape(height, width)
    return ProbabilityMap(image_id=image_id, values=grid.astype(np.float64) / PROB_MAXVAL)


def write_prob_pgm(path: str | Path, p: ProbabilityMap) -> None:
    grid = np.clip(np.rint(p.values * PROB_MAXVAL), 0, PROB_MAXVAL).astype(">u2")
    header = f"P5\n{p.width} {p.height}\n{PROB_MAXVAL}\n".encode("ascii")
    Path(path).write_bytes(header + grid.tobytes())


def read_mask_pgm(path: str | Path, image_id: str | None = None, threshold_used: float = 0.5) -> BinaryMask:
    path = Path(path)
    if image_id is None:
        image_id = path.name.removesuffix(MASK_SUFFIX).removesuffix(".pgm")
    data = path.read_bytes()
    width, height, maxval, offset = _read_header(data, str(path))
    if maxval != 255:
        raise ParseError(f"{path}: mask PGM must have maxval 255, got {maxval}")
    expected = width * height
    raw = data[offset : offset + expected]
    if len(raw) != expected:
        raise ParseError(f"{path}: expected {expected} data bytes, got {len(raw)}")
    grid = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    return BinaryMask(image_id=image_id, bits=grid > 0, threshold_used=threshold_used)


def write_mask_pgm(path: str | Path, m: BinaryMask) -> None:
    grid = np.where(m.bits, 255, 0).astype(np.uint8)
    header = f"P5\n{m.width} {m.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + grid.tobytes())
