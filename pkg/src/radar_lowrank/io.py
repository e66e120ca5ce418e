"""Readers and writers for the on-disk formats.

Matrices
    CSV (one row per line, no header) or binary: the magic ``RLRM``, then
    little-endian ``u32`` rows and cols, then row-major ``float64`` values.
    :func:`read_matrix` detects the format from the first four bytes.
Observation sets
    A ``# m n`` header line followed by ``i,j,value`` lines (0-based).
IQ series
    A ``# prf <value>`` header followed by ``re,im`` lines.
Images
    Binary 8-bit grayscale PGM (``P5``).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .completion import ObservationSet
from .errors import FormatError
from .matrix import DenseMatrix, as_array
from .radar import IqSeries

MAGIC = b"RLRM"
_HEADER = struct.Struct("<4sII")


def write_matrix(path, A, fmt="csv"):
    a = as_array(A)
    path = Path(path)
    if fmt == "bin":
        m, n = a.shape
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, m, n))
            fh.write(a.astype("<f8").tobytes(order="C"))
    elif fmt == "csv":
        np.savetxt(path, a, delimiter=",", fmt="%.17g")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    return path


def read_matrix(path):
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC:
        if len(raw) < _HEADER.size:
            raise FormatError(f"{path}: truncated RLRM header")
        _, m, n = _HEADER.unpack_from(raw)
        body = raw[_HEADER.size:]
        if len(body) != 8 * m * n:
            raise FormatError(f"{path}: expected {m * n} float64 values, found {len(body) / 8:g}")
        data = np.frombuffer(body, dtype="<f8").astype(np.float64)
        return DenseMatrix.from_flat(m, n, data)
    try:
        rows = [
            [float(tok) for tok in line.split(",")]
            for line in raw.decode("ascii").splitlines()
            if line.strip()
        ]
    except (UnicodeDecodeError, ValueError) as exc:
        raise FormatError(f"{path}: not a CSV matrix ({exc})") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise FormatError(f"{path}: ragged or empty CSV matrix")
    return DenseMatrix(np.array(rows))


def write_observations(path, omega):
    path = Path(path)
    m, n = omega.shape
    with open(path, "w") as fh:
        fh.write(f"# {m} {n}\n")
        for i, j, v in omega.entries():
            fh.write(f"{i},{j},{v!r}\n")
    return path


def read_observations(path):
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "#":
            raise FormatError(f"{path}: expected '# m n' header")
        try:
            shape = (int(header[1]), int(header[2]))
            body = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    if body.shape[1] != 3:
        raise FormatError(f"{path}: expected i,j,value triples")
    ij = body[:, :2]
    if np.any(ij != np.round(ij)):
        raise FormatError(f"{path}: non-integer indices")
    return ObservationSet(shape, ij[:, 0].astype(np.int64), ij[:, 1].astype(np.int64), body[:, 2])


def write_iq(path, iq):
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# prf {iq.prf!r}\n")
        for z in iq.samples.tolist():
            fh.write(f"{z.real!r},{z.imag!r}\n")
    return path


def read_iq(path):
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[:2] != ["#", "prf"]:
            raise FormatError(f"{path}: expected '# prf <value>' header")
        try:
            prf = float(header[2])
            body = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    if body.shape[1] != 2:
        raise FormatError(f"{path}: expected re,im pairs")
    return IqSeries(body[:, 0] + 1j * body[:, 1], prf)


def write_vector_csv(path, values, header=None):
    path = Path(path)
    with open(path, "w") as fh:
        if header:
            fh.write(header + "\n")
        for v in np.asarray(values).tolist():
            if isinstance(v, (list, tuple)):
                fh.write(",".join(repr(x) for x in v) + "\n")
            else:
                fh.write(f"{v!r}\n")
    return path


def to_gray(a, mask=None):
    """Linear map of ``a`` onto 8-bit gray.

    Without a mask the data range maps onto 0..255.  With a mask, observed
    cells map onto 1..255 over their own range and unobserved cells are 0, so
    the non-black pixel count equals the number of observed cells.  Constant
    data renders as uniform mid gray.
    """
    a = np.asarray(a, dtype=np.float64)
    sel = np.ones(a.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    lo, hi = (a[sel].min(), a[sel].max()) if sel.any() else (0.0, 0.0)
    base = 0.0 if mask is None else 1.0
    if hi > lo:
        g = base + (255.0 - base) * (a - lo) / (hi - lo)
    else:
        g = np.full(a.shape, 128.0)
    g = np.clip(np.rint(g), base, 255).astype(np.uint8)
    if mask is not None:
        g[~sel] = 0
    return g


def write_pgm(path, a, mask=None):
    g = to_gray(a, mask)
    h, w = g.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(g.tobytes(order="C"))
    return path


def read_pgm(path):
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos].decode("ascii"))
    if tokens[0] != "P5":
        raise FormatError(f"{path}: not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise FormatError(f"{path}: only 8-bit PGM supported")
    data = np.frombuffer(raw[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    if data.size != w * h:
        raise FormatError(f"{path}: truncated pixel data")
    return data.reshape(h, w)
