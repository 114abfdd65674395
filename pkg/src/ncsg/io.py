"""NCSYM1 container for symbols and Fourier coefficients.

Layout: magic ``b"NCSYM1\\0\\0"``, header length as u64 little-endian, a UTF-8
JSON header, then every matrix in declared order (dual-major, then grid
index), each ``d^2`` complex entries row-major as two little-endian f64.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .errors import FormatError
from .fourier import FourierCoefficients
from .group import GroupDescriptor, quadrature_grid

MAGIC = b"NCSYM1\0\0"
ORDERING = "dual-major then grid-index"
_ENTRY = np.dtype("<c16")


def _descriptor_of(grid):
    g = grid.group
    return GroupDescriptor(g.kind, tuple(grid.sizes), getattr(g, "dim", 1) if g.kind == "torus" else 1)


def _encode(header, blocks):
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(np.ascontiguousarray(b, dtype=_ENTRY).tobytes() for b in blocks)
    return MAGIC + struct.pack("<Q", len(head)) + head + body


def _decode(data: bytes):
    if len(data) < 16 or data[:8] != MAGIC:
        raise FormatError("not an NCSYM1 container (bad magic)")
    (n,) = struct.unpack("<Q", data[8:16])
    if 16 + n > len(data):
        raise FormatError("truncated header")
    try:
        header = json.loads(data[16:16 + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"malformed header: {exc}") from exc
    if header.get("ordering") != ORDERING:
        raise FormatError(f"unsupported ordering {header.get('ordering')!r}")
    npts = int(header["points_per_irrep"])
    need = sum(npts * e["dim"] ** 2 for e in header["dual"]) * _ENTRY.itemsize
    body = data[16 + n:]
    if len(body) != need:
        raise FormatError(f"payload has {len(body)} bytes, header declares {need}")
    flat = np.frombuffer(body, dtype=_ENTRY)
    blocks, pos = [], 0
    for e in header["dual"]:
        d = e["dim"]
        blocks.append(flat[pos:pos + npts * d * d].reshape(npts, d, d).astype(np.complex128))
        pos += npts * d * d
    return header, blocks


def _dual_header(irreps):
    return [{"label": list(ir.label), "dim": ir.dim} for ir in irreps]


def _resolve_dual(group, entries):
    irreps = []
    for e in entries:
        ir = group.irrep(tuple(e["label"]) if group.kind == "torus" else e["label"][0])
        if ir.dim != e["dim"]:
            raise FormatError(f"irrep {e['label']} declared with dimension {e['dim']}")
        irreps.append(ir)
    return tuple(irreps)


def encode_symbol(sigma) -> bytes:
    header = {
        "format": "NCSYM1", "kind": "symbol", "group": _descriptor_of(sigma.grid).to_dict(),
        "grid": {"sizes": list(sigma.grid.sizes)}, "lambda": sigma.lam, "dual": _dual_header(sigma.irreps),
        "ordering": ORDERING, "points_per_irrep": 1 if sigma.x_independent else sigma.grid.size,
        "flags": {"x_independent": sigma.x_independent, "scalar": sigma.scalar}, "x_band": sigma.x_band,
    }
    return _encode(header, sigma.blocks)


def decode_symbol(data: bytes):
    from .symbol import Symbol
    header, blocks = _decode(data)
    if header.get("kind") != "symbol":
        raise FormatError("container does not hold a symbol")
    grid = quadrature_grid(GroupDescriptor.from_dict(header["group"]))
    if list(grid.sizes) != list(header["grid"]["sizes"]):
        raise FormatError("grid sizes disagree with the group descriptor")
    flags = header["flags"]
    if header["points_per_irrep"] not in (1, grid.size) or (flags["x_independent"]) != (header["points_per_irrep"] == 1):
        raise FormatError("points_per_irrep inconsistent with flags")
    irreps = _resolve_dual(grid.group, header["dual"])
    return Symbol(grid, irreps, tuple(blocks), float(header["lambda"]), x_independent=flags["x_independent"],
                  scalar=flags["scalar"], x_band=int(header["x_band"]))


def write_symbol(sigma, path):
    with open(path, "wb") as fh:
        fh.write(encode_symbol(sigma))


def read_symbol(path):
    with open(path, "rb") as fh:
        return decode_symbol(fh.read())


def encode_coefficients(c: FourierCoefficients, grid) -> bytes:
    header = {
        "format": "NCSYM1", "kind": "coefficients", "group": _descriptor_of(grid).to_dict(),
        "grid": {"sizes": list(grid.sizes)}, "lambda": c.lam, "dual": _dual_header(c.irreps),
        "ordering": ORDERING, "points_per_irrep": 1, "flags": {"x_independent": True, "scalar": False},
        "x_band": 0,
    }
    return _encode(header, [b[None] for b in c.blocks])


def decode_coefficients(data: bytes):
    """``(FourierCoefficients, grid)``."""
    header, blocks = _decode(data)
    if header.get("kind") != "coefficients" or header["points_per_irrep"] != 1:
        raise FormatError("container does not hold Fourier coefficients")
    grid = quadrature_grid(GroupDescriptor.from_dict(header["group"]))
    irreps = _resolve_dual(grid.group, header["dual"])
    return FourierCoefficients(irreps, tuple(b[0] for b in blocks), float(header["lambda"])), grid


def is_container(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(8) == MAGIC
