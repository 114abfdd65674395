"""Dense complex-matrix kernels.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
is the validating constructor.  Decompositions are delegated to LAPACK through
``numpy.linalg``; the contracts checked in the tests are the residual bounds,
not the algorithm.

Reductions use ``numpy.sum``, which performs pairwise summation over contiguous
data and is therefore run-to-run reproducible.
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import DimensionError, FormatError

#: eigenvalues of PSD products above ``-CLAMP_TOL`` are treated as zero
CLAMP_TOL = 1e-12

NCMAT_MAGIC = b"NCMAT1\0\0"


def as_matrix(data, rows=None, cols=None) -> np.ndarray:
    """Return ``data`` as a finite 2-D complex array, reshaping if sizes are given."""
    m = np.asarray(data, dtype=np.complex128)
    if rows is not None:
        if m.size != rows * cols:
            raise DimensionError(f"expected {rows * cols} entries, got {m.size}")
        m = m.reshape(rows, cols)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _require_square(m):
    if m.shape[-1] != m.shape[-2]:
        raise DimensionError(f"square matrix required, got shape {m.shape}")


def hermitian_eigs(m):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    The input is symmetrized as ``(M + M*)/2`` first, so round-off asymmetry
    does not leak into the decomposition.  Works on stacks ``(..., d, d)``.
    """
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    herm = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    return np.linalg.eigh(herm)


def svd(m):
    """Return ``(U, s, V)`` with ``M = U diag(s) V*`` and ``s`` descending."""
    m = np.asarray(m, dtype=np.complex128)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return u, s, np.conj(np.swapaxes(vh, -1, -2))


def singular_values(m):
    return np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)


def hs_norm(m):
    m = np.asarray(m)
    return np.sqrt(np.sum((m.real ** 2 + m.imag ** 2), axis=(-2, -1)))


def min_eig_mmstar(m):
    """Smallest eigenvalue of ``M M*``, clamped at zero within :data:`CLAMP_TOL`."""
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    mm = m @ np.conj(np.swapaxes(m, -1, -2))
    lam = np.linalg.eigvalsh(mm)[..., 0]
    return np.where(lam < 0.0, np.where(lam >= -CLAMP_TOL, 0.0, lam), lam)


def matrix_norms(m):
    """``(op_norm, hs_norm, min_eig_of_MMstar)``; the last is ``None`` for non-square input.

    Use :func:`min_eig_mmstar` directly to get a :class:`DimensionError`
    on rectangular matrices.
    """
    m = as_matrix(m)
    s = singular_values(m)
    op = float(s[0]) if s.size else 0.0
    hs = float(hs_norm(m))
    mn = float(min_eig_mmstar(m)) if m.shape[0] == m.shape[1] else None
    return op, hs, mn


# --- NCMAT1 binary format -------------------------------------------------

def encode_ncmat(m) -> bytes:
    m = as_matrix(m)
    rows, cols = m.shape
    header = NCMAT_MAGIC + struct.pack("<IIII", 1, rows, cols, 0)
    body = np.ascontiguousarray(m).astype("<c16").tobytes()
    return header + body


def decode_ncmat(buf: bytes) -> np.ndarray:
    if len(buf) < 24 or buf[:8] != NCMAT_MAGIC:
        raise FormatError("not an NCMAT1 stream (bad magic)")
    version, rows, cols, pad = struct.unpack("<IIII", buf[8:24])
    if version != 1 or pad != 0:
        raise FormatError(f"unsupported NCMAT1 version {version}")
    need = 24 + 16 * rows * cols
    if len(buf) != need:
        raise FormatError(f"NCMAT1 payload is {len(buf)} bytes, expected {need}")
    data = np.frombuffer(buf, dtype="<c16", offset=24, count=rows * cols)
    return as_matrix(data.astype(np.complex128), rows, cols)


def write_ncmat(path, m):
    with open(path, "wb") as fh:
        fh.write(encode_ncmat(m))


def read_ncmat(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_ncmat(fh.read())
