"""Group Fourier transform over a truncated dual, and the associated norms.

Conventions::

    f^(xi)  = integral f(x) xi(x)* dx                  (analyze)
    f(x)    = sum_xi d_xi Tr(xi(x) f^(xi))              (synthesize)
    ||f^||  = (sum_xi d_xi ||f^(xi)||_HS^2)^(1/2)

The torus path uses an FFT and SU(2) a separable Euler-angle transform; both
return exactly the direct quadrature sums over the grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, GroupMismatchError
from .linalg import hs_norm


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A complex function sampled on a quadrature grid.

    ``band`` is an optional band-level hint: every Fourier coefficient above
    this level is known to vanish.
    """

    grid: object
    values: np.ndarray
    band: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.size,):
            raise DimensionError(f"field has shape {vals.shape}, grid has {self.grid.size} points")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    def _other(self, other):
        if isinstance(other, ScalarField):
            if other.grid is not self.grid:
                raise GroupMismatchError("fields live on different grids")
            return other.values, other.band
        return other, 0

    def __add__(self, other):
        vals, band = self._other(other)
        return ScalarField(self.grid, self.values + vals, _max_band(self.band, band))

    __radd__ = __add__

    def __sub__(self, other):
        vals, band = self._other(other)
        return ScalarField(self.grid, self.values - vals, _max_band(self.band, band))

    def __mul__(self, other):
        vals, band = self._other(other)
        b = None if self.band is None or band is None else self.band + band
        return ScalarField(self.grid, self.values * vals, b)

    __rmul__ = __mul__

    def conj(self):
        return ScalarField(self.grid, np.conj(self.values), self.band)


def _max_band(a, b):
    return None if a is None or b is None else max(a, b)


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """Matrix coefficients ``f^(xi)`` for an ordered list of irreps."""

    irreps: tuple
    blocks: tuple
    lam: float

    def __post_init__(self):
        for irrep, blk in zip(self.irreps, self.blocks):
            if blk.shape != (irrep.dim, irrep.dim):
                raise DimensionError(f"coefficient for {irrep.label} has shape {blk.shape}")

    def __getitem__(self, irrep):
        return self.blocks[self.irreps.index(irrep)]

    def as_dict(self):
        return dict(zip(self.irreps, self.blocks))


@dataclass(frozen=True, eq=False)
class MatrixField:
    """A ``d x d`` matrix-valued function on the grid, shape ``(N, d, d)``."""

    grid: object
    values: np.ndarray

    @property
    def dim(self):
        return self.values.shape[-1]


def _check_irreps(grid, irreps):
    for irrep in irreps:
        grid.group.check(irrep)


def analyze_values(grid, values, irreps):
    """Batch analysis: ``values`` of shape ``(F, N)`` -> list of ``(F, d, d)`` blocks."""
    values = np.atleast_2d(np.asarray(values, dtype=np.complex128))
    if values.shape[-1] != grid.size:
        raise DimensionError(f"values have {values.shape[-1]} samples, grid has {grid.size}")
    _check_irreps(grid, irreps)
    return grid.group.analyze_batch(grid, values, list(irreps))


def synthesize_values(grid, blocks, irreps, count=None):
    """Batch synthesis: list of ``(F, d, d)`` (or ``(d, d)``) blocks -> ``(F, N)`` values."""
    _check_irreps(grid, irreps)
    if count is None:
        count = max((np.asarray(b).shape[0] if np.ndim(b) == 3 else 1 for b in blocks), default=1)
    return grid.group.synthesize_batch(grid, [np.asarray(b, dtype=np.complex128) for b in blocks],
                                       list(irreps), count)


def analyze(f: ScalarField, dual, lam=None) -> FourierCoefficients:
    """Fourier coefficients of ``f`` at every irrep of ``dual``."""
    dual = tuple(dual)
    blocks = analyze_values(f.grid, f.values[None, :], dual)
    if lam is None:
        lam = max((ir.weight for ir in dual), default=1.0)
    return FourierCoefficients(dual, tuple(b[0] for b in blocks), lam)


def synthesize(c: FourierCoefficients, grid) -> ScalarField:
    vals = synthesize_values(grid, [b[None] for b in c.blocks], c.irreps, count=1)[0]
    band = max((ir.level for ir in c.irreps), default=0)
    return ScalarField(grid, vals, band)


def l2_norm(f: ScalarField) -> float:
    return float(np.sqrt(f.grid.integrate(np.abs(f.values) ** 2).real))


def l2_norm_values(grid, values):
    """L2 norm of each row of ``values`` ``(F, N)``."""
    values = np.asarray(values)
    return np.sqrt(np.sum(np.abs(values) ** 2 * grid.weights, axis=-1))


def ell2_norm(c: FourierCoefficients) -> float:
    total = np.sum(np.array([ir.dim * float(hs_norm(b)) ** 2 for ir, b in zip(c.irreps, c.blocks)]))
    return float(np.sqrt(total))


def matrix_field_norm(w: MatrixField) -> float:
    """``(integral ||w(x)||_HS^2 dx)^(1/2)``."""
    return float(np.sqrt(w.grid.integrate(hs_norm(w.values) ** 2)))


def norms(obj) -> float:
    """L2 / ell2 / matrix-field L2 norm, dispatching on the argument type."""
    if isinstance(obj, ScalarField):
        return l2_norm(obj)
    if isinstance(obj, FourierCoefficients):
        return ell2_norm(obj)
    if isinstance(obj, MatrixField):
        return matrix_field_norm(obj)
    raise TypeError(f"no norm for {type(obj).__name__}")


def estimate_band(grid, values, rel_tol=1e-13):
    """Smallest level beyond which the sampled function has no Fourier content.

    Coefficients are computed up to the grid's exact level; a function whose
    content reaches that level is reported at the exact level (it may alias).
    """
    group = grid.group
    if group.kind == "torus":
        dual = [ir for ir in group.dual(np.sqrt(1 + group.dim * grid.exact_level ** 2) + 1e-9)
                if ir.level <= grid.exact_level]
    else:
        dual = [group.irrep(L) for L in range(grid.exact_level + 1)]
    blocks = analyze_values(grid, np.atleast_2d(values), dual)
    mags = np.array([np.max(np.abs(b)) for b in blocks])
    if mags.max() == 0:
        return 0
    keep = mags > rel_tol * mags.max()
    return int(max(ir.level for ir, k in zip(dual, keep) if k))
