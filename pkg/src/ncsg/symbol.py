"""Matrix symbols sigma(x, xi) and their (left) quantization.

    T_sigma f(x) = sum_xi d_xi Tr(xi(x) sigma(x, xi) f^(xi))

A :class:`Symbol` stores one ``(N_x, d, d)`` array per irrep of a truncated
dual, with ``N_x = 1`` for x-independent symbols (multipliers) and
``N_x = grid.size`` otherwise.  Operator matrices use the orthonormal
Peter-Weyl basis ``e_{xi,i,j} = sqrt(d_xi) xi_ij``, ordered dual-major, then
``i``, then ``j``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from . import expr as dsl
from .errors import AliasingError, DimensionError, DomainError, GroupMismatchError
from .fourier import ScalarField, analyze_values, estimate_band, synthesize_values
from .group import TORUS, admissible_family
from .linalg import singular_values

FAMILIES = ("multiplier_power", "multiplication", "product", "corner_projection",
            "laplacian_resolvent", "multiplier", "separable", "file")

#: central-difference steps along one-parameter subgroups
FD_STEP = {"torus": 1e-4, "su2": 1e-3}


@dataclass(frozen=True)
class SymbolSpec:
    """Declarative description of a symbol family.

    ``multiplier_power(s)``      sigma = <xi>^s I
    ``multiplication(expr)``     sigma = a(x) I
    ``product(expr, s)``         sigma = a(x) <xi>^s I
    ``corner_projection``        sigma = E_11 (1 on one-dimensional irreps)
    ``laplacian_resolvent(c)``   sigma = (c + lambda_xi^2)^-1 I, c > 0
    ``multiplier(multiplier)``   sigma = m(xi) I, m a dual-variable expression
    ``separable(expr, multiplier)``  sigma = a(x) m(xi) I
    ``file(path)``               NCSYM1 container
    """

    family: str
    s: float = 0.0
    expr: str | None = None
    c: float = 1.0
    multiplier: str | None = None
    path: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown symbol family {self.family!r}")
        if self.family in ("multiplication", "product", "separable") and not self.expr:
            raise ValueError(f"family {self.family} needs 'expr'")
        if self.family in ("multiplier", "separable") and not self.multiplier:
            raise ValueError(f"family {self.family} needs 'multiplier'")
        if self.family == "laplacian_resolvent" and not self.c > 0:
            raise ValueError("laplacian_resolvent needs c > 0")
        if self.family == "file" and not self.path:
            raise ValueError("family file needs 'path'")

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def to_dict(self):
        out = {"family": self.family}
        if self.family in ("multiplier_power", "product"):
            out["s"] = self.s
        if self.family in ("multiplication", "product", "separable"):
            out["expr"] = self.expr
        if self.family == "laplacian_resolvent":
            out["c"] = self.c
        if self.family in ("multiplier", "separable"):
            out["multiplier"] = self.multiplier
        if self.family == "file":
            out["path"] = self.path
        return out


@dataclass(frozen=True, eq=False)
class Symbol:
    grid: object
    irreps: tuple
    blocks: tuple
    lam: float
    x_independent: bool = False
    scalar: bool = False
    x_band: int = 0
    evaluator: object = field(default=None, repr=False)
    # (a(x) on the grid, per-irrep d x d matrices) when sigma = a(x) m(xi)
    factors: object = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "irreps", tuple(self.irreps))
        object.__setattr__(self, "blocks", tuple(np.asarray(b, dtype=np.complex128) for b in self.blocks))
        nx = 1 if self.x_independent else self.grid.size
        for ir, b in zip(self.irreps, self.blocks):
            if b.shape != (nx, ir.dim, ir.dim):
                raise DimensionError(f"block for {ir.label} has shape {b.shape}, expected {(nx, ir.dim, ir.dim)}")

    @property
    def group(self):
        return self.grid.group

    @property
    def max_level(self):
        return max(ir.level for ir in self.irreps)

    def index(self, irrep):
        return self.irreps.index(irrep)

    def at(self, irrep):
        """``(N, d, d)`` values over the grid for ``irrep``."""
        b = self.blocks[self.index(irrep)]
        return np.broadcast_to(b, (self.grid.size,) + b.shape[1:])

    def scaled(self, c):
        factors = None if self.factors is None else (self.factors[0] * c, self.factors[1])
        ev = None if self.evaluator is None else (lambda pts, f=self.evaluator: [c * b for b in f(pts)])
        return replace(self, blocks=tuple(c * b for b in self.blocks), evaluator=ev, factors=factors)

    def restrict(self, lam):
        keep = [i for i, ir in enumerate(self.irreps) if ir.weight <= lam * (1 + 1e-12)]
        factors = None if self.factors is None else (self.factors[0], [self.factors[1][i] for i in keep])
        ev = self.evaluator
        if ev is not None:
            ev = lambda pts, f=self.evaluator: [f(pts)[i] for i in keep]
        return replace(self, irreps=tuple(self.irreps[i] for i in keep),
                       blocks=tuple(self.blocks[i] for i in keep), lam=lam, evaluator=ev, factors=factors)

    def evaluate(self, points):
        """Per-irrep ``(N', d, d)`` values at arbitrary group points."""
        points = np.asarray(points, float).reshape(-1, self.group.point_dim)
        if self.x_independent:
            return [np.broadcast_to(b, (points.shape[0],) + b.shape[1:]) for b in self.blocks]
        if self.evaluator is not None:
            return self.evaluator(points)
        return _fourier_interpolate(self, points)


def _dual_env(irrep):
    env = {"w": irrep.weight, "lam2": irrep.casimir, "d": float(irrep.dim)}
    if irrep.kind == TORUS:
        env.update({f"k{j + 1}": float(k) for j, k in enumerate(irrep.label)})
    else:
        env["ell"] = irrep.label[0] / 2.0
    return env


def _dual_names(group):
    names = {"w", "lam2", "d"}
    if group.kind == TORUS:
        names |= {f"k{j + 1}" for j in range(group.dim)}
    else:
        names.add("ell")
    return names


def _space_function(group, text):
    ast = dsl.parse_expr(text, group.coordinate_names())

    def fn(points):
        env = group.coordinates(points)
        n = next(iter(env.values())).shape[0]
        val = np.broadcast_to(np.asarray(dsl.evaluate(ast, env), dtype=float), (n,))
        if not np.all(np.isfinite(val)):
            raise DomainError(f"expression {text!r} is not finite at some point")
        return val
    return fn


def _multiplier_function(group, text):
    ast = dsl.parse_expr(text, _dual_names(group))
    return lambda irrep: float(dsl.evaluate(ast, _dual_env(irrep)))


def multiplier_symbol(grid, dual, m, lam=None):
    """x-independent symbol from ``m(irrep)`` (a scalar or a ``d x d`` matrix)."""
    dual = tuple(dual)
    blocks, scalar = [], True
    for ir in dual:
        val = m(ir)
        if np.ndim(val) == 0:
            blk = complex(val) * np.eye(ir.dim)
        else:
            blk = np.asarray(val, dtype=np.complex128)
            scalar = scalar and np.allclose(blk, blk[0, 0] * np.eye(ir.dim), rtol=0, atol=0)
        blocks.append(blk[None])
    lam = lam if lam is not None else max(ir.weight for ir in dual)
    return Symbol(grid, dual, tuple(blocks), lam, x_independent=True, scalar=scalar, x_band=0)


def separable_symbol(grid, dual, a, m=None, lam=None, band=None):
    """``sigma(x, xi) = a(x) m(xi) I`` with ``a`` a callable on group points.

    ``m`` defaults to 1.  ``band`` is the band level of ``a``; it is estimated
    from the sampled values when omitted.
    """
    dual = tuple(dual)
    m = m or (lambda ir: 1.0)
    a_vals = np.asarray(a(grid.points), dtype=np.complex128)
    if a_vals.shape != (grid.size,) or not np.all(np.isfinite(a_vals)):
        raise DomainError("space factor must give finite values at every grid point")
    mats = [complex(m(ir)) * np.eye(ir.dim) for ir in dual]
    blocks = tuple(a_vals[:, None, None] * mat[None] for mat in mats)
    if band is None:
        band = estimate_band(grid, a_vals)

    def evaluator(points):
        av = np.asarray(a(points), dtype=np.complex128)
        return [av[:, None, None] * mat[None] for mat in mats]

    lam = lam if lam is not None else max(ir.weight for ir in dual)
    return Symbol(grid, dual, blocks, lam, x_independent=False, scalar=True, x_band=int(band),
                  evaluator=evaluator, factors=(a_vals, mats))


def build_symbol(spec: SymbolSpec, grid, dual, lam=None) -> Symbol:
    group = grid.group
    dual = tuple(dual)
    fam = spec.family
    if fam == "multiplier_power":
        return multiplier_symbol(grid, dual, lambda ir: ir.weight ** spec.s, lam)
    if fam == "laplacian_resolvent":
        return multiplier_symbol(grid, dual, lambda ir: 1.0 / (spec.c + ir.casimir), lam)
    if fam == "corner_projection":
        def corner(ir):
            e = np.zeros((ir.dim, ir.dim))
            e[0, 0] = 1.0
            return e
        sym = multiplier_symbol(grid, dual, corner, lam)
        return replace(sym, scalar=all(ir.dim == 1 for ir in dual))
    if fam == "multiplier":
        return multiplier_symbol(grid, dual, _multiplier_function(group, spec.multiplier), lam)
    if fam == "multiplication":
        return separable_symbol(grid, dual, _space_function(group, spec.expr), lam=lam)
    if fam == "product":
        return separable_symbol(grid, dual, _space_function(group, spec.expr),
                                lambda ir: ir.weight ** spec.s, lam=lam)
    if fam == "separable":
        return separable_symbol(grid, dual, _space_function(group, spec.expr),
                                _multiplier_function(group, spec.multiplier), lam=lam)
    from .io import read_symbol
    sym = read_symbol(spec.path)
    if sym.group.kind != group.kind or sym.grid.sizes != grid.sizes:
        raise GroupMismatchError("symbol file was written for a different group or grid")
    return sym


# --- quantization ---------------------------------------------------------

def _as_values(grid, f):
    if isinstance(f, ScalarField):
        if f.grid is not grid and f.grid.sizes != grid.sizes:
            raise GroupMismatchError("field and symbol live on different grids")
        return f.values, True
    vals = np.asarray(f, dtype=np.complex128)
    if vals.shape[-1] != grid.size:
        raise DimensionError(f"field has {vals.shape[-1]} samples, grid has {grid.size}")
    return vals, False


def quantize_apply(sigma: Symbol, f):
    """``T_sigma f`` on the grid.  Accepts a ScalarField or arrays ``(N,)`` / ``(F, N)``."""
    vals, wrap = _as_values(sigma.grid, f)
    batch = np.atleast_2d(vals)
    grid = sigma.grid
    coeffs = analyze_values(grid, batch, sigma.irreps)
    if sigma.x_independent:
        prod = [np.einsum("ij,fjk->fik", s[0], c) for s, c in zip(sigma.blocks, coeffs)]
        out = synthesize_values(grid, prod, sigma.irreps, batch.shape[0])
    elif sigma.factors is not None:
        a_vals, mats = sigma.factors
        prod = [np.einsum("ij,fjk->fik", m, c) for m, c in zip(mats, coeffs)]
        out = a_vals[None, :] * synthesize_values(grid, prod, sigma.irreps, batch.shape[0])
    else:
        out = np.zeros(batch.shape, dtype=np.complex128)
        for ir, s, c in zip(sigma.irreps, sigma.blocks, coeffs):
            xs = grid.group.evaluate_on_grid(grid, ir) @ s
            out += ir.dim * np.einsum("nik,fki->fn", xs, c, optimize=True)
    out = out.reshape(np.shape(vals))
    if wrap:
        return ScalarField(grid, out)
    return out


# --- operator matrices ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Finite section of an operator in the Peter-Weyl basis."""

    matrix: np.ndarray
    irreps: tuple
    index: tuple
    lam: float

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def row_weights(self):
        return np.array([self.irreps[k].weight for k, _, _ in self.index])

    def same_basis(self, other):
        return self.irreps == other.irreps and self.index == other.index


def basis_index(irreps):
    return tuple((k, i, j) for k, ir in enumerate(irreps) for i in range(ir.dim) for j in range(ir.dim))


def coordinates(grid, irreps, values):
    """Coordinates ``<f, e_{xi,i,j}>`` of fields ``(F, N)`` -> ``(F, n_basis)``."""
    blocks = analyze_values(grid, np.atleast_2d(values), irreps)
    cols = [np.sqrt(ir.dim) * np.swapaxes(b, 1, 2).reshape(b.shape[0], -1) for ir, b in zip(irreps, blocks)]
    return np.concatenate(cols, axis=1)


def from_coordinates(grid, irreps, coords):
    """Inverse of :func:`coordinates` on the span of the basis."""
    coords = np.atleast_2d(coords)
    blocks, pos = [], 0
    for ir in irreps:
        n = ir.dim * ir.dim
        c = coords[:, pos:pos + n].reshape(-1, ir.dim, ir.dim)
        blocks.append(np.swapaxes(c, 1, 2) / np.sqrt(ir.dim))
        pos += n
    return synthesize_values(grid, blocks, irreps, coords.shape[0])


def _section_dual(sigma, lam):
    if lam > sigma.lam * (1 + 1e-12):
        raise AliasingError(f"requested truncation {lam} exceeds the symbol's {sigma.lam}")
    dual = tuple(ir for ir in sigma.irreps if ir.weight <= lam * (1 + 1e-12))
    top = max(ir.level for ir in dual)
    if top + sigma.x_band > sigma.grid.exact_level:
        raise AliasingError(
            f"level {top} + x-band {sigma.x_band} exceeds the grid's exact level {sigma.grid.exact_level}")
    return dual


def assemble_operator_matrix(sigma: Symbol, lam) -> OperatorMatrix:
    """``M[row, col] = <T_sigma e_col, e_row>`` for basis elements with weight ``<= lam``."""
    dual = _section_dual(sigma, lam)
    index = basis_index(dual)
    n = len(index)
    if sigma.x_independent:
        mat = np.zeros((n, n), dtype=np.complex128)
        pos = 0
        for ir in dual:
            s = sigma.blocks[sigma.index(ir)][0]
            d = ir.dim
            # T e_{xi,a,b} = sum_c s_cb e_{xi,a,c}
            mat[pos:pos + d * d, pos:pos + d * d] = np.kron(np.eye(d), s)
            pos += d * d
        return OperatorMatrix(mat, dual, index, lam)
    grid = sigma.grid
    images = []
    for ir in dual:
        xs = grid.group.evaluate_on_grid(grid, ir) @ sigma.at(ir)
        images.append(np.sqrt(ir.dim) * xs.reshape(grid.size, -1).T)
    images = np.concatenate(images, axis=0)
    mat = coordinates(grid, dual, images).T
    return OperatorMatrix(np.ascontiguousarray(mat), dual, index, lam)


# --- symbol extraction ------------------------------------------------------

def extract_symbol(apply, grid, dual, lam=None, batched=False) -> Symbol:
    """``sigma(x, xi) = xi(x)* (T xi)(x)`` for an operator given as a callback.

    ``apply`` maps field values ``(N,)`` to ``(N,)``; with ``batched=True`` it
    maps ``(F, N)`` to ``(F, N)``.
    """
    dual = tuple(dual)
    blocks = []
    for ir in dual:
        xi = grid.group.evaluate_on_grid(grid, ir)
        fields = xi.reshape(grid.size, -1).T
        if batched:
            out = np.asarray(apply(fields), dtype=np.complex128)
        else:
            out = np.array([np.asarray(apply(row), dtype=np.complex128) for row in fields])
        if out.shape != fields.shape:
            raise DimensionError(f"operator returned shape {out.shape}, expected {fields.shape}")
        if not np.all(np.isfinite(out)):
            raise DomainError("operator returned non-finite values")
        t_xi = out.T.reshape(grid.size, ir.dim, ir.dim)
        blocks.append(np.conj(np.swapaxes(xi, 1, 2)) @ t_xi)
    scale = max(float(np.max(np.abs(b))) for b in blocks) or 1.0
    const = all(np.max(np.abs(b - b[:1])) <= 1e-12 * scale for b in blocks)
    if const:
        blocks = [b[:1].copy() for b in blocks]
    scalar = all(np.max(np.abs(b - b[:, :1, :1] * np.eye(b.shape[-1]))) <= 1e-12 * scale for b in blocks)
    band = 0 if const else max(estimate_band(grid, b.reshape(grid.size, -1).T) for b in blocks)
    lam = lam if lam is not None else max(ir.weight for ir in dual)
    return Symbol(grid, dual, tuple(blocks), lam, x_independent=const, scalar=scalar, x_band=band)


# --- kernel and difference operators ---------------------------------------

def _kernel_values(grid, irreps, blocks):
    """``R(x, z) = sum d Tr(sigma(x, xi) xi(z))`` for each stacked x: ``(N_x, N)``."""
    return synthesize_values(grid, blocks, irreps, blocks[0].shape[0])


def kernel_R(sigma: Symbol, x_index: int) -> ScalarField:
    """The truncated kernel ``z -> R(x, z)`` at grid point ``x_index``."""
    i = 0 if sigma.x_independent else x_index
    vals = _kernel_values(sigma.grid, sigma.irreps, [b[i:i + 1] for b in sigma.blocks])[0]
    return ScalarField(sigma.grid, vals, sigma.max_level)


def shrink_dual(group, irreps, lam, band):
    """Irreps whose tensor product with a band-``band`` function stays inside ``irreps``."""
    if group.kind == TORUS:
        radius = np.sqrt(max(lam * lam - 1.0, 0.0)) * (1 + 1e-12)
        return tuple(ir for ir in irreps if np.sqrt(ir.casimir) + band * np.sqrt(group.dim) <= radius
                     or (group.dim == 1 and abs(ir.label[0]) + band <= radius))
    top = max(ir.level for ir in irreps)
    return tuple(ir for ir in irreps if ir.level + band <= top)


def _difference_blocks(grid, irreps_in, blocks_in, q_vals, irreps_out):
    """Apply ``Delta_q`` to stacked symbol values (each block ``(N_x, d, d)``).

    ``Delta_q`` acts on ``sigma(x, .)`` by an x-independent linear map; for
    many x it is cheaper to build that map once on the unit symbols.
    """
    nx = blocks_in[0].shape[0]
    n_in = sum(ir.dim ** 2 for ir in irreps_in)
    if nx <= n_in:
        r = _kernel_values(grid, irreps_in, blocks_in)
        return analyze_values(grid, r * q_vals[None, :], irreps_out)
    eye = np.eye(n_in, dtype=np.complex128)
    units, pos = [], 0
    for ir in irreps_in:
        units.append(eye[:, pos:pos + ir.dim ** 2].reshape(n_in, ir.dim, ir.dim))
        pos += ir.dim ** 2
    r = _kernel_values(grid, irreps_in, units)
    images = analyze_values(grid, r * q_vals[None, :], irreps_out)
    lmap = np.concatenate([b.reshape(n_in, -1) for b in images], axis=1)
    flat = np.concatenate([np.asarray(b).reshape(nx, -1) for b in blocks_in], axis=1)
    res = flat @ lmap
    out, pos = [], 0
    for ir in irreps_out:
        out.append(res[:, pos:pos + ir.dim ** 2].reshape(nx, ir.dim, ir.dim))
        pos += ir.dim ** 2
    return out


def _q_values(sigma, q):
    """Grid values and band of ``q``: an admissible-family index, a ScalarField or a callable."""
    grid = sigma.grid
    if isinstance(q, (int, np.integer)):
        fam = admissible_family(grid.group)
        return fam(grid.points)[q], fam.band
    if isinstance(q, ScalarField):
        band = q.band if q.band is not None else estimate_band(grid, q.values)
        return q.values, band
    vals = np.asarray(q(grid.points), dtype=np.complex128)
    return vals, estimate_band(grid, vals)


def difference_op(sigma: Symbol, q) -> Symbol:
    """``(Delta_q sigma)(x, xi) = integral q(z) R(x, z) xi(z)* dz``.

    The output dual is reduced so every irrep it needs from ``sigma`` is
    present; an empty result raises :class:`AliasingError`.
    """
    if sigma.max_level > sigma.grid.exact_level:
        raise AliasingError("symbol dual exceeds the grid's exact level")
    q_vals, band = _q_values(sigma, q)
    out_dual = shrink_dual(sigma.group, sigma.irreps, sigma.lam, band)
    if not out_dual:
        raise AliasingError(f"truncation {sigma.lam} leaves no room for a band-{band} difference")
    blocks = _difference_blocks(sigma.grid, sigma.irreps, sigma.blocks, q_vals, out_dual)
    lam = max(ir.weight for ir in out_dual)
    return Symbol(sigma.grid, out_dual, tuple(blocks), lam, x_independent=sigma.x_independent,
                  scalar=sigma.scalar and sigma.group.kind == TORUS, x_band=sigma.x_band)


def _fourier_interpolate(sigma, points):
    """Evaluate a band-limited x-dependence off the grid via its Fourier series in x."""
    grid = sigma.grid
    group = grid.group
    key = ("interp", id(sigma))
    coef = grid.cache.get(key)
    if coef is None:
        top = min(grid.exact_level, sigma.x_band)
        if group.kind == TORUS:
            dual_x = tuple(ir for ir in group.dual(np.sqrt(1 + group.dim * top ** 2) + 1e-9) if ir.level <= top)
        else:
            dual_x = tuple(group.irrep(L) for L in range(top + 1))
        coef = (dual_x, [analyze_values(grid, b.reshape(grid.size, -1).T, dual_x) for b in sigma.blocks])
        grid.cache[key] = coef
    dual_x, per_irrep = coef
    evals = [group.evaluate(ir, points) for ir in dual_x]
    out = []
    for ir, coeffs in zip(sigma.irreps, per_irrep):
        acc = np.zeros((ir.dim * ir.dim, points.shape[0]), dtype=np.complex128)
        for eta, e, c in zip(dual_x, evals, coeffs):
            acc += eta.dim * np.einsum("nij,fji->fn", e, c)
        out.append(acc.T.reshape(-1, ir.dim, ir.dim))
    return out


# --- seminorms and ellipticity -----------------------------------------------

def _alpha_indices(m, alpha_max):
    for order in range(alpha_max + 1):
        yield from itertools.combinations_with_replacement(range(m), order)


def _beta_indices(n, beta_max):
    for order in range(beta_max + 1):
        yield from itertools.product(range(n), repeat=order)


def _x_derivative(sigma, beta, h):
    """Central-difference ``d_x^beta sigma`` at the grid points, per irrep ``(N, d, d)``."""
    grid = sigma.grid
    group = grid.group
    if not beta:
        return [np.broadcast_to(b, (grid.size,) + b.shape[1:]) for b in sigma.blocks]
    if sigma.x_independent:
        return [np.zeros((grid.size,) + b.shape[1:], dtype=np.complex128) for b in sigma.blocks]
    acc = None
    for signs in itertools.product((1, -1), repeat=len(beta)):
        pts = grid.points
        for direction, sgn in zip(beta, signs):
            pts = group.mul(pts, group.one_parameter(direction, sgn * h))
        vals = sigma.evaluate(pts)
        coef = np.prod(signs) / (2 * h) ** len(beta)
        acc = [coef * v for v in vals] if acc is None else [a + coef * v for a, v in zip(acc, vals)]
    return acc


def seminorm_report(sigma: Symbol, alpha_max=1, beta_max=1, rho=1.0):
    """Estimates of ``C_ab = max ||d_x^b Delta^a sigma||_op <xi>^|a|`` over grid and dual.

    Returns per multi-index rows, the max per order pair, and the
    ``(||sigma||, ||d_x sigma||, ||Delta_q sigma|| <xi>^rho)`` triple.
    """
    if alpha_max > 2 or beta_max > 2:
        raise ValueError("orders above 2 are not supported")
    grid = sigma.grid
    group = grid.group
    fam = admissible_family(group)
    q_all = fam(grid.points)
    h = FD_STEP[group.kind]
    rows = []
    triple = {"sup_norm": 0.0, "sup_dx": 0.0, "sup_delta_weighted": 0.0, "rho": rho}
    for beta in _beta_indices(group.lie_dim, beta_max):
        deriv = _x_derivative(sigma, beta, h)
        for alpha in _alpha_indices(fam.count, alpha_max):
            irreps, blocks = sigma.irreps, list(deriv)
            lam = sigma.lam
            for j in alpha:
                out_dual = shrink_dual(group, irreps, lam, fam.band)
                if not out_dual:
                    raise AliasingError(f"truncation too small for |alpha| = {len(alpha)}")
                blocks = _difference_blocks(grid, irreps, [np.ascontiguousarray(b) for b in blocks],
                                            q_all[j], out_dual)
                irreps, lam = out_dual, max(ir.weight for ir in out_dual)
            best = 0.0
            weighted_rho = 0.0
            for ir, b in zip(irreps, blocks):
                op = float(np.max(singular_values(b)[..., 0])) if b.size else 0.0
                best = max(best, op * ir.weight ** len(alpha))
                weighted_rho = max(weighted_rho, op * ir.weight ** rho)
            rows.append({"alpha": list(alpha), "beta": list(beta), "value": best})
            if not alpha and not beta:
                triple["sup_norm"] = best
            elif not alpha and len(beta) == 1:
                triple["sup_dx"] = max(triple["sup_dx"], best)
            elif len(alpha) == 1 and not beta:
                triple["sup_delta_weighted"] = max(triple["sup_delta_weighted"], weighted_rho)
    summary = {}
    for r in rows:
        key = (len(r["alpha"]), len(r["beta"]))
        summary[key] = max(summary.get(key, 0.0), r["value"])
    return {"rows": rows, "C": {f"{a},{b}": v for (a, b), v in sorted(summary.items())},
            "regularity_triple": triple, "step": h}


def ellipticity_check(sigma: Symbol, C_threshold=1e6, R=1.0):
    """``max ||sigma(x, xi)^-1||_op`` over grid x and ``<xi> >= R``."""
    bound = 0.0
    witnesses = []
    singular = False
    for ir, b in zip(sigma.irreps, sigma.blocks):
        if ir.weight < R * (1 - 1e-12):
            continue
        smin = singular_values(b)[:, -1]
        k = int(np.argmin(smin))
        if smin[k] <= 1e-12:
            singular = True
            witnesses.append({"label": list(ir.label), "x_index": k, "s_min": float(smin[k])})
            continue
        inv = 1.0 / float(smin[k])
        if inv > bound:
            bound = inv
    if singular:
        return {"elliptic": False, "bound": float("inf"), "singular": True, "witnesses": witnesses}
    return {"elliptic": bound <= C_threshold, "bound": bound, "singular": False, "witnesses": witnesses,
            "threshold": C_threshold}
