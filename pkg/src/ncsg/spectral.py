"""Spectral diagnostics: d_min / d_max, witness functions and finite-section checks.

For each irrep the profile records

    s_min(xi) = sup_x lambda_min(sigma sigma*) / ||sigma||_op
    s_max(xi) = sup_x ||sigma||_op

and the shell maxima of these approximate the limsups defining ``d_min`` and
``d_max``.  Everything here acts on finite sections, so every report carries
:data:`CAVEAT`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as dsl
from .errors import AliasingError, DimensionError, DomainError
from .fourier import ScalarField, estimate_band, l2_norm, matrix_field_norm, MatrixField
from .group import TORUS
from .linalg import singular_values
from .symbol import (OperatorMatrix, assemble_operator_matrix, coordinates, quantize_apply,
                     shrink_dual)

CAVEAT = ("finite-section caveat: every finite section is a compact operator; the lower bound "
          "shows up only as a singular-value floor at fixed k while the truncation grows")

#: defaults
GOHBERG_TOL = 0.05
COMPACT_TOL = 1e-3
JITTER = 0.05
DEFAULT_RADIUS = {"torus": math.pi / 4, "su2": math.pi / 3}


def _loglog_slope(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


# --- profiles and shells --------------------------------------------------

def _ratio_and_norm(block):
    """Per-x ratio ``lambda_min(s s*) / ||s||_op`` (0 where s = 0) and ``||s||_op``."""
    s = singular_values(block)
    op = s[:, 0]
    low = s[:, -1] ** 2
    ratio = np.divide(low, op, out=np.zeros_like(op), where=op > 0)
    return ratio, op


@dataclass(frozen=True, eq=False)
class ShellProfile:
    irreps: tuple
    s_min: np.ndarray
    s_max: np.ndarray
    x_argmax: np.ndarray
    shells: tuple = ()

    @property
    def weights(self):
        return np.array([ir.weight for ir in self.irreps])

    def to_dict(self):
        return {"irreps": [ir.to_dict() for ir in self.irreps], "s_min": self.s_min.tolist(),
                "s_max": self.s_max.tolist(), "x_argmax": self.x_argmax.tolist(),
                "shells": list(self.shells)}


def shell_profile(sigma, shells=()) -> ShellProfile:
    s_min, s_max, arg = [], [], []
    for b in sigma.blocks:
        ratio, op = _ratio_and_norm(b)
        k = int(np.argmax(ratio))
        s_min.append(ratio[k])
        s_max.append(op.max())
        arg.append(k)
    return ShellProfile(sigma.irreps, np.array(s_min), np.array(s_max), np.array(arg, dtype=int),
                        tuple(shells))


def default_shells(lam):
    """Geometric thresholds with ratio 2 from ``lam / 8`` to ``lam``."""
    return [lam / 8, lam / 4, lam / 2, lam]


@dataclass(frozen=True, eq=False)
class DminReport:
    rows: list
    d_min: float
    d_max: float
    profile: ShellProfile

    @property
    def ess_radius(self):
        return self.d_max

    def to_dict(self):
        return {"shells": self.rows, "d_min": self.d_min, "d_max": self.d_max,
                "essential_spectrum_radius": self.d_max, "caveat": CAVEAT,
                "note": ("the disc bound on the essential spectrum is checked through its mechanism "
                         "(resolvent and ellipticity of sigma - lambda), not directly")}


def dmin_dmax(sigma, shells=None) -> DminReport:
    """Per-shell maxima of the profile over ``[R_i, R_i+1)``; the last shell is closed."""
    shells = list(default_shells(sigma.lam) if shells is None else shells)
    if len(shells) < 3 or any(b <= a for a, b in zip(shells, shells[1:])):
        raise ValueError("need at least two shells with increasing thresholds")
    prof = shell_profile(sigma, shells)
    w = prof.weights
    rows = []
    for i, (lo, hi) in enumerate(zip(shells, shells[1:])):
        last = i == len(shells) - 2
        sel = (w >= lo * (1 - 1e-12)) & ((w <= hi * (1 + 1e-12)) if last else (w < hi * (1 - 1e-12)))
        if not sel.any():
            rows.append({"shell_lo": lo, "shell_hi": hi, "count": 0, "empty": True,
                         "d_min": None, "d_max": None})
            continue
        rows.append({"shell_lo": lo, "shell_hi": hi, "count": int(sel.sum()), "empty": False,
                     "d_min": float(prof.s_min[sel].max()), "d_max": float(prof.s_max[sel].max())})
    filled = [r for r in rows if not r["empty"]]
    if not filled:
        raise ValueError("every shell is empty")
    return DminReport(rows, filled[-1]["d_min"], filled[-1]["d_max"], prof)


# --- witness functions ----------------------------------------------------

@dataclass(frozen=True)
class WitnessSpec:
    """Base profile ``u``: a cosine bump of half-maximum radius ``radius`` or a DSL expression.

    The bump is ``prod_j ((1 + cos x_j) / 2)^p`` on the torus and
    ``((1 + w) / 2)^p`` on SU(2) (``w`` the real quaternion part), with the
    smallest ``p`` that brings it to half its peak at ``radius``.
    """

    radius: float | None = None
    expr: str | None = None

    @classmethod
    def from_dict(cls, d):
        return cls(**(d or {}))

    def to_dict(self):
        return {"radius": self.radius, "expr": self.expr}


def bump_power(kind, radius):
    base = (1 + math.cos(radius)) / 2 if kind == TORUS else (1 + math.cos(radius / 2)) / 2
    if not 0 < base < 1:
        raise ValueError(f"radius {radius} out of range")
    return max(1, math.ceil(math.log(0.5) / math.log(base) - 1e-9))


def profile_function(group, spec: WitnessSpec):
    """``(callable on points, band level)`` for the base profile."""
    if spec.expr is not None:
        ast = dsl.parse_expr(spec.expr, group.coordinate_names())

        def fn(points):
            env = group.coordinates(points)
            n = next(iter(env.values())).shape[0]
            return np.broadcast_to(np.asarray(dsl.evaluate(ast, env), dtype=float), (n,)).astype(complex)
        return fn, None
    radius = spec.radius if spec.radius is not None else DEFAULT_RADIUS[group.kind]
    p = bump_power(group.kind, radius)
    if group.kind == TORUS:
        def fn(points):
            return np.prod(((1 + np.cos(points)) / 2) ** p, axis=1).astype(complex)
        return fn, p
    return (lambda points: (((1 + points[:, 0]) / 2) ** p).astype(complex)), p


@dataclass(frozen=True, eq=False)
class WitnessField:
    field: MatrixField
    irrep: object
    x0: np.ndarray
    u: ScalarField
    norm: float
    u_norm: float
    band: int | None

    @property
    def identity_gap(self):
        return abs(self.norm - self.u_norm)

    def entry_values(self):
        """The ``d^2`` scalar components, shape ``(d^2, N)``."""
        v = self.field.values
        return v.reshape(v.shape[0], -1).T


def witness(grid, spec: WitnessSpec, irrep, x0) -> WitnessField:
    """``u_xi(x) = d^-1/2 xi(x) u(x x0^-1)`` sampled on the grid."""
    group = grid.group
    fn, band = profile_function(group, spec)
    x0 = np.asarray(x0, float).reshape(group.point_dim)
    u_base = fn(grid.points)
    if not np.any(u_base != 0):
        raise DomainError("witness profile vanishes identically")
    if band is None:
        band = estimate_band(grid, u_base)
    shifted = fn(group.mul(grid.points, group.inv(x0)[None, :]))
    xi = group.evaluate_on_grid(grid, irrep)
    vals = xi * shifted[:, None, None] / math.sqrt(irrep.dim)
    mf = MatrixField(grid, vals)
    u = ScalarField(grid, u_base, band)
    return WitnessField(mf, irrep, x0, u, matrix_field_norm(mf), l2_norm(u), band)


def _argmax_point(sigma, irrep):
    ratio, _ = _ratio_and_norm(sigma.blocks[sigma.index(irrep)])
    k = int(np.argmax(ratio))
    if sigma.x_independent:
        k = 0
    return k, sigma.grid.points[k]


def _check_witness_margin(sigma, irrep, band):
    if band is None:
        return
    inside = shrink_dual(sigma.group, sigma.irreps, sigma.lam, band)
    if irrep not in inside:
        raise AliasingError(f"witness at {irrep.label} with band {band} leaves the symbol's dual")
    if irrep.level + band + sigma.x_band > sigma.grid.exact_level:
        raise AliasingError(f"witness at {irrep.label} exceeds the grid's exact level")


def lemma_decay_check(sigma, xi_sequence, spec: WitnessSpec = WitnessSpec()):
    """``||u_xi sigma(., xi) - T u_xi||`` along ``xi_sequence`` and its log-log slope."""
    rows = []
    for ir in xi_sequence:
        k, x0 = _argmax_point(sigma, ir)
        wf = witness(sigma.grid, spec, ir, x0)
        _check_witness_margin(sigma, ir, wf.band)
        t_u = quantize_apply(sigma, wf.entry_values())
        t_u = t_u.T.reshape(wf.field.values.shape)
        lhs = wf.field.values @ sigma.at(ir)
        diff = matrix_field_norm(MatrixField(sigma.grid, lhs - t_u))
        rows.append({"label": list(ir.label), "weight": ir.weight, "x_index": k, "difference": diff,
                     "witness_norm": wf.norm, "u_norm": wf.u_norm})
    diffs = [r["difference"] for r in rows]
    return {"rows": rows, "slope": _loglog_slope([r["weight"] for r in rows], diffs),
            "monotone_decreasing": all(b < a for a, b in zip(diffs, diffs[1:]))}


# --- Gohberg lower bound ----------------------------------------------------

def _compress(mat: OperatorMatrix, n):
    return mat.matrix[:n, :n]


def gohberg_check(sigma, lam_list, k_fixed=5, K: OperatorMatrix | None = None, xi_sequence=None,
                  spec: WitnessSpec = WitnessSpec(), tol=GOHBERG_TOL, shells=None):
    """Singular-value floor ``s_{k+1}(T_lam - K)`` over ``lam_list`` plus witness certificates.

    ``K`` must be given in the basis of the largest truncation; smaller
    truncations use its leading principal block (the bases are nested).
    """
    lam_list = sorted(lam_list)
    dm = dmin_dmax(sigma, shells)
    top = assemble_operator_matrix(sigma, lam_list[-1])
    kmat = None
    if K is not None:
        if not top.same_basis(K):
            raise DimensionError("K is not expressed in the basis of the largest truncation")
        kmat = K.matrix
    floors = []
    for lam in lam_list:
        n = sum(ir.dim ** 2 for ir in top.irreps if ir.weight <= lam * (1 + 1e-12))
        m = top.matrix[:n, :n] if kmat is None else top.matrix[:n, :n] - kmat[:n, :n]
        s = np.linalg.svd(m, compute_uv=False)
        floors.append({"lambda": lam, "size": n, "s_k1": float(s[k_fixed]) if n > k_fixed else 0.0,
                       "op_norm": float(s[0]) if n else 0.0})
    d_min = dm.d_min
    vacuous = d_min == 0
    floor_ok = vacuous or floors[-1]["s_k1"] >= d_min * (1 - tol)
    certs = []
    if xi_sequence:
        diff = top.matrix if kmat is None else top.matrix - kmat
        running = 0.0
        for ir in xi_sequence:
            k, x0 = _argmax_point(sigma, ir)
            wf = witness(sigma.grid, spec, ir, x0)
            if wf.band is not None and ir.level + wf.band > max(t.level for t in top.irreps):
                raise AliasingError(f"witness at {ir.label} is outside the truncated basis")
            c = coordinates(sigma.grid, top.irreps, wf.entry_values())
            val = float(np.sqrt(np.sum(np.abs(c @ diff.T) ** 2))) / wf.u_norm
            running = max(running, val)
            certs.append({"label": list(ir.label), "weight": ir.weight, "x_index": k, "value": val,
                          "running_max": running, "norm_identity_gap": wf.identity_gap})
    return {
        "d_min": d_min, "d_max": dm.d_max, "k_fixed": k_fixed, "tol": tol, "floors": floors,
        "floor_ok": bool(floor_ok),
        "note": "no obstruction from the lower bound (d_min = 0)" if vacuous else None,
        "witness": certs, "witness_gap": (d_min - certs[-1]["running_max"]) if certs else None,
        "upper_bound": floors[-1]["op_norm"], "caveat": CAVEAT,
    }


# --- compactness, resolvent, normality ------------------------------------

def _tail_norms(sigma, lam, R_list):
    """``||T_lam||`` restricted to basis rows/cols with weight >= R, plus all singular values."""
    if sigma.x_independent:
        dual = [(ir, b[0]) for ir, b in zip(sigma.irreps, sigma.blocks) if ir.weight <= lam * (1 + 1e-12)]
        per = [(ir.weight, np.linalg.svd(b, compute_uv=False), ir.dim) for ir, b in dual]
        tails = []
        for R in R_list:
            vals = [s[0] for w, s, _ in per if w >= R * (1 - 1e-12)]
            tails.append(float(max(vals)) if vals else 0.0)
        sv = np.sort(np.concatenate([np.repeat(s, d) for _, s, d in per]))[::-1]
        return tails, sv
    mat = assemble_operator_matrix(sigma, lam)
    w = mat.row_weights
    tails = []
    for R in R_list:
        idx = np.flatnonzero(w >= R * (1 - 1e-12))
        tails.append(float(np.linalg.norm(mat.matrix[np.ix_(idx, idx)], 2)) if idx.size else 0.0)
    return tails, np.linalg.svd(mat.matrix, compute_uv=False)


def compactness_diagnostic(sigma, R_list=None, lam=None, tol=COMPACT_TOL, shells=None):
    """Tail norms over ``<xi> >= R`` and a compactness verdict.

    Verdict "compact-consistent" when the tails are non-increasing (up to 5%
    jitter) and either reach ``tol`` or decay with log-log slope <= -0.5.
    """
    lam = sigma.lam if lam is None else lam
    R_list = list(R_list if R_list is not None else default_shells(lam)[:-1])
    if any(R >= lam for R in R_list):
        raise ValueError("every R must lie below the truncation")
    dm = dmin_dmax(sigma, shells)
    tails, sv = _tail_norms(sigma, lam, R_list)
    monotone = all(b <= a * (1 + JITTER) + 1e-15 for a, b in zip(tails, tails[1:]))
    slope = _loglog_slope(R_list, tails)
    reaches = tails[-1] <= tol
    decays = slope is not None and slope <= -0.5
    verdict = "compact-consistent" if monotone and (reaches or decays) else "not compact"
    return {"R_list": R_list, "tail_norms": tails, "slope": slope, "monotone": monotone,
            "d_max": dm.d_max, "d_max_below_tol": dm.d_max <= tol, "verdict": verdict,
            "singular_values": sv.tolist(), "tol": tol, "caveat": CAVEAT}


def resolvent_bound(sigma, lam_c, R=1.0, shells=None):
    """``sup ||(sigma - lambda I)^-1||_op`` over grid x and ``<xi> >= R``."""
    lam_c = complex(lam_c)
    worst = np.inf
    for ir, b in zip(sigma.irreps, sigma.blocks):
        if ir.weight < R * (1 - 1e-12):
            continue
        s = singular_values(b - lam_c * np.eye(ir.dim))[:, -1]
        worst = min(worst, float(s.min()))
    ok = worst >= 1e-12
    d_max = dmin_dmax(sigma, shells).d_max
    return {"lambda": [lam_c.real, lam_c.imag], "ok": bool(ok),
            "sup_inverse_norm": (1.0 / worst) if ok else float("inf"),
            "d_max": d_max, "outside_disc": abs(lam_c) > d_max}


def essential_normality_check(sigma, lam=None, R_list=None):
    """Commutator ``C = T T* - T* T`` of the finite section and its interior tail norms.

    Tails use rows/cols with ``R <= <xi> <= lam / 2`` so the truncation
    boundary does not pollute them.
    """
    lam = sigma.lam if lam is None else lam
    inner = lam / 2
    R_list = list(R_list if R_list is not None else [inner / 4, inner / 2 * 0.75, inner / 2])
    mat = assemble_operator_matrix(sigma, lam)
    t = mat.matrix
    c = t @ t.conj().T - t.conj().T @ t
    w = mat.row_weights
    tails = []
    for R in R_list:
        idx = np.flatnonzero((w >= R * (1 - 1e-12)) & (w <= inner * (1 + 1e-12)))
        tails.append(float(np.linalg.norm(c[np.ix_(idx, idx)], 2)) if idx.size else 0.0)
    sv = np.linalg.svd(c, compute_uv=False)
    return {"R_list": R_list, "interior_limit": inner, "tail_norms": tails,
            "slope": _loglog_slope(R_list, tails), "commutator_norm": float(sv[0]) if sv.size else 0.0,
            "singular_values": sv.tolist(), "caveat": CAVEAT}
