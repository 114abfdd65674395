"""Concrete compact Lie groups: the n-torus and SU(2).

Points are stored as numpy arrays with the group coordinates on the last
axis: angle vectors ``(..., n)`` for the torus, unit quaternions
``(..., 4)`` ordered ``(w, x, y, z)`` for SU(2).

SU(2) irreps are labelled by the doubled spin ``two_ell = 2l``.  Matrix rows
and columns are indexed by ``m = l, l-1, ..., -l`` (descending), and

    D^l_{m'm}(alpha, beta, gamma) = exp(-i m' alpha) d^l_{m'm}(beta) exp(-i m gamma),

the matrix of ``exp(-i alpha J_z) exp(-i beta J_y) exp(-i gamma J_z)``.  The
quaternion ``(w, x, y, z)`` maps to ``w I - i (x s_x + y s_y + z s_z)``, which
makes ``D^{1/2}`` a homomorphism for the Hamilton product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDualError, GroupMismatchError

TORUS = "torus"
SU2_KIND = "su2"

#: residual below which a quadrature orthogonality integral counts as exact
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class Irrep:
    """One class of the unitary dual.

    ``label`` is the integer vector ``k`` on the torus and ``(two_ell,)`` on SU(2).
    """

    kind: str
    label: tuple
    dim: int
    casimir: float

    @property
    def weight(self) -> float:
        return math.sqrt(1.0 + self.casimir)

    @property
    def level(self) -> int:
        """Band level: ``max|k_j|`` on the torus, ``two_ell`` on SU(2)."""
        if self.kind == TORUS:
            return max((abs(k) for k in self.label), default=0)
        return self.label[0]

    @property
    def is_trivial(self) -> bool:
        return self.casimir == 0

    def to_dict(self):
        return {"kind": self.kind, "label": list(self.label), "dim": self.dim,
                "casimir": self.casimir, "weight": self.weight}


def _sort_key(irrep):
    return (irrep.casimir, irrep.label)


def weight_of_level(kind, level):
    """Weight of the smallest-weight irrep that attains ``level`` (used for exactness)."""
    if kind == TORUS:
        return math.sqrt(1.0 + level * level)
    return math.sqrt(1.0 + level * (level + 2) / 4.0)


# --- Wigner little-d -----------------------------------------------------

def _seed(j, mp, m, c, s):
    """d^j_{m'm} from the explicit sum; a single term when j = max(|m'|, |m|)."""
    pref = 0.5 * (math.lgamma(j + mp + 1) + math.lgamma(j - mp + 1)
                  + math.lgamma(j + m + 1) + math.lgamma(j - m + 1))
    out = np.zeros_like(c)
    for k in range(int(round(2 * j)) + 1):
        args = (j + m - k, k, mp - m + k, j - mp - k)
        if min(args) < -1e-9:
            continue
        coef = math.exp(pref - sum(math.lgamma(a + 1) for a in args))
        sign = -1.0 if int(round(mp - m + k)) % 2 else 1.0
        out = out + sign * coef * c ** int(round(2 * j + m - mp - 2 * k)) * s ** int(round(mp - m + 2 * k))
    return out


def small_d_all(two_ell_max, beta):
    """Wigner little-d matrices ``[d^0, d^{1/2}, ..., d^{two_ell_max/2}]`` at angles ``beta``.

    Each entry has shape ``(len(beta), 2l+1, 2l+1)``.  Every matrix element is
    seeded at ``j = max(|m'|, |m|)`` from the closed form and carried upward by
    the three-term recursion in ``j``.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    c, s, cb = np.cos(beta / 2), np.sin(beta / 2), np.cos(beta)
    out = [None] * (two_ell_max + 1)
    for parity in (0, 1):
        top = two_ell_max if two_ell_max % 2 == parity else two_ell_max - 1
        if top < 0:
            continue
        ms = np.arange(top, -top - 1, -2) / 2.0
        n = ms.size
        mp_, m_ = ms[:, None], ms[None, :]
        j0 = np.maximum(np.abs(mp_), np.abs(m_))
        seeds = np.empty((beta.size, n, n))
        for a in range(n):
            for b in range(n):
                seeds[:, a, b] = _seed(j0[a, b], ms[a], ms[b], c, s)
        prev = np.zeros((beta.size, n, n))
        prev2 = np.zeros_like(prev)
        for two_j in range(parity, top + 1, 2):
            j = two_j / 2.0
            at_seed = np.isclose(j0, j)
            grow = j0 < j - 0.25
            with np.errstate(divide="ignore", invalid="ignore"):
                a_coef = np.where(grow, j * (2 * j - 1) / np.sqrt((j * j - m_ ** 2) * (j * j - mp_ ** 2)), 0.0)
                if j > 1.0:
                    b_coef = m_ * mp_ / (j * (j - 1))
                    c_coef = np.sqrt(np.clip(((j - 1) ** 2 - m_ ** 2) * ((j - 1) ** 2 - mp_ ** 2), 0, None)) / ((j - 1) * (2 * j - 1))
                else:
                    b_coef = np.zeros_like(a_coef)
                    c_coef = np.zeros_like(a_coef)
            rec = a_coef * ((cb[:, None, None] - b_coef) * prev - c_coef * prev2)
            cur = np.where(at_seed, seeds, np.where(grow, rec, 0.0))
            off = (top - two_j) // 2
            out[two_j] = np.ascontiguousarray(cur[:, off:off + two_j + 1, off:off + two_j + 1])
            prev2, prev = prev, cur
    return out


def small_d(two_ell, beta):
    return small_d_all(two_ell, beta)[two_ell]


def _m_values(two_ell):
    return (two_ell - 2 * np.arange(two_ell + 1)) / 2.0


# --- quaternions ---------------------------------------------------------

def quat_mul(p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def quat_from_euler(alpha, beta, gamma):
    """ZYZ Euler angles to the quaternion of ``qz(alpha) qy(beta) qz(gamma)``."""
    alpha, beta, gamma = np.broadcast_arrays(*(np.asarray(v, float) for v in (alpha, beta, gamma)))
    cb, sb = np.cos(beta / 2), np.sin(beta / 2)
    sp, sm = (alpha + gamma) / 2, (alpha - gamma) / 2
    return np.stack([cb * np.cos(sp), -sb * np.sin(sm), sb * np.cos(sm), cb * np.sin(sp)], axis=-1)


def euler_from_quat(q):
    """Inverse of :func:`quat_from_euler` with ``alpha in [0, 2pi)``, ``gamma in [0, 4pi)``.

    The sign of the quaternion is preserved (the pair covers SU(2) once).
    """
    q = np.asarray(q, float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    beta = 2.0 * np.arctan2(np.hypot(x, y), np.hypot(w, z))
    half_sum = np.arctan2(z, w)
    half_diff = np.arctan2(-x, y)
    alpha = half_sum + half_diff
    gamma = half_sum - half_diff
    turns = np.floor(alpha / (2 * np.pi))
    alpha = alpha - 2 * np.pi * turns
    gamma = np.mod(gamma + 2 * np.pi * turns, 4 * np.pi)
    return alpha, beta, gamma


# --- groups --------------------------------------------------------------

@dataclass(frozen=True)
class Torus:
    dim: int = 1
    kind = TORUS

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("torus dimension must be >= 1")

    @property
    def lie_dim(self):
        return self.dim

    @property
    def point_dim(self):
        return self.dim

    def irrep(self, k):
        k = tuple(int(v) for v in np.atleast_1d(k))
        if len(k) != self.dim:
            raise GroupMismatchError(f"torus label must have {self.dim} entries")
        return Irrep(TORUS, k, 1, float(sum(v * v for v in k)))

    def dual(self, lam):
        if lam < 1:
            raise EmptyDualError(f"no irreps with weight <= {lam}")
        bound = lam * lam * (1 + 1e-12) - 1.0
        kmax = int(math.floor(math.sqrt(max(bound, 0.0))))
        axes = [range(-kmax, kmax + 1)] * self.dim
        out = [self.irrep(k) for k in np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.dim, -1).T
               if float(np.dot(k, k)) <= bound]
        return sorted(out, key=_sort_key)

    def check(self, irrep):
        if irrep.kind != TORUS or len(irrep.label) != self.dim:
            raise GroupMismatchError(f"irrep {irrep.label} does not belong to T^{self.dim}")

    def evaluate(self, irrep, points):
        self.check(irrep)
        points = np.asarray(points, float).reshape(-1, self.dim)
        return np.exp(1j * points @ np.asarray(irrep.label, float))[:, None, None]

    def identity(self):
        return np.zeros(self.dim)

    def mul(self, x, y):
        return np.mod(np.asarray(x, float) + np.asarray(y, float), 2 * np.pi)

    def inv(self, x):
        return np.mod(-np.asarray(x, float), 2 * np.pi)

    def geodesic(self, x):
        wrapped = np.mod(np.asarray(x, float) + np.pi, 2 * np.pi) - np.pi
        return np.linalg.norm(wrapped, axis=-1)

    def one_parameter(self, direction, t):
        """``exp(t X_direction)`` for the orthonormal frame of coordinate directions."""
        v = np.zeros(self.dim)
        v[direction] = t
        return np.mod(v, 2 * np.pi)

    def coordinates(self, points):
        points = np.asarray(points, float).reshape(-1, self.dim)
        return {f"x{j + 1}": np.mod(points[:, j], 2 * np.pi) for j in range(self.dim)}

    def coordinate_names(self):
        return tuple(f"x{j + 1}" for j in range(self.dim))

    def admissible_values(self, points):
        points = np.asarray(points, float).reshape(-1, self.dim)
        return (np.exp(1j * points) - 1.0).T

    admissible_band = 1

    # quadrature ---------------------------------------------------------

    def grid(self, sizes):
        sizes = tuple(int(v) for v in np.atleast_1d(sizes))
        if len(sizes) == 1 and self.dim > 1:
            sizes = sizes * self.dim
        if len(sizes) != self.dim or min(sizes) < 2:
            raise ValueError(f"torus grid needs {self.dim} sizes >= 2, got {sizes}")
        axes = [2 * np.pi * np.arange(m) / m for m in sizes]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        n = pts.shape[0]
        weights = np.full(n, 1.0 / n)
        return QuadratureGrid(self, sizes, pts, weights, self._scan_exact_level(sizes))

    @staticmethod
    def _scan_exact_level(sizes):
        levels = []
        for m in sizes:
            nodes = 2 * np.pi * np.arange(m) / m
            j = 0
            while j + 1 <= 4 * m and abs(np.mean(np.exp(1j * (j + 1) * nodes))) <= EXACT_TOL:
                j += 1
            levels.append(j // 2)
        return min(levels)

    def analyze_batch(self, grid, values, irreps):
        values = np.asarray(values, dtype=np.complex128).reshape(-1, *grid.sizes)
        spec = np.fft.fftn(values, axes=tuple(range(1, self.dim + 1))) / grid.size
        out = []
        for irrep in irreps:
            self.check(irrep)
            idx = tuple(k % m for k, m in zip(irrep.label, grid.sizes))
            out.append(spec[(slice(None),) + idx][:, None, None])
        return out

    def synthesize_batch(self, grid, blocks, irreps, count):
        acc = np.zeros((count,) + grid.sizes, dtype=np.complex128)
        for irrep, blk in zip(irreps, blocks):
            self.check(irrep)
            idx = tuple(k % m for k, m in zip(irrep.label, grid.sizes))
            acc[(slice(None),) + idx] += np.broadcast_to(blk, (count, 1, 1))[:, 0, 0]
        vals = np.fft.ifftn(acc, axes=tuple(range(1, self.dim + 1))) * grid.size
        return vals.reshape(count, -1)

    def evaluate_on_grid(self, grid, irrep):
        return self.evaluate(irrep, grid.points)


@dataclass(frozen=True)
class SU2:
    kind = SU2_KIND
    lie_dim = 3
    point_dim = 4

    def irrep(self, two_ell):
        two_ell = int(np.atleast_1d(two_ell)[0])
        if two_ell < 0:
            raise ValueError("two_ell must be >= 0")
        return Irrep(SU2_KIND, (two_ell,), two_ell + 1, two_ell * (two_ell + 2) / 4.0)

    def dual(self, lam):
        if lam < 1:
            raise EmptyDualError(f"no irreps with weight <= {lam}")
        bound = lam * lam * (1 + 1e-12)
        out = []
        L = 0
        while 1.0 + L * (L + 2) / 4.0 <= bound:
            out.append(self.irrep(L))
            L += 1
        return out

    def check(self, irrep):
        if irrep.kind != SU2_KIND:
            raise GroupMismatchError(f"irrep {irrep.kind}{irrep.label} does not belong to SU(2)")

    def evaluate(self, irrep, points):
        self.check(irrep)
        q = np.asarray(points, float).reshape(-1, 4)
        alpha, beta, gamma = euler_from_quat(q)
        return self._wigner(irrep.label[0], alpha, small_d(irrep.label[0], beta), gamma)

    @staticmethod
    def _wigner(two_ell, alpha, d, gamma):
        m = _m_values(two_ell)
        left = np.exp(-1j * alpha[:, None] * m[None, :])
        right = np.exp(-1j * gamma[:, None] * m[None, :])
        return left[:, :, None] * d * right[:, None, :]

    def identity(self):
        return np.array([1.0, 0.0, 0.0, 0.0])

    def mul(self, x, y):
        return quat_mul(x, y)

    def inv(self, x):
        return np.asarray(x, float) * np.array([1.0, -1.0, -1.0, -1.0])

    def geodesic(self, x):
        w = np.abs(np.asarray(x, float)[..., 0])
        return 2.0 * np.arccos(np.clip(w, 0.0, 1.0))

    def one_parameter(self, direction, t):
        """``exp(t X_k)``: rotation by angle ``t`` about axis ``k`` (x, y, z)."""
        q = np.zeros(4)
        q[0] = math.cos(t / 2)
        q[1 + direction] = math.sin(t / 2)
        return q

    def coordinates(self, points):
        q = np.asarray(points, float).reshape(-1, 4)
        alpha, beta, gamma = euler_from_quat(q)
        return {"alpha": alpha, "beta": beta, "gamma": gamma,
                "qw": q[:, 0], "qx": q[:, 1], "qy": q[:, 2], "qz": q[:, 3]}

    def coordinate_names(self):
        return ("alpha", "beta", "gamma", "qw", "qx", "qy", "qz")

    def admissible_values(self, points):
        # Re/Im of the entries of D^{1/2}(x) - I: (w - 1, -z, -y, -x)
        q = np.asarray(points, float).reshape(-1, 4)
        return np.stack([q[:, 0] - 1.0, -q[:, 3], -q[:, 2], -q[:, 1]]).astype(np.complex128)

    admissible_band = 1

    # quadrature ---------------------------------------------------------

    def grid(self, sizes):
        sizes = tuple(int(v) for v in np.atleast_1d(sizes))
        if len(sizes) == 1:
            sizes = sizes * 3
        if len(sizes) != 3 or min(sizes) < 2:
            raise ValueError(f"su2 grid needs 3 sizes >= 2, got {sizes}")
        ma, mb, mg = sizes
        alpha = 2 * np.pi * np.arange(ma) / ma
        nodes, wts = np.polynomial.legendre.leggauss(mb)
        beta = np.arccos(nodes[::-1])
        wbeta = wts[::-1] / 2.0
        gamma = 4 * np.pi * np.arange(mg) / mg
        A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
        pts = quat_from_euler(A, B, G).reshape(-1, 4)
        weights = (np.full(ma, 1.0 / ma)[:, None, None] * wbeta[None, :, None]
                   * np.full(mg, 1.0 / mg)[None, None, :]).reshape(-1)
        euler = np.stack([A, B, G], axis=-1).reshape(-1, 3)
        level = self._scan_exact_level(alpha, beta, wbeta, gamma)
        grid = QuadratureGrid(self, sizes, pts, weights, level, euler=euler)
        grid.cache["axes"] = (alpha, beta, wbeta, gamma)
        return grid

    @staticmethod
    def _scan_exact_level(alpha, beta, wbeta, gamma):
        """Largest two_ell such that all matrix coefficients up to it are orthonormal.

        The Haar integral of ``D^l_{mn} conj(D^l'_{m'n'})`` factorizes into an
        alpha sum, a gamma sum and a beta Gauss-Legendre sum; each factor's
        residual is scanned level by level.
        """
        cap = min(len(alpha) + 1, len(gamma) // 2 + 1, 2 * len(beta) + 1) + 1
        dmats = small_d_all(cap, beta)
        for L in range(0, cap + 1):
            ok_alpha = all(abs(np.mean(np.exp(1j * j * alpha))) <= EXACT_TOL for j in range(1, L + 1))
            ok_gamma = all(abs(np.mean(np.exp(0.5j * j * gamma))) <= EXACT_TOL for j in range(1, 2 * L + 1))
            ok_beta = True
            for L2 in range(L % 2, L + 1, 2):
                # overlap of d^{L/2}_{mn} with d^{L2/2}_{mn} on the common (m, n) block
                off = (L - L2) // 2
                dl = dmats[L][:, off:off + L2 + 1, off:off + L2 + 1]
                gram = np.einsum("b,bij,bij->ij", wbeta, dl, dmats[L2])
                target = np.full_like(gram, 1.0 / (L + 1)) if L2 == L else np.zeros_like(gram)
                if np.max(np.abs(gram - target)) > EXACT_TOL:
                    ok_beta = False
                    break
            if not (ok_alpha and ok_gamma and ok_beta):
                return L - 1
        return cap

    def _axes(self, grid):
        return grid.cache["axes"]

    def _small_d_grid(self, grid, two_ell_max):
        cached = grid.cache.get("small_d")
        if cached is None or len(cached) <= two_ell_max:
            top = max(two_ell_max, grid.exact_level)
            cached = small_d_all(top, self._axes(grid)[1])
            grid.cache["small_d"] = cached
        return cached

    def _phase(self, grid, two_top, parity, which):
        alpha, _, _, gamma = self._axes(grid)
        ang = alpha if which == "alpha" else gamma
        m = np.arange(two_top, -two_top - 1, -2) / 2.0
        return np.exp(1j * ang[:, None] * m[None, :])

    def analyze_batch(self, grid, values, irreps):
        for irrep in irreps:
            self.check(irrep)
        ma, mb, mg = grid.sizes
        _, _, wbeta, _ = self._axes(grid)
        values = np.asarray(values, dtype=np.complex128).reshape(-1, ma, mb, mg)
        levels = [ir.label[0] for ir in irreps]
        top = max(levels) if levels else 0
        dmats = self._small_d_grid(grid, top)
        partial = {}
        for parity in {L % 2 for L in levels}:
            t = top if top % 2 == parity else top - 1
            ea = self._phase(grid, t, parity, "alpha") / ma
            eg = self._phase(grid, t, parity, "gamma") / mg
            tmp = np.einsum("fabg,ap->fbgp", values, ea, optimize=True)
            partial[parity] = (t, np.einsum("fbgp,gq->fbpq", tmp, eg, optimize=True))
        out = []
        for L in levels:
            t, g = partial[L % 2]
            off = (t - L) // 2
            sub = g[:, :, off:off + L + 1, off:off + L + 1]
            h = np.einsum("b,bpq,fbpq->fpq", wbeta, dmats[L], sub, optimize=True)
            out.append(np.swapaxes(h, 1, 2))
        return out

    def synthesize_batch(self, grid, blocks, irreps, count):
        ma, mb, mg = grid.sizes
        levels = [ir.label[0] for ir in irreps]
        for irrep in irreps:
            self.check(irrep)
        if not levels:
            return np.zeros((count, grid.size), dtype=np.complex128)
        top = max(levels)
        dmats = self._small_d_grid(grid, top)
        acc = {}
        for L, blk in zip(levels, blocks):
            parity = L % 2
            t = top if top % 2 == parity else top - 1
            if parity not in acc:
                acc[parity] = (t, np.zeros((count, mb, t + 1, t + 1), dtype=np.complex128))
            off = (t - L) // 2
            blk = np.broadcast_to(blk, (count, L + 1, L + 1))
            acc[parity][1][:, :, off:off + L + 1, off:off + L + 1] += (
                (L + 1) * dmats[L][None, :, :, :] * np.swapaxes(blk, 1, 2)[:, None, :, :])
        vals = np.zeros((count, ma, mb, mg), dtype=np.complex128)
        for parity, (t, h) in acc.items():
            ea = np.conj(self._phase(grid, t, parity, "alpha"))
            eg = np.conj(self._phase(grid, t, parity, "gamma"))
            tmp = np.einsum("fbpq,gq->fbpg", h, eg, optimize=True)
            vals += np.einsum("fbpg,ap->fabg", tmp, ea, optimize=True)
        return vals.reshape(count, -1)

    def evaluate_on_grid(self, grid, irrep):
        self.check(irrep)
        L = irrep.label[0]
        alpha, _, _, gamma = self._axes(grid)
        d = self._small_d_grid(grid, L)[L]
        m = _m_values(L)
        ea = np.exp(-1j * alpha[:, None] * m[None, :])
        eg = np.exp(-1j * gamma[:, None] * m[None, :])
        full = (ea[:, None, None, :, None] * d[None, :, None, :, :] * eg[None, None, :, None, :])
        return full.reshape(-1, L + 1, L + 1)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Haar quadrature: points, normalized weights, and the exact level.

    ``exact_level`` is the largest band level ``L`` such that all matrix
    coefficients of irreps with level ``<= L`` are orthonormal under the rule.
    """

    group: object
    sizes: tuple
    points: np.ndarray
    weights: np.ndarray
    exact_level: int
    euler: np.ndarray = None
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def exactness_degree(self):
        return weight_of_level(self.group.kind, self.exact_level)

    def integrate(self, values):
        return np.sum(np.asarray(values) * self.weights, axis=-1)

    def to_dict(self, include_points=True):
        out = {"kind": self.group.kind, "sizes": list(self.sizes), "exact_level": self.exact_level,
               "exactness_degree": self.exactness_degree, "size": self.size}
        if self.group.kind == TORUS:
            out["dim"] = self.group.dim
        if include_points:
            out["points"] = self.points.tolist()
            out["weights"] = self.weights.tolist()
            if self.euler is not None:
                out["euler"] = self.euler.tolist()
        return out


@dataclass(frozen=True)
class GroupDescriptor:
    """Group kind plus quadrature sizes, as carried in configs and containers."""

    kind: str
    grid: tuple
    dim: int = 1

    def __post_init__(self):
        if self.kind not in (TORUS, SU2_KIND):
            raise ValueError(f"unknown group kind {self.kind!r}")
        object.__setattr__(self, "grid", tuple(int(v) for v in self.grid))
        if self.dim < 1 or min(self.grid) < 2:
            raise ValueError("torus dimension must be >= 1 and grid sizes >= 2")

    @property
    def group(self):
        return Torus(self.dim) if self.kind == TORUS else SU2()

    def to_dict(self):
        out = {"kind": self.kind, "grid": list(self.grid)}
        if self.kind == TORUS:
            out["dim"] = self.dim
        return out

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], tuple(d["grid"]), int(d.get("dim", 1)))


def make_group(kind, dim=1):
    return Torus(dim) if kind == TORUS else SU2()


def enumerate_dual(group, lam):
    """Irreps with weight ``<= lam``, sorted by weight then label."""
    return group.dual(lam)


def evaluate_irrep(group, irrep, points):
    return group.evaluate(irrep, points)


def quadrature_grid(descriptor: GroupDescriptor) -> QuadratureGrid:
    key = (descriptor.kind, descriptor.dim, descriptor.grid)
    grid = _GRIDS.get(key)
    if grid is None:
        grid = descriptor.group.grid(descriptor.grid)
        _GRIDS[key] = grid
    return grid


_GRIDS: dict = {}


def exact_level_for(descriptor: GroupDescriptor) -> int:
    """Exact level of the descriptor's grid (builds and caches the grid)."""
    return quadrature_grid(descriptor).exact_level


def group_ops(group, x, y):
    """Product, inverse, identity and distance-from-identity for a pair of points."""
    return {"mul": group.mul(x, y), "inv": group.inv(x), "identity": group.identity(),
            "geodesic_h": group.geodesic(x)}


@dataclass(frozen=True)
class AdmissibleFamily:
    """Scalar functions ``q_1..q_m`` vanishing at the identity."""

    group: object
    band: int
    count: int

    def __call__(self, points):
        """Values ``(m, N)`` of every ``q_j`` at ``points``."""
        return self.group.admissible_values(points)

    def floor_outside(self, points, radius):
        """min over points with ``h(x) >= radius`` of ``max_j |q_j(x)|``."""
        points = np.asarray(points, float).reshape(-1, self.group.point_dim)
        far = self.group.geodesic(points) >= radius
        if self.group.kind == SU2_KIND:
            # h uses |w|, so -e sits at h = 0; it is still far from e
            far |= points[:, 0] < 0
        if not np.any(far):
            return float("inf")
        vals = np.abs(self(points[far]))
        return float(np.min(np.max(vals, axis=0)))


def admissible_family(group) -> AdmissibleFamily:
    m = group.dim if group.kind == TORUS else 4
    return AdmissibleFamily(group, group.admissible_band, m)


def laplacian_fd(group, fn, points, h=1e-3):
    """Central-difference group Laplacian ``sum_k X_k^2 fn`` along the one-parameter frame.

    ``fn`` maps an array of points to values with leading axis over points.
    """
    points = np.asarray(points, float).reshape(-1, group.point_dim)
    centre = np.asarray(fn(points))
    acc = np.zeros_like(centre, dtype=np.result_type(centre, float))
    for k in range(group.lie_dim):
        plus = np.asarray(fn(group.mul(points, group.one_parameter(k, h))))
        minus = np.asarray(fn(group.mul(points, group.one_parameter(k, -h))))
        acc = acc + (plus - 2 * centre + minus) / (h * h)
    return acc
