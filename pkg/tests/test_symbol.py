import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_coefficients
from ncsg.errors import AliasingError, DomainError, GroupMismatchError
from ncsg.fourier import FourierCoefficients, ScalarField, analyze, synthesize
from ncsg.group import GroupDescriptor, enumerate_dual, quadrature_grid
from ncsg.symbol import (OperatorMatrix, SymbolSpec, assemble_operator_matrix, build_symbol, coordinates,
                         difference_op, ellipticity_check, extract_symbol, from_coordinates, kernel_R,
                         multiplier_symbol, quantize_apply, seminorm_report, separable_symbol)


def a_of(p):
    return 2 + np.cos(p[:, 0])


@pytest.fixture(scope="module")
def t1():
    grid = quadrature_grid(GroupDescriptor("torus", (64,), 1))
    return grid, enumerate_dual(grid.group, 20.0)


@pytest.fixture(scope="module")
def su2():
    grid = quadrature_grid(GroupDescriptor("su2", (12, 6, 24)))
    return grid, enumerate_dual(grid.group, grid.group.irrep(6).weight)


def band_limited(grid, dual, seed):
    rng = np.random.default_rng(seed)
    return synthesize(FourierCoefficients(tuple(dual), tuple(random_coefficients(rng, dual)), 1.0), grid)


class TestBuild:
    def test_power_zero_is_identity(self, su2):
        grid, dual = su2
        s = build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual)
        assert s.x_independent and s.scalar
        for ir, b in zip(dual, s.blocks):
            np.testing.assert_array_equal(b[0], np.eye(ir.dim))

    def test_power_minus_one(self, t1):
        grid, dual = t1
        s = build_symbol(SymbolSpec("multiplier_power", s=-1.0), grid, dual)
        assert s.blocks[s.index(grid.group.irrep(3))][0, 0, 0] == pytest.approx(10 ** -0.5, rel=1e-15)

    def test_corner_projection(self, su2):
        grid, dual = su2
        s = build_symbol(SymbolSpec("corner_projection"), grid, dual)
        assert s.x_independent and not s.scalar
        np.testing.assert_array_equal(s.blocks[s.index(grid.group.irrep(2))][0], np.diag([1, 0, 0]))
        assert s.blocks[0][0, 0, 0] == 1

    def test_other_families(self, t1, su2):
        grid, dual = t1
        s = build_symbol(SymbolSpec("product", expr="2+cos(x1)", s=1.0), grid, dual)
        k3 = s.index(grid.group.irrep(3))
        np.testing.assert_allclose(s.blocks[k3][:, 0, 0], a_of(grid.points) * np.sqrt(10))
        assert s.x_band == 1 and not s.x_independent
        s = build_symbol(SymbolSpec("laplacian_resolvent", c=2.0), grid, dual)
        assert s.blocks[k3][0, 0, 0] == pytest.approx(1 / 11)
        s = build_symbol(SymbolSpec("separable", expr="sin(x1)", multiplier="k1/w"), grid, dual)
        np.testing.assert_allclose(s.blocks[k3][:, 0, 0], np.sin(grid.points[:, 0]) * 3 / np.sqrt(10), atol=1e-15)
        g2, d2 = su2
        s = build_symbol(SymbolSpec("multiplier", multiplier="ell*d"), g2, d2)
        assert s.blocks[s.index(g2.group.irrep(3))][0, 0, 0] == pytest.approx(1.5 * 4)

    @pytest.mark.parametrize("kwargs", [dict(family="nope"), dict(family="multiplication"),
                                        dict(family="laplacian_resolvent", c=0.0), dict(family="file"),
                                        dict(family="separable", expr="1")])
    def test_invalid_specs(self, kwargs):
        with pytest.raises(ValueError):
            SymbolSpec(**kwargs)

    def test_domain_error(self, t1):
        grid, dual = t1
        with pytest.raises(DomainError):
            build_symbol(SymbolSpec("multiplication", expr="1/sin(x1)"), grid, dual)


class TestQuantize:
    def test_identity(self, su2):
        grid, dual = su2
        f = band_limited(grid, dual, 0)
        s = build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual)
        assert np.max(np.abs(quantize_apply(s, f).values - f.values)) <= 1e-10

    def test_laplacian_on_character(self, t1):
        grid, dual = t1
        s = multiplier_symbol(grid, dual, lambda ir: -ir.casimir)
        f = np.exp(3j * grid.points[:, 0])
        np.testing.assert_allclose(quantize_apply(s, f), -9 * f, atol=1e-12)

    def test_multiplication(self, t1):
        grid, dual = t1
        s = build_symbol(SymbolSpec("multiplication", expr="2+cos(x1)"), grid, dual)
        f = np.exp(1j * grid.points[:, 0])
        np.testing.assert_allclose(quantize_apply(s, f), a_of(grid.points) * f, atol=1e-12)

    def test_general_path_matches_direct_sum(self, su2):
        grid, dual = su2
        g = grid.group
        s = build_symbol(SymbolSpec("separable", expr="1+qx*qz", multiplier="1/w"), grid, dual[:5])
        f = band_limited(grid, dual[:5], 1)
        fhat = analyze(f, dual[:5])
        direct = sum(ir.dim * np.einsum("nij,njk,ki->n", g.evaluate_on_grid(grid, ir), s.at(ir), fhat[ir])
                     for ir in dual[:5])
        from dataclasses import replace
        np.testing.assert_allclose(quantize_apply(replace(s, factors=None), f).values, direct, atol=1e-12)
        np.testing.assert_allclose(quantize_apply(s, f).values, direct, atol=1e-12)

    def test_grid_mismatch(self, t1, su2):
        s = build_symbol(SymbolSpec("multiplier_power"), *t1)
        with pytest.raises(GroupMismatchError):
            quantize_apply(s, ScalarField(su2[0], np.ones(su2[0].size)))


class TestOperatorMatrix:
    def test_identity(self, su2):
        grid, dual = su2
        s = build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual)
        m = assemble_operator_matrix(s, 3.0)
        n = sum(ir.dim ** 2 for ir in dual if ir.weight <= 3)
        assert isinstance(m, OperatorMatrix) and m.size == n
        np.testing.assert_array_equal(m.matrix, np.eye(n))
        assert len(set(m.index)) == n

    def test_multiplier_diagonal(self, t1):
        grid, dual = t1
        s = multiplier_symbol(grid, dual, lambda ir: ir.label[0] ** 3 + 0.5)
        m = assemble_operator_matrix(s, s.lam)
        np.testing.assert_array_equal(m.matrix, np.diag([ir.label[0] ** 3 + 0.5 for ir in m.irreps]))

    def test_toeplitz(self, t1):
        grid, dual = t1
        s = build_symbol(SymbolSpec("multiplication", expr="2+cos(x1)"), grid, dual, lam=20.0)
        m = assemble_operator_matrix(s, 20.0)
        x = grid.points[:, 0]
        ks = [ir.label[0] for ir in m.irreps]
        # <a e_k, e_k'> = a^(k' - k) by plain quadrature
        oracle = np.array([[np.mean(a_of(grid.points) * np.exp(-1j * (kr - kc) * x)) for kc in ks] for kr in ks])
        np.testing.assert_allclose(m.matrix, oracle, atol=1e-14)
        order = np.argsort(ks)
        t = m.matrix[np.ix_(order, order)]
        np.testing.assert_allclose(t, 2 * np.eye(len(ks)) + 0.5 * (np.eye(len(ks), k=1) + np.eye(len(ks), k=-1)),
                                   atol=1e-14)

    def test_aliasing_refused(self, t1):
        grid, _ = t1
        dual = enumerate_dual(grid.group, 32.0)
        s = build_symbol(SymbolSpec("multiplication", expr="cos(x1)"), grid, dual, lam=32.0)
        with pytest.raises(AliasingError):
            assemble_operator_matrix(s, 32.0)
        with pytest.raises(AliasingError):
            assemble_operator_matrix(s, 40.0)
        assert assemble_operator_matrix(s, 31.0).size == 61

    @pytest.mark.parametrize("which", ["t1", "su2"])
    def test_matrix_action_matches_quantization(self, which, request):
        grid, dual = request.getfixturevalue(which)
        expr = "2+cos(x1)+sin(2*x1)" if which == "t1" else "1+qw*qy"
        s = build_symbol(SymbolSpec("separable", expr=expr, multiplier="1/w"), grid, dual)
        lam = max(ir.weight for ir in dual if ir.level + s.x_band <= grid.exact_level)
        m = assemble_operator_matrix(s, lam)
        f = band_limited(grid, m.irreps, 3)
        c = coordinates(grid, m.irreps, f.values)[0]
        np.testing.assert_allclose(from_coordinates(grid, m.irreps, c)[0], f.values, atol=1e-12)
        tf = coordinates(grid, m.irreps, quantize_apply(s, f).values)[0]
        np.testing.assert_allclose(m.matrix @ c, tf, atol=1e-9)


class TestExtract:
    def test_identity(self, su2):
        grid, dual = su2
        s = extract_symbol(lambda v: v, grid, dual)
        assert s.x_independent and s.scalar
        for ir, b in zip(dual, s.blocks):
            np.testing.assert_allclose(b[0], np.eye(ir.dim), atol=1e-12)

    def test_laplacian_via_independent_fft(self, t1):
        grid, dual = t1
        k = np.fft.fftfreq(grid.size, 1 / grid.size)
        lap = lambda v: np.fft.ifft(-k ** 2 * np.fft.fft(v))
        s = extract_symbol(lap, grid, dual)
        for ir, b in zip(dual, s.blocks):
            np.testing.assert_allclose(b[0, 0, 0], -ir.casimir, atol=1e-9)

    @given(st.integers(0, 2**31 - 1))
    def test_round_trip_x_independent(self, seed):
        grid = quadrature_grid(GroupDescriptor("su2", (10, 5, 20)))
        dual = enumerate_dual(grid.group, grid.group.irrep(5).weight)
        rng = np.random.default_rng(seed)
        mats = {ir: m for ir, m in zip(dual, random_coefficients(rng, dual))}
        s = multiplier_symbol(grid, dual, lambda ir: mats[ir])
        back = extract_symbol(lambda v: quantize_apply(s, v), grid, dual, batched=True)
        assert back.x_independent
        assert max(np.max(np.abs(a - b)) for a, b in zip(back.blocks, s.blocks)) <= 1e-9

    def test_round_trip_x_dependent(self, su2):
        grid, dual = su2
        dual = [ir for ir in dual if ir.level <= 4]
        s = build_symbol(SymbolSpec("separable", expr="qw^2-qx", multiplier="sqrt(w)"), grid, dual)
        back = extract_symbol(lambda v: quantize_apply(s, v), grid, dual, batched=True)
        assert back.x_band == 2
        assert max(np.max(np.abs(a - b)) for a, b in zip(back.blocks, s.blocks)) <= 1e-7


class TestKernel:
    def test_identity_character_sum(self, su2):
        grid, dual = su2
        s = build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual)
        r = kernel_R(s, 0)
        e = np.argmin(grid.group.geodesic(grid.points) + (grid.points[:, 0] < 0))
        chars = sum(ir.dim * np.trace(grid.group.evaluate(ir, grid.points[e]), axis1=1, axis2=2)[0] for ir in dual)
        assert r.values[e] == pytest.approx(chars, abs=1e-10)
        at_e = sum(ir.dim ** 2 for ir in dual)
        assert abs(sum(ir.dim * np.trace(grid.group.evaluate(ir, grid.group.identity())[0]) for ir in dual) - at_e) < 1e-9

    def test_multiplication_scales(self, t1):
        grid, dual = t1
        s = build_symbol(SymbolSpec("multiplication", expr="2+cos(x1)"), grid, dual)
        one = build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual)
        for i in (0, 5, 17):
            np.testing.assert_allclose(kernel_R(s, i).values, a_of(grid.points)[i] * kernel_R(one, 0).values,
                                       atol=1e-12)

    @pytest.mark.parametrize("which", ["t1", "su2"])
    def test_convolution_identity(self, which, request):
        grid, dual = request.getfixturevalue(which)
        g = grid.group
        expr = "2+cos(x1)" if which == "t1" else "1+qz"
        small = [ir for ir in dual if ir.level <= (8 if which == "t1" else 3)]
        s = build_symbol(SymbolSpec("separable", expr=expr, multiplier="1/w"), grid, small)
        rng = np.random.default_rng(4)
        coef = {ir: c for ir, c in zip(small, random_coefficients(rng, small))}

        def f_at(points):
            return sum(ir.dim * np.einsum("nij,ji->n", g.evaluate(ir, points), coef[ir]) for ir in small)

        tf = quantize_apply(s, f_at(grid.points))
        for i in (0, 7, grid.size // 2):
            shifted = g.mul(np.broadcast_to(grid.points[i], grid.points.shape), g.inv(grid.points))
            conv = grid.integrate(kernel_R(s, i).values * f_at(shifted))
            assert conv == pytest.approx(tf[i], abs=1e-9)


class TestDifference:
    def test_shift_direction(self, t1):
        grid, dual = t1
        rng = np.random.default_rng(0)
        vals = {ir.label[0]: v for ir, v in zip(dual, rng.normal(size=len(dual)))}
        s = multiplier_symbol(grid, dual, lambda ir: vals[ir.label[0]])
        d = difference_op(s, 0)
        for ir, b in zip(d.irreps, d.blocks):
            k = ir.label[0]
            assert b[0, 0, 0] == pytest.approx(vals[k - 1] - vals[k], abs=1e-13)

    def test_shift_matches_direct_integral(self, t1):
        grid, _ = t1
        x = grid.points[:, 0]
        rng = np.random.default_rng(1)
        f = sum(c * np.exp(1j * k * x) for k, c in zip(range(-5, 6), rng.normal(size=11)))
        fhat = lambda k, v: np.mean(v * np.exp(-1j * k * x))
        q = np.exp(1j * x) - 1
        for k in range(-4, 5):
            assert fhat(k, q * f) == pytest.approx(fhat(k - 1, f) - fhat(k, f), abs=1e-14)

    @pytest.mark.parametrize("which", ["t1", "su2"])
    def test_identity_annihilated(self, which, request):
        grid, dual = request.getfixturevalue(which)
        s = build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual)
        for j in range(3 if which == "su2" else 1):
            d = difference_op(s, j)
            assert max(np.max(np.abs(b)) for b in d.blocks) <= 1e-12
            assert len(d.irreps) < len(dual)

    def test_decay(self):
        grid = quadrature_grid(GroupDescriptor("torus", (128,), 1))
        dual = enumerate_dual(grid.group, 40.0)
        d = difference_op(build_symbol(SymbolSpec("multiplier_power", s=-1.0), grid, dual), 0)
        ks = [8, 12, 16, 24, 32]
        vals = [abs(d.blocks[d.index(grid.group.irrep(k))][0, 0, 0]) for k in ks]
        w = [np.sqrt(1 + k * k) for k in ks]
        brute = [abs((1 + (k - 1) ** 2) ** -0.5 - (1 + k * k) ** -0.5) for k in ks]
        np.testing.assert_allclose(vals, brute, rtol=1e-10)
        assert np.polyfit(np.log(w), np.log(vals), 1)[0] <= -1.9

    @given(st.integers(0, 2**31 - 1))
    def test_leibniz(self, seed):
        grid = quadrature_grid(GroupDescriptor("torus", (48,), 1))
        dual = enumerate_dual(grid.group, 15.0)
        rng = np.random.default_rng(seed)
        sv = {ir: v for ir, v in zip(dual, rng.normal(size=len(dual)))}
        tv = {ir: v for ir, v in zip(dual, rng.normal(size=len(dual)))}
        s = multiplier_symbol(grid, dual, sv.get)
        t = multiplier_symbol(grid, dual, tv.get)
        st_ = multiplier_symbol(grid, dual, lambda ir: sv[ir] * tv[ir])
        ds, dt, dst = (difference_op(x, 0) for x in (s, t, st_))
        g = grid.group
        for ir in dst.irreps:
            k = ir.label[0]
            rhs = ds.blocks[ds.index(ir)][0, 0, 0] * tv[g.irrep(k - 1)] + sv[ir] * dt.blocks[dt.index(ir)][0, 0, 0]
            assert dst.blocks[dst.index(ir)][0, 0, 0] == pytest.approx(rhs, abs=1e-12)

    def test_margin_enforced(self, t1):
        grid, _ = t1
        s = build_symbol(SymbolSpec("multiplier_power"), grid, enumerate_dual(grid.group, 1.0))
        with pytest.raises(AliasingError):
            difference_op(s, 0)


class TestSeminorms:
    def test_identity(self, su2):
        grid, dual = su2
        rep = seminorm_report(build_symbol(SymbolSpec("multiplier_power", s=0.0), grid, dual), 1, 1)
        assert rep["C"]["0,0"] == pytest.approx(1)
        assert all(v <= 1e-12 for k, v in rep["C"].items() if k != "0,0")

    def test_inverse_weight(self, t1):
        grid, dual = t1
        rep = seminorm_report(build_symbol(SymbolSpec("multiplier_power", s=-1.0), grid, dual), 2, 0)
        assert rep["C"]["0,0"] == pytest.approx(1)
        w = lambda k: np.sqrt(1 + k * k)
        d1 = max(w(k) * abs(1 / w(k - 1) - 1 / w(k)) for k in range(-10, 11))
        d2 = max(w(k) ** 2 * abs(1 / w(k - 2) - 2 / w(k - 1) + 1 / w(k)) for k in range(-10, 11))
        assert rep["C"]["1,0"] == pytest.approx(d1, rel=1e-12)
        assert rep["C"]["2,0"] == pytest.approx(d2, rel=1e-12)

    def test_x_derivative(self, t1):
        grid, dual = t1
        rep = seminorm_report(build_symbol(SymbolSpec("multiplication", expr="2+cos(x1)"), grid, dual), 1, 2, rho=0.5)
        assert rep["C"]["0,1"] == pytest.approx(1, abs=1e-6)
        assert rep["C"]["0,2"] == pytest.approx(1, abs=1e-5)
        assert rep["regularity_triple"]["sup_norm"] == pytest.approx(3)
        assert rep["regularity_triple"]["sup_dx"] == pytest.approx(1, abs=1e-6)

    def test_su2_x_derivative_matches_interpolation(self, su2):
        grid, dual = su2
        dual = [ir for ir in dual if ir.level <= 4]
        s = build_symbol(SymbolSpec("multiplication", expr="qw"), grid, dual)
        rep = seminorm_report(s, 0, 1)
        # d/dt w(x exp(t X)) is -(x . e_k)/2 rotated; its max over SU(2) is 1/2
        assert rep["C"]["0,1"] == pytest.approx(0.5, abs=2e-2)
        ext = extract_symbol(lambda v: quantize_apply(s, v), grid, dual, batched=True)
        assert seminorm_report(ext, 0, 1)["C"]["0,1"] == pytest.approx(rep["C"]["0,1"], rel=1e-8)

    def test_orders_limited(self, t1):
        with pytest.raises(ValueError):
            seminorm_report(build_symbol(SymbolSpec("multiplier_power"), *t1), 3, 0)


class TestEllipticity:
    def test_identity(self, su2):
        rep = ellipticity_check(build_symbol(SymbolSpec("multiplier_power", s=0.0), *su2))
        assert rep["elliptic"] and rep["bound"] == pytest.approx(1)

    def test_inverse_weight_bound(self, t1):
        grid, dual = t1
        rep = ellipticity_check(build_symbol(SymbolSpec("multiplier_power", s=-1.0), grid, dual), R=1.0)
        assert rep["bound"] == pytest.approx(max(ir.weight for ir in dual))
        assert not ellipticity_check(build_symbol(SymbolSpec("multiplier_power", s=-1.0), grid, dual), C_threshold=10)["elliptic"]

    def test_corner_projection_singular(self, su2):
        rep = ellipticity_check(build_symbol(SymbolSpec("corner_projection"), *su2))
        assert rep["singular"] and not rep["elliptic"]
        assert {w["label"][0] for w in rep["witnesses"]} == {ir.label[0] for ir in su2[1] if ir.dim >= 2}

    def test_separable_scalar_evaluator(self, t1):
        grid, dual = t1
        s = separable_symbol(grid, dual, a_of, lambda ir: 2.0)
        np.testing.assert_allclose(s.evaluate(np.array([[0.0], [np.pi]]))[0][:, 0, 0], [6.0, 2.0])
