import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncsg.group import GroupDescriptor, enumerate_dual, quadrature_grid
from ncsg.spectral import (CAVEAT, WitnessSpec, bump_power, compactness_diagnostic, dmin_dmax,
                           essential_normality_check, gohberg_check, lemma_decay_check, resolvent_bound,
                           shell_profile, witness)
from ncsg.symbol import SymbolSpec, build_symbol, multiplier_symbol


@pytest.fixture(scope="module")
def t1():
    grid = quadrature_grid(GroupDescriptor("torus", (128,), 1))
    return grid, enumerate_dual(grid.group, 40.0)


@pytest.fixture(scope="module")
def su2():
    grid = quadrature_grid(GroupDescriptor("su2", (12, 6, 24)))
    return grid, enumerate_dual(grid.group, grid.group.irrep(6).weight)


def sym(family, grid, dual, **kw):
    return build_symbol(SymbolSpec(family, **kw), grid, dual)


class TestProfile:
    def test_scalar_two(self, su2):
        p = shell_profile(sym("multiplier_power", *su2, s=0.0).scaled(2.0))
        np.testing.assert_allclose(p.s_min, 2.0, rtol=1e-14)
        np.testing.assert_allclose(p.s_max, 2.0, rtol=1e-14)

    def test_corner(self, su2):
        p = shell_profile(sym("corner_projection", *su2))
        big = np.array([ir.dim >= 2 for ir in p.irreps])
        assert np.all(p.s_min[big] == 0) and np.all(p.s_max == 1)

    def test_multiplication_argmax(self, t1):
        grid, dual = t1
        p = shell_profile(sym("multiplication", grid, dual, expr="2+cos(x1)"))
        np.testing.assert_allclose(p.s_min, 3.0, rtol=1e-14)
        np.testing.assert_allclose(p.s_max, 3.0, rtol=1e-14)
        assert np.all(grid.points[p.x_argmax, 0] == 0)


class TestDmin:
    def test_identity_every_shell(self, su2):
        rep = dmin_dmax(sym("multiplier_power", *su2, s=0.0), [1.0, 2.0, 3.0, 4.0])
        assert all(r["d_min"] == 1 and r["d_max"] == 1 for r in rep.rows if not r["empty"])

    def test_inverse_weight_outer_shell(self, t1):
        grid, dual = t1
        s = sym("multiplier_power", grid, dual, s=-1.0)
        rep = dmin_dmax(s, [5.0, 10.0, 20.0, 40.0])
        outer = [ir.weight for ir in dual if 20.0 <= ir.weight <= 40.0]
        assert rep.d_max == pytest.approx(1 / min(outer), rel=1e-14)
        assert rep.d_min == pytest.approx(1 / min(outer), rel=1e-14)

    def test_torus_equality(self, t1):
        grid, dual = t1
        rep = dmin_dmax(sym("multiplication", grid, dual, expr="2+cos(x1)"))
        oracle = np.max(np.abs(2 + np.cos(grid.points[:, 0])))
        assert rep.d_min == rep.d_max == pytest.approx(oracle, abs=1e-14)

    def test_empty_shell_flagged(self, t1):
        grid, dual = t1
        rep = dmin_dmax(sym("multiplier_power", grid, dual), [1.0, 1.1, 1.2, 40.0])
        assert rep.rows[1]["empty"] and rep.rows[1]["d_max"] is None
        assert rep.to_dict()["caveat"] == CAVEAT

    def test_bad_shells(self, t1):
        with pytest.raises(ValueError):
            dmin_dmax(sym("multiplier_power", *t1), [2.0, 1.0, 3.0])


class TestWitness:
    def test_bump_power(self):
        assert bump_power("torus", np.pi / 4) == 5
        assert bump_power("su2", np.pi / 3) == 10

    @pytest.mark.parametrize("which", ["t1", "su2"])
    def test_trivial_at_identity(self, which, request):
        grid, _ = request.getfixturevalue(which)
        g = grid.group
        wf = witness(grid, WitnessSpec(), g.irrep((0,) if which == "t1" else 0), g.identity())
        np.testing.assert_allclose(wf.field.values[:, 0, 0], wf.u.values, atol=1e-15)

    def test_torus_modulation(self, t1):
        grid, _ = t1
        x0 = np.array([1.0])
        wf = witness(grid, WitnessSpec(), grid.group.irrep((5,)), x0)
        x = grid.points[:, 0]
        oracle = np.exp(5j * x) * ((1 + np.cos(x - 1.0)) / 2) ** 5
        np.testing.assert_allclose(wf.field.values[:, 0, 0], oracle, atol=1e-14)

    @given(st.integers(0, 6), st.integers(0, 2**31 - 1))
    def test_norm_identity_su2(self, level, seed):
        grid = quadrature_grid(GroupDescriptor("su2", (24, 12, 46)))
        rng = np.random.default_rng(seed)
        q = rng.normal(size=4)
        wf = witness(grid, WitnessSpec(), grid.group.irrep(level), q / np.linalg.norm(q))
        assert wf.identity_gap <= 1e-8 * wf.u_norm

    def test_custom_expression(self, t1):
        grid, _ = t1
        wf = witness(grid, WitnessSpec(expr="(1+cos(x1))/2"), grid.group.irrep((2,)), np.array([0.0]))
        assert wf.band == 1 and wf.identity_gap <= 1e-12


class TestLemmaDecay:
    def test_multiplication_zero(self, t1):
        grid, dual = t1
        s = sym("multiplication", grid, dual, expr="2+cos(x1)")
        rep = lemma_decay_check(s, [grid.group.irrep((k,)) for k in (4, 8, 12)])
        assert max(r["difference"] for r in rep["rows"]) <= 1e-12

    def test_identity_zero_su2(self):
        grid = quadrature_grid(GroupDescriptor("su2", (24, 12, 46)))
        dual = enumerate_dual(grid.group, grid.group.irrep(22).weight)
        s = sym("multiplier_power", grid, dual, s=0.0)
        rep = lemma_decay_check(s, [grid.group.irrep(L) for L in (2, 6)])
        assert max(r["difference"] for r in rep["rows"]) <= 1e-10

    def test_margin_refused(self, t1):
        grid, dual = t1
        from ncsg.errors import AliasingError
        with pytest.raises(AliasingError):
            lemma_decay_check(sym("multiplier_power", grid, dual), [grid.group.irrep((38,))])


class TestGohberg:
    def test_identity(self, t1):
        grid, dual = t1
        rep = gohberg_check(sym("multiplier_power", grid, dual, s=0.0), [10.0, 20.0])
        assert rep["floor_ok"] and all(f["s_k1"] == pytest.approx(1) for f in rep["floors"])
        assert rep["caveat"] == CAVEAT

    def test_corner_vacuous(self, su2):
        rep = gohberg_check(sym("corner_projection", *su2), [2.0, 3.0])
        assert rep["d_min"] == 0 and rep["floor_ok"] and "no obstruction" in rep["note"]

    def test_floor_small(self):
        grid = quadrature_grid(GroupDescriptor("torus", (256,), 1))
        dual = enumerate_dual(grid.group, 64.0)
        s = sym("multiplication", grid, dual, expr="2+cos(x1)")
        rep = gohberg_check(s, [16.0, 32.0, 63.0], tol=0.02)
        # singular values of the tridiagonal Toeplitz section, computed independently
        n = rep["floors"][-1]["size"]
        t = 2 * np.eye(n) + 0.5 * (np.eye(n, k=1) + np.eye(n, k=-1))
        assert rep["floors"][-1]["s_k1"] == pytest.approx(np.sort(np.linalg.eigvalsh(t))[::-1][5], abs=1e-12)
        assert rep["floor_ok"]

    def test_witness_never_exceeds_norm(self):
        grid = quadrature_grid(GroupDescriptor("torus", (256,), 1))
        dual = enumerate_dual(grid.group, 64.0)
        s = sym("multiplication", grid, dual, expr="2+cos(x1)")
        rep = gohberg_check(s, [63.0], xi_sequence=[grid.group.irrep((k,)) for k in (8, 16, 32)])
        assert all(c["value"] <= rep["upper_bound"] * (1 + 1e-12) for c in rep["witness"])
        assert all(c["norm_identity_gap"] <= 1e-8 for c in rep["witness"])


class TestCompactness:
    def test_inverse_weight_tails(self, t1):
        grid, dual = t1
        s = sym("multiplier_power", grid, dual, s=-1.0)
        R_list = [4.0, 8.0, 16.0, 32.0]
        rep = compactness_diagnostic(s, R_list)
        for R, tail in zip(R_list, rep["tail_norms"]):
            rp = min(ir.weight for ir in dual if ir.weight >= R)
            assert tail == pytest.approx(1 / rp, rel=1e-10)
        assert rep["verdict"] == "compact-consistent"

    def test_identity_not_compact(self, su2):
        rep = compactness_diagnostic(sym("multiplier_power", *su2, s=0.0), [1.5, 2.5, 3.5])
        assert rep["tail_norms"] == [1.0, 1.0, 1.0] and rep["verdict"] == "not compact"

    def test_zero(self, t1):
        grid, dual = t1
        s = multiplier_symbol(grid, dual, lambda ir: 0.0)
        rep = compactness_diagnostic(s, [4.0, 8.0])
        assert rep["tail_norms"] == [0.0, 0.0] and rep["verdict"] == "compact-consistent"

    def test_x_dependent_path_agrees(self):
        grid = quadrature_grid(GroupDescriptor("torus", (64,), 1))
        dual = enumerate_dual(grid.group, 20.0)
        s = multiplier_symbol(grid, dual, lambda ir: 1 / ir.weight)
        fast = compactness_diagnostic(s, [2.0, 4.0, 8.0])
        from dataclasses import replace
        slow = compactness_diagnostic(replace(s, x_independent=False,
                                              blocks=tuple(np.repeat(b, grid.size, 0) for b in s.blocks)),
                                      [2.0, 4.0, 8.0])
        np.testing.assert_allclose(fast["tail_norms"], slow["tail_norms"], rtol=1e-12)


class TestResolvent:
    def test_zero(self, t1):
        s = multiplier_symbol(*t1, lambda ir: 0.0)
        assert resolvent_bound(s, 1.0)["sup_inverse_norm"] == pytest.approx(1)

    def test_identity(self, su2):
        assert resolvent_bound(sym("multiplier_power", *su2, s=0.0), 3.0)["sup_inverse_norm"] == pytest.approx(0.5)

    def test_multiplication(self, t1):
        grid, dual = t1
        rep = resolvent_bound(sym("multiplication", grid, dual, expr="2+cos(x1)"), 4.0, R=1.0)
        oracle = 1 / np.min(np.abs(2 + np.cos(grid.points[:, 0]) - 4))
        assert rep["sup_inverse_norm"] == pytest.approx(oracle, rel=1e-14) and rep["outside_disc"]

    def test_singular(self, t1):
        assert not resolvent_bound(sym("multiplier_power", *t1, s=0.0), 1.0)["ok"]


class TestNormality:
    def test_x_independent(self, su2):
        grid, dual = su2
        rep = essential_normality_check(sym("corner_projection", grid, dual), grid.group.irrep(4).weight)
        assert rep["commutator_norm"] <= 1e-12

    def test_multiplication(self, t1):
        grid, dual = t1
        s = sym("multiplication", grid, dual, expr="2+cos(x1)")
        assert essential_normality_check(s, 39.0)["commutator_norm"] <= 1e-12

    def test_order_zero_product(self):
        grid = quadrature_grid(GroupDescriptor("torus", (512,), 1))
        dual = enumerate_dual(grid.group, 128.0)
        s = sym("separable", grid, dual, expr="2+cos(x1)", multiplier="k1/w")
        rep = essential_normality_check(s, s.lam, [8.0, 12.0, 16.0, 24.0, 32.0])
        assert rep["commutator_norm"] > 1e-3
        assert rep["slope"] <= -0.7
