import math

import numpy as np
import pytest
import sympy

from lcft.blocks import (
    ZHAT,
    BlockSeries,
    _annulus_matrix,
    _disk_vector,
    block_coeff_tensor,
    chain_block,
    graph_block,
    three_point_descendant,
    torus_one_point_block,
)
from lcft.errors import DimensionMismatch, DomainError
from lcft.graphs import AdmissibleGraph, EdgeSpec, MarkedPoint
from lcft.params import CftParams
from lcft.virasoro import conformal_weight, partition_count, shapovalov, shapovalov_inverse

from oracles import torus_level1_coeff, vertex_element
from fractions import Fraction


def sympy_h_and_points():
    z1, z2, z3, d1, d2, d3 = sympy.symbols("z1 z2 z3 d1 d2 d3")
    H = (
        (z1 - z2) ** (d3 - d1 - d2)
        * (z2 - z3) ** (d1 - d2 - d3)
        * (z1 - z3) ** (d2 - d1 - d3)
    )
    return H, (z1, z2, z3), (d1, d2, d3)


class TestRulesEngine:
    def test_all_empty_is_one(self):
        assert three_point_descendant(0.3, 0.7, 1.1) == pytest.approx(1.0)

    def test_level_one_slot1_vs_sympy(self):
        # one application of rule (3): -(d/dz2 + d/dz3) H / H at zhat
        H, zs, ds = sympy_h_and_points()
        expr = -(sympy.diff(H, zs[1]) + sympy.diff(H, zs[2])) / H
        subs = dict(zip(zs, [sympy.nsimplify(z, rational=False) for z in ZHAT]))
        vals = {ds[0]: 0.31, ds[1]: 0.77, ds[2]: 1.13}
        expect = complex(expr.subs({**subs, **vals}).evalf(20))
        got = three_point_descendant(0.31, 0.77, 1.13, (1,), (), ())
        assert got == pytest.approx(expect, rel=1e-12)

    @pytest.mark.parametrize("nu", [(2,), (1, 1), (2, 1), (3,)])
    def test_slot1_words_vs_sympy(self, nu):
        # iterated rule (3): D_m words acting on H, computed symbolically
        H, zs, ds = sympy_h_and_points()
        vals = {ds[0]: 0.45, ds[1]: 0.81, ds[2]: 1.27}
        expr = H
        for m in sorted(nu):  # innermost largest part applied first
            pass
        # Apply outermost-last: D_{word[0]} is applied last; build up from inside
        word = tuple(reversed(tuple(sorted(nu, reverse=True))))  # ascending
        cur = H
        for m in reversed(word):  # innermost first
            d2m = -(zs[1] - zs[0]) ** (1 - m) * sympy.diff(cur, zs[1]) + (m - 1) * (
                zs[1] - zs[0]
            ) ** (-m) * ds[1] * cur
            d3m = -(zs[2] - zs[0]) ** (1 - m) * sympy.diff(cur, zs[2]) + (m - 1) * (
                zs[2] - zs[0]
            ) ** (-m) * ds[2] * cur
            cur = d2m + d3m
        subs = dict(zip(zs, ZHAT))
        expect = complex((cur / H).subs({**subs, **vals}).simplify().evalf(20))
        got = three_point_descendant(0.45, 0.81, 1.27, nu, (), ())
        assert got == pytest.approx(expect, rel=1e-10)

    def test_path_independence_rule4_vs_rule5(self):
        rng = np.random.default_rng(9)
        zh = ZHAT
        for _ in range(10):
            d = rng.uniform(0.2, 2.2, size=3)
            a = three_point_descendant(d[0], d[1], d[2], (), (), (2,), c=27.3)
            b = three_point_descendant(
                d[0], d[2], d[1], (), (2,), (), c=27.3, zhat=(zh[0], zh[2], zh[1])
            )
            assert a == pytest.approx(b, rel=1e-10)

    def test_path_independence_multi_slot(self):
        rng = np.random.default_rng(12)
        zh = ZHAT
        for _ in range(5):
            d = rng.uniform(0.2, 2.0, size=3)
            a = three_point_descendant(d[0], d[1], d[2], (1,), (), (2, 1), c=25.0)
            b = three_point_descendant(
                d[0], d[2], d[1], (1,), (2, 1), (), c=25.0, zhat=(zh[0], zh[2], zh[1])
            )
            assert a == pytest.approx(b, rel=1e-9)

    def test_memoized_recursion_deterministic(self):
        a = three_point_descendant(0.4, 0.8, 1.2, (2, 1), (), (1,), c=26.5)
        b = three_point_descendant(0.4, 0.8, 1.2, (2, 1), (), (1,), c=26.5)
        assert a == b  # bit-identical


class TestRadialFrame:
    def test_level_one_matrix_element(self):
        # frozen closed forms: M((1),(1)) = dm(dm-1) + 2h at equal weights
        for h, dm in [(1.0, 1.0), (0.7, 1.9), (2.3, 0.4)]:
            got = three_point_descendant(h, dm, h, (1,), (), (1,), frame="radial")
            assert got == pytest.approx(dm * (dm - 1) + 2 * h, rel=1e-13)

    @pytest.mark.parametrize(
        "a,b", [((1,), (1,)), ((2,), (2,)), ((1, 1), (2,)), ((2, 1), (1,)), ((2, 2), (1, 1, 1))]
    )
    def test_vs_exact_rational_oracle(self, a, b):
        ho, dm, hi, c = Fraction(5, 4), Fraction(3, 8), Fraction(7, 2), Fraction(26)
        expect = float(vertex_element(a, b, ho, dm, hi, c))
        got = three_point_descendant(
            float(ho), float(dm), float(hi), a, (), b, c=float(c), frame="radial"
        )
        assert got.real == pytest.approx(expect, rel=1e-12)
        assert got.imag == 0.0

    def test_symmetry_under_swap(self):
        got1 = three_point_descendant(1.2, 0.7, 2.1, (2, 1), (), (1, 1), frame="radial")
        got2 = three_point_descendant(2.1, 0.7, 1.2, (1, 1), (), (2, 1), frame="radial")
        assert got1 == pytest.approx(got2, rel=1e-13)


class TestCoeffTensors:
    def test_all_empty_entries_are_one(self):
        params = CftParams(gamma=1.2)
        h = complex(conformal_weight(params.Q + 0.5j, params))
        t_a = block_coeff_tensor("annulus", (h, 0.9, h), (1, 1), params.c_L)
        t_d = block_coeff_tensor("disk", (h, 0.9, 1.1), (1,), params.c_L)
        t_p = block_coeff_tensor("pant", (h, h, h), (1, 1, 1), params.c_L)
        assert t_a.blocks[(0, 0)][0, 0] == pytest.approx(1.0)
        assert t_d.blocks[(0,)][0] == pytest.approx(1.0)
        assert t_p.blocks[(0, 0, 0)][0, 0, 0] == pytest.approx(1.0)

    def test_torus_level1_contraction_oracle(self):
        rng = np.random.default_rng(4)
        params = CftParams(gamma=1.2)
        for _ in range(10):
            alpha1 = float(rng.uniform(0.1, 2.0))
            p = float(rng.uniform(0.2, 3.0))
            dh = complex(conformal_weight(params.Q + 1j * p, params))
            da = complex(conformal_weight(alpha1, params))
            finv = shapovalov_inverse(shapovalov(dh, params.c_L, 1)).entries
            w = _annulus_matrix(1, 1, dh, da, dh, params.c_L)
            got = complex(np.trace(finv @ w))
            assert got == pytest.approx(complex(torus_level1_coeff(da, dh)), rel=1e-10)

    def test_disk_level1_equals_single_slot_radial(self):
        params = CftParams(gamma=1.4)
        h = complex(conformal_weight(params.Q + 0.9j, params))
        d2, d1 = 0.8, 1.3
        vec = _disk_vector(1, h, d2, d1, params.c_L)
        single = three_point_descendant(h, d2, d1, (1,), (), (), frame="radial", c=params.c_L)
        assert vec[0] == pytest.approx(single, rel=1e-14)

    def test_tensor_weight_independence_of_mu(self):
        # coefficients involve only weights and c_L
        p1 = CftParams(gamma=1.2, mu=1.0)
        p2 = CftParams(gamma=1.2, mu=9.0)
        h = complex(conformal_weight(p1.Q + 0.5j, p1))
        w1 = _annulus_matrix(2, 2, h, 0.9, h, p1.c_L)
        w2 = _annulus_matrix(2, 2, h, 0.9, h, p2.c_L)
        assert np.array_equal(w1, w2)


class TestTorusBlock:
    def test_level_zero_prefactor(self):
        params = CftParams(gamma=math.sqrt(2.0))
        series = torus_one_point_block(1.2, 1.0, 0.1 + 0.05j, params, N=0)
        assert series.coeffs[(0,)] == pytest.approx(1.0)
        # exponent -c_L/24 + Delta_{Q+ip}: c_L = 28, Delta = 1.375 at p = 1
        assert series.exponents[0] == pytest.approx(-28.0 / 24.0 + 1.375, rel=1e-12)

    def test_partial_sums_decreasing(self):
        params = CftParams(gamma=1.1)
        series = torus_one_point_block(1.2, 0.7, 0.3, params, N=8)
        incs = [abs(series.coeffs[(n,)] * 0.3**n) for n in range(9)]
        assert all(incs[n + 1] < incs[n] for n in range(1, 8))

    def test_domain_guard(self):
        params = CftParams(gamma=1.1)
        with pytest.raises(DomainError):
            torus_one_point_block(1.2, 0.7, 1.5, params, N=2)

    def test_identity_insertion_gives_characters(self):
        params = CftParams(gamma=1.1)
        series = torus_one_point_block(1e-12, 0.83, 0.2, params, N=6)
        for n in range(7):
            assert series.coeffs[(n,)].real == pytest.approx(partition_count(n), rel=1e-6)


class TestChainBlock:
    def test_torus_k1_equals_one_point(self):
        params = CftParams(gamma=1.3)
        q = 0.12 + 0.07j
        s1 = chain_block("torus_k", [1.1], [0.9], [q], params, N=4)
        s2 = torus_one_point_block(1.1, 0.9, q, params, N=4)
        for n in range(5):
            assert s1.coeffs[(n,)] == pytest.approx(s2.coeffs[(n,)], rel=1e-12)
        assert s1.exponents == pytest.approx(s2.exponents)

    def test_torus_k2_structure(self):
        params = CftParams(gamma=1.3)
        qs = [0.1 + 0.02j, 0.15 - 0.03j]
        s = chain_block("torus_k", [1.0, 1.2], [0.5, 0.8], qs, params, N=3)
        assert s.coeffs[(0, 0)] == pytest.approx(1.0)
        val = s.value(qs)
        assert np.isfinite(val.real) and np.isfinite(val.imag)

    def test_sphere_prefactor_factors(self):
        params = CftParams(gamma=1.2)
        alphas = [1.5, 1.4, 1.3, 1.2]
        zs = [0, 0.5, 2.0, None]
        s = chain_block("sphere_k", alphas, [0.7], [0.25], params, N=2, positions=zs)
        dm = [complex(conformal_weight(a, params)).real for a in alphas]
        h2 = complex(conformal_weight(params.Q + 0.7j, params)).real
        # |z2|^{-Da2} |z3|^{+Da3} |z2|^{-Da1} |z3|^{+Da4}; |q|^{Delta_{Q+ip}} via exponents
        expect_const = 0.5 ** (-dm[1]) * 2.0 ** dm[2] * 0.5 ** (-dm[0]) * 2.0 ** dm[3]
        assert s.constant == pytest.approx(expect_const, rel=1e-12)
        assert s.exponents[0] == pytest.approx(h2)
        assert s.coeffs[(0,)] == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        params = CftParams(gamma=1.3)
        with pytest.raises(DimensionMismatch):
            chain_block("torus_k", [1.0, 1.2], [0.5], [0.1, 0.1], params, N=2)


class TestGraphBlock:
    def test_self_loop_equals_torus_block(self):
        params = CftParams(gamma=1.1)
        alpha1, p, q = 1.2, 0.83, 0.08 + 0.03j
        g = AdmissibleGraph(
            edges=[EdgeSpec((1, 1), (1, 2), q=q)], marked=[MarkedPoint(1, 3, alpha1)]
        )
        gb = graph_block(g, [alpha1], [p], [q], params, N=4)
        tb = torus_one_point_block(alpha1, p, q, params, N=4)
        for n in range(5):
            assert gb.coeffs[(n,)] == pytest.approx(tb.coeffs[(n,)], rel=1e-12)

    def test_normalization_multidegree_zero(self):
        params = CftParams(gamma=math.sqrt(2.0))
        g = AdmissibleGraph(
            edges=[
                EdgeSpec((1, 1), (2, 1), q=0.1),
                EdgeSpec((1, 2), (1, 3), q=0.1),
                EdgeSpec((2, 2), (2, 3), q=0.1),
            ]
        )
        gb = graph_block(g, [], [0.4, 0.7, 1.1], [0.1, 0.1, 0.1], params, N=2)
        assert gb.coeffs[(0, 0, 0)] == pytest.approx(1.0)

    def test_cauchy_riemann_in_q1(self):
        # the series part is holomorphic in each modulus
        params = CftParams(gamma=math.sqrt(2.0))
        g = AdmissibleGraph(
            edges=[
                EdgeSpec((1, 1), (2, 1), q=0.1),
                EdgeSpec((1, 2), (1, 3), q=0.1),
                EdgeSpec((2, 2), (2, 3), q=0.1),
            ]
        )
        gb = graph_block(g, [], [0.4, 0.7, 1.1], [0.1, 0.1, 0.1], params, N=3)
        q0 = [0.1 + 0.02j, 0.09, 0.11]
        h = 1e-5

        def s(q1):
            return gb.series_value([q1, q0[1], q0[2]])

        d_re = (s(q0[0] + h) - s(q0[0] - h)) / (2 * h)
        d_im = (s(q0[0] + 1j * h) - s(q0[0] - 1j * h)) / (2 * h)
        # holomorphy: d/d(Im q) = i d/d(Re q)
        assert abs(d_im - 1j * d_re) < 1e-6 * max(abs(d_re), 1.0)

    def test_level_agreement_with_chain_on_torus_graph(self):
        params = CftParams(gamma=1.25)
        alpha1, p, q = 0.9, 1.1, 0.05 + 0.01j
        g = AdmissibleGraph(
            edges=[EdgeSpec((1, 1), (1, 2), q=q)], marked=[MarkedPoint(1, 3, alpha1)]
        )
        gb = graph_block(g, [alpha1], [p], [q], params, N=5)
        cb = chain_block("torus_k", [alpha1], [p], [q], params, N=5)
        for n in range(6):
            assert gb.coeffs[(n,)] == pytest.approx(cb.coeffs[(n,)], rel=1e-12)


class TestBlockSeries:
    def test_value_and_abs2(self):
        s = BlockSeries(exponents=(0.5,), coeffs={(0,): 1.0, (1,): 2.0 + 1.0j}, N=1)
        q = 0.2 + 0.1j
        expect = abs(q) ** 0.5 * (1.0 + (2 + 1j) * q)
        assert s.value([q]) == pytest.approx(expect)
        assert s.abs2([q]) == pytest.approx(abs(expect) ** 2)

    def test_dimension_check(self):
        s = BlockSeries(exponents=(0.5,), coeffs={(0,): 1.0}, N=0)
        with pytest.raises(DimensionMismatch):
            s.value([0.1, 0.2])
