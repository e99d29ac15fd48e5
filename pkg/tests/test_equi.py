import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from browngraph import equi
from browngraph.errors import InvalidArgument, PrecisionBudgetError
from browngraph.fixedpoint import ExactPoint, apply_mod1, frac_dot
from browngraph.paths import generate_path

small = st.integers(-4, 4)


@st.composite
def matrices(draw, d=None):
    d = d or draw(st.integers(1, 3))
    A = draw(st.lists(st.lists(small, min_size=d, max_size=d), min_size=d, max_size=d))
    assume(round(np.linalg.det(np.array(A, dtype=float))) != 0)
    return A


@st.composite
def points(draw, d, bits):
    return ExactPoint(tuple(draw(st.integers(0, 2**bits - 1)) for _ in range(d)), bits)


# --- endomorphisms ---------------------------------------------------------------

def test_scalar_doubling():
    T = equi.make_endomorphism([[2, 0], [0, 2]])
    assert T.sigma_min == pytest.approx(2) and T.expanding


def test_shear_not_expanding():
    T = equi.make_endomorphism([[1, 1], [0, 1]])
    assert T.sigma_min == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-12)
    assert not T.expanding


def test_upper_triangular_expanding():
    T = equi.make_endomorphism("2,1;0,3")
    assert T.sigma_min == pytest.approx(math.sqrt(7 - math.sqrt(13)), rel=1e-12)
    assert T.sigma_max == pytest.approx(math.sqrt(7 + math.sqrt(13)), rel=1e-12)
    assert T.expanding


def test_singular_rejected():
    with pytest.raises(InvalidArgument):
        equi.make_endomorphism([[1, 2], [2, 4]])
    with pytest.raises(InvalidArgument):
        equi.make_endomorphism([[1, 2, 3], [4, 5, 6]])


def test_matrix_text():
    assert equi.parse_matrix("2,1;0,3") == ((2, 1), (0, 3))
    assert equi.make_endomorphism("2,1;0,3").text() == "2,1;0,3"
    with pytest.raises(InvalidArgument):
        equi.parse_matrix("2,x;0,3")


@given(matrices())
@settings(max_examples=60)
def test_singular_values_match_characteristic_roots(A):
    T = equi.make_endomorphism(A)
    G = np.array(A, dtype=float).T @ np.array(A, dtype=float)
    roots = np.sort(np.real(np.roots(np.poly(G))))
    assert T.sigma_min == pytest.approx(math.sqrt(max(roots[0], 0)), rel=1e-6)
    assert T.expanding == (T.sigma_min > 1)
    # sigma_min is the infimum of |Ax| over unit vectors
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2000, len(A)))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    assert np.min(np.linalg.norm(x @ np.array(A).T, axis=1)) >= T.sigma_min * (1 - 1e-9)


# --- fixed point and orbits ------------------------------------------------------

def test_exact_point_invariants():
    with pytest.raises(InvalidArgument):
        ExactPoint((1,), 32)
    with pytest.raises(InvalidArgument):
        ExactPoint((2**64,), 64)


def test_third_truncation():
    x = ExactPoint.from_fractions([Fraction(1, 3)], 64)
    err = Fraction(1, 3) - x.to_fractions()[0]
    assert 0 < err < Fraction(1, 2**64)


def test_rational_doubling_orbit_of_a_third():
    orb = equi.rational_orbit([[2]], [Fraction(1, 3)], 6)
    assert [x[0] for x in orb] == [Fraction(2, 3), Fraction(1, 3)] * 3


def test_zero_is_fixed():
    T = equi.make_endomorphism("2,1;0,3")
    orb = equi.orbit(T, ExactPoint((0, 0), 200), 50)
    assert all(x.coords == (0, 0) for x in orb)


def test_budget_enforced():
    T = equi.make_endomorphism("2,0;0,2")
    x0 = ExactPoint((1, 1), 100)
    with pytest.raises(PrecisionBudgetError) as exc:
        equi.orbit(T, x0, 40)
    assert exc.value.required_bits == 104
    assert "104" in str(exc.value)
    assert len(equi.orbit(T, x0, 36)) == 36


def test_float_embedding_is_exact_and_dither_keeps_data_bits():
    x = ExactPoint.from_floats([0.375, 0.1], 128)
    assert x.to_fractions() == (Fraction(3, 8), Fraction(0.1))
    y = ExactPoint.from_floats([0.375, 0.1], 128, fill_seed=4)
    for a, b in zip(x.coords, y.coords):
        # 0.375 carries 54 fractional bits of data, 0.1 carries 56
        assert a >> (128 - 54) == b >> (128 - 54)
    assert y != x
    # fill bits sit strictly below the double's resolution
    assert abs(y.to_fractions()[1] - Fraction(0.1)) < Fraction(1, 2**56)


def test_dyadic_start_collapses_without_dither():
    T = equi.make_endomorphism("2,0;0,2")
    x0 = ExactPoint.from_floats([0.375, 0.25], 200)
    assert equi.orbit(T, x0, 10)[-1].coords == (0, 0)
    y0 = ExactPoint.from_floats([0.375, 0.25], 200, fill_seed=1)
    assert equi.orbit(T, y0, 100)[-1].coords != (0, 0)


@given(matrices(), st.integers(1, 40), st.data())
@settings(max_examples=40, deadline=None)
def test_step_by_step_orbit_equals_matrix_power(A, N, data):
    T = equi.make_endomorphism(A)
    bits = equi.required_bits(T, N)
    x0 = data.draw(points(T.d, bits))
    orb = equi.orbit(T, x0, N)
    assert orb[-1] == equi.jump(T, x0, N)
    assert orb[0] == apply_mod1(T.A, x0)


# --- Weyl sums ---------------------------------------------------------------------

def test_weyl_sum_of_zero_points():
    for k in [(1, 0), (3, -2)]:
        rep = equi.weyl_sum(np.zeros((7, 2)), k)
        assert rep.S_N == 1 and rep.magnitude == 1


def test_weyl_sum_rejects_trivial_k():
    with pytest.raises(InvalidArgument):
        equi.weyl_sum(np.zeros((3, 2)), (0, 0))


@pytest.mark.parametrize("N", [2, 4, 6, 100, 1000])
def test_third_doubling_weyl_sum_exact(N):
    rep = equi.weyl_sum(equi.rational_orbit([[2]], [Fraction(1, 3)], N), (1,))
    assert rep.S_N == complex(-0.5, 0.0)
    assert rep.magnitude == 0.5


def test_weyl_sum_of_uniform_points():
    rng = np.random.default_rng(7)
    mags = [equi.weyl_sum(rng.random((10_000, 2)), (1, 2)).magnitude for _ in range(200)]
    # |S_N|^2 N is close to Exp(1), so P(|S_N| >= 0.05) = exp(-25)
    assert max(mags) < 0.05


@given(st.lists(st.tuples(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True)), min_size=1, max_size=50),
       st.tuples(small, small).filter(any))
def test_weyl_sum_bounded_and_conjugate(pts, k):
    a = equi.weyl_sum(pts, k)
    b = equi.weyl_sum(pts, tuple(-x for x in k))
    assert a.magnitude <= 1 + 1e-12
    assert abs(a.S_N - b.S_N.conjugate()) <= 1e-12


def test_adjoint_diagonal_case():
    T = equi.make_endomorphism("2,0;0,2")
    x0 = ExactPoint.from_floats([0.3, 0.9], 200, fill_seed=2)
    turns = equi.adjoint_turns(T, (1, 0), x0, 20)
    for n, m in enumerate(turns, 1):
        assert m == (x0.coords[0] << n) & x0.mask


def test_adjoint_matches_orbit_for_acceptance_matrix():
    T = equi.make_endomorphism("2,1;0,3")
    rng = np.random.default_rng(1)
    bits = equi.required_bits(T, 64)
    for _ in range(5):
        x0 = ExactPoint.from_floats(rng.random(2), bits, fill_seed=int(rng.integers(1000)))
        k = (int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
        a = equi.adjoint_weyl(T, k, x0, 64)
        b = equi.weyl_sum(equi.orbit(T, x0, 64), k)
        assert abs(a.S_N - b.S_N) <= 1e-12


@given(matrices(), st.integers(1, 30), st.lists(small, min_size=3, max_size=3), st.data())
@settings(max_examples=50, deadline=None)
def test_adjoint_identity_per_term(A, N, kk, data):
    T = equi.make_endomorphism(A)
    k = tuple(kk[: T.d])
    assume(any(k))
    x0 = data.draw(points(T.d, equi.required_bits(T, N)))
    direct = [frac_dot(k, x) for x in equi.orbit(T, x0, N)]
    assert equi.adjoint_turns(T, k, x0, N) == direct


# --- singular growth --------------------------------------------------------------

def test_scalar_growth_is_equality():
    rows = equi.singular_growth_check(equi.make_endomorphism([[2]]), (1,), 30)
    assert all(r["pass"] and r["lhs_sq"] == 4 ** r["n"] for r in rows)


def test_growth_holds_for_non_expanding_shear():
    rows = equi.singular_growth_check(equi.make_endomorphism("1,1;0,1"), (1, 0), 50)
    assert all(r["pass"] for r in rows)
    assert all(r["lhs_sq"] >= 1 > r["rhs_sq"] for r in rows)


@given(matrices(d=2), st.tuples(small, small).filter(any))
@settings(max_examples=40, deadline=None)
def test_growth_holds_for_all_matrices(A, y):
    rows = equi.singular_growth_check(equi.make_endomorphism(A), y, 25)
    assert all(r["pass"] for r in rows)


# --- discrepancy ----------------------------------------------------------------------

def brute_discrepancy(pts, L):
    g = 2**L
    d = pts.shape[1]
    best = 0.0
    edges = list(itertools.combinations(range(g + 1), 2))
    for box in itertools.product(edges, repeat=d):
        inside = np.ones(len(pts), bool)
        vol = 1.0
        for ax, (a, b) in enumerate(box):
            inside &= (pts[:, ax] >= a / g) & (pts[:, ax] < b / g)
            vol *= (b - a) / g
        best = max(best, abs(inside.mean() - vol))
    return best


def test_one_point_per_cell():
    g = 4
    corners = np.array([(i / g, j / g) for i in range(g) for j in range(g)])
    rep = equi.discrepancy(corners, 2)
    assert rep.max_deviation == pytest.approx(0.0, abs=1e-15)
    assert rep.max_deviation == pytest.approx(brute_discrepancy(corners, 2), abs=1e-15)


@given(st.integers(0, 2**32), st.integers(1, 40), st.integers(0, 2), st.integers(1, 2))
@settings(max_examples=25, deadline=None)
def test_discrepancy_matches_brute_force(seed, n, L, d):
    pts = np.random.default_rng(seed).random((n, d))
    assert equi.discrepancy(pts, L).max_deviation == pytest.approx(brute_discrepancy(pts, L), abs=1e-12)


@pytest.mark.parametrize("d, L", [(1, 3), (2, 2), (2, 3), (3, 2)])
def test_single_point_discrepancy(d, L):
    rep = equi.discrepancy(np.full((1, d), 0.3), L)
    assert rep.max_deviation >= 1 - 2.0 ** (-d * L) - 1e-15
    assert 0 <= rep.max_deviation <= 1


def test_uniform_points_have_small_discrepancy():
    pts = np.random.default_rng(3).random((100_000, 2))
    assert equi.discrepancy(pts, 3).max_deviation < 0.01


def test_level_limit():
    with pytest.raises(InvalidArgument):
        equi.discrepancy(np.zeros((1, 2)), 7)


def test_discrepancy_accepts_exact_points():
    pts = [ExactPoint.from_floats([0.1, 0.7], 64)]
    assert equi.discrepancy(pts, 1).max_deviation == pytest.approx(0.75)


# --- Brownian starts ---------------------------------------------------------------------

def test_r_one_is_one():
    T = equi.make_endomorphism("2,1;0,3")
    assert equi.r_N_estimate(T, (1, 1), generate_path(1024, 1), 1, 10) == pytest.approx(1.0)


def test_r_n_needs_expanding_map():
    with pytest.raises(InvalidArgument):
        equi.r_N_estimate(equi.make_endomorphism("1,1;0,1"), (1, 0), generate_path(8, 0), 4, 2)


def test_r_n_budget():
    T = equi.make_endomorphism("2,0;0,2")
    with pytest.raises(PrecisionBudgetError):
        equi.r_N_estimate(T, (1, 1), generate_path(8, 0), 100, 2, bits=120)


def test_r_n_decay_rate():
    T = equi.make_endomorphism("2,0;0,2")
    Ns = [2**j for j in range(4, 11)]
    r = equi.r_N_series(T, (1, 1), generate_path(4096, 1), Ns, 64, seed=3)
    assert all(0 <= r[N] <= 1 for N in Ns)
    slope = np.polyfit(np.log(Ns), np.log([r[N] for N in Ns]), 1)[0]
    assert slope < -0.5


def test_experiment_with_single_step():
    T = equi.make_endomorphism("2,1;0,3")
    rep = equi.brownian_orbit_experiment(generate_path(256, 2), T, 1, 2, 5, seed=1)
    assert len(rep["per_start"]) == 5
    assert all(s["max_weyl"] == pytest.approx(1.0) for s in rep["per_start"])
    assert rep["aggregate"]["pass_fraction"] == 0.0


def test_experiment_rejects_bad_maps():
    p = generate_path(16, 0)
    with pytest.raises(InvalidArgument):
        equi.brownian_orbit_experiment(p, equi.make_endomorphism("1,1;0,1"), 4, 1, 2)
    with pytest.raises(InvalidArgument):
        equi.brownian_orbit_experiment(p, equi.make_endomorphism([[2]]), 4, 1, 2)


def test_nonzero_frequency_representatives():
    ks = equi.nonzero_frequencies(2, 3)
    assert len(ks) == 24
    assert not set(ks) & {tuple(-x for x in k) for k in ks}
