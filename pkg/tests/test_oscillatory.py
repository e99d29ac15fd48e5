import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from browngraph import oscillatory as osc
from browngraph.errors import InsufficientData, InvalidArgument, ZeroFrequency
from browngraph.oscillatory import AngleClass, Frequency, SpectralSample
from browngraph.paths import WienerPath, ensemble, generate_path, refine_path

from stats import within_se

PI = math.pi
TENT = WienerPath(np.array([0.0, 0.5, 0.0]))
ZERO = WienerPath(np.zeros(9))

moduli = st.floats(1e-3, 1e6, allow_nan=False)
angles = st.floats(0.0, 2 * PI, exclude_max=True)


def segment_oracle(path, xi, max_phase=0.5, nodes=8):
    """Gauss-Legendre on sub-pieces with at most ``max_phase`` radians of phase change."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    x, w = 0.5 * (x + 1), 0.5 * w
    t, v = path.grid, path.values
    total = 0.0j
    for j in range(path.n_steps):
        dt, dv = t[j + 1] - t[j], v[j + 1] - v[j]
        dphase = 2 * PI * abs(xi[0] * dt + xi[1] * dv)
        m = max(1, int(math.ceil(dphase / max_phase)))
        s = (np.arange(m)[:, None] + x[None, :]) / m
        ph = -2 * PI * (xi[0] * (t[j] + s * dt) + xi[1] * (v[j] + s * dv))
        total += dt / m * np.sum(w * np.exp(1j * ph))
    return total


# --- frequencies and angle classes ------------------------------------------------

def test_classify_examples():
    assert osc.classify_angle((4, 0)) is AngleClass.HORIZONTAL
    assert osc.theta_threshold(4) == 0.5
    assert osc.classify_angle((0, 4)) is AngleClass.VERTICAL
    assert osc.theta_threshold(1) == PI / 4


def test_zero_frequency_has_no_angle_class():
    with pytest.raises(ZeroFrequency):
        osc.classify_angle((0, 0))
    assert Frequency.cartesian(0, 0).angle_class is AngleClass.ZERO


@given(moduli, angles)
def test_polar_and_cartesian_agree(u, theta):
    f = Frequency.polar(u, theta)
    assert f.xi1 == pytest.approx(u * math.cos(theta), rel=1e-12, abs=1e-12 * u)
    assert f.xi2 == pytest.approx(u * math.sin(theta), rel=1e-12, abs=1e-12 * u)
    g = Frequency.cartesian(f.xi1, f.xi2)
    assert g.u == pytest.approx(u, rel=1e-12)


@given(moduli, angles)
def test_angle_classes_partition_the_circle(u, theta):
    th = osc.theta_threshold(u)
    in_h = theta <= th or PI - th <= theta <= PI + th or theta >= 2 * PI - th
    cls = Frequency.polar(u, theta).angle_class
    assert cls in (AngleClass.HORIZONTAL, AngleClass.VERTICAL)
    assert (cls is AngleClass.HORIZONTAL) == in_h


@given(moduli)
def test_threshold_range(u):
    assert 0 < osc.theta_threshold(u) <= PI / 4


def test_trig_bounds_examples():
    r = osc.trig_bounds_check((4, 0))
    assert r["sin_ok"] and r["cos_ok"]
    assert osc.trig_bounds_check((0, 4))["sin_ok"]


def test_trig_bounds_random_sweep():
    rng = np.random.default_rng(0)
    u = np.exp(rng.uniform(-5, 14, 100_000))
    th = rng.uniform(0, 2 * PI, 100_000)
    for a, b in zip(u, th):
        r = osc.trig_bounds_check(Frequency.polar(a, b))
        assert r["sin_ok"] and r["cos_ok"], (a, b)


# --- transforms ------------------------------------------------------------------

def test_zero_path_integer_frequency_vanishes():
    assert abs(osc.graph_transform(ZERO, (3, 0))) < 1e-12


def test_zero_frequency_is_total_mass():
    p = generate_path(100, 1)
    assert osc.graph_transform(p, (0, 0)) == 1.0
    assert osc.image_transform(p, 0.0) == 1.0


def test_tent_path_closed_form():
    expected = -2j / PI
    assert osc.graph_transform(TENT, (0, 1)) == pytest.approx(expected, abs=1e-14)
    assert osc.image_transform(TENT, 1.0) == pytest.approx(expected, abs=1e-14)
    # midpoint Riemann sum with 10^6 points on the interpolant
    t = (np.arange(10**6) + 0.5) / 10**6
    w = np.interp(t, TENT.grid, TENT.values)
    riemann = np.mean(np.exp(-2j * PI * w))
    assert abs(riemann - expected) < 1e-10


@given(st.floats(-1e4, 1e4))
def test_zero_path_image_transform_is_one(v):
    assert osc.image_transform(ZERO, v) == 1.0


@given(st.integers(0, 2**32), st.floats(-300, 300), st.floats(-300, 300))
@settings(max_examples=30, deadline=None)
def test_modulus_bound_and_conjugate_symmetry(seed, a, b):
    p = generate_path(256, seed)
    z = osc.graph_transform(p, (a, b))
    assert abs(z) <= 1 + 1e-12
    assert abs(osc.graph_transform(p, (-a, -b)) - z.conjugate()) <= 1e-12


@given(st.integers(0, 2**32), st.floats(-500, 500).filter(lambda a: a != 0))
@settings(max_examples=30, deadline=None)
def test_drift_only_matches_lebesgue_transform(seed, a):
    p = generate_path(128, seed)
    with mpmath.workdps(40):
        z = 2j * mpmath.pi * a
        expected = complex((1 - mpmath.exp(-z)) / z)
    assert abs(osc.graph_transform(p, (a, 0)) - expected) <= 1e-12


@given(st.integers(0, 2**32), st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8))
@settings(max_examples=20, deadline=None)
def test_vertical_axis_is_image_transform(seed, vs):
    p = generate_path(64, seed)
    xis = np.column_stack([np.zeros(len(vs)), vs])
    assert np.array_equal(osc.graph_transforms(p, xis), osc.image_transforms(p, vs))


@pytest.mark.parametrize("xi", [(3.0, 5.0), (-200.0, 700.0), (1024.0, 0.0), (300.0, -1000.0)])
def test_segment_quadrature_matches_subdivided_gauss_oracle(xi):
    p = refine_path(generate_path(512, 8), 3)
    assert abs(osc.graph_transform(p, xi) - segment_oracle(p, xi)) < 1e-12


def test_tiny_phase_steps_use_series():
    p = generate_path(1000, 2)
    xi = (1e-9, 1e-9)
    assert osc.graph_transform(p, xi) == pytest.approx(segment_oracle(p, xi), abs=1e-15)


# --- scans ----------------------------------------------------------------------

def test_lattice_counts():
    assert len(osc.lattice_points(1.0, 1.5)) == 8
    pts = osc.lattice_points(0.5, 1.0)
    assert len(pts) == 12
    assert sorted(round(f.u, 6) for f in pts) == [0.5] * 4 + [0.707107] * 4 + [1.0] * 4


def test_lattice_rejects_bad_spacing():
    with pytest.raises(InvalidArgument):
        osc.scan_lattice(ZERO, 0.0, 2.0)


def test_lattice_scan_sorted_and_symmetric():
    p = generate_path(512, 4)
    samples = osc.scan_lattice(p, 1.0, 5.0)
    u = [s.frequency.u for s in samples]
    assert u == sorted(u)
    by_point = {(round(s.frequency.xi1), round(s.frequency.xi2)): s.value for s in samples}
    for (a, b), z in by_point.items():
        assert abs(by_point[(-a, -b)] - z.conjugate()) <= 1e-12


def test_polar_angles_without_oversampling():
    th = osc.polar_angles(4, 4, 0)
    assert th == pytest.approx([0, PI / 2, PI, 3 * PI / 2])


def test_polar_oversampling_lands_in_horizontal_bands():
    extra = osc.polar_angles(4, 4, 2)[4:]
    assert len(extra) == 6
    assert all(Frequency.polar(4, t).angle_class is AngleClass.HORIZONTAL for t in extra)


@given(st.lists(st.floats(0.5, 1e4), min_size=1, max_size=5), st.integers(4, 40), st.integers(0, 10))
@settings(max_examples=30)
def test_polar_row_count(mods, base, over):
    assert len(osc.polar_frequencies(mods, base, over)) == len(mods) * (base + 3 * over)


def test_polar_scan_values_bounded():
    p = generate_path(1024, 5)
    assert all(s.modulus <= 1 + 1e-12 for s in osc.scan_polar(p, [4, 40, 400], 16, 3))


# --- decay fits -------------------------------------------------------------------

def _sample(u, m):
    return SpectralSample(Frequency.cartesian(u, 0), complex(m), m)


def test_annulus_examples():
    assert osc.annulus_max([_sample(5, 0.1)]) == [(2, 0.1)]
    assert osc.annulus_max([_sample(4, 0.1), _sample(6, 0.3)]) == [(2, 0.3)]
    assert [j for j, _ in osc.annulus_max([_sample(2, 0.5), _sample(9, 0.2)])] == [1, 3]
    with pytest.raises(InvalidArgument):
        osc.annulus_max([])


def test_fit_exact_power_law():
    ann = [(j, (2 ** (j + 0.5)) ** -0.5) for j in range(2, 12)]
    fit = osc.fit_decay(ann, False)
    assert fit.slope == pytest.approx(-0.5, abs=1e-9)
    assert fit.residual_rms < 1e-9


def test_fit_corrected_power_law():
    ann = []
    for j in range(2, 12):
        u = 2 ** (j + 0.5)
        ann.append((j, u**-0.5 * math.sqrt(math.log(u))))
    assert osc.fit_decay(ann, True).slope == pytest.approx(-0.5, abs=1e-9)


def test_fit_constant():
    assert osc.fit_decay([(j, 0.3) for j in range(5)], False).slope == pytest.approx(0.0, abs=1e-9)


def test_fit_needs_three_annuli():
    with pytest.raises(InsufficientData):
        osc.fit_decay([(1, 0.5), (2, 0.4)], False)


@given(st.floats(-3, 1), st.floats(-5, 5), st.integers(1, 6), st.integers(3, 12))
def test_fit_recovers_any_exponent(s, c, j0, count):
    ann = [(j, math.exp(c + s * (j + 0.5) * math.log(2))) for j in range(j0, j0 + count)]
    fit = osc.fit_decay(ann, False)
    assert fit.slope == pytest.approx(s, abs=1e-9)
    assert [j for j, _ in fit.annuli] == sorted({j for j, _ in fit.annuli})


def test_fit_json_layout():
    fit = osc.fit_decay([(j, 1.0 / (j + 1)) for j in range(3)], False)
    d = fit.to_json()
    assert set(d) == {"slope", "intercept", "sqrtlog_corrected", "annuli", "residual_rms"}
    assert d["annuli"][0] == [0, 1.0]


# --- second moment -------------------------------------------------------------------

def quad_second_moment(xi1, xi2):
    f = lambda r: 2 * (1 - r) * math.cos(2 * PI * xi1 * r) * math.exp(-2 * PI**2 * xi2**2 * r)
    return integrate.quad(f, 0, 1, limit=500, epsabs=1e-14)[0]


def test_second_moment_examples():
    assert osc.second_moment_exact((0, 0)) == 1.0
    for u in range(1, 20):
        assert abs(osc.second_moment_exact((u, 0))) < 1e-12


@pytest.mark.parametrize("xi", [(0, 0.3), (0, 1), (2.5, 0.7), (10, 3), (0.01, 0.001), (40, 0.2)])
def test_second_moment_against_quadrature(xi):
    assert osc.second_moment_exact(xi) == pytest.approx(quad_second_moment(*xi), abs=1e-12)


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_second_moment_in_unit_interval(a, b):
    assert 0 <= osc.second_moment_exact((a, b)) <= 1


def test_second_moment_against_monte_carlo():
    sq = [abs(osc.image_transform(p, 1.0)) ** 2 for p in ensemble(20_000, 1024, seed=31)]
    assert within_se(sq, osc.second_moment_exact((0, 1.0)))


def test_interpolant_moment_converges_to_exact():
    xi = (3.0, 16.0)
    exact = osc.second_moment_exact(xi)
    errs = [abs(osc.second_moment_interpolant(xi, 2**k) / exact - 1) for k in (12, 16, 20)]
    # first order in the grid spacing once v^2 dt is small
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.02)


def test_interpolant_moment_matches_coarse_monte_carlo():
    xi = (0.0, 16.0)
    sq = [abs(osc.graph_transform(p, xi)) ** 2 for p in ensemble(20_000, 64, seed=41)]
    model = osc.second_moment_interpolant(xi, 64)
    assert within_se(sq, model)
    assert not within_se(sq, osc.second_moment_exact(xi))


# --- lattice versus off-grid -------------------------------------------------------------

def test_offgrid_lattice_only_flag():
    rep = osc.offgrid_consistency(generate_path(256, 1), 1.0, 40.0, 0, 1)
    assert rep.lattice_only and rep.offgrid_fit is None and rep.slope_difference is None


def test_offgrid_is_deterministic():
    p = generate_path(256, 1)
    a = osc.offgrid_consistency(p, 1.0, 40.0, 200, 5).to_json()
    b = osc.offgrid_consistency(p, 1.0, 40.0, 200, 5).to_json()
    assert a == b


@pytest.mark.slow
def test_offgrid_slopes_agree_on_average():
    diffs = []
    for s in range(6):
        p = generate_path(2**17, 11, s)
        diffs.append(osc.offgrid_consistency(p, 128.0, 4096.0, 2000, s).slope_difference)
    assert abs(np.mean(diffs)) < 0.15
