import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sarfocus import (
    ConfigurationError,
    RegularizerSpec,
    auxiliary_b_star,
    cauchy_prox_magnitude,
    complex_prox,
    difference_matrices,
    k_value,
    penalty_value,
    tv_weight_operator,
    weight_diagonal,
)
from sarfocus.regularizers import tv_smoothness_maps


def cauchy(gamma=1.0, lam=1.0):
    return RegularizerSpec.cauchy(gamma=gamma, lam=lam)


# ---------------------------------------------------------------- penalties

def test_cauchy_penalty_at_zero():
    spec = cauchy(gamma=0.5, lam=2.0)
    n = 10
    expected = -2.0 * n * np.log(1.0 / 0.5)
    assert penalty_value(spec, np.zeros(n, complex)) == pytest.approx(expected)


def test_welsh_penalty_at_zero():
    spec = RegularizerSpec.welsh(delta=0.7, lam=3.0)
    assert penalty_value(spec, np.zeros(5, complex)) == pytest.approx(0.0)


def test_cauchy_penalty_two_pixel_hand_value():
    spec = cauchy(gamma=1.0, lam=1.0)
    value = penalty_value(spec, np.array([1.0, 0.0], complex))
    assert value == pytest.approx(np.log(2.0))


def test_geman_mcclure_penalty_value():
    spec = RegularizerSpec.geman_mcclure(delta=1.0, lam=1.0)
    f = np.array([1.0 + 0j])
    assert penalty_value(spec, f) == pytest.approx(1.0 / 3.0)


def test_approx_lp_penalty_value():
    spec = RegularizerSpec.approx_lp(p=1.0, beta=0.01, lam=2.0)
    f = np.array([1.0 + 0j, 0.0])
    assert penalty_value(spec, f) == pytest.approx(2.0 * (1.01**0.5 + 0.01**0.5))


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        RegularizerSpec(kind="huber", lam=1.0)
    with pytest.raises(ConfigurationError):
        RegularizerSpec.cauchy(gamma=-1.0, lam=1.0)
    with pytest.raises(ConfigurationError):
        RegularizerSpec.approx_lp(p=1.5, beta=0.1, lam=1.0)
    with pytest.raises(ConfigurationError):
        RegularizerSpec.cauchy(gamma=1.0, lam=0.0)


# ------------------------------------------------------------------ weights

def test_cauchy_weight_at_zero():
    w = weight_diagonal(cauchy(gamma=1.0), np.zeros(6, complex))
    assert np.allclose(w.diag, 1.0)


def test_approx_lp_weight_scalar_value():
    spec = RegularizerSpec.approx_lp(p=1.0, beta=0.01, lam=1.0)
    w = weight_diagonal(spec, np.array([1.0 + 0j]))
    assert w.diag[0] == pytest.approx(1.0 / (2.0 * 1.01**0.5))


def test_welsh_weight_at_zero():
    spec = RegularizerSpec.welsh(delta=1.0, lam=1.0)
    w = weight_diagonal(spec, np.zeros(3, complex))
    assert np.allclose(w.diag, 0.5)


def test_weight_diagonal_rejects_tv():
    with pytest.raises(ConfigurationError):
        weight_diagonal(RegularizerSpec.approx_tv(beta=1.0, lam=1.0), np.zeros(4, complex))


def test_pixelwise_weight_is_gradient_factor(rng):
    # lam * s(f) * f must equal the Wirtinger gradient of lam * R(f),
    # checked against central finite differences on the real lifting.
    f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    for spec in (
        cauchy(gamma=0.3, lam=1.7),
        RegularizerSpec.approx_lp(p=0.8, beta=0.05, lam=1.3),
        RegularizerSpec.welsh(delta=0.6, lam=0.9),
        RegularizerSpec.geman_mcclure(delta=0.8, lam=1.1),
    ):
        w = weight_diagonal(spec, f)
        grad = spec.lam * w.diag * f
        fd = _wirtinger_fd(lambda v: penalty_value(spec, v), f)
        assert np.abs(grad - fd).max() < 1e-5 * max(np.abs(grad).max(), 1.0)


def _wirtinger_fd(fn, f, h=1e-6):
    """0.5 (d/dRe + i d/dIm) of a real function, by central differences."""
    grad = np.zeros(len(f), complex)
    for i in range(len(f)):
        for part, factor in ((1.0, 1.0), (1j, 1j)):
            e = np.zeros(len(f), complex)
            e[i] = part * h
            grad[i] += factor * (fn(f + e) - fn(f - e)) / (2.0 * h)
    return 0.5 * grad


# ----------------------------------------------------------------------- tv

def test_tv_constant_image_smoothness_maps():
    spec = RegularizerSpec.approx_tv(beta=0.25, lam=1.0)
    f2d = np.full((4, 4), 3.0 + 0j)
    s1, s2, s3 = tv_smoothness_maps(spec, f2d)
    assert np.allclose(s1, 1.0 / (2.0 * 0.5))
    # interior entries take the same value, out-of-range entries are zero
    assert np.allclose(s2[:, :-1], 1.0) and np.allclose(s2[:, -1], 0.0)
    assert np.allclose(s3[:-1, :], 1.0) and np.allclose(s3[-1, :], 0.0)


def test_tv_two_by_two_hand_enumeration():
    spec = RegularizerSpec.approx_tv(beta=1.0, lam=1.0)
    F = np.array([[1.0, 2.0], [4.0, 8.0]], dtype=complex)
    s1, s2, s3 = tv_smoothness_maps(spec, F)
    # hand-enumerated t[i,j] = sqrt(|F[i,j]-F[i-1,j]|^2 + |F[i,j]-F[i,j-1]|^2 + 1)
    t = np.array(
        [
            [np.sqrt(1.0), np.sqrt(1.0 + 1.0)],
            [np.sqrt(9.0 + 1.0), np.sqrt(16.0 + 36.0 + 1.0)],
        ]
    )
    assert np.abs(s1 - 1.0 / (2.0 * t)).max() < 1e-14
    assert s2[0, 0] == pytest.approx(1.0 / (2.0 * t[0, 1]), abs=1e-14)
    assert s2[1, 0] == pytest.approx(1.0 / (2.0 * t[1, 1]), abs=1e-14)
    assert s2[0, 1] == 0.0 and s2[1, 1] == 0.0
    assert s3[0, 0] == pytest.approx(1.0 / (2.0 * t[1, 0]), abs=1e-14)
    assert s3[0, 1] == pytest.approx(1.0 / (2.0 * t[1, 1]), abs=1e-14)
    assert s3[1, 0] == 0.0 and s3[1, 1] == 0.0


def test_difference_matrices_reproduce_grid_differences(rng):
    rows, cols = 4, 4
    d1, d2, d3, d4 = difference_matrices(rows, cols)
    F = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    f = F.flatten(order="F")
    gi = np.zeros_like(F)
    gj = np.zeros_like(F)
    gi[1:, :] = F[1:, :] - F[:-1, :]
    gj[:, 1:] = F[:, 1:] - F[:, :-1]
    assert np.array_equal(d1 @ f, gi.flatten(order="F"))
    assert np.array_equal(d2 @ f, gj.flatten(order="F"))
    # d3 f = -vec(gj at (i, j+1)), d4 f = -vec(gi at (i+1, j)); zero past the edge
    gj_next = np.zeros_like(F)
    gj_next[:, :-1] = gj[:, 1:]
    gi_next = np.zeros_like(F)
    gi_next[:-1, :] = gi[1:, :]
    assert np.array_equal(d3 @ f, -gj_next.flatten(order="F"))
    assert np.array_equal(d4 @ f, -gi_next.flatten(order="F"))


def test_difference_matrix_entries_are_signs():
    for d in difference_matrices(5, 3):
        values = d.toarray()
        assert set(np.unique(values)).issubset({-1.0, 0.0, 1.0})


def test_tv_operator_matches_wirtinger_gradient(rng):
    rows, cols = 4, 4
    spec = RegularizerSpec.approx_tv(beta=0.09, lam=1.4)
    f = rng.standard_normal(rows * cols) + 1j * rng.standard_normal(rows * cols)
    w = tv_weight_operator(spec, f, (rows, cols))
    grad = spec.lam * w.apply(f)
    fd = _wirtinger_fd(lambda v: penalty_value(spec, v, shape=(rows, cols)), f)
    rel = np.abs(grad - fd).max() / np.abs(fd).max()
    assert rel < 1e-5


def test_tv_operator_is_symmetric_by_construction(rng):
    # the S2/S3 diagonals repeat S1 at shifted indices, so the composite is a
    # weighted graph Laplacian: exactly symmetric, asymmetry norm zero
    spec = RegularizerSpec.approx_tv(beta=0.1, lam=1.0)
    f = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    w = tv_weight_operator(spec, f, (4, 4))
    dense = w.as_matrix()
    assert np.abs(dense - dense.T).max() < 1e-14
    assert w.asymmetry_norm() == pytest.approx(0.0, abs=1e-14)
    v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    sym = w.apply_symmetrized(v)
    assert np.abs(sym - 0.5 * (w.apply(v) + w.apply_adjoint(v))).max() < 1e-14


# --------------------------------------------------------------------- prox

def _prox_envelope(y, x_abs, gamma, mu_lambda):
    return 0.5 * (x_abs - y) ** 2 + mu_lambda * np.log((gamma**2 + y**2) / gamma)


def _grid_search_prox(x_abs, gamma, mu_lambda, hi, step=1e-6):
    coarse = np.linspace(0.0, hi, 4096)
    vals = _prox_envelope(coarse, x_abs, gamma, mu_lambda)
    k = int(np.argmin(vals))
    lo = coarse[max(k - 1, 0)]
    up = coarse[min(k + 1, len(coarse) - 1)]
    fine = np.arange(lo, up + step, step)
    return fine[np.argmin(_prox_envelope(fine, x_abs, gamma, mu_lambda))]


def test_prox_at_zero_is_zero():
    assert cauchy_prox_magnitude(0.0, gamma=0.5, mu_lambda=0.2) == 0.0


def test_prox_with_zero_penalty_is_identity():
    for x in (0.0, 0.3, 2.7, 11.0):
        assert cauchy_prox_magnitude(x, gamma=0.5, mu_lambda=0.0) == pytest.approx(x, abs=1e-12)


def test_prox_matches_grid_search_reference_case():
    y_formula = cauchy_prox_magnitude(1.0, gamma=0.5, mu_lambda=0.25)
    y_grid = _grid_search_prox(1.0, 0.5, 0.25, hi=1.5)
    assert abs(y_formula - y_grid) < 1e-4


def test_prox_rejects_constraint_violation():
    with pytest.raises(ConfigurationError):
        cauchy_prox_magnitude(1.0, gamma=0.1, mu_lambda=1.0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=10.0),
    st.floats(min_value=1e-3, max_value=2.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_prox_stationarity_and_shrinkage(x_abs, gamma, ratio):
    # mu*lambda at most the convexity bound 4 gamma^2
    mu_lambda = ratio * 4.0 * gamma**2
    y = cauchy_prox_magnitude(x_abs, gamma, mu_lambda)
    assert 0.0 <= y <= x_abs + 1e-12
    residual = (y - x_abs) + 2.0 * mu_lambda * y / (gamma**2 + y**2)
    assert abs(residual) < 1e-8


def test_prox_monotone_in_input():
    xs = np.linspace(0.0, 8.0, 4001)
    ys = cauchy_prox_magnitude(xs, gamma=0.4, mu_lambda=0.5)
    assert np.all(np.diff(ys) >= -1e-12)


def test_prox_dominates_grid_values(rng):
    for _ in range(20):
        gamma = rng.uniform(0.05, 2.0)
        mu_lambda = rng.uniform(0.0, 4.0 * gamma**2)
        x_abs = rng.uniform(0.0, 10.0)
        y = cauchy_prox_magnitude(x_abs, gamma, mu_lambda)
        grid = np.linspace(0.0, max(x_abs, 1.0), 10_000)
        assert _prox_envelope(y, x_abs, gamma, mu_lambda) <= _prox_envelope(
            grid, x_abs, gamma, mu_lambda
        ).min() + 1e-10


def test_complex_prox_preserves_phase_exactly():
    spec = cauchy(gamma=0.5, lam=1.0)
    for theta in (0.0, 0.3, -2.9, np.pi / 2, 2.2):
        x = np.array([1.7 * np.exp(1j * theta)])
        y = complex_prox(x, spec, mu=0.2)
        assert np.angle(y[0]) == pytest.approx(theta, abs=1e-15)


def test_complex_prox_real_positive_input():
    spec = cauchy(gamma=0.5, lam=1.0)
    x = np.array([2.0 + 0j])
    y = complex_prox(x, spec, mu=0.3)
    assert y[0].imag == 0.0
    assert y[0].real == pytest.approx(cauchy_prox_magnitude(2.0, 0.5, 0.3))


def test_complex_prox_zero_maps_to_zero():
    spec = cauchy(gamma=0.5, lam=1.0)
    y = complex_prox(np.array([0.0 + 0j]), spec, mu=0.3)
    assert y[0] == 0.0


def test_complex_prox_matches_polar_brute_force(rng):
    spec = cauchy(gamma=0.6, lam=1.2)
    mu = 0.25
    x = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) * 1.5
    y = complex_prox(x, spec, mu)
    radii = np.linspace(0.0, 4.0, 1200)
    angles = np.linspace(-np.pi, np.pi, 720, endpoint=False)
    cand = radii[:, None] * np.exp(1j * angles)[None, :]
    for i in range(len(x)):
        obj = 0.5 * np.abs(x[i] - cand) ** 2 + mu * spec.lam * np.log(
            (spec.gamma**2 + np.abs(cand) ** 2) / spec.gamma
        )
        best = cand.flatten()[np.argmin(obj)]
        assert abs(y[i] - best) < 1e-2  # brute-force grid resolution bound
        obj_formula = 0.5 * np.abs(x[i] - y[i]) ** 2 + mu * spec.lam * np.log(
            (spec.gamma**2 + np.abs(y[i]) ** 2) / spec.gamma
        )
        assert obj_formula <= obj.min() + 1e-3


# ------------------------------------------------------------ half-quadratic

ALL_PIXELWISE = (
    RegularizerSpec.cauchy(gamma=0.7, lam=1.5),
    RegularizerSpec.welsh(delta=0.9, lam=1.1),
    RegularizerSpec.geman_mcclure(delta=0.8, lam=0.7),
    RegularizerSpec.approx_lp(p=1.0, beta=0.02, lam=1.3),
)


def test_b_star_equals_weight_diagonal(rng):
    f = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    for spec in ALL_PIXELWISE:
        b = auxiliary_b_star(spec, f)
        s = weight_diagonal(spec, f)
        assert np.array_equal(b.b, s.diag)


def test_b_star_hand_values():
    welsh = RegularizerSpec.welsh(delta=1.0, lam=1.0)
    assert auxiliary_b_star(welsh, np.zeros(2, complex)).b[0] == pytest.approx(0.5)
    gm = RegularizerSpec.geman_mcclure(delta=1.0, lam=1.0)
    assert auxiliary_b_star(gm, np.array([1.0 + 0j])).b[0] == pytest.approx(2.0 / 9.0)


def test_b_star_rejects_tv():
    with pytest.raises(ConfigurationError):
        auxiliary_b_star(RegularizerSpec.approx_tv(beta=0.1, lam=1.0), np.zeros(4, complex))


def test_surrogate_equals_cost_at_minimizer(rng):
    fidelity = 3.7
    for spec in ALL_PIXELWISE:
        for _ in range(25):
            f = rng.standard_normal(10) + 1j * rng.standard_normal(10)
            b = auxiliary_b_star(spec, f)
            k = k_value(spec, b, f, fidelity)
            j = fidelity + penalty_value(spec, f)
            assert abs(k - j) < 1e-10 * max(abs(j), 1.0)


def test_surrogate_dominates_cost_off_minimizer(rng):
    fidelity = 1.2
    for spec in ALL_PIXELWISE:
        f = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        b_star = auxiliary_b_star(spec, f)
        k_star = k_value(spec, b_star, f, fidelity)
        for _ in range(100):
            perturbed = b_star.b * np.exp(0.5 * rng.standard_normal(10))
            k = k_value(spec, perturbed, f, fidelity)
            assert k >= k_star - 1e-10 * max(abs(k_star), 1.0)


def test_k_value_rejects_tv():
    spec = RegularizerSpec.approx_tv(beta=0.1, lam=1.0)
    with pytest.raises(ConfigurationError):
        k_value(spec, np.ones(4), np.zeros(4, complex), 0.0)
