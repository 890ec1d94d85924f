"""Tests for the correlation module.

Reference values are either computed by an independent oracle inside the
test (quadrature, explicit Gram products, squaring the matrix root) or
frozen from high-precision evaluation (mpmath at 30 digits).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dualpolsim.correlation import (
    AodDistribution,
    CorrelationMatrix,
    InvalidCorrelationError,
    J0_FIRST_ZERO,
    NoSolutionError,
    SpacingQuery,
    bessel_j0,
    dualpole_corr_approx,
    dualpole_corr_exact,
    equivalent_spacing,
    matrix_sqrt_psd,
    spatial_corr,
    spatial_corr_matrix,
)

# Table values the simulator must reproduce: XPD (dB) -> coefficient
TABLE_RHO = {3: 0.9432, 5: 0.8545, 10: 0.5750, 20: 0.1980, 30: 0.0632}
# XPD (dB) -> isotropic equivalent spacing in wavelengths
TABLE_D_ISO = {3: 0.076, 5: 0.124, 10: 0.220, 20: 0.326, 30: 0.364}

# mpmath.besselj(0, x) at 30 digits, frozen
J0_REFERENCE = {
    0.5: 0.938469807240812904,
    1.0: 0.765197686557966551,
    2.0: 0.223890779141235668,
    5.0: -0.177596771314338304,
    8.0: 0.171650807137553906,
    10.0: -0.245935764451348335,
    12.5: 0.146884054700421102,
    14.0: 0.171073476110458659,
    15.7: -0.140070211829048428,
    16.0: -0.174899073983629185,
    18.0: -0.013355805721984111,
    20.0: 0.167024664340583155,
}


def j0_quadrature(x: np.ndarray, n: int = 4096) -> np.ndarray:
    """Independent J0 oracle: midpoint rule on the cosine integral.

    The integrand is smooth and periodic, so the midpoint rule converges
    geometrically; n = 4096 is far below 1e-12 error for x <= 25.
    """
    theta = (np.arange(n) + 0.5) * math.pi / n
    return np.cos(np.outer(np.asarray(x, dtype=float), np.sin(theta))).mean(axis=1)


def laplacian_rho_quadrature(d, mu, sigma, n=400001):
    """Dense-trapezoid oracle for the truncated Laplacian correlation."""
    b = math.sqrt(2.0) / sigma
    norm = 1.0 - 0.5 * (math.exp(-b * (math.pi - mu)) + math.exp(-b * (math.pi + mu)))
    # place the density kink exactly on a grid point
    left = np.linspace(-math.pi, mu, n // 2)
    right = np.linspace(mu, math.pi, n // 2)
    out = 0.0
    for phi in (left, right):
        dens = (b / 2.0) * np.exp(-b * np.abs(phi - mu)) / norm
        out += np.trapezoid(dens * np.exp(-1j * 2.0 * math.pi * d * np.sin(phi)), phi)
    return out


# ---------------------------------------------------------------------------
# Bessel J0
# ---------------------------------------------------------------------------


def test_bessel_j0_frozen_reference_values():
    for x, ref in J0_REFERENCE.items():
        assert abs(bessel_j0(x) - ref) < 1e-11, f"J0({x})"


def test_bessel_j0_accuracy_against_quadrature():
    xs = np.linspace(0.0, 20.0, 2001)
    assert np.max(np.abs(bessel_j0(xs) - j0_quadrature(xs))) < 1e-10


def test_bessel_j0_first_zero():
    assert abs(bessel_j0(J0_FIRST_ZERO)) < 1e-12


def test_bessel_j0_even_and_scalar():
    assert bessel_j0(-3.0) == bessel_j0(3.0)
    assert isinstance(bessel_j0(1.0), float)
    assert bessel_j0(np.array([0.0, 1.0])).shape == (2,)
    assert bessel_j0(0.0) == 1.0


# ---------------------------------------------------------------------------
# XPD -> correlation
# ---------------------------------------------------------------------------


def test_dualpole_exact_table_values():
    for db, rho in TABLE_RHO.items():
        corr = dualpole_corr_exact(10.0 ** (db / 10.0))
        assert abs(corr.coefficient.real - rho) < 5e-4, f"{db} dB"


def test_dualpole_exact_zero_db_is_rank_one():
    corr = dualpole_corr_exact(1.0)
    assert_allclose(corr.matrix, np.ones((2, 2)), rtol=0, atol=1e-15)
    assert corr.eigenvalues()[0] < 1e-12


def test_dualpole_exact_matches_gram_normalization():
    # oracle: normalize the Gram matrix of the coupling explicitly
    rng = np.random.default_rng(402)
    for _ in range(200):
        chi1, chi2 = 10.0 ** rng.uniform(-0.5, 4.0, 2)
        coupling = np.array([[1.0, 1.0 / math.sqrt(chi1)],
                             [1.0 / math.sqrt(chi2), 1.0]])
        gram = coupling.T @ coupling
        scale = np.diag(1.0 / np.sqrt(np.diag(gram)))
        expected = scale @ gram @ scale
        got = dualpole_corr_exact(chi1, chi2).matrix.real
        assert_allclose(got, expected, rtol=0, atol=1e-13)


def test_dualpole_exact_infinite_xpd_is_identity():
    assert_allclose(dualpole_corr_exact(math.inf).matrix, np.eye(2), atol=0)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_dualpole_rejects_nonpositive_xpd(bad):
    with pytest.raises(ValueError):
        dualpole_corr_exact(bad)
    with pytest.raises(ValueError):
        dualpole_corr_approx(bad)


def test_dualpole_approx_values():
    assert abs(dualpole_corr_approx(100.0).corr.coefficient.real - 0.2000) < 1e-12
    assert abs(dualpole_corr_approx(1000.0).corr.coefficient.real - 0.0632) < 1e-4


def test_dualpole_approx_clamp_and_flag():
    at_limit = dualpole_corr_approx(4.0)
    assert at_limit.corr.coefficient.real == 1.0
    assert at_limit.high_xpd_valid
    below = dualpole_corr_approx(2.0)
    assert below.corr.coefficient.real == 1.0  # clamped
    assert not below.high_xpd_valid


def test_dualpole_approx_asymmetric_ports():
    approx = dualpole_corr_approx(100.0, 400.0)
    assert approx.corr.matrix[0, 1].real == pytest.approx(0.2)
    assert approx.corr.matrix[1, 0].real == pytest.approx(0.1)


@given(st.floats(min_value=4.0, max_value=1e9))
@settings(max_examples=200, deadline=None)
def test_exact_approx_convergence_bound(chi):
    exact = dualpole_corr_exact(chi).coefficient.real
    approx = dualpole_corr_approx(chi).corr.coefficient.real
    assert abs(exact - approx) <= 2.0 * chi ** -1.5 + 1e-15


# ---------------------------------------------------------------------------
# matrix square root
# ---------------------------------------------------------------------------


def test_matrix_sqrt_identity():
    assert_allclose(matrix_sqrt_psd(np.eye(2)), np.eye(2), atol=1e-15)


def test_matrix_sqrt_all_ones():
    root = matrix_sqrt_psd(CorrelationMatrix.from_coefficient(1.0))
    assert_allclose(root, np.ones((2, 2)) / math.sqrt(2.0), atol=1e-12)


def test_matrix_sqrt_closed_form_half():
    # for [[1, r], [r, 1]]: diag (sqrt(1+r)+sqrt(1-r))/2, offdiag difference/2
    r = 0.5
    a = (math.sqrt(1.5) + math.sqrt(0.5)) / 2.0
    b = (math.sqrt(1.5) - math.sqrt(0.5)) / 2.0
    root = matrix_sqrt_psd(CorrelationMatrix.from_coefficient(r))
    assert_allclose(root.real, [[a, b], [b, a]], atol=1e-14)
    assert_allclose(root @ root, [[1, r], [r, 1]], atol=1e-14)


def test_matrix_sqrt_random_correlations():
    rng = np.random.default_rng(517)
    for _ in range(1000):
        rho = rng.uniform(0, 1) * np.exp(1j * rng.uniform(-math.pi, math.pi))
        corr = CorrelationMatrix.from_coefficient(rho)
        root = matrix_sqrt_psd(corr)
        assert np.linalg.norm(root @ root - corr.matrix, "fro") <= 1e-12
        assert np.max(np.abs(root - root.conj().T)) <= 1e-12
        assert np.linalg.eigvalsh(root)[0] >= -1e-12


def test_matrix_sqrt_rejects_indefinite():
    with pytest.raises(InvalidCorrelationError):
        matrix_sqrt_psd(np.array([[1.0, 1.2], [1.2, 1.0]]))


def test_matrix_sqrt_rejects_non_hermitian():
    with pytest.raises(InvalidCorrelationError):
        matrix_sqrt_psd(np.array([[1.0, 0.5], [0.2, 1.0]]))


# ---------------------------------------------------------------------------
# spatial correlation
# ---------------------------------------------------------------------------


def test_spatial_corr_zero_distance():
    assert spatial_corr(0.0, AodDistribution.isotropic()) == 1.0
    lap = AodDistribution.laplacian(0.4, 0.3)
    assert abs(spatial_corr(0.0, lap) - 1.0) < 1e-12


def test_spatial_corr_isotropic_table_spot_check():
    # 0.326 wavelengths is the tabulated 20 dB spacing, rounded to 3
    # decimals; the rounding moves rho by at most ~2e-3
    rho = spatial_corr(0.326, AodDistribution.isotropic())
    assert rho.imag == 0.0
    assert abs(rho.real - 0.198) < 2e-3


def test_spatial_corr_isotropic_first_null():
    d = J0_FIRST_ZERO / (2.0 * math.pi)
    assert abs(spatial_corr(d, AodDistribution.isotropic())) <= 1e-6


def test_spatial_corr_isotropic_matches_quadrature():
    # Bessel identity: uniform-AoD expectation equals J0(k d)
    rng = np.random.default_rng(91)
    iso = AodDistribution.isotropic()
    phi = (np.arange(65536) + 0.5) / 65536 * 2.0 * math.pi - math.pi
    for d in rng.uniform(0.0, 2.0, 100):
        oracle = np.exp(-1j * 2.0 * math.pi * d * np.sin(phi)).mean()
        assert abs(spatial_corr(d, iso) - oracle) < 1e-8


def test_spatial_corr_laplacian_matches_quadrature():
    rng = np.random.default_rng(92)
    for _ in range(25):
        d = rng.uniform(0.0, 3.0)
        mu = rng.uniform(-2.8, 2.8)
        sigma = rng.uniform(0.05, 1.2)
        got = spatial_corr(d, AodDistribution.laplacian(mu, sigma))
        ref = laplacian_rho_quadrature(d, mu, sigma)
        assert abs(got - ref) < 1e-8


def test_spatial_corr_magnitude_bounded():
    rng = np.random.default_rng(93)
    for _ in range(50):
        dist = AodDistribution.laplacian(rng.uniform(-3, 3), rng.uniform(0.02, 1.4))
        assert abs(spatial_corr(rng.uniform(0, 10), dist)) <= 1.0 + 1e-12


def test_spatial_corr_wavelength_scaling():
    iso = AodDistribution.isotropic()
    assert spatial_corr(0.25, iso, wavelength=1.0) == pytest.approx(
        spatial_corr(0.03, iso, wavelength=0.12), abs=1e-12
    )


def test_spatial_corr_rejects_negative_distance():
    with pytest.raises(ValueError):
        spatial_corr(-0.1, AodDistribution.isotropic())


def test_spatial_corr_matrix_is_hermitian_unit_diagonal():
    lap = AodDistribution.laplacian(0.7, 0.4)
    corr = spatial_corr_matrix(0.3, lap)
    assert corr.is_hermitian()
    assert corr.matrix[0, 0] == 1.0 and corr.matrix[1, 1] == 1.0
    assert corr.coefficient == pytest.approx(spatial_corr(0.3, lap))


def test_laplacian_pdf_integrates_to_one():
    # trapezoid on each smooth side; 2e6 points keeps the oracle's own
    # discretization error well below the 1e-10 budget
    for mu, sigma in [(0.0, 0.45), (1.2, 0.1), (-2.5, 0.9), (3.0, 0.3)]:
        dist = AodDistribution.laplacian(mu, sigma)
        left = np.linspace(-math.pi, mu, 2_000_001)
        right = np.linspace(mu, math.pi, 2_000_001)
        mass = np.trapezoid(dist.pdf(left), left) + np.trapezoid(dist.pdf(right), right)
        assert abs(mass - 1.0) < 1e-10


def test_aod_distribution_validation():
    with pytest.raises(ValueError):
        AodDistribution.laplacian(0.0, 0.0)
    with pytest.raises(ValueError):
        AodDistribution.laplacian(0.0, -0.1)
    with pytest.raises(ValueError):
        AodDistribution(kind="gaussian")


# ---------------------------------------------------------------------------
# equivalent spacing
# ---------------------------------------------------------------------------


def test_equivalent_spacing_target_one_is_zero():
    for dist in (AodDistribution.isotropic(), AodDistribution.laplacian(0.0, 0.4)):
        assert equivalent_spacing(SpacingQuery(1.0, dist)) == 0.0


def test_equivalent_spacing_isotropic_table_values():
    iso = AodDistribution.isotropic()
    for db in TABLE_RHO:
        d = equivalent_spacing(SpacingQuery(TABLE_RHO[db], iso))
        assert abs(d - TABLE_D_ISO[db]) <= 0.002, f"{db} dB"


def test_equivalent_spacing_right_inverse_isotropic():
    iso = AodDistribution.isotropic()
    for rho in np.arange(0.05, 0.951, 0.05):
        d = equivalent_spacing(SpacingQuery(float(rho), iso))
        assert abs(abs(spatial_corr(d, iso)) - rho) <= 1e-6


def test_equivalent_spacing_right_inverse_laplacian():
    lap = AodDistribution.laplacian(0.0, math.radians(26.0))
    for rho in np.arange(0.10, 0.951, 0.05):
        d = equivalent_spacing(SpacingQuery(float(rho), lap))
        assert abs(abs(spatial_corr(d, lap)) - rho) <= 1e-6


def test_equivalent_spacing_narrow_spread_ordering():
    # Concentrated departures decorrelate slower, so the Laplacian
    # spacing exceeds the isotropic one wherever the first-branch
    # inverse exists. At 30 degrees the first local minimum of |rho|
    # (about 0.156) sits above the smallest table coefficient, so that
    # single combination has no smallest-root solution and is skipped.
    iso = AodDistribution.isotropic()
    solved = 0
    for spread_deg in (10.0, 20.0, 26.0, 30.0):
        lap = AodDistribution.laplacian(0.0, math.radians(spread_deg))
        for rho in TABLE_RHO.values():
            d_iso = equivalent_spacing(SpacingQuery(rho, iso))
            try:
                d_lap = equivalent_spacing(SpacingQuery(rho, lap))
            except NoSolutionError:
                assert spread_deg == 30.0 and rho == min(TABLE_RHO.values())
                continue
            solved += 1
            assert d_lap >= d_iso, (spread_deg, rho)
    assert solved == 19


def test_equivalent_spacing_no_solution_reports_range():
    lap = AodDistribution.laplacian(0.0, math.radians(26.0))
    with pytest.raises(NoSolutionError, match="achievable range"):
        equivalent_spacing(SpacingQuery(0.01, lap))


def test_equivalent_spacing_wavelength_units():
    iso = AodDistribution.isotropic()
    d_unit = equivalent_spacing(SpacingQuery(0.5, iso))
    d_meters = equivalent_spacing(SpacingQuery(0.5, iso, wavelength=0.12))
    assert d_meters == pytest.approx(0.12 * d_unit, rel=1e-9)


def test_spacing_query_validation():
    iso = AodDistribution.isotropic()
    for bad in (0.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            SpacingQuery(bad, iso)
    with pytest.raises(ValueError):
        SpacingQuery(0.5, iso, wavelength=0.0)


# ---------------------------------------------------------------------------
# CorrelationMatrix container
# ---------------------------------------------------------------------------


def test_correlation_matrix_validation():
    with pytest.raises(InvalidCorrelationError):
        CorrelationMatrix(np.array([[0.9, 0.1], [0.1, 1.0]]))
    with pytest.raises(InvalidCorrelationError):
        CorrelationMatrix(np.array([[1.0, 1.3], [1.3, 1.0]]))
    with pytest.raises(InvalidCorrelationError):
        CorrelationMatrix(np.eye(3))
    with pytest.raises(InvalidCorrelationError):
        CorrelationMatrix(np.array([[1.0, math.nan], [0.0, 1.0]]))


def test_correlation_matrix_is_immutable():
    corr = CorrelationMatrix.from_coefficient(0.3)
    with pytest.raises(ValueError):
        corr.matrix[0, 1] = 0.9


@given(st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=-math.pi, max_value=math.pi))
@settings(max_examples=100, deadline=None)
def test_correlation_matrix_coefficient_roundtrip(mag, phase):
    rho = mag * complex(math.cos(phase), math.sin(phase))
    corr = CorrelationMatrix.from_coefficient(rho)
    assert corr.coefficient == rho
    assert corr.is_hermitian()
