import math

import numpy as np
import pytest

from starspec.errors import CoincidentEigenfunction, ContourIllConditioned, SpectrumTooShort
from starspec.graph import new_star_graph
from starspec.kirchhoff import kirchhoff_spectrum
from starspec.models import EigenClass, LocateMethod, VerificationParams
from starspec.oracle import quadrature_norm_sq
from starspec.robin import (
    boundary_winding,
    certification_onset,
    certify_disk,
    eigenfunction_coefficients,
    robin_eigenvalue,
    robin_spectrum,
    round_winding,
    spectral_checks,
)
from starspec.secular import eval_psi


def test_gamma0():
    params = VerificationParams.for_graph(new_star_graph([1.0, 1.0, 1.0]))
    assert params.gamma0 == pytest.approx(1.0 / (48.0 * math.e))


def test_first_eigenvalue_equal_lengths(equal_pair):
    entry = kirchhoff_spectrum(equal_pair, 2.0)[0]
    rob = robin_eigenvalue(equal_pair, 1.0, entry)
    # cot z = −1/(2z)
    assert rob.z.real == pytest.approx(1.8366, abs=1e-4)
    assert abs(rob.z.imag) < 1e-12
    assert rob.delta.real == pytest.approx(0.906, abs=1e-3)
    assert abs(math.cos(rob.z.real) / math.sin(rob.z.real) + 1 / (2 * rob.z.real)) < 1e-10
    assert not rob.certified


def test_coincident_entries_do_not_move(equal_pair):
    entry = kirchhoff_spectrum(equal_pair, 4.0)[1]
    assert entry.kind == EigenClass.COINCIDENT
    rob = robin_eigenvalue(equal_pair, 2 + 3j, entry)
    assert rob.z == complex(math.pi)
    assert rob.delta == 0
    assert rob.certified
    assert rob.method == LocateMethod.EXACT


def test_alpha_zero_reproduces_kirchhoff(sqrt2_pair):
    spectrum = kirchhoff_spectrum(sqrt2_pair, 30.0)
    robin = robin_spectrum(sqrt2_pair, 0.0, 30.0, kirchhoff=spectrum)
    assert [r.z for r in robin] == [complex(e.tau) for e in spectrum]
    assert all(r.delta == 0 for r in robin)
    assert all(r.certified for r in robin)


def test_certified_far_above_onset(sqrt2_pair):
    alpha = 1.0 + 1.0j
    params = VerificationParams.for_graph(sqrt2_pair)
    spectrum = kirchhoff_spectrum(sqrt2_pair, 420.0)
    high = [e for e in spectrum if e.kind == EigenClass.REGULAR and e.tau > 400.0]
    assert high
    for entry in high:
        rob = robin_eigenvalue(sqrt2_pair, alpha, entry, params)
        assert rob.certified
        assert rob.winding == 1
        assert abs(rob.z - entry.tau) <= 8 * abs(alpha) * entry.rho / entry.tau * (1 + 1e-6)
        assert abs(eval_psi(rob.z, sqrt2_pair, alpha)) < 1e-8
        # first-order shift δ ≈ 2αρ
        assert abs(rob.delta - 2 * alpha * entry.rho) < 0.05 * abs(alpha)


def test_certify_disk_counts_one_root(sqrt2_pair):
    entry = next(e for e in kirchhoff_spectrum(sqrt2_pair, 300.0) if e.tau > 290.0)
    assert certify_disk(sqrt2_pair, 1.0, entry) == 1


def test_round_winding():
    assert round_winding(1.02 + 0.01j) == 1
    assert round_winding(-0.01j) == 0
    with pytest.raises(ContourIllConditioned):
        round_winding(0.5 + 0j)
    with pytest.raises(ContourIllConditioned):
        round_winding(complex("nan"))


def test_boundary_winding_counts_polynomial_roots():
    roots = np.array([1.0 + 1.0j, -2.0 + 0.5j, 3.0 - 1.0j])

    def f(z):
        return np.prod(z[..., None] - roots, axis=-1)

    assert boundary_winding(f, (-3.0, 4.0, -2.0, 2.0)) == 3
    assert boundary_winding(f, (0.0, 4.0, -2.0, 2.0)) == 2
    assert boundary_winding(f, (5.0, 6.0, -2.0, 2.0)) == 0


def test_real_coupling_keeps_spectrum_real(equal_pair):
    robin = robin_spectrum(equal_pair, 1.0, 7.0)
    assert len(robin) == 4
    assert robin[0].z.real == pytest.approx(1.8366, abs=1e-4)
    assert all(abs(r.eigenvalue.imag) < 1e-10 for r in robin)
    assert robin[1].z == complex(math.pi)
    assert robin[3].z == complex(2 * math.pi)
    # eigenvalues move up for α > 0
    assert all(r.delta.real >= 0 for r in robin)


def test_index_order_and_kinds(rational_12):
    kirchhoff = kirchhoff_spectrum(rational_12, 12.0)
    robin = robin_spectrum(rational_12, 1.0, 12.0, kirchhoff=kirchhoff)
    assert [r.index for r in robin] == [e.index for e in kirchhoff]
    assert [r.kind for r in robin] == [e.kind for e in kirchhoff]
    assert robin.covered_to == kirchhoff.covered_to


def test_imaginary_coupling_sign_and_sector(sqrt2_pair):
    robin = robin_spectrum(sqrt2_pair, 1j, 20.0)
    report = spectral_checks(robin, sqrt2_pair, 1j)
    assert report.count == len(robin)
    assert report.sign_violations == 0
    assert report.sector_violations == 0
    assert report.strip_bound == pytest.approx(2.0 / sqrt2_pair.total_length)
    assert all(r.eigenvalue.imag >= -1e-10 for r in robin)


def test_certification_onset(sqrt2_pair):
    kirchhoff = kirchhoff_spectrum(sqrt2_pair, 200.0)
    robin = robin_spectrum(sqrt2_pair, 0.5, 200.0, kirchhoff=kirchhoff)
    onset = certification_onset(robin)
    assert onset is not None
    tail = [r for r in robin if r.index >= onset and r.kind == EigenClass.REGULAR]
    assert all(r.certified for r in tail)
    params = VerificationParams.for_graph(sqrt2_pair)
    threshold = 2 * 0.5 / params.gamma0
    assert all(r.certified for r in robin if r.kind == EigenClass.REGULAR and r.tau > threshold)


def test_spectral_checks_needs_entries(sqrt2_pair):
    with pytest.raises(SpectrumTooShort):
        spectral_checks([], sqrt2_pair, 1.0)


def test_eigenfunction_coefficients(sqrt2_pair):
    alpha = 0.5 + 0.5j
    entry = kirchhoff_spectrum(sqrt2_pair, 5.0)[1]
    rob = robin_eigenvalue(sqrt2_pair, alpha, entry)
    coeffs = eigenfunction_coefficients(sqrt2_pair, alpha, rob)
    assert coeffs.kirchhoff_residual < 1e-8
    reference = quadrature_norm_sq(sqrt2_pair, rob.z, coeffs.beta)
    assert coeffs.l2_norm_sq == pytest.approx(reference, rel=1e-8)


def test_eigenfunction_of_real_root(equal_pair):
    rob = robin_eigenvalue(equal_pair, 0.0, kirchhoff_spectrum(equal_pair, 2.0)[0])
    coeffs = eigenfunction_coefficients(equal_pair, 0.0, rob)
    # β_j = 1/sin(π/2) = 1 on two unit edges: ‖u‖² = 2·1/2
    assert coeffs.beta == (1 + 0j, 1 + 0j)
    assert coeffs.l2_norm_sq == pytest.approx(1.0)


def test_coincident_eigenfunction_refused(equal_pair):
    rob = robin_eigenvalue(equal_pair, 1.0, kirchhoff_spectrum(equal_pair, 4.0)[1])
    with pytest.raises(CoincidentEigenfunction):
        eigenfunction_coefficients(equal_pair, 1.0, rob)


def _assert_block_solved(robin, graph, alpha):
    regular = [r for r in robin if r.kind == EigenClass.REGULAR]
    z = np.array([r.z for r in regular])
    assert np.all(np.isfinite(z))
    assert all(r.residual < 1e-6 for r in regular)
    gaps = np.abs(z[:, None] - z[None, :]) + np.eye(len(z))
    assert gaps.min() > 1e-8
    report = spectral_checks(robin, graph, alpha)
    assert report.sign_violations == 0
    assert report.sector_violations == 0
    return report


@pytest.mark.parametrize("alpha", [-2 + 2j, -2 - 2j, -3 + 0.1j])
def test_low_block_with_negative_coupling_three_edges(three_edges, alpha):
    kirchhoff = kirchhoff_spectrum(three_edges, 500.0)
    robin = robin_spectrum(three_edges, alpha, 500.0, kirchhoff=kirchhoff)
    assert [r.index for r in robin] == [e.index for e in kirchhoff]
    _assert_block_solved(robin, three_edges, alpha)


@pytest.mark.parametrize("alpha", [-2.0, -3 + 0.1j])
def test_low_block_with_negative_coupling_two_edges(sqrt2_pair, alpha):
    robin = robin_spectrum(sqrt2_pair, alpha, 300.0)
    assert len(robin) == len(kirchhoff_spectrum(sqrt2_pair, 300.0))
    _assert_block_solved(robin, sqrt2_pair, alpha)
    # below −Σ1/ℓ the bottom eigenvalue turns negative
    assert robin[0].eigenvalue.real < 0
    if alpha.imag == 0:
        assert all(abs(r.eigenvalue.imag) < 1e-10 for r in robin)


@pytest.mark.parametrize(
    "alpha", [-2 - 2j, -2 + 0j, -2 + 2j, -2j, 2j, 2 - 2j, 2 + 0j, 2 + 2j]
)
def test_coupling_square_three_edges(three_edges, alpha):
    kirchhoff = kirchhoff_spectrum(three_edges, 500.0)
    robin = robin_spectrum(three_edges, alpha, 500.0, kirchhoff=kirchhoff)
    report = _assert_block_solved(robin, three_edges, alpha)
    assert report.certification_onset is not None
    assert report.gap_violations_above_onset == 0
    for rob, entry in zip(robin, kirchhoff, strict=True):
        if entry.kind != EigenClass.REGULAR or not rob.certified:
            continue
        assert rob.winding == 1
        assert abs(rob.z - entry.tau) <= 8 * abs(alpha) * entry.rho / entry.tau * (1 + 1e-6)


@pytest.mark.parametrize("alpha", [1.0, 1j, 1 + 1j])
def test_shift_correction_decays_like_one_over_n(sqrt2_robin_5000, alpha):
    robin = sqrt2_robin_5000(alpha)
    n = np.array([r.index for r in robin if r.rho is not None])
    error = np.array([abs(r.delta - 2 * alpha * r.rho) for r in robin if r.rho is not None])
    scaled = n * error
    early = scaled[(n >= 100) & (n <= 1000)].max()
    late = scaled[(n >= 100) & (n <= 5000)].max()
    assert late <= 2 * early


def test_imaginary_coupling_strip(sqrt2_robin_5000, sqrt2_pair):
    robin = sqrt2_robin_5000(1j)
    lam = np.array([r.eigenvalue for r in robin])
    assert np.all(lam.imag >= -1e-10)
    window = lam[999:2000]
    bound = 2.0 / sqrt2_pair.total_length
    assert 0.74 <= window.imag.max() <= bound * (1 + 1e-3)


def test_conjugate_coupling_conjugates_spectrum(sqrt2_pair):
    alpha = 0.5 + 1j
    upper = robin_spectrum(sqrt2_pair, alpha, 30.0)
    lower = robin_spectrum(sqrt2_pair, alpha.conjugate(), 30.0)
    assert len(upper) == len(lower)
    z_upper = np.array([r.z for r in upper])
    z_lower = np.array([r.z for r in lower])
    assert np.allclose(z_lower, np.conj(z_upper), rtol=0.0, atol=1e-9)


def test_eigenvalue_is_smooth_in_coupling(sqrt2_pair):
    params = VerificationParams.for_graph(sqrt2_pair)
    spectrum = kirchhoff_spectrum(sqrt2_pair, 420.0)
    entries = [e for e in spectrum if e.kind == EigenClass.REGULAR and e.tau > 410.0]
    assert entries
    step = (1 + 1j) / 10
    for entry in entries:
        z = np.array(
            [robin_eigenvalue(sqrt2_pair, k * step, entry, params).z for k in range(11)]
        )
        second = (z[2:] - 2 * z[1:-1] + z[:-2]) / step**2
        assert np.all(np.abs(second) <= 10 * entry.rho / entry.tau)
