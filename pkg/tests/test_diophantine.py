import math

import numpy as np
import pytest

from starspec.diophantine import (
    bracketed_entry,
    continued_fraction,
    diophantine_quality,
    nearest_in_window,
    small_rho_subsequence,
    target_point,
    targeted_subsequence,
    torus_distance,
)
from starspec.errors import (
    InvalidConfig,
    InvalidTarget,
    OutOfComputedRange,
    RequiresIndependentLengths,
    TargetNotFound,
)
from starspec.kirchhoff import kirchhoff_spectrum
from starspec.models import EigenClass
from starspec.secular import eval_phi, eval_Psi


def test_sqrt2_convergents():
    cf = continued_fraction(math.sqrt(2.0), 5)
    assert cf.convergents == ((1, 1), (3, 2), (7, 5), (17, 12), (41, 29))
    assert not cf.terminated


def test_rational_terminates():
    cf = continued_fraction(1.5)
    assert cf.convergents == ((1, 1), (3, 2))
    assert cf.terminated


def test_golden_ratio_gives_fibonacci():
    cf = continued_fraction((1 + math.sqrt(5.0)) / 2, 6)
    assert cf.convergents == ((1, 1), (3, 2), (5, 3), (8, 5), (13, 8), (21, 13))


def test_below_one_skips_zero_numerator():
    cf = continued_fraction(1 / math.sqrt(2.0), 4)
    assert cf.convergents == ((1, 1), (2, 3), (5, 7), (12, 17))


def test_convergent_quality():
    x = math.pi
    for p, q in continued_fraction(x, 6).convergents:
        assert abs(x - p / q) <= 1.0 / q**2


def test_continued_fraction_rejects_non_positive():
    with pytest.raises(InvalidConfig):
        continued_fraction(0.0)


def test_bracketed_entry(sqrt2_pair):
    spectrum = kirchhoff_spectrum(sqrt2_pair, 20.0)
    lo, hi = math.pi / math.sqrt(2.0), math.pi
    entry = bracketed_entry(spectrum, lo, hi)
    assert lo < entry.tau < hi
    assert entry.kind == EigenClass.REGULAR


def test_bracketed_entry_errors(sqrt2_pair):
    spectrum = kirchhoff_spectrum(sqrt2_pair, 20.0)
    with pytest.raises(OutOfComputedRange):
        bracketed_entry(spectrum, 10.0, 25.0)
    with pytest.raises(TargetNotFound):
        bracketed_entry(spectrum, 2.0, 2.1)


def test_small_rho_subsequence(sqrt2_pair):
    report = small_rho_subsequence(sqrt2_pair, (0, 1), alpha=1.0, k_max=5)
    assert report.target == 0
    assert len(report.hits) >= 4
    assert list(report.indices) == sorted(set(report.indices))
    rho_of = {e.index: e.rho for e in kirchhoff_spectrum(sqrt2_pair, 150.0)}
    rhos = [rho_of[n] for n in report.indices]
    assert rhos[-1] < rhos[0]
    assert report.bound_constant == pytest.approx(
        max(h.distance * h.tau**2 for h in report.hits)
    )


def test_small_rho_truncated_by_range(sqrt2_pair):
    report = small_rho_subsequence(sqrt2_pair, alpha=0.0, k_max=8, R=30.0)
    assert report.truncated
    assert all(h.distance == 0 for h in report.hits)


def test_small_rho_rejects_bad_pair(sqrt2_pair):
    with pytest.raises(InvalidConfig):
        small_rho_subsequence(sqrt2_pair, (1, 1))


def test_small_rho_needs_independent(rational_12):
    with pytest.raises(RequiresIndependentLengths):
        small_rho_subsequence(rational_12)


@pytest.mark.parametrize("s", [0.1, 0.5, 2.0 / (1.0 + math.sqrt(2.0))])
def test_target_point(sqrt2_pair, s):
    y0 = target_point(sqrt2_pair, s)
    assert eval_phi(y0, sqrt2_pair) == pytest.approx(s)
    assert abs(eval_Psi(y0)) < 1e-10


def test_target_point_three_edges(three_edges):
    y0 = target_point(three_edges, 0.3)
    assert eval_phi(y0, three_edges) == pytest.approx(0.3)


def test_torus_distance_is_modulo_pi():
    points = np.array([[math.pi + 0.1, 0.0], [0.2, -0.3]])
    assert torus_distance(points, np.zeros(2)) == pytest.approx([0.1, 0.3])


def test_nearest_in_window(sqrt2_pair):
    entries = [e for e in kirchhoff_spectrum(sqrt2_pair, 50.0) if e.kind == EigenClass.REGULAR]
    y0 = np.array(entries[5].torus_point)
    entry, distance = nearest_in_window(entries, y0, 1e-9)
    assert entry.index == entries[5].index
    assert distance == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(TargetNotFound):
        nearest_in_window([], y0, 1.0)


def test_targeted_subsequence(sqrt2_pair):
    alpha = 1 + 1j
    report = targeted_subsequence(sqrt2_pair, alpha, 0.5, 600)
    assert report.target == pytest.approx(0.5 * alpha)
    assert report.windows_total >= 5
    assert report.windows_hit + len(report.flagged_windows) == report.windows_total
    assert report.hits
    windows = [h.window for h in report.hits]
    assert windows == sorted(set(windows))
    for hit in report.hits:
        assert hit.distance == pytest.approx(abs(hit.delta - report.target))


def test_targeted_rejects_target_outside_support(sqrt2_pair):
    with pytest.raises(InvalidTarget):
        targeted_subsequence(sqrt2_pair, 1.0, 1.0, 100)
    with pytest.raises(InvalidTarget):
        targeted_subsequence(sqrt2_pair, 1.0, -0.1, 100)


def test_targeted_zero_uses_convergents(sqrt2_pair):
    report = targeted_subsequence(sqrt2_pair, 1.0, 0.0, 200)
    assert report.target == 0
    assert report.windows_total > 0


def test_diophantine_quality(sqrt2_pair):
    quality = diophantine_quality(sqrt2_pair, gamma=1.0, kappa_norm_max=30)
    assert 0.0 < quality < 1.0
    # a larger box can only find smaller values
    assert diophantine_quality(sqrt2_pair, 1.0, 60) <= quality


def test_diophantine_quality_limits(sqrt2_pair, three_edges):
    with pytest.raises(InvalidConfig):
        diophantine_quality(sqrt2_pair, kappa_norm_max=20_000)
    with pytest.raises(InvalidConfig):
        diophantine_quality(three_edges, kappa_norm_max=1000)


@pytest.mark.parametrize("s", [0.2, 0.5, "support"])
def test_targeted_subsequence_converges(sqrt2_pair, s):
    s = sqrt2_pair.support_max if s == "support" else s
    report = targeted_subsequence(sqrt2_pair, 1 + 1j, s, 10_000)
    assert len(report.hits) >= 2
    assert report.hits[-1].distance * 10 <= report.hits[0].distance
    assert report.rate_exponent is not None
    assert report.rate_exponent > 0
