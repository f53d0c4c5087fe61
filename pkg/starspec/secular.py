"""Secular functions of the star graph and their closed-form derivatives.

All kernels accept scalars or numpy arrays. Trigonometric arguments are reduced
modulo π before use, so accuracy follows the float argument even for |x| ~ 1e9.
"""

import numpy as np

from starspec.config import DEFAULT_TOLERANCES, Tolerances
from starspec.errors import PoleProximity, ZeroArgument
from starspec.models import SecularPoint, StarGraph


def _out(value: np.ndarray):
    return value.item() if value.ndim == 0 else value


def reduce_mod_pi(x):
    """Representative of x modulo π in (−π/2, π/2], accurate for large |x|."""
    return np.arctan(np.tan(x))


def _reduced(x: np.ndarray, tol: Tolerances) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split x into (reduced real part, imaginary part, pole mask)."""
    if np.iscomplexobj(x):
        a = reduce_mod_pi(x.real)
        b = x.imag
    else:
        a = reduce_mod_pi(x)
        b = np.zeros_like(a)
    near = (np.abs(a) < tol.pole_tol) & (np.abs(b) < tol.pole_tol)
    return a, b, near


def _raise_on_pole(near: np.ndarray) -> None:
    if np.any(near):
        raise PoleProximity("argument within pole tolerance of πZ")


def cot_reduced(x, tol: Tolerances = DEFAULT_TOLERANCES):
    """cot(x) after reducing Re x modulo π.

    Complex arguments use cot(a+ib) = (sin 2a − i sinh 2b) / (2(sinh²b + sin²a)),
    saturating to ∓i once |b| exceeds the imaginary guard.
    """
    x = np.asarray(x)
    a, b, near = _reduced(x, tol)
    _raise_on_pole(near)
    if not np.iscomplexobj(x):
        return _out(np.cos(a) / np.sin(a))

    saturated = np.abs(b) > tol.imag_guard
    b_safe = np.where(saturated, 0.0, b)
    denom = 2.0 * (np.sinh(b_safe) ** 2 + np.sin(a) ** 2)
    value = (np.sin(2.0 * a) - 1j * np.sinh(2.0 * b_safe)) / denom
    value = np.where(saturated, -1j * np.sign(b), value)
    return _out(value)


def _sum_of_products(c: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Σ_j c_j Π_{k≠j} s_k along the last axis via prefix/suffix products."""
    ones = np.ones_like(s[..., :1])
    prefix = np.cumprod(np.concatenate([ones, s[..., :-1]], axis=-1), axis=-1)
    suffix = np.cumprod(np.concatenate([ones, s[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return np.sum(c * prefix * suffix, axis=-1)


def eval_FN(y):
    """F_N(y) = Σ_j cos(y_j) Π_{k≠j} sin(y_k)."""
    y = np.asarray(y)
    return _out(_sum_of_products(np.cos(y), np.sin(y)))


def eval_FD(y):
    """F_D(y) = Π_j sin(y_j)."""
    y = np.asarray(y)
    return _out(np.prod(np.sin(y), axis=-1))


def _edge_args(z, graph: StarGraph) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z)
    if np.any(z == 0):
        raise ZeroArgument("secular functions are not defined at z = 0")
    return z, z[..., None] * graph.ell


def eval_psi(z, graph: StarGraph, alpha: complex = 0.0, tol: Tolerances = DEFAULT_TOLERANCES):
    """ψ_α(z) = −Σ_j cot(zℓ_j) − α/z."""
    z, y = _edge_args(z, graph)
    cot = np.asarray(cot_reduced(y, tol))
    value = -np.sum(cot, axis=-1)
    if alpha != 0:
        value = value - alpha / z
    return _out(np.asarray(value))


def _sin_reduced(y: np.ndarray, tol: Tolerances) -> tuple[np.ndarray, np.ndarray]:
    """(sin, cos) of y reduced modulo π, plus a mask of saturated imaginary parts."""
    a, b, near = _reduced(y, tol)
    _raise_on_pole(near)
    saturated = np.abs(b) > tol.imag_guard
    if np.iscomplexobj(y):
        yr = a + 1j * np.where(saturated, 0.0, b)
    else:
        yr = a
    return np.sin(yr), np.cos(yr), saturated


def eval_psi0_prime(z, graph: StarGraph, tol: Tolerances = DEFAULT_TOLERANCES):
    """ψ₀′(z) = Σ_j ℓ_j / sin²(zℓ_j)."""
    z, y = _edge_args(z, graph)
    s, _, saturated = _sin_reduced(y, tol)
    terms = np.where(saturated, 0.0, graph.ell / s**2)
    return _out(np.sum(terms, axis=-1))


def eval_psi0_second(z, graph: StarGraph, tol: Tolerances = DEFAULT_TOLERANCES):
    """ψ₀″(z) = −2 Σ_j ℓ_j² cos(zℓ_j) / sin³(zℓ_j)."""
    z, y = _edge_args(z, graph)
    s, c, saturated = _sin_reduced(y, tol)
    terms = np.where(saturated, 0.0, graph.ell**2 * c / s**3)
    return _out(-2.0 * np.sum(terms, axis=-1))


def eval_psi_prime(
    z, graph: StarGraph, alpha: complex = 0.0, tol: Tolerances = DEFAULT_TOLERANCES
):
    """ψ_α′(z) = ψ₀′(z) + α/z²."""
    value = np.asarray(eval_psi0_prime(z, graph, tol))
    if alpha != 0:
        value = value + alpha / np.asarray(z) ** 2
    return _out(value)


def eval_Psi(y, tol: Tolerances = DEFAULT_TOLERANCES):
    """Ψ(y) = −Σ_j cot(y_j) on the torus."""
    y = np.asarray(y, dtype=float)
    return _out(-np.sum(np.asarray(cot_reduced(y, tol)), axis=-1))


def eval_phi(y, graph: StarGraph, tol: Tolerances = DEFAULT_TOLERANCES):
    """Φ(y) = 2 / Σ_j ℓ_j(1 + cot² y_j), extended by 0 near the singular strata."""
    y = np.asarray(y, dtype=float)
    a = reduce_mod_pi(y)
    singular = np.any(np.abs(a) < tol.pole_tol, axis=-1)
    s2 = np.where(np.abs(a) < tol.pole_tol, 1.0, np.sin(a) ** 2)
    value = 2.0 / np.sum(graph.ell / s2, axis=-1)
    return _out(np.where(singular, 0.0, value))


def secular_point(y, tol: Tolerances = DEFAULT_TOLERANCES) -> SecularPoint:
    y = np.asarray(y, dtype=float)
    f_d = float(eval_FD(y))
    psi = None
    if abs(f_d) > 0:
        try:
            psi = float(eval_Psi(y, tol))
        except PoleProximity:
            psi = None
    return SecularPoint(y=tuple(y.tolist()), f_n=float(eval_FN(y)), f_d=f_d, psi=psi)


def psi_sign(tau, graph: StarGraph) -> np.ndarray:
    """sign Ψ(τℓ) = −sign(F_N·F_D); defined right up to the poles."""
    y = np.asarray(tau, dtype=float)[..., None] * graph.ell
    return -np.sign(eval_FN(y) * eval_FD(y))


# --- entire form of the secular equation ---


def _scaled_trig(z: np.ndarray, ell: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """cos(zℓ)·e^{−|Im z|ℓ} and sin(zℓ)/z·e^{−|Im z|ℓ}, overflow free."""
    z = np.where(z.imag < 0, -z, z)  # both functions are even in z
    a = z.real[..., None] * ell
    b = z.imag[..., None] * ell
    up = np.exp(1j * a - 2.0 * b)
    down = np.exp(-1j * a)
    cos_s = 0.5 * (up + down)
    zz = z[..., None]
    small = np.abs(zz * ell) < 1e-4
    zz_safe = np.where(small, 1.0, zz)
    sin_over_z = (up - down) / (2j * zz_safe)
    w = (zz * ell) ** 2
    series = ell * (1.0 - w / 6.0 + w**2 / 120.0) * np.exp(-b)
    return cos_s, np.where(small, series, sin_over_z)


def secular_entire(z, graph: StarGraph, alpha: complex = 0.0, scaled: bool = False):
    """E(z) = Σ_j cos(zℓ_j) Π_{k≠j} s_k(z) + α Π_j s_j(z), s_k(z) = sin(zℓ_k)/z.

    E is even in z, hence entire in λ = z²; its zeros are the eigenvalues of H_α with
    multiplicity, including λ ≤ 0 and points of the Dirichlet spectrum. With
    ``scaled=True`` the value is multiplied by e^{−|Im z||Γ|} (same zeros and phase).
    """
    z = np.asarray(z, dtype=complex)
    cos_s, sin_s = _scaled_trig(z, graph.ell)
    value = _sum_of_products(cos_s, sin_s) + alpha * np.prod(sin_s, axis=-1)
    if not scaled:
        value = value * np.exp(np.abs(z.imag) * graph.total_length)
    return _out(value)


def secular_entire_lambda(lam, graph: StarGraph, alpha: complex = 0.0, scaled: bool = True):
    """E as a function of the spectral parameter λ."""
    return secular_entire(np.sqrt(np.asarray(lam, dtype=complex)), graph, alpha, scaled=scaled)
