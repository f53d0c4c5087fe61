"""Independent reference values: a finite-difference star Laplacian and a quadrature norm."""

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss
from scipy.sparse.linalg import eigs, eigsh

from starspec.errors import InvalidConfig
from starspec.models import StarGraph


def star_matrices(
    graph: StarGraph, alpha: complex, h: float
) -> tuple[sp.csr_matrix, np.ndarray]:
    """P1 stiffness matrix and lumped mass of H_α on a mesh of width about h.

    Node 0 is the central vertex; each edge adds its interior nodes in order from the
    vertex outwards. Outer ends carry the Dirichlet condition and are not unknowns.
    """
    alpha = complex(alpha)
    counts = [max(2, round(ell / h)) for ell in graph.lengths]
    widths = [ell / m for ell, m in zip(graph.lengths, counts, strict=True)]
    size = 1 + sum(m - 1 for m in counts)

    rows: list[int] = [0]
    cols: list[int] = [0]
    vals: list[complex] = [sum(1.0 / w for w in widths) + alpha]
    mass = np.empty(size)
    mass[0] = 0.5 * sum(widths)

    offset = 1
    for m, w in zip(counts, widths, strict=True):
        nodes = np.arange(offset, offset + m - 1)
        mass[nodes] = w
        rows.extend(nodes.tolist())
        cols.extend(nodes.tolist())
        vals.extend([2.0 / w] * nodes.size)
        left = np.concatenate(([0], nodes[:-1]))
        rows.extend(left.tolist() + nodes.tolist())
        cols.extend(nodes.tolist() + left.tolist())
        vals.extend([-1.0 / w] * (2 * nodes.size))
        offset += m - 1

    data = np.asarray(vals, dtype=complex)
    if alpha.imag == 0:
        data = data.real
    stiffness = sp.csr_matrix((data, (rows, cols)), shape=(size, size))
    return stiffness, mass


def finite_difference_eigenvalues(
    graph: StarGraph, alpha: complex, h: float = 1e-3, count: int = 10
) -> np.ndarray:
    """Lowest ``count`` eigenvalues of the discretized H_α, sorted by real part."""
    alpha = complex(alpha)
    stiffness, mass = star_matrices(graph, alpha, h)
    if count >= stiffness.shape[0] - 1:
        raise InvalidConfig(f"mesh has {stiffness.shape[0]} unknowns, too few for {count}")
    scale = sp.diags(1.0 / np.sqrt(mass))
    operator = (scale @ stiffness @ scale).tocsc()
    sigma = -2.0 * abs(alpha) ** 2 - 1.0
    if alpha.imag == 0:
        values = eigsh(operator, k=count, sigma=sigma, which="LM", return_eigenvectors=False)
    else:
        values = eigs(operator, k=count, sigma=sigma, which="LM", return_eigenvectors=False)
    values = np.asarray(values)
    return values[np.argsort(values.real)]


def quadrature_norm_sq(
    graph: StarGraph, z: complex, beta: tuple[complex, ...], order: int | None = None
) -> float:
    """Σ_j ∫_0^{ℓ_j} |β_j sin(zx)|² dx by Gauss–Legendre on each edge."""
    z = complex(z)
    total = 0.0
    for ell, b in zip(graph.lengths, beta, strict=True):
        n = order or max(64, int(2.0 * abs(z) * ell) + 32)
        t, w = leggauss(n)
        x = 0.5 * ell * (t + 1.0)
        total += 0.5 * ell * float(np.sum(w * np.abs(b * np.sin(z * x)) ** 2))
    return total
