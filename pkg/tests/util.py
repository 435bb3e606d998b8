"""Shared builders for test arrangements."""

import numpy as np

from gpca._linalg import orthonormal_completion
from gpca.polynomial import HomogeneousPolynomial, PolynomialBasis, product_of_linear_forms
from gpca.synthgen import generate_from_bases

# Introductory configuration: the z-axis line union the xy-plane.
LINE_SPAN = np.array([[0.0], [0.0], [1.0]])
PLANE_SPAN = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])


def line_and_plane(points_per=120, noise=0.0, seed=1):
    """Line x1=x2=0 union plane x3=0 in R^3."""
    return generate_from_bases([LINE_SPAN, PLANE_SPAN], points_per, noise, seed=seed)


def two_coordinate_lines(points_per=200, noise=0.0, seed=7):
    """The x-axis union the y-axis in R^3; both sit inside the plane x3=0."""
    l1 = np.array([[1.0], [0.0], [0.0]])
    l2 = np.array([[0.0], [1.0], [0.0]])
    return generate_from_bases([l1, l2], points_per, noise, seed=seed)


def lines_plus_plane(points_per=200, noise=0.0, seed=11):
    """Two coordinate axes plus the plane x1 + x2 = 0: mixed dimensions."""
    l1 = np.array([[1.0], [0.0], [0.0]])
    l2 = np.array([[0.0], [1.0], [0.0]])
    plane = np.column_stack(
        [np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0), np.array([0.0, 0.0, 1.0])]
    )
    return generate_from_bases([l1, l2, plane], points_per, noise, seed=seed)


def monomial_polynomial(exponents, dim):
    """The single monomial x^exponents as a HomogeneousPolynomial."""
    from gpca.veronese import monomial_count, monomial_position

    degree = sum(exponents)
    coeffs = np.zeros(monomial_count(degree, dim))
    coeffs[monomial_position(exponents, dim)] = 1.0
    return HomogeneousPolynomial(degree, dim, coeffs)


def intro_quadratic_basis():
    """The basis {x1*x3, x2*x3} of the line-plus-plane configuration."""
    return PolynomialBasis(
        (monomial_polynomial((1, 0, 1), 3), monomial_polynomial((0, 1, 1), 3))
    )


def product_basis(spans, degree=None):
    """Orthonormalized span of all one-normal-per-subspace products."""
    from itertools import product as iter_product

    comps = [orthonormal_completion(np.atleast_2d(s)) for s in spans]
    dim = comps[0].shape[0]
    rows = []
    for combo in iter_product(*[range(c.shape[1]) for c in comps]):
        normals = [comps[i][:, j] for i, j in enumerate(combo)]
        rows.append(product_of_linear_forms(normals).coefficients)
    mat = np.vstack(rows)
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    coeffs = vt[s > 1e-10 * s[0]]
    n = len(spans)
    return PolynomialBasis(tuple(HomogeneousPolynomial(n, dim, c) for c in coeffs))


def brute_force_distance(x, spans):
    """Exact distance to a union of subspaces via orthogonal projections."""
    return min(np.linalg.norm(x - U @ (U.T @ x)) for U in spans)
