"""Homogeneous polynomials as coefficient vectors over the canonical monomials.

Supports evaluation, gradients through the constant differentiation
matrices (never through numerical differences of the data), multiplication
and least-squares division by linear forms, and a plain-text round-trip
format used by the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .veronese import (
    derivative_operator,
    monomial_basis,
    monomial_count,
    monomial_position,
    veronese_lift,
)

__all__ = [
    "HomogeneousPolynomial",
    "PolynomialBasis",
    "LiftMatrix",
    "evaluate",
    "gradient",
    "basis_gradients",
    "lift_matrix",
    "multiply_by_linear",
    "product_of_linear_forms",
    "divide_by_linear",
    "to_text",
    "from_text",
]

# Coefficient stacks more rank-deficient than this are rejected at construction.
_INDEPENDENCE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class HomogeneousPolynomial:
    """A degree-n homogeneous polynomial in dim variables.

    `coefficients[p]` multiplies the monomial at position p of
    monomial_basis(degree, dim).
    """

    degree: int
    dim: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float).ravel()
        expected = monomial_count(self.degree, self.dim)
        if coeffs.shape[0] != expected:
            raise ValueError(
                f"degree {self.degree} in dim {self.dim} needs {expected} "
                f"coefficients, got {coeffs.shape[0]}"
            )
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, x):
        return evaluate(self, x)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


@dataclass(frozen=True, eq=False)
class PolynomialBasis:
    """An ordered set of linearly independent polynomials of one degree."""

    polynomials: tuple[HomogeneousPolynomial, ...]

    def __post_init__(self):
        polys = tuple(self.polynomials)
        if not polys:
            raise ValueError("a polynomial basis cannot be empty")
        degree = polys[0].degree
        dim = polys[0].dim
        if any(p.degree != degree or p.dim != dim for p in polys):
            raise ValueError("all polynomials must share degree and dim")
        stack = np.vstack([p.coefficients for p in polys])
        sv = np.linalg.svd(stack, compute_uv=False)
        if len(polys) > stack.shape[1] or sv[-1] <= _INDEPENDENCE_RTOL * sv[0]:
            raise ValueError("coefficient vectors are not linearly independent")
        object.__setattr__(self, "polynomials", polys)

    @property
    def degree(self) -> int:
        return self.polynomials[0].degree

    @property
    def dim(self) -> int:
        return self.polynomials[0].dim

    def __len__(self) -> int:
        return len(self.polynomials)

    def __iter__(self):
        return iter(self.polynomials)

    def coefficient_matrix(self) -> np.ndarray:
        """Stack of coefficient vectors, one polynomial per row (m x M)."""
        return np.vstack([p.coefficients for p in self.polynomials])

    def evaluate(self, x) -> np.ndarray:
        """Values of all basis polynomials: (m,) for one point, (N, m) batched."""
        lifted = veronese_lift(x, self.degree)
        return lifted @ self.coefficient_matrix().T


@dataclass(frozen=True, eq=False)
class LiftMatrix:
    """Matrix form of multiplication by the linear form b^T x.

    For any degree-(n-1) coefficient vector c and any x:
    (c @ veronese_lift(x, n-1)) * (b @ x) == (c @ matrix) @ veronese_lift(x, n).
    Shape is M_{n-1} x M_n.
    """

    b: np.ndarray = field(repr=False)
    degree: int
    matrix: np.ndarray = field(repr=False)


def evaluate(p: HomogeneousPolynomial, x):
    """p(x) as coefficients dotted with the lifted point; batched over rows."""
    lifted = veronese_lift(x, p.degree)
    value = lifted @ p.coefficients
    return float(value) if np.isscalar(value) or value.ndim == 0 else value


def gradient(p: HomogeneousPolynomial, x):
    """Gradient of p at x via the constant differentiation matrices.

    Returns (D,) for a single point or (N, D) for a batch. The data itself is
    never differenced; only the lift of degree n-1 is evaluated.
    """
    rows = _derivative_rows(p.degree, p.dim, p.coefficients[None, :])[:, 0, :]
    lifted = veronese_lift(x, p.degree - 1)
    return lifted @ rows.T


def basis_gradients(P: PolynomialBasis, x):
    """Gradients of all basis polynomials, one per column.

    Returns (D, m) for a single point x, or (N, D, m) for an (N, D) batch.
    """
    rows = _derivative_rows(P.degree, P.dim, P.coefficient_matrix())
    lifted = veronese_lift(x, P.degree - 1)
    if lifted.ndim == 1:
        return np.einsum("kmj,j->km", rows, lifted)
    return np.einsum("kmj,nj->nkm", rows, lifted)


def _derivative_rows(degree: int, dim: int, coeff_matrix: np.ndarray) -> np.ndarray:
    """(D, m, M_{n-1}) tensor of per-axis differentiated coefficient rows."""
    return np.stack(
        [coeff_matrix @ derivative_operator(degree, axis, dim).matrix for axis in range(dim)]
    )


def lift_matrix(b, degree: int) -> LiftMatrix:
    """Build the multiplication-by-(b^T x) matrix for degree n output.

    Row f of the result holds the degree-n coefficients of
    (monomial f of degree n-1) * (b^T x).
    """
    b = np.asarray(b, dtype=float).ravel()
    if degree < 1:
        raise ValueError("lift needs degree >= 1")
    dim = b.shape[0]
    mat = np.zeros((monomial_count(degree - 1, dim), monomial_count(degree, dim)))
    for mono in monomial_basis(degree - 1, dim):
        for var in range(dim):
            raised = list(mono.exponents)
            raised[var] += 1
            mat[mono.position, monomial_position(raised, dim)] += b[var]
    mat.flags.writeable = False
    return LiftMatrix(b=b.copy(), degree=degree, matrix=mat)


def multiply_by_linear(p: HomogeneousPolynomial, b) -> HomogeneousPolynomial:
    """The product p(x) * (b^T x), one degree higher."""
    lift = lift_matrix(b, p.degree + 1)
    return HomogeneousPolynomial(p.degree + 1, p.dim, p.coefficients @ lift.matrix)


def product_of_linear_forms(normals) -> HomogeneousPolynomial:
    """Polynomial vanishing on the union of the hyperplanes b_i^T x = 0."""
    normals = [np.asarray(b, dtype=float).ravel() for b in normals]
    if not normals:
        raise ValueError("need at least one linear form")
    dim = normals[0].shape[0]
    p = HomogeneousPolynomial(1, dim, normals[0])
    for b in normals[1:]:
        p = multiply_by_linear(p, b)
    return p


def divide_by_linear(p: HomogeneousPolynomial, b) -> tuple[HomogeneousPolynomial, float]:
    """Least-squares division of p by the linear form b^T x.

    Returns the degree-(n-1) quotient and the coefficient-space residual
    norm. The residual is ~0 exactly when b^T x divides p; with noisy
    coefficients it doubles as a divisibility diagnostic.
    """
    b = np.asarray(b, dtype=float).ravel()
    if np.linalg.norm(b) == 0.0:
        raise ValueError("cannot divide by the zero form")
    if p.degree < 1:
        raise ValueError("division needs degree >= 1")
    lift = lift_matrix(b, p.degree)
    # Solve c_low @ R = c in least squares; R always has full row rank for b != 0
    # because multiplication by a nonzero form is injective.
    c_low, _, rank, _ = np.linalg.lstsq(lift.matrix.T, p.coefficients, rcond=None)
    if rank < lift.matrix.shape[0]:
        raise ArithmeticError("division matrix unexpectedly rank deficient")
    residual = float(np.linalg.norm(c_low @ lift.matrix - p.coefficients))
    return HomogeneousPolynomial(p.degree - 1, p.dim, c_low), residual


def to_text(p: HomogeneousPolynomial) -> str:
    """One-line header `degree dim`, then the coefficients in canonical order."""
    coeffs = " ".join(repr(float(c)) for c in p.coefficients)
    return f"{p.degree} {p.dim}\n{coeffs}\n"


def from_text(text: str) -> HomogeneousPolynomial:
    """Inverse of to_text; round-trips exactly."""
    lines = [line for line in text.strip().splitlines() if line.strip()]
    if len(lines) != 2:
        raise ValueError("expected a header line and a coefficient line")
    try:
        degree, dim = (int(tok) for tok in lines[0].split())
        coeffs = np.array([float(tok) for tok in lines[1].split()])
    except ValueError as exc:
        raise ValueError(f"malformed polynomial text: {exc}") from exc
    return HomogeneousPolynomial(degree, dim, coeffs)
