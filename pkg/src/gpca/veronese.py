"""Monomial combinatorics of degree-n homogeneous polynomials in D variables.

Everything in the package hangs off one canonical monomial ordering:
exponent tuples sorted degree-lexicographically with the first variable
most significant. For degree 2 in three variables the order is

    x1^2, x1*x2, x1*x3, x2^2, x2*x3, x3^2

and coefficient vectors, embedded data matrices, and the constant
differentiation matrices all use positions in this order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "MonomialIndex",
    "DerivativeOperator",
    "monomial_count",
    "monomial_basis",
    "monomial_position",
    "veronese_lift",
    "derivative_operator",
]


@dataclass(frozen=True)
class MonomialIndex:
    """One monomial: per-variable exponents plus its position in the basis."""

    exponents: tuple[int, ...]
    position: int

    @property
    def degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True, eq=False)
class DerivativeOperator:
    """Constant matrix mapping a degree-n lift to the lift of its x_axis partial.

    For every x: d(veronese_lift(x, degree))/dx_axis == matrix @ veronese_lift(x, degree - 1).
    Each row has at most one nonzero entry, the exponent of x_axis in that
    row's monomial. `axis` is 0-based.
    """

    degree: int
    axis: int
    matrix: np.ndarray = field(repr=False)


def monomial_count(degree: int, dim: int) -> int:
    """Number of degree-n monomials in D variables: C(n + D - 1, D - 1)."""
    if degree < 0 or dim < 1:
        raise ValueError(f"need degree >= 0 and dim >= 1, got ({degree}, {dim})")
    count = math.comb(degree + dim - 1, dim - 1)
    if count > np.iinfo(np.intp).max:
        raise OverflowError(
            f"monomial count {count} for degree={degree}, dim={dim} exceeds "
            "addressable array sizes"
        )
    return count


@lru_cache(maxsize=None)
def monomial_basis(degree: int, dim: int) -> tuple[MonomialIndex, ...]:
    """All degree-n monomials in D variables, in the canonical order."""
    count = monomial_count(degree, dim)
    out = []
    for position, combo in enumerate(combinations_with_replacement(range(dim), degree)):
        exponents = [0] * dim
        for var in combo:
            exponents[var] += 1
        out.append(MonomialIndex(tuple(exponents), position))
    assert len(out) == count
    return tuple(out)


@lru_cache(maxsize=None)
def _position_table(degree: int, dim: int) -> dict[tuple[int, ...], int]:
    return {m.exponents: m.position for m in monomial_basis(degree, dim)}


def monomial_position(exponents, dim: int | None = None) -> int:
    """Position of an exponent tuple in the basis of its degree."""
    exponents = tuple(int(e) for e in exponents)
    if any(e < 0 for e in exponents):
        raise ValueError(f"negative exponent in {exponents}")
    if dim is None:
        dim = len(exponents)
    return _position_table(sum(exponents), dim)[exponents]


@lru_cache(maxsize=None)
def _exponent_matrix(degree: int, dim: int) -> np.ndarray:
    mat = np.array([m.exponents for m in monomial_basis(degree, dim)], dtype=np.int64)
    mat = mat.reshape(monomial_count(degree, dim), dim)
    mat.flags.writeable = False
    return mat


def veronese_lift(x, degree: int) -> np.ndarray:
    """Evaluate all degree-n monomials at x.

    x may be a single D-vector (returns shape (M,)) or an (N, D) batch of
    points (returns shape (N, M)), with M = monomial_count(degree, D).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    exps = _exponent_matrix(degree, pts.shape[1])
    out = np.ones((pts.shape[0], exps.shape[0]))
    for var in range(pts.shape[1]):
        col = exps[:, var]
        active = col > 0
        if active.any():
            out[:, active] *= pts[:, var][:, None] ** col[active][None, :]
    return out[0] if single else out


@lru_cache(maxsize=None)
def derivative_operator(degree: int, axis: int, dim: int) -> DerivativeOperator:
    """Constant matrix realizing d/dx_axis on degree-n coefficient vectors.

    Cached per (degree, axis, dim) since the same matrices are reused for
    every gradient evaluation. For degree 1 the lower lift is the scalar 1.
    """
    if not 0 <= axis < dim:
        raise ValueError(f"axis {axis} out of range for dim {dim}")
    if degree < 1:
        raise ValueError("differentiation needs degree >= 1")
    lower_positions = _position_table(degree - 1, dim)
    mat = np.zeros((monomial_count(degree, dim), monomial_count(degree - 1, dim)))
    for mono in monomial_basis(degree, dim):
        e = mono.exponents[axis]
        if e == 0:
            continue
        lowered = list(mono.exponents)
        lowered[axis] -= 1
        mat[mono.position, lower_positions[tuple(lowered)]] = float(e)
    mat.flags.writeable = False
    return DerivativeOperator(degree=degree, axis=axis, matrix=mat)
