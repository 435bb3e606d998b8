"""Segmenting a known number of subspaces by differentiating and dividing.

The pipeline per degree stage: fit the vanishing polynomials, pick the data
point closest to the arrangement by a first-order distance, read the
subspace's complement off the polynomial gradients at that point, then
divide the fitted polynomials by the recovered linear forms to remove the
subspace and repeat one degree lower. Labels come last, by smallest
residual against the recovered complements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import FitError, StageError
from .fitting import (
    DEFAULT_KAPPA,
    EmbeddedMatrix,
    criterion_rank,
    embed,
    null_space_polynomials,
    select_rank,
)
from .polynomial import PolynomialBasis, basis_gradients, lift_matrix
from .veronese import monomial_count

__all__ = [
    "SubspaceModel",
    "StageRecord",
    "Segmentation",
    "algebraic_distance2",
    "select_point",
    "model_at_point",
    "peel",
    "assign",
    "segment",
    "reject_outliers",
]

DEFAULT_DELTA = 0.02

# Singular values below this fraction of the largest are treated as zero in
# pseudo-inverses and gradient rank checks.
PINV_RTOL = 1e-10

# Points closer to the origin than this sit in every subspace and carry no
# directional information; they are never selected as representatives.
_MIN_POINT_NORM = 1e-12

# Representative candidates must have gradient magnitude above this fraction
# of the strongest gradient in the data: the vanishing-gradient exclusion at
# intersections, applied at floating-point scale.
_GRADIENT_FLOOR = 0.05

# Smallest/largest singular-value ratio above which a peeled stage is deemed
# to have no null space at all. Deliberately coarse: correct runs at 5% noise
# reach ~0.35 while wrong-subspace-count runs can sit lower, so only clearly
# degenerate stacks are rejected here.
_PEEL_NULLSPACE_RTOL = 0.5


@dataclass(frozen=True, eq=False)
class SubspaceModel:
    """One subspace: orthonormal basis of its complement plus its dimension."""

    complement_basis: np.ndarray = field(repr=False)
    dim: int
    representative: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.complement_basis, dtype=float))
        if B.ndim != 2 or B.shape[0] < B.shape[1]:
            raise ValueError(f"complement basis has invalid shape {B.shape}")
        D, c = B.shape
        if not 0 < self.dim < D or c != D - self.dim:
            raise ValueError(
                f"dim {self.dim} inconsistent with a {D}x{c} complement basis"
            )
        gram = B.T @ B
        if not np.allclose(gram, np.eye(c), atol=1e-10):
            raise ValueError("complement basis columns are not orthonormal")
        B = B.copy()
        B.flags.writeable = False
        object.__setattr__(self, "complement_basis", B)
        object.__setattr__(
            self, "representative", np.asarray(self.representative, dtype=float).copy()
        )

    @property
    def ambient_dim(self) -> int:
        return self.complement_basis.shape[0]

    def residuals(self, X) -> np.ndarray:
        """Per-point distance to the subspace along its complement."""
        X = np.asarray(X, dtype=float)
        return np.linalg.norm(np.atleast_2d(X) @ self.complement_basis, axis=1)


@dataclass(frozen=True)
class StageRecord:
    """Diagnostics for one degree stage of the segmentation loop."""

    degree: int
    nullity: int
    picked_index: int
    model_dim: int


@dataclass(frozen=True, eq=False)
class Segmentation:
    """Full segmentation output: models, labels, residuals, diagnostics.

    Labels index into `models`; -1 marks points set aside as outliers.
    """

    models: tuple[SubspaceModel, ...]
    labels: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    stages: tuple[StageRecord, ...] = ()

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.models)


def _values_and_gradients(P: PolynomialBasis, X):
    """Basis values (N, m) and gradients (N, D, m) at a batch of points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    values = P.evaluate(X)
    grads = basis_gradients(P, X)
    return values, grads


def algebraic_distance2(P: PolynomialBasis, x, kappa: float = DEFAULT_KAPPA):
    """First-order squared distance from x to the zero set of the basis.

    Computed as values @ pinv(gradients^T gradients) @ values^T, scaled by
    1/degree^2 so that degree * sqrt of the result approximates the
    Euclidean distance to the nearest subspace. Points where the gradient
    matrix vanishes (intersections, the origin) get +inf.

    The pseudo-inverse is truncated at the penalized-criterion rank of the
    gradient spectrum, not just at the absolute floor: when the basis holds
    more polynomials than the local complement dimension, the gradient
    matrix picks up spurious near-zero directions whose value/gradient
    ratios are O(1) noise and would swamp the distance.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    values, grads = _values_and_gradients(P, x)
    _, sv, rows = np.linalg.svd(grads, full_matrices=False)
    top = sv[:, 0]
    safe_top = np.where(top > 0.0, top, 1.0)
    # Per-point truncation scale: spurious directions shrink with the distance
    # itself, so the penalty floor is raised to the squared evident
    # displacement scale (degree * ||values|| / leading singular value).
    scale = _TRUNCATION_MARGIN * P.degree * np.linalg.norm(values, axis=1) / safe_top
    kappa_eff = np.maximum(kappa, scale**2)
    keep = _criterion_keep_mask(sv, kappa_eff)
    keep &= sv > PINV_RTOL * sv[:, :1]
    proj = np.einsum("nkm,nm->nk", rows, values)
    safe_sv = np.where(keep & (sv > 0.0), sv, 1.0)
    terms = np.where(keep, (proj / safe_sv) ** 2, 0.0)
    d2 = terms.sum(axis=1) / float(P.degree) ** 2
    d2 = np.where(top > 0.0, d2, np.inf)
    return float(d2[0]) if single else d2


# Headroom factor between the evident displacement scale and the smallest
# singular value treated as a genuine complement direction.
_TRUNCATION_MARGIN = 20.0


def _criterion_keep_mask(sv: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    """Per-row boolean mask keeping the criterion-rank leading singular values.

    Vectorized form of the spectral-gap criterion: minimize
    sv_{r+1}^2 / sum_{j<=r} sv_j^2 + kappa * r over r = 1..K per row;
    kappa may vary per row.
    """
    n, k = sv.shape
    energy = np.cumsum(sv**2, axis=1)
    trailing = np.concatenate([sv[:, 1:] ** 2, np.zeros((n, 1))], axis=1)
    safe_energy = np.where(energy > 0.0, energy, 1.0)
    crit = trailing / safe_energy + np.atleast_1d(kappa)[:, None] * np.arange(1, k + 1)
    ranks = np.argmin(crit, axis=1) + 1
    return np.arange(k) < ranks[:, None]


def select_point(
    P: PolynomialBasis,
    X,
    already_found: tuple[SubspaceModel, ...] = (),
    delta: float = DEFAULT_DELTA,
) -> int:
    """Index of the best representative point for the next subspace.

    With no models found yet this is the plain first-order distance argmin.
    Once some complements are known, the distance is damped by how far each
    point sits from the already-recovered subspaces, steering the choice
    onto a subspace not yet seen. Ties resolve to the lowest index.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d2 = algebraic_distance2(P, X)
    grad_norm = np.linalg.norm(basis_gradients(P, X), axis=(1, 2))
    valid = (
        np.isfinite(d2)
        & (np.linalg.norm(X, axis=1) >= _MIN_POINT_NORM)
        & (grad_norm > _GRADIENT_FLOOR * grad_norm.max())
    )
    if not valid.any():
        raise FitError("no candidate point has a nonzero polynomial gradient")
    if already_found:
        dist = np.sqrt(np.where(valid, d2, 0.0))
        denom = np.ones(X.shape[0])
        for model in already_found:
            denom *= model.residuals(X)
        score = (dist + delta) / (denom + delta)
    else:
        score = d2
    score = np.where(valid, score, np.inf)
    return int(np.argmin(score))


def model_at_point(P: PolynomialBasis, y, kappa: float = DEFAULT_KAPPA) -> SubspaceModel:
    """Subspace model from the polynomial gradients at one point.

    The gradients' dominant left singular subspace is the complement basis;
    its rank is chosen by the same penalized spectral criterion used on the
    embedded data matrix, and the subspace dimension is the ambient
    dimension minus that rank.
    """
    y = np.asarray(y, dtype=float).ravel()
    D = y.shape[0]
    grads = basis_gradients(P, y)
    left, sv, _ = np.linalg.svd(grads, full_matrices=True)
    if sv[0] <= 0.0:
        raise FitError("polynomial gradients vanish at the chosen point")
    decision = criterion_rank(sv, kappa, total=sv.size, min_rank=1, max_rank=sv.size)
    rank = decision.effective_rank
    if rank >= D:
        raise FitError(
            "gradients span the whole space; the point is not on any subspace "
            "at the working tolerance"
        )
    return SubspaceModel(
        complement_basis=left[:, :rank], dim=D - rank, representative=y
    )


def _peel_matrix(matrix: np.ndarray, degree: int, model: SubspaceModel) -> np.ndarray:
    """Stack the lift-multiplied copies of a fitting matrix for every normal."""
    blocks = [
        lift_matrix(b, degree).matrix @ matrix for b in model.complement_basis.T
    ]
    return np.hstack(blocks)


def _null_basis_from_matrix(matrix: np.ndarray, degree: int, dim: int, kappa: float):
    """Vanishing basis of a (possibly stacked) fitting matrix, plus SVD parts."""
    left, sv, _ = np.linalg.svd(matrix, full_matrices=False)
    count = monomial_count(degree, dim)
    decision = select_rank(sv, kappa, total=count)
    basis = null_space_polynomials(left, degree, dim, decision.nullity)
    return basis, decision, left, sv


def peel(
    P: PolynomialBasis,
    model: SubspaceModel,
    embedded: EmbeddedMatrix | np.ndarray,
    kappa: float = DEFAULT_KAPPA,
) -> PolynomialBasis:
    """Divide a degree-i fitting problem by the recovered subspace.

    Multiplying the embedded matrix by the lift of every complement
    direction and stacking gives a system whose left null space holds the
    degree-(i-1) polynomials vanishing on the remaining subspaces.
    """
    if P.degree < 2:
        raise ValueError("cannot peel below degree 1")
    matrix = embedded.matrix if isinstance(embedded, EmbeddedMatrix) else np.asarray(embedded)
    stacked = _peel_matrix(matrix, P.degree, model)
    sv = np.linalg.svd(stacked, compute_uv=False)
    if sv.size == monomial_count(P.degree - 1, P.dim) and sv[-1] > _PEEL_NULLSPACE_RTOL * sv[0]:
        raise FitError(
            "empty null space after division; the subspace count is likely "
            "wrong or the noise is too large"
        )
    basis, _, _, _ = _null_basis_from_matrix(stacked, P.degree - 1, P.dim, kappa)
    return basis


def assign(X, models) -> tuple[np.ndarray, np.ndarray]:
    """Label every point with its nearest subspace; ties go to the lowest index."""
    models = tuple(models)
    if not models:
        raise ValueError("need at least one model to assign against")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    residual_matrix = np.column_stack([m.residuals(X) for m in models])
    labels = np.argmin(residual_matrix, axis=1)
    residuals = residual_matrix[np.arange(X.shape[0]), labels]
    return labels, residuals


def segment(
    X,
    n: int,
    kappa: float = DEFAULT_KAPPA,
    delta: float = DEFAULT_DELTA,
) -> Segmentation:
    """Segment a union of n subspaces from unlabeled points.

    Runs the descending-degree loop: fit vanishing polynomials, select one
    representative point, differentiate to get that subspace's complement,
    peel the subspace off by polynomial division, and finally assign every
    point to its nearest recovered subspace.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if n < 1:
        raise ValueError("need n >= 1 subspaces")
    embedded = embed(X, n)
    points = embedded.points
    fit_matrix = embedded.matrix
    models: list[SubspaceModel] = []
    stages: list[StageRecord] = []
    for degree in range(n, 0, -1):
        try:
            basis, decision, left, sv = _null_basis_from_matrix(
                fit_matrix, degree, embedded.dim, kappa
            )
            idx = select_point(basis, points, tuple(models), delta)
            model = model_at_point(basis, points[idx], kappa)
            models.append(model)
            stages.append(
                StageRecord(
                    degree=degree,
                    nullity=decision.nullity,
                    picked_index=idx,
                    model_dim=model.dim,
                )
            )
            if degree > 1:
                # Carry the column space forward in compressed form; the left
                # factor times the singular values preserves spectrum and span.
                compressed = left * sv
                fit_matrix = _peel_matrix(compressed, degree, model)
        except FitError as exc:
            if isinstance(exc, StageError):
                raise
            raise StageError(degree, str(exc)) from exc
    labels, residuals = assign(X, models)
    return Segmentation(
        models=tuple(models),
        labels=labels,
        residuals=residuals,
        stages=tuple(stages),
    )


def reject_outliers(
    X,
    P: PolynomialBasis,
    mode: str = "percentile",
    threshold: float = 0.9,
    dof: int | None = None,
) -> np.ndarray:
    """Inlier mask from first-order distances to a fitted polynomial basis.

    "percentile" keeps points at or below the given quantile of the squared
    distances. "chi2" estimates the noise scale robustly (median of the
    squared distances against the chi-square median) and keeps points whose
    normalized distance is below the chi-square quantile at `threshold`.
    Distances are evaluated at the raw points: additive noise gives
    chi-square behavior in absolute units, not after per-point rescaling.
    `dof` defaults to the basis degree, exact for hyperplane arrangements
    when it matches the per-point codimension; pass the known value
    otherwise. Refitting on the surviving points is the caller's loop.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d2 = algebraic_distance2(P, X)
    d2 = np.where(np.isfinite(d2), d2, 0.0)
    # Distances at numerical-noise scale are exact zeros for thresholding:
    # noiseless on-arrangement data must never lose points.
    d2 = np.where(d2 > 1e-24, d2, 0.0)
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if mode == "percentile":
        mask = d2 <= np.quantile(d2, threshold)
    elif mode == "chi2":
        dof = P.degree if dof is None else int(dof)
        sigma2 = float(np.median(d2)) / stats.chi2.median(dof)
        if sigma2 <= 1e-300:
            mask = np.ones(X.shape[0], dtype=bool)
        else:
            mask = d2 / sigma2 <= stats.chi2.ppf(threshold, dof)
    else:
        raise ValueError(f"unknown outlier mode {mode!r}")
    if not mask.any():
        raise FitError("outlier rejection removed every point")
    return mask
