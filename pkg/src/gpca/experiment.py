"""Deterministic benchmark harness: algorithm roster over a noise grid.

Each (algorithm, noise, trial) cell regenerates the arrangement from a
per-trial seed, runs the algorithm (possibly warm-started by the algebraic
segmentation), and reports angle error, classification rate, iteration
count, and wall time. Rows are deterministic under a fixed master seed
except for the wall-time column.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .baselines import IterativeConfig, em_mixture_pca, k_subspaces
from .errors import FitError, InputError
from .fitting import DEFAULT_KAPPA
from .metrics import matched_accuracy
from .segmentation import DEFAULT_DELTA, segment
from .synthgen import ArrangementSpec, angle_error, generate

__all__ = ["ALGORITHMS", "ExperimentConfig", "TrialRow", "run_experiment", "rows_to_csv"]

ALGORITHMS = (
    "gpca",
    "pfa-stub",
    "ksub",
    "em",
    "gpca+ksub",
    "gpca+em",
    "gpca+ksub+em",
)

_PFA_MESSAGE = "polynomial factorization baseline is not implemented; out of scope"


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description: roster, noise grid, trials, and generation recipe."""

    algorithms: tuple[str, ...]
    noise_grid: tuple[float, ...]
    trials: int
    n: int
    ambient_dim: int = 3
    dims: tuple[int, ...] | None = None
    points_per_subspace: int = 200
    kappa: float = DEFAULT_KAPPA
    delta: float = DEFAULT_DELTA
    seed: int = 0
    max_iters: int = 300
    tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "noise_grid", tuple(float(s) for s in self.noise_grid))
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise InputError(f"unknown algorithms {unknown}; roster is {list(ALGORITHMS)}")
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if any(s < 0 for s in self.noise_grid):
            raise InputError("noise levels cannot be negative")
        if self.n < 1:
            raise InputError("need at least one subspace")
        dims = self.dims
        if dims is None:
            dims = (self.ambient_dim - 1,) * self.n
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))
        if len(self.dims) != self.n:
            raise InputError(f"{len(self.dims)} dims for n={self.n}")


@dataclass(frozen=True)
class TrialRow:
    """One results row; `kind` is "trial" for raw cells, "mean" for summaries."""

    kind: str
    algorithm: str
    sigma: float
    trial: int
    error_degrees: float | None
    classification_pct: float | None
    iterations: float | None
    wall_time_s: float | None
    status: str = "ok"


def _trial_seed(master: int, sigma_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(sigma_index, trial))


def _run_algorithm(name, X, true_models, true_labels, config, seed_seq):
    """Returns (error_degrees, classification_pct, iterations)."""
    n = config.n
    dims = config.dims
    iter_seed = int(seed_seq.generate_state(1)[0])
    base_cfg = IterativeConfig(max_iters=config.max_iters, tol=config.tol, seed=iter_seed)

    def finish(seg, iterations):
        return (
            angle_error(true_models, seg.models),
            100.0 * matched_accuracy(true_labels, seg.labels, size=n),
            iterations,
        )

    if name == "pfa-stub":
        raise FitError(_PFA_MESSAGE)
    if name == "gpca":
        seg = segment(X, n, config.kappa, config.delta)
        return finish(seg, 0)
    if name == "ksub":
        seg, iters = k_subspaces(X, n, dims, base_cfg)
        return finish(seg, iters)
    if name == "em":
        seg, _, iters = em_mixture_pca(X, n, dims, config=base_cfg)
        return finish(seg, iters)

    warm = segment(X, n, config.kappa, config.delta)
    warm_cfg = replace(base_cfg, init_models=warm.models)
    if name == "gpca+ksub":
        seg, iters = k_subspaces(X, n, dims, warm_cfg)
        return finish(seg, iters)
    if name == "gpca+em":
        seg, _, iters = em_mixture_pca(X, n, dims, config=warm_cfg)
        return finish(seg, iters)
    if name == "gpca+ksub+em":
        mid, _ = k_subspaces(X, n, dims, warm_cfg)
        seg, _, iters = em_mixture_pca(
            X, n, dims, config=replace(base_cfg, init_models=mid.models)
        )
        return finish(seg, iters)
    raise InputError(f"unknown algorithm {name!r}")


def run_experiment(config: ExperimentConfig) -> list[TrialRow]:
    """Run the sweep; trial rows in deterministic order, means appended."""
    rows: list[TrialRow] = []
    for sigma_index, sigma in enumerate(config.noise_grid):
        for trial in range(config.trials):
            seed_seq = _trial_seed(config.seed, sigma_index, trial)
            children = seed_seq.spawn(len(config.algorithms) + 1)
            gen_seed = int(children[0].generate_state(1)[0])
            spec = ArrangementSpec(
                ambient_dim=config.ambient_dim,
                dims=config.dims,
                points_per_subspace=config.points_per_subspace,
                noise_sigma=sigma,
                seed=gen_seed,
            )
            X, true_models, true_labels = generate(spec)
            for algo_index, name in enumerate(config.algorithms):
                start = time.perf_counter()
                try:
                    error, classification, iterations = _run_algorithm(
                        name, X, true_models, true_labels, config, children[algo_index + 1]
                    )
                    rows.append(
                        TrialRow(
                            kind="trial",
                            algorithm=name,
                            sigma=sigma,
                            trial=trial,
                            error_degrees=error,
                            classification_pct=classification,
                            iterations=iterations,
                            wall_time_s=time.perf_counter() - start,
                        )
                    )
                except FitError as exc:
                    rows.append(
                        TrialRow(
                            kind="trial",
                            algorithm=name,
                            sigma=sigma,
                            trial=trial,
                            error_degrees=None,
                            classification_pct=None,
                            iterations=None,
                            wall_time_s=time.perf_counter() - start,
                            status=f"failed: {exc}",
                        )
                    )
    rows.extend(_summaries(config, rows))
    return rows


def _summaries(config, rows):
    out = []
    for sigma in config.noise_grid:
        for name in config.algorithms:
            cell = [
                r
                for r in rows
                if r.kind == "trial"
                and r.algorithm == name
                and r.sigma == sigma
                and r.status == "ok"
            ]
            if not cell:
                continue
            out.append(
                TrialRow(
                    kind="mean",
                    algorithm=name,
                    sigma=sigma,
                    trial=-1,
                    error_degrees=float(np.mean([r.error_degrees for r in cell])),
                    classification_pct=float(
                        np.mean([r.classification_pct for r in cell])
                    ),
                    iterations=float(np.mean([r.iterations for r in cell])),
                    wall_time_s=float(np.mean([r.wall_time_s for r in cell])),
                )
            )
    return out


def mean_iterations(rows, algorithm, sigma=None) -> float:
    """Mean iteration count over successful trial rows of one algorithm."""
    cell = [
        r
        for r in rows
        if r.kind == "trial"
        and r.algorithm == algorithm
        and r.status == "ok"
        and (sigma is None or r.sigma == sigma)
    ]
    if not cell:
        raise ValueError(f"no successful rows for {algorithm!r}")
    return float(np.mean([r.iterations for r in cell]))


def mean_error(rows, algorithm, sigma=None) -> float:
    """Mean angle error over successful trial rows of one algorithm."""
    cell = [
        r
        for r in rows
        if r.kind == "trial"
        and r.algorithm == algorithm
        and r.status == "ok"
        and (sigma is None or r.sigma == sigma)
    ]
    if not cell:
        raise ValueError(f"no successful rows for {algorithm!r}")
    return float(np.mean([r.error_degrees for r in cell]))


def rows_to_csv(rows) -> str:
    """Render rows as CSV with shortest round-trip float formatting."""
    header = (
        "kind,algorithm,sigma,trial,error_degrees,classification_pct,"
        "iterations,wall_time_s,status"
    )

    def fmt(value):
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    lines = [header]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.kind,
                    r.algorithm,
                    fmt(r.sigma),
                    str(r.trial),
                    fmt(r.error_degrees),
                    fmt(r.classification_pct),
                    fmt(r.iterations),
                    fmt(r.wall_time_s),
                    r.status.replace(",", ";"),
                ]
            )
        )
    return "\n".join(lines) + "\n"
