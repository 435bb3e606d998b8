"""Command-line surface: generate, segment, discover, experiment, motion.

Every command is a pure function of its inputs, flags, and seed; repeated
runs produce byte-identical outputs except for wall-time columns. Exit
codes: 0 success, 2 input error, 3 fit failure, 4 discovery failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .discovery import discover_equal_dim, recursive_segment
from .errors import DiscoveryError, FitError, GpcaError, InputError
from .experiment import ExperimentConfig, run_experiment, rows_to_csv
from .fitting import DEFAULT_KAPPA, embed, fit_vanishing
from .motion import (
    convert_w_matrix,
    epipolar_lines,
    project_trajectories,
    read_correspondences,
    read_tracks,
    trajectory_matrix,
)
from .polynomial import to_text
from .segmentation import DEFAULT_DELTA, reject_outliers, segment
from .synthgen import ArrangementSpec, generate, generate_from_bases, load_dataset, save_dataset

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3
EXIT_DISCOVERY = 4


def _write_json(payload, path):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_text(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_points(path):
    X, sidecar = load_dataset(path)
    if X.size == 0:
        raise InputError(f"{path}: no data rows")
    return X, sidecar


def _model_payload(model):
    return {
        "dim": int(model.dim),
        "complement_basis": [[float(v) for v in row] for row in model.complement_basis],
        "representative": [float(v) for v in model.representative],
    }


def _segment_payload(command, seg, n, kappa, delta, basis=None):
    payload = {
        "command": command,
        "n": int(n),
        "kappa": float(kappa),
        "delta": float(delta),
        "dims": [int(m.dim) for m in seg.models],
        "models": [_model_payload(m) for m in seg.models],
        "labels": [int(v) for v in seg.labels],
        "residuals": [float(v) for v in seg.residuals],
        "stages": [
            {
                "degree": int(s.degree),
                "nullity": int(s.nullity),
                "picked_index": int(s.picked_index),
                "model_dim": int(s.model_dim),
            }
            for s in seg.stages
        ],
    }
    if basis is not None:
        payload["vanishing_basis"] = [to_text(p) for p in basis]
    return payload


def cmd_generate(args) -> int:
    try:
        spec_data = json.loads(Path(args.spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read spec {args.spec}: {exc}") from exc
    if not isinstance(spec_data, dict):
        raise InputError("spec must be a JSON object")
    try:
        bases = spec_data.pop("bases", None)
        spec = ArrangementSpec(
            ambient_dim=int(spec_data["ambient_dim"]),
            dims=tuple(spec_data["dims"]),
            points_per_subspace=int(spec_data["points_per_subspace"]),
            noise_sigma=float(spec_data.get("noise_sigma", 0.0)),
            seed=int(spec_data.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad arrangement spec: {exc}") from exc
    if bases is not None:
        X, models, labels = generate_from_bases(
            [np.array(b, dtype=float) for b in bases],
            spec.points_per_subspace,
            spec.noise_sigma,
            seed=spec.seed,
        )
    else:
        X, models, labels = generate(spec)
    csv_path, json_path = save_dataset(args.out, X, models, labels, spec)
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _parse_outliers(flag):
    mode, _, level = flag.partition(":")
    if mode not in ("percentile", "chi2") or not level:
        raise InputError(
            f"bad --outliers value {flag!r}; expected percentile:Q or chi2:LEVEL"
        )
    try:
        return mode, float(level)
    except ValueError as exc:
        raise InputError(f"bad outlier level in {flag!r}: {exc}") from exc


def cmd_segment(args) -> int:
    X, _ = _load_points(args.data)
    basis, _ = fit_vanishing(embed(X, args.n), args.kappa)
    outliers = np.zeros(X.shape[0], dtype=bool)
    if args.outliers:
        mode, level = _parse_outliers(args.outliers)
        inliers = reject_outliers(X, basis, mode, level)
        outliers = ~inliers
        X_fit = X[inliers]
    else:
        X_fit = X
    seg = segment(X_fit, args.n, args.kappa, args.delta)
    labels = np.full(X.shape[0], -1, dtype=int)
    residuals = np.full(X.shape[0], np.nan)
    labels[~outliers] = seg.labels
    residuals[~outliers] = seg.residuals
    payload = _segment_payload("segment", seg, args.n, args.kappa, args.delta, basis)
    payload["labels"] = [int(v) for v in labels]
    payload["residuals"] = [None if np.isnan(v) else float(v) for v in residuals]
    payload["outliers"] = [int(i) for i in np.flatnonzero(outliers)]
    _write_json(payload, args.out)
    return EXIT_OK


def cmd_discover(args) -> int:
    X, _ = _load_points(args.data)
    if args.equal_dim:
        result = discover_equal_dim(X, args.n_max, args.kappa)
        lines = ["equal-dimension discovery", f"  d: {result.d}", f"  n: {result.n}"]
        lines.append("rank table (level, degree, dim, M, rank, nullity)")
        for p in result.rank_table:
            lines.append(
                f"  l={p.level} i={p.degree} dim={p.ambient_dim} "
                f"M={p.embedded_dim} rank={p.rank} nullity={p.nullity}"
            )
        _write_text("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    _, report = recursive_segment(X, args.n_max, args.kappa, args.delta)
    _write_text(report.to_text(), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError("experiment config must be a JSON object")
    try:
        config = ExperimentConfig(
            algorithms=tuple(raw["algorithms"]),
            noise_grid=tuple(raw["noise_grid"]),
            trials=int(raw["trials"]),
            n=int(raw["n"]),
            ambient_dim=int(raw.get("ambient_dim", 3)),
            dims=tuple(raw["dims"]) if "dims" in raw else None,
            points_per_subspace=int(raw.get("points_per_subspace", 200)),
            kappa=float(raw.get("kappa", DEFAULT_KAPPA)),
            delta=float(raw.get("delta", DEFAULT_DELTA)),
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad experiment config: {exc}") from exc
    rows = run_experiment(config)
    _write_text(rows_to_csv(rows), args.out)
    return EXIT_OK


def cmd_motion(args) -> int:
    if args.mode == "epipolar":
        corr = read_correspondences(args.input)
        rays = corr / float(args.focal) if args.focal else corr
        data = epipolar_lines(rays)
        if args.n == "auto":
            from .discovery import count_hyperplanes

            n = count_hyperplanes(data.lines, args.n_max, args.kappa)
        else:
            n = int(args.n)
        seg = segment(data.lines, n, args.kappa, args.delta)
        labels = np.full(corr.shape[0], -1, dtype=int)
        labels[data.kept] = seg.labels
        payload = _segment_payload("motion-epipolar", seg, n, args.kappa, args.delta)
        payload["labels"] = [int(v) for v in labels]
        payload["residuals"] = [float(v) for v in seg.residuals]
        payload["excluded"] = [int(i) for i in data.excluded_indices]
        payload["epipoles"] = [
            [float(v) for v in m.complement_basis[:, 0]] for m in seg.models
        ]
        _write_json(payload, args.out)
        return EXIT_OK
    if args.mode == "affine":
        tracks = (
            convert_w_matrix(args.input)
            if args.format == "w-matrix"
            else read_tracks(args.input)
        )
        W = trajectory_matrix(tracks)
        points = project_trajectories(W)
        n = 2 if args.n == "auto" else int(args.n)
        seg = segment(points, n, args.kappa, args.delta)
        payload = _segment_payload("motion-affine", seg, n, args.kappa, args.delta)
        _write_json(payload, args.out)
        return EXIT_OK
    raise InputError(f"unknown motion mode {args.mode!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpca",
        description="Subspace segmentation by polynomial fitting, differentiation, and division",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a synthetic arrangement dataset")
    p.add_argument("--spec", required=True, help="arrangement spec JSON")
    p.add_argument("--out", required=True, help="output path prefix (.csv/.json)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("segment", help="segment a known number of subspaces")
    p.add_argument("--data", required=True, help="point-per-row CSV")
    p.add_argument("--n", type=int, required=True, help="number of subspaces")
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--outliers", default=None, help="percentile:Q or chi2:LEVEL")
    p.add_argument("--out", default=None, help="report JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("discover", help="discover subspace count and dimensions")
    p.add_argument("--data", required=True)
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument(
        "--equal-dim",
        action="store_true",
        help="assume equal dimensions and report (d, n) instead of recursing",
    )
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("experiment", help="run the benchmark sweep")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", default=None, help="results CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("motion", help="two-view or multiframe motion segmentation")
    p.add_argument("--mode", choices=("epipolar", "affine"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--n", default="2", help="motion count or 'auto'")
    p.add_argument("--n-max", dest="n_max", type=int, default=4)
    p.add_argument(
        "--focal",
        type=float,
        default=None,
        help="focal length in pixels; scales image coordinates to rays",
    )
    p.add_argument("--format", choices=("tracks", "w-matrix"), default="tracks")
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_motion)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DiscoveryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCOVERY
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except GpcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
