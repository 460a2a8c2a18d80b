"""
Command-line interface for the ``lupaxa.s2df`` package.

This module parses CLI arguments, resolves the run configuration, and
dispatches to the library routines for each subcommand.

Supported subcommands
---------------------
* ``train``   - fit an S²DF network to a point cloud.
* ``extract`` - evaluate a checkpoint on a grid and extract the offset level set.
* ``eval``    - score a reconstruction against ground truth.
* ``verify``  - run the analytic identity suites, or check a trained network.
* ``ablate``  - loss-combination, K, and Eikonal′ studies.
* ``example`` - print an example configuration or write a toy point cloud.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Standard library imports
# ---------------------------------------------------------------------------
import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

# ---------------------------------------------------------------------------
# Internal imports
# ---------------------------------------------------------------------------
from .ablation import (
    ABLATION_COLUMNS,
    STUDIES,
)
from .config import (
    RunConfig,
    load_manifest_flags,
    resolve_run_config,
    write_run_manifest,
)
from .example import (
    generate_example_config,
    generate_toy_cloud,
)
from .exceptions import (
    ConfigError,
    EmptyExtractionError,
    InputError,
    S2DFError,
    VerificationError,
)
from .extraction import (
    Polyline2,
    default_grid,
    evaluate_grid,
    extract_iso_2d,
    extract_iso_3d,
    s2df_to_udf,
)
from .fileio import (
    ply_has_faces,
    read_contours_csv,
    read_mesh,
    read_point_cloud,
    read_transform,
    write_contours_csv,
    write_grid_csv,
    write_history_csv,
    write_mesh,
    write_metric_csv,
    write_rows_csv,
    write_transform,
)
from .geometry import (
    NormTransform,
    PointCloud,
    TriangleMesh,
    normalize_cloud,
    sample_mesh_surface,
)
from .metrics import evaluate_reconstruction
from .network import load_checkpoint
from .oracles import (
    parse_primitive,
    run_identity_suite,
    sample_primitive_surface,
    verify_network,
)
from .trainer import (
    FINAL_CHECKPOINT,
    train,
)
from .utils import (
    RUN_DEFAULTS,
    configure_logging,
    configure_runtime,
    prepare_output_dir,
)
from .version import get_version

logger = logging.getLogger(__name__)

TRANSFORM_NAME = "transform.json"

#: Primitives checked by ``verify`` when none is given.
DEFAULT_VERIFY_PRIMITIVES = ("sphere", "plane", "circle", "segment", "arc")

#: Command-specific flags and their defaults. They are recorded in ``run.json``
#: and replayed when that manifest is passed back with ``--config``.
COMMAND_FLAGS: dict[str, dict[str, Any]] = {
    "train": {"plot": False},
    "extract": {"mesh_format": "ply", "grid_csv": False, "plot": False, "denormalize": False},
    "eval": {"recon": None, "transform": None},
    "verify": {"primitive": None, "checkpoint": None, "n_points": 1000},
    "ablate": {"study": "all"},
}

_PATH_FLAGS = frozenset({"recon", "transform"})

# ---------------------------------------------------------------------------
# CLI argument parsing
# ---------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    """Options shared by every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="More log output (repeatable).")
    common.add_argument("-q", "--quiet", action="count", default=0, help="Less log output.")
    common.add_argument("--config", type=Path, help="JSON or 'key = value' config file (a run.json manifest also works).")
    common.add_argument("--output-dir", dest="output_dir", help="Directory to write outputs into. Default: s2df-out")
    common.add_argument("--seed", type=int, help="Random seed. Default: 0")
    common.add_argument("--threads", type=int, help="Worker threads, 0 = auto. Default: $S2DF_THREADS or 0")
    common.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None, help="Require bit-reproducible runs. Default: on")
    common.add_argument("--K", dest="K", type=float, help="S2DF scale K. Default: 1000")
    common.add_argument("--shape", help="Shape label used in metric rows.")
    return common


def _add_training_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="Input point cloud (.xyz, .txt, .pts, .ply).")
    parser.add_argument("--dim", type=int, choices=[2, 3], help="Expected point dimension.")
    parser.add_argument("--iters", dest="iterations", type=int, help="Training iterations. Default: 10000")
    parser.add_argument("--lr0", type=float, help="Initial learning rate. Default: 3e-4")
    parser.add_argument("--decay-factor", dest="decay_factor", type=float, help="Learning-rate decay factor. Default: 0.18")
    parser.add_argument("--decay-iters", dest="decay_iters", help="Comma-separated decay milestones. Default: rescaled 4500,6000,7000,8000,9000")
    parser.add_argument("--alpha", type=float, help="Non-manifold sharpness. Default: 500")
    parser.add_argument("--weights", choices=["open", "watertight"], help="Loss-weight preset. Default: open")
    parser.add_argument("--loss", choices=["ma", "eikonal-prime", "eikonal_prime"], help="Regularizer. Default: ma")
    parser.add_argument("--batch-size", dest="batch_size", type=int, help="Points per batch. Default: 15000")
    parser.add_argument("--sigma", type=float, help="Off-surface noise scale. Default: 0.01")
    parser.add_argument("--hidden", help="Comma-separated hidden widths. Default: 256,256,256,256,256")
    parser.add_argument("--omega0", type=float, help="Sine frequency. Default: 30")
    parser.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, help="Iterations between checkpoints. Default: 1000")
    parser.add_argument("--chunk-size", dest="chunk_size", type=int, help="Points per jet evaluation. Default: 4096")
    parser.add_argument("--log-every", dest="log_every", type=int, help="Iterations between progress lines. Default: 100")


def _add_extraction_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", help="Trained S2DF1 checkpoint. Default: <output-dir>/model.s2df")
    parser.add_argument("--iso", type=float, help="Offset level of the unsigned distance. Default: 5e-3")
    parser.add_argument("--res", dest="resolution", type=int, help="Grid points per axis. Default: 512 (2D), 256 (3D)")


def _add_metric_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gt", help="Ground-truth point cloud or mesh.")
    parser.add_argument("--primitive", help="Ground-truth primitive, e.g. 'circle' or 'sphere:radius=0.7'.")
    parser.add_argument("--tau", type=float, help="F-score threshold. Default: 0.008")
    parser.add_argument("--n-samples", dest="n_samples", type=int, help="Surface samples per side. Default: 100000")


def build_parser() -> argparse.ArgumentParser:
    """
    Build the ``s2df`` argument parser.

    Returns
    -------
    argparse.ArgumentParser
        Parser with one subparser per command.
    """
    parser = argparse.ArgumentParser(prog="s2df", description="Learn scaled-squared distance fields from unoriented point clouds.")
    parser.add_argument("-V", "--version", action="store_true", help="Show program version and exit.")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_train = sub.add_parser("train", parents=[common], help="Train a network on a point cloud.")
    _add_training_options(p_train)
    p_train.add_argument("--plot", action="store_true", default=None, help="Also write a loss-history figure (needs the 'plot' extra).")

    p_extract = sub.add_parser("extract", parents=[common], help="Extract the offset level set of a trained network.")
    _add_extraction_options(p_extract)
    p_extract.add_argument("--mesh-format", dest="mesh_format", choices=["ply", "obj"], help="3D mesh format. Default: ply")
    p_extract.add_argument("--grid-csv", dest="grid_csv", action="store_true", default=None, help="Also dump the unsigned-distance grid as CSV.")
    p_extract.add_argument("--plot", action="store_true", default=None, help="Write a field figure (2D only; needs the 'plot' extra).")
    p_extract.add_argument("--denormalize", action="store_true", default=None, help="Map the result back to the input's original units.")

    p_eval = sub.add_parser("eval", parents=[common], help="Score a reconstruction against ground truth.")
    _add_extraction_options(p_eval)
    _add_metric_options(p_eval)
    p_eval.add_argument("--recon", type=Path, help="Reconstruction: mesh (.ply/.obj), contours (.csv) or point cloud.")
    p_eval.add_argument("--transform", type=Path, help="Normalization sidecar applied to file ground truth.")

    p_verify = sub.add_parser("verify", parents=[common], help="Check S2DF identities on primitives or a trained network.")
    p_verify.add_argument("--primitive", action="append", help="Primitive spec (repeatable). Default: all primitives")
    p_verify.add_argument("--checkpoint", help="Check a trained network instead of primitives.")
    p_verify.add_argument("--n", dest="n_points", type=int, help="Points per check. Default: 1000")

    p_ablate = sub.add_parser("ablate", parents=[common], help="Run ablation studies.")
    _add_training_options(p_ablate)
    _add_metric_options(p_ablate)
    p_ablate.add_argument("--iso", type=float, help="Offset level. Default: 5e-3")
    p_ablate.add_argument("--res", dest="resolution", type=int, help="Grid points per axis.")
    p_ablate.add_argument("--study", choices=[*STUDIES, "all"], help="Which study to run. Default: all")

    p_example = sub.add_parser("example", parents=[common], help="Print an example config or write a toy point cloud.")
    p_example.add_argument("--example-file", dest="example_file", type=Path, help="Write the example config here instead of stdout.")
    p_example.add_argument("--toy", help="Write a toy cloud sampled from this primitive (e.g. 'circle', 'arc').")
    p_example.add_argument("--points", type=int, default=1000, help="Points in the toy cloud. Default: 1000")
    p_example.add_argument("--toy-file", dest="toy_file", type=Path, help="Toy cloud path. Default: <output-dir>/<shape>.xyz")

    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """
    Parse command-line arguments for the ``s2df`` CLI.

    Returns
    -------
    argparse.Namespace
        The parsed arguments.
    """
    return build_parser().parse_args(argv)


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Flag values that map onto run settings (``None`` means not given)."""
    skip = {"primitive"} if args.command == "verify" else set()
    return {key: getattr(args, key) for key in RUN_DEFAULTS if key not in skip and getattr(args, key, None) is not None}


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _replay_command_flags(args: argparse.Namespace) -> dict[str, Any]:
    """
    Fill command-specific flags not given on the command line.

    Values come from the ``--config`` manifest when it was written by the
    same command, otherwise from :data:`COMMAND_FLAGS`. Returns the
    effective flags for the new manifest.
    """
    recorded = load_manifest_flags(args.config, args.command) if args.config else {}
    effective: dict[str, Any] = {}
    for name, default in COMMAND_FLAGS.get(args.command, {}).items():
        value = getattr(args, name, None)
        if value is None:
            value = recorded.get(name, default)
            if name in _PATH_FLAGS and value is not None:
                value = Path(value)
            setattr(args, name, value)
        effective[name] = value
    return effective


def _require(value: str | None, flag: str) -> Path:
    if value is None:
        raise ConfigError(f"{flag} is required")
    return Path(value)


def _checkpoint_path(cfg: RunConfig) -> Path:
    return Path(cfg.checkpoint) if cfg.checkpoint else Path(cfg.output_dir) / FINAL_CHECKPOINT


def _is_mesh_file(path: Path) -> bool:
    suffix = path.suffix.lower()
    return suffix == ".obj" or (suffix == ".ply" and ply_has_faces(path))


def _load_gt(cfg: RunConfig, transform: NormTransform | None) -> PointCloud | TriangleMesh:
    """
    Ground truth from ``--primitive`` or ``--gt``, given in the input's original units.

    With a transform, the result is mapped into the normalized frame the
    network was trained in.
    """
    if cfg.primitive:
        gt: PointCloud | TriangleMesh = sample_primitive_surface(parse_primitive(cfg.primitive, cfg.K), cfg.n_samples, cfg.seed + 1)
    else:
        path = _require(cfg.gt, "--gt or --primitive")
        gt = read_mesh(path) if _is_mesh_file(path) else read_point_cloud(path)
    if transform is None:
        return gt
    if isinstance(gt, TriangleMesh):
        return TriangleMesh(transform.apply(gt.vertices), gt.faces)
    return transform.apply_cloud(gt)


def _sidecar_transform(cfg: RunConfig) -> NormTransform | None:
    sidecar = _checkpoint_path(cfg).parent / TRANSFORM_NAME
    return read_transform(sidecar) if sidecar.is_file() else None


def _load_recon(path: Path) -> TriangleMesh | Polyline2 | PointCloud:
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return Polyline2(tuple(read_contours_csv(path)))
    if _is_mesh_file(path):
        return read_mesh(path)
    return read_point_cloud(path)


def _extract_from(cfg: RunConfig) -> tuple[Any, Polyline2 | TriangleMesh]:
    params = load_checkpoint(_checkpoint_path(cfg))
    udf = s2df_to_udf(evaluate_grid(params, default_grid(params.input_dim, cfg.resolution), cfg.chunk_size * 16), cfg.K)
    shape = extract_iso_2d(udf, cfg.iso) if params.input_dim == 2 else extract_iso_3d(udf, cfg.iso)
    if shape.is_empty:
        raise EmptyExtractionError(f"No level set at iso {cfg.iso:g}; the field never crosses it on the grid")
    return udf, shape


# ---------------------------------------------------------------------------
# Subcommands (no sys.exit here)
# ---------------------------------------------------------------------------


def cmd_train(args: argparse.Namespace, cfg: RunConfig, out: Path) -> list[Path]:
    """Normalize the input cloud, train, and write checkpoint, history, and transform."""
    cloud = read_point_cloud(_require(cfg.input, "--input"))
    if cfg.dim is not None and cloud.dim != cfg.dim:
        raise InputError(f"{cfg.input} holds {cloud.dim}D points but --dim {cfg.dim} was requested")
    normalized, transform = normalize_cloud(cloud)

    params, history = train(normalized, cfg.train_config(), checkpoint_dir=out)
    written = sorted(out.glob("ckpt_*.s2df")) + [out / FINAL_CHECKPOINT]
    write_history_csv(history.rows(), out / "history.csv")
    write_transform(transform, out / TRANSFORM_NAME)
    written += [out / "history.csv", out / TRANSFORM_NAME]
    if args.plot:
        from .plotting import plot_loss_history

        plot_loss_history(history, out / "history.png")
        written.append(out / "history.png")
    print(f"Trained {params.num_parameters()} parameters; final loss {history.records[-1].loss.total:.6e}")
    return written


def cmd_extract(args: argparse.Namespace, cfg: RunConfig, out: Path) -> list[Path]:
    """Write the contour (2D) or mesh (3D) at the configured iso level."""
    udf, shape = _extract_from(cfg)
    transform = _sidecar_transform(cfg) if args.denormalize else None
    if args.denormalize and transform is None:
        raise ConfigError(f"--denormalize needs {TRANSFORM_NAME} next to the checkpoint")

    written: list[Path] = []
    if isinstance(shape, Polyline2):
        components = [transform.invert(c) for c in shape.components] if transform else list(shape.components)
        write_contours_csv(components, out / "contours.csv")
        written.append(out / "contours.csv")
        if args.plot:
            from .plotting import plot_field_2d

            plot_field_2d(udf, out / "field.png", contours=shape, title=f"iso {cfg.iso:g}")
            written.append(out / "field.png")
        print(f"Extracted {len(shape.components)} contour components ({shape.num_vertices} vertices)")
    else:
        mesh = TriangleMesh(transform.invert(shape.vertices), shape.faces) if transform else shape
        path = out / f"mesh.{args.mesh_format}"
        write_mesh(mesh, path)
        written.append(path)
        if args.plot:
            logger.warning("--plot is only available for 2D fields")
        print(f"Extracted mesh with {len(mesh.vertices)} vertices and {len(mesh.faces)} faces")

    if args.grid_csv:
        write_grid_csv(udf.as_array(), out / "grid.csv")
        written.append(out / "grid.csv")
    return written


def cmd_eval(args: argparse.Namespace, cfg: RunConfig, out: Path) -> list[Path]:
    """Score a reconstruction file (or a checkpoint's extraction) and write ``metrics.csv``."""
    if args.recon is not None:
        recon = _load_recon(args.recon)
        transform = read_transform(args.transform) if args.transform else None
    else:
        _, recon = _extract_from(cfg)
        transform = read_transform(args.transform) if args.transform else _sidecar_transform(cfg)

    report = evaluate_reconstruction(recon, _load_gt(cfg, transform), cfg.n_samples, cfg.seed, cfg.tau)
    write_metric_csv([report.as_row(cfg.shape)], out / "metrics.csv")
    nc = "-" if report.nc_percent is None else f"{report.nc_percent:.4f}"
    print(f"CD(x1e3) {report.cd_l1_x1e3:.6f}  NC {nc}  F-score {report.fscore_percent:.4f}  (tau {report.threshold:g})")
    return [out / "metrics.csv"]


def cmd_verify(args: argparse.Namespace, cfg: RunConfig, out: Path) -> list[Path]:
    """Run identity suites (primitives) or jet checks (checkpoint); fail on any violation."""
    if args.checkpoint:
        report = verify_network(load_checkpoint(Path(args.checkpoint)), cfg.K, args.n_points, cfg.seed)
        write_rows_csv(out / "verify_network.csv", list(asdict(report)) + ["passed"], [{**asdict(report), "passed": int(report.passed)}])
        print(
            f"grad rel err {report.grad_rel_err:.3e}  hess rel err {report.hess_rel_err:.3e}  "
            f"median eigen gap {report.median_eigen_gap:.3e}  median alignment {report.median_alignment:.6f}"
        )
        if not report.passed:
            raise VerificationError("Network jets disagree with finite differences")
        return [out / "verify_network.csv"]

    rows, failed = [], []
    for spec in args.primitive or DEFAULT_VERIFY_PRIMITIVES:
        report = run_identity_suite(parse_primitive(spec, cfg.K), args.n_points, cfg.seed)
        failures = report.failures()
        rows.append({**asdict(report), "passed": int(not failures)})
        status = "ok" if not failures else "FAILED: " + ", ".join(failures)
        print(f"{spec:<24} {status}")
        if failures:
            failed.append(spec)
    write_rows_csv(out / "verify.csv", list(rows[0]), rows)
    if failed:
        raise VerificationError(f"Identity violations on: {', '.join(failed)}")
    return [out / "verify.csv"]


def cmd_ablate(args: argparse.Namespace, cfg: RunConfig, out: Path) -> list[Path]:
    """Run the selected studies and write one CSV per study."""
    cloud, transform = normalize_cloud(read_point_cloud(_require(cfg.input, "--input")))
    gt = _load_gt(cfg, transform)
    if isinstance(gt, TriangleMesh):
        gt = sample_mesh_surface(gt, cfg.n_samples, cfg.seed + 1)
    names = list(STUDIES) if args.study == "all" else [args.study]
    written = []
    for name in names:
        runner, filename = STUDIES[name]
        rows = runner(cloud, gt, cfg.train_config(), cfg.extraction_settings())
        write_rows_csv(out / filename, ABLATION_COLUMNS, [r.as_row() for r in rows])
        written.append(out / filename)
        for row in rows:
            status = f"CD {row.report.cd_l1_x1e3:.4f}" if row.report else "failed"
            print(f"{name:<8} {row.label:<12} {status}")
    return written


def cmd_example(args: argparse.Namespace, cfg: RunConfig) -> None:
    """Print/write the example config, or write a toy point cloud."""
    if args.toy is None:
        generate_example_config(example_file=args.example_file)
        return
    path = args.toy_file or Path(cfg.output_dir) / f"{args.toy.partition(':')[0]}.xyz"
    prepare_output_dir(path.parent)
    cloud = generate_toy_cloud(args.toy, args.points, cfg.seed, path)
    print(f"Wrote {len(cloud)} points to {path}")


COMMANDS = {
    "train": cmd_train,
    "extract": cmd_extract,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "ablate": cmd_ablate,
}


# ---------------------------------------------------------------------------
# Top-level controller
# ---------------------------------------------------------------------------


def run(args: argparse.Namespace) -> None:
    """
    High-level controller for the CLI.

    This function handles:

    * Version reporting (``--version``).
    * Logging and runtime (threads, determinism) setup.
    * Configuration resolution (defaults < ``--config`` < flags).
    * Dispatching to the subcommand and writing the ``run.json`` manifest.
    """
    if getattr(args, "version", False):
        print(get_version())
        return
    if args.command is None:
        raise ConfigError("No command given; see 's2df --help'")

    configure_logging(args.verbose - args.quiet)
    cfg = resolve_run_config(args.config, _overrides(args))

    if args.command == "example":
        cmd_example(args, cfg)
        return

    flags = _replay_command_flags(args)
    threads = configure_runtime(cfg.threads, cfg.deterministic)
    out = prepare_output_dir(Path(cfg.output_dir))
    assert out is not None
    written = COMMANDS[args.command](args, cfg, out)
    manifest = write_run_manifest(out, args.command, cfg, written, threads, flags)
    logger.info("Wrote %s", manifest)


def main(argv: Sequence[str] | None = None) -> None:
    """
    CLI entry point.

    Parses command-line arguments, invokes :func:`run`, and converts raised
    exceptions into exit codes and stderr messages.
    """
    args = parse_args(argv)

    try:
        run(args)
    except S2DFError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        sys.exit(exc.exit_code)
    except KeyboardInterrupt:
        print("Aborted by user", file=sys.stderr)
        sys.exit(130)
    except Exception as exc:  # pragma: no cover - last-resort safety net
        print(f"Unexpected error: {exc}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()


# EOF
