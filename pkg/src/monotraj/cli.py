"""``monotraj`` command line: simulate, reconstruct, evaluate, plot.

Exit status is 0 on success, 1 for data or runtime errors and 2 for usage
errors (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .dataset import DatasetDirectory, find_datasets
from .errors import ConfigError, FormatError, MonotrajError, NoOverlapError
from .formats import read_gt_trajectory, read_tracks, read_trajectories, write_tracks, write_trajectories, TRAJECTORY_FIELDS
from .metrics import REPORT_NOTE, compare_strategies, format_table, mota, sequence_error, match_trajectories, trajectory_error
from .pipeline import MODES, reconstruct_sequence
from .plot import Series, trajectory_svg
from .reconstruction import check_window, spec_database_from_env
from .rotation2d import STRATEGIES
from .simulator import BUILTIN_NAMES, builtin_scenario, generate_scenario, load_config

log = logging.getLogger("monotraj")


class CommandError(Exception):
    """A data or runtime failure that should end the command with status 1."""


@dataclass(frozen=True)
class PipelineConfig:
    strategy: str = "pca"
    window: int = 5
    mode: str = "gt"
    iou_threshold: float = 0.5
    max_gap: int = 10

    def validate(self) -> "PipelineConfig":
        if self.strategy not in STRATEGIES:
            raise ConfigError("strategy", f"must be one of {', '.join(STRATEGIES)}, got {self.strategy!r}")
        try:
            check_window(self.window)
        except ValueError as exc:
            raise ConfigError("window", str(exc)) from None
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {self.mode!r}")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ConfigError("iou_threshold", f"must be in (0, 1], got {self.iou_threshold}")
        if isinstance(self.max_gap, bool) or not isinstance(self.max_gap, int) or self.max_gap < 0:
            raise ConfigError("max_gap", f"must be a non-negative integer, got {self.max_gap!r}")
        return self

    @classmethod
    def resolve(cls, args: argparse.Namespace, config_path=None) -> "PipelineConfig":
        """Defaults, then the config file, then flags given on the command line."""
        values = {}
        if config_path is not None:
            try:
                data = json.loads(Path(config_path).read_text())
            except OSError as exc:
                raise CommandError(f"{config_path}: {exc.strerror or exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(str(config_path), f"invalid JSON ({exc})") from None
            if not isinstance(data, dict):
                raise ConfigError(str(config_path), "expected a JSON object")
            known = {f.name for f in fields(cls)}
            for key, value in data.items():
                if key not in known:
                    raise ConfigError(key, "unknown pipeline setting")
                values[key] = value
        for f in fields(cls):
            flag = getattr(args, f.name, None)
            if flag is not None:
                values[f.name] = flag
        return cls(**values).validate()


# -- simulate ------------------------------------------------------------------


def _simulate_one(config, out_dir, specs):
    return generate_scenario(config, out_dir, specs)


def cmd_simulate(args) -> int:
    specs = spec_database_from_env()
    if (args.config is None) == (args.builtin is None):
        raise CommandError("give either a scenario config file or --builtin NAME")
    out = Path(args.out)
    if args.builtin is not None:
        if args.builtin == "all":
            jobs = [(builtin_scenario(n), out / n) for n in BUILTIN_NAMES]
        elif args.builtin in BUILTIN_NAMES:
            jobs = [(builtin_scenario(args.builtin), out)]
        else:
            raise CommandError(f"unknown builtin scenario {args.builtin!r}; choose from {', '.join(BUILTIN_NAMES)} or all")
    else:
        jobs = [(load_config(args.config), out)]
    if args.seed is not None:
        jobs = [(replace(c, rng_seed=args.seed), d) for c, d in jobs]
    for config, _ in jobs:
        config.validate(specs)

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_simulate_one, c, d, specs) for c, d in jobs]
            manifests = [f.result() for f in futures]
    else:
        manifests = [_simulate_one(c, d, specs) for c, d in jobs]

    for (_, out_dir), m in zip(jobs, manifests):
        drones = ", ".join(f"id {d['id']} {d['class']} ({d['visible_frames']} frames)" for d in m["drones"])
        print(f"{m['name']}: {m['frames']} frames, {m['masks']} masks, drones: {drones} -> {out_dir}")
    return 0


# -- reconstruct -----------------------------------------------------------------


def _single_dataset(path) -> DatasetDirectory:
    found = find_datasets(path)
    if not found:
        raise CommandError(f"{path}: not a dataset directory (no camera.json)")
    if len(found) > 1:
        raise CommandError(f"{path}: contains {len(found)} datasets; pass one of them")
    return DatasetDirectory(found[0], spec_database_from_env())


def cmd_reconstruct(args) -> int:
    cfg = PipelineConfig.resolve(args, args.config)
    sequence = _single_dataset(args.data_dir)
    tracks = read_tracks(args.tracks) if args.tracks else None
    result = reconstruct_sequence(
        sequence,
        strategy=cfg.strategy,
        window=cfg.window,
        specs=sequence.specs,
        mode=cfg.mode,
        iou_threshold=cfg.iou_threshold,
        max_gap=cfg.max_gap,
        tracks=tracks,
    )
    for tid, message in sorted(result.skipped.items()):
        print(f"warning: track {tid}: {message}; skipped", file=sys.stderr)
    out = Path(args.out) if args.out else sequence.path / f"trajectory_{cfg.strategy}.csv"
    write_trajectories(out, result.trajectories)
    if args.tracks_out:
        write_tracks(args.tracks_out, result.tracks)
    rows = sum(len(t) for t in result.trajectories)
    print(f"{sequence.name}: {len(result.trajectories)} track(s), {rows} rows, strategy {cfg.strategy}, window {cfg.window} -> {out}")
    return 0


# -- evaluate -------------------------------------------------------------------


def _write_report(path: Path, report: dict):
    try:
        path.write_text(json.dumps(report, indent=2, sort_keys=False) + "\n")
    except OSError as exc:
        raise CommandError(f"{path}: {exc.strerror or exc}") from None


def _evaluate_prediction(args, sequence) -> dict:
    gt = sequence.gt_trajectories()
    pred = _read_any_trajectory(args.pred, sequence.specs)
    pairs = match_trajectories(gt, pred)
    if not pairs:
        raise NoOverlapError(f"{args.pred}: no predicted trajectory shares frames with the ground truth")
    per_track = []
    for g, p in pairs:
        r = trajectory_error(g, p)
        per_track.append({"gt_id": g.track_id, "pred_id": p.track_id, "class": g.drone_class, **asdict(r)})
    pooled = asdict(sequence_error(gt, pred))
    report = {"note": REPORT_NOTE, "sequences": {sequence.name: {"prediction": pooled}}, "tracks": per_track}
    print(f"{'sequence':<10} {'MAE':>10} {'RMSE':>10} {'frames':>7}")
    print(f"{sequence.name:<10} {pooled['mae_mm']:>10.2f} {pooled['rmse_mm']:>10.2f} {pooled['matched_frames']:>7}")
    return report


def cmd_evaluate(args) -> int:
    if args.pred and args.all_strategies:
        raise CommandError("--pred and --all-strategies are mutually exclusive")
    if not args.pred and not args.all_strategies:
        raise CommandError("give --pred FILE or --all-strategies")
    window = args.window if args.window is not None else 5
    try:
        check_window(window)
    except ValueError as exc:
        raise ConfigError("window", str(exc)) from None
    specs = spec_database_from_env()
    paths = []
    for p in args.data_dir:
        found = find_datasets(p)
        if not found:
            raise CommandError(f"{p}: not a dataset directory (no camera.json)")
        paths.extend(found)
    sequences = [DatasetDirectory(p, specs) for p in paths]

    if args.pred:
        if len(sequences) != 1:
            raise CommandError("--pred evaluates exactly one dataset")
        report = _evaluate_prediction(args, sequences[0])
    else:
        for seq in sequences:
            seq.gt_trajectories()  # fail fast on a missing gt file
        report = compare_strategies(sequences, STRATEGIES, window, specs, jobs=args.jobs)
        print(format_table(report))

    if args.tracks:
        if len(sequences) != 1:
            raise CommandError("--tracks evaluates exactly one dataset")
        m = mota(sequences[0].gt_tracks(), read_tracks(args.tracks), args.iou_threshold if args.iou_threshold is not None else 0.5)
        report["mota"] = asdict(m)
        print(f"MOTA {m.mota:.4f} (FN {m.fn}, FP {m.fp}, IDs {m.id_switches}, GT {m.gt_count})")

    if args.out:
        out = Path(args.out)
    elif len(sequences) == 1:
        out = sequences[0].path / "report.json"
    else:
        out = Path("report.json")
    _write_report(out, report)
    print(f"report -> {out}")
    return 0


# -- plot -------------------------------------------------------------------------


def _read_any_trajectory(path, specs):
    """Trajectory CSV with or without the distance/angle columns."""
    header = Path(path).read_text().split("\n", 1)[0].strip().split(",") if Path(path).is_file() else []
    if all(f in header for f in TRAJECTORY_FIELDS):
        return read_trajectories(path, specs)
    return read_gt_trajectory(path, specs)


def cmd_plot(args) -> int:
    specs = spec_database_from_env()
    series = []
    if args.gt:
        gt = _read_any_trajectory(args.gt, specs)
        if not gt:
            raise FormatError(f"{args.gt}: no trajectory rows")
        series.append(Series("ground truth", gt))
    for path in args.traj:
        trajs = _read_any_trajectory(path, specs)
        if not trajs:
            raise FormatError(f"{path}: no trajectory rows")
        series.append(Series(Path(path).stem, trajs, dashed=bool(args.gt)))
    svg = trajectory_svg(series, title=args.title or "", errors=args.errors)
    out = Path(args.out)
    try:
        out.write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"{out}: {exc.strerror or exc}") from None
    print(f"plot -> {out}")
    return 0


# -- argument parsing --------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monotraj", description="Monocular 3D drone trajectory reconstruction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", help="render a synthetic scenario to a dataset directory")
    p.add_argument("config", nargs="?", help="scenario config (JSON)")
    p.add_argument("--builtin", metavar="NAME", help=f"builtin scenario ({', '.join(BUILTIN_NAMES)}) or 'all'")
    p.add_argument("-o", "--out", required=True, help="output directory (parent directory for --builtin all)")
    p.add_argument("--seed", type=int, help="override the scenario's RNG seed")
    p.add_argument("--jobs", type=_positive_int, default=1, help="parallel scenarios")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct 3D trajectories for one dataset")
    p.add_argument("data_dir")
    p.add_argument("--strategy", choices=STRATEGIES, default=None, help="segment strategy (default pca)")
    p.add_argument("--window", type=int, default=None, help="odd smoothing window (default 5)")
    p.add_argument("--mode", choices=MODES, default=None, help="gt boxes or tracker on detections (default gt)")
    p.add_argument("--iou-threshold", type=float, default=None, help="tracker association IoU (default 0.5)")
    p.add_argument("--max-gap", type=int, default=None, help="frames a track may go unmatched (default 10)")
    p.add_argument("--tracks", help="use this tracks CSV instead of gt boxes or the tracker")
    p.add_argument("--tracks-out", help="also write the tracks used")
    p.add_argument("--config", help="pipeline settings (JSON); command-line flags take precedence")
    p.add_argument("-o", "--out", help="trajectory CSV (default DATA_DIR/trajectory_STRATEGY.csv)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="score trajectories against ground truth")
    p.add_argument("data_dir", nargs="+", help="dataset directories, or a parent of several")
    p.add_argument("--pred", help="predicted trajectory CSV")
    p.add_argument("--all-strategies", action="store_true", help="reconstruct with every strategy and compare")
    p.add_argument("--window", type=int, default=None, help="smoothing window for --all-strategies (default 5)")
    p.add_argument("--tracks", help="tracks CSV to score with MOTA")
    p.add_argument("--iou-threshold", type=float, default=None, help="MOTA match IoU (default 0.5)")
    p.add_argument("--jobs", type=_positive_int, default=1, help="parallel sequences")
    p.add_argument("-o", "--out", help="JSON report path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="SVG of trajectory projections")
    p.add_argument("traj", nargs="+", help="trajectory CSV file(s)")
    p.add_argument("--gt", help="ground-truth trajectory CSV")
    p.add_argument("--errors", action="store_true", help="add a per-frame error panel (needs --gt)")
    p.add_argument("--title")
    p.add_argument("-o", "--out", required=True, help="output SVG")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
    except (CommandError, MonotrajError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
