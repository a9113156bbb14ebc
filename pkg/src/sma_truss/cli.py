"""Command-line front end.

Examples::

    sma-truss run fuzzy-fl --out runs/fuzzy
    sma-truss run fl --set controller.lambda=0.3 --out runs/fl-slow
    sma-truss run --config my.ini --dump-config
    sma-truss batch uncontrolled fl fuzzy-fl --out runs
    sma-truss verify-bounds runs/fuzzy
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PRESETS, ConfigError, RunConfig
from .control import convergence_box
from .dynamics import equilibria
from .engine import BOX_ATOL, BlowUpError, run_scenario
from .output import read_metrics, read_timeseries, write_result

EXIT_OK = 0
EXIT_OUTSIDE_BOX = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def build_config(preset: str | None, config_path: str | None, overrides: list[str]) -> RunConfig:
    cfg = RunConfig.from_preset(preset) if preset else RunConfig()
    if config_path:
        try:
            cfg = RunConfig.load(config_path, base=cfg)
        except OSError as exc:
            raise ConfigError(f"cannot read {config_path}: {exc}") from exc
    for item in overrides:
        cfg.apply_override(item)
    return cfg


def execute(cfg: RunConfig, out_dir) -> dict:
    """Run one configuration and write its artifacts; returns the metrics."""
    scenario = cfg.to_scenario()
    result = run_scenario(scenario)
    write_result(result, out_dir, {"preset": cfg.preset or "custom"})
    return result.metrics


@dataclass
class BoundsReport:
    epsilon_hat: float
    lam: float
    n: int
    box: np.ndarray
    max_abs: np.ndarray
    inside: bool

    @property
    def margin(self) -> np.ndarray:
        return self.box - self.max_abs

    def format(self) -> str:
        lines = [
            f"epsilon_hat={self.epsilon_hat!r}",
            f"lambda={self.lam!r}",
            f"n={self.n}",
        ]
        names = ("xtilde", "xtilde_dot")
        for i in range(self.n):
            name = names[i] if i < len(names) else f"xtilde_d{i}"
            lines.append(
                f"{name}: bound={float(self.box[i])!r} max_abs={float(self.max_abs[i])!r} "
                f"margin={float(self.margin[i])!r}"
            )
        lines.append(f"inside_box={'true' if self.inside else 'false'}")
        return "\n".join(lines)


def verify_bounds(run_dir, lam: float | None = None, atol: float = BOX_ATOL) -> BoundsReport:
    """Check that the steady-state error of a controlled run sits inside the convergence box.

    ``epsilon_hat`` is the largest steady-state ``|d_tilde|`` recorded in the
    run. ``lam`` overrides the run's lambda when sizing the box.
    """
    run_dir = Path(run_dir)
    metrics = read_metrics(run_dir / "metrics.txt")
    series = read_timeseries(run_dir / "timeseries.csv", ("tau", "xtilde", "xtilde_dot", "d_tilde"))
    if "lambda" not in metrics:
        raise ValueError(f"{run_dir} is not a controlled run (no lambda in metrics.txt)")
    n = int(metrics.get("n", 2))
    if n != 2:
        raise ValueError(f"only second-order runs are recorded, got n={n}")
    lam = float(metrics["lambda"]) if lam is None else lam
    start = float(metrics.get("steady_start_tau", 0.0))

    steady = series["tau"] >= start
    d_tilde = series["d_tilde"][steady]
    if d_tilde.size == 0 or not np.all(np.isfinite(d_tilde)):
        raise ValueError(f"{run_dir}: no usable d_tilde samples in the steady-state window")
    eps_hat = float(np.max(np.abs(d_tilde)))
    box = convergence_box(n, lam, eps_hat)
    max_abs = np.array(
        [np.max(np.abs(series["xtilde"][steady])), np.max(np.abs(series["xtilde_dot"][steady]))]
    )
    return BoundsReport(eps_hat, lam, n, box, max_abs, bool(np.all(max_abs <= box + atol)))


def _run_one(args: tuple[str, list[str], str]) -> tuple[str, int, str]:
    preset, overrides, out_dir = args
    try:
        cfg = build_config(preset, None, overrides)
        metrics = execute(cfg, out_dir)
    except ConfigError as exc:
        return preset, EXIT_CONFIG, f"config error: {exc}"
    except BlowUpError as exc:
        return preset, EXIT_BLOWUP, f"blow-up: {exc}"
    return preset, EXIT_OK, f"rms_error={metrics['rms_error']!r} snap_through_count={metrics['snap_through_count']}"


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sma-truss",
        description="Simulate and control the shape memory two-bar truss.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", help="INI-style config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config value, e.g. controller.lambda=0.3 (repeatable)",
        )

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("preset", nargs="?", choices=sorted(PRESETS), help="scenario preset")
    add_config_args(run)
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")

    batch = sub.add_parser("batch", help="run several presets concurrently")
    batch.add_argument("presets", nargs="+", choices=sorted(PRESETS))
    batch.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    batch.add_argument("--out", default="out", help="parent directory; one subdirectory per preset")
    batch.add_argument("--jobs", type=int, default=None, help="worker processes")

    verify = sub.add_parser("verify-bounds", help="check a controlled run against its convergence box")
    verify.add_argument("run_dir")
    verify.add_argument("--lambda", dest="lam", type=float, default=None, help="size the box with this lambda")

    eq = sub.add_parser("equilibria", help="list equilibria of the configured truss")
    eq.add_argument("preset", nargs="?", choices=sorted(PRESETS))
    add_config_args(eq)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)

    if args.command == "verify-bounds":
        try:
            report = verify_bounds(args.run_dir, args.lam)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(report.format())
        return EXIT_OK if report.inside else EXIT_OUTSIDE_BOX

    if args.command == "batch":
        jobs = [(p, list(args.overrides), str(Path(args.out) / p)) for p in args.presets]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
        status = EXIT_OK
        for preset, code, message in results:
            print(f"{preset}: {message}")
            status = max(status, code)
        return status

    try:
        cfg = build_config(args.preset, args.config, args.overrides)
        if args.command == "equilibria":
            for x, stable in equilibria(cfg.truss_params()):
                print(f"{x!r} {'stable' if stable else 'unstable'}")
            return EXIT_OK
        if args.dump_config:
            cfg.to_scenario()  # validate before printing
            sys.stdout.write(cfg.dump())
            return EXIT_OK
        metrics = execute(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP

    for key in ("rms_error", "max_abs_error", "snap_through_count", "epsilon_hat", "inside_box"):
        if key in metrics:
            print(f"{key}={metrics[key]}")
    print(f"wrote {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
