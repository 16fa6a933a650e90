"""
Command-line interface for pycascade
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type

from pydantic import BaseModel, ValidationError

from pycascade.analysis.size import moments_from_sizes, scaled_report, write_histogram_csv
from pycascade.analysis.wave import (
    dispersion_roots, effective_velocity, extract_profile, fit_velocity,
    selected_velocity, sliding_velocities, tail_summary, wave_equation_residual,
)
from pycascade.config import Config
from pycascade.core import recurrence
from pycascade.core.errors import NoCrossingError
from pycascade.core.recurrence import RecurrenceRun, mean_height, mean_height_asymptote
from pycascade.core.series import front_estimate_four_term, front_estimate_from_series, series_profile
from pycascade.models import (
    DiscreteConfig, RecurConfig, SeriesConfig, SizeConfig, TreeConfig, WaveConfig,
)
from pycascade.simulation.discrete import DISCRETE_HEADER, simulate_discrete
from pycascade.simulation.tree import HEIGHT_CDF_HEADER, TREE_HEADER, simulate_trees
from pycascade.utils.logger import setup_logger
from pycascade.utils.serializer import build_manifest, write_csv, write_json

# Flags that take no value; a truthy value in a --config file turns them on
SWITCHES = {"scaled", "no_samples"}
# Parsed options that are not run parameters
AMBIENT = {"command", "config", "log_level", "log_file"}


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _window(text: str) -> Tuple[int, int]:
    values = _int_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return values[0], values[1]


class OutputWriter:
    """Writes tables and documents under one directory and records them for the manifest"""

    def __init__(self, output_dir: str, fmt: str = "csv"):
        self.root = Path(output_dir)
        self.fmt = fmt
        self.files: List[str] = []

    def _record(self, path: Path) -> Path:
        try:
            self.files.append(path.relative_to(self.root).as_posix())
        except ValueError:
            self.files.append(str(path))
        return path

    def table(self, stem: str, header: Sequence[str], rows) -> Path:
        if self.fmt == "json":
            payload = [dict(zip(header, row)) for row in rows]
            return self._record(write_json(self.root / f"{stem}.json", payload))
        return self._record(write_csv(self.root / f"{stem}.csv", header, rows))

    def document(self, name: str, payload: Any) -> Path:
        return self._record(write_json(self.root / name, payload))

    def path(self, name: str) -> Path:
        """Reserve a file for a writer that takes a path"""
        target = Path(name)
        if not target.is_absolute():
            target = self.root / target
        target.parent.mkdir(parents=True, exist_ok=True)
        return self._record(target)

    def manifest(self, command: str, parameters: Dict[str, Any], seed: Optional[int] = None) -> Path:
        return write_json(self.root / "manifest.json",
                          build_manifest(command, parameters, self.files, seed))


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--output-dir', default=None,
                        help=f'Output directory (default: CASCADE_OUTPUT_DIR or {Config.OUTPUT_DIR})')
    common.add_argument('--format', choices=('csv', 'json'), default=None, help='Table format')
    common.add_argument('--log-level', default=None, help='Logging level')
    common.add_argument('--log-file', default=None, help='Also log to this file')
    common.add_argument('--config', default=None, help='KEY=VALUE batch file; flags win')
    return common


def _mc_options(parser: argparse.ArgumentParser):
    parser.add_argument('--seed', type=int, default=None, help='Master seed (mandatory)')
    parser.add_argument('--replicates', type=int, default=None, help='Number of replicates')
    parser.add_argument('--threads', type=int, default=None, help='Worker processes')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pycascade",
        description="pycascade - Continuum cascade model computations",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    common = _common_options()
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    # Height recurrence
    recur_parser = subparsers.add_parser('recur', parents=[common], help='Iterate the height recurrence')
    recur_parser.add_argument('--n-max', type=int, default=None, help='Number of iterations')
    recur_parser.add_argument('--store', type=_int_list, default=None, help='Profiles to write, e.g. 20,40,60,80')
    recur_parser.add_argument('--h', type=float, default=None, help='Grid spacing')
    recur_parser.add_argument('--level', type=float, default=None, help='Front level')
    recur_parser.add_argument('--heights', type=_float_list, default=None, help='x values for mean heights')
    recur_parser.add_argument('--checkpoint', default=None, help='Write a msgpack checkpoint of the run')

    # Traveling wave
    wave_parser = subparsers.add_parser('wave', parents=[common], help='Traveling-wave analysis')
    wave_parser.add_argument('--n-max', type=int, default=None, help='Number of iterations')
    wave_parser.add_argument('--h', type=float, default=None, help='Grid spacing')
    wave_parser.add_argument('--window', type=_window, default=None, help='Fit window LO,HI in n')
    wave_parser.add_argument('--profile-n', type=int, default=None, help='Profile to analyze (default n-max)')
    wave_parser.add_argument('--v', type=float, default=None, help='Velocity for the dispersion roots')
    wave_parser.add_argument('--from-run', default=None, help='Reuse a recur checkpoint')

    # Monte Carlo trees
    mc_parser = subparsers.add_parser('mc', parents=[common], help='Sample continuum cascade trees')
    mc_parser.add_argument('--x', type=float, default=None, help='Interval length')
    _mc_options(mc_parser)
    mc_parser.add_argument('--node-cap', type=int, default=None, help='Abort a tree above this size')
    mc_parser.add_argument('--no-samples', action='store_true', default=None,
                           help='Skip the per-replicate table')

    # Discrete model
    discrete_parser = subparsers.add_parser('discrete', parents=[common], help='Sample discrete cascade graphs')
    discrete_parser.add_argument('--m', type=int, default=None, help='Largest vertex index')
    discrete_parser.add_argument('--c', type=float, default=None, help='Link probability')
    _mc_options(discrete_parser)

    # Size statistics
    size_parser = subparsers.add_parser('size', parents=[common], help='Tree size moments')
    size_parser.add_argument('--x', type=float, default=None, help='Interval length')
    _mc_options(size_parser)
    size_parser.add_argument('--node-cap', type=int, default=None, help='Abort a tree above this size')
    size_parser.add_argument('--p-max', type=int, default=None, help='Highest moment (<= 5)')
    size_parser.add_argument('--scaled', action='store_true', default=None,
                             help='Also report the scaled distribution (x >= 4)')
    size_parser.add_argument('--bins', type=int, default=None, help='Histogram bins')
    size_parser.add_argument('--sigma-max', type=float, default=None, help='Histogram upper edge')

    # Series
    series_parser = subparsers.add_parser('series', parents=[common], help='Exact small-x expansion of P_n')
    series_parser.add_argument('--n', type=int, default=None, help='Profile index')
    series_parser.add_argument('--order', type=int, default=None, help='Truncation order (default n+6)')

    # Config
    subparsers.add_parser('config', help='Show configuration')

    return parser


def _file_arguments(path: str) -> List[str]:
    """Turn a --config file into flags placed before the command line's own"""
    argv: List[str] = []
    for key, value in Config.load_file(path).items():
        flag = f"--{key.replace('_', '-')}"
        if key in SWITCHES:
            if value.strip().lower() in ('1', 'true', 'yes', 'on'):
                argv.append(flag)
        else:
            argv.extend([flag, value])
    return argv


def parse_arguments(parser: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, 'config', None):
        try:
            from_file = _file_arguments(args.config)
        except FileNotFoundError as e:
            parser.error(str(e))
        args = parser.parse_args([argv[0]] + from_file + argv[1:])
    return args


def _validate(parser: argparse.ArgumentParser, model: Type[BaseModel], args: argparse.Namespace) -> BaseModel:
    params = {k: v for k, v in vars(args).items() if k not in AMBIENT and v is not None}
    if params.pop('no_samples', None):
        params['samples'] = False
    try:
        return model(**params)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or args.command}: {err['msg']}"
            for err in e.errors()
        )
        parser.error(f"invalid {args.command} options: {problems}")


# Subcommands


def cmd_recur(cfg: RecurConfig, logger) -> None:
    out = OutputWriter(cfg.output_dir, cfg.format)
    result = recurrence.run(cfg.n_max, store=cfg.store, h=cfg.h, level=cfg.level)

    out.table("fronts", ("n", "x_front"), result.front_trace().to_rows())
    for n in sorted(result.profiles):
        out.table(f"profile_n{n}", ("x", "value"), result.profile(n).to_rows())
    if cfg.heights:
        rows = [
            (x, mean_height(x, result), mean_height_asymptote(x) if x > 0 else None)
            for x in cfg.heights
        ]
        out.table("mean_heights", ("x", "mean_height", "asymptote"), rows)
    if cfg.checkpoint:
        result.save(out.path(cfg.checkpoint))

    parameters = cfg.model_dump()
    parameters.update(x_max=result.spec.x_max, domain_margin=Config.DOMAIN_MARGIN)
    out.manifest("recur", parameters)
    logger.info(f"recur: x_f({cfg.n_max}) = {result.fronts[-1]:.6f}")
    print(f"✓ {len(out.files)} file(s) written to {out.root}")


def cmd_wave(cfg: WaveConfig, logger) -> None:
    out = OutputWriter(cfg.output_dir, cfg.format)
    if cfg.from_run:
        result = RecurrenceRun.load(cfg.from_run)
        logger.info(f"Loaded run with n_max={result.n_max} from {cfg.from_run}")
    else:
        profile_n = cfg.profile_n or cfg.n_max
        result = recurrence.run(cfg.n_max, store=[profile_n], h=cfg.h)

    n = cfg.profile_n or result.n_max
    lo, hi = cfg.window or (max(1, result.n_max // 10), result.n_max)
    if hi > result.n_max:
        raise ValueError(f"Fit window ({lo}, {hi}) beyond the run's n_max={result.n_max}")

    trace = result.front_trace()
    fit = fit_velocity(trace, (lo, hi), with_log=True)
    linear = fit_velocity(trace, (lo, hi), with_log=False)
    width = max(10, (hi - lo + 1) // 5)
    sliding = sliding_velocities(trace.window(lo, hi), width)
    v_selected, a_selected = selected_velocity()
    dispersion = dispersion_roots(cfg.v if cfg.v is not None else v_selected)

    profile = extract_profile(result.profile(n), level=result.level, n=n)
    v_eff = effective_velocity(trace, n)
    report = {
        "fit": fit.model_dump(),
        "linear_fit": linear.model_dump(),
        "sliding_velocities": [s.model_dump() for s in sliding],
        "selected": {"v": v_selected, "a": a_selected},
        "dispersion": dispersion.model_dump(),
        "profile": profile.summary(),
        "tails": tail_summary(profile, v_eff),
        "effective_velocity": v_eff,
        "wave_equation_residual": wave_equation_residual(profile, v_eff),
    }

    out.document("wave.json", report)
    out.table("fronts", ("n", "x_front"), trace.to_rows())
    out.table(f"profile_n{n}", ("xi", "pi"), profile.pi.to_rows())
    out.manifest("wave", cfg.model_dump())
    logger.info(f"wave: v={fit.v:.6f}, b={fit.b:.4f}, residual={report['wave_equation_residual']:.3e}")
    print(f"✓ v = {fit.v:.6f}, b = {fit.b:.4f}; written to {out.root}")


def cmd_mc(cfg: TreeConfig, logger) -> None:
    out = OutputWriter(cfg.output_dir, cfg.format)
    ensemble = simulate_trees(cfg.x, cfg.replicates, cfg.seed, node_cap=cfg.node_cap,
                              workers=cfg.threads)
    summary = ensemble.summary()
    summary["height_moments"] = ensemble.height_moments()

    out.document("summary.json", summary)
    cdf = ensemble.height_cdf()
    out.table("height_cdf", HEIGHT_CDF_HEADER, cdf.to_rows())
    if cfg.samples:
        out.table("trees", TREE_HEADER, ensemble.to_rows())
    out.manifest("mc", cfg.model_dump(), seed=cfg.seed)
    print(f"✓ mean size {summary['mean_size']:.4f} ± {summary['mean_size_std_error']:.4f}; "
          f"written to {out.root}")


def cmd_discrete(cfg: DiscreteConfig, logger) -> None:
    out = OutputWriter(cfg.output_dir, cfg.format)
    ensemble = simulate_discrete(cfg.m, cfg.c, cfg.replicates, cfg.seed, workers=cfg.threads)
    summary = ensemble.summary()

    out.document("summary.json", summary)
    out.table("graphs", DISCRETE_HEADER, ensemble.to_rows())
    out.manifest("discrete", cfg.model_dump(), seed=cfg.seed)
    print(f"✓ T = {summary['mean_no_out_fraction']:.5f}, N = {summary['mean_neutral_fraction']:.5f}; "
          f"written to {out.root}")


def cmd_size(cfg: SizeConfig, logger) -> None:
    out = OutputWriter(cfg.output_dir, cfg.format)
    ensemble = simulate_trees(cfg.x, cfg.replicates, cfg.seed, node_cap=cfg.node_cap,
                              workers=cfg.threads)
    moments = moments_from_sizes(ensemble.sizes, cfg.x, cfg.p_max)
    out.table("moments", ("p", "exact", "estimate", "std_error", "z_score", "replicates"),
              [(m.p, m.exact, m.estimate, m.std_error, m.z_score, m.replicates) for m in moments])

    if cfg.scaled:
        report = scaled_report(ensemble.sizes, cfg.x, cfg.bins, cfg.sigma_max)
        out.document("scaled.json", report.model_dump(exclude={"bin_edges", "counts"}))
        write_histogram_csv(report, out.path("histogram.csv"))

    out.manifest("size", cfg.model_dump(), seed=cfg.seed)
    print(f"✓ {len(moments)} moment(s) at x={cfg.x}; written to {out.root}")


def cmd_series(cfg: SeriesConfig, logger) -> None:
    out = OutputWriter(cfg.output_dir, cfg.format)
    poly = series_profile(cfg.n, cfg.order)
    out.table("coefficients", ("k", "numerator", "denominator", "value"),
              [(k, str(c.numerator), str(c.denominator), float(c)) for k, c in enumerate(poly.coeffs)])

    try:
        four_term = front_estimate_four_term(cfg.n)
    except (NoCrossingError, ValueError) as e:
        logger.warning(f"Four-term front estimate unavailable: {e}")
        four_term = None
    out.document("series.json", {
        "n": cfg.n,
        "order": cfg.order,
        "coefficients": poly.to_json(),
        "front_estimate": front_estimate_from_series(cfg.n),
        "front_estimate_four_term": four_term,
    })
    out.manifest("series", cfg.model_dump())
    print(f"✓ P_{cfg.n} to order {cfg.order}; written to {out.root}")


def show_config():
    """Show current configuration"""
    Config.display()


COMMANDS: Dict[str, Tuple[Type[BaseModel], Callable]] = {
    'recur': (RecurConfig, cmd_recur),
    'wave': (WaveConfig, cmd_wave),
    'mc': (TreeConfig, cmd_mc),
    'discrete': (DiscreteConfig, cmd_discrete),
    'size': (SizeConfig, cmd_size),
    'series': (SeriesConfig, cmd_series),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point; returns the exit status"""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parse_arguments(parser, argv)

    if not args.command:
        parser.print_help()
        return 0
    if args.command == 'config':
        show_config()
        return 0

    model, handler = COMMANDS[args.command]
    cfg = _validate(parser, model, args)
    logger = setup_logger(level=args.log_level or Config.LOG_LEVEL,
                          log_file=args.log_file or Config.LOG_FILE)

    try:
        handler(cfg, logger)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"✗ Error: {e}")
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
