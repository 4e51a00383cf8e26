"""Command-line entry point."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from pydantic import ValidationError

from tze_dynsys.config import settings
from tze_dynsys.eigenmaps import parse_map_spec
from tze_dynsys.errors import InvalidArgumentError, TensorEigError
from tze_dynsys.experiments import (
    BENCH_METHODS,
    DEFAULT_VARIANTS,
    bench_frame,
    dump_trajectory,
    report_frame,
    resolve_tensor,
    run_bench,
    run_experiment,
)
from tze_dynsys.integrator import solve, write_trace_csv
from tze_dynsys.io import format_tensor, read_vector, write_tensor
from tze_dynsys.metrics import write_metrics
from tze_dynsys.models import IntegratorConfig, Renorm
from tze_dynsys.srw import (
    solve_spacey_fixed_point,
    srw_run,
    total_variation,
)

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def configure_logging(log_format: Optional[str] = None, level: Optional[str] = None):
    """Configure structlog on top of stdlib logging writing to stderr."""
    log_format = log_format or settings.log_format
    level = (level or settings.log_level).upper()
    logging.basicConfig(
        format="%(message)s", stream=sys.stderr, level=level, force=True
    )
    renderer = (
        structlog.dev.ConsoleRenderer()
        if log_format == "console"
        else structlog.processors.JSONRenderer()
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected integers: {text}") from e


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected numbers: {text}") from e


def _str_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _integrator_config(args: argparse.Namespace, record_trace: bool = False):
    overrides = {
        "step_h": args.h,
        "tol": getattr(args, "tol", None),
        "max_iters": getattr(args, "max_iters", None),
        "renorm": Renorm(args.renorm) if args.renorm else None,
    }
    values = {k: v for k, v in overrides.items() if v is not None}
    return IntegratorConfig(record_trace=record_trace, **values)


def _emit(frame: pd.DataFrame, dest: Optional[str]) -> None:
    if dest:
        frame.to_csv(dest, index=False)
        logger.info("Wrote CSV", path=dest, rows=len(frame))
    else:
        frame.to_csv(sys.stdout, index=False)


def cmd_solve(args: argparse.Namespace) -> int:
    tensor = resolve_tensor(args.tensor)
    spec = parse_map_spec(args.map)
    cfg = _integrator_config(args, record_trace=bool(args.trace))
    x0 = read_vector(args.x0) if args.x0 else None
    result = solve(tensor, spec, cfg, x0=x0, seed=args.seed)

    row = {
        "map": spec.label,
        "lambda": result.lambda_,
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "tie_events": result.tie_events,
    }
    row.update({f"x{i}": v for i, v in enumerate(result.x, start=1)})
    _emit(pd.DataFrame([row]), args.output)
    if args.trace:
        write_trace_csv(result, args.trace)
        logger.info("Wrote trace", path=args.trace, rows=len(result.trace))
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    tensor = resolve_tensor(args.tensor)
    specs = [parse_map_spec(text) for text in args.maps]
    report = run_experiment(
        tensor,
        specs,
        trials=args.trials,
        cfg=_integrator_config(args),
        seed=args.seed,
        tensor_id=args.tensor,
        sshopm_gammas=args.sshopm_gammas,
        workers=args.workers,
    )
    _emit(report_frame(report, include_timing=args.timing), args.report)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    rows = run_bench(
        args.orders,
        args.dims,
        methods=args.methods,
        seed=args.seed,
        trials_per_map=args.trials_per_map,
        sshopm_trials_per_dim=args.sshopm_trials_per_dim,
        workers=args.workers,
    )
    _emit(bench_frame(rows), args.output)
    return EXIT_OK


def cmd_srw(args: argparse.Namespace) -> int:
    tensor = resolve_tensor(args.tensor)
    steps = settings.srw_steps if args.steps is None else args.steps
    reference = read_vector(args.compare) if args.compare else None
    if reference is not None and reference.shape != (tensor.dim,):
        raise InvalidArgumentError(
            f"reference has {reference.shape[0]} entries, walk has {tensor.dim} states"
        )
    occupation = srw_run(tensor, steps, seed=args.seed)

    frame = pd.DataFrame(
        {"state": np.arange(1, tensor.dim + 1), "occupation": occupation}
    )
    if args.solve:
        reference = solve_spacey_fixed_point(tensor, seed=args.seed).x
    if reference is None:
        _emit(frame, args.output)
        return EXIT_OK

    frame["reference"] = reference
    tv = total_variation(occupation, reference)
    logger.info("Occupation compared", total_variation=tv)
    # trailing comment line; read back with pandas.read_csv(comment="#")
    text = frame.to_csv(index=False) + f"# total_variation {tv!r}\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    tensor = resolve_tensor(args.target)
    if args.output:
        write_tensor(tensor, args.output)
        logger.info("Wrote tensor", path=args.output, dim=tensor.dim)
    else:
        sys.stdout.write(format_tensor(tensor))
    return EXIT_OK


def cmd_trajectory(args: argparse.Namespace) -> int:
    tensor = resolve_tensor(args.tensor)
    spec = parse_map_spec(args.map)
    x0 = read_vector(args.x0) if args.x0 else None
    frame = dump_trajectory(
        tensor, spec, _integrator_config(args), x0=x0, steps=args.steps, seed=args.seed
    )
    _emit(frame, args.output)
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metrics-out", help="write a Prometheus text snapshot here")
    common.add_argument("--log-format", choices=["json", "console"], default=None)
    common.add_argument("--log-level", default=None)
    common.add_argument("--seed", type=int, default=settings.seed)
    return common


def _add_integrator_flags(parser: argparse.ArgumentParser, tolerances: bool = True):
    parser.add_argument("--h", type=float, default=None, help="Euler step size")
    parser.add_argument(
        "--renorm", choices=[r.value for r in Renorm], default=None
    )
    if tolerances:
        parser.add_argument("--tol", type=float, default=None)
        parser.add_argument("--max-iters", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="tze",
        description="Tensor Z-eigenpairs via dynamical systems",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("solve", parents=[common], help="Run one solve")
    p.add_argument("--tensor", required=True, help="tenz v1 file or built-in name")
    p.add_argument("--map", default="lm:1")
    _add_integrator_flags(p)
    p.add_argument("--x0", help="start vector file")
    p.add_argument("--trace", help="write the per-iteration trace CSV here")
    p.add_argument("--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", parents=[common], help="Randomized trials")
    p.add_argument("--tensor", required=True)
    p.add_argument("--maps", type=_str_list, default=list(DEFAULT_VARIANTS))
    p.add_argument("--trials", type=int, default=settings.trials)
    _add_integrator_flags(p)
    p.add_argument("--sshopm-gammas", type=_float_list, default=[])
    p.add_argument("--workers", type=int, default=settings.workers)
    p.add_argument("--timing", action="store_true", help="add a seconds column")
    p.add_argument("--report")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", parents=[common], help="Timing benchmark")
    p.add_argument("--orders", type=_int_list, default=[3, 4, 5])
    p.add_argument("--dims", type=_int_list, default=[5, 6, 7, 8, 9, 10])
    p.add_argument("--methods", type=_str_list, default=list(BENCH_METHODS))
    p.add_argument("--trials-per-map", type=int, default=None)
    p.add_argument("--sshopm-trials-per-dim", type=int, default=None)
    p.add_argument("--workers", type=int, default=settings.workers)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("srw", parents=[common], help="Spacey random walk")
    p.add_argument("--tensor", required=True)
    p.add_argument("--steps", type=int, default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--compare", help="reference vector file")
    group.add_argument(
        "--solve", action="store_true", help="compare with the computed fixed point"
    )
    p.add_argument("--output")
    p.set_defaults(func=cmd_srw)

    p = sub.add_parser("gen", parents=[common], help="Emit a built-in tensor")
    p.add_argument(
        "target",
        help="kolda-mayo, alternating:m:n, diag:<csv>[:m], random-transition:n[:seed]",
    )
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("trajectory", parents=[common], help="Dump Euler iterates")
    p.add_argument("--tensor", required=True)
    p.add_argument("--map", default="lm:1")
    _add_integrator_flags(p, tolerances=False)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--x0")
    p.add_argument("--output")
    p.set_defaults(func=cmd_trajectory)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_format, args.log_level)
    func: Callable[[argparse.Namespace], int] = args.func

    try:
        code = func(args)
    except (InvalidArgumentError, ValidationError) as e:
        logger.error("Invalid input", command=args.cmd, error=str(e))
        return EXIT_USAGE
    except TensorEigError as e:
        logger.error(
            "Command failed",
            command=args.cmd,
            error_type=type(e).__name__,
            error=str(e),
        )
        return EXIT_FAILURE
    finally:
        if args.metrics_out:
            write_metrics(Path(args.metrics_out))
    return code


if __name__ == "__main__":
    sys.exit(main())
