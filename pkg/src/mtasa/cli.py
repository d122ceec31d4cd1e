"""Batch command-line interface.

Reads a query and a reference dataset from long-form CSV, runs the
assessment pipeline, and writes one result row per dataset instance.

Option precedence, highest first: command-line flags, the MTASA_WORKERS
environment variable (workers only), the ``--config`` file, built-in
defaults.  Repeating a value flag keeps the last occurrence and warns.

Exit codes: 0 success, 1 validation error (bad weights, shape mismatch,
out-of-range period, ...), 2 I/O or usage error (unreadable or malformed
file, unknown flag, conflicting filter flags).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings

from . import engine
from . import io as mio
from .model import (
    AnalysisPeriod,
    AssessmentConfig,
    Filtering,
    RotationVariableSet,
    ValidationError,
    WeightVector,
)

_WORKERS_ENV = "MTASA_WORKERS"


class _WarnOnRepeat(argparse.Action):
    """Store action that warns when a flag is given more than once."""

    def __call__(self, parser, namespace, values, option_string=None):
        seen = getattr(namespace, "_seen_flags", None)
        if seen is None:
            seen = set()
            setattr(namespace, "_seen_flags", seen)
        if self.dest in seen:
            warnings.warn(
                f"{option_string} given more than once; the last value wins",
                stacklevel=2,
            )
        seen.add(self.dest)
        setattr(namespace, self.dest, values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtasa",
        description=(
            "Assess the similarity of multivariate time-series instances "
            "to a query sequence."
        ),
    )
    parser.add_argument("--query", action=_WarnOnRepeat,
                        help="query CSV (instance_id,time_index,<vars...>)")
    parser.add_argument("--dataset", action=_WarnOnRepeat,
                        help="reference dataset CSV, same format as the query")
    parser.add_argument("--vars", action=_WarnOnRepeat,
                        help="comma-separated measurement variable names")
    parser.add_argument("--weights", action=_WarnOnRepeat,
                        help="comma-separated per-variable weights, sum 1")
    parser.add_argument("--period", action=_WarnOnRepeat,
                        help="comma-separated zero-based time indices "
                             "(default: the full sequence)")
    parser.add_argument("--rotation-vars", action=_WarnOnRepeat,
                        help="comma-separated variables driving rotation "
                             "(default: all of --vars)")
    parser.add_argument("--rotate", action=argparse.BooleanOptionalAction,
                        default=None,
                        help="estimate and apply rotations (default: on)")
    parser.add_argument("--distance", action=_WarnOnRepeat,
                        choices=["euclidean", "dtw"],
                        help="per-variable distance (default: euclidean)")
    parser.add_argument("--transform", action=_WarnOnRepeat,
                        choices=["dft", "dwt"],
                        help="rotation feature transform (default: dft)")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--absolute-threshold", action=_WarnOnRepeat,
                       help="keep instances with similarity >= this value")
    group.add_argument("--top-k", action=_WarnOnRepeat,
                       help="keep only the k most similar instances")
    parser.add_argument("--workers", action=_WarnOnRepeat,
                        help="worker process count, or 'auto' for all cores "
                             f"(default: auto; env {_WORKERS_ENV})")
    parser.add_argument("--out", action=_WarnOnRepeat,
                        help="output CSV path")
    parser.add_argument("--config", action=_WarnOnRepeat,
                        help="key = value file supplying defaults for any flag")
    return parser


def _merge_options(args: argparse.Namespace) -> dict[str, str]:
    """Resolve flags, environment, and config file into one option map."""
    options: dict[str, str] = {}
    if args.config is not None:
        options.update(mio.parse_config_file(args.config))
    env_workers = os.environ.get(_WORKERS_ENV)
    if env_workers is not None:
        options["workers"] = env_workers
    cli_values = {
        "query": args.query,
        "dataset": args.dataset,
        "vars": args.vars,
        "weights": args.weights,
        "period": args.period,
        "rotation_vars": args.rotation_vars,
        "distance": args.distance,
        "transform": args.transform,
        "absolute_threshold": args.absolute_threshold,
        "top_k": args.top_k,
        "workers": args.workers,
        "out": args.out,
    }
    if args.absolute_threshold is not None or args.top_k is not None:
        # a filter given on the command line replaces any configured filter
        options.pop("absolute_threshold", None)
        options.pop("top_k", None)
    for key, value in cli_values.items():
        if value is not None:
            options[key] = value
    if args.rotate is not None:
        options["rotate"] = "true" if args.rotate else "false"
    return options


def _require(options: dict[str, str], key: str) -> str:
    if key not in options:
        raise ValidationError(f"missing required option --{key.replace('_', '-')}")
    return options[key]


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValidationError(f"expected a boolean, got {text!r}")


def _parse_workers(text: str) -> int | str:
    if text.strip().lower() == "auto":
        return "auto"
    try:
        count = int(text)
    except ValueError:
        raise ValidationError(
            f"workers must be a positive integer or 'auto', got {text!r}"
        ) from None
    if count < 1:
        raise ValidationError(f"workers must be >= 1, got {count}")
    return count


def _build_config(options: dict[str, str], n_timesteps: int) -> AssessmentConfig:
    names = tuple(v.strip() for v in _require(options, "vars").split(","))
    try:
        weight_values = [float(w) for w in _require(options, "weights").split(",")]
    except ValueError:
        raise ValidationError(
            f"weights must be numbers, got {options['weights']!r}"
        ) from None
    weights = WeightVector(tuple(weight_values))
    if "period" in options:
        try:
            indices = tuple(int(i) for i in options["period"].split(","))
        except ValueError:
            raise ValidationError(
                f"period must be integers, got {options['period']!r}"
            ) from None
        period = AnalysisPeriod(indices)
    else:
        period = AnalysisPeriod.full(n_timesteps)
    if "rotation_vars" in options:
        rotation_names = [v.strip() for v in options["rotation_vars"].split(",")]
        unknown = [v for v in rotation_names if v not in names]
        if unknown:
            raise ValidationError(
                f"rotation variable(s) not in --vars: {', '.join(unknown)}"
            )
        rotation = RotationVariableSet(
            tuple(names.index(v) for v in rotation_names)
        )
    else:
        rotation = RotationVariableSet(tuple(range(len(names))))
    if "absolute_threshold" in options and "top_k" in options:
        raise mio.DataFormatError(
            "absolute_threshold and top_k are mutually exclusive"
        )
    if "absolute_threshold" in options:
        try:
            threshold = float(options["absolute_threshold"])
        except ValueError:
            raise ValidationError(
                f"absolute threshold must be a number, got "
                f"{options['absolute_threshold']!r}"
            ) from None
        filtering = Filtering.absolute(threshold)
    elif "top_k" in options:
        try:
            k = int(options["top_k"])
        except ValueError:
            raise ValidationError(
                f"top-k must be an integer, got {options['top_k']!r}"
            ) from None
        filtering = Filtering.relative(k)
    else:
        filtering = Filtering.none()
    rotate = _parse_bool(options.get("rotate", "true"))
    distance = options.get("distance", "euclidean")
    if rotate and distance == "dtw":
        warnings.warn(
            "dtw distance with rotation enabled is unusual; dtw is intended "
            "as the fallback when rotation is disabled",
            stacklevel=2,
        )
    return AssessmentConfig(
        measurement_vars=names,
        weights=weights,
        analysis_period=period,
        rotation_variables=rotation,
        rotation_mode=rotate,
        distance_kind=distance,
        feature_transform=options.get("transform", "dft"),
        filtering=filtering,
        worker_count=_parse_workers(options.get("workers", "auto")),
    )


def run(options: dict[str, str]) -> int:
    """Execute one assessment from a fully merged option map."""
    started = time.perf_counter()
    variable_names = tuple(
        v.strip() for v in _require(options, "vars").split(",")
    )
    dataset = mio.load_dataset(_require(options, "dataset"), variable_names)
    query = mio.load_query(_require(options, "query"), variable_names)
    config = _build_config(options, dataset.n_timesteps)
    out_path = _require(options, "out")
    result = engine.run_pipeline(dataset, query, config)
    mio.write_results(result, out_path)
    elapsed = time.perf_counter() - started
    assessed = sum(1 for s in result.status if s != "missing_data")
    print(
        f"assessed {assessed} of {dataset.n_instances} instance(s) "
        f"in {elapsed:.3f}s; wrote {out_path}"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(_merge_options(args))
    except ValidationError as exc:
        print(f"mtasa: validation error: {exc}", file=sys.stderr)
        return 1
    except mio.DataFormatError as exc:
        print(f"mtasa: input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mtasa: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
