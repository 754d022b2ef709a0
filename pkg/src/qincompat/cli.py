"""Command line interface.

Subcommands compute incompatibility values for objects stored as JSON
documents, run sampling estimators, generate observable batches, run the
full clustering experiment, and spot-check analytic bounds on random
ensembles. Results print to stdout as JSON (default) or key,value CSV.

Exit codes: 0 success, 2 unreadable input (bad file, malformed document,
bad config), 3 invariant violation (well-formed input describing an invalid
object, or incompatible operands), 4 bound violation found by bounds-check.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any

from . import io
from .errors import InvariantError, ParseError
from .experiment import ExperimentConfig, run_clustering_experiment
from .generate import random_partition, random_pvm
from .measures import gmed, med_upper_bound, ncom
from .quantum import (
    DensityMatrix,
    bell_measurement_channel,
    computational_pvm,
    fourier_pvm,
    product_measurement_channel,
)
from .rng import RandomStream
from .switch import SamplingPlan, estimate_med_sequential, estimate_ncom_switch, hoeffding_shots

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_BOUND = 4

BOUND_ATOL = 1e-10


def _flatten(data: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(data, dict):
        out: list[tuple[str, Any]] = []
        for key in sorted(data):
            out.extend(_flatten(data[key], f"{prefix}{key}."))
        return out
    if isinstance(data, (list, tuple)):
        return [(prefix.rstrip("."), ";".join(str(x) for x in data))]
    return [(prefix.rstrip("."), data)]


def _emit(payload: dict[str, Any], fmt: str, out_dir: str | None) -> None:
    if fmt == "json":
        text = io.dump_json(payload)
    else:
        lines = ["key,value"]
        for key, value in _flatten(payload):
            if isinstance(value, float):
                value = io.format_float(value)
            lines.append(f"{key},{value}")
        text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"result.{fmt}").write_text(text)


def _seed_of(args: argparse.Namespace) -> int:
    return 0 if args.seed is None else int(args.seed)


def cmd_med(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    a = io.load_measurement(args.measurement_a)
    b = io.load_measurement(args.measurement_b)
    if a.dim != b.dim:
        raise InvariantError(f"measurements act on different dimensions: {a.dim} vs {b.dim}")
    rho = io.load_density(args.rho, a.dim)
    value = gmed(a, b, rho)
    payload = {
        "med": value,
        "prob_same": max(0.0, 1.0 - value * value),
        "k_a": len(a),
        "k_b": len(b),
        "upper_bound": med_upper_bound(len(a), len(b)),
    }
    return payload, EXIT_OK


def cmd_ncom(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    c = io.load_channel(args.channel_c)
    d_ch = io.load_channel(args.channel_d)
    if c.dim_in != d_ch.dim_in or c.dim_in != c.dim_out or d_ch.dim_in != d_ch.dim_out:
        raise InvariantError(
            f"channels must be square and share one dimension: "
            f"{c.dim_in}x{c.dim_out} vs {d_ch.dim_in}x{d_ch.dim_out}"
        )
    rho = io.load_density(args.rho, c.dim_in)
    payload = {
        "ncom": ncom(c, d_ch, rho),
        "dim": c.dim_in,
        "n_kraus_c": len(c),
        "n_kraus_d": len(d_ch),
    }
    return payload, EXIT_OK


def cmd_switch_estimate(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    c = io.load_channel(args.channel_c)
    d_ch = io.load_channel(args.channel_d)
    if c.dim_in != d_ch.dim_in or c.dim_in != c.dim_out or d_ch.dim_in != d_ch.dim_out:
        raise InvariantError(
            f"channels must be square and share one dimension: "
            f"{c.dim_in}x{c.dim_out} vs {d_ch.dim_in}x{d_ch.dim_out}"
        )
    rho = io.load_density(args.rho, c.dim_in)
    plan = SamplingPlan(args.epsilon, args.delta)
    seed = _seed_of(args)
    result = estimate_ncom_switch(c, d_ch, rho, plan, RandomStream(seed))
    payload = {
        "shots": result.shots,
        "p_minus_hat": result.p_minus_hat,
        "ncom_hat": result.ncom_hat,
        "exact_p_minus": result.exact_p_minus,
        "exact_ncom": math.sqrt(2.0 * result.exact_p_minus),
        "seed": seed,
    }
    return payload, EXIT_OK


def cmd_sequential_estimate(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    a = io.load_measurement(args.measurement_a)
    b = io.load_measurement(args.measurement_b)
    if a.dim != b.dim:
        raise InvariantError(f"measurements act on different dimensions: {a.dim} vs {b.dim}")
    if args.shots < 1:
        raise InvariantError(f"shots must be positive, got {args.shots}")
    seed = _seed_of(args)
    result = estimate_med_sequential(a, b, args.shots, RandomStream(seed))
    payload = {
        "shots": result.shots,
        "med_hat": result.ncom_hat,
        "p_minus_hat": result.p_minus_hat,
        "exact_p_minus": result.exact_p_minus,
        "seed": seed,
    }
    return payload, EXIT_OK


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        loaded = io.load_json(args.config)
        if not isinstance(loaded, dict):
            raise ParseError(f"config {args.config} must be a JSON object")
        data = loaded
    config = ExperimentConfig.from_dict(data)
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = int(args.seed)
    if getattr(args, "n_observables", None) is not None:
        overrides["n_observables"] = args.n_observables
    if getattr(args, "max_angle_deg", None) is not None:
        overrides["max_angle_deg"] = args.max_angle_deg
    if getattr(args, "noise_eta", None) is not None:
        overrides["noise_eta"] = args.noise_eta
    if getattr(args, "distance", None) is not None:
        overrides["distance"] = args.distance
    if overrides:
        config = ExperimentConfig.from_dict({**config.to_dict(), **overrides})
    return config


def cmd_gen_observables(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    from .generate import gen_observables

    config = _load_config(args)
    pairs = gen_observables(
        config.n_observables, config.base_axes, config.max_angle_deg, RandomStream(config.seed).split(0)
    )
    out = Path(args.out if args.out is not None else "out")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "observables.csv"
    io.write_observables_csv(path, [obs for obs, _ in pairs], [t for _, t in pairs])
    payload = {
        "n_observables": config.n_observables,
        "max_angle_deg": config.max_angle_deg,
        "seed": config.seed,
        "path": str(path),
    }
    return payload, EXIT_OK


def cmd_cluster(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    config = _load_config(args)
    result = run_clustering_experiment(config)
    out = args.out if args.out is not None else "out"
    paths = io.write_experiment(out, result)
    payload = {
        "distance": config.distance,
        "n_observables": config.n_observables,
        "noise_eta": config.noise_eta,
        "seed": config.seed,
        "purity": result.purity,
        "cost": result.clustering.cost,
        "iterations": result.clustering.iterations,
        "medoids": list(result.clustering.medoids),
        "out": {name: str(p) for name, p in paths.items()},
    }
    return payload, EXIT_OK


def cmd_bounds_check(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    try:
        dims = [int(x) for x in args.dims.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"--dims must be a comma-separated list of integers, got {args.dims!r}") from exc
    if not dims or any(d < 2 or d > 6 for d in dims):
        raise ParseError(f"--dims needs integers in 2..6, got {args.dims!r}")
    if args.trials < 1:
        raise InvariantError(f"trials must be positive, got {args.trials}")
    stream = RandomStream(_seed_of(args))
    report: dict[str, Any] = {}
    violations = 0
    max_violation = 0.0
    for pos, dim in enumerate(dims):
        gen = stream.split(pos).generator()
        worst_excess = -math.inf
        # Ranks are split into 2..d parts: the one-outcome family {I} is a
        # trivial measurement and its bound is degenerate.
        for _ in range(args.trials):
            ranks_a = random_partition(dim, int(gen.integers(2, dim + 1)), gen)
            ranks_b = random_partition(dim, int(gen.integers(2, dim + 1)), gen)
            a = random_pvm(dim, gen, ranks_a)
            b = random_pvm(dim, gen, ranks_b)
            value = gmed(a, b, DensityMatrix.maximally_mixed(dim))
            excess = value - med_upper_bound(len(a), len(b))
            worst_excess = max(worst_excess, excess)
            if excess > BOUND_ATOL:
                violations += 1
            max_violation = max(max_violation, excess)
        mub = gmed(computational_pvm(dim), fourier_pvm(dim), DensityMatrix.maximally_mixed(dim))
        mub_expected = math.sqrt(1.0 - 1.0 / dim)
        mub_deviation = abs(mub - mub_expected)
        if mub_deviation > BOUND_ATOL:
            violations += 1
        max_violation = max(max_violation, mub_deviation)
        report[f"dim_{dim}"] = {
            "trials": args.trials,
            "max_excess": worst_excess,
            "mub_med": mub,
            "mub_expected": mub_expected,
        }
    bell_ncom = ncom(
        bell_measurement_channel(2, 2),
        product_measurement_channel(2, 2),
        DensityMatrix.maximally_mixed(4),
    )
    bell_lower_bound = math.sqrt(0.5)
    bell_shortfall = max(0.0, bell_lower_bound - bell_ncom)
    if bell_shortfall > BOUND_ATOL:
        violations += 1
    max_violation = max(max_violation, bell_shortfall)
    payload = {
        "dims": dims,
        "violations": violations,
        "max_violation": max_violation,
        "report": report,
        "bell_ncom": bell_ncom,
        "bell_lower_bound": bell_lower_bound,
        "seed": _seed_of(args),
    }
    return payload, EXIT_BOUND if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0; overrides config seed)")
    common.add_argument("--out", default=None, help="directory for output files")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")

    parser = argparse.ArgumentParser(
        prog="qincompat",
        description="Incompatibility measures for quantum measurements and channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("med", parents=[common], help="eigenspace disturbance of two measurements")
    p.add_argument("measurement_a", help="JSON file: pvm, observable, or bloch document")
    p.add_argument("measurement_b", help="JSON file: pvm, observable, or bloch document")
    p.add_argument("--rho", default=io.MAXIMALLY_MIXED, help="weighting state: 'maximally-mixed' or a density JSON file")
    p.set_defaults(func=cmd_med)

    p = sub.add_parser("ncom", parents=[common], help="noncommutativity of two channels")
    p.add_argument("channel_c", help="JSON file: channel document (measurements become dephasing channels)")
    p.add_argument("channel_d", help="JSON file: channel document (measurements become dephasing channels)")
    p.add_argument("--rho", default=io.MAXIMALLY_MIXED, help="weighting state: 'maximally-mixed' or a density JSON file")
    p.set_defaults(func=cmd_ncom)

    p = sub.add_parser(
        "switch-estimate", parents=[common], help="finite-shot noncommutativity estimate via the switch read-out"
    )
    p.add_argument("channel_c")
    p.add_argument("channel_d")
    p.add_argument("--epsilon", type=float, default=0.01, help="accuracy target (default 0.01)")
    p.add_argument("--delta", type=float, default=0.05, help="failure probability (default 0.05)")
    p.add_argument("--rho", default=io.MAXIMALLY_MIXED)
    p.set_defaults(func=cmd_switch_estimate)

    p = sub.add_parser(
        "sequential-estimate", parents=[common], help="finite-shot disturbance estimate from sequential records"
    )
    p.add_argument("measurement_a")
    p.add_argument("measurement_b")
    p.add_argument(
        "--shots",
        type=int,
        default=hoeffding_shots(0.01, 0.05).shots,
        help="number of measurement triples (default: the 0.01/0.05 Hoeffding count)",
    )
    p.set_defaults(func=cmd_sequential_estimate)

    p = sub.add_parser("gen-observables", parents=[common], help="generate a batch of observables near base axes")
    p.add_argument("--config", default=None, help="experiment config JSON (missing fields take defaults)")
    p.add_argument("--n-observables", type=int, default=None)
    p.add_argument("--max-angle-deg", type=float, default=None)
    p.set_defaults(func=cmd_gen_observables)

    p = sub.add_parser("cluster", parents=[common], help="run the full clustering experiment")
    p.add_argument("--config", default=None, help="experiment config JSON (missing fields take defaults)")
    p.add_argument("--n-observables", type=int, default=None)
    p.add_argument("--max-angle-deg", type=float, default=None)
    p.add_argument("--noise-eta", type=float, default=None)
    p.add_argument("--distance", choices=("med", "ncom", "ncom_estimated"), default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("bounds-check", parents=[common], help="verify the disturbance upper bound on random pairs")
    p.add_argument("--dims", default="2,3,4", help="comma-separated dimensions (default 2,3,4)")
    p.add_argument("--trials", type=int, default=200, help="random pairs per dimension (default 200)")
    p.set_defaults(func=cmd_bounds_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    _emit(payload, args.format, args.out if args.func not in (cmd_gen_observables, cmd_cluster) else None)
    return code


if __name__ == "__main__":
    sys.exit(main())
