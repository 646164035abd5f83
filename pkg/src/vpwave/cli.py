"""Command-line interface: ``vpwave {fit,batch,synth,oracle,dynamics}``.

Exit status: 0 success, 2 input/I-O problem, 3 computation failure.
"""
import argparse
import contextlib
import csv
import glob
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata

from vpwave import dynamics, fitting, oracle, synth
from vpwave.errors import ComputationError, EmptyInput, InputError, InvalidParameters
from vpwave.marketdata import DEFAULT_TICK, build_distribution, read_trades, write_trades
from vpwave.models import Family, ModelSpec

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3
BATCH_COLUMNS = (
    "schema_version", "file", "status", "family", "rate", "p0",
    "r_squared", "r_squared_crit", "significant", "error",
)

log = logging.getLogger("vpwave")


def tool_version():
    try:
        return metadata.version("vpwave")
    except metadata.PackageNotFoundError:  # pragma: no cover - running from a checkout
        return "0+unknown"


@dataclass
class RunManifest:
    command: str
    inputs: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    tool_version: str = field(default_factory=tool_version)
    started: float = field(default_factory=time.time)
    finished: float | None = None

    def to_json_dict(self):
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def _chosen(report):
    """FitResult to summarize: the chosen rung, else the last attempt that produced a fit."""
    if isinstance(report, fitting.FitResult):
        return report
    if report.chosen_result is not None:
        return report.chosen_result
    fits = [a.result for a in report.attempts if a.result is not None]
    return fits[-1] if fits else None


def _summary(result):
    q = result.spec.params
    if result.family is Family.SUPERPOSITION:
        shape = f"omega1={q['omega1']:.6g} p01={q['p01']:.6f} omega2={q['omega2']:.6g} p02={q['p02']:.6f}"
    elif result.family is Family.KUMMER:
        shape = f"m={q['m']} sqrtA={result.rate:.6g} p0={q['p0']:.6f}"
    else:
        shape = f"omega={q['omega']:.6g} p0={q['p0']:.6f}"
    verdict = "significant" if result.significant else "not significant"
    return (
        f"{result.label}: {shape} (nearest tick {result.nearest_tick_center}) "
        f"R2={result.r_squared:.4f} vs R2crit={result.r_squared_crit:.4f} -> {verdict}"
    )


def _fit_one(dist, args):
    if args.family is None:
        return fitting.run_ladder(dist, confidence=args.confidence, kummer_order=args.kummer_order)
    return fitting.fit(dist, args.family, kummer_order=args.kummer_order, confidence=args.confidence)


def _write_plot_data(path, dist, result):
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("price", "empirical_p", "model_p", "residual"))
        for price, p_emp, res in zip(dist.prices, dist.probabilities, result.residuals):
            writer.writerow((f"{price:.10g}", repr(float(p_emp)), repr(float(p_emp - res)), repr(float(res))))


def cmd_fit(args, manifest):
    dist = build_distribution(read_trades(args.input), args.tick)
    manifest.inputs.append(args.input)
    report = _fit_one(dist, args)
    payload = report.to_json_dict()
    if args.out:
        _write_json(args.out, payload)
        manifest.outputs.append(args.out)
    result = _chosen(report)
    if isinstance(report, fitting.LadderReport):
        for a in report.attempts:
            print(_summary(a.result) if a.result is not None else f"{a.label}: failed ({a.error})")
        print("chosen:", "none" if report.chosen is None else report.attempts[report.chosen].label)
    else:
        print(_summary(result))
    if args.plot_data and result is not None:
        _write_plot_data(args.plot_data, dist, result)
        manifest.outputs.append(args.plot_data)
    return EXIT_OK


def _batch_inputs(pattern):
    if os.path.isdir(pattern):
        return sorted(os.path.join(pattern, f) for f in os.listdir(pattern) if f.endswith(".csv"))
    return sorted(glob.glob(pattern))


def _batch_worker(job):
    path, tick, confidence, kummer_order = job
    row = dict.fromkeys(BATCH_COLUMNS, "")
    row.update(schema_version=SCHEMA_VERSION, file=path)
    try:
        dist = build_distribution(read_trades(path), tick)
        report = fitting.run_ladder(dist, confidence=confidence, kummer_order=kummer_order)
    except (InputError, ComputationError, OSError) as exc:
        row.update(status="error", error=f"{type(exc).__name__}: {exc}", significant="False")
        return row
    result = _chosen(report)
    row["status"] = "ok"
    if result is None:
        row.update(error="; ".join(a.error for a in report.attempts if a.error), significant="False")
        return row
    row.update(
        family=result.label,
        rate=repr(result.rate),
        p0=repr(result.spec.center),
        r_squared=repr(result.r_squared),
        r_squared_crit=repr(result.r_squared_crit),
        significant=str(result.significant),
    )
    return row


def cmd_batch(args, manifest):
    paths = _batch_inputs(args.input)
    if not paths:
        raise EmptyInput(f"no input files match {args.input!r}")
    manifest.inputs.extend(paths)
    jobs = [(p, args.tick, args.confidence, args.kummer_order) for p in paths]
    n_workers = args.jobs or os.cpu_count() or 1
    if n_workers == 1:
        rows = [_batch_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_batch_worker, jobs))
    n_sig = sum(r["significant"] == "True" for r in rows)
    with _open_out(args.out) as fh:
        writer = csv.DictWriter(fh, fieldnames=BATCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        fh.write(f"# significant_fraction={n_sig / len(rows):.6f} ({n_sig}/{len(rows)})\n")
    if args.out:
        manifest.outputs.append(args.out)
    print(f"{n_sig}/{len(rows)} samples significant ({100.0 * n_sig / len(rows):.2f}%)")
    if all(r["status"] == "error" for r in rows):
        raise ComputationError("every input failed")
    return EXIT_OK


def _synth_spec(args):
    family = args.family.lower()
    if family == "uniform":
        return None
    if family == "bessel":
        return ModelSpec(Family.BESSEL, {"C": 1.0, "omega": args.omega, "p0": args.p0})
    if family == "superposition":
        return ModelSpec(
            Family.SUPERPOSITION,
            {"C": 1.0, "omega1": args.omega, "p01": args.p0, "omega2": args.omega2 or args.omega, "p02": args.p02},
        )
    if family == "kummer":
        return ModelSpec(Family.KUMMER, {"C": 1.0, "m": args.m, "A": args.sqrt_a**2, "p0": args.p0})
    raise InvalidParameters(f"unknown family {args.family!r}")


def cmd_synth(args, manifest):
    if args.family == "superposition" and args.p02 is None:
        raise InvalidParameters("superposition needs --p02")
    config = synth.SynthConfig(
        spec=_synth_spec(args),
        tick=args.tick,
        price_range=(args.lo, args.hi),
        total_volume=args.volume,
        trades=args.trades,
        noise=args.noise,
        seed=args.seed,
    )
    if args.second_center is not None:
        trades = synth.generate_two_equilibrium(config, args.second_center, args.mix)
    else:
        trades = synth.generate(config)
    with _open_out(args.out) as fh:
        write_trades(trades, fh)
    if args.out:
        manifest.outputs.append(args.out)
    return EXIT_OK


def cmd_oracle(args, manifest):
    if args.mode == "bessel":
        report = oracle.bessel_ode_residual(args.omega, h=args.h)
    elif args.mode == "kummer":
        report = oracle.kummer_ode_residual(args.m, args.E, h=args.h)
    else:
        a = oracle.eigenvalue_search(args.m, args.E)
        expected = args.E**2 / (1 + 2 * args.m) ** 2
        print(f"A_{args.m} = {a!r} (closed form {expected!r}, relative gap {abs(a / expected - 1):.3e})")
        if args.out:
            _write_json(args.out, {"schema_version": SCHEMA_VERSION, "m": args.m, "E": args.E, "A": a})
            manifest.outputs.append(args.out)
        return EXIT_OK
    print(f"max residual {report.max_abs_residual:.3e} at h={report.step:g} over {report.grid.size} points")
    if args.out:
        _write_json(args.out, report.to_json_dict())
        manifest.outputs.append(args.out)
    return EXIT_OK


def _load_fit(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "attempts" in data:
        if data.get("chosen") is None:
            raise InvalidParameters(f"{path}: ladder has no significant fit")
        data = data["attempts"][data["chosen"]]["result"]
    return fitting.FitResult.from_json_dict(data)


def cmd_dynamics(args, manifest):
    result = _load_fit(args.fit)
    dist = build_distribution(read_trades(args.trades), args.tick)
    manifest.inputs.extend([args.fit, args.trades])
    profile = dynamics.compute_profile(dist, result)
    with _open_out(args.out) as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION} units=natural(V/B^2=1) A={profile.restoring_a!r}\n")
        profile.write_csv(fh)
    if args.out:
        manifest.outputs.append(args.out)
    residual = dynamics.check_energy_hypothesis(profile, dist)
    print(f"A={profile.restoring_a:.6g} max|energy residual|={abs(residual).max():.3e}")
    return EXIT_OK


def _family(value):
    try:
        return Family.parse(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown family {value!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="vpwave", description="Volume-at-price eigenfunction fitting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--manifest", help="write a run manifest JSON here")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tick", default=str(DEFAULT_TICK))
    common.add_argument("--out", help="output file (default: standard output where applicable)")

    fitting_opts = argparse.ArgumentParser(add_help=False)
    fitting_opts.add_argument("--confidence", type=float, default=fitting.DEFAULT_CONFIDENCE)
    fitting_opts.add_argument("--kummer-order", type=int, default=1)

    p = sub.add_parser("fit", parents=[common, fitting_opts], help="fit one trade file")
    p.add_argument("input")
    p.add_argument("--family", type=_family, help="fit one family instead of running the ladder")
    p.add_argument("--plot-data", help="CSV of empirical vs model probabilities")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("batch", parents=[common, fitting_opts], help="ladder over many trade files")
    p.add_argument("input", help="directory of CSV files or a glob pattern")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all CPUs)")
    p.set_defaults(handler=cmd_batch)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic trade file")
    p.add_argument("--family", default="bessel", choices=("bessel", "superposition", "kummer", "uniform"))
    p.add_argument("--omega", type=float, default=5.0)
    p.add_argument("--omega2", type=float)
    p.add_argument("--p0", type=float, default=10.0)
    p.add_argument("--p02", type=float)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--sqrt-a", type=float, default=5.0)
    p.add_argument("--lo", default="9.70")
    p.add_argument("--hi", default="10.29")
    p.add_argument("--volume", type=int, default=10_000_000)
    p.add_argument("--trades", type=int, default=5000)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--second-center", help="switch to this center part-way through the session")
    p.add_argument("--mix", type=float, default=0.5, help="share of the session before the switch")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("oracle", parents=[common], help="ODE residual and eigenvalue checks")
    p.add_argument("--mode", choices=("bessel", "kummer", "eigen"), default="bessel")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--E", type=float, default=1.0)
    p.add_argument("--h", type=float, default=oracle.DEFAULT_STEP)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("dynamics", parents=[common], help="per-level dynamics profile for a Bessel fit")
    p.add_argument("--in", dest="fit", required=True, help="FitResult or ladder JSON")
    p.add_argument("--trades", required=True)
    p.set_defaults(handler=cmd_dynamics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    config = {k: (str(v) if not isinstance(v, (int, float, str, bool, type(None))) else v)
              for k, v in vars(args).items() if k != "handler"}
    manifest = RunManifest(command=args.command, config=config)
    try:
        status = args.handler(args, manifest)
    except (InputError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"vpwave {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_INPUT
    except ComputationError as exc:
        print(f"vpwave {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_COMPUTE
    manifest.finished = time.time()
    if args.manifest and status == EXIT_OK:
        _write_json(args.manifest, manifest.to_json_dict())
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
