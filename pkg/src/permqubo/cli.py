"""Command-line interface.

Subcommands:
    build   -- reformulate an instance file as an unconstrained model
    gap     -- spectral-gap profiles along the interpolation path
    solve   -- run a solver and report the sample distribution
    bench   -- run a full experiment spec (or preset)
    report  -- render a benchmark report to CSV / a console summary

Exit codes: 0 success, 2 validation error, 3 solver failure,
4 size-cap refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .anneal import (
    AnnealSchedule,
    SampleEntry,
    SampleSet,
    evolve,
    evolve_trotter,
    measure,
    most_frequent,
    simulated_annealing,
    success_probability,
)
from .bench import BenchReport, ExperimentSpec, preset_spec, run_experiment
from .errors import SizeCapError, SolverError
from .provenance import make_provenance, sha256_of_file
from .qap import QapInstance, brute_force_qap, qap_energy, worst_permutation
from .qubo import (
    QuboModel,
    build_formulation,
    coupling_report,
    decode,
    exhaustive_minimum,
    export_sparse,
    normalize_couplings,
    penalty_bounds,
    to_spin,
)
from .spectral import MAX_QUBITS, build_hamiltonians, gap_profile


def _load_instance(path) -> QapInstance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return QapInstance.from_dict(data)


def _provenance(seed, paths) -> dict:
    return make_provenance(__version__, seed, {str(p): sha256_of_file(p) for p in paths})


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def _resolve_format(args, allowed: tuple, default: str) -> str:
    """Output format from --format, falling back to the --out extension."""
    fmt = getattr(args, "format", "auto")
    if fmt == "auto":
        suffix = Path(args.out).suffix.lower().lstrip(".")
        fmt = suffix if suffix in allowed else default
    if fmt not in allowed:
        raise ValueError(
            f"{args.command} writes {' or '.join(allowed)} output, not {fmt!r}"
        )
    return fmt


def cmd_build(args) -> int:
    _resolve_format(args, ("json",), "json")
    inst = _load_instance(args.instance)
    model = build_formulation(inst, args.formulation, args.scale)
    bounds = penalty_bounds(inst)
    ranges = coupling_report(model, inst)
    payload = model.to_dict()
    payload["scale"] = args.scale
    payload["penalty_bounds"] = {
        "lambda_baseline": bounds.lambda_baseline,
        "lambda_rows": bounds.lambda_rows.tolist(),
        "lambda1": bounds.lambda1.tolist(),
        "lambda2": bounds.lambda2,
    }
    payload["coupling_report"] = ranges.to_dict()
    payload["provenance"] = _provenance(args.seed, [args.instance])
    _write_json(args.out, payload)
    if args.sparse_out:
        export_sparse(model, args.sparse_out)
    if args.formulation == "baseline":
        lam_text = f"lambda={bounds.lambda_baseline:.6g}"
    elif args.formulation == "row_wise":
        lam_text = "lambda_i=" + ",".join(f"{v:.6g}" for v in bounds.lambda_rows)
    else:
        lam_text = (
            "lambda1=" + ",".join(f"{v:.6g}" for v in bounds.lambda1)
            + f" lambda2={bounds.lambda2:.6g}"
        )
    print(
        f"built {args.formulation} model: dim={model.dim} scale={args.scale} {lam_text} "
        f"Q range [{ranges.quadratic_problem[0]:.3g}, {ranges.quadratic_penalty[1]:.3g}] "
        f"q range [{ranges.linear_penalty[0]:.3g}, {ranges.linear_problem[1]:.3g}]"
    )
    return 0


def cmd_gap(args) -> int:
    fmt = _resolve_format(args, ("csv", "json"), "csv")
    inst = _load_instance(args.instance)
    dim = (inst.n - 1) ** 2 if args.formulation == "inserted" else inst.n**2
    if dim > MAX_QUBITS:
        raise SizeCapError(
            f"gap profiles are limited to {MAX_QUBITS} qubits; "
            f"{args.formulation} at n={inst.n} needs {dim}"
        )
    scales = [float(s) for s in args.scales.split(",")]
    out = Path(args.out)
    summaries = []
    for scale in scales:
        model = build_formulation(inst, args.formulation, scale)
        profile = gap_profile(model, num_samples=args.samples)
        entry = profile.summary(scale=scale, formulation=args.formulation)
        if fmt == "csv":
            if len(scales) == 1:
                csv_path = out
            else:
                csv_path = out.with_name(f"{out.stem}_scale{scale:g}{out.suffix or '.csv'}")
            profile.to_csv(csv_path)
            entry["csv"] = str(csv_path)
        else:
            entry.update({
                "u": profile.ts.tolist(),
                "e0": profile.e0.tolist(),
                "e1": profile.e1.tolist(),
                "gap": profile.gaps().tolist(),
            })
        summaries.append(entry)
        print(f"scale={scale:g}: min_gap={profile.min_gap:.6g} at u={profile.argmin_t:.4g}")
    payload = {"profiles": summaries, "provenance": _provenance(args.seed, [args.instance])}
    if fmt == "json":
        _write_json(out, payload)
    if args.summary_out:
        _write_json(args.summary_out, payload)
    return 0


def _solve_model(model: QuboModel, args) -> SampleSet:
    if args.solver == "brute":
        bits, energy = exhaustive_minimum(model)
        perm = decode(model, bits)
        entry = SampleEntry(
            bits=tuple(int(b) for b in bits),
            energy=energy,
            count=1,
            valid=perm is not None,
            assignment=None if perm is None else tuple(int(a) for a in perm.assignment),
        )
        return SampleSet(entries=[entry], total=1, metadata={"solver": "brute"})
    if args.solver == "sa":
        return simulated_annealing(model, sweeps=args.sweeps, runs=args.runs, seed=args.seed)
    sched = AnnealSchedule(tau=args.tau, steps=args.steps)
    spin, _ = normalize_couplings(to_spin(model))
    pair = build_hamiltonians(spin)
    if pair.num_qubits > 12:
        raise SizeCapError(
            f"state-vector simulation is limited to 12 qubits, needs {pair.num_qubits}"
        )
    if args.solver == "schrodinger":
        state = evolve(pair, sched)
    else:
        state = evolve_trotter(pair, sched, slices=args.slices)
    samples = measure(state, shots=args.shots, seed=args.seed, model=model)
    samples.metadata["schedule"] = sched.params()
    samples.metadata["solver"] = args.solver
    return samples


def cmd_solve(args) -> int:
    _resolve_format(args, ("json",), "json")
    inputs = []
    if args.qubo:
        model = QuboModel.load(args.qubo)
        inputs.append(args.qubo)
        inst = _load_instance(args.instance) if args.instance else None
        if args.instance:
            inputs.append(args.instance)
    else:
        if not args.instance:
            raise ValueError("solve needs --instance (or --qubo)")
        inst = _load_instance(args.instance)
        inputs.append(args.instance)
        model = build_formulation(inst, args.formulation, args.scale)

    samples = _solve_model(model, args)
    samples.metadata["provenance"] = _provenance(args.seed, inputs)

    mf = most_frequent(samples)
    summary = {
        "most_frequent": mf.to_dict(),
        "total": samples.total,
    }
    if inst is not None:
        report = success_probability(samples, inst)
        _, f_opt = brute_force_qap(inst)
        _, f_worst = worst_permutation(inst)
        if mf.assignment is not None:
            from .bench import vectorize_assignment

            normalized = qap_energy(inst, vectorize_assignment(inst.n, mf.assignment)) - f_opt
        else:
            normalized = f_worst - f_opt
        summary["success"] = report.to_dict()
        summary["most_frequent_normalized_energy"] = normalized
        print(
            f"success probability {report.probability:.4f} "
            f"(random guessing {report.reference.numerator}/{report.reference.denominator} "
            f"= {float(report.reference):.4%}); most frequent solution normalized energy "
            f"{normalized:.6g}"
        )
    else:
        print(f"most frequent state energy {mf.energy:.6g} (count {mf.count}/{samples.total})")
    payload = samples.to_dict()
    payload["summary"] = summary
    _write_json(args.out, payload)
    if args.hist_out:
        samples.histogram_csv(args.hist_out)
    return 0


def cmd_bench(args) -> int:
    _resolve_format(args, ("json",), "json")
    if args.preset:
        spec = preset_spec(args.preset, n=args.n, seed=args.seed)
    else:
        if not args.spec:
            raise ValueError("bench needs --spec or --preset")
        spec = ExperimentSpec.load(args.spec)
    report = run_experiment(spec)
    if args.spec:
        report.provenance["inputs"] = {str(args.spec): sha256_of_file(args.spec)}
    report.provenance["version"] = __version__
    report.save(args.out)
    if args.csv_out:
        report.to_csv(args.csv_out)
    for key, agg in sorted(report.aggregates.items()):
        gap = agg["mean_min_gap"]
        gap_text = f" mean_min_gap={gap:.6g}" if gap is not None else ""
        print(
            f"{key}: mean_normalized_energy={agg['mean_normalized_energy']:.6g} "
            f"mean_success={agg['mean_success']:.3f}{gap_text}"
        )
    return 0


def cmd_report(args) -> int:
    data = json.loads(Path(args.report).read_text(encoding="utf-8"))
    if "instances" not in data or "aggregates" not in data:
        raise ValueError(f"{args.report} is not a benchmark report")
    if args.out:
        spec = ExperimentSpec.from_dict(data["spec"])
        report = BenchReport(
            spec=spec, instances=data["instances"], aggregates=data["aggregates"],
            provenance=data.get("provenance", {}),
        )
        report.to_csv(args.out)
        print(f"wrote {args.out}")
    for key, agg in sorted(data["aggregates"].items()):
        print(
            f"{key}: mean_normalized_energy={agg['mean_normalized_energy']:.6g} "
            f"mean_success={agg['mean_success']:.3f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permqubo",
        description="Permutation-constrained assignment problems as unconstrained binary models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="seed recorded in outputs")
        p.add_argument("--format", choices=("auto", "json", "csv"), default="auto",
                       help="output format (default: inferred from --out extension)")
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("build", help="build an unconstrained model from an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--formulation", required=True, choices=("baseline", "row_wise", "inserted"))
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--sparse-out", help="optional upper-triangular text export")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("gap", help="spectral-gap profile along the interpolation path")
    p.add_argument("--instance", required=True)
    p.add_argument("--formulation", required=True, choices=("baseline", "row_wise", "inserted"))
    p.add_argument("--scales", default="1.0", help="comma-separated penalty scales")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out", required=True, help="CSV output path (suffixed per scale)")
    p.add_argument("--summary-out", help="optional JSON summary path")
    common(p)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("solve", help="run a solver and report the sample distribution")
    p.add_argument("--instance", help="instance JSON (enables success statistics)")
    p.add_argument("--qubo", help="prebuilt model JSON (instead of building)")
    p.add_argument("--formulation", default="baseline", choices=("baseline", "row_wise", "inserted"))
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--solver", required=True, choices=("brute", "sa", "schrodinger", "trotter"))
    p.add_argument("--tau", type=float, default=100.0)
    p.add_argument("--steps", type=int)
    p.add_argument("--slices", type=int, default=256)
    p.add_argument("--shots", type=int, default=500)
    p.add_argument("--runs", type=int, default=500)
    p.add_argument("--sweeps", type=int, default=100)
    p.add_argument("--out", required=True, help="sample set JSON output path")
    p.add_argument("--hist-out", help="optional histogram CSV path")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run an experiment spec or preset")
    p.add_argument("--spec", help="experiment spec JSON")
    p.add_argument("--preset", choices=("gap-scan", "random-dense", "success-probability", "sa-comparison"))
    p.add_argument("--n", type=int, help="instance size override for presets")
    p.add_argument("--out", required=True, help="report JSON output path")
    p.add_argument("--csv-out", help="optional CSV table path")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="render a benchmark report")
    p.add_argument("--report", required=True, help="report JSON produced by bench")
    p.add_argument("--out", help="CSV table output path")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
