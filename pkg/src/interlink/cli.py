"""Command-line entry point: ``interlink <subcommand> FILE [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import errors
from .closed_form import superdiffusion_window, thresholds_allpairs
from .core import build_supra_laplacian, uniform_assignment
from .design import greedy_interlinks
from .diffusion import simulate
from .embedding import recover_embedding
from .formats import (csv_text, dumps, format_float, is_parameter_file, parse_network, parse_parameters,
                      parse_pattern_spec, run_report)
from .spectra import full_spectrum
from .weight_opt import (SolverOptions, detect_threshold_numeric, layer_lambda2, maximize_lambda2,
                         sweep_budget)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3

INPUT_ERRORS = (errors.ParseError, errors.ValidationError, errors.IndexOutOfRange, errors.InvalidWeight,
                errors.EmptyPattern, errors.SizeMismatch, errors.DegenerateCase, errors.InfeasiblePattern,
                errors.NotRegular, errors.TooManyPairs, errors.ExhaustedPairs, errors.ZeroLambda)


class UsageError(Exception):
    pass


def _budgets(spec):
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise UsageError(f"--budgets expects start:stop:step, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise UsageError(f"--budgets needs step > 0 and stop >= start, got {spec!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(count)]


def _parser():
    p = argparse.ArgumentParser(prog="interlink", description="Algebraic connectivity of two-layer networks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("analyze", "layer spectra, thresholds and super-diffusion window"),
        ("optimize", "maximise lambda_2 for one budget"),
        ("sweep", "maximise lambda_2 over a range of budgets"),
        ("embed", "optimal dual embedding coordinates"),
        ("greedy", "greedy interlink placement"),
        ("simulate", "diffusion trajectory"),
        ("thresholds", "closed-form and numeric transition budgets"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("file", help="network file, or parameter file for thresholds")
        s.add_argument("--budget", type=float, help="interlink budget c")
        s.add_argument("--budgets", help="budget range start:stop:step")
        s.add_argument("--tol", type=float, default=1e-4, help="duality gap tolerance (default 1e-4)")
        s.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
        s.add_argument("--pattern", help="override the admissible set: all, one2one, k2k:<k>")
        s.add_argument("--out", help="directory for the report and tables")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.add_argument("--no-warm-start", action="store_true", help="solve sweep points independently")
        if name == "greedy":
            s.add_argument("--edges", "-r", type=int, required=True, help="number of interlinks to add")
        if name == "simulate":
            s.add_argument("--t-max", type=float, default=10.0)
            s.add_argument("--samples", type=int, default=201)
            s.add_argument("--weights", choices=("optimal", "uniform"), default="optimal")
            s.add_argument("--initial", choices=("random", "layers"), default="random",
                           help="random state or +1 on layer 1 and -1 on layer 2")
    return p


def _load_network(args):
    text = Path(args.file).read_text(encoding="utf-8")
    net = parse_network(text, name=Path(args.file).stem)
    if args.pattern:
        net = net.with_pattern(parse_pattern_spec(args.pattern.split(), net.n, net.m))
    return net


def _need_budget(args):
    if args.budget is None:
        raise UsageError(f"{args.command} needs --budget")
    return args.budget


def _options(args):
    return SolverOptions(tol_gap=args.tol, rng_seed=args.seed, warm_start=not args.no_warm_start)


def _weights_rows(net, assignment):
    return [[i, j, float(w)] for (i, j), w in zip(net.pattern.pairs, assignment.vector(net.pattern))]


def _result_tree(net, res):
    return {
        "budget": res.budget,
        "lambda2_star": res.lambda2_star,
        "mu": res.mu,
        "certified_upper": res.certified_upper,
        "gap": res.gap,
        "mode": res.mode,
        "status": res.status,
        "iterations": res.iterations,
        "fiedler_multiplicity": res.fiedler_multiplicity,
        "weights": _weights_rows(net, res.assignment),
    }


def _thresholds_tree(l21, l22, n, m):
    try:
        rep = thresholds_allpairs(l21, l22, n, m)
    except errors.DegenerateCase as exc:
        rep = exc.report
    return {
        "case_label": rep.case_label,
        "c_star": rep.c_star,
        "c_star_star": rep.c_star_star,
        "mirrored": rep.mirrored,
        "formulas_used": list(rep.formulas_used),
        "specific_connectivities": list(rep.specific_connectivities),
    }


def _cmd_analyze(args, net):
    l21, l22 = layer_lambda2(net)
    sd = superdiffusion_window(l21, l22, net.n, net.m)
    spectra = {
        "layer1": full_spectrum(net.layer1.laplacian()).eigenvalues,
        "layer2": full_spectrum(net.layer2.laplacian()).eigenvalues,
    }
    if args.budget is not None:
        L = build_supra_laplacian(net, uniform_assignment(net.pattern, args.budget))
        spectra["supra_uniform"] = full_spectrum(L.matrix).eigenvalues
    report = run_report("analyze", _inputs(args, net), layer_lambda2=[l21, l22],
                        thresholds=_thresholds_tree(l21, l22, net.n, net.m),
                        superdiffusion={"condition_holds": sd.condition_holds, "case_label": sd.case_label,
                                        "inequality_values": list(sd.inequality_values)},
                        spectra=spectra)
    e1, e2 = spectra["layer1"], spectra["layer2"]
    rows = [[k, float(e1[k]) if k < len(e1) else "", float(e2[k]) if k < len(e2) else ""]
            for k in range(max(len(e1), len(e2)))]
    return report, ("spectra", ["k", "layer1", "layer2"], rows)


def _cmd_optimize(args, net):
    res = maximize_lambda2(net, _need_budget(args), _options(args))
    report = run_report("optimize", _inputs(args, net), result=_result_tree(net, res))
    return report, ("weights", ["i", "j", "weight"], _weights_rows(net, res.assignment))


def _cmd_sweep(args, net):
    if args.budgets is None:
        raise UsageError("sweep needs --budgets start:stop:step")
    results = sweep_budget(net, _budgets(args.budgets), _options(args))
    rows = [[c, r.lambda2_star, r.gap, r.mode, r.fiedler_multiplicity] for c, r in results]
    report = run_report("sweep", _inputs(args, net), results=[_result_tree(net, r) for _, r in results])
    return report, ("sweep", ["c", "lambda2_star", "gap", "mode", "multiplicity"], rows)


def _cmd_embed(args, net):
    res = maximize_lambda2(net, _need_budget(args), _options(args))
    emb = recover_embedding(net, res)
    U = emb.coordinates
    header = ["node", "layer"] + [f"x{k + 1}" for k in range(U.shape[1])] + ["nu"]
    rows = [[v, 1 if v < net.n else 2] + [float(x) for x in U[v]] + [emb.nu] for v in range(net.N)]
    report = run_report("embed", _inputs(args, net), result=_result_tree(net, res),
                        embedding={"nu": emb.nu, "objective": emb.objective, "dimension": emb.dimension,
                                   "coordinates": U})
    return report, ("embedding", header, rows)


def _cmd_greedy(args, net):
    r = args.edges
    c = _need_budget(args)
    if r < 0:
        raise UsageError("--edges must be nonnegative")
    plan = greedy_interlinks(net, r, c / r if r else 1.0)
    rows = [[s + 1, i, j, lam] for s, ((i, j), lam) in enumerate(zip(plan.added_edges, plan.lambda2_trace))]
    report = run_report("greedy", _inputs(args, net),
                        plan={"w0": plan.w0, "r": plan.r, "added_edges": [list(e) for e in plan.added_edges],
                              "lambda2_trace": list(plan.lambda2_trace)})
    return report, ("greedy", ["step", "i", "j", "lambda2"], rows)


def _cmd_simulate(args, net):
    c = _need_budget(args)
    if args.samples < 2 or args.t_max <= 0:
        raise UsageError("simulate needs --samples >= 2 and --t-max > 0")
    if args.weights == "optimal":
        assignment = maximize_lambda2(net, c, _options(args)).assignment
    else:
        assignment = uniform_assignment(net.pattern, c)
    L = build_supra_laplacian(net, assignment)
    if args.initial == "random":
        x0 = np.random.default_rng(args.seed).standard_normal(net.N)
    else:
        x0 = np.concatenate([np.ones(net.n), -np.ones(net.m)])
    times = np.linspace(0.0, args.t_max, args.samples)
    traj = simulate(L, x0, times)
    header = ["t"] + [f"x{v}" for v in range(net.N)]
    rows = [[float(t)] + [float(x) for x in s] for t, s in zip(traj.times, traj.states)]
    report = run_report("simulate", _inputs(args, net), weights=_weights_rows(net, assignment),
                        trajectory={"times": traj.times, "states": traj.states})
    return report, ("trajectory", header, rows)


def _cmd_thresholds(args, text):
    if is_parameter_file(text):
        params = parse_parameters(text)
        n, m, l21, l22 = params["n"], params["m"], params["lambda2_1"], params["lambda2_2"]
        inputs = {"file": args.file, "parameters": params}
        numeric = None
    else:
        net = parse_network(text, name=Path(args.file).stem)
        if args.pattern:
            net = net.with_pattern(parse_pattern_spec(args.pattern.split(), net.n, net.m))
        n, m = net.n, net.m
        l21, l22 = layer_lambda2(net)
        inputs = _inputs(args, net)
        numeric = detect_threshold_numeric(net, _options(args))
    rep = thresholds_allpairs(l21, l22, n, m)
    tree = {"case_label": rep.case_label, "c_star": rep.c_star, "c_star_star": rep.c_star_star,
            "mirrored": rep.mirrored, "formulas_used": list(rep.formulas_used), "c_star_numeric": numeric}
    report = run_report("thresholds", inputs, layer_lambda2=[l21, l22], thresholds=tree)
    rows = [["c_star", rep.c_star, "" if numeric is None else numeric],
            ["c_star_star", "" if rep.c_star_star is None else rep.c_star_star, ""]]
    return report, ("thresholds", ["quantity", "closed_form", "numeric"], rows)


def _inputs(args, net):
    return {
        "file": args.file,
        "n": net.n,
        "m": net.m,
        "pattern": net.pattern.kind,
        "admissible_pairs": len(net.pattern),
        "budget": args.budget,
        "budgets": args.budgets,
        "tol": args.tol,
        "seed": args.seed,
    }


COMMANDS = {
    "analyze": _cmd_analyze,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "embed": _cmd_embed,
    "greedy": _cmd_greedy,
    "simulate": _cmd_simulate,
}


def _emit(args, report, table, stdout):
    name, header, rows = table
    if args.format == "json":
        report["table"] = {"name": name, "header": header, "rows": rows}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(report) + "\n", encoding="utf-8")
        if args.format == "csv":
            (out / f"{name}.csv").write_text(csv_text(header, rows), encoding="utf-8")
    elif args.format == "csv":
        stdout.write(csv_text(header, rows))
    else:
        stdout.write(dumps(report) + "\n")


def _error(stderr, exc, code):
    obj = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, errors.ParseError):
        obj["line"] = exc.line
    if isinstance(exc, errors.Unconverged) and exc.result is not None:
        obj["gap"] = format_float(exc.result.gap)
    stderr.write(json.dumps(obj) + "\n")
    return code


def run_command(argv=None, stdout=None, stderr=None) -> int:
    """Run one subcommand; returns the exit status (0 ok, 2 bad input, 3 solver failure)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.command == "thresholds":
            report, table = _cmd_thresholds(args, Path(args.file).read_text(encoding="utf-8"))
        else:
            report, table = COMMANDS[args.command](args, _load_network(args))
        _emit(args, report, table, stdout)
    except (UsageError, OSError) + INPUT_ERRORS as exc:
        return _error(stderr, exc, EXIT_INPUT)
    except errors.InterlinkError as exc:
        return _error(stderr, exc, EXIT_SOLVER)
    return EXIT_OK


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
