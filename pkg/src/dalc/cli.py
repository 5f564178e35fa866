"""Command-line interface: ``dalc {train,predict,bounds,reverse-cv,moons,beta}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every command writes
a JSON run report next to its primary output.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import estimators as est
from .bounds import BoundInputs, da_generalization_bound, sweep_bc
from .data import (
    SOURCE,
    TARGET,
    DataFormatError,
    DiscreteDomainPair,
    MoonsConfig,
    export_decision_grid,
    load_dataset,
    make_moons,
    save_csv,
)
from .kernels import LINEAR, RBF, KernelSpec
from .model import ModelFormatError, load, save, train
from .objective import DalcHyperparams
from .optimizer import GRADIENT_DESCENT, QUASI_NEWTON, OptimizerConfig, OptimizationError
from .validation import GridSpec, grid_search, parse_range

log = logging.getLogger("dalc")


class UsageError(Exception):
    pass


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, allow_nan=True)
        fh.write("\n")


def _report(args, config, started, outputs, metrics):
    return {
        "command": args.command,
        "argv": sys.argv[1:] if args.argv is None else args.argv,
        "config": config,
        "timings": {"seconds": time.perf_counter() - started},
        "outputs": outputs,
        "metrics": metrics,
    }


def _kernel(args):
    return KernelSpec(args.kernel, args.gamma)


def _opt(args):
    return OptimizerConfig(max_iterations=args.max_iter, gradient_tolerance=args.tol,
                           method=args.method)


def _add_kernel(p):
    p.add_argument("--kernel", choices=[LINEAR, RBF], default=RBF)
    p.add_argument("--gamma", type=float, default=1.0, help="rbf width: exp(-gamma |x-x'|^2)")


def _add_opt(p):
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6, help="gradient infinity-norm tolerance")
    p.add_argument("--method", choices=[QUASI_NEWTON, GRADIENT_DESCENT], default=QUASI_NEWTON)


def _add_data(p, *names):
    for name in names:
        p.add_argument(f"--{name}", required=True,
                       help="sparse text file, or .csv with a header")
    p.add_argument("--label-column", default="label", help="CSV label column name")
    p.add_argument("--dim", type=int, default=None, help="feature dimension for sparse files")


def _load_pair(args):
    source = load_dataset(args.source, SOURCE, args.label_column, args.dim)
    target = load_dataset(args.target, TARGET, args.label_column, args.dim)
    if not source.labeled:
        raise UsageError(f"{args.source}: source file has no labels")
    if target.labeled:
        target = target.unlabeled()
    dim = max(source.dim, target.dim)
    if source.dim != target.dim and args.dim is None and source.is_sparse and target.is_sparse:
        source = load_dataset(args.source, SOURCE, args.label_column, dim)
        target = load_dataset(args.target, TARGET, args.label_column, dim).unlabeled()
    return source, target


def _report_path(args, default):
    return args.report or default


# ------------------------------------------------------------------- commands


def cmd_train(args):
    if args.primal and args.kernel != LINEAR:
        raise UsageError("--primal requires --kernel linear")
    started = time.perf_counter()
    source, target = _load_pair(args)
    hp = DalcHyperparams(args.B, args.C)
    model = train(source, target, _kernel(args), hp, _opt(args), primal=args.primal)
    save(model, args.out)
    tr = model.trace
    metrics = {
        "final_objective": tr.objective_values[-1],
        "initial_objective": tr.objective_values[0],
        "iterations": tr.iterations,
        "converged": tr.converged,
        "final_gradient_norm": tr.final_gradient_norm,
        "target_disagreement": est.empirical_disagreement(model, target),
        "source_joint_error": est.empirical_joint_error(model, source),
        "source_gibbs_risk": est.empirical_gibbs_risk(model, source),
        "source_error": est.empirical_vote_risk(model, source),
        "kl": model.kl(),
    }
    config = {"kernel": model.kernel.to_dict(), "B": hp.B, "C": hp.C, "primal": args.primal,
              "optimizer": _opt(args).__dict__, "m_s": len(source), "m_t": len(target)}
    rpath = _report_path(args, args.out + ".report.json")
    _write_json(_report(args, config, started, {"model": args.out, "report": rpath}, metrics), rpath)
    print(f"trained {model.form} model: objective {metrics['final_objective']:.4g} "
          f"after {tr.iterations} iterations (converged={tr.converged})")
    print(f"target disagreement {metrics['target_disagreement']:.4g}, "
          f"source joint error {metrics['source_joint_error']:.4g}")
    return 0


def cmd_predict(args):
    started = time.perf_counter()
    model = load(args.model)
    data = load_dataset(args.data, TARGET, args.label_column, args.dim or model.dim)
    if data.dim != model.dim:
        raise ValueError(f"dimension mismatch: model {model.dim} vs data {data.dim}")
    pred = model.predict(data.X)
    with open(args.out, "w") as fh:
        fh.writelines(f"{int(p):+d}\n" for p in pred)
    metrics = {"n": len(data)}
    if data.labeled:
        metrics["error"] = float(np.mean(pred != data.labels))
        print(f"error {metrics['error']:.4g} on {len(data)} examples")
    rpath = _report_path(args, args.out + ".report.json")
    _write_json(_report(args, {"model": args.model}, started,
                        {"predictions": args.out, "report": rpath}, metrics), rpath)
    return 0


def _grid_values(text):
    if ":" in text:
        return parse_range(text)
    return [float(v) for v in text.split(",")]


def _bounds_table(report, sweep):
    rows = [
        ("b'", report.b_prime),
        ("c'", report.c_prime),
        ("target disagreement (empirical)", report.inputs.d_hat),
        ("source joint error (empirical)", report.inputs.e_hat),
        ("KL", report.inputs.kl),
        ("plug-in ideal bound", report.ideal_bound),
        ("source Gibbs risk bound", report.source_gibbs_bound),
        ("target disagreement bound", report.disagreement_bound),
        ("source joint error bound", report.joint_error_bound),
        ("target Gibbs risk bound", report.target_gibbs_bound),
        ("target vote risk bound", report.target_vote_bound),
    ]
    width = max(len(r[0]) for r in rows)
    lines = [f"{name:<{width}}  {'-' if v is None else format(v, '.4g')}" for name, v in rows]
    if sweep is not None:
        best = sweep["best"]
        lines.append(f"sweep minimum (no union-bound correction): b={best['b']:.4g} "
                     f"c={best['c']:.4g} vote bound {best['target_vote']:.4g}")
    return "\n".join(lines)


def cmd_bounds(args):
    if not 0.0 <= args.eta <= 1.0:
        raise UsageError("--eta must lie in [0, 1]")
    if not 0.0 < args.delta <= 1.0:
        raise UsageError("--delta must lie in (0, 1]")
    if (args.sweep_b is None) != (args.sweep_c is None):
        raise UsageError("--sweep-b and --sweep-c go together")
    if (args.q is None) != (args.beta_q is None):
        raise UsageError("--q and --beta-q go together")
    started = time.perf_counter()
    model = load(args.model)
    source = load_dataset(args.source, SOURCE, args.label_column, model.dim)
    target = load_dataset(args.target, TARGET, args.label_column, model.dim)
    if not source.labeled:
        raise UsageError(f"{args.source}: source file has no labels")
    eta = est.capped_eta(args.eta, args.outside_mass)
    inputs = BoundInputs(
        d_hat=est.empirical_disagreement(model, target),
        e_hat=est.empirical_joint_error(model, source),
        kl=model.kl(),
        m_s=len(source),
        m_t=len(target),
        b=args.b,
        c=args.c,
        delta=args.delta,
        beta_inf=args.beta_inf,
        eta=eta,
        q=args.q,
        beta_q=args.beta_q,
        source_gibbs=est.empirical_gibbs_risk(model, source),
    )
    report = da_generalization_bound(inputs, simple=args.simple)
    sweep = None
    if args.sweep_b is not None:
        sweep = sweep_bc(inputs, _grid_values(args.sweep_b), _grid_values(args.sweep_c),
                         args.simple)
    out = {"bounds": report.to_dict(), "sweep": sweep}
    if args.out:
        _write_json(out, args.out)
    print(_bounds_table(report, sweep))
    rpath = _report_path(args, (args.out or "bounds.json") + ".report.json")
    _write_json(_report(args, {"b": args.b, "c": args.c, "delta": args.delta,
                               "beta_inf": args.beta_inf, "eta": eta, "simple": args.simple},
                        started, {"bounds": args.out, "report": rpath}, out), rpath)
    return 0


def cmd_reverse_cv(args):
    started = time.perf_counter()
    source, target = _load_pair(args)
    kernel = _kernel(args)
    grid = GridSpec(
        parse_range(args.grid_c) if args.grid_c else GridSpec().c_values,
        parse_range(args.grid_b) if args.grid_b else GridSpec().b_values,
    )
    rep = grid_search(source, target, kernel, grid, args.folds, args.seed, _opt(args), args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    matrix_path = os.path.join(args.out_dir, "risks.csv")
    with open(matrix_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["C\\B"] + [f"{b:.17g}" for b in rep.b_values])
        for c, row in zip(rep.c_values, rep.risks):
            w.writerow([f"{c:.17g}"] + [f"{v:.17g}" for v in row])
    sel_path = os.path.join(args.out_dir, "selection.json")
    _write_json(rep.to_dict(), sel_path)
    model = train(source, target, kernel, rep.selected, _opt(args))
    model_path = os.path.join(args.out_dir, "model.json")
    save(model, model_path)
    rpath = _report_path(args, os.path.join(args.out_dir, "report.json"))
    metrics = {"selected": {"B": rep.selected.B, "C": rep.selected.C},
               "selected_risk": float(rep.risks.min())}
    _write_json(_report(args, {"kernel": kernel.to_dict(), "folds": args.folds, "seed": args.seed,
                               "grid": {"c": rep.c_values, "b": rep.b_values}},
                        started, {"risks": matrix_path, "selection": sel_path,
                                  "model": model_path, "report": rpath}, metrics), rpath)
    print(f"selected B={rep.selected.B:.4g} C={rep.selected.C:.4g} "
          f"(reverse risk {metrics['selected_risk']:.4g})")
    return 0


def cmd_moons(args):
    started = time.perf_counter()
    cfg = MoonsConfig(args.n, args.noise, args.rotation, args.seed)
    source, target, target_labels = make_moons(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {
        "source": os.path.join(args.out_dir, "source.csv"),
        "target": os.path.join(args.out_dir, "target.csv"),
        "target_labels": os.path.join(args.out_dir, "target_labels.txt"),
    }
    save_csv(source, paths["source"])
    save_csv(target, paths["target"])
    with open(paths["target_labels"], "w") as fh:
        fh.writelines(f"{int(v):+d}\n" for v in target_labels)
    metrics = {}
    if args.run_experiment:
        kernel = KernelSpec(RBF, args.gamma)
        opt = OptimizerConfig(max_iterations=args.max_iter)
        dalc = train(source, target, kernel, DalcHyperparams(args.B, args.C), opt)
        base = train(source, target, kernel, DalcHyperparams(args.B, 0.0), opt)
        metrics = {
            "dalc_target_error": float(np.mean(dalc.predict(target.X) != target_labels)),
            "baseline_target_error": float(np.mean(base.predict(target.X) != target_labels)),
            "dalc_source_error": est.empirical_vote_risk(dalc, source),
            "baseline_source_error": est.empirical_vote_risk(base, source),
        }
        both = np.vstack([source.X, target.X])
        lo, hi = both.min(axis=0) - 0.5, both.max(axis=0) + 0.5
        box = (lo[0], hi[0], lo[1], hi[1])
        paths["dalc_model"] = os.path.join(args.out_dir, "dalc_model.json")
        paths["decision_grid"] = os.path.join(args.out_dir, "decision_grid.csv")
        paths["baseline_decision_grid"] = os.path.join(args.out_dir, "baseline_decision_grid.csv")
        save(dalc, paths["dalc_model"])
        export_decision_grid(dalc, box, args.resolution, paths["decision_grid"])
        export_decision_grid(base, box, args.resolution, paths["baseline_decision_grid"])
        print(f"target error: DALC {metrics['dalc_target_error']:.4g}, "
              f"source-only {metrics['baseline_target_error']:.4g}")
    rpath = _report_path(args, os.path.join(args.out_dir, "report.json"))
    paths["report"] = rpath
    _write_json(_report(args, cfg.__dict__ | {"run_experiment": args.run_experiment},
                        started, paths, metrics), rpath)
    return 0


def cmd_beta(args):
    started = time.perf_counter()
    pair = DiscreteDomainPair(tuple(_floats(args.source_probs)), tuple(_floats(args.target_probs)))
    rows = []
    for q in args.q:
        r = est.beta_q_monte_carlo(pair.ratio, pair.sample_source, q, args.n, args.seed)
        rows.append({"q": q, "estimate": r.beta_q, "exact": pair.beta(q),
                     "lower_bound_only": r.lower_bound_only})
        print(f"q={q:<6g} estimate {r.beta_q:.4g}  exact {pair.beta(q):.4g}")
    rpath = args.report or "beta.report.json"
    _write_json(_report(args, {"source_probs": args.source_probs, "target_probs": args.target_probs,
                               "n": args.n, "seed": args.seed},
                        started, {"report": rpath}, {"beta": rows}), rpath)
    return 0


def _floats(text):
    return [float(v) for v in text.split(",")]


def _q_value(text):
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


# --------------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="dalc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a DALC model")
    _add_data(p, "source", "target")
    _add_kernel(p)
    p.add_argument("--B", type=float, default=1.0, help="source joint-error weight")
    p.add_argument("--C", type=float, default=1.0, help="target disagreement weight")
    p.add_argument("--primal", action="store_true", help="optimize w directly (linear kernel)")
    _add_opt(p)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a data file with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bounds", help="evaluate risk bounds for a trained model")
    p.add_argument("--model", required=True)
    _add_data(p, "source", "target")
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--beta-inf", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--outside-mass", type=float, default=None,
                   help="target mass outside the source support; caps --eta")
    p.add_argument("--q", type=_q_value, default=None)
    p.add_argument("--beta-q", type=float, default=None)
    p.add_argument("--sweep-b", help="comma list or lo:hi:n (log-spaced)")
    p.add_argument("--sweep-c", help="comma list or lo:hi:n (log-spaced)")
    p.add_argument("--simple", action="store_true", help="looser 1/(1-c/2) factor, c in (0,2)")
    p.add_argument("--out", help="JSON output path")
    p.add_argument("--report")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reverse-cv", help="select B and C by reverse cross-validation")
    _add_data(p, "source", "target")
    _add_kernel(p)
    p.add_argument("--grid-c", help="lo:hi:n, default 0.01:1e6:20")
    p.add_argument("--grid-b", help="lo:hi:n, default 1:1e8:20")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    _add_opt(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_reverse_cv)

    p = sub.add_parser("moons", help="write the rotated-moons task (optionally run it)")
    p.add_argument("--n", type=int, default=300, help="examples per domain")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--rotation", type=float, default=30.0, help="target rotation in degrees")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--run-experiment", action="store_true")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--report")
    p.set_defaults(func=cmd_moons)

    p = sub.add_parser("beta", help="Monte-Carlo q-divergence on a discrete domain pair")
    p.add_argument("--source-probs", required=True, help="comma-separated atom probabilities")
    p.add_argument("--target-probs", required=True)
    p.add_argument("--q", type=_q_value, nargs="+", default=[1.0, 2.0, 4.0, math.inf])
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_beta)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dalc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, DataFormatError, ModelFormatError, OptimizationError) as exc:
        print(f"dalc {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
