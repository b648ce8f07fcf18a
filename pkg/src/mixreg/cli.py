"""Command-line front-end.

Exit codes: 0 success, 2 input error, 3 numerical or fit failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

import numpy as np

from .core import FitConfig, FitError
from .fitting import CLI_MODELS, fit_model
from .io import (
    InputError,
    atomic_write,
    dump_model,
    load_model,
    read_xy_csv,
    xy_to_csv,
)
from .kernel import KERNELS, KernelSpec, interpolate
from .posterior import lambda_at_label
from .selection import SelectionError, search_kh
from .simbench import SCENARIOS, ScenarioSpec, generate, rows_to_csv, run_experiment

log = logging.getLogger("mixreg")

EXIT_OK, EXIT_INPUT, EXIT_FIT = 0, 2, 3


def _float_list(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _int_list(s):
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _config(args) -> FitConfig:
    return FitConfig(tol=args.tol, max_iter=args.max_iter, alpha_min=args.alpha_min,
                     seed=args.seed, n_starts=args.n_starts)


def _add_fit_options(p):
    p.add_argument("--kernel", choices=KERNELS, default="gaussian")
    p.add_argument("--grid-size", type=int, default=None,
                   help="number of local points (default min(n, 100))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--alpha-min", type=float, default=0.5)
    p.add_argument("--n-starts", type=int, default=10)


def classification_csv(result) -> str:
    post, rep = result.posterior, result.report
    K = post.K
    lam = lambda_at_label(post, rep.labels)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "y", "label"] + [f"gamma_{k + 1}" for k in range(K)]
                + ["lambda_at_label", "outlier_flag"])
    return buf, wr, lam


def cmd_fit(args):
    data = read_xy_csv(args.input)
    kern = KernelSpec(args.kernel, args.h)
    res = fit_model(data, args.model, args.k, kern, _config(args), grid_size=args.grid_size)
    atomic_write(args.out, dump_model(args.model, res, data))
    if args.classes:
        buf, wr, lam = classification_csv(res)
        for i in range(data.n):
            wr.writerow([repr(float(data.x[i])), repr(float(data.y[i])), int(res.report.labels[i])]
                        + [repr(float(g)) for g in res.posterior.gamma[i]]
                        + [repr(float(lam[i])), str(bool(res.report.outliers[i])).lower()])
        atomic_write(args.classes, buf.getvalue())
    rep = res.report
    print(f"{args.model} K={args.k} loglik={rep.loglik:.6f} df={rep.df:.4f} "
          f"AIC={rep.aic:.4f} BIC={rep.bic:.4f} ICL={rep.icl:.4f} "
          f"iterations={rep.n_iter} outliers={int(np.sum(rep.outliers))}")
    return EXIT_OK


def _parse_pair(s):
    parts = s.split(",")
    if len(parts) != 2:
        raise InputError(f"--pair expects X,Y, got {s!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise InputError(f"--pair expects numbers, got {s!r}") from None


def cmd_inject_outliers(args):
    px, py = _parse_pair(args.pair)
    if args.count < 0:
        raise InputError("--count must be >= 0")
    read_xy_csv(args.input)  # validate
    with open(args.input, newline="") as fh:
        text = fh.read()
    header = next(csv.reader(io.StringIO(text)))
    names = [h.strip() for h in header]
    ix, iy = names.index("x"), names.index("y")
    if args.count:
        if not text.endswith("\n"):
            text += "\n"
        row = [""] * len(names)
        row[ix], row[iy] = args.pair.split(",")[0].strip(), args.pair.split(",")[1].strip()
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        for _ in range(args.count):
            wr.writerow(row)
        text += buf.getvalue()
    atomic_write(args.out, text)
    print(f"appended {args.count} rows ({px!r}, {py!r}) -> {args.out}")
    return EXIT_OK


def cmd_select(args):
    data = read_xy_csv(args.input)
    try:
        result = search_kh(data, args.model, args.k_set, args.h_set, _config(args),
                           kernel=args.kernel, grid_size=args.grid_size)
    except SelectionError as exc:
        raise FitError(str(exc)) from exc
    atomic_write(args.out, result.to_csv())
    for crit in ("aic", "bic", "icl"):
        K, h = result.chosen[crit]
        print(f"{crit.upper()}: K={K} h={h!r}")
    return EXIT_OK


def cmd_bench(args):
    rows = run_experiment(args.scenario, args.n_set, args.models, R=args.reps,
                          base_seed=args.seed, h=args.h, kernel=args.kernel,
                          config=FitConfig(tol=args.tol, max_iter=args.max_iter,
                                           alpha_min=args.alpha_min))
    text = rows_to_csv(rows)
    atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_curves(args):
    params, d = load_model(args.model)
    lo, hi = d.get("x_span", [None, None])
    if lo is None:
        raise InputError("model file lacks x_span")
    xs = np.linspace(lo, hi, args.points)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x", "component", "quantity", "value"])
    K = params.K
    if hasattr(params, "pi_curves"):
        quantities = {"m": params.m_curves, "pi": params.pi_curves, "var": params.var_curves}
        values = {q: interpolate(params.grid, c, xs) for q, c in quantities.items()}
    else:
        _, m, _ = params.at(xs)
        values = {"m": np.asarray(m).T}
    for i, xv in enumerate(xs):
        for q, arr in values.items():
            for k in range(K):
                wr.writerow([repr(float(xv)), k + 1, q, repr(float(arr[k, i]))])
    atomic_write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_generate(args):
    data, _ = generate(ScenarioSpec(args.scenario, args.n, args.seed))
    atomic_write(args.out, xy_to_csv(data, labels=args.labels))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mixreg", description=(
        "Robust mixtures of regressions with contaminated Gaussian errors."))
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model to an x,y CSV")
    f.add_argument("input")
    f.add_argument("--model", choices=CLI_MODELS, default="spcgmr")
    f.add_argument("--k", type=int, default=2)
    f.add_argument("--h", type=float, default=0.1)
    f.add_argument("--out", default="model.json")
    f.add_argument("--classes", default=None, help="classification CSV output path")
    _add_fit_options(f)
    f.set_defaults(func=cmd_fit)

    i = sub.add_parser("inject-outliers", help="append identical (x, y) rows to a CSV")
    i.add_argument("input")
    i.add_argument("--pair", required=True, help="X,Y")
    i.add_argument("--count", type=int, default=5)
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_inject_outliers)

    s = sub.add_parser("select", help="information-criterion search over (K, h)")
    s.add_argument("input")
    s.add_argument("--model", choices=CLI_MODELS, default="spcgmr")
    s.add_argument("--k-set", type=_int_list, required=True)
    s.add_argument("--h-set", type=_float_list, required=True)
    s.add_argument("--out", default="selection.csv")
    _add_fit_options(s)
    s.set_defaults(func=cmd_select)

    b = sub.add_parser("bench", help="Monte-Carlo benchmark on a simulated scenario")
    b.add_argument("--scenario", choices=SCENARIOS, required=True)
    b.add_argument("--n-set", type=_int_list, default=[250])
    b.add_argument("--models", type=lambda s: [m.strip() for m in s.split(",")],
                   default=["spgmr", "spcgmr"])
    b.add_argument("--reps", type=int, default=50)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--h", type=float, default=0.06)
    b.add_argument("--kernel", choices=KERNELS, default="gaussian")
    b.add_argument("--tol", type=float, default=1e-6)
    b.add_argument("--max-iter", type=int, default=300)
    b.add_argument("--alpha-min", type=float, default=0.5)
    b.add_argument("--out", default="bench.csv")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("curves", help="evaluate fitted curves on a dense grid")
    c.add_argument("model")
    c.add_argument("--points", type=int, default=400)
    c.add_argument("--out", default="curves.csv")
    c.set_defaults(func=cmd_curves)

    g = sub.add_parser("generate", help="simulate a benchmark scenario to CSV")
    g.add_argument("--scenario", choices=SCENARIOS, required=True)
    g.add_argument("--n", type=int, default=250)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--labels", action="store_true", help="include a true_label column")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "models", None):
        bad = [m for m in args.models if m not in CLI_MODELS]
        if bad:
            parser.error(f"unknown model(s): {', '.join(bad)}")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FitError, FloatingPointError) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
