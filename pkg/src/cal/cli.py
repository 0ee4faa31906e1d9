"""Command-line front end.

Exit status: 0 on success, 1 on bad input (including a certificate that fails
validation), 2 when a size cap or search budget stops a computation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import arena
from .critical import k_of_eps, tilde_k
from .dims import eps_dimension, littlestone_dimension, threshold_dimension, vc_dimension
from .errors import CapExceededError, DegenerateDataError, InputError, MalformedTreeError
from .learners import DEFAULT_EXPERT_CAP
from .problem import eps_arg, load_problem, rational
from .rng import master_seed
from .trees import InteractionTree, Plain, Relaxed, StrictEta, validate_tree_certificate

__all__ = ["main", "run_command", "build_parser"]


def _grid(text: str) -> list[Fraction]:
    values = [eps_arg(v) for v in text.split(",") if v.strip()]
    if not values:
        raise InputError("empty --grid")
    return values


def _eps_list(args) -> list[Fraction]:
    if getattr(args, "grid", None):
        return _grid(args.grid)
    if getattr(args, "eps", None):
        return [eps_arg(args.eps)]
    raise InputError("give --eps or --grid")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _finite(problem):
    if not problem.finite:
        raise InputError("this command needs a finite class ('functions' in the problem file)")
    return problem


def cmd_dims(args) -> int:
    P = _finite(load_problem(args.problem))
    lines = [f"n = {P.n}", f"functions = {P.F.m}", f"VC = {vc_dimension(P.F)}", f"Littlestone = {littlestone_dimension(P.F)}"]
    certificate = None
    for eps in _eps_list(args) if (args.eps or args.grid) else []:
        lines.append(f"k({eps}) = {k_of_eps(P.F, P.U, eps)}")
        plain = eps_dimension(P.F, P.U, Plain(eps), budget=args.budget)
        relaxed = eps_dimension(P.F, P.U, Relaxed(eps), budget=args.budget)
        lines.append(f"dim({eps}) = {plain.value} exact={str(plain.exact).lower()}")
        lines.append(f"relaxed_dim({eps}) = {relaxed.value} exact={str(relaxed.exact).lower()}")
        if P.order is not None:
            lines.append(f"tilde_k({eps}) = {tilde_k(P.order, P.U, eps)}")
        if certificate is None:
            certificate = plain.certificate
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        if certificate is None:
            raise InputError("--out needs --eps to know which certificate to write")
        Path(args.out).write_text(certificate.dumps())
    return 0


def cmd_kcurve(args) -> int:
    P = _finite(load_problem(args.problem))
    rows = [(eps, k_of_eps(P.F, P.U, eps)) for eps in _eps_list(args)]
    _emit(_csv(("eps", "k"), rows), args.out)
    return 0


def cmd_tdim(args) -> int:
    P = load_problem(args.problem)
    if P.order is None:
        raise InputError("tdim needs a 'parent' array in the problem file")
    rows = [(eps, threshold_dimension(P.order, P.U, eps), tilde_k(P.order, P.U, eps)) for eps in _eps_list(args)]
    _emit(_csv(("eps", "tdim", "tilde_k"), rows), args.out)
    return 0


def _config(args, P) -> arena.GameConfig:
    adversary = args.adversary
    if adversary is None:
        if P.euclidean is None:
            raise InputError("give --adversary")
        adversary = P.euclidean["stream_spec"]
    return arena.GameConfig(
        problem=P,
        learner=args.learner,
        adversary=adversary,
        T=args.T,
        R=args.reps,
        seed=master_seed(args.seed),
        mode=args.mode,
        expert_cap=args.expert_cap,
        budget=args.budget,
    )


def cmd_game(args) -> int:
    P = load_problem(args.problem)
    cfg = _config(args, P)
    tr = arena.run_game(cfg, 0)
    if args.out:
        rows = [(t + 1, _x(tr.xs[t]), tr.predictions[t], tr.labels[t], tr.mu_index[t], tr.losses[t]) for t in range(len(tr))]
        Path(args.out).write_text(_csv(("t", "x", "yhat", "y", "mu_index", "loss"), rows))
    flag = " (approximate)" if tr.approximate else ""
    sys.stdout.write(
        f"T = {len(tr)}\nlearner_loss = {tr.learner_loss}\ncomparator_loss = {tr.comparator_loss}{flag}\n"
        f"regret = {tr.learner_loss - tr.comparator_loss}\n"
    )
    return 0


def _x(x) -> str:
    if isinstance(x, int):
        return str(x)
    return " ".join(format(float(v), ".12g") for v in x)


def cmd_sweep(args) -> int:
    P = load_problem(args.problem)
    cfg = _config(args, P)
    if args.axis == "T":
        if not args.grid:
            raise InputError("a T sweep needs --grid with horizons")
        values = [int(v) for v in args.grid.split(",") if v.strip()]
    else:
        values = _eps_list(args)
    rows = arena.sweep(cfg, args.axis, values, jobs=args.jobs)
    text = arena.rows_to_json(rows, cfg, args.axis) if args.format == "json" else arena.rows_to_csv(rows)
    _emit(text, args.out)
    return 0


KINDS = {"plain": Plain, "relaxed": Relaxed}


def cmd_validate(args) -> int:
    try:
        obj = json.loads(Path(args.certificate).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read certificate: {exc}") from exc
    tree = InteractionTree.from_json(obj)
    eps = eps_arg(args.eps)
    if args.kind == "strict":
        kind = StrictEta(eps, rational(args.eta) if args.eta else eps / 3)
    else:
        kind = KINDS[args.kind](eps)
    ok = validate_tree_certificate(tree, kind)
    sys.stdout.write(f"{'valid' if ok else 'invalid'} depth={tree.depth} kind={args.kind} eps={eps}\n")
    return 0 if ok else 1


def _read_csv(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def cmd_report(args) -> int:
    series = []
    for path in args.csv:
        rows = _read_csv(path)
        if not rows or "axis" not in rows[0]:
            raise InputError(f"{path} is not a sweep CSV")
        series.append({"source": Path(path).name, "rows": rows})
    if args.plot_data:
        blocks = []
        for s in series:
            cols = [c for c in arena.CSV_COLUMNS if c in s["rows"][0]]
            lines = [f"# {s['source']}", "# " + " ".join(cols)]
            lines += [" ".join(_plot_cell(r[c]) for c in cols) for r in s["rows"]]
            blocks.append("\n".join(lines))
        text = "\n\n\n".join(blocks) + "\n"
    else:
        text = json.dumps({"series": series}, sort_keys=True, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def _plot_cell(v: str) -> str:
    """Gnuplot reads decimals, so rational axis values are expanded."""
    if "/" in v:
        return format(float(Fraction(v)), ".12g")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cal", description="Distribution-constrained online classification toolkit.")
    sub = p.add_subparsers(dest="command")

    def common(sp, problem=True):
        if problem:
            sp.add_argument("problem", help="problem JSON file")
        sp.add_argument("--eps", help="rational, e.g. 1/4")
        sp.add_argument("--grid", help="comma-separated values")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--budget", type=int, default=200_000, help="tree-search node cap")

    common(sub.add_parser("dims", help="VC, Littlestone and eps-dimensions"))
    common(sub.add_parser("kcurve", help="k(eps) over a grid, as CSV"))
    common(sub.add_parser("tdim", help="threshold dimension of a tree order"))
    for name in ("game", "sweep"):
        sp = sub.add_parser(name, help="run one game" if name == "game" else "regret sweep over T or eps")
        common(sp)
        sp.add_argument("--learner", required=True)
        sp.add_argument("--adversary")
        sp.add_argument("--T", type=int, default=64)
        sp.add_argument("--reps", type=int, default=1 if name == "game" else 20)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--mode", choices=arena.MODES, default="adaptive")
        sp.add_argument("--expert-cap", type=int, default=DEFAULT_EXPERT_CAP)
        if name == "sweep":
            sp.add_argument("--axis", choices=("T", "eps"), default="T")
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp = sub.add_parser("validate", help="check an interaction-tree certificate")
    sp.add_argument("certificate")
    sp.add_argument("--kind", choices=("plain", "relaxed", "strict"), default="plain")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--eta", help="strict kind only (default eps/3)")
    sp = sub.add_parser("report", help="merge sweep CSVs")
    sp.add_argument("csv", nargs="+")
    sp.add_argument("--plot-data", action="store_true", help="gnuplot whitespace table instead of JSON")
    sp.add_argument("--out")
    return p


COMMANDS = {
    "dims": cmd_dims,
    "kcurve": cmd_kcurve,
    "tdim": cmd_tdim,
    "game": cmd_game,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "report": cmd_report,
}


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except CapExceededError as exc:
        print(f"cal: {exc}", file=sys.stderr)
        return 2
    except (InputError, MalformedTreeError, DegenerateDataError, ValueError) as exc:
        print(f"cal: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
