"""Command line front end.

Exit status: 0 success, 1 diagnostics or a failed check, 2 usage error.
Tabular output is tab separated with a header row.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import oracle as O
from . import structure as St
from .errors import AidError, IllDefined
from .modelio import diagnose, parse_with_diagnostics, serialize
from .solver import solve


class _Fail(Exception):
    """Report and exit with status 1."""


def _resolve(path):
    if os.path.exists(path):
        return path
    from . import corpus_path
    bundled = corpus_path(os.path.basename(path))
    if bundled.is_file():
        return str(bundled)
    return path


def _read(path):
    path = _resolve(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_with_diagnostics(fh.read(), path), path
    except OSError as exc:
        raise _Fail(f"cannot read {path}: {exc.strerror}")


def _load(path, out):
    (model, diags), path = _read(path)
    if model is None:
        for d in diags:
            print(d, file=out)
        raise _Fail(f"{path}: {sum(d.is_error for d in diags)} error(s)")
    if diags:
        print(f"# {len(diags)} warning(s); see 'asymid validate {path}'", file=sys.stderr)
    return model


def _config(pairs):
    return ", ".join(f"{v}={s}" for v, s in pairs)


def _assignments(items):
    out = []
    for item in items or ():
        var, eq, state = item.rpartition("=")
        if not eq or not var or not state:
            raise argparse.ArgumentTypeError(f"expected Var=state, got {item!r}")
        out.append((var, state))
    return out


# -- subcommands -----------------------------------------------------------------

def cmd_validate(args, out):
    path = _resolve(args.file)
    try:
        with open(path, encoding="utf-8") as fh:
            model, diags = diagnose(fh.read(), path)
    except OSError as exc:
        raise _Fail(f"cannot read {path}: {exc.strerror}")
    for d in diags:
        print(d, file=out)
    if model is None:
        print(f"{path}: {sum(d.is_error for d in diags)} error(s)", file=out)
        return 1
    verdict = St.well_definedness(model)
    print(f"verdict\t{verdict}", file=out)
    return 1 if verdict.status == "IllDefinedRestrictives" else 0


def cmd_reduce(args, out):
    model = _load(args.file, out)
    steps = _assignments(args.assign)
    t0 = time.perf_counter()
    try:
        reduced = St.reduce_sequence(model, steps)
    except AidError as exc:
        raise _Fail(f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - t0
    print(f"# assigned: {_config(reduced.history)}", file=out)
    print(f"# removed: {', '.join(n.id for n in reduced.removed)}", file=out)
    print(f"# nodes: {', '.join(reduced.node_ids)}", file=out)
    print(f"# reduced in {elapsed * 1000:.1f} ms", file=out)
    out.write(serialize(reduced))
    return 0


def cmd_contexts(args, out):
    model = _load(args.file, out)
    try:
        found = St.contexts(model, args.decision)
    except AidError as exc:
        raise _Fail(f"{type(exc).__name__}: {exc}")
    print("decision\tsplit\trestrictive", file=out)
    for c in found:
        print(f"{c.decision}\t{_config(c.split)}\t{_config(c.restrictive)}", file=out)
    return 0


def cmd_splits(args, out):
    model = _load(args.file, out)
    try:
        root = St.enumerate_split_configurations(model)
    except AidError as exc:
        raise _Fail(f"{type(exc).__name__}: {exc}")
    print("configuration\tkind\tnext", file=out)
    for node in root.walk():
        kind = "exhaustive" if node.exhaustive else "prefix"
        print(f"({_config(node.configuration)})\t{kind}\t{node.split or ''}", file=out)
    if args.figure:
        from .plotting import plot_split_tree
        plot_split_tree(root, args.figure, title=os.path.basename(args.file))
        print(f"# figure: {args.figure}", file=sys.stderr)
    return 0


def result_json(result):
    """Deterministic JSON form of a SolveResult."""
    strategies = []
    for f in result.strategies:
        strategies.append({
            "decision": f.decision,
            "context": {v: s for v, s in f.context.split + f.context.restrictive},
            "function": [{"observed": obs, "choose": choice} for obs, choice in f.rows()],
        })
    doc = {"format": 1, "meu": result.meu, "strategies": strategies, "warnings": list(result.warnings)}
    return json.dumps(doc, indent=2, ensure_ascii=False)


def _solve(model, args):
    try:
        return solve(model, force=args.force)
    except IllDefined as exc:
        lines = [str(exc)]
        if exc.verdict.status == "PossiblyIllDefined":
            lines.append("use --force to solve anyway")
        raise _Fail("\n".join(lines))


def cmd_solve(args, out):
    model = _load(args.file, out)
    result = _solve(model, args)
    if args.force and result.warnings:
        for w, probe in O.probe_model(model, trials=args.trials, seed=args.seed):
            result.warnings.append(f"probe {w}: {probe}")
    status = 0
    check = None
    if args.oracle_check:
        roll, _ = O.solve(model)
        problems = O.compare(result, roll)
        delta = abs(result.meu - roll.meu)
        check = problems
        if problems:
            status = 1
    if args.json:
        out.write(result_json(result) + "\n")
    else:
        print(f"meu\t{result.meu!r}", file=out)
        print("decision\tcontext\tobserved\tchoose", file=out)
        for f in result.strategies:
            for obs, choice in f.rows():
                print(f"{f.decision}\t{f.context}\t{_config(obs.items())}\t{choice}", file=out)
        for w in result.warnings:
            print(f"warning\t{w}", file=out)
    if check is not None:
        dest = sys.stderr if args.json else out
        if check:
            for p in check:
                print(f"oracle disagreement: {p}", file=dest)
        else:
            print(f"oracle agreement: meu Δ < 1e-9 (Δ = {delta:.3g})", file=dest)
    if args.figure:
        from .plotting import plot_split_tree
        plot_split_tree(St.enumerate_split_configurations(model), args.figure,
                        title=f"{os.path.basename(args.file)}: MEU {result.meu:.6g}", trace=result.trace)
    return status


def cmd_oracle(args, out):
    model = _load(args.file, out)
    try:
        roll, tree = O.solve(model, budget=args.budget)
    except AidError as exc:
        raise _Fail(f"{type(exc).__name__}: {exc}")
    print(f"meu\t{roll.meu!r}", file=out)
    print(f"scenarios\t{O.scenario_count(tree)}", file=out)
    print(f"state_space\t{O.state_space_size(model)}", file=out)
    print("decision\thistory\tchoose\treach", file=out)
    for (d, items), choice in roll.choices.items():
        print(f"{d}\t{_config(sorted(items))}\t{choice}\t{roll.reach[(d, items)]:.6g}", file=out)
    return 0


def cmd_probe(args, out):
    model = _load(args.file, out)
    if args.decision and args.chance:
        results = [((args.decision, args.chance),
                    O.significance_probe(model, args.decision, args.chance, args.trials, args.seed))]
    else:
        results = O.probe_model(model, args.trials, args.seed)
    print("witness\tstatus\ttrials\tdetail", file=out)
    for w, r in results:
        name = f"{w[1]} vs {w[0]}" if isinstance(w, tuple) else str(w)
        print(f"{name}\t{r.status}\t{r.trials}\t{r.detail}", file=out)
    print(f"overall\t{O.overall(results).status}", file=out)
    return 0


def cmd_report(args, out):
    """Solve, check against the oracle and write tables and figures to a
    directory."""
    from .plotting import plot_oracle_summary, plot_split_tree
    model = _load(args.file, out)
    os.makedirs(args.out, exist_ok=True)
    name = os.path.splitext(os.path.basename(args.file))[0]
    result = _solve(model, args)
    roll, tree = O.solve(model, budget=args.budget)
    problems = O.compare(result, roll)
    scenarios, space = O.scenario_count(tree), O.state_space_size(model)
    rows = [("meu_solver", repr(result.meu)), ("meu_oracle", repr(roll.meu)),
            ("meu_delta", f"{abs(result.meu - roll.meu):.3g}"), ("scenarios", str(scenarios)),
            ("state_space", str(space)), ("verdict", str(St.well_definedness(model))),
            ("oracle_problems", str(len(problems)))]
    files = {}
    files["summary"] = os.path.join(args.out, f"{name}_summary.tsv")
    with open(files["summary"], "w", encoding="utf-8") as fh:
        fh.write("key\tvalue\n")
        for k, v in rows:
            fh.write(f"{k}\t{v}\n")
    files["strategies"] = os.path.join(args.out, f"{name}_strategies.tsv")
    with open(files["strategies"], "w", encoding="utf-8") as fh:
        fh.write("decision\tcontext\tobserved\tchoose\n")
        for f in result.strategies:
            for obs, choice in f.rows():
                fh.write(f"{f.decision}\t{f.context}\t{_config(obs.items())}\t{choice}\n")
    files["split_tree"] = plot_split_tree(St.enumerate_split_configurations(model),
                                          os.path.join(args.out, f"{name}_splits.png"),
                                          title=f"{name}: split configurations", trace=result.trace)
    files["oracle"] = plot_oracle_summary(scenarios, space, result.meu, roll.meu,
                                          os.path.join(args.out, f"{name}_oracle.png"), title=name)
    for k, v in rows:
        print(f"{k}\t{v}", file=out)
    for k, v in files.items():
        print(f"file\t{k}\t{v}", file=out)
    return 1 if problems else 0


# -- entry point -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="asymid", description="Asymmetric influence diagram tools.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="diagnostics, cycle check and well-definedness verdict")
    s.add_argument("file")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("reduce", help="instantiate split variables in order and print the result")
    s.add_argument("file")
    s.add_argument("--assign", nargs="+", default=[], metavar="VAR=STATE")
    s.set_defaults(run=cmd_reduce)

    s = sub.add_parser("contexts", help="contexts of a decision")
    s.add_argument("file")
    s.add_argument("--decision", required=True)
    s.set_defaults(run=cmd_contexts)

    s = sub.add_parser("splits", help="split-configuration tree")
    s.add_argument("file")
    s.add_argument("--figure", metavar="PNG")
    s.set_defaults(run=cmd_splits)

    s = sub.add_parser("solve", help="optimal strategy and MEU")
    s.add_argument("file")
    s.add_argument("--oracle-check", action="store_true", help="compare against the decision tree")
    s.add_argument("--json", action="store_true")
    s.add_argument("--force", action="store_true", help="solve a PossiblyIllDefined model")
    s.add_argument("--seed", type=int, default=0, help="seed of the significance probe run with --force")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--figure", metavar="PNG")
    s.set_defaults(run=cmd_solve)

    s = sub.add_parser("oracle", help="decision tree rollback only")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=O.DEFAULT_BUDGET)
    s.set_defaults(run=cmd_oracle)

    s = sub.add_parser("probe", help="randomized significance probe")
    s.add_argument("file")
    s.add_argument("--decision")
    s.add_argument("--chance")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(run=cmd_probe)

    s = sub.add_parser("report", help="solve, check and write tables and figures")
    s.add_argument("file")
    s.add_argument("--out", default="report")
    s.add_argument("--force", action="store_true")
    s.add_argument("--budget", type=int, default=O.DEFAULT_BUDGET)
    s.set_defaults(run=cmd_report)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "reduce":
            _assignments(args.assign)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"asymid: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return args.run(args, out)
    except _Fail as exc:
        print(exc, file=out)
        return 1


if __name__ == "__main__":
    sys.exit(main())
