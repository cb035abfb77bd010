"""Command-line entry point.

Every subcommand reads JSON/DIMACS files, calls one library function and
prints JSON on stdout.  Human-readable notes go to stderr unless ``--quiet``.
A reproducibility header (version, backend, seed, argv) is always written to
stderr first.

Exit codes: 0 success, 1 validation or guarantee failure, 2 I/O or parse
error.  Failures print a one-line JSON object ``{"error": ..., "type": ...}``
on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from dppmle import __version__
from dppmle._accel import BACKEND
from dppmle.coloring import (DecoderParams, assignment_to_coloring, coloring_to_kernel,
                             decode_assignment, literal_priority, optimal_value, three_color,
                             vector_error)
from dppmle.dataset import Dataset, dataset_from_json, serialize_dataset
from dppmle.diagonal import certificate, diag_log_likelihood, diagonal_kernel
from dppmle.errors import (ColoringError, DppError, InputError, ParseError,
                           StructuralInputError, ValidationError)
from dppmle.graph import Graph, graph_to_json
from dppmle.kernel import (GramFactor, MarginalKernel, enumerate_distribution, log_likelihood,
                           subsets_of, validate_kernel)
from dppmle.mle import OptimizerConfig, optimize
from dppmle.rank3 import ProjectionParams, project_to_rank3
from dppmle.reduction import (bot_graph_from_json, build_bot_graph, build_expander, count_audit,
                              lift_to_hypergraph, parse_dimacs, solve)


class CliFailure(DppError):
    """A check performed by a subcommand did not pass (exit code 1)."""


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None


def _load_kernel(args, check: bool = False):
    """Load ``--factor`` or ``--kernel``; with ``check`` reject infeasible kernels."""
    tol = args.tol if args.tol is not None else 1e-9
    if getattr(args, "factor", None):
        K = GramFactor.from_json(_read_json(args.factor))
        if check and not K.kernel_ready(tol):
            raise CliFailure(f"factor has spectral norm {K.spectral_norm()!r} > 1")
        return K
    if getattr(args, "kernel", None):
        K = MarginalKernel.from_json(_read_json(args.kernel))
        if check:
            rep = validate_kernel(K, tol)
            if not rep.passed:
                raise CliFailure("; ".join(rep.reasons))
        return K
    raise InputError("need --kernel or --factor")


def _load_dataset(path: str) -> Dataset:
    return dataset_from_json(_read_json(path))


def _load_graph(path: str):
    obj = _read_json(path)
    if isinstance(obj, dict) and "meta" in obj:
        return bot_graph_from_json(obj)
    try:
        return Graph(int(obj["n"]), tuple(tuple(e) for e in obj["edges"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralInputError(f"{path}: not a graph file ({exc!r})") from None


def _load_coloring(path: str, n: int):
    """Returns ``("colors", list)`` or ``("vectors", ndarray)``.

    The file holds ``{"colors": ...}`` or ``{"vectors": ...}``, each either a
    list indexed by node or an object keyed by node id.
    """
    obj = _read_json(path)
    kind = next((k for k in ("colors", "vectors") if isinstance(obj, dict) and k in obj), None)
    if kind is None:
        raise StructuralInputError(f"{path}: expected a 'colors' or 'vectors' entry")
    entries = obj[kind]
    if isinstance(entries, dict):
        missing = [v for v in range(n) if str(v) not in entries]
        if missing:
            raise ValidationError(f"node {missing[0]} has no entry in {path}")
        entries = [entries[str(v)] for v in range(n)]
    if len(entries) != n:
        raise ValidationError(f"{path} has {len(entries)} entries for {n} nodes")
    if kind == "colors":
        return kind, [int(c) for c in entries]
    return kind, np.asarray(entries, dtype=float)


def _emit(obj, args, out: Optional[str] = None) -> None:
    text = json.dumps(obj) + "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _note(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args):
    K = MarginalKernel.from_json(_read_json(args.kernel))
    rep = validate_kernel(K, args.tol)
    _emit(rep.to_json(), args)
    if not rep.passed:
        raise CliFailure("; ".join(rep.reasons))


def cmd_likelihood(args):
    K = _load_kernel(args, check=True)
    D = _load_dataset(args.data)
    _emit({"log_likelihood": log_likelihood(K, D), "m": D.m, "n": D.n}, args)


def cmd_enumerate(args):
    K = _load_kernel(args, check=True)
    p = enumerate_distribution(K)
    rows = [{"subset": [i + 1 for i in subsets_of(mask)], "p": float(v)}
            for mask, v in enumerate(p)]
    _emit({"n": K.n, "probabilities": rows, "sum": float(np.sum(p))}, args)


def cmd_diag(args):
    D = _load_dataset(args.data)
    K = diagonal_kernel(D)
    _emit({"kernel": K.to_json(), "l_diag": diag_log_likelihood(D)}, args, args.out)


def cmd_bound(args):
    D = _load_dataset(args.data)
    cert = certificate(D)
    _emit(cert.to_json(), args)
    if not cert.holds():
        raise CliFailure("certificate invariants violated")


def _formula_and_graph(args):
    phi = parse_dimacs(_read_text(args.cnf))
    k = args.k if args.k is not None else phi.k
    X = build_expander(2 * k * phi.n_vars, args.d, args.seed, max_retries=args.retries)
    return phi, build_bot_graph(phi, X, k)


def cmd_reduce(args):
    phi, G = _formula_and_graph(args)
    audit = count_audit(G)
    _note(args, f"graph: {G.n_nodes} nodes, {G.n_edges} edges, max degree {G.max_degree()}")
    if args.out:
        _emit(G.to_json(), args, args.out)
        _emit({"nodes": G.n_nodes, "edges": G.n_edges, "max_degree": G.max_degree(),
               "audit": audit.to_json(), "expander": G.expander.audit.__dict__}, args)
    else:
        _emit(G.to_json(), args)
    if not audit.passed:
        raise CliFailure("count audit failed")


def cmd_lift(args):
    G = _load_graph(args.graph)
    L = lift_to_hypergraph(G)
    text = serialize_dataset(L.dataset)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
        _emit({"N": L.N, "m": L.dataset.m}, args)
    else:
        sys.stdout.write(text)


def _discrete_coloring(args, G):
    if getattr(args, "assignment", None):
        a = _read_json(args.assignment)["assignment"]
        return assignment_to_coloring(G, [bool(x) for x in a])
    if getattr(args, "coloring", None):
        kind, col = _load_coloring(args.coloring, G.n_nodes)
        if kind != "colors":
            raise StructuralInputError("expected a discrete colouring file")
        return col
    pri = literal_priority(G) if hasattr(G, "gadgets") else []
    col = three_color(G, priority=pri)
    if col is None:
        raise ColoringError("graph is not 3-colourable")
    return col


def cmd_color_kernel(args):
    G = _load_graph(args.graph)
    col = _discrete_coloring(args, G)
    F = coloring_to_kernel(G, col)
    _emit(F.to_json(), args, args.out)
    if args.out:
        _emit({"n": F.n, "rank": F.rank, "spectral_norm": F.spectral_norm()}, args)


def cmd_optimal_value(args):
    G = _load_graph(args.graph)
    _emit({"optimal_value": optimal_value(G), "m": len(G.edges)}, args)


def cmd_vector_error(args):
    G = _load_graph(args.graph)
    kind, col = _load_coloring(args.coloring, G.n_nodes)
    vec = np.eye(3)[np.array(col) - 1] if kind == "colors" else col
    _emit({"vector_error": vector_error(G, vec)}, args)


def cmd_project3(args):
    G = _load_graph(args.graph)
    F = _load_kernel(args)
    D = _load_dataset(args.data) if args.data else lift_to_hypergraph(G).dataset
    params = ProjectionParams(delta=args.delta, eps0=args.eps0, mode=args.mode)
    K, Fout, rep = project_to_rank3(F, D, G, params)
    if args.out:
        _emit(Fout.to_json(), args, args.out)
    _emit(rep.to_json(), args)


def cmd_decode(args):
    G = _load_graph(args.graph)
    if not hasattr(G, "gadgets"):
        raise StructuralInputError("decode needs a reduction graph file")
    kind, col = _load_coloring(args.coloring, G.n_nodes)
    vec = np.eye(3)[np.array(col) - 1] if kind == "colors" else col
    params = DecoderParams(slack=args.slack) if args.slack is not None else DecoderParams()
    res = decode_assignment(G, vec, params)
    _emit(res.to_json(), args)


def cmd_mle(args):
    D = _load_dataset(args.data)
    cfg = OptimizerConfig(rank=args.rank, restarts=args.restarts, max_iters=args.iters,
                          seed=args.seed, tol=args.tol if args.tol is not None else 1e-12)
    rep = optimize(D, cfg)
    if args.out and rep.best_kernel is not None:
        _emit(rep.best_kernel.to_json(), args, args.out)
    _emit(rep.to_json(), args)
    if rep.failed:
        raise CliFailure("every restart ended at infinite likelihood")


def cmd_pipeline(args):
    phi, G = _formula_and_graph(args)
    assignment = solve(phi)
    if assignment is None:
        raise CliFailure("formula is unsatisfiable; pipeline needs a satisfiable CNF")
    col = assignment_to_coloring(G, assignment)
    F = coloring_to_kernel(G, col)
    L = lift_to_hypergraph(G)
    ll = log_likelihood(F, L.dataset)
    opt = optimal_value(G)
    match = abs(ll - opt) <= 1e-9
    out = {"n_nodes": G.n_nodes, "n_edges": G.n_edges, "N": L.N, "m": L.dataset.m,
           "assignment": assignment, "log_likelihood": ll, "optimal_value": opt,
           "verdict": "OPTIMAL-MATCH" if match else "MISMATCH"}
    _emit(out, args)
    _note(args, "OPTIMAL-MATCH" if match else "MISMATCH")
    if not match:
        raise CliFailure(f"likelihood {ll} differs from optimal value {opt}")


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    env_seed = os.environ.get("DPPMLE_SEED")
    common.add_argument("--seed", type=int, default=int(env_seed) if env_seed else 0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--quiet", action="store_true")

    p = argparse.ArgumentParser(prog="dppmle", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dppmle {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("validate", cmd_validate, "check a kernel's symmetry and spectrum")
    sp.add_argument("--kernel", required=True)
    for name, fn, h in (("likelihood", cmd_likelihood, "log-likelihood of a dataset"),
                        ("enumerate", cmd_enumerate, "all 2^n point probabilities")):
        sp = add(name, fn, h)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--kernel")
        g.add_argument("--factor")
        if name == "likelihood":
            sp.add_argument("--data", required=True)
    sp = add("diag", cmd_diag, "diagonal kernel and its likelihood")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out")
    sp = add("bound", cmd_bound, "approximation certificate of the diagonal kernel")
    sp.add_argument("--data", required=True)
    for name, fn, h in (("reduce", cmd_reduce, "build the reduction graph of a CNF"),
                        ("pipeline", cmd_pipeline, "reduce, lift, colour and evaluate")):
        sp = add(name, fn, h)
        sp.add_argument("--cnf", required=True)
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--d", type=int, default=8)
        sp.add_argument("--retries", type=int, default=50)
        if name == "reduce":
            sp.add_argument("--out")
    sp = add("lift", cmd_lift, "lift a graph to a 3-uniform dataset")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--out")
    sp = add("color-kernel", cmd_color_kernel, "rank-3 kernel from a proper colouring")
    sp.add_argument("--graph", required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--assignment")
    g.add_argument("--coloring")
    sp.add_argument("--out")
    sp = add("optimal-value", cmd_optimal_value, "optimal likelihood of a lifted graph")
    sp.add_argument("--graph", required=True)
    sp = add("vector-error", cmd_vector_error, "vector colouring error")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--coloring", required=True)
    sp = add("project3", cmd_project3, "project a kernel to dimension 3")
    sp.add_argument("--graph", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--kernel")
    g.add_argument("--factor")
    sp.add_argument("--data")
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--eps0", type=float, default=0.1)
    sp.add_argument("--mode", choices=("report", "guarantee"), default="report")
    sp.add_argument("--out")
    sp = add("decode", cmd_decode, "decode an assignment from a vector colouring")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--coloring", required=True)
    sp.add_argument("--slack", type=float, default=None)
    sp = add("mle", cmd_mle, "numerical maximum-likelihood kernel")
    sp.add_argument("--data", required=True)
    sp.add_argument("--rank", type=int, default=None)
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--iters", type=int, default=3000)
    sp.add_argument("--out")
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "validate" and args.tol is None:
        args.tol = 1e-9
    header = {"version": __version__, "backend": BACKEND, "seed": args.seed, "argv": argv}
    print("# dppmle " + json.dumps(header), file=sys.stderr)
    try:
        args.func(args)
    except (InputError, StructuralInputError, OSError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2
    except DppError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
