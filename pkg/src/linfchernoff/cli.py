"""Command-line entry point: ``linfchernoff <verb> [options]``.

Exit status is 0 on success, 1 on bad input and 2 when a requested
verification fails.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .concentration import MAX, MIN, monte_carlo_tail
from .constructions import (
    build_counterexample,
    tree_distribution,
    verify_claim_B1,
    verify_claim_B2,
    verify_homogenization_influence,
)
from .distributions import MASK_BITS, homogenize
from .errors import LinfError
from .influence import analyze
from .scp import check_scp
from .sparsifier import sparsify, spectral_check

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


def _one_based(indices) -> str:
    return ";".join(str(i + 1) for i in indices)


def _write_or_print(path, header, rows):
    if path:
        io.write_csv(path, header, rows)
    else:
        print(",".join(header))
        for r in rows:
            print(",".join(io.fmt(x) for x in r))


# --- verbs -----------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    mu = io.read_distribution(args.dist, max_n=args.max_n)
    res = analyze(mu, two_sided=not args.one_sided_only, max_lambda=args.max_lambda,
                  record_rows=bool(args.out))
    print(f"n={mu.n} support={mu.support_size} "
          + (f"k={mu.k}" if mu.homogeneous else "non-homogeneous"))
    one = res.one_sided
    print(f"D_inf(one-sided)={io.fmt(one.d_inf)} without diagonal={io.fmt(one.d_inf_offdiag)} "
          f"at {one.argmax_spec} row {'' if one.argmax_row is None else one.argmax_row + 1}")
    if res.two_sided is not None:
        two = res.two_sided
        print(f"D_inf(two-sided)={io.fmt(two.d_inf)} without diagonal={io.fmt(two.d_inf_offdiag)} "
              f"at {two.argmax_spec} row {'' if two.argmax_row is None else two.argmax_row + 1}")
    if res.d_am is not None:
        print(f"D_am={io.fmt(res.d_am)} identity residual={io.fmt(res.ii_residual)}")
    if args.out:
        rows = []
        for rep in (res.one_sided, res.two_sided):
            if rep is None:
                continue
            for spec, row, l1 in rep.per_spec_rows:
                vals = [v for _, v in spec.assignment]
                rows.append([rep.kind, _one_based(spec.lam), ";".join(map(str, vals)), row + 1, l1])
        io.write_csv(args.out, ["kind", "lambda", "assignment", "row", "l1_sum"], rows)
    if args.verify and res.ii_residual is not None and res.ii_residual > args.tol:
        print(f"verification failed: D_inf/D_am identity residual {res.ii_residual:.3e}")
        return EXIT_VERIFY
    return EXIT_OK


def _parse_deltas(text: str) -> list[float]:
    try:
        deltas = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"bad --delta list {text!r}") from None
    if not deltas or any(not 0 <= d <= 1 for d in deltas):
        raise ValueError("every delta must lie in [0, 1]")
    return deltas


def cmd_chernoff(args) -> int:
    mu = io.read_distribution(args.dist, max_n=args.max_n)
    ens = io.read_ensemble(args.matrices)
    if ens.n != mu.n:
        raise ValueError(f"ensemble has {ens.n} matrices but the distribution has n={mu.n}")
    deltas = _parse_deltas(args.delta)
    sides = [MAX, MIN] if args.side == "both" else [args.side]
    rng = np.random.default_rng(args.seed)
    rows, failed = [], 0
    for side in sides:
        for delta in deltas:
            r = monte_carlo_tail(mu, ens, delta, side, args.trials, rng, constant=args.constant)
            failed += not r.ok
            rows.append([side, delta, r.empirical, r.bound, r.slack, r.exact, r.trials, r.D,
                         r.mu_extreme, r.centered, r.ok])
    header = ["side", "delta", "empirical", "bound", "slack", "exact", "trials", "D",
              "mu_extreme", "centered", "ok"]
    _write_or_print(args.out, header, rows)
    if failed:
        print(f"{failed} tail check(s) above the bound", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sparsify(args) -> int:
    if not 0 < args.epsilon <= 1:
        raise ValueError(f"--epsilon must lie in (0, 1], got {args.epsilon}")
    g = io.read_graph(args.graph)
    sp = sparsify(g, args.epsilon, args.constant, np.random.default_rng(args.seed), jobs=args.jobs)
    chk = spectral_check(g, sp.laplacian, args.epsilon)
    if args.out:
        io.write_matrix_csv(args.out, sp.laplacian)
    header = ["n", "m", "t", "epsilon", "constant", "eig_min", "eig_max", "worst_error", "ok"]
    row = [g.n, g.m, sp.t, args.epsilon, args.constant, chk.eig_min, chk.eig_max,
           chk.worst_error, chk.ok]
    _write_or_print(args.report, header, [row])
    if not chk.ok:
        print(f"spectral check failed: worst relative error {chk.worst_error:.6g} > {args.epsilon}",
              file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_scp_check(args) -> int:
    mu = io.read_distribution(args.dist, max_n=args.max_n)
    res = check_scp(mu, max_n=args.max_n)
    if res.ok:
        print(f"SCP: yes ({res.instances} coupling instances)")
        return EXIT_OK
    tau, v = res.witness
    print(f"SCP: no; first violation at tau={{{_one_based(tau)}}} v={v + 1} "
          f"(after {res.instances} instances)")
    return EXIT_VERIFY


def cmd_counterexample(args) -> int:
    mu = build_counterexample(args.n, args.k, max_n=MASK_BITS)
    if args.out:
        io.write_distribution(mu, args.out)
    print(f"n+1={mu.n} outcomes={mu.support_size} homogeneity={mu.k}")
    if not args.verify:
        return EXIT_OK
    b1, b2 = verify_claim_B1(args.n, args.k), verify_claim_B2(args.n, args.k)
    print(f"one-sided parameter {io.fmt(b1.measured)} (without diagonal {io.fmt(b1.measured_offdiag)})"
          f" <= {io.fmt(b1.reference)}: {'ok' if b1.ok else 'FAILED'}")
    print(f"two-sided row norm at empty pinning {io.fmt(b2.measured)} >= {io.fmt(b2.reference)}: "
          f"{'ok' if b2.ok else 'FAILED'}")
    return EXIT_OK if b1.ok and b2.ok else EXIT_VERIFY


def cmd_tree_dist(args) -> int:
    g = io.read_graph(args.graph)
    mu = tree_distribution(g, cap=args.cap)
    if args.out:
        io.write_distribution(mu, args.out)
    else:
        print(json.dumps(io.distribution_to_dict(mu)))
    return EXIT_OK


def cmd_homogenize(args) -> int:
    mu = io.read_distribution(args.dist, max_n=args.max_n)
    hom = homogenize(mu)
    if args.out:
        io.write_distribution(hom, args.out)
    else:
        print(json.dumps(io.distribution_to_dict(hom)))
    if not args.verify:
        return EXIT_OK
    rep = verify_homogenization_influence(mu)
    print(f"two-sided D={io.fmt(rep.two_sided_d)} homogenized one-sided D={io.fmt(rep.hom_one_sided_d)}"
          f" reflection residual={io.fmt(rep.reflection_residual)}: {'ok' if rep.ok else 'FAILED'}",
          file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = run_all(seed=args.seed, jobs=args.jobs, only=only)
    if args.out:
        io.write_csv(args.out, ["criterion", "ok", "detail"],
                     [[r.number, r.ok, r.detail] for r in results])
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


# --- parser ----------------------------------------------------------------------------


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    def default(v):
        return argparse.SUPPRESS if suppress else v

    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--jobs", type=int, default=default(1), help="worker processes (never changes results)")
    g.add_argument("--seed", type=int, default=default(0), help="master seed, 0 <= S < 2**64")
    g.add_argument("--tol", type=float, default=default(1e-9), help="tolerance for verifications")
    g.add_argument("--max-n", type=int, default=default(24), help="ground-set cap for explicit distributions")
    return g


def build_parser() -> argparse.ArgumentParser:
    top = _global_options(suppress=False)
    # subcommands repeat the global options without defaults so they never
    # overwrite a value given before the verb
    common = _global_options(suppress=True)

    p = argparse.ArgumentParser(prog="linfchernoff", parents=[top],
                                description="Dependence parameters, matrix Chernoff checks "
                                            "and tree sparsifiers for explicit distributions.")
    sub = p.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("analyze", parents=[common], help="influence parameters of a distribution")
    a.add_argument("--dist", required=True)
    a.add_argument("--out", help="per-pinning row sums as CSV")
    a.add_argument("--max-lambda", type=int)
    a.add_argument("--one-sided-only", action="store_true")
    a.add_argument("--verify", action="store_true", help="fail if D_inf and D_am disagree")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("chernoff", parents=[common], help="tail probabilities against the bound")
    c.add_argument("--dist", required=True)
    c.add_argument("--matrices", required=True)
    c.add_argument("--delta", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    c.add_argument("--side", choices=[MAX, MIN, "both"], default=MAX)
    c.add_argument("--trials", type=int, default=10_000)
    c.add_argument("--constant", type=float, default=20.0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_chernoff)

    s = sub.add_parser("sparsify", parents=[common], help="average of reweighted random trees")
    s.add_argument("--graph", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--constant", type=float, default=4.0)
    s.add_argument("--out", help="approximate Laplacian as CSV")
    s.add_argument("--report")
    s.set_defaults(func=cmd_sparsify)

    q = sub.add_parser("scp-check", parents=[common], help="stochastic covering property")
    q.add_argument("--dist", required=True)
    q.set_defaults(func=cmd_scp_check)

    x = sub.add_parser("counterexample", parents=[common], help="the separating family")
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--k", type=int, required=True)
    x.add_argument("--out")
    x.add_argument("--verify", action="store_true")
    x.set_defaults(func=cmd_counterexample)

    t = sub.add_parser("tree-dist", parents=[common], help="spanning-tree edge distribution")
    t.add_argument("--graph", required=True)
    t.add_argument("--cap", type=int, default=10_000)
    t.add_argument("--out")
    t.set_defaults(func=cmd_tree_dist)

    h = sub.add_parser("homogenize", parents=[common], help="pad to a homogeneous law on 2n")
    h.add_argument("--dist", required=True)
    h.add_argument("--out")
    h.add_argument("--verify", action="store_true")
    h.set_defaults(func=cmd_homogenize)

    st = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    st.add_argument("--only", help="comma-separated criterion numbers")
    st.add_argument("--out")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must lie in [0, 2**64)")
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    try:
        return args.func(args)
    except (LinfError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
