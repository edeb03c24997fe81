"""Batch command-line interface.

Subcommands: ``exact`` (emit analytic tables), ``grow`` (simulate and dump
edge records), ``compare`` (ensemble vs analytic tables with z-scores),
``verify`` (oracle and consistency suite, JSON report).  All tabular output
is RFC-4180-style CSV with LF line endings and shortest round-trip float
formatting; identical configurations produce identical bytes.

Exit codes: 0 success, 1 verification failure, 2 statistical comparison
failure, 64 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import exact, measure, oracle
from .growth import RngSpec, grow, parents_to_csv
from .params import INFINITE, ModelParams
from .specialfn import PrecisionPolicy

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_STATS = 2
EXIT_CONFIG = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_CONFIG, f"error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _emit_table(columns, rows, out_path, fig_path=None, fig_kind=None):
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    if fig_path:
        from .figures import render_table
        render_table(columns, rows, fig_kind or "table", fig_path)


def _parse_tau(value: str):
    if value in ("inf", "INF", "infinite"):
        return INFINITE
    return int(value)


def _parse_range(spec: str):
    """Parse 'lo:hi' or 'lo:hi:step' into an integer grid."""
    parts = spec.split(":")
    if len(parts) == 1:
        return [int(parts[0])]
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) > 2 else 1
    return list(range(lo, hi + 1, step))


def _log_grid(lo: int, hi: int, per_decade: int = 16):
    """Integer grid, log-spaced, always including lo and hi."""
    if hi <= lo:
        return [lo]
    count = max(2, int(math.log10(hi / lo) * per_decade) + 1)
    vals = np.unique(np.round(np.geomspace(lo, hi, count)).astype(np.int64))
    return vals.tolist()


def _policy_from(args) -> PrecisionPolicy:
    return PrecisionPolicy(escalation_precision=args.precision_bits,
                           cancellation_threshold=args.cancellation_threshold)


def _add_common(sub, seed=False):
    sub.add_argument("--alpha", type=float, required=True,
                     help="attachment parameter in [0, 1]")
    sub.add_argument("--out", default=None, help="output path (default stdout)")
    sub.add_argument("--figure", default=None,
                     help="also render the table to this image file")
    sub.add_argument("--precision-bits", type=int, default=256)
    sub.add_argument("--cancellation-threshold", type=float, default=1e-6)
    if seed:
        sub.add_argument("--seed", type=int, default=1)
        sub.add_argument("--threads", type=int, default=0,
                         help="worker processes (0 = all available)")


def main(argv=None) -> int:
    parser = _Parser(prog="treeload",
                     description="Exact and simulated distributions of "
                                 "cluster size, in-degree, and edge "
                                 "betweenness in evolving random trees")
    subs = parser.add_subparsers(dest="command", required=True,
                               parser_class=_Parser)

    p_exact = subs.add_parser("exact",
                              help="emit an analytic table")
    p_exact.add_argument("kind", choices=[
        "joint", "marginal-n", "marginal-q", "ccdf-n", "ccdf-q",
        "cond-mean-n", "cond-mean-q", "load-pmf", "load-ccdf",
        "load-mean", "mean-cluster-size"])
    p_exact.add_argument("--tau", type=_parse_tau, default=None)
    p_exact.add_argument("--max-n", type=int, default=None)
    p_exact.add_argument("--max-q", type=int, default=None)
    p_exact.add_argument("--q", type=int, default=None,
                         help="conditioning in-degree for load tables")
    p_exact.add_argument("--lambda", dest="lam", default=None,
                         help="rescaled-betweenness grid lo:hi[:step]")
    _add_common(p_exact)

    p_grow = subs.add_parser("grow",
                             help="simulate trees and dump edge records")
    p_grow.add_argument("--size", type=int, required=True)
    p_grow.add_argument("--reps", type=int, default=1)
    p_grow.add_argument("--qmin", action="store_true",
                        help="include the q_min column")
    p_grow.add_argument("--parents-out", default=None,
                        help="also write parents arrays to this path")
    _add_common(p_grow, seed=True)

    p_cmp = subs.add_parser("compare",
                            help="compare an ensemble against analytic tables")
    p_cmp.add_argument("kind", choices=[
        "joint", "ccdf-n", "ccdf-q", "cond-mean-n", "cond-mean-q",
        "load-ccdf", "load-mean"])
    p_cmp.add_argument("--size", type=int, required=True)
    p_cmp.add_argument("--reps", type=int, default=10)
    p_cmp.add_argument("--q", type=int, action="append", default=None,
                       help="conditioning in-degrees (repeatable)")
    p_cmp.add_argument("--cut-n", type=int, action="append", default=None)
    p_cmp.add_argument("--z-max", type=float, default=4.0)
    p_cmp.add_argument("--min-count", type=float, default=10.0,
                       help="expected-count floor for pass/fail points")
    p_cmp.add_argument("--max-q", type=int, default=None)
    p_cmp.add_argument("--max-n", type=int, default=None)
    _add_common(p_cmp, seed=True)

    p_ver = subs.add_parser("verify",
                            help="run oracle and consistency checks")
    p_ver.add_argument("--tau-max", type=int, default=100)
    p_ver.add_argument("--enumerate-max", type=int, default=6)
    p_ver.add_argument("--tol", type=float, default=1e-9)
    p_ver.add_argument("--dp-bound", type=int, default=oracle.DP_BOUND)
    p_ver.add_argument("--betweenness-nodes", type=int, default=400)
    p_ver.add_argument("--seed", type=int, default=1)
    _add_common(p_ver)

    args = parser.parse_args(argv)
    try:
        if args.command == "exact":
            return _cmd_exact(args)
        if args.command == "grow":
            return _cmd_grow(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except (exact.NumericIntegrityError, exact.ConditioningError,
            exact.DivergenceError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_VERIFY
    except (ValueError, OSError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_CONFIG
    raise AssertionError("unreachable")


def _require(cond, message):
    if not cond:
        raise ValueError(message)


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------

def _cmd_exact(args) -> int:
    params = ModelParams(args.alpha, _policy_from(args))
    tau = args.tau
    kind = args.kind
    if kind == "joint":
        _require(tau not in (None, INFINITE), "joint table needs finite --tau")
        table = exact.joint_table(params, int(tau), max_n=args.max_n,
                                  max_q=args.max_q)
        rows = [(n, q, p) for n, q, p in zip(table.n.tolist(),
                                             table.q.tolist(),
                                             table.p.tolist())
                if p > 0.0]
        _emit_table(("n", "q", "p"), rows, args.out, args.figure, "joint")
        return EXIT_OK
    if kind in ("marginal-n", "ccdf-n", "cond-mean-q"):
        _require(tau is not None, f"{kind} needs --tau (or inf)")
        hi = args.max_n
        if hi is None:
            hi = (int(tau) - 1) if tau != INFINITE else 1000
        ns = range(hi + 1)
        if kind == "marginal-n":
            rows = [(n, exact.p_marginal_n(params, tau, n)) for n in ns]
            cols = ("n", "p")
        elif kind == "ccdf-n":
            rows = [(n, exact.ccdf_n(params, tau, n)) for n in ns]
            cols = ("n", "ccdf")
        else:
            rows = [(n, exact.mean_q_given_n(params, n)) for n in ns]
            cols = ("n", "mean_q")
        _emit_table(cols, rows, args.out, args.figure, kind)
        return EXIT_OK
    if kind in ("marginal-q", "ccdf-q", "cond-mean-n"):
        _require(tau is not None, f"{kind} needs --tau (or inf)")
        hi = args.max_q
        if hi is None:
            hi = min(int(tau) - 1, 200) if tau != INFINITE else 60
        qs = range(hi + 1)
        if kind == "marginal-q":
            rows = [(q, exact.p_marginal_q(params, tau, q)) for q in qs]
            cols = ("q", "p")
        elif kind == "ccdf-q":
            rows = [(q, exact.ccdf_q(params, tau, q)) for q in qs]
            cols = ("q", "ccdf")
        else:
            rows = [(q, exact.mean_n_given_q(params, tau, q)) for q in qs]
            cols = ("q", "mean_n")
        _emit_table(cols, rows, args.out, args.figure, kind)
        return EXIT_OK
    if kind == "load-pmf":
        _require(tau not in (None, INFINITE), "load-pmf needs finite --tau")
        t = int(tau)
        rows = []
        for n in range((t - 1) // 2 + 1):
            load = exact.betweenness_of(n, t)
            rows.append((load,
                         exact.p_load(params, t, load) if args.q is None
                         else exact.p_load_given_q(params, t, load, args.q)))
        rows.sort()
        cols = ("L", "p")
        _emit_table(cols, rows, args.out, args.figure, kind)
        return EXIT_OK
    if kind == "load-ccdf":
        _require(args.q is not None, "load-ccdf needs --q")
        _require(args.lam is not None, "load-ccdf needs --lambda lo:hi")
        grid = _parse_range(args.lam)
        if tau in (None, INFINITE):
            rows = [(lam, exact.ccdf_load_given_q(params, lam, args.q))
                    for lam in grid if lam >= args.q + 1]
        else:
            rows = [(lam, exact.ccdf_load_given_q_finite(params, int(tau),
                                                         lam, args.q))
                    for lam in grid if lam >= args.q + 1]
        _emit_table(("lambda", "ccdf"), rows, args.out, args.figure, kind)
        return EXIT_OK
    if kind == "load-mean":
        _require(tau is not None, "load-mean needs --tau (or inf)")
        hi = args.max_q if args.max_q is not None else 20
        rows = [(q, exact.mean_load_given_q(params, tau, q))
                for q in range(hi + 1)]
        _emit_table(("q", "mean_load"), rows, args.out, args.figure, kind)
        return EXIT_OK
    if kind == "mean-cluster-size":
        _require(tau not in (None, INFINITE), "needs finite --tau")
        t = int(tau)
        rows = [(t, exact.mean_cluster_size(params, t),
                 exact.mean_cluster_size_asymptotic(params, t))]
        _emit_table(("tau", "mean_n", "asymptotic"), rows, args.out,
                    args.figure, kind)
        return EXIT_OK
    raise ValueError(f"unsupported kind {kind}")


# ---------------------------------------------------------------------------
# grow
# ---------------------------------------------------------------------------

def _cmd_grow(args) -> int:
    params = ModelParams(args.alpha, _policy_from(args))
    _require(args.size >= 1, "--size must be >= 1")
    _require(args.reps >= 1, "--reps must be >= 1")
    cols = ["rep", "node", "tau_e", "q", "n", "L"]
    if args.qmin:
        cols.append("q_min")
    rows = []
    parents_chunks = []
    for rep in range(args.reps):
        tree = grow(params, args.size, RngSpec(args.seed, rep))
        recs = measure.edge_records(tree)
        block = [recs.node, recs.node, recs.q, recs.n, recs.L]
        if args.qmin:
            block.append(recs.q_min)
        for row in zip(*(c.tolist() for c in block)):
            rows.append((rep,) + row)
        if args.parents_out:
            parents_chunks.append(f"# rep {rep}\n" + parents_to_csv(tree))
    _emit_table(tuple(cols), rows, args.out)
    if args.parents_out:
        with open(args.parents_out, "w", newline="") as fh:
            fh.write("".join(parents_chunks))
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _stderr_binomial(p_hat, total):
    return np.sqrt(np.maximum(p_hat * (1.0 - p_hat), 0.0) / total)


def _compare_rows_ccdf(stats_list, merged, params, kind, min_count, max_x):
    """Pointwise rows (x, empirical, analytic, rel_diff, stderr, expected)."""
    tau = merged.tau
    per_rep = []
    key = "n" if kind == "ccdf-n" else "q"
    for s in stats_list:
        sup, cc = measure.empirical_ccdf(s, key)
        per_rep.append((sup, cc))
    sup_all = np.arange(max(len(c[0]) for c in per_rep))
    if max_x is not None:
        sup_all = sup_all[sup_all <= max_x]
    reps = len(per_rep)
    emp = np.zeros((reps, len(sup_all)))
    for i, (sup, cc) in enumerate(per_rep):
        m = min(len(cc), len(sup_all))
        emp[i, :m] = cc[:m]
    mean = emp.mean(axis=0)
    spread = emp.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else \
        np.zeros(len(sup_all))
    fn = exact.ccdf_n if kind == "ccdf-n" else exact.ccdf_q
    rows = []
    for j, x in enumerate(sup_all.tolist()):
        analytic = fn(params, tau, int(x))
        expected = analytic * merged.edges
        floor = _stderr_binomial(analytic, merged.edges)
        err = max(spread[j], floor)
        rel = (mean[j] - analytic) / analytic if analytic > 0 else math.inf
        rows.append((x, mean[j], analytic, rel, err, expected))
    return rows


def _cmd_compare(args) -> int:
    params = ModelParams(args.alpha, _policy_from(args))
    threads = args.threads if args.threads > 0 else None
    import os
    workers = threads or min(4, os.cpu_count() or 1)
    kind = args.kind
    track_q = tuple(args.q) if args.q else ((1, 2) if "load" in kind else ())
    keep_joint = kind == "joint"
    merged, stats_list = measure.run_ensemble(
        params, args.size, args.reps, args.seed, threads=workers,
        track_q=track_q, keep_joint=keep_joint, per_rep=True)
    tau = merged.tau
    failures = 0
    checked = 0

    if kind in ("ccdf-n", "ccdf-q"):
        max_x = args.max_n if kind == "ccdf-n" else args.max_q
        rows = _compare_rows_ccdf(stats_list, merged, params, kind,
                                  args.min_count, max_x)
        out_rows = []
        for x, emp, ana, rel, err, expected in rows:
            z = (emp - ana) / err if err > 0 else 0.0
            eligible = expected >= args.min_count and ana >= 1e-4 / merged.reps
            if eligible:
                checked += 1
                if abs(z) > args.z_max:
                    failures += 1
            out_rows.append((x, emp, ana, rel, err))
        _emit_table((("n" if kind == "ccdf-n" else "q"),
                     "empirical", "analytic", "rel_diff", "stderr"),
                    out_rows, args.out, args.figure, kind)
    elif kind == "joint":
        cuts_q = tuple(args.q) if args.q else (1, 10, 20)
        cuts_n = tuple(args.cut_n) if args.cut_n else (5, 10, 20, 40)
        total = merged.edges
        out_rows = []
        joint = {}
        for n, q, c in merged.joint_items():
            joint[(n, q)] = c
        for qc in cuts_q:
            for n in range(qc, tau):
                ana = exact.p_joint(params, tau, n, qc)
                expected = ana * total
                if expected < args.min_count:
                    continue
                emp = joint.get((n, qc), 0) / total
                err = _stderr_binomial(ana, total)
                rel = emp / ana - 1.0
                z = (emp - ana) / err if err > 0 else 0.0
                checked += 1
                if abs(z) > args.z_max:
                    failures += 1
                out_rows.append((n, qc, emp, ana, rel, err))
        for nc in cuts_n:
            for q in range(nc + 1):
                ana = exact.p_joint(params, tau, nc, q)
                expected = ana * total
                if expected < args.min_count:
                    continue
                emp = joint.get((nc, q), 0) / total
                err = _stderr_binomial(ana, total)
                rel = emp / ana - 1.0
                z = (emp - ana) / err if err > 0 else 0.0
                checked += 1
                if abs(z) > args.z_max:
                    failures += 1
                out_rows.append((nc, q, emp, ana, rel, err))
        _emit_table(("n", "q", "empirical", "analytic", "rel_diff", "stderr"),
                    out_rows, args.out, args.figure, kind)
    elif kind == "cond-mean-n":
        qs, means, counts = measure.conditional_means(merged)["n_given_q"]
        hi = args.max_q if args.max_q is not None else 20
        out_rows = []
        for q, m, c in zip(qs.tolist(), means.tolist(), counts.tolist()):
            if q > hi:
                break
            ana = exact.mean_n_given_q(params, tau, int(q))
            var = (merged.q_sum_n2[q] / c - (merged.q_sum_n[q] / c) ** 2)
            err = math.sqrt(max(var, 0.0) / c)
            z = (m - ana) / err if err > 0 else 0.0
            if c >= args.min_count:
                checked += 1
                if abs(z) > args.z_max:
                    failures += 1
            out_rows.append((q, m, ana, m / ana - 1.0 if ana else math.inf,
                             err))
        _emit_table(("q", "empirical", "analytic", "rel_diff", "stderr"),
                    out_rows, args.out, args.figure, kind)
    elif kind == "cond-mean-q":
        sup, means, counts = measure.conditional_means(merged)["q_given_n"]
        hi = args.max_n if args.max_n is not None else 10**4
        out_rows = []
        for n, m, c in zip(sup.tolist(), means.tolist(), counts.tolist()):
            if n > hi:
                break
            ana = exact.mean_q_given_n(params, int(n))
            # conditional variance of q is not tracked; a binomial-style
            # bound sqrt(mean/c) is conservative for this concentrated pmf
            err = math.sqrt(max(ana, 0.25) / c)
            z = (m - ana) / err if err > 0 else 0.0
            if c >= args.min_count:
                checked += 1
                if abs(z) > args.z_max:
                    failures += 1
            out_rows.append((n, m, ana, m / ana - 1.0 if ana else math.inf,
                             err))
        _emit_table(("n", "empirical", "analytic", "rel_diff", "stderr"),
                    out_rows, args.out, args.figure, kind)
    elif kind == "load-ccdf":
        out_rows = []
        for qv in track_q:
            sup, cc = measure.empirical_ccdf(merged, "load_given_q", q=qv)
            n_cond = sum(merged.load_hist[qv].values())
            grid = _log_grid(qv + 1, int(sup.max()) + 1)
            for lam in grid:
                ana = exact.ccdf_load_given_q(params, int(lam), qv)
                emp = float(cc[np.searchsorted(sup, lam - 1e-9)]) \
                    if lam <= sup.max() else 0.0
                err = _stderr_binomial(ana, n_cond)
                expected = ana * n_cond
                z = (emp - ana) / err if err > 0 else 0.0
                if expected >= args.min_count:
                    checked += 1
                    if abs(z) > args.z_max:
                        failures += 1
                out_rows.append((qv, lam, emp, ana,
                                 emp / ana - 1.0 if ana else math.inf, err))
        _emit_table(("q", "lambda", "empirical", "analytic", "rel_diff",
                     "stderr"), out_rows, args.out, args.figure, kind)
    elif kind == "load-mean":
        qs, lam, counts = measure.mean_load_all_q(merged)
        hi = args.max_q if args.max_q is not None else 10
        out_rows = []
        for q, m, c in zip(qs.tolist(), lam.tolist(), counts.tolist()):
            if q > hi:
                break
            ana = exact.mean_load_given_q(params, INFINITE, int(q))
            rel = m / ana - 1.0
            err = abs(ana) * 0.1 / math.sqrt(max(c, 1.0))
            if c >= args.min_count:
                checked += 1
                if abs(rel) > 0.10:
                    failures += 1
            out_rows.append((q, m, ana, rel, err))
        _emit_table(("q", "empirical", "analytic", "rel_diff", "stderr"),
                    out_rows, args.out, args.figure, kind)
    else:
        raise ValueError(f"unsupported comparison kind {kind}")

    sys.stderr.write(f"compare {kind}: {checked} points checked, "
                     f"{failures} outside tolerance\n")
    return EXIT_OK if failures == 0 else EXIT_STATS


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _cmd_verify(args) -> int:
    params = ModelParams(args.alpha, _policy_from(args))
    report = {"alpha": args.alpha, "tol": args.tol, "checks": {}}
    ok = True

    def record(name, max_err, tol):
        nonlocal ok
        passed = bool(max_err <= tol)
        report["checks"][name] = {"max_abs_err": float(max_err),
                                  "tol": float(tol), "pass": passed}
        ok = ok and passed

    t0 = time.time()
    tau = min(args.tau_max, args.dp_bound)

    if params.alpha > 0.0:
        grid = oracle.dp_joint(params, tau, dp_bound=args.dp_bound)
        table = exact.joint_table(params, tau, tail_bound=1e-16)
        dense = np.zeros_like(grid)
        dense[table.n, table.q] = table.p
        record("dp_joint_vs_closed", float(np.abs(grid - dense).max()),
               args.tol)

        err = 0.0
        for tau_e in sorted({1, 2, max(1, tau // 2), tau}):
            gs = oracle.dp_specific(params, tau_e, tau,
                                    dp_bound=args.dp_bound)
            for n in range(gs.span + 1):
                for q in range(n + 1):
                    err = max(err, abs(gs.values[n, q]
                                       - exact.p_specific(params, tau_e,
                                                          tau, n, q)))
        record("dp_specific_vs_closed", err, args.tol / 10)
    else:
        dense = None

    enum_tau = min(args.enumerate_max, oracle.ENUM_BOUND)
    enum = oracle.enumerate_histories(params, enum_tau)
    err = max(abs(float(p) - exact.p_joint(params, enum_tau, n, q))
              for (n, q), p in enum[0].items())
    record("enumeration_vs_closed", err, 1e-12)

    tree = grow(params, args.betweenness_nodes - 1, RngSpec(args.seed))
    recs = measure.edge_records(tree)
    brute = oracle.bruteforce_edge_betweenness(tree.parents)
    record("betweenness_oracle", float(np.abs(brute - recs.L).max()), 0)

    table = exact.joint_table(params, tau, tail_bound=1e-18)
    mass_err = abs(table.total_mass() - 1.0) + table.skipped_mass_bound
    record("joint_normalization", mass_err, 1e-12)

    err_n = max(abs(v - exact.p_marginal_n(params, tau, n))
                for n, v in table.marginal_over_q().items())
    record("marginal_n_consistency", err_n, 1e-12)
    err_q = max(abs(v - exact.p_marginal_q(params, tau, q))
                for q, v in table.marginal_over_n().items())
    record("marginal_q_consistency", err_q + table.skipped_mass_bound, 1e-12)

    if params.alpha > 0.0:
        err = 0.0
        small = min(tau, 60)
        mix = np.zeros((small, small))
        for tau_e in range(1, small + 1):
            for n in range(small - tau_e + 1):
                for q in range(n + 1):
                    mix[n, q] += exact.p_specific(params, tau_e, small, n, q)
        mix /= small
        for n in range(small):
            for q in range(n + 1):
                err = max(err, abs(mix[n, q]
                                   - exact.p_joint(params, small, n, q)))
        record("mixture_consistency", err, 1e-10)

    err = 0.0
    for n in range(min(tau, 200)):
        diff = (exact.ccdf_n(params, tau, n) - exact.ccdf_n(params, tau, n + 1)
                - exact.p_marginal_n(params, tau, n))
        err = max(err, abs(diff))
    for q in range(min(tau, 200)):
        diff = (exact.ccdf_q(params, tau, q) - exact.ccdf_q(params, tau, q + 1)
                - exact.p_marginal_q(params, tau, q))
        err = max(err, abs(diff))
    record("ccdf_differencing", err, 1e-12)

    if 0.0 < params.alpha:
        err = 0.0
        for q in (0, 1, 2, 5):
            if q >= tau:
                continue
            total = math.fsum(exact.p_load_given_q(params, tau,
                                                   exact.betweenness_of(n, tau),
                                                   q)
                              for n in range((tau - 1) // 2 + 1))
            err = max(err, abs(total - 1.0))
        record("load_mass_conservation", err, 1e-10)

    report["elapsed_seconds"] = time.time() - t0
    text = json.dumps(report, indent=2) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    if not ok:
        failing = [k for k, v in report["checks"].items() if not v["pass"]]
        sys.stderr.write(f"verification failed: {', '.join(failing)}\n")
    return EXIT_OK if ok else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
