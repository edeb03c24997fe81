"""Per-edge observables of grown trees and ensemble aggregation.

Every non-root node carries one edge; its record holds the in-degree q of
the younger endpoint, the cluster index n (subtree size minus one), the
betweenness L = (n+1)(tau-n), and optionally the smaller of the two
endpoint in-degrees.  Ensembles of records are reduced to integer counters
(joint and marginal histograms, conditional accumulators) whose merge is
associative and commutative, so realizations can be processed in parallel
and combined in any grouping with identical results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .growth import RngSpec, Tree, grow
from .params import ModelParams
from .specialfn import DomainError

__all__ = [
    "EdgeRecords",
    "EnsembleStats",
    "edge_records",
    "accumulate",
    "empirical_ccdf",
    "conditional_means",
    "run_ensemble",
]


@dataclass
class EdgeRecords:
    """Column-oriented edge records for one realization.

    Row i describes the edge of node i+1: tau_e is the birth time (= node
    id), q the in-degree of the younger endpoint, n the cluster index, L
    the betweenness, q_min the smaller endpoint in-degree.
    """

    tau: int
    node: np.ndarray
    q: np.ndarray
    n: np.ndarray
    L: np.ndarray
    q_min: np.ndarray

    def __len__(self) -> int:
        return len(self.node)


def _subtree_sizes(parents: np.ndarray) -> np.ndarray:
    """Subtree size of every node by one backward pass over node ids.

    Children always carry larger ids than their parents, so adding each
    node's accumulated size onto its parent, from the highest id downward,
    is exact.  Plain lists keep the loop fast and stack-free.
    """
    n_nodes = len(parents)
    sizes = [1] * n_nodes
    par = parents.tolist()
    for i in range(n_nodes - 1, 0, -1):
        sizes[par[i]] += sizes[i]
    return np.array(sizes, dtype=np.int64)


def edge_records(tree: Tree) -> EdgeRecords:
    """Extract (q, n, L, q_min) for every edge in O(N)."""
    parents = tree.parents
    n_nodes = len(parents)
    ids = np.arange(n_nodes)
    if parents[0] != -1 or (parents[1:] >= ids[1:]).any() or \
            (parents[1:] < 0).any():
        raise DomainError("malformed tree: every target must be older")
    tau = n_nodes - 1
    indeg = np.bincount(parents[1:], minlength=n_nodes)
    sizes = _subtree_sizes(parents)
    n = sizes[1:] - 1
    L = (n + 1) * (tau - n)
    q = indeg[1:]
    q_min = np.minimum(q, indeg[parents[1:]])
    return EdgeRecords(tau=tau, node=ids[1:], q=q, n=n, L=L, q_min=q_min)


@dataclass
class EnsembleStats:
    """Mergeable integer counters over an ensemble of equal-sized trees.

    The joint histogram is sparse (int64 keys n * (tau + 1) + q); marginal
    histograms are dense; conditional accumulators keep sums and counts per
    condition.  ``load_hist[q]`` holds the conditional cluster-index
    histogram for the tracked in-degrees, from which rescaled-betweenness
    CCDFs derive exactly.
    """

    alpha: float
    tau: int
    reps: int = 0
    edges: int = 0
    joint: dict = field(default_factory=dict)
    n_hist: np.ndarray | None = None
    q_hist: np.ndarray | None = None
    # per-q accumulators: count, sum n, sum n^2
    q_count: np.ndarray | None = None
    q_sum_n: np.ndarray | None = None
    q_sum_n2: np.ndarray | None = None
    # per-n accumulators over observed n values
    n_support: np.ndarray | None = None
    n_count: np.ndarray | None = None
    n_sum_q: np.ndarray | None = None
    track_q: tuple = ()
    load_hist: dict = field(default_factory=dict)

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        if (self.alpha, self.tau) != (other.alpha, other.tau):
            raise DomainError("cannot merge stats with different parameters")
        if self.track_q != other.track_q:
            raise DomainError("cannot merge stats tracking different q sets")
        out = EnsembleStats(alpha=self.alpha, tau=self.tau,
                            reps=self.reps + other.reps,
                            edges=self.edges + other.edges,
                            track_q=self.track_q)
        joint = dict(self.joint)
        for kk, v in other.joint.items():
            joint[kk] = joint.get(kk, 0) + v
        out.joint = joint
        out.n_hist = _add_padded(self.n_hist, other.n_hist)
        out.q_hist = _add_padded(self.q_hist, other.q_hist)
        out.q_count = _add_padded(self.q_count, other.q_count)
        out.q_sum_n = _add_padded(self.q_sum_n, other.q_sum_n)
        out.q_sum_n2 = _add_padded(self.q_sum_n2, other.q_sum_n2)
        sup = sorted(set(self.n_support.tolist())
                     | set(other.n_support.tolist()))
        idx = {v: i for i, v in enumerate(sup)}
        cnt = np.zeros(len(sup), dtype=np.int64)
        sq = np.zeros(len(sup), dtype=np.int64)
        for src in (self, other):
            for v, c, s in zip(src.n_support.tolist(), src.n_count.tolist(),
                               src.n_sum_q.tolist()):
                cnt[idx[v]] += c
                sq[idx[v]] += s
        out.n_support = np.array(sup, dtype=np.int64)
        out.n_count = cnt
        out.n_sum_q = sq
        out.load_hist = {}
        for qv in self.track_q:
            merged = dict(self.load_hist.get(qv, {}))
            for nv, c in other.load_hist.get(qv, {}).items():
                merged[nv] = merged.get(nv, 0) + c
            out.load_hist[qv] = merged
        return out

    def joint_items(self):
        """Iterate (n, q, count) of the sparse joint histogram."""
        base = self.tau + 1
        for key, c in self.joint.items():
            yield key // base, key % base, c

    def to_json(self) -> str:
        payload = {
            "alpha": self.alpha,
            "tau": self.tau,
            "reps": self.reps,
            "edges": self.edges,
            "n_hist": self.n_hist.tolist(),
            "q_hist": self.q_hist.tolist(),
            "q_count": self.q_count.tolist(),
            "q_sum_n": self.q_sum_n.tolist(),
            "q_sum_n2": self.q_sum_n2.tolist(),
            "n_support": self.n_support.tolist(),
            "n_count": self.n_count.tolist(),
            "n_sum_q": self.n_sum_q.tolist(),
            "track_q": list(self.track_q),
            "load_hist": {str(q): {str(n): c for n, c in h.items()}
                          for q, h in self.load_hist.items()},
            "joint": {str(k): v for k, v in self.joint.items()},
        }
        return json.dumps(payload)


def _add_padded(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return out


def accumulate(records_seq, alpha: float, track_q: tuple = (),
               keep_joint: bool = True) -> EnsembleStats:
    """Reduce edge-record batches of one or more realizations into counters."""
    records_seq = list(records_seq)
    if not records_seq:
        raise DomainError("accumulate needs at least one realization")
    tau = records_seq[0].tau
    if any(r.tau != tau for r in records_seq):
        raise DomainError("all realizations must share tau")
    stats = EnsembleStats(alpha=alpha, tau=tau, reps=len(records_seq),
                          track_q=tuple(track_q))
    n_all = np.concatenate([r.n for r in records_seq])
    q_all = np.concatenate([r.q for r in records_seq])
    stats.edges = len(n_all)
    stats.n_hist = np.bincount(n_all)
    stats.q_hist = np.bincount(q_all)
    qmax = len(stats.q_hist) - 1
    stats.q_count = stats.q_hist.astype(np.int64)
    stats.q_sum_n = np.bincount(q_all, weights=n_all,
                                minlength=qmax + 1).astype(np.int64)
    stats.q_sum_n2 = np.bincount(q_all, weights=n_all.astype(np.float64) ** 2,
                                 minlength=qmax + 1).astype(np.int64)
    sup, inv = np.unique(n_all, return_inverse=True)
    stats.n_support = sup.astype(np.int64)
    stats.n_count = np.bincount(inv).astype(np.int64)
    stats.n_sum_q = np.bincount(inv, weights=q_all).astype(np.int64)
    if keep_joint:
        keys = n_all.astype(np.int64) * (tau + 1) + q_all
        uk, uc = np.unique(keys, return_counts=True)
        stats.joint = dict(zip(uk.tolist(), uc.tolist()))
    for qv in stats.track_q:
        mask = q_all == qv
        nv, nc = np.unique(n_all[mask], return_counts=True)
        stats.load_hist[qv] = dict(zip(nv.tolist(), nc.tolist()))
    return stats


def empirical_ccdf(stats: EnsembleStats, kind: str, q: int | None = None):
    """Right-tail cumulative relative frequencies at integer support points.

    kind is one of 'n', 'q', 'load', 'load_given_q' (needs q from the
    tracked set; support is the rescaled betweenness L/(tau+1)).
    Returns (support, ccdf) arrays.
    """
    if kind == "n":
        hist = stats.n_hist
    elif kind == "q":
        hist = stats.q_hist
    elif kind in ("load", "load_given_q"):
        if kind == "load":
            counts = np.zeros(len(stats.n_hist), dtype=np.int64)
            counts[: len(stats.n_hist)] = stats.n_hist
            pairs = list(enumerate(counts.tolist()))
        else:
            if q is None or q not in stats.load_hist:
                raise DomainError(f"in-degree {q} was not tracked")
            pairs = sorted(stats.load_hist[q].items())
            if not pairs:
                raise DomainError(f"no edges with in-degree {q}")
        tau = stats.tau
        lam = {}
        for nv, c in pairs:
            if c == 0:
                continue
            lv = (nv + 1) * (tau - nv) / (tau + 1)
            lam[lv] = lam.get(lv, 0) + c
        support = np.array(sorted(lam))
        counts = np.array([lam[v] for v in support.tolist()], dtype=np.int64)
        tail = counts[::-1].cumsum()[::-1]
        return support, tail / tail[0]
    else:
        raise DomainError(f"unknown CCDF kind {kind!r}")
    if hist is None or hist.sum() == 0:
        raise DomainError("empty statistics")
    support = np.arange(len(hist))
    tail = hist[::-1].cumsum()[::-1]
    return support, tail / tail[0]


def conditional_means(stats: EnsembleStats):
    """Sample conditional means with counts, for error bars.

    Returns a dict with tables 'n_given_q' (q, mean n, count),
    'q_given_n' (n, mean q, count) and 'load_given_q' (q, mean rescaled
    betweenness, count); empty conditions are omitted.
    """
    out = {}
    mask = stats.q_count > 0
    qs = np.nonzero(mask)[0]
    out["n_given_q"] = (qs, stats.q_sum_n[qs] / stats.q_count[qs],
                        stats.q_count[qs])
    out["q_given_n"] = (stats.n_support,
                        stats.n_sum_q / stats.n_count,
                        stats.n_count)
    lam_q = []
    lam_mean = []
    lam_count = []
    tau = stats.tau
    for qv in stats.track_q:
        hist = stats.load_hist.get(qv, {})
        total = sum(hist.values())
        if total == 0:
            continue
        s = sum(c * (nv + 1) * (tau - nv) / (tau + 1)
                for nv, c in hist.items())
        lam_q.append(qv)
        lam_mean.append(s / total)
        lam_count.append(total)
    out["load_given_q"] = (np.array(lam_q), np.array(lam_mean),
                           np.array(lam_count, dtype=np.int64))
    return out


def mean_load_all_q(stats: EnsembleStats):
    """E[rescaled betweenness | q] for every observed q, from the counters."""
    tau = stats.tau
    qs = np.nonzero(stats.q_count > 0)[0]
    # L/(tau+1) = (n+1)(tau-n)/(tau+1); expand with the n and n^2 sums
    cnt = stats.q_count[qs].astype(np.float64)
    s1 = stats.q_sum_n[qs].astype(np.float64)
    s2 = stats.q_sum_n2[qs].astype(np.float64)
    lam = (tau * cnt + (tau - 1.0) * s1 - s2) / (tau + 1.0) / cnt
    return qs, lam, stats.q_count[qs]


def _one_realization(args) -> EnsembleStats:
    alpha, size, master_seed, rep, track_q, keep_joint = args
    params = ModelParams(alpha)
    tree = grow(params, size, RngSpec(master_seed, rep))
    recs = edge_records(tree)
    return accumulate([recs], alpha, track_q=track_q, keep_joint=keep_joint)


def run_ensemble(params: ModelParams, size: int, reps: int, master_seed: int,
                 threads: int = 1, track_q: tuple = (),
                 keep_joint: bool = True, per_rep: bool = False):
    """Grow ``reps`` realizations and reduce them to ensemble counters.

    Realization r uses stream id r of the master seed, so results are
    independent of ``threads`` and of scheduling.  With ``per_rep`` the
    per-realization stats are returned alongside the merged ones.
    """
    jobs = [(params.alpha, size, master_seed, rep, tuple(track_q), keep_joint)
            for rep in range(reps)]
    if threads > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            stats_list = list(pool.map(_one_realization, jobs,
                                       chunksize=max(1, reps // (4 * threads))))
    else:
        stats_list = [_one_realization(j) for j in jobs]
    merged = stats_list[0]
    for s in stats_list[1:]:
        merged = merged.merge(s)
    if per_rep:
        return merged, stats_list
    return merged
