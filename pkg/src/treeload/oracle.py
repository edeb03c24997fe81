"""Independent brute-force references for the closed-form distributions.

Three unrelated routes to the same quantities: a dynamic-programming
integrator of the edge-state recurrence, an exhaustive weighted enumeration
of every attachment history for tiny networks (exact rational arithmetic),
and a literal path-counting edge-betweenness checker.  None of them share
code with the closed forms they validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .params import ModelParams
from .specialfn import BoundError, DomainError

__all__ = [
    "StateGrid",
    "dp_specific",
    "dp_joint",
    "enumerate_histories",
    "bruteforce_edge_betweenness",
]

DP_BOUND = 2000
ENUM_BOUND = 8


@dataclass
class StateGrid:
    """Dense probability table over edge states (n, q), 0 <= q <= n <= span."""

    tau_e: int
    tau: int
    values: np.ndarray  # shape (span+1, span+1), entry [n, q]

    @property
    def span(self) -> int:
        return self.values.shape[0] - 1

    def prob(self, n: int, q: int) -> float:
        if not (0 <= q <= n <= self.span):
            return 0.0
        return float(self.values[n, q])

    def mass(self) -> float:
        return float(self.values.sum())


def _check_alpha_positive(params: ModelParams) -> float:
    if not 0.0 < params.alpha <= 1.0:
        raise DomainError("DP integration requires alpha in (0, 1]")
    return params.alpha


def _dp_step(values: np.ndarray, alpha: float, t: int) -> np.ndarray:
    """One step of the edge-state recurrence, from time t-1 to time t.

    Transition weights out of (n, q) at time t-1: (n - alpha q)/(t - alpha)
    grows the cluster without touching its root, (alpha q + 1 - alpha)/
    (t - alpha) attaches to the root, and the remainder leaves the state
    unchanged.
    """
    span = values.shape[0] - 1
    n = np.arange(span + 1, dtype=np.float64)[:, None]
    q = np.arange(span + 1, dtype=np.float64)[None, :]
    denom = t - alpha
    grow = (n - alpha * q) / denom              # (n, q) -> (n+1, q)
    attach = np.broadcast_to((alpha * q + 1.0 - alpha) / denom,
                             values.shape)      # (n, q) -> (n+1, q+1)
    out = (1.0 - grow - attach) * values
    out[1:, :] += grow[:-1, :] * values[:-1, :]
    out[1:, 1:] += attach[:-1, :-1] * values[:-1, :-1]
    return out


def dp_specific(params: ModelParams, tau_e: int, tau: int,
                dp_bound: int = DP_BOUND) -> StateGrid:
    """Edge-state distribution for an edge born at tau_e, integrated to tau.

    Starts from the point mass at (0, 0) and applies the three-term
    recurrence tau - tau_e times.
    """
    alpha = _check_alpha_positive(params)
    if tau_e < 1 or tau < tau_e:
        raise DomainError("dp_specific requires 1 <= tau_e <= tau")
    if tau > dp_bound:
        raise BoundError(f"tau {tau} exceeds DP bound {dp_bound}")
    span = tau - tau_e
    values = np.zeros((span + 1, span + 1))
    values[0, 0] = 1.0
    for t in range(tau_e + 1, tau + 1):
        values = _dp_step(values, alpha, t)
    return StateGrid(tau_e=tau_e, tau=tau, values=values)


def dp_joint(params: ModelParams, tau: int,
             dp_bound: int = DP_BOUND) -> np.ndarray:
    """Edge-state distribution of a uniformly random edge at time tau.

    Equals the uniform mixture of dp_specific over birth times 1..tau.  By
    linearity of the recurrence the mixture is integrated in a single pass:
    the running sum over birth times is stepped once per unit of time and a
    fresh point mass at (0, 0) is injected for the newborn edge.
    """
    alpha = _check_alpha_positive(params)
    if tau < 1:
        raise DomainError("dp_joint requires tau >= 1")
    if tau > dp_bound:
        raise BoundError(f"tau {tau} exceeds DP bound {dp_bound}")
    span = tau - 1
    acc = np.zeros((span + 1, span + 1))
    acc[0, 0] = 1.0  # edge born at tau_e = 1
    for t in range(2, tau + 1):
        acc = _dp_step(acc, alpha, t)
        acc[0, 0] += 1.0  # edge born at tau_e = t
    return acc / tau


def dp_joint_mixture(params: ModelParams, tau: int,
                     dp_bound: int = DP_BOUND) -> np.ndarray:
    """Literal uniform mixture of dp_specific grids (cross-check for dp_joint)."""
    span = tau - 1
    acc = np.zeros((span + 1, span + 1))
    for tau_e in range(1, tau + 1):
        grid = dp_specific(params, tau_e, tau, dp_bound=dp_bound)
        s = grid.span
        acc[: s + 1, : s + 1] += grid.values
    return acc / tau


def enumerate_histories(params: ModelParams, tau: int,
                        ) -> dict[int, dict[tuple[int, int], Fraction]]:
    """Exact edge-state distributions by enumerating every attachment history.

    Walks all (tau-1)! parent-choice sequences with their exact rational
    probabilities (alpha is converted to the exact rational value of the
    supplied float) and tallies each edge's final (n, q) per birth time.
    Returns {tau_e: {(n, q): probability}}; key 0 holds the uniform mixture
    over birth times.
    """
    if tau < 1:
        raise DomainError("enumerate_histories requires tau >= 1")
    if tau > ENUM_BOUND:
        raise BoundError(f"tau {tau} exceeds enumeration bound {ENUM_BOUND}")
    alpha = Fraction(params.alpha)

    per_edge: dict[int, dict[tuple[int, int], Fraction]] = {
        e: {} for e in range(1, tau + 1)
    }

    # node i attaches at time i; choices exist for i = 2..tau
    choice_ranges = [range(i) for i in range(2, tau + 1)]
    for choices in product(*choice_ranges):
        parents = [0, 0] + list(choices)  # parents[i] for i = 0..tau; [0] unused
        prob = Fraction(1)
        indeg = [0] * (tau + 1)
        indeg[0] = 1
        for i, target in enumerate(choices, start=2):
            # arriving node i sees i existing nodes (0..i-1) and i-1 edges
            if alpha == 0:
                prob *= Fraction(1, i)
            else:
                num = alpha * indeg[target] + 1 - alpha
                den = i - alpha
                prob *= num / den
            if prob == 0:
                break
            indeg[target] += 1
        if prob == 0:
            continue
        # subtree sizes: children always carry larger ids
        size = [1] * (tau + 1)
        for i in range(tau, 0, -1):
            size[parents[i]] += size[i]
        children = [0] * (tau + 1)
        for i in range(1, tau + 1):
            children[parents[i]] += 1
        for e in range(1, tau + 1):
            state = (size[e] - 1, children[e])
            tally = per_edge[e]
            tally[state] = tally.get(state, Fraction(0)) + prob

    mixed: dict[tuple[int, int], Fraction] = {}
    for e in range(1, tau + 1):
        for state, p in per_edge[e].items():
            mixed[state] = mixed.get(state, Fraction(0)) + p / tau
    per_edge[0] = mixed
    return per_edge


def bruteforce_edge_betweenness(parents: np.ndarray) -> np.ndarray:
    """Edge betweenness by literal per-pair path tracing.

    For every unordered node pair, walks both endpoints up to their lowest
    common ancestor and increments a counter on each edge crossed.  No
    subtree-size shortcut anywhere.  Edge i is the edge from node i to
    parents[i]; returns counts for i = 1..N-1.
    """
    n_nodes = len(parents)
    if n_nodes > 2001:
        raise BoundError("bruteforce betweenness is limited to 2000 nodes")
    depth = [0] * n_nodes
    for i in range(1, n_nodes):
        p = int(parents[i])
        if not 0 <= p < i:
            raise DomainError(f"malformed tree: parents[{i}] = {p}")
        depth[i] = depth[p] + 1
    loads = np.zeros(n_nodes, dtype=np.int64)
    par = [int(p) for p in parents]
    for u in range(n_nodes):
        for v in range(u + 1, n_nodes):
            a, b = u, v
            while a != b:
                if depth[a] >= depth[b]:
                    loads[a] += 1
                    a = par[a]
                else:
                    loads[b] += 1
                    b = par[b]
    return loads[1:]
