"""Monte Carlo growth of evolving random trees.

A tree of ``size`` edges is grown by sequential node arrivals; node i picks
its target among the existing nodes with probability proportional to
a + (in-degree), where a = 1/alpha - 1.  The sampler uses the two-urn
decomposition: with probability a*i / (a*i + i - 1) a uniformly random
existing node is chosen, otherwise the target of a uniformly random
existing edge (which weights each node by its in-degree).

The whole growth run is resolved without a sequential Python loop: urn
decisions and raw uniforms are drawn up front from a counter-based
generator, and the edge-urn indirection (``target of a random older
edge``) is collapsed by pointer jumping, which is exact because an edge's
target was itself decided by an older draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .params import ModelParams
from .specialfn import DomainError

__all__ = ["RngSpec", "Tree", "grow", "sample_target", "derive_stream_key"]

_GOLDEN64 = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    """One round of the SplitMix64 mixing function."""
    z = (z + _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_stream_key(master_seed: int, stream_id: int) -> int:
    """Fixed, platform-independent map (master_seed, stream_id) -> Philox key.

    Two SplitMix64 rounds over the seed offset by the golden-ratio multiple
    of the stream id; distinct stream ids give statistically independent
    counter-based streams.
    """
    z = (master_seed + stream_id * _GOLDEN64) & _MASK64
    return _splitmix64(_splitmix64(z))


@dataclass(frozen=True)
class RngSpec:
    """Master seed plus realization index, naming one deterministic stream."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> Generator:
        return Generator(Philox(key=derive_stream_key(self.master_seed,
                                                      self.stream_id)))


@dataclass
class Tree:
    """Rooted tree in birth order: node i (>= 1) attaches to parents[i] < i.

    ``parents[0]`` is -1 for the root.  Node i arrived at time step i, so a
    tree of N nodes has tau = N - 1 edges.
    """

    parents: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.parents)

    @property
    def n_edges(self) -> int:
        return len(self.parents) - 1

    def validate(self) -> None:
        par = self.parents
        if par[0] != -1:
            raise DomainError("root marker parents[0] must be -1")
        idx = np.arange(len(par))
        if (par[1:] < 0).any() or (par[1:] >= idx[1:]).any():
            raise DomainError("edge targets must be strictly older nodes")


def grow(params: ModelParams, size: int, rng: RngSpec) -> Tree:
    """Grow a tree with ``size`` edges (size + 1 nodes).

    The first arrival always attaches to the root (the network's total
    attractiveness is degenerate before any edge exists); afterwards the
    two-urn scheme applies.  alpha = 0 always uses the uniform-node urn and
    alpha = 1 always the edge urn, which produces the star.
    """
    if size < 1:
        raise DomainError("size must be >= 1")
    alpha = params.alpha
    gen = rng.generator()
    decide = gen.random(size + 1)
    pick = gen.random(size + 1)

    i = np.arange(size + 1, dtype=np.float64)
    if alpha == 0.0:
        node_urn = np.ones(size + 1, dtype=bool)
    elif alpha == 1.0:
        node_urn = np.zeros(size + 1, dtype=bool)
        node_urn[1] = True
    else:
        a = params.attractiveness
        with np.errstate(invalid="ignore", divide="ignore"):
            p_node = a * i / (a * i + (i - 1.0))
        node_urn = decide < p_node
        node_urn[1] = True

    # Node-urn choice: uniform over nodes 0..i-1.  Edge-urn choice: uniform
    # over edges 1..i-1; the chosen value is that edge's own target, i.e. a
    # pointer to an older decision.
    uniform_node = np.minimum((pick * i).astype(np.int64),
                              np.arange(size + 1) - 1)
    edge_choice = 1 + np.minimum((pick * (i - 1.0)).astype(np.int64),
                                 np.maximum(np.arange(size + 1) - 2, 0))

    ptr = np.where(node_urn, np.arange(size + 1), edge_choice)
    ptr[0] = 0
    while True:
        nxt = ptr[ptr]
        if np.array_equal(nxt, ptr):
            break
        ptr = nxt

    parents = uniform_node[ptr]
    parents[0] = -1
    return Tree(parents=parents)


def sample_target(parents: np.ndarray, alpha: float, gen: Generator,
                  size: int | None = None):
    """Sample attachment targets for the next arrival of an existing tree.

    ``parents`` is a Tree.parents array (root marker -1).  Returns a single
    node id, or an array of ``size`` independent choices for statistical
    tests.  Exposed separately so the urn weights can be unit-tested
    against exact attachment probabilities.
    """
    parents = np.asarray(parents)
    n_nodes = len(parents)
    n_edges = n_nodes - 1
    scalar = size is None
    m = 1 if scalar else size
    if n_edges == 0:
        out = np.zeros(m, dtype=np.int64)
    elif alpha == 0.0:
        out = (gen.random(m) * n_nodes).astype(np.int64)
    else:
        a = 1.0 / alpha - 1.0
        total = a * n_nodes + n_edges
        use_node = gen.random(m) * total < a * n_nodes if alpha < 1.0 else \
            np.zeros(m, dtype=bool)
        pick = gen.random(m)
        node_pick = (pick * n_nodes).astype(np.int64)
        edge_pick = 1 + (pick * n_edges).astype(np.int64)
        out = np.where(use_node, node_pick, parents[np.minimum(edge_pick,
                                                               n_edges)])
    return int(out[0]) if scalar else out


def parents_to_csv(tree: Tree) -> str:
    """Serialize as the parents-array CSV (header node,parent)."""
    lines = ["node,parent"]
    lines.extend(f"{i},{int(p)}" for i, p in enumerate(tree.parents[1:], 1))
    return "\n".join(lines) + "\n"
