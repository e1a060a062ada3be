"""Graph primitives for flow networks: incidence matrices, actuation
selectors, communication Laplacians and zero-forcing computations.

Node indices run from 0 to n-1.  Edge orientation is user-supplied and
fixed; a positive flow on edge k runs from its tail to its head.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NetworkTopology",
    "CommGraph",
    "incidence_matrix",
    "is_connected",
    "input_indicator",
    "comm_laplacian",
    "zf_closure",
    "zf_closure_rescan",
    "is_zero_forcing",
    "minimal_zero_forcing_sets",
    "numerical_rank",
]

# Relative singular-value cutoff shared by every rank decision in the package.
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class NetworkTopology:
    """Physical network: n storage nodes, m oriented edges, actuated subset.

    Optional compartmental structure: `compartmental_edges` is a second
    edge set (its graph need not be connected) carrying state-dependent
    inter-node flows, and `state_dependent_io` lists the nodes with a
    state-dependent in/outflow.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    actuated: tuple[int, ...]
    compartmental_edges: tuple[tuple[int, int], ...] = ()
    state_dependent_io: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        object.__setattr__(self, "actuated", tuple(sorted(int(v) for v in set(self.actuated))))
        object.__setattr__(
            self, "compartmental_edges", tuple((int(a), int(b)) for a, b in self.compartmental_edges)
        )
        object.__setattr__(self, "state_dependent_io", tuple(sorted(int(v) for v in set(self.state_dependent_io))))
        if self.n < 1:
            raise ValueError("need at least one node")
        for tail, head in self.edges + self.compartmental_edges:
            if not (0 <= tail < self.n and 0 <= head < self.n):
                raise ValueError(f"edge ({tail},{head}) has an endpoint outside [0,{self.n})")
            if tail == head:
                raise ValueError(f"self-loop ({tail},{head}) not allowed")
        for v in self.actuated + self.state_dependent_io:
            if not 0 <= v < self.n:
                raise ValueError(f"node index {v} outside [0,{self.n})")
        if len(self.actuated) < 1:
            raise ValueError("at least one node must have a controllable external input")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def p(self) -> int:
        return len(self.actuated)

    @property
    def n_compartmental_edges(self) -> int:
        return len(self.compartmental_edges)

    def neighbors(self) -> list[set[int]]:
        """Undirected adjacency over the physical edge set."""
        adj = [set() for _ in range(self.n)]
        for tail, head in self.edges:
            adj[tail].add(head)
            adj[head].add(tail)
        return adj


@dataclass(frozen=True)
class CommGraph:
    """Weighted digraph over the p actuated nodes (local indices 0..p-1).

    Arcs are (tail, head, weight) with weight > 0.  Self-loops and
    repeated arcs are rejected.  Balance and strong connectivity are
    checked by `comm_laplacian`, which is the only consumer that needs
    them; `validate()` exposes the check directly.
    """

    p: int
    arcs: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple((int(a), int(b), float(w)) for a, b, w in self.arcs))
        if self.p < 1:
            raise ValueError("communication graph needs at least one node")
        seen = set()
        for tail, head, w in self.arcs:
            if not (0 <= tail < self.p and 0 <= head < self.p):
                raise ValueError(f"arc ({tail},{head}) outside [0,{self.p})")
            if tail == head:
                raise ValueError("self-loops are not allowed in the communication graph")
            if (tail, head) in seen:
                raise ValueError(f"repeated arc ({tail},{head}) in the communication graph")
            seen.add((tail, head))
            if not w > 0:
                raise ValueError(f"arc ({tail},{head}) must have a positive weight, got {w}")

    @classmethod
    def undirected(cls, p: int, edges) -> "CommGraph":
        """Build from undirected weighted edges [(i, j, w), ...]."""
        arcs = []
        for i, j, w in edges:
            arcs.append((i, j, w))
            arcs.append((j, i, w))
        return cls(p, tuple(arcs))

    def out_strength(self) -> np.ndarray:
        s = np.zeros(self.p)
        for tail, _, w in self.arcs:
            s[tail] += w
        return s

    def in_strength(self) -> np.ndarray:
        s = np.zeros(self.p)
        for _, head, w in self.arcs:
            s[head] += w
        return s

    def is_balanced(self, rtol: float = 1e-12) -> bool:
        si, so = self.in_strength(), self.out_strength()
        scale = max(1.0, float(np.max(so, initial=0.0)))
        return bool(np.all(np.abs(si - so) <= rtol * scale))

    def is_strongly_connected(self) -> bool:
        if self.p == 1:
            return True
        fwd = [set() for _ in range(self.p)]
        bwd = [set() for _ in range(self.p)]
        for tail, head, _ in self.arcs:
            fwd[tail].add(head)
            bwd[head].add(tail)

        def reaches_all(adj):
            seen = {0}
            stack = [0]
            while stack:
                for nb in adj[stack.pop()]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            return len(seen) == self.p

        return reaches_all(fwd) and reaches_all(bwd)

    def validate(self) -> None:
        if not self.is_balanced():
            raise ValueError("communication graph is not balanced")
        if not self.is_strongly_connected():
            raise ValueError("communication graph is not strongly connected")


def incidence_matrix(topo: NetworkTopology, compartmental: bool = False) -> np.ndarray:
    """Dense n-by-m incidence matrix: +1 at an edge's tail, -1 at its head."""
    edges = topo.compartmental_edges if compartmental else topo.edges
    B = np.zeros((topo.n, len(edges)))
    for k, (tail, head) in enumerate(edges):
        B[tail, k] = 1.0
        B[head, k] = -1.0
    return B


def input_indicator(topo: NetworkTopology, state_dependent: bool = False) -> np.ndarray:
    """Dense n-by-p selector: column j is the unit vector of the j-th
    actuated node (nodes in ascending order)."""
    nodes = topo.state_dependent_io if state_dependent else topo.actuated
    E = np.zeros((topo.n, len(nodes)))
    for j, v in enumerate(nodes):
        E[v, j] = 1.0
    return E


def is_connected(topo: NetworkTopology) -> bool:
    """True iff the undirected physical graph is connected."""
    adj = topo.neighbors()
    seen = {0}
    stack = [0]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == topo.n


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Rank via SVD with a relative singular-value threshold."""
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def comm_laplacian(cg: CommGraph) -> np.ndarray:
    """Weighted out-degree Laplacian of the communication digraph.

    Rejects graphs that are not balanced or not strongly connected:
    those properties make the Laplacian's symmetric part positive
    semi-definite with kernel spanned by the all-ones vector, which the
    marginal-cost consensus relies on.
    """
    cg.validate()
    L = np.zeros((cg.p, cg.p))
    for tail, head, w in cg.arcs:
        L[tail, tail] += w
        L[tail, head] -= w
    return L


def _closure_worklist(adj: list[set[int]], black: np.ndarray) -> np.ndarray:
    """Fixpoint of the color-change rule via white-neighbor counting."""
    n = len(adj)
    white_count = np.array([sum(not black[u] for u in adj[v]) for v in range(n)])
    stack = [v for v in range(n) if black[v]]
    while stack:
        v = stack.pop()
        if not black[v] or white_count[v] != 1:
            continue
        # v forces its unique white neighbor
        w = next(u for u in adj[v] if not black[u])
        black[w] = True
        stack.append(w)
        for u in adj[w]:
            white_count[u] -= 1
            if black[u] and white_count[u] == 1:
                stack.append(u)
        if white_count[w] == 1:
            stack.append(w)
    return black


def zf_closure(topo: NetworkTopology, initial_black) -> frozenset[int]:
    """Closure of `initial_black` under the rule: a black node with
    exactly one white neighbor forces that neighbor to black.

    The fixpoint does not depend on the order in which the rule is
    applied, so a worklist sweep is sound.
    """
    black = np.zeros(topo.n, dtype=bool)
    for v in initial_black:
        if not 0 <= v < topo.n:
            raise ValueError(f"node {v} outside [0,{topo.n})")
        black[v] = True
    black = _closure_worklist(topo.neighbors(), black)
    return frozenset(np.flatnonzero(black).tolist())


def zf_closure_rescan(topo: NetworkTopology, initial_black, rng=None) -> frozenset[int]:
    """Definition-level closure: repeatedly rescan all nodes and apply the
    color-change rule one forcing at a time until no rule applies.

    With `rng` the scan order is shuffled on every pass; used to check
    that the closure is independent of rule-application order.
    """
    adj = topo.neighbors()
    black = set(int(v) for v in initial_black)
    for v in black:
        if not 0 <= v < topo.n:
            raise ValueError(f"node {v} outside [0,{topo.n})")
    changed = True
    while changed:
        changed = False
        order = list(range(topo.n))
        if rng is not None:
            rng.shuffle(order)
        for v in order:
            if v not in black:
                continue
            whites = [u for u in adj[v] if u not in black]
            if len(whites) == 1:
                black.add(whites[0])
                changed = True
                break
    return frozenset(black)


def is_zero_forcing(topo: NetworkTopology, candidate) -> bool:
    """True iff the closure of `candidate` colors every node."""
    return len(zf_closure(topo, candidate)) == topo.n


def minimal_zero_forcing_sets(topo: NetworkTopology, max_n: int = 12) -> list[frozenset[int]]:
    """All inclusion-minimal zero forcing sets, smallest cardinality first.

    Exhaustive subset search, so refuses n > max_n.  Monotonicity of the
    closure makes "no (s-1)-subset is zero forcing" equivalent to
    inclusion-minimality.
    """
    if topo.n > max_n:
        raise ValueError(f"exhaustive search refused for n={topo.n} > max_n={max_n}")
    found: list[frozenset[int]] = []
    for size in range(1, topo.n + 1):
        for combo in itertools.combinations(range(topo.n), size):
            cand = frozenset(combo)
            if any(prev <= cand for prev in found):
                continue
            if is_zero_forcing(topo, cand):
                found.append(cand)
    return found
