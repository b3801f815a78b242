"""Asynchronous iteration graph and its induced Markov chain.

For a map f on B^n the graph has an arc x -> F_f(i, x) for every component
index i, so every vertex has out-degree n counting multiplicity.  Picking the
updated component uniformly turns the graph into a Markov chain whose matrix
entries are integer multiples of 1/n; counts are kept as exact integers so
stochasticity checks carry no floating-point tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .boolnet import bits_from_deci, deci, iterate

__all__ = [
    "IterationGraph",
    "MarkovMatrix",
    "build_iteration_graph",
    "markov_matrix",
    "is_strongly_connected",
    "is_doubly_stochastic",
    "chain_period",
    "regularity_exponent",
    "convergence_q",
    "point_mass",
    "uniform_distribution",
    "empirical_uniformity",
    "graph_to_dot",
    "matrix_to_csv",
]

MAX_GRAPH_SIZE = 16
_MAX_DENSE_SIZE = 12  # dense 2^n x 2^n work stays below ~16M entries


@dataclass(frozen=True)
class IterationGraph:
    """Successor table of the asynchronous iteration graph.

    ``succ[s, k-1]`` is the deci index of F_f(k, x_s); rows therefore list
    the arc multiset leaving each vertex.
    """

    n: int
    succ: np.ndarray

    @property
    def states(self):
        return 1 << self.n


class MarkovMatrix:
    """Transition counts of the induced chain, denominator n.

    ``counts[x, y]`` is the number of component indices k with
    F_f(k, x) = y; probabilities are counts / n.
    """

    def __init__(self, n, counts):
        self.n = n
        self.counts = counts.tocsr()

    @property
    def states(self):
        return 1 << self.n

    def row_sums(self):
        return np.asarray(self.counts.sum(axis=1)).ravel()

    def column_sums(self):
        return np.asarray(self.counts.sum(axis=0)).ravel()

    def probabilities(self, dense=None):
        probs = self.counts.astype(np.float64) / self.n
        if dense is None:
            dense = self.n <= _MAX_DENSE_SIZE
        return probs.toarray() if dense else probs


def build_iteration_graph(f):
    """Enumerate F_f over all states and component indices."""
    if f.n > MAX_GRAPH_SIZE:
        raise ValueError(f"iteration graph limited to n <= {MAX_GRAPH_SIZE}")
    states = 1 << f.n
    succ = np.empty((states, f.n), dtype=np.int64)
    for s in range(states):
        bits = bits_from_deci(s, f.n)
        for k in range(1, f.n + 1):
            new = f.component(k, bits)
            if new == bits[k - 1]:
                succ[s, k - 1] = s
            else:
                succ[s, k - 1] = s ^ (1 << (f.n - k))
    return IterationGraph(n=f.n, succ=succ)


def markov_matrix(f):
    """Exact transition counts from the iteration graph."""
    graph = build_iteration_graph(f)
    states = graph.states
    rows = np.repeat(np.arange(states, dtype=np.int64), f.n)
    cols = graph.succ.ravel()
    data = np.ones(states * f.n, dtype=np.int64)
    counts = sp.coo_matrix((data, (rows, cols)), shape=(states, states))
    return MarkovMatrix(n=f.n, counts=counts)


def _adjacency(graph):
    states = graph.states
    rows = np.repeat(np.arange(states, dtype=np.int64), graph.n)
    cols = graph.succ.ravel()
    data = np.ones(states * graph.n, dtype=np.int8)
    return sp.coo_matrix((data, (rows, cols)), shape=(states, states)).tocsr()


def is_strongly_connected(graph):
    """True iff the whole graph is a single strongly connected component."""
    ncomp, _ = connected_components(_adjacency(graph), directed=True, connection="strong")
    return ncomp == 1


def is_doubly_stochastic(matrix, tol=0.0):
    """Column sums must equal n; rows are n by construction.

    With integer counts the check is exact for tol = 0; a nonzero tol
    compares normalized column sums within |c/n - 1| <= tol.
    """
    cols = matrix.column_sums()
    if tol == 0.0:
        return bool(np.all(cols == matrix.n))
    return bool(np.all(np.abs(cols / matrix.n - 1.0) <= tol))


def chain_period(graph):
    """Period of a strongly connected graph: gcd of BFS level mismatches."""
    states = graph.states
    level = np.full(states, -1, dtype=np.int64)
    level[0] = 0
    frontier = [0]
    order = []
    while frontier:
        nxt = []
        for u in frontier:
            order.append(u)
            for v in graph.succ[u]:
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    if np.any(level < 0):
        raise ValueError("period is only defined for strongly connected graphs")
    g = 0
    for u in order:
        for v in graph.succ[u]:
            g = math.gcd(g, int(level[u]) + 1 - int(level[v]))
    return g if g > 0 else 1


def regularity_exponent(matrix, cap=None):
    """Smallest k with all entries of M^k positive, None if the chain is not
    regular (not strongly connected, or periodic) or k exceeds the cap.

    Periodic chains never become all-positive, so they are filtered first
    instead of burning matrix powers up to the cap.
    """
    if matrix.n > _MAX_DENSE_SIZE:
        raise ValueError(f"regularity check limited to n <= {_MAX_DENSE_SIZE}")
    states = matrix.states
    adj = (matrix.counts > 0).tocsr()
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    if ncomp != 1:
        return None
    succ_lists = np.split(adj.indices, adj.indptr[1:-1])
    if _period_from_lists(states, succ_lists) != 1:
        return None
    if cap is None:
        cap = min(4 ** matrix.n, (states - 1) ** 2 + 2)
    base = adj.toarray().astype(np.float32)
    reach = base.copy()
    power = 1
    while power <= cap:
        if np.all(reach > 0):
            return power
        reach = ((reach @ base) > 0).astype(np.float32)
        power += 1
    return None


def _period_from_lists(states, succ_lists):
    level = np.full(states, -1, dtype=np.int64)
    level[0] = 0
    frontier = [0]
    order = []
    while frontier:
        nxt = []
        for u in frontier:
            order.append(u)
            for v in succ_lists[u]:
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    g = 0
    for u in order:
        for v in succ_lists[u]:
            g = math.gcd(g, int(level[u]) + 1 - int(level[v]))
    return g if g > 0 else 1


def point_mass(n, state):
    pi = np.zeros(1 << n, dtype=np.float64)
    pi[state] = 1.0
    return pi


def uniform_distribution(n):
    states = 1 << n
    return np.full(states, 1.0 / states, dtype=np.float64)


def convergence_q(matrix, pi0, eps, cap=10000):
    """Power-iterate pi M and report the first step within eps of uniform.

    Distances use the max norm.  Returns (q, gap) for the smallest q >= 1
    with gap < eps, or None if the cap is hit first.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    pi0 = np.asarray(pi0, dtype=np.float64)
    if pi0.shape != (matrix.states,):
        raise ValueError("distribution length must be 2^n")
    if abs(pi0.sum() - 1.0) > 1e-9 or np.any(pi0 < 0):
        raise ValueError("pi0 must be a probability vector")
    probs = matrix.probabilities(dense=matrix.n <= _MAX_DENSE_SIZE)
    target = 1.0 / matrix.states
    pi = pi0
    for q in range(1, cap + 1):
        pi = pi @ probs
        gap = float(np.max(np.abs(pi - target)))
        if gap < eps:
            return q, gap
    return None


def empirical_uniformity(f, strategy_source, q, trials, seed):
    """Histogram of end states over random starts and fresh strategies.

    Draws ``trials`` initial configurations uniformly, runs ``q`` iteration
    steps each with a strategy freshly produced by ``strategy_source`` and
    returns the end-state histogram plus the Pearson chi-square statistic
    against the uniform distribution (2^n - 1 degrees of freedom).
    """
    if f.n > 12:
        raise ValueError("empirical uniformity limited to n <= 12")
    if trials < 100 * (1 << f.n):
        raise ValueError(f"need at least {100 * (1 << f.n)} trials for n={f.n}")
    rng = np.random.default_rng(seed)
    hist = np.zeros(1 << f.n, dtype=np.int64)
    for _ in range(trials):
        x0 = tuple(int(b) for b in rng.integers(0, 2, size=f.n))
        terms = strategy_source(rng, x0)
        end = iterate(f, terms, x0, q)
        hist[deci(end)] += 1
    expected = trials / hist.size
    chi2 = float(((hist - expected) ** 2 / expected).sum())
    return hist, chi2


def graph_to_dot(graph):
    """DOT digraph with vertices labelled by their bit strings."""
    lines = ["digraph iteration_graph {"]
    width = graph.n
    for s in range(graph.states):
        src = format(s, f"0{width}b")
        for v in graph.succ[s]:
            dst = format(int(v), f"0{width}b")
            lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix):
    """Row-major CSV of transition probabilities, states indexed by deci."""
    probs = matrix.counts.toarray() / matrix.n
    states = matrix.states
    header = "state," + ",".join(str(j) for j in range(states))
    lines = [header]
    for i in range(states):
        row = ",".join(f"{probs[i, j]:.12g}" for j in range(states))
        lines.append(f"{i},{row}")
    return "\n".join(lines) + "\n"
