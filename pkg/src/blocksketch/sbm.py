"""Two-community stochastic block model: types, sampling, and graph plumbing.

Labels use +1 / -1 for the two communities and 0 for "unassigned"; a label
vector is complete when it contains no zeros. Partitions are compared up to
a global sign flip. Probabilities use the natural log parametrization
p = alpha * log(n) / n, q = beta * log(n) / n in balanced mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix

from .errors import EmptyGraphError, GraphFormatError, ParameterError
from .rng import RngSeed, STREAM_SBM, STREAM_SUBSAMPLE, rng_for

UNASSIGNED = 0

# Above this many candidate pairs, generation switches from dense pair
# enumeration to exact per-block sampling (same law, bounded memory).
_DENSE_PAIR_LIMIT = 1 << 22


@dataclass(frozen=True)
class SbmParams:
    """Parameters of G(n1, n2; p, q); p is the within-, q the cross-rate."""

    n1: int
    n2: int
    p: float
    q: float
    alpha: Optional[float] = None
    beta: Optional[float] = None
    balanced: bool = False

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ParameterError(f"both communities need a node, got sizes {self.n1}, {self.n2}")
        if not (0.0 <= self.q <= 1.0 and 0.0 <= self.p <= 1.0):
            raise ParameterError(f"probabilities outside [0, 1]: p={self.p}, q={self.q}")
        if self.p < self.q:
            raise ParameterError(f"need p >= q, got p={self.p} < q={self.q}")
        if self.balanced and self.n1 != self.n2:
            raise ParameterError("balanced mode needs equal community sizes")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @classmethod
    def from_rates(cls, n: int, alpha: float, beta: float) -> "SbmParams":
        """Balanced model with p = alpha*log(n)/n, q = beta*log(n)/n."""
        if n < 2 or n % 2:
            raise ParameterError(f"balanced mode needs even n >= 2, got {n}")
        if not (alpha > beta >= 0.0):
            raise ParameterError(f"need alpha > beta >= 0, got alpha={alpha}, beta={beta}")
        scale = math.log(n) / n
        return cls(n1=n // 2, n2=n // 2, p=alpha * scale, q=beta * scale,
                   alpha=alpha, beta=beta, balanced=True)

    @classmethod
    def explicit(cls, n1: int, n2: int, p: float, q: float) -> "SbmParams":
        return cls(n1=n1, n2=n2, p=p, q=q)


@dataclass(eq=False)
class Graph:
    """Simple undirected graph on nodes 0..n-1 with an optional planted truth.

    `edges` is an (m, 2) int64 array with u < v per row, sorted
    lexicographically; `truth` is a complete +-1 vector when present.
    """

    n: int
    edges: np.ndarray
    truth: Optional[np.ndarray] = None

    @classmethod
    def from_edges(cls, n: int, edges, truth=None) -> "Graph":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            u = np.minimum(e[:, 0], e[:, 1])
            v = np.maximum(e[:, 0], e[:, 1])
            if (u < 0).any() or (v >= n).any():
                raise ParameterError("edge endpoint out of range")
            if (u == v).any():
                raise ParameterError("self-loops are not allowed")
            order = np.lexsort((v, u))
            e = np.column_stack([u, v])[order]
            dup = (np.diff(e[:, 0]) == 0) & (np.diff(e[:, 1]) == 0)
            if dup.any():
                raise ParameterError("duplicate edges are not allowed")
        t = None
        if truth is not None:
            t = np.asarray(truth, dtype=np.int8)
            if t.shape != (n,) or not np.isin(t, (-1, 1)).all():
                raise ParameterError("truth must be a complete +-1 vector of length n")
        return cls(n=n, edges=e, truth=t)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def adjacency(self) -> csr_matrix:
        """Symmetric float64 CSR adjacency (counts stay exact in float64)."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * self.m)
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        a = csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        a.sort_indices()
        return a

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(map(tuple, self.edges.tolist()))

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbor indices of v in ascending order."""
        a = self.adjacency
        return a.indices[a.indptr[v]:a.indptr[v + 1]].astype(np.int64)

    def degree(self, v: int) -> int:
        a = self.adjacency
        return int(a.indptr[v + 1] - a.indptr[v])


@dataclass(eq=False)
class SampleMask:
    """Result of independent node subsampling: sorted kept indices."""

    kept: np.ndarray
    gamma: float
    seed: RngSeed

    @property
    def size(self) -> int:
        return int(self.kept.size)


def _uniform_distinct(rng: np.random.Generator, n_total: int, m: int) -> np.ndarray:
    """Uniformly random m-subset of range(n_total), sorted."""
    if m < 0 or m > n_total:
        raise ParameterError("subset size out of range")
    if m == 0:
        return np.empty(0, dtype=np.int64)
    if m == n_total:
        return np.arange(n_total, dtype=np.int64)
    if m > n_total // 2:
        # dense case: pick the complement instead
        excl = _uniform_distinct(rng, n_total, n_total - m)
        keep = np.ones(n_total, dtype=bool)
        keep[excl] = False
        return np.flatnonzero(keep).astype(np.int64)
    picked = np.empty(0, dtype=np.int64)
    need = m
    while picked.size < m:
        batch = rng.integers(0, n_total, size=need + need // 8 + 16, dtype=np.int64)
        picked = np.unique(np.concatenate([picked, batch]))
        need = m - min(picked.size, m)
    if picked.size > m:
        # distinct draws are exchangeable, so a uniform m-subset of them is
        # a uniform m-subset of the range
        picked = np.sort(rng.choice(picked, size=m, replace=False))
    return picked


def _decode_triangle(codes: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major enumeration of pairs (i, j), i < j < k."""
    c = codes.astype(np.int64)

    def row_start(i):
        return i * (k - 1) - i * (i - 1) // 2

    disc = (2.0 * k - 1) ** 2 - 8.0 * c
    i = np.floor(((2 * k - 1) - np.sqrt(disc)) / 2).astype(np.int64)
    i = np.clip(i, 0, k - 2)
    for _ in range(3):  # float sqrt can be off by one near row boundaries
        too_high = row_start(i) > c
        if too_high.any():
            i[too_high] -= 1
        too_low = row_start(i + 1) <= c
        if too_low.any():
            i[too_low] += 1
        if not too_high.any() and not too_low.any():
            break
    j = c - row_start(i) + i + 1
    return i, j


def _sample_block_within(rng, nodes: np.ndarray, prob: float) -> np.ndarray:
    k = nodes.size
    n_pairs = k * (k - 1) // 2
    if n_pairs == 0 or prob == 0.0:
        return np.empty((0, 2), dtype=np.int64)
    m = int(rng.binomial(n_pairs, prob))
    codes = _uniform_distinct(rng, n_pairs, m)
    i, j = _decode_triangle(codes, k)
    return np.column_stack([nodes[i], nodes[j]])


def _sample_block_cross(rng, a: np.ndarray, b: np.ndarray, prob: float) -> np.ndarray:
    n_pairs = a.size * b.size
    if n_pairs == 0 or prob == 0.0:
        return np.empty((0, 2), dtype=np.int64)
    m = int(rng.binomial(n_pairs, prob))
    codes = _uniform_distinct(rng, n_pairs, m)
    ua = a[codes // b.size]
    ub = b[codes % b.size]
    return np.column_stack([np.minimum(ua, ub), np.maximum(ua, ub)])


def sample_sbm(params: SbmParams, seed: RngSeed) -> Graph:
    """Draw a graph from the block model with a uniformly random partition.

    The community of size n1 is the first n1 entries of a random permutation
    and gets label +1. Each within-community pair receives an edge with
    probability p, each cross pair with probability q, independently.
    """
    rng = rng_for(seed, STREAM_SBM)
    n = params.n
    perm = rng.permutation(n)
    truth = np.full(n, -1, dtype=np.int8)
    truth[perm[:params.n1]] = 1

    total_pairs = n * (n - 1) // 2
    if total_pairs <= _DENSE_PAIR_LIMIT:
        iu, ju = np.triu_indices(n, k=1)
        prob = np.where(truth[iu] == truth[ju], params.p, params.q)
        keep = rng.random(iu.size) < prob
        edges = np.column_stack([iu[keep], ju[keep]]).astype(np.int64)
    else:
        s1 = np.sort(perm[:params.n1]).astype(np.int64)
        s2 = np.sort(perm[params.n1:]).astype(np.int64)
        blocks = [
            _sample_block_within(rng, s1, params.p),
            _sample_block_within(rng, s2, params.p),
            _sample_block_cross(rng, s1, s2, params.q),
        ]
        edges = np.concatenate(blocks, axis=0)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]
    return Graph(n=n, edges=edges, truth=truth)


def subsample_nodes(n: int, gamma: float, seed: RngSeed) -> SampleMask:
    """Keep each of the n nodes independently with probability gamma."""
    if not (0.0 <= gamma <= 1.0):
        raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
    if n < 0:
        raise ParameterError("n must be nonnegative")
    rng = rng_for(seed, STREAM_SUBSAMPLE)
    kept = np.flatnonzero(rng.random(n) < gamma).astype(np.int64)
    return SampleMask(kept=kept, gamma=gamma, seed=seed)


def induced_subgraph(g: Graph, mask: Union[SampleMask, np.ndarray, Sequence[int]]):
    """Subgraph on the kept nodes with contiguous relabeling.

    Returns (subgraph, index_map) where index_map[i] is the original index
    of subgraph node i; truth labels are restricted when present.
    """
    kept = mask.kept if isinstance(mask, SampleMask) else np.asarray(mask, dtype=np.int64)
    kept = np.unique(kept)
    if kept.size and (kept[0] < 0 or kept[-1] >= g.n):
        raise ParameterError("kept index out of range")
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[kept] = np.arange(kept.size)
    if g.m:
        inside = (pos[g.edges[:, 0]] >= 0) & (pos[g.edges[:, 1]] >= 0)
        sub_edges = pos[g.edges[inside]]
    else:
        sub_edges = np.empty((0, 2), dtype=np.int64)
    sub_truth = g.truth[kept] if g.truth is not None else None
    sub = Graph(n=int(kept.size), edges=sub_edges, truth=sub_truth)
    return sub, kept.copy()


def is_complete(labels: np.ndarray) -> bool:
    return bool(np.isin(np.asarray(labels), (-1, 1)).all())


def partitions_equal(a: np.ndarray, b: np.ndarray) -> bool:
    """True when the complete label vectors agree up to a global sign flip.

    Any unassigned entry on either side makes the answer False.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ParameterError("label vectors differ in length")
    if not (is_complete(a) and is_complete(b)):
        return False
    return bool(np.array_equal(a, b) or np.array_equal(a, -b))


def edge_count_between(g: Graph, v: int, nodes) -> int:
    """Number of edges between node v and the given node set."""
    if not (0 <= v < g.n):
        raise ParameterError(f"node {v} out of range")
    sel = np.zeros(g.n, dtype=bool)
    idx = np.asarray(nodes, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise ParameterError("node set index out of range")
    sel[idx] = True
    return int(sel[g.neighbors(v)].sum())


def write_graph(g: Graph, path) -> None:
    """Write the text format: 'n m', one 'u v' line per edge, optional labels."""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{int(u)} {int(v)}" for u, v in g.edges)
    if g.truth is not None:
        lines.append("labels " + " ".join(str(int(t)) for t in g.truth))
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path) -> Graph:
    """Parse the text format, rejecting malformed or duplicate entries."""
    raw = Path(path).read_text().splitlines()
    lines = [ln.strip() for ln in raw if ln.strip()]
    if not lines:
        raise GraphFormatError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphFormatError("header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise GraphFormatError("header must be two integers") from exc
    if n < 0 or m < 0:
        raise GraphFormatError("negative counts in header")
    if len(lines) < 1 + m:
        raise GraphFormatError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = np.empty((m, 2), dtype=np.int64)
    for i, ln in enumerate(lines[1:1 + m]):
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"edge line {i + 2}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphFormatError(f"edge line {i + 2}: not integers") from exc
        if u == v:
            raise GraphFormatError(f"edge line {i + 2}: self-loop {u}")
        if not (u < v):
            raise GraphFormatError(f"edge line {i + 2}: endpoints must satisfy u < v")
        if u < 0 or v >= n:
            raise GraphFormatError(f"edge line {i + 2}: endpoint out of range")
        edges[i] = (u, v)
    if m:
        canon = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
        dup = (np.diff(canon[:, 0]) == 0) & (np.diff(canon[:, 1]) == 0)
        if dup.any():
            raise GraphFormatError("duplicate edge")
        edges = canon
    truth = None
    rest = lines[1 + m:]
    if rest:
        tokens = rest[0].split()
        if tokens[0] != "labels" or len(rest) > 1:
            raise GraphFormatError("unexpected trailing content")
        if len(tokens) != n + 1:
            raise GraphFormatError(f"labels line must carry {n} values")
        vals = []
        for t in tokens[1:]:
            if t not in ("1", "+1", "-1"):
                raise GraphFormatError(f"bad label token {t!r}")
            vals.append(1 if t in ("1", "+1") else -1)
        truth = np.asarray(vals, dtype=np.int8)
    return Graph(n=n, edges=edges, truth=truth)


def require_nonempty(g: Graph) -> None:
    if g.n == 0:
        raise EmptyGraphError("operation needs at least one node")
