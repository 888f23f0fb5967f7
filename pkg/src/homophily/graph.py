"""Undirected simple graphs with dyad enumeration and preferential-attachment generation.

Graphs are immutable after construction.  Node ids are dense integers
0..n-1.  Every undirected edge yields two directed dyads (i, j) and (j, i),
which is how all downstream estimators traverse the network.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = ["Graph", "from_edges", "generate_pa_graph", "directed_dyads",
           "save_edge_csv", "load_edge_csv"]


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph in CSR-like form.

    Attributes
    ----------
    n : number of nodes
    edges : (E, 2) int array, src < dst, sorted lexicographically
    degree : (n,) int array
    indptr, neighbors : CSR adjacency; neighbors of i are
        ``neighbors[indptr[i]:indptr[i+1]]``, sorted ascending
    dyads : (2E, 2) int array of directed (ego, alter) pairs sorted by
        ego then alter
    dyad_edge_index : (2E,) undirected edge id for each dyad row
    """

    n: int
    edges: np.ndarray
    degree: np.ndarray
    indptr: np.ndarray
    neighbors: np.ndarray
    dyads: np.ndarray
    dyad_edge_index: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def dyad_ego(self) -> np.ndarray:
        return self.dyads[:, 0]

    @property
    def dyad_alter(self) -> np.ndarray:
        return self.dyads[:, 1]


def from_edges(n: int, edges) -> Graph:
    """Build a Graph from an iterable of undirected node pairs.

    Validates simplicity (no self loops, no duplicate edges) and id range.
    """
    edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
    if edges.size:
        if edges.min() < 0 or edges.max() >= n:
            raise InvalidParameterError("edge endpoint outside [0, n)")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise InvalidParameterError("self loops are not allowed")
    src = np.minimum(edges[:, 0], edges[:, 1])
    dst = np.maximum(edges[:, 0], edges[:, 1])
    order = np.lexsort((dst, src))
    edges = np.column_stack([src[order], dst[order]])
    if edges.shape[0] > 1:
        dup = np.all(edges[1:] == edges[:-1], axis=1)
        if dup.any():
            raise InvalidParameterError("duplicate edges are not allowed")

    degree = np.zeros(n, dtype=np.int64)
    np.add.at(degree, edges[:, 0], 1)
    np.add.at(degree, edges[:, 1], 1)

    ego = np.concatenate([edges[:, 0], edges[:, 1]])
    alter = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(edges.shape[0]), np.arange(edges.shape[0])])
    order = np.lexsort((alter, ego))
    dyads = np.column_stack([ego[order], alter[order]])
    dyad_edge_index = eid[order]

    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degree, out=indptr[1:])
    neighbors = dyads[:, 1].copy()

    return Graph(n=n, edges=edges, degree=degree, indptr=indptr,
                 neighbors=neighbors, dyads=dyads,
                 dyad_edge_index=dyad_edge_index)


def generate_pa_graph(n: int, m: int, k: float,
                      rng: np.random.Generator) -> Graph:
    """Grow a preferential-attachment graph with attachment kernel r^k + 1,
    where r is the number of links a node has received from later arrivals.

    Growth starts from a single node; arrival t attaches to min(m, t)
    distinct existing nodes, chosen without replacement with probability
    proportional to (received links)^k + 1, with attachment weights frozen
    during one arrival's draws.  The unit offset lets nodes that have not
    yet received links attract attachments (citation-model semantics).
    The first m+1 nodes therefore form a complete seed graph, and every
    later node arrives with exactly m distinct edges.

    Parameters
    ----------
    n : total node count, must exceed m
    m : edges added per arriving node, >= 1
    k : attachment exponent, >= 0 (k=0 is uniform attachment)
    """
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    if n <= m:
        raise InvalidParameterError(f"need n > m, got n={n}, m={m}")
    if k < 0:
        raise InvalidParameterError(f"attachment exponent must be >= 0, got {k}")

    received = np.zeros(n, dtype=np.int64)
    # (received links)^k + 1, maintained incrementally
    wk = np.ones(n, dtype=np.float64)

    n_total = m * (n - m - 1) + m * (m + 1) // 2 if n > m else 0
    all_src = np.empty(max(n_total, 0), dtype=np.int64)
    all_dst = np.empty_like(all_src)
    pos = 0

    for t in range(1, n):
        mm = min(m, t)
        cum = np.cumsum(wk[:t])
        total = cum[-1]
        chosen: list[int] = []
        seen = set()
        while len(chosen) < mm:
            draws = rng.random(mm - len(chosen)) * total
            idx = np.searchsorted(cum, draws, side="right")
            for v in idx:
                v = int(v)
                if v not in seen:
                    seen.add(v)
                    chosen.append(v)
        for v in chosen:
            received[v] += 1
            wk[v] = float(received[v]) ** k + 1.0
        all_src[pos:pos + mm] = chosen
        all_dst[pos:pos + mm] = t
        pos += mm

    return from_edges(n, np.column_stack([all_src[:pos], all_dst[:pos]]))


def directed_dyads(g: Graph) -> np.ndarray:
    """Return the (2E, 2) directed dyad array, sorted by ego then alter."""
    return g.dyads


def save_edge_csv(g: Graph, path) -> None:
    """Write the edge list as CSV with header src,dst (src < dst)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("src,dst\n")
        for s, d in g.edges:
            fh.write(f"{s},{d}\n")


def load_edge_csv(path, n: int | None = None) -> Graph:
    """Read an edge-list CSV (header src,dst) with integer node ids."""
    edges = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 0
    return from_edges(n, edges)
