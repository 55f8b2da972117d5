"""Exact s-t min-cut on pixel graphs via Dinic's algorithm.

The solver is written here (JIT-compiled with numba) rather than delegated to
a library because the contract demands exact optimality on float64
capacities and bit-reproducible results; the common fast library routes
quantize capacities to integers. Correctness is pinned by an exhaustive
brute-force oracle in the test suite.

Node convention: pixels are nodes 0..n-1; the source and sink terminals are
implicit (indices n and n+1 internally). Neighbor edges are symmetric: one
(a, b, cap) entry yields capacity ``cap`` in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_EPS = 1e-12


@dataclass
class PixelGraph:
    """Capacitated graph: terminal capacities per node plus symmetric edges."""

    n_nodes: int
    source_cap: np.ndarray  # (n,) float64, source -> node
    sink_cap: np.ndarray  # (n,) float64, node -> sink
    edge_a: np.ndarray  # (m,) int64
    edge_b: np.ndarray  # (m,) int64
    edge_cap: np.ndarray  # (m,) float64, symmetric

    def __post_init__(self):
        self.source_cap = np.ascontiguousarray(self.source_cap, dtype=np.float64)
        self.sink_cap = np.ascontiguousarray(self.sink_cap, dtype=np.float64)
        self.edge_a = np.ascontiguousarray(self.edge_a, dtype=np.int64)
        self.edge_b = np.ascontiguousarray(self.edge_b, dtype=np.int64)
        self.edge_cap = np.ascontiguousarray(self.edge_cap, dtype=np.float64)
        if self.source_cap.shape != (self.n_nodes,) or self.sink_cap.shape != (self.n_nodes,):
            raise ValueError("terminal capacity arrays must have one entry per node")
        if not (self.edge_a.shape == self.edge_b.shape == self.edge_cap.shape):
            raise ValueError("edge arrays must have matching lengths")
        for caps in (self.source_cap, self.sink_cap, self.edge_cap):
            if caps.size and (not np.all(np.isfinite(caps)) or caps.min() < 0):
                raise ValueError("capacities must be finite and non-negative")
        if self.edge_a.size:
            if self.edge_a.min() < 0 or self.edge_b.min() < 0:
                raise ValueError("edge endpoints must be node indices")
            if max(self.edge_a.max(), self.edge_b.max()) >= self.n_nodes:
                raise ValueError("edge endpoint out of range")
            if np.any(self.edge_a == self.edge_b):
                raise ValueError("self loops are not allowed")


def min_cut(graph: PixelGraph) -> tuple[float, np.ndarray]:
    """Maximum flow / minimum cut of the given graph.

    Returns ``(flow, labels)`` where ``labels[i]`` is True when node i stays
    on the source side of the cut. The flow value is recomputed as the exact
    capacity crossing the found partition (summed in canonical array order),
    so it equals max-flow by duality without accumulation error from the
    augmentation sequence. Ties in terminal attachment resolve to the sink
    side (labels are the minimal source-side cut). Deterministic for a fixed
    graph; single-threaded.
    """
    n = graph.n_nodes
    source, sink = n, n + 1
    head, nxt, to, cap = _assemble(
        n + 2,
        source,
        sink,
        graph.source_cap,
        graph.sink_cap,
        graph.edge_a,
        graph.edge_b,
        graph.edge_cap,
    )
    _dinic(source, sink, head, nxt, to, cap)
    reachable = _reachable_from(source, head, nxt, to, cap)
    labels = reachable[:n].copy()

    crossing = labels[graph.edge_a] != labels[graph.edge_b]
    flow = (
        float(graph.source_cap[~labels].sum())
        + float(graph.sink_cap[labels].sum())
        + float(graph.edge_cap[crossing].sum())
    )
    return flow, labels


@njit(cache=True)
def _assemble(n_total, source, sink, source_cap, sink_cap, edge_a, edge_b, edge_cap):
    """Build linked-list adjacency with paired forward/reverse edges."""
    n = source_cap.shape[0]
    m_dir = 0
    for i in range(n):
        if source_cap[i] > 0.0:
            m_dir += 2
        if sink_cap[i] > 0.0:
            m_dir += 2
    m_dir += 2 * edge_a.shape[0]

    head = np.full(n_total, -1, dtype=np.int64)
    nxt = np.empty(m_dir, dtype=np.int64)
    to = np.empty(m_dir, dtype=np.int64)
    cap = np.empty(m_dir, dtype=np.float64)

    k = 0
    for i in range(n):
        c = source_cap[i]
        if c > 0.0:
            to[k] = i
            cap[k] = c
            nxt[k] = head[source]
            head[source] = k
            k += 1
            to[k] = source
            cap[k] = 0.0
            nxt[k] = head[i]
            head[i] = k
            k += 1
    for i in range(n):
        c = sink_cap[i]
        if c > 0.0:
            to[k] = sink
            cap[k] = c
            nxt[k] = head[i]
            head[i] = k
            k += 1
            to[k] = i
            cap[k] = 0.0
            nxt[k] = head[sink]
            head[sink] = k
            k += 1
    for e in range(edge_a.shape[0]):
        a = edge_a[e]
        b = edge_b[e]
        c = edge_cap[e]
        to[k] = b
        cap[k] = c
        nxt[k] = head[a]
        head[a] = k
        k += 1
        to[k] = a
        cap[k] = c
        nxt[k] = head[b]
        head[b] = k
        k += 1
    return head, nxt, to, cap


@njit(cache=True)
def _dinic(source, sink, head, nxt, to, cap):
    n_total = head.shape[0]
    level = np.empty(n_total, dtype=np.int64)
    iters = np.empty(n_total, dtype=np.int64)
    queue = np.empty(n_total, dtype=np.int64)
    path_edge = np.empty(n_total, dtype=np.int64)
    path_node = np.empty(n_total + 1, dtype=np.int64)
    total = 0.0

    while True:
        # BFS level graph over residual edges
        for i in range(n_total):
            level[i] = -1
        level[source] = 0
        qh, qt = 0, 0
        queue[qt] = source
        qt += 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            e = head[u]
            while e != -1:
                v = to[e]
                if cap[e] > _EPS and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
                e = nxt[e]
        if level[sink] < 0:
            break

        for i in range(n_total):
            iters[i] = head[i]

        # Blocking flow: repeated path search with iterator pointers
        while True:
            path_node[0] = source
            depth = 0
            found = False
            while True:
                u = path_node[depth]
                if u == sink:
                    found = True
                    break
                e = iters[u]
                while e != -1 and (cap[e] <= _EPS or level[to[e]] != level[u] + 1):
                    e = nxt[e]
                iters[u] = e
                if e == -1:
                    if depth == 0:
                        break
                    level[u] = -2  # dead end; prune for this phase
                    depth -= 1
                    parent = path_node[depth]
                    iters[parent] = nxt[iters[parent]]
                else:
                    path_edge[depth] = e
                    depth += 1
                    path_node[depth] = to[e]
            if not found:
                break
            bottleneck = np.inf
            for i in range(depth):
                c = cap[path_edge[i]]
                if c < bottleneck:
                    bottleneck = c
            for i in range(depth):
                e = path_edge[i]
                cap[e] -= bottleneck
                cap[e ^ 1] += bottleneck
            total += bottleneck
    return total


@njit(cache=True)
def _reachable_from(source, head, nxt, to, cap):
    n_total = head.shape[0]
    seen = np.zeros(n_total, dtype=np.bool_)
    queue = np.empty(n_total, dtype=np.int64)
    seen[source] = True
    qh, qt = 0, 0
    queue[qt] = source
    qt += 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e != -1:
            v = to[e]
            if cap[e] > _EPS and not seen[v]:
                seen[v] = True
                queue[qt] = v
                qt += 1
            e = nxt[e]
    return seen
