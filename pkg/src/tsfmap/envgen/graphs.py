"""Transition graphs, random walks and graph file ingestion."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .hierarchy import HierarchySpec


@dataclass
class TransitionGraph:
    """Row-stochastic variable-to-variable matrix with an empty diagonal."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("transition matrix must be square")
        if (p < 0).any() or np.any(np.diag(p) != 0):
            raise ValueError("transition matrix needs non-negative entries and a zero diagonal")
        if not np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12):
            raise ValueError("transition matrix rows must sum to one")
        self.p = p

    @property
    def n(self) -> int:
        return self.p.shape[0]


def transitions_from_distances(d) -> TransitionGraph:
    """Weight each pair by ``1 / (d/2)**3`` and normalise outgoing weights."""
    d = np.asarray(d, dtype=float)
    if d.shape[0] < 2:
        raise ValueError("need at least two variables")
    off = ~np.eye(d.shape[0], dtype=bool)
    if (d[off] <= 0).any():
        raise ValueError("distances between distinct variables must be positive")
    omega = np.zeros_like(d)
    omega[off] = 1.0 / (d[off] / 2.0) ** 3
    return TransitionGraph(omega / omega.sum(axis=1, keepdims=True))


def build_transition_graph(spec: HierarchySpec) -> TransitionGraph:
    return transitions_from_distances(spec.distance_matrix())


def shortest_paths(n: int, edges) -> np.ndarray:
    """Hop counts between all node pairs (-1 when unreachable)."""
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for nb in adj[u]:
                if dist[src, nb] < 0:
                    dist[src, nb] = dist[src, u] + 1
                    queue.append(nb)
    return dist


def graph_to_transitions(edges, n: int | None = None) -> TransitionGraph:
    """Transition graph of an undirected, unweighted, connected graph.

    Nodes are ``0..n-1``; the tree distance is replaced by the shortest-path
    hop count.
    """
    edges = [(int(a), int(b)) for a, b in edges]
    if n is None:
        n = 1 + max(max(e) for e in edges) if edges else 0
    if n < 2:
        raise ValueError("graph needs at least two nodes")
    dist = shortest_paths(n, edges)
    unreachable = np.flatnonzero(dist[0] < 0)
    if unreachable.size:
        raise ValueError(
            f"graph is disconnected: nodes {unreachable.tolist()} are unreachable from node 0")
    return transitions_from_distances(dist)


def random_walk(graph: TransitionGraph, steps: int, seed=None, start: int | None = None) -> np.ndarray:
    """Sample a walk of ``steps`` visited variables (the start included)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng(seed)
    n = graph.n
    if start is None:
        start = int(rng.integers(n))
    elif not 0 <= start < n:
        raise ValueError(f"start {start} out of range")
    cdf = np.cumsum(graph.p, axis=1)
    cdf[:, -1] = 1.0
    return _walk(cdf, start, rng.random(steps - 1))


@njit(cache=True)
def _walk(cdf, start, u):
    seq = np.empty(u.size + 1, dtype=np.int64)
    seq[0] = start
    cur = start
    for i in range(u.size):
        cur = np.searchsorted(cdf[cur], u[i], side="right")
        seq[i + 1] = cur
    return seq


@dataclass
class Graph:
    """Undirected simple graph on dense ids with the original node names."""

    n: int
    edges: list[tuple[int, int]]
    names: list[str]
    attrs: list[dict] = field(default_factory=list)

    def transitions(self) -> TransitionGraph:
        return graph_to_transitions(self.edges, self.n)


class GraphParseError(ValueError):
    pass


def load_graph(path, fmt: str | None = None) -> Graph:
    """Read a GML subset or a whitespace edge list."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if fmt is None:
        fmt = "gml" if path.suffix.lower() == ".gml" else "edge-list"
    if fmt == "gml":
        nodes, raw_edges = _parse_gml(text, path)
    elif fmt == "edge-list":
        nodes, raw_edges = _parse_edge_list(text, path)
    else:
        raise ValueError(f"unknown graph format {fmt!r}")

    index = {}
    names, attrs = [], []
    for key, node_attrs in nodes:
        if key in index:
            raise GraphParseError(f"{path}: duplicate node {key!r}")
        index[key] = len(names)
        names.append(str(node_attrs.get("label", key)))
        attrs.append(node_attrs)
    edges = set()
    for (a, b), lineno in raw_edges:
        for end in (a, b):
            if end not in index:
                if fmt == "gml":
                    raise GraphParseError(f"{path}:{lineno}: edge refers to unknown node {end!r}")
                index[end] = len(names)
                names.append(str(end))
                attrs.append({})
        u, v = index[a], index[b]
        if u == v:
            continue
        edges.add((min(u, v), max(u, v)))
    if not names:
        raise GraphParseError(f"{path}:1: graph has no nodes")
    return Graph(n=len(names), edges=sorted(edges), names=names, attrs=attrs)


def _parse_edge_list(text, path):
    raw = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphParseError(f"{path}:{lineno}: expected two node ids, got {line!r}")
        raw.append(((parts[0], parts[1]), lineno))
    if not raw:
        raise GraphParseError(f"{path}:1: no edges found")
    return [], raw


_TOKEN = re.compile(r'"[^"]*"|\[|\]|[^\s\[\]"]+')


def _parse_gml(text, path):
    tokens = []
    for lineno, line in enumerate(text.splitlines(), 1):
        for tok in _TOKEN.findall(line):
            tokens.append((tok, lineno))
    if not tokens:
        raise GraphParseError(f"{path}:1: empty GML file")

    pos = 0

    def parse_list(closing):
        nonlocal pos
        items = []
        while pos < len(tokens):
            tok, lineno = tokens[pos]
            if tok == "]":
                if not closing:
                    raise GraphParseError(f"{path}:{lineno}: unexpected ']'")
                pos += 1
                return items
            key = tok
            pos += 1
            if pos >= len(tokens):
                raise GraphParseError(f"{path}:{lineno}: key {key!r} has no value")
            val, vline = tokens[pos]
            pos += 1
            if val == "[":
                items.append((key, parse_list(True), lineno))
            elif val == "]":
                raise GraphParseError(f"{path}:{vline}: key {key!r} has no value")
            else:
                items.append((key, _gml_scalar(val), lineno))
        if closing:
            raise GraphParseError(f"{path}:{tokens[-1][1]}: unterminated '['")
        return items

    top = parse_list(False)
    graphs = [v for k, v, _ in top if k == "graph"]
    if len(graphs) != 1 or not isinstance(graphs[0], list):
        raise GraphParseError(f"{path}:1: expected exactly one 'graph [ ... ]' block")
    nodes, edges = [], []
    for key, val, lineno in graphs[0]:
        if key == "node":
            fields = {k: v for k, v, _ in val}
            if "id" not in fields:
                raise GraphParseError(f"{path}:{lineno}: node without id")
            nodes.append((fields["id"], fields))
        elif key == "edge":
            fields = {k: v for k, v, _ in val}
            if "source" not in fields or "target" not in fields:
                raise GraphParseError(f"{path}:{lineno}: edge needs source and target")
            edges.append(((fields["source"], fields["target"]), lineno))
    return nodes, edges


def _gml_scalar(tok):
    if tok.startswith('"'):
        return tok[1:-1]
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        return tok


def write_gml(path, graph: Graph) -> None:
    lines = ["graph [", "  directed 0"]
    for i, name in enumerate(graph.names):
        lines.append("  node [")
        lines.append(f"    id {i}")
        lines.append(f'    label "{name}"')
        for key, val in (graph.attrs[i] if graph.attrs else {}).items():
            if key in ("id", "label"):
                continue
            lines.append(f'    {key} "{val}"' if isinstance(val, str) else f"    {key} {val}")
        lines.append("  ]")
    for a, b in graph.edges:
        lines += ["  edge [", f"    source {a}", f"    target {b}", "  ]"]
    lines.append("]")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
