"""Hierarchy trees: chunks are internal nodes, variables are leaves."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Node:
    name: str = ""
    children: list["Node"] = field(default_factory=list)
    var: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.var is not None

    @classmethod
    def from_dict(cls, data: dict) -> "Node":
        if "var" in data:
            if data.get("children"):
                raise ValueError(f"leaf {data['var']} cannot have children")
            return cls(name=str(data.get("name", data["var"])), var=int(data["var"]))
        children = data.get("children")
        if not children:
            raise ValueError(f"chunk {data.get('name', '?')!r} has no children")
        return cls(name=str(data.get("name", "")), children=[cls.from_dict(c) for c in children])

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"var": self.var}
        return {"name": self.name, "children": [c.to_dict() for c in self.children]}


def chunk(name: str, *children) -> dict:
    """Shorthand for building tree dictionaries: ints become leaves."""
    return {
        "name": name,
        "children": [{"var": c} if isinstance(c, int) else c for c in children],
    }


class HierarchySpec:
    """A validated hierarchy over variables ``0..n-1``."""

    def __init__(self, root: Node):
        self.root = root
        self._ancestors: dict[int, list[Node]] = {}
        self._collect(root, [])
        ids = sorted(self._ancestors)
        if len(ids) < 2:
            raise ValueError("a hierarchy needs at least two variables")
        if ids != list(range(len(ids))):
            raise ValueError("leaf ids must form the contiguous range 0..n-1 without repeats")

    def _collect(self, node: Node, path: list[Node]) -> None:
        if node.is_leaf:
            if node.var in self._ancestors:
                raise ValueError(f"variable {node.var} appears twice")
            self._ancestors[node.var] = path
            return
        if len(node.children) < 2:
            raise ValueError(f"chunk {node.name!r} must have at least two children")
        for c in node.children:
            self._collect(c, path + [node])

    @classmethod
    def from_dict(cls, data: dict) -> "HierarchySpec":
        return cls(Node.from_dict(data))

    @classmethod
    def from_json(cls, path) -> "HierarchySpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return self.root.to_dict()

    @property
    def n(self) -> int:
        return len(self._ancestors)

    def ancestors(self, var: int) -> list[Node]:
        """Internal nodes from the root down to the variable's parent."""
        return self._ancestors[var]

    def depth(self, var: int) -> int:
        return len(self._ancestors[var])

    def distance(self, a: int, b: int) -> int:
        """Number of tree edges on the path between two variables."""
        if a == b:
            return 0
        pa, pb = self._ancestors[a], self._ancestors[b]
        common = 0
        for x, y in zip(pa, pb):
            if x is not y:
                break
            common += 1
        return (len(pa) - common + 1) + (len(pb) - common + 1)

    def distance_matrix(self) -> np.ndarray:
        n = self.n
        d = np.zeros((n, n), dtype=np.int64)
        for a in range(n):
            for b in range(a + 1, n):
                d[a, b] = d[b, a] = self.distance(a, b)
        return d

    @property
    def n_levels(self) -> int:
        """Depth of the deepest chunk below the root."""
        return max(self.depth(v) for v in range(self.n)) - 1

    def ground_truth(self) -> np.ndarray:
        """Label matrix with one row per chunk level, coarse first.

        A variable whose branch ends above a level keeps the label of its
        deepest chunk; a variable hanging directly off the root is a chunk of
        its own.
        """
        levels = self.n_levels
        if levels < 1:
            raise ValueError("hierarchy has no chunk level below the root")
        truth = np.empty((levels, self.n), dtype=np.int64)
        for level in range(levels):
            keys = []
            for v in range(self.n):
                path = self._ancestors[v][1:]
                keys.append(id(path[min(level, len(path) - 1)]) if path else ("leaf", v))
            truth[level] = relabel(keys)
        return truth


def relabel(keys) -> np.ndarray:
    """Map arbitrary hashable keys to 0.. in order of first appearance."""
    seen: dict = {}
    return np.array([seen.setdefault(k, len(seen)) for k in keys], dtype=np.int64)
