"""Benchmark environments and sequence generation.

An environment is a list of phases, each with its own transition graph and
ground truth. Static environments have one phase. Dynamic ones switch to the
second phase halfway through the stream; the walker keeps its position at the
switch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .graphs import Graph, TransitionGraph, build_transition_graph, load_graph, random_walk
from .hierarchy import HierarchySpec, relabel

STATIC_TAU = 300_000
DYNAMIC_TAU = 600_000
PRESETS = ("IH", "HB", "IEH", "DIH", "DCH", "EC2EH", "EH2EC", "DCS")
EXTRA_PRESETS = ("BAL",)
GRAPH_PRESETS = ("KARATE",)


@dataclass
class Phase:
    transitions: TransitionGraph
    truth: np.ndarray
    spec: HierarchySpec | None = None

    @classmethod
    def from_spec(cls, spec: HierarchySpec) -> "Phase":
        return cls(build_transition_graph(spec), spec.ground_truth(), spec)


@dataclass
class Environment:
    name: str
    phases: list[Phase]
    tau: int = STATIC_TAU
    description: str = ""

    def __post_init__(self):
        if not self.phases:
            raise ValueError("environment needs at least one phase")
        sizes = {p.transitions.n for p in self.phases}
        if len(sizes) != 1:
            raise ValueError(f"all phases must share the variable count, got {sorted(sizes)}")

    @property
    def n(self) -> int:
        return self.phases[0].transitions.n

    @property
    def dynamic(self) -> bool:
        return len(self.phases) > 1

    def phase_starts(self, tau: int | None = None) -> list[int]:
        """Transition index at which each phase begins."""
        tau = self.tau if tau is None else tau
        return [i * tau // len(self.phases) for i in range(len(self.phases))]


@dataclass
class EnvRun:
    sequence: np.ndarray
    starts: list[int]
    truths: list[np.ndarray] = field(default_factory=list)

    def phase_at(self, index: int) -> int:
        """Phase that generated transition ``index``."""
        return int(np.searchsorted(self.starts, index, side="right") - 1)

    def truth_at(self, index: int) -> np.ndarray:
        return self.truths[self.phase_at(index)]


def _from_dict(data: dict, name: str | None = None) -> Environment:
    if "phases" in data:
        specs = [HierarchySpec.from_dict(p) for p in data["phases"]]
        tau = int(data.get("tau", DYNAMIC_TAU if len(specs) > 1 else STATIC_TAU))
        desc = data.get("description", "")
    else:
        specs = [HierarchySpec.from_dict(data)]
        tau, desc = STATIC_TAU, ""
    return Environment(name or data.get("name", "custom"),
                       [Phase.from_spec(s) for s in specs], tau, desc)


def load_env(path) -> Environment:
    """Read an environment file, or a single hierarchy tree as a static one."""
    path = Path(path)
    return _from_dict(json.loads(path.read_text(encoding="utf-8")), path.stem)


def preset_env(name: str) -> Environment:
    """One of the bundled benchmark environments (see ``PRESETS``)."""
    key = name.upper()
    if key in GRAPH_PRESETS:
        return karate_env()
    if key not in PRESETS + EXTRA_PRESETS:
        raise ValueError(f"unknown environment {name!r}; choose from "
                         f"{', '.join(PRESETS + EXTRA_PRESETS + GRAPH_PRESETS)}")
    text = resources.files(__package__).joinpath("presets", f"{key}.json").read_text("utf-8")
    return _from_dict(json.loads(text), key)


def graph_env(graph: Graph, truth_attr: str | None = None, name: str = "graph") -> Environment:
    """Static environment from an undirected graph.

    ``truth_attr`` names a node attribute holding the one-level ground truth;
    without it every node is its own group.
    """
    if truth_attr is None:
        keys = list(range(graph.n))
    else:
        missing = [graph.names[i] for i, a in enumerate(graph.attrs) if truth_attr not in a]
        if missing or len(graph.attrs) != graph.n:
            raise ValueError(f"nodes without attribute {truth_attr!r}: {missing[:5]}")
        keys = [a[truth_attr] for a in graph.attrs]
    truth = relabel(keys)[None, :]
    return Environment(name, [Phase(graph.transitions(), truth)], STATIC_TAU)


def karate_graph() -> Graph:
    path = resources.files("tsfmap").joinpath("data", "karate.gml")
    with resources.as_file(path) as p:
        return load_graph(p, "gml")


def karate_env() -> Environment:
    return graph_env(karate_graph(), "club", "KARATE")


def run_env(env: Environment, seed=None, tau: int | None = None) -> EnvRun:
    """Generate the environment's symbol stream of ``tau`` transitions."""
    tau = env.tau if tau is None else int(tau)
    if tau < len(env.phases):
        raise ValueError(f"tau={tau} is shorter than the number of phases")
    starts = env.phase_starts(tau)
    ends = starts[1:] + [tau]
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # derive children without advancing the caller's SeedSequence
    seeds = [np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (i,))
             for i in range(len(env.phases))]
    parts = []
    for phase, begin, end, ss in zip(env.phases, starts, ends, seeds):
        if not parts:
            parts.append(random_walk(phase.transitions, end - begin, ss))
        else:
            # the walker stays where it is; drop the repeated start symbol
            walk = random_walk(phase.transitions, end - begin + 1, ss, start=int(parts[-1][-1]))
            parts.append(walk[1:])
    return EnvRun(np.concatenate(parts), starts, [p.truth for p in env.phases])
