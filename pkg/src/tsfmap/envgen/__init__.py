"""Environment generation: hierarchy trees, transition graphs and random walks."""

from .graphs import (
    Graph,
    GraphParseError,
    TransitionGraph,
    build_transition_graph,
    graph_to_transitions,
    load_graph,
    random_walk,
    shortest_paths,
    transitions_from_distances,
    write_gml,
)
from .hierarchy import HierarchySpec, Node, chunk
from .presets import (
    PRESETS,
    Environment,
    EnvRun,
    Phase,
    graph_env,
    karate_env,
    karate_graph,
    load_env,
    preset_env,
    run_env,
)

__all__ = [
    "Environment", "EnvRun", "Graph", "GraphParseError", "HierarchySpec", "Node", "PRESETS",
    "Phase", "TransitionGraph", "build_transition_graph", "graph_env", "graph_to_transitions",
    "chunk", "karate_env", "karate_graph", "load_env", "load_graph", "preset_env",
    "random_walk", "run_env", "shortest_paths", "transitions_from_distances", "write_gml",
]
