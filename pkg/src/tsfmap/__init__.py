"""Hierarchical chunk learning with self-organizing attractor-repeller maps."""

from .baselines import (
    ModularityChunking,
    TransitionMatrixChunking,
    greedy_maximize,
    modularity,
    tp_chunk,
    tp_matrix,
)
from .chunking import ChunkMatrix, HierarchicalChunking, LinkageMatrix, chunk, cut, linkage
from .dynamics import DynamicsConfig, SigmaMap, Simulator, run
from .encoding import SequenceConfig, encode_sequence, encode_step
from .evaluation import hierarchical_score, nmi, numerical_rank, phase_trace
from .experiment import ExperimentResult, run_experiment
from .model import TSFMap

__version__ = "0.1.0"

__all__ = [
    "ChunkMatrix", "DynamicsConfig", "ExperimentResult", "HierarchicalChunking", "LinkageMatrix",
    "ModularityChunking", "SequenceConfig", "SigmaMap", "Simulator", "TSFMap",
    "TransitionMatrixChunking", "chunk", "cut", "encode_sequence", "encode_step",
    "greedy_maximize", "hierarchical_score", "linkage", "modularity", "nmi", "numerical_rank",
    "phase_trace", "run", "run_experiment", "tp_chunk", "tp_matrix",
]
