"""Experiment harness: dataset plumbing, baselines, runner, CLI."""

from .data import generate_synthetic, load_graph_tsv, load_movies_csv, load_similarity_csv, load_vector_csv
from .runner import (
    ALGORITHMS,
    CSV_HEADER,
    PROBLEMS,
    ExperimentConfig,
    ResultRow,
    density_greedy,
    run_experiment,
    write_csv,
)

__all__ = [
    "ALGORITHMS",
    "CSV_HEADER",
    "PROBLEMS",
    "ExperimentConfig",
    "ResultRow",
    "density_greedy",
    "generate_synthetic",
    "load_graph_tsv",
    "load_movies_csv",
    "load_similarity_csv",
    "load_vector_csv",
    "run_experiment",
    "write_csv",
]
