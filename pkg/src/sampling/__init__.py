from src.sampling.columns import ColumnSampler, build_sampler, sample_columns, sample_uniform
from src.sampling.entries import EntryIndexSet, omega_of_columns, sample_entries_uniform

__all__ = [
    "ColumnSampler",
    "build_sampler",
    "sample_columns",
    "sample_uniform",
    "EntryIndexSet",
    "omega_of_columns",
    "sample_entries_uniform",
]
