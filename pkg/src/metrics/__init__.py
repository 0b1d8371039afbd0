from src.metrics.evaluation import evaluate, nmse, numerical_rank, spectral_sq_error

__all__ = ["evaluate", "nmse", "numerical_rank", "spectral_sq_error"]
