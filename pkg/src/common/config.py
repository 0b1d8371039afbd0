import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

class Config:
    # Project Root
    PROJECT_ROOT = Path(__file__).parent.parent.parent.resolve()

    # Data Directories
    DATA_DIR = Path(os.getenv("COLCOMPLETE_DATA_DIR", str(PROJECT_ROOT / "data")))
    RESULTS_DIR = Path(os.getenv("COLCOMPLETE_RESULTS_DIR", str(DATA_DIR / "results")))

    # Numerical tolerances
    TOL_ORTH = float(os.getenv("COLCOMPLETE_TOL_ORTH", "1e-10"))
    TOL_RECON_REL = 1e-8  # relative to ||a||_F
    SVD_REL_TOL = float(os.getenv("COLCOMPLETE_SVD_REL_TOL", "1e-12"))
    SVD_SWEEP_FACTOR = 10  # max sweeps = factor * min(rows, cols)^2
    ANGLE_CLAMP_TOL = 1e-12
    MONOTONE_SLACK = 1e-12
    HESSIAN_MAX_RANK = int(os.getenv("COLCOMPLETE_HESSIAN_MAX_RANK", "12"))
    DELTA_TOL = 1e-12

    # SVD backend: golub-kahan | jacobi | lapack
    SVD_BACKEND = os.getenv("COLCOMPLETE_SVD_BACKEND", "golub-kahan")

    # Logging
    LOG_LEVEL = os.getenv("COLCOMPLETE_LOG_LEVEL", "INFO")

    # Descent defaults
    DEFAULT_MAX_ITERS = int(os.getenv("COLCOMPLETE_MAX_ITERS", "2000000"))
    DEFAULT_GRAD_TOL_REL = 1e-10  # relative to ||A||_F

    # Output
    FLOAT_FORMAT = "%.17g"
    CLI_NAME = "colcomplete"

    @classmethod
    def ensure_dirs(cls):
        """Ensure all data directories exist."""
        cls.DATA_DIR.mkdir(parents=True, exist_ok=True)
        cls.RESULTS_DIR.mkdir(parents=True, exist_ok=True)

config = Config()
