import os
from typing import Optional
from pydantic import BaseSettings

class Settings(BaseSettings):
    # Application settings
    APP_NAME: str = "Transport Noise Lab"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Output and parallelism
    OUTPUT_DIR: str = "results"
    WORKERS: int = 0  # 0 means one worker per logical core
    FFT_THREADS: int = 1

    # Cache settings
    CACHE_MAX_ENTRIES: int = 128  # per key prefix, least recently used evicted first

    # Monte Carlo settings
    BOOTSTRAP_RESAMPLES: int = 1000

    # Numerical tolerances
    HERMITIAN_TOLERANCE: float = 1e-10
    MEAN_TOLERANCE: float = 1e-10
    DIVERGENCE_TOLERANCE: float = 1e-10
    QUADRATURE_RTOL: float = 1e-8
    IDENTITY_TOLERANCE: float = 1e-10

    # Time stepping limits
    CFL_LIMIT: float = 0.5
    NOISE_CFL_LIMIT: float = 1.0

    # Soft gates
    SOFT_GATE_L_DOUBLING: float = 0.15

    class Config:
        env_file = ".env"
        case_sensitive = True

# Load settings from environment variables
settings = Settings()

# Helper function to resolve the worker count
def get_worker_count(requested: Optional[int] = None) -> int:
    workers = requested if requested is not None else settings.WORKERS
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers
