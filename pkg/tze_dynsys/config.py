"""Application configuration management."""
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Solver and harness settings with environment variable support."""

    # Application settings
    app_name: str = "tze-dynsys"
    app_version: str = "1.0.0"

    # Integrator defaults (forward Euler on the unit sphere)
    step_h: float = 0.5
    tol: float = 1e-6
    max_iters: int = 1000
    renorm: str = "sphere2"

    # Eigenvector map tolerances
    tie_rtol: float = 1e-8
    sign_threshold: float = 1e-12
    perron_neg_tol: float = 1e-8

    # Baseline defaults
    sshopm_gamma: float = 1.0

    # Experiment harness
    trials: int = 100
    cluster_tol: float = 1e-4
    workers: int = 1
    seed: int = 0

    # Benchmark defaults (50 trials per map, 100n SS-HOPM starts)
    bench_trials_per_map: int = 50
    bench_sshopm_trials_per_dim: int = 100

    # Spacey random walk
    srw_steps: int = 1_000_000

    # Observability settings
    metrics_enabled: bool = True

    # Logging settings
    log_level: str = "INFO"
    log_format: str = "json"

    class Config:
        env_file = ".env"
        env_prefix = "TZE_"
        case_sensitive = False


# Global settings instance
settings = Settings()
