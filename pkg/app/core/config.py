from pydantic_settings import BaseSettings
from typing import Optional, Tuple
from pathlib import Path

class Settings(BaseSettings):
    PROJECT_NAME: str = "Comet Assay Forensics API"
    VERSION: str = "1.0.0"
    API_V1_STR: str = "/api/v1"

    # Logging
    LOG_LEVEL: str = "INFO"

    # Calibration factors for damage categories A-E
    DEFAULT_SCALE: Tuple[float, float, float, float, float] = (2.5, 12.5, 30.0, 67.5, 97.5)

    # Null simulation settings
    DEFAULT_SEED: int = 42
    POPULATION_SIZE: int = 10_000
    CELLS_PER_SLIDE: int = 500
    REPLICATES: int = 100
    SAMPLING: str = "without-replacement"
    MAX_WORKERS: int = 1

    # Tests and verdict thresholds
    ALPHA: float = 0.05
    SEVERE_ALPHA: float = 0.01
    MOMENT_BASIS: str = "multinomial"
    VARIANCE_TEST: str = "f-test"
    PERMUTATION_ROUNDS: int = 2000
    CV_RATIO_SUSPICIOUS: float = 1.75
    CV_RATIO_SEVERE: float = 2.5
    INTER_INTRA_SUSPICIOUS_RATIO: float = 0.75
    VARIANCE_FLAG_MIN_CATEGORIES: int = 3

    # Published between-slide CV of the comet assay, compared against the intra-assay CV
    REFERENCE_ASSAY_CV: float = 0.25

    # Digit analysis defaults
    DIGIT_COLUMN: str = "A"
    DIGIT_POSITION: str = "last"

    # Plot data
    PLOT_CATEGORIES: str = "ABCD"

    class Config:
        case_sensitive = True
        env_file = ".env"
        env_file_encoding = 'utf-8'


def load_settings(env_file: Optional[Path] = None) -> Settings:
    """Build settings, reading an explicit config file when one is given."""
    if env_file is None:
        return Settings()
    return Settings(_env_file=env_file)


settings = Settings()
