from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = "1.0"
RNG_NAME = "numpy.random.PCG64"


class TestOutcome(BaseModel):
    """Result of one significance test.

    `df` is the (numerator) degrees of freedom; the F-test also fills
    `df_denominator`. Welch-Satterthwaite df is fractional, hence float.
    """

    __test__ = False  # keep pytest from collecting the class

    model_config = ConfigDict(frozen=True)

    test_name: str
    statistic: float
    df: Optional[float] = None
    df_denominator: Optional[float] = None
    p_value: float = Field(ge=0.0, le=1.0)


class DuplicateSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    tf_a: float
    tf_b: float
    mean: float
    sd: float
    cv: float


class MomentBasis(str, Enum):
    MULTINOMIAL = "multinomial"
    HYPERGEOMETRIC = "hypergeometric"


class MomentEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    sd: float
    basis: MomentBasis

    @property
    def cv(self) -> float:
        return self.sd / self.mean if self.mean else 0.0


class DispersionSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    intra_cv: float
    inter_cv: Optional[float] = None  # needs at least two points
    n_pairs: int


class SamplingMode(str, Enum):
    WITHOUT_REPLACEMENT = "without-replacement"
    WITH_REPLACEMENT = "with-replacement"


class PopulationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    counts: Tuple[int, int, int, int, int]
    size: int


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_points: int = Field(gt=0)
    cells_per_slide: int = Field(gt=0)
    seed: int = Field(ge=0, lt=2**64)
    replicates: int = Field(gt=0)
    sampling: SamplingMode = SamplingMode.WITHOUT_REPLACEMENT
    population_size: int = Field(default=10_000, gt=0)
    rng: str = RNG_NAME


class Fig1Row(BaseModel):
    model_config = ConfigDict(frozen=True)

    point_index: int
    reported_tf_a: float
    reported_tf_b: float
    simulated_tf_a: float
    simulated_tf_b: float
    reported_mean: float
    simulated_mean: float


class CategoryVariance(BaseModel):
    model_config = ConfigDict(frozen=True)

    category: str
    source: str  # "reported" or "simulated"
    variance: float
    mean: float


class CategoryPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    category: str
    source: str
    slide_index: int
    count: int


class SimulationComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    sim_intra_cv: float
    sim_inter_cv: Optional[float] = None
    sim_tf_mean: float
    per_category_variance_tests: List[TestOutcome]
    per_category_mean_tests: List[TestOutcome]
    reported_variances: List[float]
    simulated_variances: List[float]
    fig1_data: List[Fig1Row]
    fig2_data: List[CategoryVariance]
    fig2_points: List[CategoryPoint]
    population: PopulationSpec


class Severity(str, Enum):
    NOTE = "note"
    SUSPICIOUS = "suspicious"
    SEVERE = "severe"


class FlagId(str, Enum):
    DIGIT_CHISQ = "digit-nonuniform-chisq"
    DIGIT_KS = "digit-nonuniform-ks"
    INTER_BELOW_INTRA = "inter-below-intra"
    CV_BELOW_THEORETICAL = "cv-below-theoretical"
    VARIANCE_BELOW_SIMULATED = "variance-below-simulated"


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    flag_id: FlagId
    severity: Severity
    evidence_pointer: str
    detail: str


class ForensicReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: str = SCHEMA_VERSION
    alpha: float
    dataset_summary: List[DuplicateSummary]
    grand_tf_mean: float
    digit_column: str
    digit_position: str
    digit_tests: List[TestOutcome]
    dispersion: DispersionSummary
    theoretical_moments: MomentEstimate
    theoretical_cv: float
    theoretical_sd_ratio: Optional[float] = None
    reference_assay_cv: float
    reference_cv_ratio: float
    simulation: Optional[SimulationComparison] = None
    flags: List[FlagId]
    verdicts: List[Verdict]
    notes: List[str] = []
    config_echo: SimulationConfig

    @property
    def has_severe(self) -> bool:
        return any(v.severity == Severity.SEVERE for v in self.verdicts)
