from datetime import datetime
from enum import Enum

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings


# --- Enums ---

class Part(str, Enum):
    S = "S"
    T = "T"


class GraphFamily(str, Enum):
    er = "er"
    ws = "ws"
    sbm = "sbm"


class ToporderAlgorithm(str, Enum):
    spectral_dir = "spectral-dir"
    spectral_classic = "spectral-classic"
    dfs = "dfs"
    bfs = "bfs"
    cm = "cm"
    gorder = "gorder"


class PartitionAlgorithm(str, Enum):
    spectral_dir = "spectral-dir"
    spectral_classic = "spectral-classic"


class PriorityMode(str, Enum):
    labels = "labels"
    spectral = "spectral"
    spectral_binned = "spectral-binned"


class StatusEnum(str, Enum):
    pending = "pending"
    processing = "processing"
    done = "done"
    error = "error"


# --- Algorithm parameters ---

class SpectralConfig(BaseModel):
    # None resolves to 1/(2|E|) against the graph being solved.
    c: float | None = None
    tol: float = Field(default_factory=lambda: settings.tol)
    max_iter: int = Field(default_factory=lambda: settings.max_iter)
    seed: int = Field(default_factory=lambda: settings.seed)
    small_threshold: int = Field(default_factory=lambda: settings.small_threshold)

    @field_validator("c")
    @classmethod
    def _c_non_negative(cls, v: float | None) -> float | None:
        if v is not None and v < 0:
            raise ValueError("c must be non-negative")
        return v

    @field_validator("tol")
    @classmethod
    def _tol_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("tol must be positive")
        return v

    @field_validator("max_iter")
    @classmethod
    def _max_iter_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_iter must be at least 1")
        return v

    @field_validator("seed")
    @classmethod
    def _seed_64_bit(cls, v: int) -> int:
        if not 0 <= v < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        return v


class AcyclicFixConfig(BaseModel):
    beta: float = Field(default_factory=lambda: settings.beta)
    priority: PriorityMode = PriorityMode.labels
    spectral_bins: int = 16

    @field_validator("beta")
    @classmethod
    def _beta_open_unit(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("beta must lie strictly between 0 and 1")
        return v

    @field_validator("spectral_bins")
    @classmethod
    def _bins_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("spectral_bins must be at least 1")
        return v


class SynthConfig(BaseModel):
    family: GraphFamily
    n: int = 1000
    # Edge probability for ER, rewiring probability for WS. None picks the
    # evaluation default of the family.
    p: float | None = None
    k: int = 50
    p_int: float = 0.25
    p_ext: float = 0.2
    alpha: float = 0.05
    seed: int = Field(default_factory=lambda: settings.seed)

    @model_validator(mode="after")
    def _check_family_parameters(self) -> "SynthConfig":
        if self.n < 2 or self.n % 2:
            raise ValueError("n must be an even number of at least 2")
        for name in ("p", "p_int", "p_ext", "alpha"):
            value = getattr(self, name)
            if value is not None and not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.family == GraphFamily.ws and (self.k < 2 or self.k % 2 or self.k >= self.n):
            raise ValueError("Watts-Strogatz requires an even k with 2 <= k < n")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        return self

    @property
    def edge_probability(self) -> float:
        if self.p is not None:
            return self.p
        return 0.3 if self.family == GraphFamily.ws else 0.2


# --- Results ---

class PartitionMetrics(BaseModel):
    con: float = Field(ge=0.0, le=1.0)
    rce: float = Field(ge=0.0, le=1.0)
    wi: float = Field(ge=0.0, le=1.0)
    rmce: float = Field(ge=0.0, le=0.5)


class LocalitySummary(BaseModel):
    bandwidth: int
    mla: int
    cutwidth: int
    median_edge_length: int
    median_edge_cut: int
    total_reuse: int
    max_reuse: int
    median_reuse: int


class AcyclicReport(BaseModel):
    beta: float
    already_acyclic: bool
    npl: float
    before: PartitionMetrics
    after: PartitionMetrics


class RunRecord(BaseModel):
    graph_id: str
    algorithm: str
    seed: int
    wall_time: float = 0.0
    metrics: dict[str, float] = Field(default_factory=dict)
    run_id: str = ""
    created_at: datetime = Field(default_factory=datetime.utcnow)


class RunRequest(BaseModel):
    graph_path: str
    algorithm: ToporderAlgorithm = ToporderAlgorithm.spectral_dir
    seed: int | None = None
    graph_id: str | None = None


class ProcessingStatus(BaseModel):
    run_id: str
    status: StatusEnum = StatusEnum.pending
    error_message: str | None = None


class CorpusEntry(BaseModel):
    name: str
    domain: str
    vertices: int
    edges: int
    symmetric_pct: float


class SynthSidecar(BaseModel):
    config: SynthConfig
    labels: list[Part]
