from app.models.schemas import (
    AcyclicFixConfig,
    AcyclicReport,
    CorpusEntry,
    GraphFamily,
    LocalitySummary,
    Part,
    PartitionAlgorithm,
    PartitionMetrics,
    PriorityMode,
    ProcessingStatus,
    RunRecord,
    RunRequest,
    SpectralConfig,
    StatusEnum,
    SynthConfig,
    SynthSidecar,
    ToporderAlgorithm,
)

__all__ = [
    "AcyclicFixConfig",
    "AcyclicReport",
    "CorpusEntry",
    "GraphFamily",
    "LocalitySummary",
    "Part",
    "PartitionAlgorithm",
    "PartitionMetrics",
    "PriorityMode",
    "ProcessingStatus",
    "RunRecord",
    "RunRequest",
    "SpectralConfig",
    "StatusEnum",
    "SynthConfig",
    "SynthSidecar",
    "ToporderAlgorithm",
]
