"""Q&A monitoring: question pools, fluent extraction, metrics, experiments."""

from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    PSchedule,
    RunRecord,
    ScenarioStats,
    admissible_vocabulary,
    format_report,
    run_experiments,
)
from .metrics import (
    SCENARIOS,
    AnswerEvaluation,
    Histogram,
    HistogramRow,
    OffsetCounts,
    histogram_csv,
    offset_histogram,
    score,
)
from .qa import (
    ANSWER_SYSTEM,
    EXTRACT_SYSTEM,
    QUESTION_POOLS,
    FluentExtraction,
    Question,
    ask,
    extract_fluents,
    sample_question,
)

__all__ = [
    "SCENARIOS",
    "ANSWER_SYSTEM",
    "EXTRACT_SYSTEM",
    "QUESTION_POOLS",
    "AnswerEvaluation",
    "ExperimentConfig",
    "ExperimentReport",
    "FluentExtraction",
    "Histogram",
    "HistogramRow",
    "OffsetCounts",
    "PSchedule",
    "Question",
    "RunRecord",
    "ScenarioStats",
    "admissible_vocabulary",
    "ask",
    "extract_fluents",
    "format_report",
    "histogram_csv",
    "offset_histogram",
    "run_experiments",
    "sample_question",
    "score",
]
