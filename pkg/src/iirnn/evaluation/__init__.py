from iirnn.evaluation.evaluator import evaluate, report_from_ranks, session_ranks
from iirnn.evaluation.metrics import (
    RelativeCell,
    average_reports,
    mrr_at_k,
    recall_at_k,
    relative_improvement,
)

__all__ = [
    "RelativeCell",
    "average_reports",
    "evaluate",
    "mrr_at_k",
    "recall_at_k",
    "relative_improvement",
    "report_from_ranks",
    "session_ranks",
]
