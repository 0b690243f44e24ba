"""Teacher-forced next-item evaluation.

Every prediction j of a test session (after its first j items) asks the
model for one top-max(K) list; every K and position cell is read off the
rank of the true next item in that list.
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Literal

import numpy as np

from iirnn.baselines.base import SessionRecommender
from iirnn.errors import UsageError
from iirnn.models.corpus import Corpus, UserHistory
from iirnn.models.report import ALL_POSITIONS, EvalReport, MetricCell

logger = logging.getLogger(__name__)

type Averaging = Literal["prediction", "session"]


def session_ranks(
    model: SessionRecommender, history: UserHistory, k: int
) -> list[np.ndarray]:
    """1-based rank of each target per test session; 0 when outside the top k."""
    context = model.user_context(history)
    out: list[np.ndarray] = []
    for session in history.test_sessions:
        if len(session) < 2:
            continue
        recs = model.recommend_session(context, session, k)
        ranks = np.zeros(len(session) - 1, dtype=np.int64)
        for j, rec in enumerate(recs):
            rank = rec.truncated(k).rank_of(session.items[j + 1])
            ranks[j] = rank or 0
        out.append(ranks)
    return out


def _cell(
    name: str,
    k: int,
    position: str,
    ranks: list[np.ndarray],
    average: Averaging,
) -> MetricCell:
    hits = [(r > 0) & (r <= k) for r in ranks]
    recip = [np.where(h, 1.0 / np.maximum(r, 1), 0.0) for h, r in zip(hits, ranks)]
    if average == "session":
        kept = [i for i, r in enumerate(ranks) if r.size]
        recall = [float(hits[i].mean()) for i in kept]
        mrr = [float(recip[i].mean()) for i in kept]
        count = len(kept)
        recall_mean = float(np.mean(recall)) if recall else 0.0
        mrr_mean = float(np.mean(mrr)) if mrr else 0.0
    else:
        flat_hits = np.concatenate(hits) if hits else np.zeros(0)
        flat_recip = np.concatenate(recip) if recip else np.zeros(0)
        count = int(flat_hits.size)
        recall_mean = float(flat_hits.mean()) if count else 0.0
        mrr_mean = float(flat_recip.mean()) if count else 0.0
    return MetricCell(
        model=name,
        k=k,
        position=position,
        recall=recall_mean,
        mrr=mrr_mean,
        count=count,
    )


def report_from_ranks(
    name: str,
    ranks: list[np.ndarray],
    ks: Sequence[int],
    positions: Sequence[int],
    average: Averaging = "prediction",
) -> EvalReport:
    cells: list[MetricCell] = []
    for k in sorted(ks):
        for n in sorted(positions):
            head = [r[:n] for r in ranks]
            cells.append(_cell(name, k, str(n), head, average))
        cells.append(_cell(name, k, ALL_POSITIONS, ranks, average))
    return EvalReport(cells=cells)


def evaluate(
    models: Sequence[SessionRecommender],
    corpus: Corpus,
    ks: Sequence[int] = (5, 10, 20),
    positions: Sequence[int] = (1, 2, 3, 4, 5, 20),
    average: Averaging = "prediction",
    threads: int | None = None,
) -> EvalReport:
    if not ks or min(ks) < 1:
        raise UsageError(f"K values must be >= 1, got {list(ks)}")
    if positions and min(positions) < 1:
        raise UsageError(f"positions must be >= 1, got {list(positions)}")
    max_k = max(ks)
    report = EvalReport()
    for model in models:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_user = list(
                pool.map(lambda h: session_ranks(model, h, max_k), corpus.users)
            )
        ranks = [r for user_ranks in per_user for r in user_ranks]
        logger.info(
            "Evaluated %s on %d test sessions (%d predictions)",
            model.name,
            len(ranks),
            sum(r.size for r in ranks),
        )
        report = report.merged(
            report_from_ranks(model.name, ranks, ks, positions, average)
        )
    return report
