from collections import defaultdict

from pydantic import BaseModel

from iirnn.models.common import RecommendationList
from iirnn.models.report import EvalReport, MetricCell


def recall_at_k(recs: RecommendationList, target: int) -> int:
    return 1 if target in recs.items else 0


def mrr_at_k(recs: RecommendationList, target: int) -> float:
    rank = recs.rank_of(target)
    return 0.0 if rank is None else 1.0 / rank


class RelativeCell(BaseModel):
    """Change of a model against a reference model; ``None`` when the
    reference scored zero."""

    model: str
    reference: str
    k: int
    position: str
    recall_change: float | None
    mrr_change: float | None


def _change(value: float, base: float) -> float | None:
    return None if base == 0.0 else (value - base) / base


def relative_improvement(report: EvalReport, reference: str) -> list[RelativeCell]:
    if reference not in report.models:
        raise KeyError(f"reference model {reference!r} not in report")
    base = {(c.k, c.position): c for c in report.for_model(reference)}
    out: list[RelativeCell] = []
    for cell in report.cells:
        if cell.model == reference or (cell.k, cell.position) not in base:
            continue
        ref = base[(cell.k, cell.position)]
        out.append(
            RelativeCell(
                model=cell.model,
                reference=reference,
                k=cell.k,
                position=cell.position,
                recall_change=_change(cell.recall, ref.recall),
                mrr_change=_change(cell.mrr, ref.mrr),
            )
        )
    return out


def average_reports(reports: list[EvalReport]) -> EvalReport:
    """Cell-wise mean of several runs; cells are matched by model, k, position."""
    if not reports:
        return EvalReport()
    sums: dict[tuple[str, int, str], list[float]] = defaultdict(lambda: [0.0, 0.0])
    counts: dict[tuple[str, int, str], int] = {}
    seen: dict[tuple[str, int, str], int] = defaultdict(int)
    for report in reports:
        for cell in report.cells:
            key = (cell.model, cell.k, cell.position)
            sums[key][0] += cell.recall
            sums[key][1] += cell.mrr
            counts.setdefault(key, cell.count)
            seen[key] += 1
    cells = [
        MetricCell(
            model=key[0],
            k=key[1],
            position=key[2],
            recall=recall / seen[key],
            mrr=mrr / seen[key],
            count=counts[key],
        )
        for key, (recall, mrr) in sums.items()
    ]
    return EvalReport(cells=cells)
