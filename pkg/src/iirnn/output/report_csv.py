"""CSV emission of evaluation reports and cold-start curves."""

import logging
from pathlib import Path

import pandas as pd

from iirnn.errors import FormatError
from iirnn.models.report import ALL_POSITIONS, EvalReport, MetricCell

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["model", "k", "position", "recall", "mrr", "count"]
COLDSTART_COLUMNS = ["model", "n", "recall_at_5"]


def _write(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path, index=False, float_format="%.6f", lineterminator="\n", encoding="utf-8"
    )


def report_frame(report: EvalReport) -> pd.DataFrame:
    rows = [cell.model_dump() for cell in report.cells]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def emit_report(report: EvalReport, path: Path) -> Path:
    _write(report_frame(report), path)
    logger.info("Wrote %d report rows to %s", len(report.cells), path)
    return path


def coldstart_frame(report: EvalReport, k: int = 5) -> pd.DataFrame:
    """Recall@k for each numeric position, per model, ordered by n.

    The column keeps its fixed name; for other k it holds Recall@k.
    """
    if k != 5:
        logger.info("Cold-start column recall_at_5 holds Recall@%d", k)
    rows = [
        {"model": c.model, "n": int(c.position), "recall_at_5": c.recall}
        for c in report.cells
        if c.k == k and c.position != ALL_POSITIONS
    ]
    frame = pd.DataFrame(rows, columns=COLDSTART_COLUMNS)
    if frame.empty:
        return frame
    order = {name: i for i, name in enumerate(report.models)}
    frame["_order"] = frame["model"].map(order)
    frame = frame.sort_values(["_order", "n"], kind="stable")
    return frame.drop(columns="_order").reset_index(drop=True)


def emit_coldstart(report: EvalReport, path: Path, k: int = 5) -> Path:
    frame = coldstart_frame(report, k)
    if frame.empty and report.cells:
        logger.warning("No K=%d position cells in report; cold-start CSV is empty", k)
    _write(frame, path)
    logger.info("Wrote cold-start curve to %s", path)
    return path


def read_report(path: Path) -> EvalReport:
    if not path.exists():
        raise FormatError(f"report not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={"model": str, "position": str})
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise FormatError(f"{path}: empty file") from exc
    if list(frame.columns) != REPORT_COLUMNS:
        raise FormatError(f"{path}: expected columns {','.join(REPORT_COLUMNS)}")
    try:
        cells = [MetricCell(**row) for row in frame.to_dict(orient="records")]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return EvalReport(cells=cells)
