from collections.abc import Sequence

from rich.console import Console
from rich.table import Table
from rich.text import Text

from iirnn.evaluation.metrics import RelativeCell
from iirnn.models.corpus import CorpusStats
from iirnn.models.report import ALL_POSITIONS, EvalReport
from iirnn.output.formatters import (
    change_color,
    fmt_change,
    fmt_count,
    fmt_metric,
    recall_bar,
)
from iirnn.training.trainer import EpochLog


class ReportRenderer:
    def __init__(self, console: Console | None = None) -> None:
        self.console = console or Console()

    def render_report(self, report: EvalReport) -> None:
        if not report.cells:
            self.console.print("[yellow]Empty report[/yellow]")
            return
        self._render_overall(report)
        self.render_recall_bars(report)
        self._render_positions(report)

    def _render_overall(self, report: EvalReport) -> None:
        ks = sorted({c.k for c in report.cells})
        table = Table(title="Next-item prediction", show_header=True)
        table.add_column("Model", style="cyan")
        for k in ks:
            table.add_column(f"R@{k}", justify="right")
            table.add_column(f"MRR@{k}", justify="right")
        table.add_column("Predictions", justify="right")
        for model in report.models:
            row: list[str] = [model]
            count: int | None = None
            for k in ks:
                try:
                    cell = report.cell(model, k, ALL_POSITIONS)
                except KeyError:
                    row += ["N/A", "N/A"]
                    continue
                row += [fmt_metric(cell.recall), fmt_metric(cell.mrr)]
                count = cell.count
            row.append(fmt_count(count))
            table.add_row(*row)
        self.console.print(table)

    def _render_positions(self, report: EvalReport, k: int = 5) -> None:
        cells = [c for c in report.cells if c.k == k and c.position != ALL_POSITIONS]
        if not cells:
            return
        positions = sorted({int(c.position) for c in cells})
        table = Table(title=f"Recall@{k} over the first n predictions")
        table.add_column("Model", style="cyan")
        for n in positions:
            table.add_column(f"n={n}", justify="right")
        for model in report.models:
            values = {int(c.position): c.recall for c in cells if c.model == model}
            table.add_row(model, *(fmt_metric(values.get(n)) for n in positions))
        self.console.print(table)

    def render_relative(self, cells: Sequence[RelativeCell]) -> None:
        if not cells:
            return
        table = Table(title=f"Change against {cells[0].reference}")
        table.add_column("Model", style="cyan")
        table.add_column("K", justify="right")
        table.add_column("Position", justify="right")
        table.add_column("Recall", justify="right")
        table.add_column("MRR", justify="right")
        for c in cells:
            table.add_row(
                c.model,
                str(c.k),
                c.position,
                Text(fmt_change(c.recall_change), style=change_color(c.recall_change)),
                Text(fmt_change(c.mrr_change), style=change_color(c.mrr_change)),
            )
        self.console.print(table)

    def render_stats(self, stats: CorpusStats) -> None:
        table = Table(title="Corpus", show_header=False)
        table.add_column("Metric", style="cyan")
        table.add_column("Value", justify="right")
        table.add_row("Users", fmt_count(stats.num_users))
        table.add_row("Sessions", fmt_count(stats.num_sessions))
        table.add_row("Sessions per user", fmt_metric(stats.sessions_per_user, 2))
        table.add_row("Avg session length", fmt_metric(stats.avg_session_length, 2))
        table.add_row("Items", fmt_count(stats.num_items))
        self.console.print(table)

    def render_epochs(self, log: Sequence[EpochLog], best_epoch: int) -> None:
        table = Table(title="Training")
        table.add_column("Epoch", justify="right")
        table.add_column("Train loss", justify="right")
        table.add_column("Validation loss", justify="right")
        for entry in log:
            style = "bold green" if entry.epoch == best_epoch else ""
            table.add_row(
                str(entry.epoch),
                fmt_metric(entry.train_loss),
                fmt_metric(entry.valid_loss),
                style=style,
            )
        self.console.print(table)

    def render_recall_bars(self, report: EvalReport, k: int = 5) -> None:
        for model in report.models:
            try:
                cell = report.cell(model, k, ALL_POSITIONS)
            except KeyError:
                continue
            self.console.print(
                f"{model:<14} {recall_bar(cell.recall)} {fmt_metric(cell.recall)}"
            )
