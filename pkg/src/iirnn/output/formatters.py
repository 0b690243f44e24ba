def fmt_metric(value: float | None, decimals: int = 4) -> str:
    if value is None:
        return "N/A"
    return f"{value:.{decimals}f}"


def fmt_change(value: float | None, decimals: int = 1) -> str:
    """Relative change as a signed percentage (0.293 -> "+29.3%")."""
    if value is None:
        return "N/A"
    return f"{value * 100:+.{decimals}f}%"


def fmt_count(value: int | None) -> str:
    if value is None:
        return "N/A"
    return f"{value:,}"


def change_color(value: float | None) -> str:
    if value is None or value == 0:
        return "yellow"
    return "green" if value > 0 else "red"


def recall_bar(recall: float, width: int = 10) -> str:
    filled = round(recall * width)
    return "█" * filled + "░" * (width - filled)
