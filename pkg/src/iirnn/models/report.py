from pydantic import BaseModel, Field

ALL_POSITIONS = "all"


class MetricCell(BaseModel):
    model: str
    k: int
    position: str
    recall: float = Field(ge=0.0, le=1.0)
    mrr: float = Field(ge=0.0, le=1.0)
    count: int = Field(ge=0)


class EvalReport(BaseModel):
    """Recall/MRR per model, K and position.

    ``position`` is a stringified integer n (predictions at steps <= n) or
    ``"all"``.
    """

    cells: list[MetricCell] = Field(default_factory=list)

    @property
    def models(self) -> list[str]:
        seen: dict[str, None] = {}
        for cell in self.cells:
            seen.setdefault(cell.model, None)
        return list(seen)

    def cell(self, model: str, k: int, position: str | int) -> MetricCell:
        pos = str(position)
        for c in self.cells:
            if c.model == model and c.k == k and c.position == pos:
                return c
        raise KeyError((model, k, pos))

    def for_model(self, model: str) -> list[MetricCell]:
        return [c for c in self.cells if c.model == model]

    def merged(self, other: "EvalReport") -> "EvalReport":
        return EvalReport(cells=[*self.cells, *other.cells])
