from dataclasses import dataclass, field

import numpy as np

from iirnn.errors import ConfigError, DimensionError
from iirnn.models.common import Variant
from iirnn.numerics.arrays import FLOAT, DenseArray, ensure_shape
from iirnn.numerics.gru import PARAM_NAMES, GruParams


@dataclass
class ModelParams:
    """All trainable arrays of an intra or inter-intra model.

    ``embeddings`` row 0 is padding and stays zero. ``inter`` is empty for
    the intra-only variant.
    """

    variant: Variant
    embeddings: DenseArray
    intra: list[GruParams]
    output_w: DenseArray
    output_b: DenseArray
    inter: list[GruParams] = field(default_factory=list)

    def __post_init__(self) -> None:
        n, h = self.output_w.shape
        ensure_shape("output.b", self.output_b, (n,))
        ensure_shape("embeddings", self.embeddings, (n + 1, self.embeddings.shape[1]))
        if not self.intra:
            raise ConfigError("at least one intra GRU layer is required")
        if self.intra[0].input_dim != self.d:
            raise DimensionError("intra.0 input width != embedding width", ("intra.0",))
        for i, layer in enumerate(self.intra):
            if layer.hidden_dim != h:
                raise DimensionError(f"intra.{i} hidden width != {h}", (f"intra.{i}",))
        if self.variant.uses_inter != bool(self.inter):
            raise ConfigError(f"variant {self.variant} and inter layers do not match")
        if self.inter:
            if self.inter[0].input_dim != self.repr_width:
                raise ConfigError(
                    f"inter.0 takes width {self.inter[0].input_dim}, "
                    f"{self.variant} representations have width {self.repr_width}"
                )
            for i, layer in enumerate(self.inter):
                if layer.hidden_dim != h:
                    raise DimensionError(
                        f"inter.{i} hidden width != {h}", (f"inter.{i}",)
                    )

    @property
    def num_items(self) -> int:
        return self.output_w.shape[0]

    @property
    def d(self) -> int:
        return self.embeddings.shape[1]

    @property
    def h(self) -> int:
        return self.output_w.shape[1]

    @property
    def repr_width(self) -> int:
        return self.d if self.variant is Variant.II_AP else self.h

    @property
    def dtype(self) -> np.dtype:
        return self.embeddings.dtype

    @classmethod
    def init(
        cls,
        variant: Variant,
        num_items: int,
        d: int,
        h: int,
        rng: np.random.Generator,
        scale: float = 0.1,
        intra_layers: int = 1,
        inter_layers: int = 1,
        dtype: type = FLOAT,
    ) -> "ModelParams":
        """Uniform(-scale, scale) weights and embeddings, zero biases."""
        embeddings = rng.uniform(-scale, scale, size=(num_items + 1, d)).astype(dtype)
        embeddings[0] = 0.0
        intra = [
            GruParams.init(d if i == 0 else h, h, rng, scale, dtype)
            for i in range(intra_layers)
        ]
        inter: list[GruParams] = []
        if variant.uses_inter:
            r = d if variant is Variant.II_AP else h
            inter = [
                GruParams.init(r if i == 0 else h, h, rng, scale, dtype)
                for i in range(inter_layers)
            ]
        output_w = rng.uniform(-scale, scale, size=(num_items, h)).astype(dtype)
        output_b = np.zeros(num_items, dtype=dtype)
        return cls(variant, embeddings, intra, output_w, output_b, inter)

    def named(self) -> dict[str, DenseArray]:
        """Flat name → array view; names are stable across runs."""
        out: dict[str, DenseArray] = {"embeddings": self.embeddings}
        for level, layers in (("intra", self.intra), ("inter", self.inter)):
            for i, layer in enumerate(layers):
                for name, arr in layer.named().items():
                    out[f"{level}.{i}.{name}"] = arr
        out["output.w"] = self.output_w
        out["output.b"] = self.output_b
        return out

    @classmethod
    def from_named(
        cls, variant: Variant, arrays: dict[str, DenseArray]
    ) -> "ModelParams":
        def layers(level: str) -> list[GruParams]:
            out = []
            i = 0
            while f"{level}.{i}.{PARAM_NAMES[0]}" in arrays:
                out.append(
                    GruParams.from_named(
                        {n: arrays[f"{level}.{i}.{n}"] for n in PARAM_NAMES}
                    )
                )
                i += 1
            return out

        try:
            return cls(
                variant=variant,
                embeddings=arrays["embeddings"],
                intra=layers("intra"),
                output_w=arrays["output.w"],
                output_b=arrays["output.b"],
                inter=layers("inter"),
            )
        except KeyError as exc:
            raise DimensionError(f"missing parameter array {exc}") from exc

    def astype(self, dtype: type) -> "ModelParams":
        return ModelParams.from_named(
            self.variant, {k: v.astype(dtype) for k, v in self.named().items()}
        )

    def copy(self) -> "ModelParams":
        return ModelParams.from_named(
            self.variant, {k: v.copy() for k, v in self.named().items()}
        )

    def zero_grads(self) -> dict[str, DenseArray]:
        return {k: np.zeros_like(v) for k, v in self.named().items()}
