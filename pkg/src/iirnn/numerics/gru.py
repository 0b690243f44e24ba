"""GRU cell and masked multi-step GRU, forward and backward.

Gate equations::

    z = sigmoid(W_z x + U_z h + b_z)
    r = sigmoid(W_r x + U_r h + b_r)
    c = tanh(W_c x + U_c (r * h) + b_c)
    h' = ((1 - z) * h + z * c) * mask

Every op accepts a single vector or a leading batch axis and keeps the
input dtype.
"""

from dataclasses import dataclass, fields

import numpy as np

from iirnn.errors import DimensionError, UsageError
from iirnn.numerics.arrays import (
    FLOAT,
    DenseArray,
    ensure_last_dim,
    ensure_shape,
    outer_sum,
    row_sum,
    sigmoid,
)

PARAM_NAMES = ("w_z", "w_r", "w_c", "u_z", "u_r", "u_c", "b_z", "b_r", "b_c")


@dataclass
class GruParams:
    w_z: DenseArray
    w_r: DenseArray
    w_c: DenseArray
    u_z: DenseArray
    u_r: DenseArray
    u_c: DenseArray
    b_z: DenseArray
    b_r: DenseArray
    b_c: DenseArray

    def __post_init__(self) -> None:
        h, d = self.w_z.shape
        for name in ("w_z", "w_r", "w_c"):
            ensure_shape(name, getattr(self, name), (h, d))
        for name in ("u_z", "u_r", "u_c"):
            ensure_shape(name, getattr(self, name), (h, h))
        for name in ("b_z", "b_r", "b_c"):
            ensure_shape(name, getattr(self, name), (h,))

    @property
    def input_dim(self) -> int:
        return self.w_z.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_z.shape[0]

    @classmethod
    def zeros(cls, d: int, h: int, dtype: type = FLOAT) -> "GruParams":
        return cls(
            **{
                name: np.zeros(_shape_of(name, d, h), dtype=dtype)
                for name in PARAM_NAMES
            }
        )

    @classmethod
    def init(
        cls,
        d: int,
        h: int,
        rng: np.random.Generator,
        scale: float = 0.1,
        dtype: type = FLOAT,
    ) -> "GruParams":
        """Uniform(-scale, scale) matrices, zero biases."""
        arrays = {}
        for name in PARAM_NAMES:
            shape = _shape_of(name, d, h)
            if name.startswith("b_"):
                arrays[name] = np.zeros(shape, dtype=dtype)
            else:
                arrays[name] = rng.uniform(-scale, scale, size=shape).astype(dtype)
        return cls(**arrays)

    def named(self) -> dict[str, DenseArray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_named(cls, arrays: dict[str, DenseArray]) -> "GruParams":
        missing = [n for n in PARAM_NAMES if n not in arrays]
        if missing:
            raise DimensionError(f"missing GRU arrays: {missing}", names=tuple(missing))
        return cls(**{n: arrays[n] for n in PARAM_NAMES})

    def astype(self, dtype: type) -> "GruParams":
        return GruParams(**{n: a.astype(dtype) for n, a in self.named().items()})

    def zeros_like(self) -> "GruParams":
        return GruParams(**{n: np.zeros_like(a) for n, a in self.named().items()})

    def add_(self, other: "GruParams") -> None:
        for name, arr in self.named().items():
            arr += getattr(other, name)


def _shape_of(name: str, d: int, h: int) -> tuple[int, ...]:
    if name.startswith("w_"):
        return (h, d)
    if name.startswith("u_"):
        return (h, h)
    return (h,)


@dataclass
class GruCache:
    x: DenseArray
    h_prev: DenseArray
    z: DenseArray
    r: DenseArray
    c: DenseArray
    mask: DenseArray | None
    params: GruParams


def gru_cell_forward(
    x: DenseArray,
    h_prev: DenseArray,
    p: GruParams,
    dropout_mask: DenseArray | None = None,
) -> tuple[DenseArray, GruCache]:
    ensure_last_dim("x", x, p.input_dim, "w_z")
    ensure_last_dim("h_prev", h_prev, p.hidden_dim, "u_z")
    if x.shape[:-1] != h_prev.shape[:-1]:
        raise DimensionError(
            f"x batch {x.shape[:-1]} != h_prev batch {h_prev.shape[:-1]}",
            names=("x", "h_prev"),
        )
    if dropout_mask is not None and dropout_mask.shape != h_prev.shape:
        raise DimensionError(
            f"dropout_mask has shape {dropout_mask.shape}, expected {h_prev.shape}",
            names=("dropout_mask",),
        )

    z = sigmoid(x @ p.w_z.T + h_prev @ p.u_z.T + p.b_z)
    r = sigmoid(x @ p.w_r.T + h_prev @ p.u_r.T + p.b_r)
    c = np.tanh(x @ p.w_c.T + (r * h_prev) @ p.u_c.T + p.b_c)
    h_new = (1.0 - z) * h_prev + z * c
    if dropout_mask is not None:
        h_new = h_new * dropout_mask
    return h_new, GruCache(x, h_prev, z, r, c, dropout_mask, p)


def gru_cell_backward(
    grad_h_new: DenseArray, cache: GruCache | None
) -> tuple[DenseArray, DenseArray, GruParams]:
    """Gradients of one step w.r.t. ``x``, ``h_prev`` and every parameter."""
    if cache is None:
        raise UsageError("gru_cell_backward needs the cache of a forward call")
    if grad_h_new.shape != cache.h_prev.shape:
        raise DimensionError(
            f"grad_h_new has shape {grad_h_new.shape}, "
            f"forward state was {cache.h_prev.shape}",
            names=("grad_h_new",),
        )
    p = cache.params
    x, h_prev, z, r, c = cache.x, cache.h_prev, cache.z, cache.r, cache.c
    g = grad_h_new if cache.mask is None else grad_h_new * cache.mask

    dc = g * z
    dz = g * (c - h_prev)
    dh_prev = g * (1.0 - z)

    da_c = dc * (1.0 - c * c)
    drh = da_c @ p.u_c
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    da_r = dr * r * (1.0 - r)
    da_z = dz * z * (1.0 - z)

    dx = da_z @ p.w_z + da_r @ p.w_r + da_c @ p.w_c
    dh_prev = dh_prev + da_z @ p.u_z + da_r @ p.u_r

    grads = GruParams(
        w_z=outer_sum(da_z, x),
        w_r=outer_sum(da_r, x),
        w_c=outer_sum(da_c, x),
        u_z=outer_sum(da_z, h_prev),
        u_r=outer_sum(da_r, h_prev),
        u_c=outer_sum(da_c, r * h_prev),
        b_z=row_sum(da_z),
        b_r=row_sum(da_r),
        b_c=row_sum(da_c),
    )
    return dx, dh_prev, grads


@dataclass
class SequenceCache:
    steps: list[GruCache]
    step_mask: DenseArray
    params: GruParams


def gru_sequence_forward(
    xs: DenseArray,
    h0: DenseArray,
    p: GruParams,
    step_mask: DenseArray | None = None,
    dropout_masks: DenseArray | None = None,
) -> tuple[DenseArray, SequenceCache]:
    """Run a GRU over ``xs`` of shape (B, T, d) from ``h0`` (B, h).

    Rows where ``step_mask[b, t]`` is 0 carry the previous state through
    step t unchanged. Returns states of shape (B, T, h).
    """
    if xs.ndim != 3:
        raise DimensionError(f"xs must be (B, T, d), got {xs.shape}", names=("xs",))
    batch, steps, _ = xs.shape
    ensure_shape("h0", h0, (batch, p.hidden_dim))
    if step_mask is None:
        step_mask = np.ones((batch, steps), dtype=xs.dtype)
    ensure_shape("step_mask", step_mask, (batch, steps))
    if dropout_masks is not None:
        ensure_shape("dropout_masks", dropout_masks, (batch, steps, p.hidden_dim))

    mask = step_mask.astype(xs.dtype)
    hs = np.empty((batch, steps, p.hidden_dim), dtype=xs.dtype)
    caches: list[GruCache] = []
    h = h0
    for t in range(steps):
        drop = None if dropout_masks is None else dropout_masks[:, t]
        h_new, cache = gru_cell_forward(xs[:, t], h, p, drop)
        m = mask[:, t, None]
        h = m * h_new + (1.0 - m) * h
        hs[:, t] = h
        caches.append(cache)
    return hs, SequenceCache(caches, mask, p)


def gru_sequence_backward(
    grad_hs: DenseArray,
    cache: SequenceCache,
    grad_h_last: DenseArray | None = None,
) -> tuple[DenseArray, DenseArray, GruParams]:
    """Backward through :func:`gru_sequence_forward`.

    ``grad_hs`` is the gradient w.r.t. every returned state; ``grad_h_last``
    adds to the final state. Returns (grad_xs, grad_h0, grad_params).
    """
    batch, steps, hidden = grad_hs.shape
    if steps != len(cache.steps):
        raise DimensionError(
            f"grad_hs covers {steps} steps, cache has {len(cache.steps)}",
            names=("grad_hs",),
        )
    d = cache.params.input_dim
    grad_xs = np.zeros((batch, steps, d), dtype=grad_hs.dtype)
    grads = cache.params.zeros_like()
    carry = (
        np.zeros((batch, hidden), dtype=grad_hs.dtype)
        if grad_h_last is None
        else grad_h_last.copy()
    )
    for t in range(steps - 1, -1, -1):
        g = grad_hs[:, t] + carry
        m = cache.step_mask[:, t, None]
        dx, dh_prev, step_grads = gru_cell_backward(g * m, cache.steps[t])
        grad_xs[:, t] = dx
        carry = dh_prev + g * (1.0 - m)
        grads.add_(step_grads)
    return grad_xs, carry, grads
