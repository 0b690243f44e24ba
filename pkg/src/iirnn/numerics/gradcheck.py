import logging
from collections.abc import Callable

import numpy as np

from iirnn.numerics.arrays import DenseArray

logger = logging.getLogger(__name__)

type LossAndGrads = tuple[float, dict[str, DenseArray]]


def gradient_check(
    f: Callable[[dict[str, DenseArray]], LossAndGrads],
    point: dict[str, DenseArray],
    step: float = 1e-5,
    names: list[str] | None = None,
) -> float:
    """Worst relative error between analytic and central-difference gradients.

    ``f`` maps named arrays to ``(loss, grads)``. It is evaluated on a
    float64 copy of ``point``, which is never modified. Arrays absent from
    the returned grads are taken to have zero gradient. The relative error
    of a coordinate is ``|a - n| / max(|a|, |n|, 1e-4)``.
    """
    shadow = {k: np.array(v, dtype=np.float64) for k, v in point.items()}
    _, analytic = f(shadow)
    worst = 0.0
    worst_at: tuple[str, tuple[int, ...]] | None = None
    for name in names or list(shadow):
        arr = shadow[name]
        grad = analytic.get(name)
        for idx in np.ndindex(arr.shape):
            original = arr[idx]
            arr[idx] = original + step
            plus, _ = f(shadow)
            arr[idx] = original - step
            minus, _ = f(shadow)
            arr[idx] = original
            numeric = (float(plus) - float(minus)) / (2.0 * step)
            a = 0.0 if grad is None else float(grad[idx])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-4)
            if err > worst:
                worst = err
                worst_at = (name, idx)
    if worst_at is not None:
        logger.debug("Worst gradient error %.3e at %s%s", worst, *worst_at)
    return worst
