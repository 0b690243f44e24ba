import numpy as np

from iirnn.errors import DimensionError

type DenseArray = np.ndarray

FLOAT = np.float32


def sigmoid(x: DenseArray) -> DenseArray:
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def ensure_shape(name: str, arr: DenseArray, shape: tuple[int, ...]) -> None:
    if arr.shape != shape:
        raise DimensionError(
            f"{name} has shape {arr.shape}, expected {shape}", names=(name,)
        )


def ensure_last_dim(name: str, arr: DenseArray, size: int, other: str) -> None:
    if arr.ndim == 0 or arr.shape[-1] != size:
        raise DimensionError(
            f"{name} has shape {arr.shape}, incompatible with {other} ({size})",
            names=(name, other),
        )


def ensure_finite(arr: DenseArray) -> bool:
    return bool(np.all(np.isfinite(arr)))


def outer_sum(a: DenseArray, b: DenseArray) -> DenseArray:
    """Sum of outer products over a leading batch axis, or a plain outer."""
    if a.ndim == 1:
        return np.outer(a, b)
    return a.T @ b


def row_sum(a: DenseArray) -> DenseArray:
    return a if a.ndim == 1 else a.sum(axis=0)
