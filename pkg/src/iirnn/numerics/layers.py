import numpy as np

from iirnn.errors import ConfigError, DimensionError
from iirnn.numerics.arrays import FLOAT, DenseArray, ensure_last_dim, outer_sum, row_sum


def output_layer_forward(h: DenseArray, w: DenseArray, b: DenseArray) -> DenseArray:
    """Scale a hidden state up to one score per item: ``W h + b``."""
    if w.ndim != 2 or b.shape != (w.shape[0],):
        raise DimensionError(
            f"output W {w.shape} and b {b.shape} do not match", names=("W", "b")
        )
    ensure_last_dim("h", h, w.shape[1], "W")
    return h @ w.T + b


def output_layer_backward(
    grad_logits: DenseArray, h: DenseArray, w: DenseArray
) -> tuple[DenseArray, DenseArray, DenseArray]:
    """Returns (grad_h, grad_W, grad_b)."""
    return grad_logits @ w, outer_sum(grad_logits, h), row_sum(grad_logits)


def softmax_cross_entropy(
    logits: DenseArray, target: int | np.ndarray
) -> tuple[float | np.ndarray, DenseArray]:
    """Cross-entropy of softmax(logits) against 1-based item ids.

    A vector of logits takes one target and returns a scalar loss; a
    (B, N) matrix takes B targets and returns B losses. Accumulates in
    float64 and returns the gradient in the logits dtype.
    """
    n = logits.shape[-1]
    targets = np.asarray(target)
    if targets.shape != logits.shape[:-1]:
        raise DimensionError(
            f"targets {targets.shape} do not match logits {logits.shape}",
            names=("target", "logits"),
        )
    if np.any(targets < 1) or np.any(targets > n):
        raise IndexError(f"target outside 1..{n}: {target}")

    z = logits.astype(np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    log_probs = shifted - lse
    cols = targets - 1
    if logits.ndim == 1:
        loss: float | np.ndarray = float(-log_probs[cols])
        grad = np.exp(log_probs)
        grad[cols] -= 1.0
    else:
        rows = np.arange(logits.shape[0])
        loss = -log_probs[rows, cols]
        grad = np.exp(log_probs)
        grad[rows, cols] -= 1.0
    return loss, grad.astype(logits.dtype)


def make_dropout_mask(
    size: int | tuple[int, ...],
    keep_prob: float,
    rng: np.random.Generator,
    dtype: type = FLOAT,
) -> DenseArray:
    """Inverted dropout: 0 with probability ``1 - keep_prob``, else ``1/keep_prob``."""
    if not 0.0 < keep_prob <= 1.0:
        raise ConfigError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if keep_prob == 1.0:
        return np.ones(size, dtype=dtype)
    keep = rng.random(size) < keep_prob
    return (keep / keep_prob).astype(dtype)
