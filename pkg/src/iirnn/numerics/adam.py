import logging
from dataclasses import dataclass

import numpy as np

from iirnn.errors import DimensionError, TrainingError
from iirnn.numerics.arrays import DenseArray, ensure_finite

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    m: DenseArray
    v: DenseArray
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, param: DenseArray, **hyper: float) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param), **hyper)


def adam_step(
    param: DenseArray, grad: DenseArray, state: AdamState, name: str = "param"
) -> DenseArray:
    """Update ``param`` and ``state`` in place and return ``param``."""
    if not (param.shape == grad.shape == state.m.shape == state.v.shape):
        raise DimensionError(
            f"{name}: param {param.shape}, grad {grad.shape}, "
            f"m {state.m.shape}, v {state.v.shape} differ",
            names=(name,),
        )
    if not ensure_finite(grad):
        raise TrainingError(f"non-finite gradient for {name}", parameter=name)

    state.t += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    param -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(param.dtype)
    return param


def clip_by_global_norm(grads: dict[str, DenseArray], max_norm: float) -> float:
    """Scale all gradients in place so their joint L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    squares = sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values())
    total = float(np.sqrt(squares))
    if total > max_norm > 0.0:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
        logger.debug("Clipped gradient norm %.4f to %.4f", total, max_norm)
    return total


class Adam:
    """One :class:`AdamState` per named parameter."""

    def __init__(
        self,
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.states: dict[str, AdamState] = {}

    def _state_for(self, name: str, param: DenseArray) -> AdamState:
        state = self.states.get(name)
        if state is None:
            state = AdamState.fresh(
                param, lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps
            )
            self.states[name] = state
        return state

    @property
    def t(self) -> int:
        return max((s.t for s in self.states.values()), default=0)

    def step(
        self, params: dict[str, DenseArray], grads: dict[str, DenseArray]
    ) -> None:
        # no parameter moves unless every gradient is finite
        for name, grad in grads.items():
            if not ensure_finite(grad):
                raise TrainingError(f"non-finite gradient for {name}", parameter=name)
        for name, grad in grads.items():
            adam_step(params[name], grad, self._state_for(name, params[name]), name)

    def state_arrays(self) -> dict[str, DenseArray]:
        out: dict[str, DenseArray] = {}
        for name, state in self.states.items():
            out[f"adam.m/{name}"] = state.m
            out[f"adam.v/{name}"] = state.v
        return out

    def load_state_arrays(self, arrays: dict[str, DenseArray], t: int) -> None:
        self.states.clear()
        for key, m in arrays.items():
            if not key.startswith("adam.m/"):
                continue
            name = key.removeprefix("adam.m/")
            v = arrays[f"adam.v/{name}"]
            self.states[name] = AdamState(
                m=m.copy(),
                v=v.copy(),
                t=t,
                lr=self.lr,
                beta1=self.beta1,
                beta2=self.beta2,
                eps=self.eps,
            )
