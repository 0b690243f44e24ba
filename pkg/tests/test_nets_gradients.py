import math

import numpy as np
import pytest

from iirnn.errors import UsageError
from iirnn.models.common import Variant
from iirnn.nets import (
    ModelParams,
    SessionRepr,
    batch_loss_and_grads,
    session_loss_and_grads,
    session_repr_avg,
)
from iirnn.numerics import gradient_check
from iirnn.numerics.adam import Adam


def tiny(variant, seed=0, intra_layers=1, inter_layers=1):
    rng = np.random.default_rng(seed)
    return ModelParams.init(
        variant,
        5,
        3,
        3,
        rng,
        scale=0.5,
        intra_layers=intra_layers,
        inter_layers=inter_layers,
        dtype=np.float64,
    )


def past_sessions(params, seed=0):
    rng = np.random.default_rng(seed + 100)
    if params.variant is Variant.II_AP:
        return [
            session_repr_avg([1, 3], params.embeddings, 0),
            session_repr_avg([2, 5, 4], params.embeddings, 1),
        ]
    return [SessionRepr(rng.normal(size=params.h), start) for start in (0, 1)]


def random_buffer(params, n, rng):
    out = []
    for start in range(int(rng.integers(0, 3))):
        if params.variant is Variant.II_AP:
            items = rng.integers(1, n + 1, size=int(rng.integers(1, 4))).tolist()
            out.append(session_repr_avg(items, params.embeddings, start))
        else:
            out.append(SessionRepr(rng.normal(size=params.h), start))
    return out


def check(params, sessions, buffers, keep_prob=1.0):
    variant = params.variant

    def f(arrays):
        p = ModelParams.from_named(variant, arrays)
        rng = np.random.default_rng(9)
        result = batch_loss_and_grads(p, sessions, buffers, keep_prob, rng)
        return result.loss, result.grads

    return gradient_check(f, params.named())


class TestSessionLoss:
    def test_untrained_loss_near_uniform(self):
        rng = np.random.default_rng(0)
        params = ModelParams.init(Variant.INTRA_ONLY, 4, 3, 3, rng)
        loss, _ = session_loss_and_grads([], [1, 2, 3, 4], params)
        assert abs(loss - math.log(4)) < 0.01

    def test_single_item_session(self):
        with pytest.raises(UsageError):
            session_loss_and_grads([], [1], tiny(Variant.INTRA_ONLY))

    def test_buffer_count_must_match(self):
        with pytest.raises(UsageError):
            batch_loss_and_grads(tiny(Variant.II_LHS), [[1, 2]], [])

    def test_padding_row_gets_no_gradient(self):
        params = tiny(Variant.II_AP)
        _, grads = session_loss_and_grads(
            past_sessions(params), [1, 2, 3], params
        )
        np.testing.assert_array_equal(grads["embeddings"][0], 0.0)


class TestGradientCheck:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_single_session(self, variant):
        params = tiny(variant, seed=1)
        buffer = past_sessions(params) if variant.uses_inter else []
        assert check(params, [[1, 4, 2, 5]], [buffer]) < 1e-4

    @pytest.mark.parametrize("seed", range(100))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        variant = list(Variant)[seed % len(Variant)]
        n = int(rng.integers(3, 8))
        size = int(rng.integers(2, 5))
        params = ModelParams.init(
            variant, n, size, size, rng, scale=0.5, dtype=np.float64
        )
        sessions, buffers = [], []
        for _ in range(int(rng.integers(1, 3))):
            length = int(rng.integers(2, 5))
            sessions.append(rng.integers(1, n + 1, size=length).tolist())
            buffers.append(random_buffer(params, n, rng) if variant.uses_inter else [])
        assert check(params, sessions, buffers) < 1e-4

    @pytest.mark.parametrize("variant", [Variant.II_AP, Variant.II_LHS])
    def test_ragged_batch(self, variant):
        params = tiny(variant, seed=2)
        buffers = [past_sessions(params), [], past_sessions(params)[:1]]
        sessions = [[1, 2, 3, 4], [5, 1], [2, 3, 1]]
        assert check(params, sessions, buffers) < 1e-4

    def test_stacked_layers(self):
        params = tiny(Variant.II_LHS, seed=3, intra_layers=2, inter_layers=2)
        assert check(params, [[3, 1, 2]], [past_sessions(params)]) < 1e-4

    def test_with_dropout(self):
        params = tiny(Variant.II_AP, seed=4)
        buffers = [past_sessions(params), past_sessions(params)]
        assert check(params, [[1, 2, 3], [4, 5]], buffers, keep_prob=0.7) < 1e-4

    def test_intra_only_ignores_buffer(self):
        params = tiny(Variant.INTRA_ONLY)
        a = batch_loss_and_grads(params, [[1, 2, 3]], [[]]).loss
        fake = [SessionRepr(np.ones(3), 0)]
        b = batch_loss_and_grads(params, [[1, 2, 3]], [fake]).loss
        assert a == b


class TestOverfit:
    def test_loss_decreases_on_fixed_session(self):
        rng = np.random.default_rng(0)
        params = ModelParams.init(Variant.II_LHS, 6, 8, 8, rng, dtype=np.float64)
        buffer = [SessionRepr(np.full(8, 0.3), 0)]
        opt = Adam(lr=0.002)
        losses = []
        for _ in range(50):
            loss, grads = session_loss_and_grads(buffer, [1, 2, 3, 4, 5], params)
            losses.append(loss)
            opt.step(params.named(), grads)
        assert all(b < a for a, b in zip(losses, losses[1:], strict=False))
