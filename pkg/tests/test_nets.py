import logging

import numpy as np
import pytest

from iirnn.errors import ConfigError, InferenceError, UsageError
from iirnn.models.common import Variant
from iirnn.models.corpus import Session, UserHistory
from iirnn.nets import (
    ModelParams,
    RnnRecommender,
    SessionRepr,
    UserReprBuffer,
    inter_forward,
    intra_forward,
    predict_next,
    replay_buffer,
    session_logits,
    session_repr_avg,
    session_repr_lhs,
)
from iirnn.numerics.gru import gru_cell_forward
from iirnn.numerics.layers import output_layer_forward


def make_params(variant, n=5, d=3, h=3, seed=0, scale=0.5, dtype=np.float64):
    rng = np.random.default_rng(seed)
    return ModelParams.init(variant, n, d, h, rng, scale=scale, dtype=dtype)


def zero_params(variant, n=3, d=2, h=2):
    params = make_params(variant, n, d, h)
    for arr in params.named().values():
        arr[...] = 0.0
    return params


def lhs_buffer(reprs, g=15):
    buffer = UserReprBuffer(g)
    for i, vec in enumerate(reprs):
        buffer.append(SessionRepr(np.asarray(vec, dtype=np.float64), i))
    return buffer


class TestIntraForward:
    def test_zero_params_give_bias(self):
        params = zero_params(Variant.INTRA_ONLY, n=4)
        params.output_b[:] = [0.1, 0.2, 0.3, 0.4]
        out = intra_forward([2], np.zeros(2), params)
        np.testing.assert_allclose(out.logits[0], params.output_b)

    def test_deterministic(self):
        params = make_params(Variant.INTRA_ONLY)
        h0 = np.full(3, 0.1)
        a = intra_forward([1, 3, 2], h0, params).logits
        b = intra_forward([1, 3, 2], h0, params).logits
        assert a.tobytes() == b.tobytes()

    def test_matches_unrolled_steps(self):
        params = make_params(Variant.INTRA_ONLY, seed=4)
        h = np.array([0.2, -0.1, 0.05])
        out = intra_forward([4, 1, 5], h, params)
        for t, item in enumerate([4, 1, 5]):
            h, _ = gru_cell_forward(params.embeddings[item], h, params.intra[0])
            expected = output_layer_forward(h, params.output_w, params.output_b)
            np.testing.assert_allclose(out.logits[t], expected, atol=1e-6)
        np.testing.assert_allclose(out.final, h, atol=1e-12)

    @pytest.mark.parametrize("item", [0, 6])
    def test_unknown_item(self, item):
        with pytest.raises(InferenceError):
            intra_forward([1, item], np.zeros(3), make_params(Variant.INTRA_ONLY))

    def test_two_layers(self):
        rng = np.random.default_rng(0)
        params = ModelParams.init(Variant.INTRA_ONLY, 5, 3, 4, rng, intra_layers=2)
        out = intra_forward([1, 2], np.zeros(4, np.float32), params)
        assert out.logits.shape == (2, 5)
        assert out.logits.dtype == np.float32


class TestSessionRepresentations:
    def test_average(self):
        emb = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(session_repr_avg([1, 2], emb).vector, [0.5, 0.5])
        np.testing.assert_allclose(
            session_repr_avg([2, 1], emb).vector, session_repr_avg([1, 2], emb).vector
        )
        np.testing.assert_allclose(
            session_repr_avg([1, 1, 2], emb).vector, [2 / 3, 1 / 3]
        )

    def test_average_of_empty_session(self):
        with pytest.raises(UsageError):
            session_repr_avg([], np.zeros((3, 2)))

    def test_last_hidden_state(self):
        rep = session_repr_lhs(np.zeros(4), session_start=7)
        np.testing.assert_array_equal(rep.vector, np.zeros(4))
        assert rep.width == 4 and rep.session_start == 7

    def test_last_hidden_state_depends_on_order(self):
        params = make_params(Variant.II_LHS, seed=2)
        _, ab = session_logits([], [1, 2], params)
        _, ba = session_logits([], [2, 1], params)
        assert not np.allclose(ab, ba)


class TestUserReprBuffer:
    def test_keeps_most_recent(self):
        buffer = lhs_buffer([[float(i)] for i in range(5)], g=3)
        assert len(buffer) == 3
        assert [r.session_start for r in buffer] == [2, 3, 4]

    def test_rejects_older_session(self):
        buffer = lhs_buffer([[0.0], [1.0]])
        with pytest.raises(UsageError):
            buffer.append(SessionRepr(np.zeros(1), session_start=0))

    def test_accepts_same_start_time(self):
        buffer = lhs_buffer([[0.0], [1.0]])
        buffer.append(SessionRepr(np.full(1, 2.0), session_start=1))
        assert [r.session_start for r in buffer] == [0, 1, 1]

    def test_capacity_must_be_positive(self):
        with pytest.raises(UsageError):
            UserReprBuffer(0)


class TestInterForward:
    def test_empty_buffer(self):
        params = make_params(Variant.II_LHS)
        np.testing.assert_array_equal(inter_forward(UserReprBuffer(5), params), 0.0)

    def test_zero_params(self):
        params = zero_params(Variant.II_LHS)
        h0 = inter_forward(lhs_buffer([[0.4, -0.3]]), params)
        np.testing.assert_array_equal(h0, 0.0)

    def test_matches_unrolled_steps(self):
        params = make_params(Variant.II_LHS, seed=5)
        rng = np.random.default_rng(5)
        vectors = rng.normal(size=(3, 3))
        h = np.zeros(3)
        for vec in vectors:
            h, _ = gru_cell_forward(vec, h, params.inter[0])
        np.testing.assert_allclose(
            inter_forward(lhs_buffer(vectors), params), h, atol=1e-6
        )

    def test_width_mismatch(self):
        params = make_params(Variant.II_LHS)
        with pytest.raises(ConfigError):
            inter_forward(lhs_buffer([[1.0, 2.0]]), params)

    def test_average_pooling_ignores_item_order(self):
        params = make_params(Variant.II_AP, seed=6)
        a, b = UserReprBuffer(3), UserReprBuffer(3)
        a.append(session_repr_avg([1, 2, 3], params.embeddings, 0))
        b.append(session_repr_avg([3, 1, 2], params.embeddings, 0))
        np.testing.assert_allclose(
            inter_forward(a, params), inter_forward(b, params), atol=1e-12
        )


class TestPredictNext:
    def test_top_two(self):
        params = zero_params(Variant.INTRA_ONLY)
        params.output_b[:] = [0.1, 0.9, 0.5]
        assert predict_next([], [1], 2, params).items == [2, 3]

    def test_ties_by_id(self):
        params = zero_params(Variant.INTRA_ONLY)
        assert predict_next([], [1], 3, params).items == [1, 2, 3]

    def test_k_equal_to_items(self):
        params = make_params(Variant.II_LHS, seed=1)
        recs = predict_next([], [1, 2], 5, params)
        assert sorted(recs.items) == [1, 2, 3, 4, 5]
        assert recs.scores == sorted(recs.scores, reverse=True)

    def test_k_above_items_clipped(self, caplog):
        params = make_params(Variant.INTRA_ONLY)
        with caplog.at_level(logging.WARNING):
            recs = predict_next([], [1], 50, params)
        assert len(recs) == 5
        assert "clipping" in caplog.text

    def test_k_below_one(self):
        with pytest.raises(UsageError):
            predict_next([], [1], 0, make_params(Variant.INTRA_ONLY))

    def test_intra_only_equals_empty_inter(self):
        ii = make_params(Variant.II_LHS, seed=3)
        intra = ModelParams(
            Variant.INTRA_ONLY, ii.embeddings, ii.intra, ii.output_w, ii.output_b
        )
        a, _ = session_logits([], [2, 4, 1], ii)
        b, _ = session_logits([], [2, 4, 1], intra)
        np.testing.assert_array_equal(a, b)


class TestRnnRecommender:
    def history(self):
        return UserHistory(
            "u",
            [Session([1, 2, 3], 0), Session([3, 4], 100)],
            [Session([2, 5, 1], 200), Session([1, 2], 300)],
        )

    def test_replays_training_sessions(self):
        params = make_params(Variant.II_LHS)
        sessions = self.history().train_sessions
        buffer = replay_buffer(UserReprBuffer(15), sessions, params)
        assert len(buffer) == 2
        _, final = session_logits([], [1, 2, 3], params)
        np.testing.assert_allclose(buffer[0].vector, final)

    def test_one_list_per_prediction(self):
        params = make_params(Variant.II_LHS)
        model = RnnRecommender(params, g=15)
        context = model.user_context(self.history())
        recs = model.recommend_session(context, self.history().test_sessions[0], 3)
        assert len(recs) == 2
        assert all(len(r) == 3 for r in recs)
        assert len(context) == 3

    def test_first_list_uses_replayed_buffer(self):
        params = make_params(Variant.II_AP, seed=8)
        model = RnnRecommender(params, g=15)
        history = self.history()
        context = model.user_context(history)
        expected = predict_next(list(context), [2], 4, params)
        recs = model.recommend_session(context, history.test_sessions[0], 4)
        assert recs[0].items == expected.items
        assert model.name == "ii-rnn-ap"

    def test_intra_only_keeps_no_state(self):
        model = RnnRecommender(make_params(Variant.INTRA_ONLY), g=15)
        context = model.user_context(self.history())
        model.recommend_session(context, self.history().test_sessions[0], 2)
        assert len(context) == 0
