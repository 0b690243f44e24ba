import numpy as np
import pytest

from iirnn.config import TrainConfig
from iirnn.errors import TrainingError
from iirnn.evaluation import evaluate
from iirnn.models.common import Variant
from iirnn.models.corpus import Interaction
from iirnn.nets import RnnRecommender
from iirnn.processing import preprocess
from iirnn.training.trainer import Trainer, split_validation, train


def tiny_config(**overrides) -> TrainConfig:
    values = {
        "d": 4,
        "h": 6,
        "g": 3,
        "batch_size": 2,
        "max_epochs": 3,
        "lr": 0.01,
        "seed": 1,
        "validation_fraction": 0.0,
    }
    values.update(overrides)
    return TrainConfig(**values)


class TestSplitValidation:
    def test_holds_out_last_sessions(self, small_corpus):
        train_users, valid = split_validation(small_corpus.users, 0.34)
        for original, kept, held in zip(small_corpus.users, train_users, valid):
            assert kept.train_sessions == original.train_sessions[:2]
            assert held == original.train_sessions[2:]
            assert kept.test_sessions == []

    def test_zero_fraction(self, small_corpus):
        train_users, valid = split_validation(small_corpus.users, 0.0)
        assert valid == [[], [], []]
        assert [len(u.train_sessions) for u in train_users] == [3, 3, 3]


class TestTrainer:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_deterministic(self, small_corpus, variant):
        cfg = tiny_config(variant=variant, keep_prob=0.8)
        a = train(cfg, small_corpus)
        b = train(cfg, small_corpus)
        for name, arr in a.checkpoint.params.named().items():
            np.testing.assert_array_equal(arr, b.checkpoint.params.named()[name])
        assert [e.train_loss for e in a.log] == [e.train_loss for e in b.log]

    @pytest.mark.parametrize("variant", list(Variant))
    def test_loss_decreases(self, small_corpus, variant):
        cfg = tiny_config(variant=variant, lr=0.05, max_epochs=10)
        result = train(cfg, small_corpus)
        assert len(result.log) == 10
        assert result.log[-1].train_loss < result.log[0].train_loss
        assert result.best_epoch == 10

    @pytest.mark.parametrize("variant", list(Variant))
    def test_fits_repeated_sessions(self, corpus_factory, variant):
        users = {f"u{n}": ([[1, 2, 3, 4, 5]] * 6, []) for n in range(4)}
        cfg = tiny_config(variant=variant, d=8, h=16, lr=0.02, max_epochs=30)
        result = train(cfg, corpus_factory(users, 5))
        assert len(result.log) == 30
        assert result.log[-1].train_loss < 0.5 * result.log[0].train_loss

    def test_validation_picks_best_epoch(self, small_corpus):
        result = train(tiny_config(validation_fraction=0.34), small_corpus)
        losses = [e.valid_loss for e in result.log]
        assert all(loss is not None for loss in losses)
        assert result.best_epoch == 1 + int(np.argmin(losses))

    def test_zero_epochs_keeps_initial_state(self, small_corpus):
        trainer = Trainer(tiny_config(max_epochs=0), small_corpus)
        initial = trainer.params.copy()
        result = trainer.train()
        assert result.log == []
        assert result.best_epoch == 0
        np.testing.assert_array_equal(
            result.checkpoint.params.embeddings, initial.embeddings
        )

    def test_checkpoint_carries_vocabulary_hash(self, small_corpus):
        result = train(tiny_config(max_epochs=1), small_corpus)
        assert result.checkpoint.vocab_hash == Trainer(
            tiny_config(), small_corpus
        ).vocab_hash
        assert result.checkpoint.adam_t > 0

    def test_failure_carries_last_good_state(self, small_corpus, monkeypatch):
        calls = {"n": 0}
        trainer = Trainer(tiny_config(validation_fraction=0.34), small_corpus)
        original = trainer.validation_loss

        def failing():
            calls["n"] += 1
            if calls["n"] == 2:
                raise TrainingError("non-finite loss")
            return original()

        monkeypatch.setattr(trainer, "validation_loss", failing)
        with pytest.raises(TrainingError) as info:
            trainer.train()
        assert info.value.checkpoint is not None
        assert info.value.checkpoint.epoch == 1
        assert info.value.exit_code == 3


def same_second_log() -> list[Interaction]:
    """One 25-event burst at t=1000, then three short sessions."""
    events = [Interaction("u", f"a{i}", 1000) for i in range(25)]
    for n, start in enumerate((10_000, 20_000, 30_000)):
        events += [Interaction("u", f"a{n + j}", start + j) for j in range(3)]
    return events


class TestSplitSessionHalves:
    @pytest.mark.parametrize("variant", [Variant.II_LHS, Variant.II_AP])
    def test_train_and_evaluate(self, variant):
        corpus, summary = preprocess(same_second_log(), gap=3600, max_length=20)
        assert summary.long_sessions_split == 1
        history = corpus.users[0]
        assert [s.start_time for s in history.train_sessions] == [
            1000,
            1000,
            10_000,
            20_000,
        ]
        cfg = tiny_config(variant=variant, batch_size=1, max_epochs=2)
        result = train(cfg, corpus)
        assert len(result.log) == 2
        model = RnnRecommender(result.checkpoint.params, cfg.g)
        report = evaluate([model], corpus, [5], [1])
        assert report.cell(variant.model_name, 5, 1).count == 1
