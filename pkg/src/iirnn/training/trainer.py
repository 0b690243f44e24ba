import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from iirnn.config import TrainConfig
from iirnn.errors import TrainingError
from iirnn.models.corpus import Corpus, Session, UserHistory
from iirnn.nets.model import batch_loss_and_grads, session_loss, session_repr
from iirnn.nets.params import ModelParams
from iirnn.nets.repr import UserReprBuffer
from iirnn.numerics.adam import Adam, clip_by_global_norm
from iirnn.processing.corpus_io import vocabulary_hash
from iirnn.training.batching import make_batch_plan, prefetch
from iirnn.training.checkpoint import Checkpoint

logger = logging.getLogger(__name__)


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    valid_loss: float | None = None


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    log: list[EpochLog] = field(default_factory=list)

    @property
    def best_epoch(self) -> int:
        return self.checkpoint.epoch


def split_validation(
    users: list[UserHistory], fraction: float
) -> tuple[list[UserHistory], list[list[Session]]]:
    """Hold out the last floor(fraction * n) training sessions of each user."""
    train: list[UserHistory] = []
    valid: list[list[Session]] = []
    for history in users:
        sessions = history.train_sessions
        n_valid = math.floor(fraction * len(sessions))
        cut = len(sessions) - n_valid
        train.append(UserHistory(user=history.user, train_sessions=sessions[:cut]))
        valid.append(sessions[cut:])
    return train, valid


class Trainer:
    """Owns the parameters, the optimizer and the per-user buffers."""

    def __init__(self, config: TrainConfig, corpus: Corpus) -> None:
        self.config = config
        self.corpus = corpus
        self.vocab_hash = vocabulary_hash(corpus.vocab)
        rng = np.random.default_rng(config.seed)
        self.params = ModelParams.init(
            config.variant,
            corpus.num_items,
            config.d,
            config.h,
            rng,
            scale=config.init_scale,
            intra_layers=config.intra_layers,
            inter_layers=config.inter_layers,
        )
        self.adam = Adam(lr=config.lr)
        self.train_users, self.valid_sessions = split_validation(
            corpus.users, config.validation_fraction
        )
        self._buffers: list[UserReprBuffer] = []

    def snapshot(self, epoch: int) -> Checkpoint:
        return Checkpoint(
            config=self.config,
            params=self.params,
            vocab_hash=self.vocab_hash,
            epoch=epoch,
            adam_t=self.adam.t,
            adam_arrays=self.adam.state_arrays(),
        ).copy()

    def _batches(self, epoch: int) -> Iterator[list[tuple[int, Session]]]:
        plan_rng = np.random.default_rng([self.config.seed, epoch])
        plan = make_batch_plan(self.train_users, self.config.batch_size, plan_rng)
        for batch in plan:
            yield [(u, self.train_users[u].train_sessions[s]) for u, s in batch]

    def run_epoch(self, epoch: int) -> float:
        cfg = self.config
        drop_rng = np.random.default_rng([cfg.seed, epoch, 1])
        buffers = [UserReprBuffer(cfg.g) for _ in self.train_users]
        total = 0.0
        count = 0
        for batch in prefetch(self._batches(epoch)):
            sessions = [s.items for _, s in batch]
            result = batch_loss_and_grads(
                self.params,
                sessions,
                [buffers[u] for u, _ in batch],
                keep_prob=cfg.keep_prob,
                rng=drop_rng,
            )
            if cfg.max_grad_norm is not None:
                clip_by_global_norm(result.grads, cfg.max_grad_norm)
            self.adam.step(self.params.named(), result.grads)
            if cfg.variant.uses_inter:
                for row, (u, session) in enumerate(batch):
                    buffers[u].append(
                        session_repr(
                            self.params,
                            session.items,
                            result.final_states[row],
                            session.start_time,
                        )
                    )
            total += result.loss * len(batch)
            count += len(batch)
        self._buffers = buffers
        return total / count if count else 0.0

    def validation_loss(self) -> float | None:
        """Eval-mode loss on held-out sessions, continuing each user's buffer."""
        losses: list[float] = []
        for u, sessions in enumerate(self.valid_sessions):
            buffer = self._buffers[u]
            for session in sessions:
                loss, final = session_loss(buffer, session.items, self.params)
                losses.append(loss)
                if self.config.variant.uses_inter:
                    buffer.append(
                        session_repr(
                            self.params, session.items, final, session.start_time
                        )
                    )
        return float(np.mean(losses)) if losses else None

    def train(self) -> TrainResult:
        cfg = self.config
        self._buffers = [UserReprBuffer(cfg.g) for _ in self.train_users]
        best = self.snapshot(0)
        best_valid: float | None = None
        last_good = best
        log: list[EpochLog] = []
        for epoch in range(1, cfg.max_epochs + 1):
            try:
                train_loss = self.run_epoch(epoch)
                valid_loss = self.validation_loss()
            except TrainingError as exc:
                exc.checkpoint = last_good
                logger.error("Training stopped in epoch %d: %s", epoch, exc)
                raise
            if not math.isfinite(train_loss):
                raise TrainingError(
                    f"non-finite epoch loss in epoch {epoch}", checkpoint=last_good
                )
            log.append(EpochLog(epoch, train_loss, valid_loss))
            if valid_loss is None:
                logger.info(
                    "Epoch %d/%d: train loss %.4f", epoch, cfg.max_epochs, train_loss
                )
            else:
                logger.info(
                    "Epoch %d/%d: train loss %.4f, validation loss %.4f",
                    epoch,
                    cfg.max_epochs,
                    train_loss,
                    valid_loss,
                )
            last_good = self.snapshot(epoch)
            if valid_loss is None or best_valid is None or valid_loss < best_valid:
                best = last_good
                best_valid = valid_loss
        if log:
            logger.info("Keeping epoch %d", best.epoch)
        return TrainResult(checkpoint=best, log=log)


def train(config: TrainConfig, corpus: Corpus) -> TrainResult:
    return Trainer(config, corpus).train()
