"""Matrix factorization trained with Bayesian personalized ranking.

Seen items are not filtered out at recommendation time: users revisit items.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from iirnn.baselines.base import pad_with
from iirnn.baselines.popular import PopularityTable, most_popular_recommend
from iirnn.errors import TrainingError
from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Corpus, Session, UserHistory
from iirnn.numerics.ranking import top_k

logger = logging.getLogger(__name__)


@dataclass
class BprConfig:
    factors: int = 40
    lr: float = 0.05
    reg: float = 0.002
    negatives: int = 10
    epochs: int = 20
    batch_size: int = 32
    init_std: float = 0.01


@dataclass
class MfFactors:
    """Row u of ``user_factors`` is ``users[u]``; item id i is row i - 1."""

    users: list[str]
    user_factors: np.ndarray
    item_factors: np.ndarray
    item_bias: np.ndarray
    config: BprConfig = field(default_factory=BprConfig)

    def __post_init__(self) -> None:
        self._index = {name: idx for idx, name in enumerate(self.users)}

    def user_index(self, user: str) -> int | None:
        return self._index.get(user)

    def scores(self, user_idx: int) -> np.ndarray:
        return self.item_bias + self.item_factors @ self.user_factors[user_idx]

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.user_factors).all()
            and np.isfinite(self.item_factors).all()
            and np.isfinite(self.item_bias).all()
        )


def bpr_triple_loss_and_grads(
    p_u: np.ndarray,
    q_i: np.ndarray,
    q_j: np.ndarray,
    b_i: float,
    b_j: float,
    reg: float = 0.0,
) -> tuple[float, dict[str, Any]]:
    """``-ln sigmoid(x_uij)`` plus L2 terms, with gradients per argument."""
    x = b_i - b_j + float(p_u @ (q_i - q_j))
    penalty = 0.5 * reg * (p_u @ p_u + q_i @ q_i + q_j @ q_j + b_i * b_i + b_j * b_j)
    loss = float(np.logaddexp(0.0, -x) + penalty)
    dx = -0.5 * (1.0 - np.tanh(0.5 * x))  # -sigmoid(-x)
    grads = {
        "p_u": dx * (q_i - q_j) + reg * p_u,
        "q_i": dx * p_u + reg * q_i,
        "q_j": -dx * p_u + reg * q_j,
        "b_i": dx + reg * b_i,
        "b_j": -dx + reg * b_j,
    }
    return loss, grads


def _positive_pairs(corpus: Corpus) -> tuple[list[str], np.ndarray, np.ndarray]:
    users = [h.user for h in corpus.users]
    pair_users: list[int] = []
    pair_items: list[int] = []
    for idx, history in enumerate(corpus.users):
        seen = sorted({i for s in history.train_sessions for i in s.items})
        pair_users.extend([idx] * len(seen))
        pair_items.extend(seen)
    return users, np.asarray(pair_users, np.int64), np.asarray(pair_items, np.int64)


def _sample_negatives(
    users: np.ndarray,
    positive_keys: np.ndarray,
    stride: int,
    num_items: int,
    rng: np.random.Generator,
    max_rounds: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform items not observed for each user; returns (items, valid mask)."""
    negatives = rng.integers(1, num_items + 1, size=users.shape[0])
    pending = np.ones(users.shape[0], dtype=bool)
    for _ in range(max_rounds):
        keys = users[pending] * stride + negatives[pending]
        pos = np.searchsorted(positive_keys, keys)
        pos = np.minimum(pos, positive_keys.shape[0] - 1)
        clash = positive_keys[pos] == keys
        idx = np.flatnonzero(pending)
        pending[idx[~clash]] = False
        if not pending.any():
            break
        negatives[pending] = rng.integers(1, num_items + 1, size=int(pending.sum()))
    return negatives, ~pending


def mean_triple_loss(
    factors: MfFactors, u: np.ndarray, i: np.ndarray, j: np.ndarray
) -> float:
    """Mean ``-ln sigmoid(x_uij)`` over user rows ``u`` and item ids ``i``, ``j``."""
    p = factors.user_factors[u]
    diff = factors.item_factors[i - 1] - factors.item_factors[j - 1]
    x = factors.item_bias[i - 1] - factors.item_bias[j - 1] + np.sum(p * diff, axis=1)
    return float(np.mean(np.logaddexp(0.0, -x)))


def bpr_mf_train(
    corpus: Corpus,
    rng: np.random.Generator,
    config: BprConfig | None = None,
) -> MfFactors:
    """Mini-batch SGD over (user, seen item, unseen item) triples.

    Each epoch pairs every distinct (user, item) observation with
    ``config.negatives`` uniformly drawn unseen items.
    """
    cfg = config or BprConfig()
    n = corpus.num_items
    users, pair_users, pair_items = _positive_pairs(corpus)
    factors = MfFactors(
        users=users,
        user_factors=rng.normal(0.0, cfg.init_std, size=(len(users), cfg.factors)),
        item_factors=rng.normal(0.0, cfg.init_std, size=(n, cfg.factors)),
        item_bias=np.zeros(n),
        config=cfg,
    )
    if pair_users.size == 0:
        return factors

    stride = n + 1
    positive_keys = np.sort(pair_users * stride + pair_items)
    p, q, bias = factors.user_factors, factors.item_factors, factors.item_bias

    for epoch in range(cfg.epochs):
        u_all = np.repeat(pair_users, cfg.negatives)
        i_all = np.repeat(pair_items, cfg.negatives)
        order = rng.permutation(u_all.shape[0])
        u_all, i_all = u_all[order], i_all[order]
        j_all, valid = _sample_negatives(u_all, positive_keys, stride, n, rng)
        u_all, i_all, j_all = u_all[valid], i_all[valid], j_all[valid]

        total = 0.0
        for start in range(0, u_all.shape[0], cfg.batch_size):
            u = u_all[start : start + cfg.batch_size]
            i = i_all[start : start + cfg.batch_size] - 1
            j = j_all[start : start + cfg.batch_size] - 1
            pu, qi, qj = p[u], q[i], q[j]
            x = bias[i] - bias[j] + np.sum(pu * (qi - qj), axis=1)
            total += float(np.sum(np.logaddexp(0.0, -x)))
            dx = (-0.5 * (1.0 - np.tanh(0.5 * x)))[:, None]
            np.add.at(p, u, -cfg.lr * (dx * (qi - qj) + cfg.reg * pu))
            np.add.at(q, i, -cfg.lr * (dx * pu + cfg.reg * qi))
            np.add.at(q, j, -cfg.lr * (-dx * pu + cfg.reg * qj))
            np.add.at(bias, i, -cfg.lr * (dx[:, 0] + cfg.reg * bias[i]))
            np.add.at(bias, j, -cfg.lr * (-dx[:, 0] + cfg.reg * bias[j]))
        if not factors.is_finite():
            raise TrainingError(f"BPR-MF factors diverged in epoch {epoch + 1}")
        logger.info(
            "BPR-MF epoch %d/%d: mean triple loss %.4f",
            epoch + 1,
            cfg.epochs,
            total / max(1, u_all.shape[0]),
        )
    return factors


def bpr_mf_recommend(
    factors: MfFactors,
    user: str,
    k: int,
    popularity: PopularityTable,
) -> RecommendationList:
    popular = most_popular_recommend(popularity, k)
    idx = factors.user_index(user)
    if idx is None:
        logger.info("Unknown user %r for BPR-MF; using most popular", user)
        return popular
    return pad_with(top_k(factors.scores(idx), k), popular, k)


class BprMf:
    name = "bpr-mf"

    def __init__(self, factors: MfFactors, popularity: PopularityTable) -> None:
        self.factors = factors
        self.popularity = popularity

    @classmethod
    def fit(
        cls, corpus: Corpus, rng: np.random.Generator, config: BprConfig | None = None
    ) -> "BprMf":
        factors = bpr_mf_train(corpus, rng, config)
        return cls(factors, PopularityTable.from_corpus(corpus))

    def user_context(self, history: UserHistory) -> Any:
        return history.user

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        user = context
        recs = bpr_mf_recommend(self.factors, user, k, self.popularity)
        return [recs] * (len(session) - 1)
