"""Seeded synthetic interaction logs with tunable inter-session dependency.

Every user owns a random cyclic ordering of the items. The successor of an
item in that cycle is its chain item; the items within two steps of it are
its topic neighbourhood. With probability ``rho`` a session opens on the
chain item of the previous session's last item, and with probability
``kappa`` each following item is drawn from the neighbourhood of the one
before it. Other draws come from the (optionally power-law) item
distribution, excluding the previous item.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from iirnn.config import SynthSpec
from iirnn.errors import ConfigError

logger = logging.getLogger(__name__)

NEIGHBOUR_OFFSETS = (-2, -1, 1, 2)


def item_name(index: int, n_items: int) -> str:
    return f"item{index + 1:0{len(str(n_items))}d}"


def user_name(index: int, num_users: int) -> str:
    return f"user{index + 1:0{len(str(num_users))}d}"


def _user_rng(spec: SynthSpec, user: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, user])


def _item_weights(spec: SynthSpec) -> np.ndarray:
    ranks = np.arange(1, spec.n_items + 1, dtype=np.float64)
    weights = ranks ** (-spec.popularity_exponent)
    return weights / weights.sum()


def user_cycle(spec: SynthSpec, user: int) -> np.ndarray:
    """The user's cyclic item ordering (item indices)."""
    return _user_rng(spec, user).permutation(spec.n_items)


def successor_map(spec: SynthSpec, user: int) -> dict[str, str]:
    cycle = user_cycle(spec, user)
    n = spec.n_items
    return {
        item_name(int(cycle[i]), n): item_name(int(cycle[(i + 1) % n]), n)
        for i in range(n)
    }


class _UserGenerator:
    def __init__(self, spec: SynthSpec, user: int, weights: np.ndarray) -> None:
        self.spec = spec
        self.rng = _user_rng(spec, user)
        # first draw; user_cycle() reproduces it
        self.cycle = self.rng.permutation(spec.n_items)
        self.position = np.empty(spec.n_items, dtype=np.int64)
        self.position[self.cycle] = np.arange(spec.n_items)
        self.weights = weights

    def successor(self, item: int) -> int:
        return int(self.cycle[(self.position[item] + 1) % self.spec.n_items])

    def neighbours(self, item: int) -> list[int]:
        n = self.spec.n_items
        pos = int(self.position[item])
        found = {int(self.cycle[(pos + o) % n]) for o in NEIGHBOUR_OFFSETS}
        found.discard(item)
        return sorted(found)

    def draw(self, exclude: int | None = None) -> int:
        p = self.weights
        if exclude is not None:
            p = p.copy()
            p[exclude] = 0.0
            p /= p.sum()
        return int(self.rng.choice(self.spec.n_items, p=p))

    def sessions(self) -> list[list[int]]:
        spec = self.spec
        out: list[list[int]] = []
        last: int | None = None
        for _ in range(spec.sessions_per_user):
            length = int(self.rng.integers(spec.min_length, spec.max_length + 1))
            if last is not None and self.rng.random() < spec.rho:
                first = self.successor(last)
            else:
                first = self.draw()
            items = [first]
            while len(items) < length:
                prev = items[-1]
                if self.rng.random() < spec.kappa:
                    pool = self.neighbours(prev)
                    items.append(pool[int(self.rng.integers(len(pool)))])
                else:
                    items.append(self.draw(exclude=prev))
            out.append(items)
            last = items[-1]
        return out

    def timestamps(self, lengths: list[int]) -> list[list[int]]:
        gap = self.spec.gap
        within = max(1, gap // 4)
        t = int(self.rng.integers(0, gap))
        out: list[list[int]] = []
        for length in lengths:
            stamps = [t]
            for _ in range(length - 1):
                t += int(self.rng.integers(1, within + 1))
                stamps.append(t)
            out.append(stamps)
            t += gap + int(self.rng.integers(1, gap + 1))
        return out


def _user_lines(spec: SynthSpec, user: int, weights: np.ndarray) -> list[str]:
    gen = _UserGenerator(spec, user, weights)
    sessions = gen.sessions()
    stamps = gen.timestamps([len(s) for s in sessions])
    name = user_name(user, spec.num_users)
    return [
        f"{name}\t{item_name(item, spec.n_items)}\t{ts}\n"
        for items, times in zip(sessions, stamps, strict=True)
        for item, ts in zip(items, times, strict=True)
    ]


def generate(spec: SynthSpec, threads: int | None = None) -> str:
    """Canonical ``user<TAB>item<TAB>timestamp`` text, users in order."""
    if spec.n_items < 2 and spec.max_length >= 2:
        raise ConfigError("n_items must be >= 2 to build sessions without repeats")
    weights = _item_weights(spec)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        blocks = list(
            pool.map(lambda u: _user_lines(spec, u, weights), range(spec.num_users))
        )
    return "".join(line for block in blocks for line in block)


def write_synthetic(
    spec: SynthSpec, path: str | Path, threads: int | None = None
) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    text = generate(spec, threads)
    with p.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    logger.info(
        "Wrote %d users x %d sessions over %d items to %s",
        spec.num_users,
        spec.sessions_per_user,
        spec.n_items,
        p,
    )
    return p
