"""Mini-batch plans that keep users varied and sessions in time order.

Each batch slot follows one user through their sessions oldest first. When
a user runs out, the slot takes the next user in a seeded shuffled order.
"""

import queue
import threading
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from iirnn.models.corpus import UserHistory


@dataclass
class BatchPlan:
    """Batches of (user index, session index) pairs."""

    batches: list[list[tuple[int, int]]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.batches)

    def __iter__(self) -> Iterator[list[tuple[int, int]]]:
        return iter(self.batches)

    @property
    def num_sessions(self) -> int:
        return sum(len(b) for b in self.batches)


def make_batch_plan(
    users: Sequence[UserHistory], batch_size: int, rng: np.random.Generator
) -> BatchPlan:
    counts = [len(u.train_sessions) for u in users]
    waiting = [int(u) for u in rng.permutation(len(users)) if counts[u] > 0]
    waiting.reverse()
    slots: list[list[int] | None] = [None] * batch_size  # [user, next session]
    plan = BatchPlan()
    while True:
        for s in range(batch_size):
            if slots[s] is None and waiting:
                slots[s] = [waiting.pop(), 0]
        batch: list[tuple[int, int]] = []
        for s, slot in enumerate(slots):
            if slot is None:
                continue
            user, idx = slot
            batch.append((user, idx))
            if idx + 1 >= counts[user]:
                slots[s] = None
            else:
                slot[1] = idx + 1
        if not batch:
            break
        plan.batches.append(batch)
    return plan


_DONE = object()


def prefetch[T](items: Iterable[T], depth: int = 4) -> Iterator[T]:
    """Produce ``items`` on a worker thread, at most ``depth`` ahead."""
    hand_off: queue.Queue[object] = queue.Queue(maxsize=depth)
    failure: list[BaseException] = []

    def produce() -> None:
        try:
            for item in items:
                hand_off.put(item)
        except BaseException as exc:  # re-raised on the consumer side
            failure.append(exc)
        finally:
            hand_off.put(_DONE)

    worker = threading.Thread(target=produce, daemon=True)
    worker.start()
    while True:
        item = hand_off.get()
        if item is _DONE:
            break
        yield item  # type: ignore[misc]
    worker.join()
    if failure:
        raise failure[0]
