import hashlib
from dataclasses import dataclass, field

from pydantic import BaseModel

from iirnn.errors import InferenceError, IngestionError


@dataclass(frozen=True, slots=True)
class Interaction:
    user: str
    item: str
    timestamp: int

    def __post_init__(self) -> None:
        if not self.user or not self.item:
            raise IngestionError(f"empty user or item in {self!r}")
        if self.timestamp < 0:
            raise IngestionError(f"negative timestamp in {self!r}")


@dataclass
class RawSession:
    """A segmented session before vocabulary assignment."""

    items: list[str]
    timestamps: list[int]

    @property
    def start_time(self) -> int:
        return self.timestamps[0]

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class Session:
    items: list[int]
    start_time: int

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class UserHistory:
    user: str
    train_sessions: list[Session] = field(default_factory=list)
    test_sessions: list[Session] = field(default_factory=list)

    @property
    def sessions(self) -> list[Session]:
        return self.train_sessions + self.test_sessions


class ItemVocabulary:
    """Dense ids 1..N for item strings; id 0 is padding."""

    def __init__(self, items: list[str] | None = None) -> None:
        self._to_id: dict[str, int] = {}
        self._to_item: list[str] = [""]
        self._frozen = False
        for item in items or []:
            self.add(item)

    def add(self, item: str) -> int:
        existing = self._to_id.get(item)
        if existing is not None:
            return existing
        if self._frozen:
            raise IngestionError(f"vocabulary is frozen; cannot add {item!r}")
        new_id = len(self._to_item)
        self._to_id[item] = new_id
        self._to_item.append(item)
        return new_id

    def freeze(self) -> None:
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    def get(self, item: str) -> int | None:
        return self._to_id.get(item)

    def id_of(self, item: str) -> int:
        try:
            return self._to_id[item]
        except KeyError:
            raise InferenceError(f"unknown item {item!r}") from None

    def item_of(self, item_id: int) -> str:
        if not 1 <= item_id < len(self._to_item):
            raise InferenceError(f"item id {item_id} outside 1..{len(self)}")
        return self._to_item[item_id]

    def items(self) -> list[str]:
        return self._to_item[1:]

    def __len__(self) -> int:
        return len(self._to_item) - 1

    def __contains__(self, item: object) -> bool:
        return item in self._to_id

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ItemVocabulary):
            return NotImplemented
        return self._to_item == other._to_item

    def __hash__(self) -> int:
        return hash(tuple(self._to_item))

    def content_hash(self) -> str:
        """Hex digest identifying the id assignment."""
        h = hashlib.blake2b(digest_size=16)
        for idx, item in enumerate(self._to_item[1:], start=1):
            h.update(f"{idx}\t{item}\n".encode())
        return h.hexdigest()


class CorpusStats(BaseModel):
    num_users: int
    num_sessions: int
    sessions_per_user: float
    avg_session_length: float
    num_items: int


@dataclass
class Corpus:
    """Preprocessed users plus the vocabulary their ids refer to."""

    users: list[UserHistory]
    vocab: ItemVocabulary

    @property
    def num_items(self) -> int:
        return len(self.vocab)

    def user(self, name: str) -> UserHistory | None:
        for history in self.users:
            if history.user == name:
                return history
        return None
