"""Readers that map raw interaction logs onto ``user, item, timestamp``."""

import csv
import logging
from pathlib import Path
from typing import Literal

import pandas as pd

from iirnn.errors import IngestionError
from iirnn.models.corpus import Interaction

logger = logging.getLogger(__name__)

type LogFormat = Literal["tsv", "reddit", "lastfm"]

COLUMNS = ["user", "item", "timestamp"]
LASTFM_COLUMNS = [
    "user",
    "played_at",
    "artist_id",
    "artist_name",
    "track_id",
    "track_name",
]


def _read_tsv(path: Path) -> pd.DataFrame:
    return pd.read_csv(
        path,
        sep="\t",
        header=None,
        names=COLUMNS,
        dtype={"user": str, "item": str},
        keep_default_na=False,
        quoting=csv.QUOTE_NONE,
        comment=None,
    )


def _read_reddit(path: Path) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"username": str, "subreddit": str})
    missing = {"username", "subreddit", "utc"} - set(frame.columns)
    if missing:
        raise IngestionError(f"{path}: missing columns {sorted(missing)}")
    return frame.rename(
        columns={"username": "user", "subreddit": "item", "utc": "timestamp"}
    )[COLUMNS]


def _read_lastfm(path: Path) -> pd.DataFrame:
    frame = pd.read_csv(
        path,
        sep="\t",
        header=None,
        names=LASTFM_COLUMNS,
        dtype=str,
        keep_default_na=False,
        quoting=csv.QUOTE_NONE,
        on_bad_lines="skip",
    )
    played = pd.to_datetime(frame["played_at"], utc=True, errors="coerce")
    item = frame["artist_id"].where(frame["artist_id"] != "", frame["artist_name"])
    epoch = pd.Timestamp(0, tz="UTC")
    return pd.DataFrame(
        {
            "user": frame["user"],
            "item": item,
            "timestamp": (played - epoch) // pd.Timedelta(seconds=1),
        }
    )


_READERS = {"tsv": _read_tsv, "reddit": _read_reddit, "lastfm": _read_lastfm}


def read_interaction_frame(path: str | Path, fmt: LogFormat = "tsv") -> pd.DataFrame:
    """Load a log as a frame with columns ``user, item, timestamp`` (int64)."""
    p = Path(path)
    if not p.is_file():
        raise IngestionError(f"input file not found: {p}")
    reader = _READERS.get(fmt)
    if reader is None:
        raise IngestionError(f"unknown input format {fmt!r}")
    try:
        frame = reader(p)
    except (pd.errors.ParserError, UnicodeDecodeError, ValueError) as exc:
        raise IngestionError(f"{p}: {exc}") from exc

    timestamps = pd.to_numeric(frame["timestamp"], errors="coerce")
    bad = (
        timestamps.isna()
        | (timestamps < 0)
        | frame["user"].isna()
        | frame["item"].isna()
        | (frame["user"].astype(str) == "")
        | (frame["item"].astype(str) == "")
    )
    if bad.any():
        if fmt == "tsv":
            row = int(bad.to_numpy().argmax()) + 1
            raise IngestionError(f"{p}: malformed interaction on line {row}")
        logger.warning("Skipped %d malformed rows in %s", int(bad.sum()), p)
    frame = frame.loc[~bad].copy()
    frame["timestamp"] = timestamps.loc[~bad].astype("int64")
    frame["user"] = frame["user"].astype(str)
    frame["item"] = frame["item"].astype(str)
    logger.info("Read %d interactions from %s (%s)", len(frame), p, fmt)
    return frame.reset_index(drop=True)


def read_interactions(path: str | Path, fmt: LogFormat = "tsv") -> list[Interaction]:
    frame = read_interaction_frame(path, fmt)
    rows = zip(frame["user"], frame["item"], frame["timestamp"], strict=True)
    return [Interaction(user=u, item=i, timestamp=int(t)) for u, i, t in rows]
