"""Canonical on-disk snapshot of a replay state.

The file is one JSON document followed by a comment line carrying the
SHA-256 of everything before it::

    {"version": 1, "created_at": ..., "config": {...}, "recents": {...}, "anchors": [
    {"anchor": "A", "items": [["B1", 0.55000000000000004], ["B2", 0.45000000000000001]]}
    ]}
    # sha256:<hex>

Anchors are sorted by id and items by descending probability then id.
Probabilities are written with 17 significant digits, which round-trips
every binary64 value exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field

from .core import AnchorList
from .exceptions import SnapshotChecksumError, SnapshotFormatError, SnapshotVersionError
from .table import EngineConfig, Recents, RecTable

FORMAT_VERSION = 1
_CHECKSUM_PREFIX = "# sha256:"


@dataclass
class Snapshot:
    table: RecTable = field(default_factory=RecTable)
    recents: Recents = field(default_factory=Recents)
    config: EngineConfig = field(default_factory=EngineConfig)
    created_at: int = 0
    version: int = FORMAT_VERSION


def _dump(obj):
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False)


def dumps(snapshot: Snapshot) -> str:
    """Serialize to the canonical text form (including checksum line)."""
    anchor_lines = []
    for anchor in sorted(snapshot.table.lists):
        lst = snapshot.table.lists[anchor]
        pairs = ", ".join(f"[{_dump(k)}, {format(p, '.17g')}]" for k, p in zip(lst.items, lst.probs))
        anchor_lines.append(f'{{"anchor": {_dump(anchor)}, "items": [{pairs}]}}')
    head = (
        f'{{"version": {int(snapshot.version)}, "created_at": {int(snapshot.created_at)}, '
        f'"config": {_dump(snapshot.config.to_dict())}, '
        f'"recents": {_dump(snapshot.recents.to_dict())}, "anchors": ['
    )
    body = head + "\n" + ",\n".join(anchor_lines) + ("\n" if anchor_lines else "") + "]}\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + _CHECKSUM_PREFIX + digest + "\n"


def loads(text: str) -> Snapshot:
    """Parse the canonical text form, verifying version and checksum."""
    body, sep, last = text.rstrip("\n").rpartition("\n")
    if not sep or not last.startswith(_CHECKSUM_PREFIX):
        raise SnapshotFormatError("missing checksum line (file truncated?)")
    body += "\n"
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(doc, dict) or "version" not in doc:
        raise SnapshotFormatError("snapshot document has no version field")
    if doc["version"] != FORMAT_VERSION:
        raise SnapshotVersionError(doc["version"], FORMAT_VERSION)
    expected = last[len(_CHECKSUM_PREFIX):].strip()
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != expected:
        raise SnapshotChecksumError("snapshot checksum mismatch")
    try:
        lists = [
            AnchorList(a["anchor"], tuple(k for k, _ in a["items"]), tuple(p for _, p in a["items"]))
            for a in doc["anchors"]
        ]
        return Snapshot(
            table=RecTable(lists),
            recents=Recents.from_dict(doc["recents"]),
            config=EngineConfig.from_dict(doc["config"]),
            created_at=int(doc["created_at"]),
            version=doc["version"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"invalid snapshot contents: {exc}") from None


def save_snapshot(path, snapshot: Snapshot):
    """Atomically write ``snapshot`` to ``path``."""
    text = dumps(snapshot)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".snapshot-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise SnapshotFormatError(f"{path}: not valid UTF-8") from None
    return loads(text)
