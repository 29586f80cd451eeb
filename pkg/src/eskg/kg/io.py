"""Serialization: abstract-KG documents, child snapshots, JSON-Lines event logs."""

from __future__ import annotations

import json
from pathlib import Path

from eskg.errors import ParseError
from eskg.kg.model import AbstractKG, ChildTKG, TemporalTriple


def _read_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object at the top level")
    return doc


def load_abstract_kg(path: str | Path) -> AbstractKG:
    doc = _read_json(path)
    try:
        return AbstractKG.from_dict(doc)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: malformed field: {exc}") from exc


def save_abstract_kg(kg: AbstractKG, path: str | Path):
    Path(path).write_text(json.dumps(kg.to_dict(), indent=2, sort_keys=True) + "\n")


def load_child_snapshot(path: str | Path) -> ChildTKG:
    doc = _read_json(path)
    try:
        return ChildTKG.from_dict(doc)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: malformed field: {exc}") from exc


def save_child_snapshot(tkg: ChildTKG, path: str | Path):
    # Canonical form so replayed graphs compare byte-identical.
    Path(path).write_bytes(tkg.canonical_bytes() + b"\n")


def write_event_log(events: list[TemporalTriple], path: str | Path):
    with open(path, "w") as fh:
        for event in events:
            fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")


def read_event_log(path: str | Path) -> list[TemporalTriple]:
    events = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                events.append(TemporalTriple.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return events


def replay_events(base: ChildTKG, events: list[TemporalTriple]) -> ChildTKG:
    """Apply an event log on top of a base graph (typically the intake snapshot)."""
    tkg = ChildTKG.from_dict(base.to_dict())
    for event in events:
        tkg.append_event(event)
    return tkg


def load_child_tkg(path: str | Path) -> ChildTKG:
    """Load a child graph from a snapshot (.json) or a bare event log (.jsonl)."""
    path = Path(path)
    if path.suffix == ".jsonl":
        tkg = ChildTKG(child_id=path.stem)
        for event in read_event_log(path):
            tkg.append_event(event)
        return tkg
    return load_child_snapshot(path)
