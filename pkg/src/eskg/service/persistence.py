"""Per-child write-ahead record log with periodic snapshots.

Layout under the data directory:

    children/<child_id>/events.jsonl          append-only record log
    children/<child_id>/audit.jsonl           one line per moderation action
    children/<child_id>/snapshots/snap-<seq>.json

Recovery replays the log over the newest snapshot that does not run ahead of
the log; a torn final line is dropped. A snapshot is written every
``snapshot_interval`` records, atomically (tmp + rename).
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Callable

from eskg.engine.records import ChildState, Record
from eskg.errors import IntegrityError

SNAP_PREFIX = "snap-"


class ChildStore:
    def __init__(self, data_dir: str | Path, snapshot_interval: int = 50, fsync: bool = True):
        if snapshot_interval < 1:
            raise IntegrityError("snapshot interval must be >= 1")
        self.root = Path(data_dir) / "children"
        self.root.mkdir(parents=True, exist_ok=True)
        self.snapshot_interval = snapshot_interval
        self.fsync = fsync
        self._state_lookup: Callable[[str], ChildState] | None = None

    def bind(self, state_lookup: Callable[[str], ChildState]):
        """Late-bound access to live states, needed for snapshotting."""
        self._state_lookup = state_lookup

    def _dir(self, child_id: str) -> Path:
        d = self.root / child_id
        d.mkdir(parents=True, exist_ok=True)
        (d / "snapshots").mkdir(exist_ok=True)
        return d

    def sink(self, child_id: str, record: Record):
        """Engine record sink: append to the log, mirror moderation actions
        to the audit log, snapshot on the interval."""
        d = self._dir(child_id)
        with open(d / "events.jsonl", "a") as fh:
            fh.write(record.to_line() + "\n")
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())
        if record.kind == "moderation":
            with open(d / "audit.jsonl", "a") as fh:
                fh.write(json.dumps(record.payload["action"], sort_keys=True) + "\n")
                fh.flush()
                if self.fsync:
                    os.fsync(fh.fileno())
        if (record.seq + 1) % self.snapshot_interval == 0 and self._state_lookup is not None:
            self.write_snapshot(self._state_lookup(child_id))

    def write_snapshot(self, state: ChildState):
        d = self._dir(state.child_id)
        target = d / "snapshots" / f"{SNAP_PREFIX}{state.seq:08d}.json"
        tmp = target.with_suffix(".tmp")
        tmp.write_bytes(state.canonical_bytes() + b"\n")
        tmp.replace(target)

    def read_records(self, child_id: str) -> list[Record]:
        """All decodable records, in order; a torn tail line is dropped."""
        path = self.root / child_id / "events.jsonl"
        if not path.exists():
            return []
        records = []
        with open(path) as fh:
            lines = fh.readlines()
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                records.append(Record.from_line(line))
            except (json.JSONDecodeError, KeyError):
                if i == len(lines) - 1:
                    break  # torn write at the crash point
                raise IntegrityError(f"{path}:{i + 1}: corrupt record mid-log")
        return records

    def _snapshots(self, child_id: str) -> list[tuple[int, Path]]:
        snap_dir = self.root / child_id / "snapshots"
        if not snap_dir.exists():
            return []
        out = []
        for p in snap_dir.glob(f"{SNAP_PREFIX}*.json"):
            try:
                out.append((int(p.stem[len(SNAP_PREFIX):]), p))
            except ValueError:
                continue
        return sorted(out)

    def recover_child(self, child_id: str) -> ChildState | None:
        records = self.read_records(child_id)
        if not records:
            return None
        last_seq = records[-1].seq
        state = None
        # Newest snapshot not ahead of the surviving log, skipping any that
        # fail to load (a crash can tear a snapshot too).
        for seq, path in reversed(self._snapshots(child_id)):
            if seq > last_seq:
                continue
            try:
                state = ChildState.from_dict(json.loads(path.read_text()))
                break
            except (json.JSONDecodeError, KeyError, ValueError):
                continue
        if state is None:
            state = ChildState(child_id)
        for record in records:
            if record.seq > state.seq:
                state.apply(record)
        return state

    def recover_all(self) -> dict[str, ChildState]:
        states = {}
        for child_dir in sorted(self.root.iterdir()):
            if not child_dir.is_dir():
                continue
            state = self.recover_child(child_dir.name)
            if state is not None:
                states[child_dir.name] = state
        return states
