"""Static token and expert-to-child assignment table."""

from __future__ import annotations

import json
from pathlib import Path

from eskg.errors import ParseError


class AuthTable:
    def __init__(self, tokens: dict[str, str] | None = None,
                 assignments: dict[str, list[str]] | None = None):
        self.tokens = dict(tokens or {})
        self.assignments = {actor: set(children) for actor, children in (assignments or {}).items()}

    @property
    def open_mode(self) -> bool:
        """No tokens configured: development mode, everything allowed."""
        return not self.tokens

    def actor_for_token(self, token: str | None) -> str | None:
        if token is None:
            return None
        return self.tokens.get(token)

    def authorized(self, actor: str | None, child_id: str) -> bool:
        if self.open_mode:
            return True
        if actor is None:
            return False
        children = self.assignments.get(actor, set())
        return "*" in children or child_id in children

    @classmethod
    def load(cls, path: str | Path) -> AuthTable:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: {exc}") from exc
        return cls(tokens=doc.get("tokens", {}), assignments=doc.get("assignments", {}))

    def to_dict(self) -> dict:
        return {
            "tokens": dict(self.tokens),
            "assignments": {actor: sorted(children) for actor, children in self.assignments.items()},
        }
