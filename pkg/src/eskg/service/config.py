"""Service configuration, from a JSON file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from eskg.analytics.tkge import TrainingConfig
from eskg.errors import ParseError, ValidationError
from eskg.matching.matcher import MatcherConfig


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8023
    data_dir: str = "./data"
    snapshot_interval: int = 50
    auth_table: str | None = None
    abstract_kg: str | None = None  # path; packaged seed graph when unset
    corpus: str | None = None  # path; packaged seed corpus when unset
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    def __post_init__(self):
        if self.snapshot_interval < 1:
            raise ValidationError("snapshot_interval must be >= 1")

    @classmethod
    def load(cls, path: str | Path | None = None) -> ApiConfig:
        doc: dict = {}
        if path is not None:
            try:
                doc = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ParseError(f"{path}: {exc}") from exc
        listen = os.environ.get("ESKG_LISTEN", doc.get("listen"))
        host, port = cls().host, cls().port
        if listen:
            host, _, port_s = listen.rpartition(":")
            if not host or not port_s.isdigit():
                raise ValidationError(f"bad listen address {listen!r}, expected host:port")
            port = int(port_s)
        return cls(
            host=host,
            port=port,
            data_dir=os.environ.get("ESKG_DATA_DIR", doc.get("data_dir", "./data")),
            snapshot_interval=doc.get("snapshot_interval", 50),
            auth_table=doc.get("auth_table"),
            abstract_kg=doc.get("abstract_kg"),
            corpus=doc.get("corpus"),
            matcher=MatcherConfig.from_dict(doc.get("matcher", {})),
            training=TrainingConfig.from_dict(doc.get("training", {})),
        )
