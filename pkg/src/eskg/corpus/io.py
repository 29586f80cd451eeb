"""Corpus file formats: CSV annotations, JSON-Lines drafts/paraphrases,
single-document corpus export."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from eskg.corpus.agreement import CategoryAnnotation
from eskg.corpus.categories import ESCategory
from eskg.corpus.pipeline import Corpus, LikertAnnotation, Paraphrase, StatementDraft
from eskg.errors import ParseError, ValidationError


def _read_csv(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(col not in reader.fieldnames for col in required):
            raise ParseError(f"{path}: expected CSV headers {', '.join(required)}")
        return list(reader)


def read_likert_annotations(path: str | Path) -> list[LikertAnnotation]:
    rows = _read_csv(path, ("statement_id", "rater_id", "rating"))
    out = []
    for i, row in enumerate(rows, start=2):
        try:
            out.append(LikertAnnotation(row["statement_id"], row["rater_id"], int(row["rating"])))
        except (ValueError, ValidationError) as exc:
            raise ParseError(f"{path}:{i}: {exc}") from exc
    return out


def read_category_annotations(path: str | Path) -> list[CategoryAnnotation]:
    rows = _read_csv(path, ("statement_id", "rater_id", "category"))
    out = []
    for i, row in enumerate(rows, start=2):
        try:
            out.append(CategoryAnnotation(row["statement_id"], row["rater_id"], ESCategory(row["category"])))
        except ValueError as exc:
            raise ParseError(f"{path}:{i}: {exc}") from exc
    return out


def _read_jsonl(path: str | Path) -> list[tuple[int, dict]]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append((lineno, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: {exc.msg}") from exc
    return out


def read_drafts(path: str | Path, scenario_ids: set[str] | None = None) -> list[StatementDraft]:
    drafts = []
    for lineno, d in _read_jsonl(path):
        try:
            draft = StatementDraft(
                id=d["id"], scenario_id=d["scenario_id"], text=d["text"], author_id=d.get("author_id", "")
            )
        except (KeyError, ValidationError) as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if scenario_ids is not None and draft.scenario_id not in scenario_ids:
            raise ParseError(f"{path}:{lineno}: unknown scenario {draft.scenario_id!r}")
        drafts.append(draft)
    return drafts


def read_paraphrases(path: str | Path) -> list[Paraphrase]:
    out = []
    for lineno, d in _read_jsonl(path):
        try:
            out.append(Paraphrase(id=d["id"], source_id=d["source_id"], text=d["text"]))
        except KeyError as exc:
            raise ParseError(f"{path}:{lineno}: missing field {exc}") from exc
    return out


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return Corpus.from_dict(doc)


def save_corpus(corpus: Corpus, path: str | Path):
    Path(path).write_text(json.dumps(corpus.to_dict(), indent=2, sort_keys=True) + "\n")
