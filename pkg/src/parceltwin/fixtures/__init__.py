"""Bundled Toronto fixture set: schema, mapping documents, and source data
small enough to run the whole pipeline in tests and demos."""

from importlib import resources
from pathlib import Path

from .. import vocab
from ..rdfio import load_turtle
from ..store import TripleStore


def toronto_dir() -> Path:
    return Path(resources.files("parceltwin")) / "fixtures" / "toronto"


def fixture_path(*parts: str) -> Path:
    return toronto_dir().joinpath(*parts)


def load_schema(store: TripleStore) -> int:
    text = fixture_path("schema.ttl").read_text(encoding="utf-8")
    return load_turtle(store, vocab.GRAPH_SCHEMA, text)
