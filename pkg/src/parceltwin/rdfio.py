"""Readers and writers for the store's exchange formats.

- N-Triples reader (strict, line oriented, atomic loads)
- Turtle subset reader: @prefix declarations, `a`, `;` and `,`
  continuations, one level of `[ p o ; ... ]` blank nodes
- N-Triples writer with canonical escaping and sorted output
- N-Quads snapshot save/load, used by the CLI to persist named graphs
  between invocations
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Optional, TextIO, Union

from . import vocab
from .store import Term, Triple, TripleStore, blank, iri, literal, triple

# each parse call is a load session; blank labels are namespaced to the
# session so separately loaded files can never share a blank node
_load_session = itertools.count(1)


class RdfSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IRI_RE = re.compile(r"<([^<>\s]*)>")
_BLANK_RE = re.compile(r"_:([A-Za-z0-9_.\-]+)")
_LITERAL_RE = re.compile(r'"((?:[^"\\]|\\.)*)"(?:\^\^<([^<>\s]*)>|@([A-Za-z\-]+))?')
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unescape(text: str, line: int) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(text):
            raise RdfSyntaxError("dangling escape", line)
        nxt = text[i + 1]
        if nxt in _UNESCAPES:
            out.append(_UNESCAPES[nxt])
            i += 2
        elif nxt == "u" and i + 6 <= len(text):
            out.append(chr(int(text[i + 2 : i + 6], 16)))
            i += 6
        elif nxt == "U" and i + 10 <= len(text):
            out.append(chr(int(text[i + 2 : i + 10], 16)))
            i += 10
        else:
            raise RdfSyntaxError(f"bad escape \\{nxt}", line)
    return "".join(out)


def _parse_term(text: str, pos: int, line: int) -> tuple[Term, int]:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    if pos >= len(text):
        raise RdfSyntaxError("unexpected end of statement", line)
    m = _IRI_RE.match(text, pos)
    if m:
        return iri(m.group(1)), m.end()
    m = _BLANK_RE.match(text, pos)
    if m:
        return blank(m.group(1)), m.end()
    m = _LITERAL_RE.match(text, pos)
    if m:
        value = _unescape(m.group(1), line)
        return literal(value, m.group(2)), m.end()
    raise RdfSyntaxError(f"cannot read term at: {text[pos:pos+30]!r}", line)


def _parse_statement_line(text: str, line_no: int, n_terms: int) -> Optional[list[Term]]:
    stripped = text.strip()
    if not stripped or stripped.startswith("#"):
        return None
    terms = []
    pos = 0
    for _ in range(n_terms):
        term, pos = _parse_term(text, pos, line_no)
        terms.append(term)
    rest = text[pos:].strip()
    if rest != ".":
        raise RdfSyntaxError("statement must end with '.'", line_no)
    return terms


def _namespace_blanks(triples: list[Triple]) -> list[Triple]:
    session = next(_load_session)

    def rename(term: Term) -> Term:
        if term.is_blank():
            return blank(f"b{session}_{term.value}")
        return term

    return [Triple(rename(s), p, rename(o)) for s, p, o in triples]


def parse_ntriples(source: Union[str, TextIO]) -> list[Triple]:
    """Parse N-Triples, raising on the first syntax error (callers get an
    all-or-nothing load)."""
    text = source if isinstance(source, str) else source.read()
    out = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        terms = _parse_statement_line(line, line_no, 3)
        if terms is None:
            continue
        s, p, o = terms
        if not p.is_iri():
            raise RdfSyntaxError("predicate must be an IRI", line_no)
        if s.is_literal():
            raise RdfSyntaxError("subject cannot be a literal", line_no)
        out.append(Triple(s, p, o))
    return _namespace_blanks(out)


def load_ntriples(store: TripleStore, graph: str, source: Union[str, TextIO]) -> int:
    """Parse then insert atomically: a syntax error leaves the store
    untouched. Returns the number of triples parsed."""
    triples = parse_ntriples(source)
    store.insert_all(graph, triples)
    return len(triples)


def write_ntriples(triples: Iterable[Triple]) -> str:
    lines = sorted(f"{t.subject.n3()} {t.predicate.n3()} {t.object.n3()} ." for t in triples)
    return "\n".join(lines) + ("\n" if lines else "")


def dump_store(store: TripleStore, graph: Optional[str] = None) -> str:
    """Sorted, diff-stable N-Triples dump of one graph or the whole store."""
    seen = set()
    if graph is not None:
        names = [graph]
    else:
        names = store.graphs()
    for name in names:
        for g, t in store.match(pattern=_graph_pattern(name)):
            seen.add(t)
    return write_ntriples(seen)


def _graph_pattern(name: str):
    from .store import Pattern

    return Pattern(graph=name)


# --- N-Quads snapshot ----------------------------------------------------

def save_nquads(store: TripleStore, path: str) -> int:
    lines = []
    for name in store.graphs():
        for g, t in store.match(_graph_pattern(name)):
            lines.append(
                f"{t.subject.n3()} {t.predicate.n3()} {t.object.n3()} <{name}> ."
            )
    lines.sort()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
    return len(lines)


def load_nquads(store: TripleStore, path: str) -> int:
    parsed: list[tuple[str, Triple]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            terms = _parse_statement_line(line, line_no, 4)
            if terms is None:
                continue
            s, p, o, g = terms
            if not g.is_iri():
                raise RdfSyntaxError("graph label must be an IRI", line_no)
            parsed.append((g.value, triple(s, p, o)))
    graphs = [g for g, _ in parsed]
    renamed = _namespace_blanks([t for _, t in parsed])
    for g, t in zip(graphs, renamed):
        store.insert(g, t)
    return len(parsed)


# --- Turtle subset -------------------------------------------------------

_PREFIX_RE = re.compile(r"@prefix\s+([A-Za-z][\w\-]*)?:\s*<([^<>\s]*)>\s*\.")
_CURIE_RE = re.compile(r"([A-Za-z][\w\-]*)?:([A-Za-z0-9_][\w.\-]*)")


class _TurtleReader:
    def __init__(self, text: str, prefixes: Optional[dict[str, str]] = None):
        self.text = text
        self.pos = 0
        self.line = 1
        self.prefixes = dict(prefixes or {})
        self.blank_counter = 0
        self.triples: list[Triple] = []

    def error(self, message: str) -> RdfSyntaxError:
        return RdfSyntaxError(message, self.line)

    def _skip(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\n":
                self.line += 1
                self.pos += 1
            elif ch.isspace():
                self.pos += 1
            elif ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.pos += 1
            else:
                return

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _take(self, ch: str):
        if self._peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> list[Triple]:
        while True:
            self._skip()
            if self.pos >= len(self.text):
                return self.triples
            if self.text.startswith("@prefix", self.pos):
                m = _PREFIX_RE.match(self.text, self.pos)
                if not m:
                    raise self.error("malformed @prefix")
                self.prefixes[m.group(1) or ""] = m.group(2)
                self.pos = m.end()
                continue
            self._statement()

    def _statement(self):
        subject = self._term(as_subject=True)
        self._predicate_object_list(subject)
        self._take(".")

    def _predicate_object_list(self, subject: Term):
        while True:
            predicate = self._predicate()
            while True:
                obj = self._term()
                self.triples.append(triple(subject, predicate, obj))
                if self._peek() == ",":
                    self._take(",")
                    continue
                break
            if self._peek() == ";":
                self._take(";")
                if self._peek() in (".", "]", ""):
                    return  # trailing semicolon
                continue
            return

    def _predicate(self) -> Term:
        self._skip()
        if self.text.startswith("a", self.pos) and (
            self.pos + 1 >= len(self.text) or not self.text[self.pos + 1].isalnum()
        ):
            self.pos += 1
            return iri(vocab.RDF_TYPE)
        term = self._term()
        if not term.is_iri():
            raise self.error("predicate must be an IRI")
        return term

    def _term(self, as_subject: bool = False) -> Term:
        ch = self._peek()
        if ch == "<":
            m = _IRI_RE.match(self.text, self.pos)
            if not m:
                raise self.error("malformed IRI")
            self.pos = m.end()
            return iri(m.group(1))
        if ch == '"':
            m = _LITERAL_RE.match(self.text, self.pos)
            if not m:
                raise self.error("malformed literal")
            self.pos = m.end()
            value = _unescape(m.group(1), self.line)
            dt = m.group(2)
            if dt is None and self.text.startswith("^^", self.pos):
                # datatype written as a prefixed name
                self.pos += 2
                dt = self._term().value
            return literal(value, dt)
        if ch == "[":
            if as_subject:
                raise self.error("blank node subjects are not supported")
            self._take("[")
            self.blank_counter += 1
            node = blank(f"t{self.blank_counter}")
            if self._peek() != "]":
                self._predicate_object_list(node)
            self._take("]")
            return node
        if ch == "_" and self.text.startswith("_:", self.pos):
            m = _BLANK_RE.match(self.text, self.pos)
            if not m:
                raise self.error("malformed blank node")
            self.pos = m.end()
            return blank(m.group(1))
        m = _CURIE_RE.match(self.text, self.pos)
        if m:
            prefix = m.group(1) or ""
            if prefix not in self.prefixes:
                raise self.error(f"undeclared prefix {prefix!r}")
            self.pos = m.end()
            return iri(self.prefixes[prefix] + m.group(2))
        raise self.error(f"cannot read term at {self.text[self.pos:self.pos+30]!r}")


def parse_turtle(text: str, prefixes: Optional[dict[str, str]] = None) -> list[Triple]:
    """Parse the Turtle subset: prefixed names, `a`, ';'/',' lists, and one
    level of `[ p o ]` blank nodes."""
    return _namespace_blanks(_TurtleReader(text, prefixes).parse())


def load_turtle(
    store: TripleStore, graph: str, text: str, prefixes: Optional[dict[str, str]] = None
) -> int:
    triples = parse_turtle(text, prefixes)
    store.insert_all(graph, triples)
    return len(triples)
