"""In-memory named-graph triple store.

Triples live in named graphs (one per ingested dataset, plus reserved
graphs for the schema and for rule-derived triples). Three permutation
indexes (SPO / POS / OSP, each with the graph as a fourth key) back pattern
matching; match results are materialized snapshots, so iteration is stable
across subsequent writes.

Concurrency contract: many readers or one writer. Bulk loads and rule
materialization take the writer role; `read_lock()` / `write_lock()` are
context managers over an internal reader-writer lock.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from . import vocab


class TermError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Term:
    """IRI, literal, or blank node. kind is one of 'iri', 'literal',
    'blank'; datatype applies to literals only."""

    kind: str
    value: str
    datatype: Optional[str] = None

    def __lt__(self, other: "Term") -> bool:
        return (self.kind, self.value, self.datatype or "") < (
            other.kind,
            other.value,
            other.datatype or "",
        )

    def is_iri(self) -> bool:
        return self.kind == "iri"

    def is_literal(self) -> bool:
        return self.kind == "literal"

    def is_blank(self) -> bool:
        return self.kind == "blank"

    def n3(self) -> str:
        if self.kind == "iri":
            return f"<{self.value}>"
        if self.kind == "blank":
            return f"_:{self.value}"
        escaped = (
            self.value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\r", "\\r")
            .replace("\t", "\\t")
        )
        if self.datatype and self.datatype != vocab.XSD + "string":
            return f'"{escaped}"^^<{self.datatype}>'
        return f'"{escaped}"'


def iri(value: str) -> Term:
    if "://" not in value and not value.startswith("urn:"):
        raise TermError(f"IRI must be absolute: {value!r}")
    return Term("iri", value)


def literal(value: str, datatype: Optional[str] = None) -> Term:
    return Term("literal", str(value), datatype)


def blank(node_id: str) -> Term:
    return Term("blank", node_id)


class Triple(NamedTuple):
    subject: Term
    predicate: Term
    object: Term


def triple(s: Term, p: Term, o: Term) -> Triple:
    if s.is_literal():
        raise TermError("triple subject cannot be a literal")
    if not p.is_iri():
        raise TermError("triple predicate must be an IRI")
    return Triple(s, p, o)


WILD = None


@dataclass(frozen=True)
class Pattern:
    subject: Optional[Term] = WILD
    predicate: Optional[Term] = WILD
    object: Optional[Term] = WILD
    graph: Optional[str] = WILD


class _RWLock:
    """Reader-writer lock, writer-preferring enough for our use: one writer
    or any number of readers."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class TripleStore:
    def __init__(self):
        self._graphs: dict[str, set[Triple]] = {}
        # permutation indexes; leaf value is the set of graph names holding
        # the triple
        self._spo: dict[Term, dict[Term, dict[Term, set[str]]]] = {}
        self._pos: dict[Term, dict[Term, dict[Term, set[str]]]] = {}
        self._osp: dict[Term, dict[Term, dict[Term, set[str]]]] = {}
        self._lock = _RWLock()
        self._closure_cache: Optional[dict[Term, set[Term]]] = None
        self._subprop_cache: Optional[dict[Term, set[Term]]] = None

    # -- locking ----------------------------------------------------------

    def read_lock(self):
        return self._lock.read()

    def write_lock(self):
        return self._lock.write()

    # -- mutation ---------------------------------------------------------

    def insert(self, graph: str, t: Triple) -> bool:
        """Insert into a named graph (created on demand). False when the
        triple is already present in that graph."""
        if not isinstance(t, Triple):
            t = triple(*t)
        else:
            if t.subject.is_literal():
                raise TermError("triple subject cannot be a literal")
            if not t.predicate.is_iri():
                raise TermError("triple predicate must be an IRI")
        bucket = self._graphs.setdefault(graph, set())
        if t in bucket:
            return False
        bucket.add(t)
        s, p, o = t
        self._spo.setdefault(s, {}).setdefault(p, {}).setdefault(o, set()).add(graph)
        self._pos.setdefault(p, {}).setdefault(o, {}).setdefault(s, set()).add(graph)
        self._osp.setdefault(o, {}).setdefault(s, {}).setdefault(p, set()).add(graph)
        self._invalidate_schema_caches(t)
        return True

    def insert_all(self, graph: str, triples: Iterable[Triple]) -> int:
        return sum(1 for t in triples if self.insert(graph, t))

    def drop_graph(self, graph: str) -> int:
        """Remove a graph; returns how many triples it held."""
        bucket = self._graphs.pop(graph, None)
        if not bucket:
            return 0
        for t in bucket:
            s, p, o = t
            self._prune(self._spo, s, p, o, graph)
            self._prune(self._pos, p, o, s, graph)
            self._prune(self._osp, o, s, p, graph)
            self._invalidate_schema_caches(t)
        return len(bucket)

    @staticmethod
    def _prune(index, k1, k2, k3, graph) -> None:
        leaf = index[k1][k2][k3]
        leaf.discard(graph)
        if not leaf:
            del index[k1][k2][k3]
            if not index[k1][k2]:
                del index[k1][k2]
                if not index[k1]:
                    del index[k1]

    def _invalidate_schema_caches(self, t: Triple) -> None:
        if t.predicate.value == vocab.RDFS_SUBCLASSOF:
            self._closure_cache = None
        elif t.predicate.value == vocab.RDFS_SUBPROPERTYOF:
            self._subprop_cache = None

    # -- matching ---------------------------------------------------------

    def graphs(self) -> list[str]:
        return sorted(self._graphs)

    def graph_size(self, graph: str) -> int:
        return len(self._graphs.get(graph, ()))

    def __len__(self) -> int:
        return sum(len(b) for b in self._graphs.values())

    def match(self, pattern: Pattern = Pattern(), via: Optional[str] = None) -> list[tuple[str, Triple]]:
        """All (graph, triple) pairs matching the pattern. ``via`` forces a
        specific index ('spo' | 'pos' | 'osp'); used to cross-check index
        consistency."""
        s, p, o, g = pattern.subject, pattern.predicate, pattern.object, pattern.graph
        if via is None:
            via = self._pick_index(s, p, o)
        out: list[tuple[str, Triple]] = []
        if via == "scan":
            for graph, bucket in self._graphs.items():
                if g is not None and graph != g:
                    continue
                for t in bucket:
                    if self._matches(t, s, p, o):
                        out.append((graph, t))
            return out

        index, order = {
            "spo": (self._spo, ("s", "p", "o")),
            "pos": (self._pos, ("p", "o", "s")),
            "osp": (self._osp, ("o", "s", "p")),
        }[via]
        bound = {"s": s, "p": p, "o": o}
        for k1, level2 in self._walk(index, bound[order[0]]):
            for k2, level3 in self._walk(level2, bound[order[1]]):
                for k3, graphset in self._walk(level3, bound[order[2]]):
                    parts = {order[0]: k1, order[1]: k2, order[2]: k3}
                    t = Triple(parts["s"], parts["p"], parts["o"])
                    for graph in graphset:
                        if g is None or graph == g:
                            out.append((graph, t))
        return out

    @staticmethod
    def _walk(level: dict, key):
        if key is None:
            return list(level.items())
        hit = level.get(key)
        return [(key, hit)] if hit is not None else []

    @staticmethod
    def _matches(t: Triple, s, p, o) -> bool:
        return (
            (s is None or t.subject == s)
            and (p is None or t.predicate == p)
            and (o is None or t.object == o)
        )

    @staticmethod
    def _pick_index(s, p, o) -> str:
        if s is not None:
            return "osp" if (p is None and o is not None) else "spo"
        if p is not None:
            return "pos"
        if o is not None:
            return "osp"
        return "scan"

    # convenience lookups used heavily by rules/queries

    def objects(self, subject: Term, predicate: str) -> list[Term]:
        p = Term("iri", predicate)
        level = self._spo.get(subject, {}).get(p)
        return list(level) if level else []

    def object(self, subject: Term, predicate: str) -> Optional[Term]:
        objs = self.objects(subject, predicate)
        return min(objs, key=lambda t: (t.kind, t.value)) if objs else None

    def subjects(self, predicate: str, obj: Term) -> list[Term]:
        p = Term("iri", predicate)
        level = self._pos.get(p, {}).get(obj)
        return list(level) if level else []

    def subject_object_pairs(self, predicate: str) -> list[tuple[Term, Term]]:
        p = Term("iri", predicate)
        out = []
        for o, subjects in self._pos.get(p, {}).items():
            out.extend((s, o) for s in subjects)
        return out

    def has(self, subject: Term, predicate: str, obj: Term) -> bool:
        p = Term("iri", predicate)
        return obj in self._spo.get(subject, {}).get(p, ())

    # -- schema views -----------------------------------------------------

    def _transitive_map(self, predicate: str) -> dict[Term, set[Term]]:
        """node -> every node reachable over `predicate` edges (excluding
        itself unless on a cycle)."""
        edges: dict[Term, set[Term]] = {}
        for s, o in self.subject_object_pairs(predicate):
            edges.setdefault(s, set()).add(o)
        closure: dict[Term, set[Term]] = {}

        def reach(node: Term) -> set[Term]:
            if node in closure:
                return closure[node]
            closure[node] = set()  # cycle guard
            acc: set[Term] = set()
            for nxt in edges.get(node, ()):
                acc.add(nxt)
                acc |= reach(nxt)
            closure[node] = acc
            return acc

        for node in list(edges):
            reach(node)
        return closure

    def subclass_closure(self) -> dict[Term, set[Term]]:
        """class -> strict superclasses (cached; invalidated on subclass
        writes)."""
        if self._closure_cache is None:
            self._closure_cache = self._transitive_map(vocab.RDFS_SUBCLASSOF)
        return self._closure_cache

    def subproperty_closure(self) -> dict[Term, set[Term]]:
        if self._subprop_cache is None:
            self._subprop_cache = self._transitive_map(vocab.RDFS_SUBPROPERTYOF)
        return self._subprop_cache

    def is_subclass(self, sub: Term, sup: Term) -> bool:
        return sub == sup or sup in self.subclass_closure().get(sub, ())

    def types_of(self, node: Term) -> set[Term]:
        return set(self.objects(node, vocab.RDF_TYPE))

    def instance_of(self, node: Term, cls: str) -> bool:
        target = Term("iri", cls)
        return any(self.is_subclass(t, target) for t in self.types_of(node))

    def nodes_of_type(self, cls: str) -> set[Term]:
        """Nodes whose asserted type is cls or any subclass of it."""
        target = Term("iri", cls)
        classes = {target}
        for sub, supers in self.subclass_closure().items():
            if target in supers:
                classes.add(sub)
        found: set[Term] = set()
        for c in classes:
            found.update(self.subjects(vocab.RDF_TYPE, c))
        return found

    def most_specific_types(self, node: Term) -> set[Term]:
        """Asserted types with no other asserted type strictly below them.
        Blank nodes and owl:Thing / owl:Nothing are excluded."""
        closure = self.subclass_closure()
        asserted = {
            t
            for t in self.types_of(node)
            if t.is_iri() and t.value not in (vocab.OWL_THING, vocab.OWL_NOTHING)
        }
        out = set()
        for cand in asserted:
            shadowed = any(
                other != cand and cand in closure.get(other, ())
                for other in asserted
            )
            if not shadowed:
                out.add(cand)
        return out
