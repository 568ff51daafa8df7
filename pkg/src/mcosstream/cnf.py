"""CNF queries over per-class object counts and their inequality indexes.

A query is a conjunction of disjunctions of conditions ``label op n`` with op
one of ``>=``, ``<=``, ``=``, plus a window size and a duration. Matching goes
through three inverted indexes keyed by label: for ``>=`` the values are kept
ascending and a count ``v`` retrieves every entry with value ``<= v``; for
``<=`` the values are descending and ``v`` retrieves every value ``>= v``;
``=`` is an exact probe.
"""

from __future__ import annotations

import bisect
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Set, Tuple

from .errors import ArgumentError, ConsistencyError, LogicError, ParseError, QuerySemanticError
from .feed import IdSet, members

GE, LE, EQ = ">=", "<=", "="
OPS = (GE, LE, EQ)


@dataclass(frozen=True)
class Condition:
    label: str
    theta: str
    n: int

    def __post_init__(self) -> None:
        if self.theta not in OPS:
            raise ArgumentError(f"unknown operator {self.theta!r}")
        if self.n < 0:
            raise ArgumentError(f"threshold must be non-negative, got {self.n}")

    def holds(self, count: int) -> bool:
        if self.theta == GE:
            return count >= self.n
        if self.theta == LE:
            return count <= self.n
        return count == self.n

    def __str__(self) -> str:
        return f"{self.label} {self.theta} {self.n}"


@dataclass(frozen=True)
class Query:
    qid: str
    clauses: Tuple[Tuple[Condition, ...], ...]
    w: int
    d: int

    def __post_init__(self) -> None:
        if not self.clauses or any(not c for c in self.clauses):
            raise ArgumentError("a query needs at least one clause and no empty clause")
        if self.w < 1:
            raise QuerySemanticError(f"window must be >= 1, got {self.w}")
        if not 0 <= self.d <= self.w:
            raise QuerySemanticError(f"duration {self.d} must lie in 0..{self.w}")

    def conditions(self) -> Iterable[Condition]:
        for clause in self.clauses:
            yield from clause

    def truth(self, counts: Mapping[str, int]) -> bool:
        """Direct CNF evaluation, absent labels counting as zero."""
        return all(any(c.holds(counts.get(c.label, 0)) for c in clause) for clause in self.clauses)

    def __str__(self) -> str:
        body = " AND ".join("(" + " OR ".join(map(str, c)) + ")" for c in self.clauses)
        return f"{self.qid}: {body} WINDOW {self.w} DURATION {self.d}"


_TOKEN = re.compile(r"(?:(?P<op><=|>=|=)|(?P<punct>[():])|(?P<int>\d+)|(?P<word>[A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str, line: int | None) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            return out
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, text: str, line: int | None):
        self.text = text
        self.line = line
        self.toks = _tokenize(text, line)
        self.k = 0

    def _peek(self) -> Tuple[str, str, int] | None:
        return self.toks[self.k] if self.k < len(self.toks) else None

    def _fail(self, what: str) -> ParseError:
        tok = self._peek()
        pos = tok[2] if tok else len(self.text)
        got = repr(tok[1]) if tok else "end of input"
        return ParseError(f"expected {what}, got {got}", self.line, pos)

    def _expect(self, kind: str, value: str | None = None) -> str:
        tok = self._peek()
        if tok is None or tok[0] != kind or (value is not None and tok[1] != value):
            raise self._fail(value or kind)
        self.k += 1
        return tok[1]

    def _keyword(self, word: str) -> bool:
        tok = self._peek()
        if tok and tok[0] == "word" and tok[1].upper() == word:
            self.k += 1
            return True
        return False

    def query(self, default_qid: str) -> Query:
        qid = default_qid
        if len(self.toks) >= 2 and self.toks[1][1] == ":" and self.toks[0][0] in ("word", "int"):
            qid = self.toks[0][1]
            self.k = 2
        clauses = [self.clause()]
        while self._keyword("AND"):
            clauses.append(self.clause())
        if not self._keyword("WINDOW"):
            raise self._fail("AND or WINDOW")
        w = int(self._expect("int"))
        if not self._keyword("DURATION"):
            raise self._fail("DURATION")
        d = int(self._expect("int"))
        if self._peek() is not None:
            raise self._fail("end of query")
        if d > w:
            raise QuerySemanticError(f"query {qid}: duration {d} exceeds window {w}")
        return Query(qid, tuple(clauses), w, d)

    def clause(self) -> Tuple[Condition, ...]:
        self._expect("punct", "(")
        conds = [self.cond()]
        while self._keyword("OR"):
            conds.append(self.cond())
        self._expect("punct", ")")
        return tuple(conds)

    def cond(self) -> Condition:
        tok = self._peek()
        if tok is None or tok[0] != "word" or tok[1].upper() in ("AND", "OR", "WINDOW", "DURATION"):
            raise self._fail("label")
        self.k += 1
        op = self._expect("op")
        return Condition(tok[1], op, int(self._expect("int")))


def parse_query(text: str, qid: str = "q", line: int | None = None) -> Query:
    """Parse one query line, e.g. ``q1: (car >= 2 OR person <= 3) WINDOW 300 DURATION 240``.

    The ``qid:`` prefix is optional; ``qid`` is used when it is absent.
    Keywords are case-insensitive.
    """
    return _Parser(text, line).query(qid)


def parse_queries(text: str) -> List[Query]:
    """One query per non-blank line; ``#`` starts a comment line.

    Queries without an explicit id are numbered by their line.
    """
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        out.append(parse_query(raw, qid=str(n), line=n))
    return out


Posting = Tuple[str, int]  # (qid, disjunction index)


@dataclass
class IndexSet:
    """The three θ-partitioned inverted indexes plus per-query clause counts.

    ``ge[label]`` is ascending by value and ``le[label]`` descending; each is a
    list of ``(value, postings)``. ``eq[label]`` maps value to postings.
    """

    ge: Dict[str, List[Tuple[int, List[Posting]]]] = field(default_factory=dict)
    le: Dict[str, List[Tuple[int, List[Posting]]]] = field(default_factory=dict)
    eq: Dict[str, Dict[int, List[Posting]]] = field(default_factory=dict)
    n_clauses: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._ge_values = {k: [v for v, _ in vs] for k, vs in self.ge.items()}
        # Negated so the descending list can be bisected.
        self._le_values = {k: [-v for v, _ in vs] for k, vs in self.le.items()}
        self.labels = sorted(set(self.ge) | set(self.le) | set(self.eq))
        self._full = {q: (1 << n) - 1 for q, n in self.n_clauses.items()}

    def retrieve(self, label: str, v: int) -> List[Posting]:
        """Every posting whose condition on ``label`` holds for count ``v``."""
        out: List[Posting] = []
        lst = self.ge.get(label)
        if lst:
            k = bisect.bisect_right(self._ge_values[label], v)
            for _, ps in lst[:k]:
                out.extend(ps)
        lst = self.le.get(label)
        if lst:
            k = bisect.bisect_right(self._le_values[label], -v)
            for _, ps in lst[:k]:
                out.extend(ps)
        exact = self.eq.get(label)
        if exact:
            out.extend(exact.get(v, ()))
        return out

    def dump(self) -> str:
        """Plain-text rendering of the non-empty indexes, one row per value."""
        blocks = []
        for name, table in ((">= index", self.ge), ("<= index", self.le), ("= index", self._eq_rows())):
            if not table:
                continue
            rows = [("key", "value", "postings")]
            for label in sorted(table):
                for j, (value, postings) in enumerate(table[label]):
                    plist = " ".join(f"({q}, {k})" for q, k in postings)
                    rows.append((label if j == 0 else "", str(value), plist))
            kw = max(len(r[0]) for r in rows)
            vw = max(len(r[1]) for r in rows)
            lines = [name] + [f"{a:<{kw}}  {b:<{vw}}  {c}".rstrip() for a, b, c in rows]
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + ("\n" if blocks else "")

    def _eq_rows(self) -> Dict[str, List[Tuple[int, List[Posting]]]]:
        return {k: sorted(v.items()) for k, v in self.eq.items()}


def build_indexes(queries: Sequence[Query]) -> IndexSet:
    seen: Set[str] = set()
    ge: Dict[str, Dict[int, List[Posting]]] = {}
    le: Dict[str, Dict[int, List[Posting]]] = {}
    eq: Dict[str, Dict[int, List[Posting]]] = {}
    n_clauses: Dict[str, int] = {}
    for q in queries:
        if q.qid in seen:
            raise ArgumentError(f"duplicate query id {q.qid!r}")
        seen.add(q.qid)
        n_clauses[q.qid] = len(q.clauses)
        for disj, clause in enumerate(q.clauses):
            for c in clause:
                table = {GE: ge, LE: le, EQ: eq}[c.theta]
                postings = table.setdefault(c.label, {}).setdefault(c.n, [])
                if (q.qid, disj) not in postings:
                    postings.append((q.qid, disj))
    return IndexSet(
        ge={k: sorted(v.items()) for k, v in ge.items()},
        le={k: sorted(v.items(), reverse=True) for k, v in le.items()},
        eq=eq,
        n_clauses=n_clauses,
    )


AggregateSet = List[Tuple[str, int]]


def aggregate(mcos: IdSet, class_of: Mapping[int, str]) -> AggregateSet:
    """Per-label object counts of an id set, labels in sorted order."""
    counts: Counter = Counter()
    for k in members(mcos):
        try:
            counts[class_of[k]] += 1
        except KeyError:
            raise ConsistencyError(f"object {k} has no class") from None
    return sorted(counts.items())


def evaluate(indexes: IndexSet, aggs: Iterable[Tuple[str, int]]) -> Set[str]:
    """Ids of the queries whose every disjunction is hit by ``aggs``.

    Labels the indexes know but ``aggs`` lacks are probed with count 0.
    """
    counts = dict(aggs)
    hit: Dict[str, int] = {}
    for label in indexes.labels:
        for qid, disj in indexes.retrieve(label, counts.get(label, 0)):
            hit[qid] = hit.get(qid, 0) | (1 << disj)
    return {q for q, mask in hit.items() if mask == indexes._full[q]}


def is_prunable(queries: Iterable[Query]) -> bool:
    return all(c.theta == GE for q in queries for c in q.conditions())


def prune_check(indexes: IndexSet, mcos: IdSet, class_of: Mapping[int, str]) -> bool:
    """Whether a state with this id set can be terminated.

    Only sound for ``>=``-only query sets: a subset has no more objects of any
    label, so a set that satisfies no query has no satisfying subset.
    """
    if indexes.le or indexes.eq:
        raise LogicError("termination pruning requires >=-only queries")
    return not evaluate(indexes, aggregate(mcos, class_of))
