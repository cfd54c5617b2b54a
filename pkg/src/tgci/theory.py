"""Propositional domain theories as AND/OR/NOT trees.

A theory is written as Prolog-style clauses::

    promoter :- contact, conformation.
    contact  :- minus_35, minus_10.
    minus_35 :- p-37=c, p-36=t, p-35=t, p-34=g, p-33=a, p-32=c.
    ...

Each clause is ``head :- term, term, ... .`` where a term is a testable
condition ``feature=value``, a reference to another clause head, ``true``,
or ``not(term)``.  ``%`` starts a comment that runs to end of line.

Parsing expands head references inline, producing one finite tree per
top-level concept (a head never referenced by another clause):

* multiple clauses for one head join under an OR node, in source order;
* a clause body with two or more terms becomes an AND node;
* a single-term body becomes that term's node directly (no wrapper);
* a head with exactly one clause gets no OR wrapper.

Every node carries a unique, deterministic slash-separated ``path`` such as
``promoter/contact/minus_35/#2``; OR children are numbered ``#1``, ``#2``,
... in clause order, and nodes produced by expanding a head keep that head
as their ``label``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import TheoryError

# Node kinds.
LEAF = "leaf"
AND = "and"
OR = "or"
NOT = "not"
TRUE = "true"

_INTERNAL_KINDS = (AND, OR, NOT)


@dataclass(frozen=True)
class Condition:
    """A directly testable ``feature=value`` leaf condition."""

    feature: str
    value: str

    def __str__(self) -> str:
        return f"{self.feature}={self.value}"


@dataclass(frozen=True)
class TheoryNode:
    """One node of an expanded theory tree.

    ``label`` is the clause head this node expands, when it expands one;
    unnamed nodes (rule bodies under an OR, NOT wrappers, leaves) have
    ``label=None``.
    """

    kind: str
    path: str
    condition: Condition | None = None
    children: tuple["TheoryNode", ...] = ()
    label: str | None = None

    def __post_init__(self):
        if self.kind == NOT and len(self.children) != 1:
            raise TheoryError(f"NOT node {self.path!r} must have exactly one child")
        if self.kind in (AND, OR) and not self.children:
            raise TheoryError(f"{self.kind.upper()} node {self.path!r} must have children")
        if self.kind in (LEAF, TRUE) and self.children:
            raise TheoryError(f"{self.kind} node {self.path!r} cannot have children")
        if self.kind == LEAF and self.condition is None:
            raise TheoryError(f"leaf node {self.path!r} needs a condition")

    def iter_nodes(self):
        """Yield this node and all descendants in preorder."""
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def find(self, path: str) -> "TheoryNode | None":
        for node in self.iter_nodes():
            if node.path == path:
                return node
        return None

    @property
    def is_internal(self) -> bool:
        return self.kind in _INTERNAL_KINDS


@dataclass(frozen=True)
class Theory:
    """Parsed theory: ordered concept roots plus the original clause table.

    ``concepts`` maps each top-level concept name to its expanded tree.
    ``clauses`` keeps the clause table (head -> list of term tuples) so a
    theory can be rendered back to DSL text and re-parsed identically.
    """

    concepts: tuple[tuple[str, TheoryNode], ...]
    clauses: tuple[tuple[str, tuple[tuple, ...]], ...]
    source: str = ""

    @property
    def concept_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.concepts)

    def concept(self, name: str) -> TheoryNode:
        for cname, root in self.concepts:
            if cname == name:
                return root
        raise TheoryError(f"no concept named {name!r}")

    @property
    def roots(self) -> tuple[TheoryNode, ...]:
        return tuple(root for _, root in self.concepts)

    def clause_table(self) -> dict[str, tuple[tuple, ...]]:
        return dict(self.clauses)

    def internal_node_count(self) -> int:
        return sum(1 for root in self.roots for n in root.iter_nodes() if n.is_internal)


@dataclass(frozen=True)
class Finding:
    """One schema-consistency problem found by :func:`validate`."""

    path: str
    feature: str
    value: str
    problem: str

    def __str__(self) -> str:
        return f"{self.path}: {self.feature}={self.value}: {self.problem}"


# --------------------------------------------------------------------------
# Tokenizer / parser
# --------------------------------------------------------------------------

# Terms are tagged tuples:
#   ("cond", feature, value) | ("ref", head) | ("true",) | ("not", inner)

_TOKEN_RE = re.compile(r":-|[(),=.]|[A-Za-z0-9_+\-]+")
_WS_RE = re.compile(r"\s+")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0]
        pos = 0
        while pos < len(line):
            ws = _WS_RE.match(line, pos)
            if ws:
                pos = ws.end()
                continue
            m = _TOKEN_RE.match(line, pos)
            if not m:
                raise TheoryError(f"unexpected character {line[pos]!r}", lineno)
            tokens.append((m.group(), lineno))
            pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, int]]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def line(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return self.tokens[-1][1] if self.tokens else 1

    def take(self) -> str:
        if self.i >= len(self.tokens):
            raise TheoryError("unexpected end of input", self.line())
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, want: str):
        got = self.take()
        if got != want:
            raise TheoryError(f"expected {want!r}, found {got!r}", self.tokens[self.i - 1][1])

    def parse_term(self) -> tuple:
        tok = self.peek()
        if tok is None or tok in (",", ".", "(", ")", "=", ":-"):
            raise TheoryError(f"malformed clause: expected a term, found {tok!r}", self.line())
        name = self.take()
        if self.peek() == "=":
            self.take()
            value = self.take()
            if not re.fullmatch(r"[A-Za-z0-9_+\-]+", value):
                raise TheoryError(f"malformed condition value {value!r}", self.line())
            return ("cond", name, value)
        if name == "true":
            return ("true",)
        if name == "not" and self.peek() == "(":
            self.take()
            inner = self.parse_term()
            self.expect(")")
            return ("not", inner)
        return ("ref", name)

    def parse_clause(self) -> tuple[str, int, list[tuple]]:
        head = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", head):
            raise TheoryError(f"malformed clause head {head!r}", self.tokens[self.i - 1][1])
        headline = self.tokens[self.i - 1][1]
        self.expect(":-")
        terms: list[tuple] = []
        while True:
            terms.append(self.parse_term())
            tok = self.take()
            if tok == ".":
                break
            if tok != ",":
                raise TheoryError(f"expected ',' or '.', found {tok!r}", self.tokens[self.i - 1][1])
        return head, headline, terms


def _term_refs(term: tuple):
    if term[0] == "ref":
        yield term[1]
    elif term[0] == "not":
        yield from _term_refs(term[1])


def term_text(term: tuple) -> str:
    """Canonical DSL text of one body term."""
    tag = term[0]
    if tag == "cond":
        return f"{term[1]}={term[2]}"
    if tag == "ref":
        return term[1]
    if tag == "true":
        return "true"
    return f"not({term_text(term[1])})"


def parse_theory(text: str) -> Theory:
    """Parse DSL source into a :class:`Theory`.

    Raises :class:`TheoryError` (with a line number) on empty input,
    malformed clauses, duplicate terms within one body, references to
    undefined heads, and cyclic references.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise TheoryError("empty input: no clauses found", 1)
    parser = _Parser(tokens)
    table: dict[str, list[list[tuple]]] = {}
    lines: dict[str, int] = {}
    while parser.peek() is not None:
        head, lineno, terms = parser.parse_clause()
        seen = set()
        for t in terms:
            if t in seen:
                raise TheoryError(f"duplicate condition {term_text(t)!r} in one clause body", lineno)
            seen.add(t)
        table.setdefault(head, []).append(terms)
        lines.setdefault(head, lineno)

    referenced: set[str] = set()
    for head, clauses in table.items():
        for terms in clauses:
            for t in terms:
                for ref in _term_refs(t):
                    if ref not in table:
                        raise TheoryError(f"undefined head reference {ref!r}", lines[head])
                    referenced.add(ref)

    _check_acyclic(table, lines)

    concepts = [h for h in table if h not in referenced]
    # Acyclic reference graph guarantees at least one unreferenced head.
    frozen = tuple((h, tuple(tuple(terms) for terms in cls)) for h, cls in table.items())
    roots = tuple((c, _expand_head(c, c, table)) for c in concepts)
    return Theory(concepts=roots, clauses=frozen, source=text)


def _check_acyclic(table: dict[str, list[list[tuple]]], lines: dict[str, int]):
    WHITE, GREY, BLACK = 0, 1, 2
    color = {h: WHITE for h in table}

    def visit(head: str):
        color[head] = GREY
        for terms in table[head]:
            for t in terms:
                for ref in _term_refs(t):
                    if color[ref] == GREY:
                        raise TheoryError(f"cyclic reference involving {ref!r}", lines[ref])
                    if color[ref] == WHITE:
                        visit(ref)
        color[head] = BLACK

    for h in table:
        if color[h] == WHITE:
            visit(h)


def _component(term: tuple) -> str:
    return term_text(term)


def _expand_head(head: str, path: str, table) -> TheoryNode:
    clauses = table[head] if isinstance(table, dict) else dict(table)[head]
    if len(clauses) == 1:
        node = _expand_body(clauses[0], path, table)
    else:
        children = tuple(
            _expand_body(cl, f"{path}/#{i + 1}", table) for i, cl in enumerate(clauses)
        )
        node = TheoryNode(OR, path, children=children)
    return replace(node, label=head)


def _expand_body(terms, path: str, table) -> TheoryNode:
    if len(terms) == 1:
        return _expand_term(terms[0], path, table)
    children = tuple(_expand_term(t, f"{path}/{_component(t)}", table) for t in terms)
    return TheoryNode(AND, path, children=children)


def _expand_term(term: tuple, path: str, table) -> TheoryNode:
    tag = term[0]
    if tag == "cond":
        return TheoryNode(LEAF, path, condition=Condition(term[1], term[2]))
    if tag == "true":
        return TheoryNode(TRUE, path)
    if tag == "ref":
        return _expand_head(term[1], path, table)
    inner = term[1]
    child = _expand_term(inner, f"{path}/{_component(inner)}", table)
    return TheoryNode(NOT, path, children=(child,))


# --------------------------------------------------------------------------
# Validation, fragments, rendering
# --------------------------------------------------------------------------


def validate(theory: Theory, schema) -> list[Finding]:
    """Check every leaf condition against a dataset schema.

    Returns one :class:`Finding` per condition whose feature is not in the
    schema or whose value is not allowed for that feature; an empty list
    means the theory is schema-consistent.
    """
    findings = []
    for _, root in theory.concepts:
        for node in root.iter_nodes():
            if node.kind != LEAF:
                continue
            cond = node.condition
            if not schema.has_feature(cond.feature):
                findings.append(Finding(node.path, cond.feature, cond.value,
                                        "feature not in schema"))
            elif cond.value not in schema.values_of(cond.feature):
                findings.append(Finding(node.path, cond.feature, cond.value,
                                        "value not allowed for feature"))
    return findings


def _reachable_heads(head: str, table: dict[str, tuple]) -> set[str]:
    out: set[str] = set()
    stack = [head]
    while stack:
        h = stack.pop()
        if h in out:
            continue
        out.add(h)
        for terms in table[h]:
            for t in terms:
                stack.extend(_term_refs(t))
    return out


def fragment(theory: Theory, head: str) -> Theory:
    """Extract the subtree named by a clause head or a node path.

    Returns a new single-concept theory rooted there, with paths recomputed
    from the new root.  Raises :class:`TheoryError` when the name matches
    neither a clause head nor a node path.
    """
    table = theory.clause_table()
    if head in table:
        keep = _reachable_heads(head, table)
        clauses = tuple((h, cls) for h, cls in theory.clauses if h in keep)
        root = _expand_head(head, head, dict(clauses))
        sub = Theory(concepts=((head, root),), clauses=clauses)
        return replace(sub, source=render_theory(sub))

    for _, root in theory.concepts:
        node = root.find(head)
        if node is not None:
            return _fragment_at_node(node, theory)
    raise TheoryError(f"unknown head or node path {head!r}")


def _sanitize_head(path: str) -> str:
    name = re.sub(r"[/#=()]+", "_", path).strip("_")
    return name or "fragment"


def _fragment_at_node(node: TheoryNode, theory: Theory) -> Theory:
    table = theory.clause_table()
    if node.label is not None:
        return fragment(theory, node.label)
    name = _sanitize_head(node.path)
    # Unlabeled nodes are either leaves/TRUE/NOT (single term) or the AND
    # body of one clause of a multi-clause head; synthesize clauses for them.
    if node.kind == OR:
        bodies = [_node_terms(c) for c in node.children]
    elif node.kind == AND:
        bodies = [[_node_term(c) for c in node.children]]
    else:
        bodies = [[_node_term(node)]]
    refs: set[str] = set()
    for body in bodies:
        for t in body:
            refs.update(_term_refs(t))
    keep: set[str] = set()
    for r in refs:
        keep |= _reachable_heads(r, table)
    clauses = [(name, tuple(tuple(b) for b in bodies))]
    clauses += [(h, cls) for h, cls in theory.clauses if h in keep]
    root = _expand_head(name, name, dict(clauses))
    sub = Theory(concepts=((name, root),), clauses=tuple(clauses))
    return replace(sub, source=render_theory(sub))


def _node_terms(node: TheoryNode) -> list[tuple]:
    if node.kind == AND and node.label is None:
        return [_node_term(c) for c in node.children]
    return [_node_term(node)]


def _node_term(node: TheoryNode) -> tuple:
    if node.label is not None:
        return ("ref", node.label)
    if node.kind == LEAF:
        return ("cond", node.condition.feature, node.condition.value)
    if node.kind == TRUE:
        return ("true",)
    if node.kind == NOT:
        return ("not", _node_term(node.children[0]))
    raise TheoryError(f"cannot express unlabeled {node.kind} node {node.path!r} as a term")


def render_theory(theory: Theory) -> str:
    """Render a theory back to canonical DSL text.

    Re-parsing the result yields a structurally identical theory (same
    trees, same paths).
    """
    lines = []
    for head, clauses in theory.clauses:
        for terms in clauses:
            body = ", ".join(term_text(t) for t in terms)
            lines.append(f"{head} :- {body}.")
    return "\n".join(lines) + "\n"
