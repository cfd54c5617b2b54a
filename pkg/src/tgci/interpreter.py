"""Redescribe examples as constructed-feature vectors.

Two interpreters translate a theory tree into per-node features:

* the partial-match interpreter scores each leaf condition +1/-1, averages
  at AND nodes, maximizes at OR nodes, and negates at NOT nodes, so every
  constructed value lies in [-1, 1];
* the boolean interpreter is the all-or-none variant: a node's value is 1
  exactly when the partial-match value is +1.

Both emit one feature per AND/OR node, own value first and then the
children's, in preorder.  Leaves and TRUE nodes emit nothing (their values
would duplicate the original features), and NOT nodes pass their child's
features through without adding one of their own unless
``not_emits_feature`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import theory as th
from .dataset import Dataset, Schema
from .errors import InterpreterError

PARTIAL_MATCH = "partial-match"
BOOLEAN = "boolean"
ORIGINAL = "original"


@dataclass(frozen=True)
class InterpreterOptions:
    """Switches controlling feature construction.

    kind: partial-match or boolean interpretation.
    not_emits_feature: make NOT nodes contribute their own feature too.
    include_original_features: append the raw nominal features after the
        constructed ones.
    top_feature_included: emit each concept root's own feature (on by
        default; switch off to keep only strictly-internal structure).
    """

    kind: str = PARTIAL_MATCH
    not_emits_feature: bool = False
    include_original_features: bool = False
    top_feature_included: bool = True

    def __post_init__(self):
        if self.kind not in (PARTIAL_MATCH, BOOLEAN):
            raise InterpreterError(f"unknown interpreter kind {self.kind!r}")


@dataclass(frozen=True)
class ConstructedFeature:
    """One output column: constructed node feature or passed-through original."""

    name: str
    source: str
    kind: str
    values: tuple[str, ...] | None = None  # allowed values for ORIGINAL columns


@dataclass(frozen=True)
class ConstructedSchema:
    features: tuple[ConstructedFeature, ...]
    classes: tuple[str, ...]
    options: InterpreterOptions = field(default_factory=InterpreterOptions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def __len__(self) -> int:
        return len(self.features)


@dataclass(frozen=True)
class RedescribedExample:
    id: str
    label: str
    values: tuple


# --------------------------------------------------------------------------
# Node naming and emission order
# --------------------------------------------------------------------------


def emitted_nodes(root: th.TheoryNode, options: InterpreterOptions) -> list[th.TheoryNode]:
    """The nodes that contribute a feature, in emission (preorder) order."""
    out: list[th.TheoryNode] = []

    def walk(node: th.TheoryNode, is_root: bool):
        if node.kind in (th.LEAF, th.TRUE):
            return
        if node.kind == th.NOT:
            if options.not_emits_feature:
                out.append(node)
            walk(node.children[0], False)
            return
        if not (is_root and not options.top_feature_included):
            out.append(node)
        for child in node.children:
            walk(child, False)

    walk(root, True)
    return out


def _display_name(node: th.TheoryNode, parents: dict[str, th.TheoryNode]) -> str:
    if node.label is not None:
        return node.label
    component = node.path.rsplit("/", 1)[-1]
    parent = parents.get(node.path)
    if component.startswith("#") and parent is not None and parent.label is not None:
        return f"{parent.label}{component}"
    return node.path.replace("/", ".")


def _parent_map(root: th.TheoryNode) -> dict[str, th.TheoryNode]:
    parents: dict[str, th.TheoryNode] = {}
    for node in root.iter_nodes():
        for child in node.children:
            parents[child.path] = node
    return parents


def feature_names_for(root: th.TheoryNode, options: InterpreterOptions) -> list[str]:
    parents = _parent_map(root)
    return [_display_name(n, parents) for n in emitted_nodes(root, options)]


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


def _leaf_truth(node: th.TheoryNode, values, schema: Schema) -> bool:
    cond = node.condition
    if not schema.has_feature(cond.feature):
        raise InterpreterError(
            f"condition at {node.path!r} references feature {cond.feature!r} "
            "absent from the example's schema")
    return values[schema.feature_index(cond.feature)] == cond.value


def _eval_partial(node, values, schema, options, out, is_root) -> float:
    kind = node.kind
    if kind == th.LEAF:
        return 1.0 if _leaf_truth(node, values, schema) else -1.0
    if kind == th.TRUE:
        return 1.0
    if kind == th.NOT:
        slot = None
        if options.not_emits_feature:
            slot = len(out)
            out.append(0.0)
        top = -_eval_partial(node.children[0], values, schema, options, out, False)
        if slot is not None:
            out[slot] = top
        return top
    emit = not (is_root and not options.top_feature_included)
    slot = None
    if emit:
        slot = len(out)
        out.append(0.0)
    tops = [_eval_partial(c, values, schema, options, out, False) for c in node.children]
    top = max(tops) if kind == th.OR else sum(tops) / len(tops)
    if slot is not None:
        out[slot] = top
    return top


def _eval_boolean(node, values, schema, options, out, is_root) -> int:
    kind = node.kind
    if kind == th.LEAF:
        return 1 if _leaf_truth(node, values, schema) else 0
    if kind == th.TRUE:
        return 1
    if kind == th.NOT:
        slot = None
        if options.not_emits_feature:
            slot = len(out)
            out.append(0)
        top = 1 - _eval_boolean(node.children[0], values, schema, options, out, False)
        if slot is not None:
            out[slot] = top
        return top
    emit = not (is_root and not options.top_feature_included)
    slot = None
    if emit:
        slot = len(out)
        out.append(0)
    tops = [_eval_boolean(c, values, schema, options, out, False) for c in node.children]
    top = max(tops) if kind == th.OR else min(tops)
    if slot is not None:
        out[slot] = top
    return top


def tgci1(node: th.TheoryNode, example, schema: Schema,
          options: InterpreterOptions | None = None):
    """Partial-match interpretation of one example against one subtree.

    Returns ``(top, features)`` where ``top`` is the node's partial-match
    value in [-1, 1] and ``features`` is the ordered list of
    ``(name, value)`` pairs the subtree contributes.
    """
    options = options or InterpreterOptions()
    values_out: list[float] = []
    top = _eval_partial(node, example.values, schema, options, values_out, True)
    names = feature_names_for(node, options)
    return top, list(zip(names, values_out))


def boolean_interpret(node: th.TheoryNode, example, schema: Schema,
                      options: InterpreterOptions | None = None):
    """All-or-none interpretation; values are 0/1, same emission rule."""
    options = options or InterpreterOptions(kind=BOOLEAN)
    values_out: list[int] = []
    top = _eval_boolean(node, example.values, schema, options, values_out, True)
    names = feature_names_for(node, options)
    return top, list(zip(names, values_out))


def boolean_top(node: th.TheoryNode, example, schema: Schema) -> int:
    """Boolean value of the node alone, skipping feature collection."""
    return _eval_boolean(node, example.values, schema, InterpreterOptions(kind=BOOLEAN),
                         [], False)


def partial_top(node: th.TheoryNode, example, schema: Schema) -> float:
    """Partial-match value of the node alone, skipping feature collection."""
    return _eval_partial(node, example.values, schema, InterpreterOptions(), [], False)


# --------------------------------------------------------------------------
# Redescription
# --------------------------------------------------------------------------


def _unique_names(names: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for name in names:
        k = seen.get(name, 0) + 1
        seen[name] = k
        out.append(name if k == 1 else f"{name}.{k}")
    return out


def redescribe(dataset: Dataset, theories, options: InterpreterOptions | None = None):
    """Redescribe every example against one or more theories.

    Features are concatenated in theory order then concept order, one run of
    the selected interpreter per concept root.  Returns
    ``(ConstructedSchema, [RedescribedExample])``; the schema (names and
    order) is identical for every example.
    """
    options = options or InterpreterOptions()
    if isinstance(theories, th.Theory):
        theories = [theories]
    theories = list(theories)
    if not theories:
        raise InterpreterError("at least one theory is required")

    roots = [root for t in theories for _, root in t.concepts]
    raw_names: list[str] = []
    sources: list[str] = []
    for root in roots:
        parents = _parent_map(root)
        for node in emitted_nodes(root, options):
            raw_names.append(_display_name(node, parents))
            sources.append(node.path)
    names = _unique_names(raw_names)

    features = [ConstructedFeature(n, s, options.kind) for n, s in zip(names, sources)]
    if not features and not options.include_original_features:
        raise InterpreterError(
            "theory yields zero constructed features (single-leaf concepts "
            "emit none); set include_original_features to learn from the "
            "raw features as well")
    if options.include_original_features:
        features += [
            ConstructedFeature(f"orig.{name}", f"original/{name}", ORIGINAL, values)
            for name, values in dataset.schema.features
        ]

    cschema = ConstructedSchema(tuple(features), dataset.schema.classes, options)
    evaluate = _eval_boolean if options.kind == BOOLEAN else _eval_partial
    redescribed = []
    for ex in dataset.examples:
        vals: list = []
        for root in roots:
            evaluate(root, ex.values, dataset.schema, options, vals, True)
        if options.kind == PARTIAL_MATCH:
            vals = [float(v) for v in vals]
        if options.include_original_features:
            vals.extend(ex.values)
        redescribed.append(RedescribedExample(ex.id, ex.label, tuple(vals)))
    return cschema, redescribed


def redescribed_to_csv(schema: ConstructedSchema, examples) -> str:
    """Header CSV of a redescription; class is the last column."""
    lines = [",".join(list(schema.names) + ["class"])]
    for ex in examples:
        cells = [v if isinstance(v, str) else repr(v) for v in ex.values]
        lines.append(",".join(cells + [ex.label]))
    return "\n".join(lines) + "\n"
