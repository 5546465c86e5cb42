"""Declarative patterns over dependency trees, anchored at 1PL pronoun tokens.

A pattern is a small constraint graph: node specs test individual tokens
(surface regex, lemma list, POS list), edge specs relate two nodes through a
single dependency arc or linear order.  Exactly one node is the anchor and
must bind a first-person-plural pronoun; a pattern match labels that pronoun
instance with the pattern's referent class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

import yaml

from .annotation import RefClass
from .corpus import Segment, is_first_person_plural, make_instance_id


class PatternError(ValueError):
    """Invalid pattern source (anchors, ops, graph shape, regexes)."""


class EdgeOp(Enum):
    CHILD = "CHILD"  # `to` is a dependent of `from`
    HEAD = "HEAD"  # `to` is the head of `from`
    IMM_RIGHT = "IMM_RIGHT"  # `to` is the token immediately right of `from`
    IMM_LEFT = "IMM_LEFT"
    RIGHT = "RIGHT"  # `to` is anywhere right of `from`, same sentence


@dataclass(frozen=True)
class NodeSpec:
    id: str
    anchor: bool = False
    form_regex: str | None = None
    lemma_in: frozenset | None = None
    upos_in: frozenset | None = None
    _compiled: re.Pattern | None = field(default=None, compare=False, repr=False)

    def admits(self, token) -> bool:
        if self.anchor and not is_first_person_plural(token.form):
            return False
        if self._compiled is not None and self._compiled.fullmatch(token.form) is None:
            return False
        if self.lemma_in is not None and token.lemma not in self.lemma_in:
            return False
        if self.upos_in is not None and token.upos not in self.upos_in:
            return False
        return True


@dataclass(frozen=True)
class EdgeSpec:
    from_id: str
    to_id: str
    op: EdgeOp
    deprel_in: frozenset | None = None

    def admits(self, sent: list, from_idx: int, to_idx: int) -> bool:
        """Both indices are sentence-local; all ops stay within one sentence."""
        u, v = sent[from_idx], sent[to_idx]
        if self.op is EdgeOp.CHILD:
            if v.head != u.index:
                return False
            return self.deprel_in is None or v.deprel in self.deprel_in
        if self.op is EdgeOp.HEAD:
            if u.head != v.index:
                return False
            return self.deprel_in is None or u.deprel in self.deprel_in
        if self.op is EdgeOp.IMM_RIGHT:
            return to_idx == from_idx + 1
        if self.op is EdgeOp.IMM_LEFT:
            return to_idx == from_idx - 1
        if self.op is EdgeOp.RIGHT:
            return to_idx > from_idx
        raise PatternError(f"unhandled edge op {self.op}")


@dataclass
class Pattern:
    name: str
    label: RefClass
    nodes: list
    edges: list

    @property
    def anchor_id(self) -> str:
        return next(n.id for n in self.nodes if n.anchor)

    def node_by_id(self, node_id: str) -> NodeSpec:
        return next(n for n in self.nodes if n.id == node_id)


@dataclass(frozen=True)
class Match:
    pattern_name: str
    instance_id: str
    bindings: tuple  # ((node_id, flat_token_index), ...) in pattern node order


def compile_pattern(source: dict, where: str = "pattern") -> Pattern:
    """Validate and compile one pattern description (already YAML-parsed)."""
    name = source.get("name")
    if not name:
        raise PatternError(f"{where}: missing pattern name")
    where = f"pattern {name!r}"
    try:
        label = RefClass.from_string(source["label"])
    except KeyError:
        raise PatternError(f"{where}: missing label")
    except ValueError as err:
        raise PatternError(f"{where}: {err}")

    raw_nodes = source.get("nodes") or []
    if not raw_nodes:
        raise PatternError(f"{where}: needs at least one node")
    nodes = []
    ids = set()
    for pos, raw in enumerate(raw_nodes):
        node_id = raw.get("id")
        if not node_id:
            raise PatternError(f"{where}, node {pos}: missing id")
        if node_id in ids:
            raise PatternError(f"{where}, node {pos}: duplicate id {node_id!r}")
        ids.add(node_id)
        regex = raw.get("form_regex")
        compiled = None
        if regex is not None:
            try:
                compiled = re.compile(regex)
            except re.error as err:
                raise PatternError(f"{where}, node {node_id!r}: invalid regex {regex!r}: {err}")
        nodes.append(
            NodeSpec(
                id=node_id,
                anchor=bool(raw.get("anchor", False)),
                form_regex=regex,
                lemma_in=frozenset(raw["lemma_in"]) if raw.get("lemma_in") else None,
                upos_in=frozenset(raw["upos_in"]) if raw.get("upos_in") else None,
                _compiled=compiled,
            )
        )
    anchors = [n for n in nodes if n.anchor]
    if len(anchors) != 1:
        raise PatternError(f"{where}: exactly one anchor node required, found {len(anchors)}")

    edges = []
    for pos, raw in enumerate(source.get("edges") or []):
        for key in ("from", "to", "op"):
            if key not in raw:
                raise PatternError(f"{where}, edge {pos}: missing {key!r}")
        if raw["from"] not in ids or raw["to"] not in ids:
            raise PatternError(f"{where}, edge {pos}: undeclared node id in {raw['from']!r}->{raw['to']!r}")
        try:
            op = EdgeOp[raw["op"]]
        except KeyError:
            raise PatternError(f"{where}, edge {pos}: unknown op {raw['op']!r}")
        edges.append(
            EdgeSpec(
                from_id=raw["from"],
                to_id=raw["to"],
                op=op,
                deprel_in=frozenset(raw["deprel_in"]) if raw.get("deprel_in") else None,
            )
        )

    # the undirected edge graph must be a tree over the declared nodes
    if len(edges) != len(nodes) - 1:
        raise PatternError(
            f"{where}: edge graph must be connected and acyclic "
            f"({len(nodes)} nodes need {len(nodes) - 1} edges, found {len(edges)})"
        )
    if nodes and edges:
        adjacency = {n.id: set() for n in nodes}
        for e in edges:
            adjacency[e.from_id].add(e.to_id)
            adjacency[e.to_id].add(e.from_id)
        seen = set()
        stack = [nodes[0].id]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(adjacency[cur] - seen)
        if seen != ids:
            raise PatternError(f"{where}: edge graph disconnected; unreachable nodes {sorted(ids - seen)}")

    return Pattern(name=name, label=label, nodes=nodes, edges=edges)


def load_patterns(path: str | Path) -> list[Pattern]:
    """Read a YAML pattern file (a list of pattern mappings)."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, list):
        raise PatternError(f"{path}: expected a YAML list of patterns")
    patterns = []
    names = set()
    for pos, raw in enumerate(data):
        pattern = compile_pattern(raw, where=f"{path}[{pos}]")
        if pattern.name in names:
            raise PatternError(f"{path}: duplicate pattern name {pattern.name!r}")
        names.add(pattern.name)
        patterns.append(pattern)
    return patterns


def _plan_order(pattern: Pattern) -> list:
    """BFS node order from the anchor, each non-root paired with its entry edge."""
    anchor = pattern.anchor_id
    by_node = {n.id: [] for n in pattern.nodes}
    for e in pattern.edges:
        by_node[e.from_id].append(e)
        by_node[e.to_id].append(e)
    order = [(anchor, None)]
    visited = {anchor}
    queue = [anchor]
    while queue:
        cur = queue.pop(0)
        for e in by_node[cur]:
            other = e.to_id if e.from_id == cur else e.from_id
            if other not in visited:
                visited.add(other)
                order.append((other, e))
                queue.append(other)
    return order


def match(pattern: Pattern, segment: Segment) -> list[Match]:
    """All matches in a segment, one per anchored pronoun, ordered by anchor index.

    Tree and order constraints never cross sentence boundaries.  Multiple
    binding variants at the same anchor collapse into a single match (the
    first found in ascending token order is kept).
    """
    order = _plan_order(pattern)
    node_ids = [n.id for n in pattern.nodes]
    matches = []
    offset = 0
    for sent in segment.sentences:
        n = len(sent)
        candidates = {
            spec.id: [t.index for t in sent if spec.admits(t)] for spec in pattern.nodes
        }
        anchor_id = pattern.anchor_id
        for anchor_idx in candidates[anchor_id]:
            binding = {anchor_id: anchor_idx}
            if _extend(pattern, sent, order, 1, binding, candidates):
                flat_anchor = offset + anchor_idx
                matches.append(
                    Match(
                        pattern_name=pattern.name,
                        instance_id=make_instance_id(
                            segment.doc_id, segment.segment_index, flat_anchor
                        ),
                        bindings=tuple((nid, offset + binding[nid]) for nid in node_ids),
                    )
                )
        offset += n
    return matches


def _extend(pattern, sent, order, depth, binding, candidates) -> bool:
    """Depth-first search along the pattern tree; mutates binding in place."""
    if depth == len(order):
        return True
    node_id, entry_edge = order[depth]
    if entry_edge.from_id in binding:
        fixed_id, fixed_is_from = entry_edge.from_id, True
    else:
        fixed_id, fixed_is_from = entry_edge.to_id, False
    fixed_idx = binding[fixed_id]
    for idx in candidates[node_id]:
        ok = (
            entry_edge.admits(sent, fixed_idx, idx)
            if fixed_is_from
            else entry_edge.admits(sent, idx, fixed_idx)
        )
        if not ok:
            continue
        binding[node_id] = idx
        if _extend(pattern, sent, order, depth + 1, binding, candidates):
            return True
        del binding[node_id]
    return False


@dataclass
class HitTable:
    counts: dict  # pattern name -> hit count
    matches: dict  # pattern name -> list[Match]
    by_class: dict  # RefClass -> hit count

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def match_all(patterns: Iterable[Pattern], segments: Iterable[Segment]) -> HitTable:
    """Apply every pattern to every segment; hits are instance-level."""
    patterns = list(patterns)
    counts = {p.name: 0 for p in patterns}
    matches = {p.name: [] for p in patterns}
    by_class = {cls: 0 for cls in RefClass}
    for segment in segments:
        for pattern in patterns:
            found = match(pattern, segment)
            matches[pattern.name].extend(found)
            counts[pattern.name] += len(found)
            by_class[pattern.label] += len(found)
    return HitTable(counts=counts, matches=matches, by_class=by_class)


def format_hit_table(patterns: Iterable[Pattern], table: HitTable) -> str:
    patterns = list(patterns)
    lines = [f"{'pattern':<32}{'class':<10}{'hits':>8}", "-" * 50]
    for p in patterns:
        lines.append(f"{p.name:<32}{p.label.name:<10}{table.counts[p.name]:>8}")
    lines.append("-" * 50)
    per_class = {cls: sum(1 for p in patterns if p.label is cls) for cls in RefClass}
    for cls in RefClass:
        if per_class[cls]:
            lines.append(f"{'(' + str(per_class[cls]) + ' patterns)':<32}{cls.name:<10}{table.by_class[cls]:>8}")
    lines.append(f"{'Total':<42}{table.total:>8}")
    return "\n".join(lines)
