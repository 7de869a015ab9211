"""The exploration operators.

Every operator is a pure function from exploration sets (plus arguments) to
a fresh exploration set; inputs are never modified, results always carry a
fresh root, and repeated application with equal arguments gives path-set
equal results.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .mappings import (
    Aggregation,
    Combination,
    EdgeFold,
    EdgeMap,
    Transformation,
)
from .model import (
    ExplorationSet,
    Item,
    ItemKey,
    Relation,
    RelationPath,
    Resolver,
    SetNode,
    ShapeError,
    TrailsetError,
    path_key,
)
from .predicates import PathPattern
from .values import MISSING, ValueExpr, evaluate_score

DEFAULT_CORRELATE_MAX_LENGTH = 4


def _as_relation(resolver: Resolver, rel: Relation | RelationPath) -> Relation:
    if isinstance(rel, Relation):
        return rel
    return resolver.resolve_path(rel)


def pivot(resolver: Resolver, a: ExplorationSet, rel: Relation | RelationPath) -> ExplorationSet:
    """Map the leaves of ``a`` onto the items they relate to, as a flat set."""
    relation = _as_relation(resolver, rel)
    out: list[Item] = []
    seen: set[ItemKey] = set()
    for leaf in a.leaves():
        for img in relation.image_of(leaf):
            if img.key not in seen:
                seen.add(img.key)
                out.append(img)
    return ExplorationSet.flat(out)


def refine(resolver: Resolver, a: ExplorationSet, pattern: PathPattern) -> ExplorationSet:
    """Keep the paths of ``a`` whose nodes satisfy the pattern level by level.

    Levels beyond the pattern are unconstrained; paths shorter than the
    pattern fail.  Back-propagation of the surviving restriction onto
    ancestor sets is a session concern, not handled here.
    """
    kept = [p for p in a.paths() if pattern.matches(resolver, p)]
    return ExplorationSet.from_paths(kept)


def group(
    resolver: Resolver,
    a: ExplorationSet,
    rel: Relation | RelationPath,
    level: int | None = None,
    keep_ungrouped: bool = False,
) -> ExplorationSet:
    """Insert, for every grouping item related to the node at ``level``, a
    new parent above that node (one output path per grouping item).

    ``level`` defaults to each path's tail.  Nodes with an empty grouping
    image are dropped unless ``keep_ungrouped`` places them under a reserved
    bottom group.
    """
    relation = _as_relation(resolver, rel)
    bottom = Item("⊥", label="ungrouped")
    out: list[Sequence[Item]] = []
    for path in a.paths():
        idx = len(path) - 1 if level is None else level - 1
        if idx < 1 or idx >= len(path):
            continue  # no node at that level on this path
        groups = relation.image_of(path[idx])
        if not groups and keep_ungrouped:
            groups = [bottom]
        for g in groups:
            out.append(path[:idx] + (g,) + path[idx:])
    return ExplorationSet.from_paths(out)


def rank(
    resolver: Resolver,
    a: ExplorationSet,
    level: int,
    score: ValueExpr,
    missing: float = MISSING,
) -> ExplorationSet:
    """Reorder the children holding level-``level`` items by descending
    score, stable on ties.  The path set is unchanged.

    Items whose score expression resolves to nothing (an empty relation
    image, say) score as ``missing`` and sort last.
    """
    if level < 2 or level > a.depth:
        raise ShapeError(f"rank level {level} outside 2..{a.depth}")

    def score_of(node: SetNode) -> float | int:
        try:
            return evaluate_score(score, resolver, node.item, node, missing=missing)
        except TrailsetError as exc:
            raise ShapeError(f"score failed on {node.item!r}: {exc}") from exc

    def rebuild(node: SetNode, lvl: int) -> SetNode:
        children = node.children
        if lvl + 1 == level:
            children = tuple(
                sorted(children, key=lambda c: -_as_float(score_of(c)))
            )
        return SetNode(node.item, tuple(rebuild(c, lvl + 1) for c in children))

    children = a.children
    if level == 2:
        children = tuple(sorted(children, key=lambda c: -_as_float(score_of(c))))
    return ExplorationSet(
        children=tuple(rebuild(c, 2) for c in children)
    )


def _as_float(v: float | int) -> float:
    return float(v)


def slice_top(a: ExplorationSet, start: int, stop: int) -> ExplorationSet:
    """Keep the level-2 children with 0-based index in [start..stop]
    (inclusive), along with their subtrees.  Out-of-range bounds clamp."""
    lo = max(0, start)
    kept = a.children[lo : stop + 1] if stop >= lo else ()
    return ExplorationSet(children=kept)


def correlate(
    resolver: Resolver,
    a: ExplorationSet,
    b: ExplorationSet,
    pattern: PathPattern | None = None,
    max_length: int = DEFAULT_CORRELATE_MAX_LENGTH,
    undirected: bool = False,
) -> ExplorationSet:
    """All simple connection chains from a leaf of ``a`` to a leaf of ``b``.

    Consecutive chain items must form a pair of some relation (forward
    direction unless ``undirected``); chains have at least one and at most
    ``max_length`` edges, and an optional pattern filters the result paths.
    A chain that merely prefixes a longer chain is subsumed by it in the
    resulting tree.
    """
    if max_length < 1:
        raise ShapeError("correlate max_length must be >= 1")
    adjacency: dict[ItemKey, list[Item]] = {}

    def add_edges(pairs: Iterable[tuple[Item, Item]]) -> None:
        for i, j in pairs:
            adjacency.setdefault(i.key, []).append(j)

    for rel in resolver.all_relations():
        add_edges(rel.pairs)
        if undirected:
            add_edges((j, i) for i, j in rel.pairs)

    targets = b.leaf_keys()
    chains: list[tuple[Item, ...]] = []

    def walk(chain: list[Item], visited: set[ItemKey]) -> None:
        current = chain[-1]
        if len(chain) - 1 >= max_length:
            return
        for nxt in adjacency.get(current.key, ()):
            if nxt.key in visited:
                continue
            chain.append(nxt)
            visited.add(nxt.key)
            if nxt.key in targets:
                chains.append(tuple(chain))
            walk(chain, visited)
            visited.remove(nxt.key)
            chain.pop()

    for source in a.leaves():
        walk([source], {source.key})

    result = ExplorationSet.from_tails(chains)
    if pattern is not None:
        result = refine(resolver, result, pattern)
    return result


def _default_map_level(a: ExplorationSet) -> int:
    # parents of the deepest leaves; the root itself for flat or empty sets
    return max(1, a.depth - 1)


def _map_children(
    a: ExplorationSet,
    level: int | None,
    rewrite,
) -> ExplorationSet:
    lv = _default_map_level(a) if level is None else lv_check(a, level)

    def rebuild(node: SetNode, lvl: int) -> SetNode:
        if lvl == lv:
            return SetNode(node.item, rewrite(node))
        return SetNode(node.item, tuple(rebuild(c, lvl + 1) for c in node.children))

    if lv == 1:
        return ExplorationSet(
            children=rewrite(SetNode(a.root, a.children))
        )
    return ExplorationSet(children=tuple(rebuild(c, 2) for c in a.children))


def lv_check(a: ExplorationSet, level: int) -> int:
    if level < 1:
        raise ShapeError(f"level must be >= 1, got {level}")
    return level


def thmap(
    resolver: Resolver,
    a: ExplorationSet,
    f: Transformation,
    level: int | None = None,
) -> ExplorationSet:
    """Replace every child of every level-``level`` item by ``f(child)``.

    Mapped values become leaves: subtrees below them are dropped.  The level
    defaults to the parents of the deepest leaves.
    """

    def rewrite(node: SetNode) -> tuple[SetNode, ...]:
        mapped: list[SetNode] = []
        seen: set[ItemKey] = set()
        for c in node.children:
            item = f.apply(resolver, c.item, c)
            if item.key not in seen:
                seen.add(item.key)
                mapped.append(SetNode(item))
        return tuple(mapped)

    return _map_children(a, level, rewrite)


def ahmap(
    resolver: Resolver,
    a: ExplorationSet,
    f: Aggregation,
    level: int | None = None,
) -> ExplorationSet:
    """Fold the children of each level-``level`` item to a single value."""

    def rewrite(node: SetNode) -> tuple[SetNode, ...]:
        folded = f.fold([c.item for c in node.children])
        return (SetNode(folded),)

    return _map_children(a, level, rewrite)


def chmap(
    resolver: Resolver,
    a: ExplorationSet,
    f: Combination,
    level: int | None = None,
    selector: Sequence[Sequence[int]] | None = None,
) -> ExplorationSet:
    """Replace each level-``level`` item's children by ``f`` applied to
    selected n-tuples of them.

    ``selector`` lists child-index tuples (each of ``f``'s arity); by
    default the full n-fold Cartesian product of the children is used.
    """
    if selector is not None:
        for combo in selector:
            if len(combo) != f.arity:
                raise ShapeError(
                    f"selector tuple {tuple(combo)} does not match arity {f.arity}"
                )

    def rewrite(node: SetNode) -> tuple[SetNode, ...]:
        kids = [c.item for c in node.children]
        if selector is None:
            combos = _cartesian(len(kids), f.arity)
        else:
            combos = [tuple(c) for c in selector]
        out: list[SetNode] = []
        seen: set[ItemKey] = set()
        for combo in combos:
            if any(i >= len(kids) for i in combo):
                continue
            item = f.apply(tuple(kids[i] for i in combo))
            if item.key not in seen:
                seen.add(item.key)
                out.append(SetNode(item))
        return tuple(out)

    return _map_children(a, level, rewrite)


def _cartesian(n: int, arity: int) -> list[tuple[int, ...]]:
    combos: list[tuple[int, ...]] = [()]
    for _ in range(arity):
        combos = [c + (i,) for c in combos for i in range(n)]
    return combos


def _path_edges(path: Sequence[Item]) -> list[tuple[Item, Item]]:
    # edges among the items below the root; the synthetic root edge is not
    # part of the data and is never mapped
    items = path[1:]
    return [(items[i], items[i + 1]) for i in range(len(items) - 1)]


def tvmap(resolver: Resolver, a: ExplorationSet, f: EdgeMap) -> ExplorationSet:
    """Map every edge of every path independently; one output path per
    input path.

    Consecutive mapped edges re-chain through their shared endpoint (edge
    maps derived from per-item lookups always chain); edgeless paths pass
    through unchanged.
    """
    out: list[tuple[Item, ...]] = []
    for path in a.paths():
        edges = _path_edges(path)
        if not edges:
            out.append(tuple(path[1:]))
            continue
        mapped = [f.apply(resolver, e) for e in edges]
        chain: list[Item] = [mapped[0][0], mapped[0][1]]
        for dom, img in mapped[1:]:
            if dom.key != chain[-1].key:
                chain.append(dom)
            chain.append(img)
        out.append(tuple(chain))
    return ExplorationSet.from_tails(out)


def avmap(resolver: Resolver, a: ExplorationSet, f: EdgeFold) -> ExplorationSet:
    """Fold each path's edge sequence to a single value (or pair)."""
    out = []
    for path in a.paths():
        out.append(tuple(f.fold(resolver, _path_edges(path))))
    return ExplorationSet.from_tails(out)


def cvmap(resolver: Resolver, a: ExplorationSet, f: EdgeFold) -> ExplorationSet:
    """Combine each path's edges in one n-ary application."""
    return avmap(resolver, a, f)


def unite(a: ExplorationSet, b: ExplorationSet) -> ExplorationSet:
    """Union of the two path sets under a common fresh root."""
    return ExplorationSet.from_paths(list(a.paths()) + list(b.paths()))


def intersect(a: ExplorationSet, b: ExplorationSet) -> ExplorationSet:
    keys = b.path_keys
    return ExplorationSet.from_paths(
        [p for p in a.paths() if path_key(p) in keys]
    )


def diff(a: ExplorationSet, b: ExplorationSet) -> ExplorationSet:
    keys = b.path_keys
    return ExplorationSet.from_paths(
        [p for p in a.paths() if path_key(p) not in keys]
    )
