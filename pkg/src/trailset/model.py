"""Core value types: items, relations, datasets, and exploration sets.

An exploration set is a rooted tree of items.  The same item may occur at
several positions (papers grouped under two authors, say), so tree nodes are
*occurrences*; the canonical content of a set is its root-to-leaf path set,
and two sets are equal when their path sets coincide after replacing both
roots with a common one.  Everything here is immutable and freely shareable.

Level convention: the root sits at level 1, its children at level 2, and so
on.  All level-taking operators use this convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

ENTITY = "entity"
INT = "int"
FLOAT = "float"
STRING = "string"

LITERAL_KINDS = (INT, FLOAT, STRING)

ROOT_ID = "rs"


class TrailsetError(Exception):
    """Base class for errors raised by this package."""


class ResolutionError(TrailsetError):
    """An identifier (relation, item, state) did not resolve."""


class ShapeError(TrailsetError):
    """A value had the wrong structure for the requested operation."""


@dataclass(frozen=True)
class Item:
    """A single exploration item: an entity or a typed literal.

    Identity is (kind, id); the label is display-only and ignored by
    comparisons.
    """

    id: str
    kind: str = ENTITY
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("item id must be non-empty")

    @property
    def key(self) -> tuple[str, str]:
        return (self.kind, self.id)

    @property
    def value(self) -> int | float | str:
        """The literal value; entities yield their id."""
        if self.kind == INT:
            return int(self.id)
        if self.kind == FLOAT:
            return float(self.id)
        return self.id

    @property
    def numeric(self) -> int | float | None:
        if self.kind == INT:
            return int(self.id)
        if self.kind == FLOAT:
            return float(self.id)
        return None

    def display(self) -> str:
        return self.label if self.label is not None else self.id

    def __repr__(self) -> str:  # compact, used in trail summaries and tests
        if self.kind == ENTITY:
            return self.id
        if self.kind == STRING:
            return f'"{self.id}"'
        return self.id


def entity(id: str, label: str | None = None) -> Item:
    return Item(id, ENTITY, label)


def literal(value: int | float | str) -> Item:
    """Wrap a Python value as a literal item."""
    if isinstance(value, bool):
        raise ValueError("boolean literals are not supported")
    if isinstance(value, int):
        return Item(str(value), INT)
    if isinstance(value, float):
        return Item(repr(value), FLOAT)
    return Item(value, STRING)


ItemKey = tuple[str, str]
Path = tuple[Item, ...]
"""A root-to-leaf path, root included."""


def path_key(path: Sequence[Item]) -> tuple[ItemKey, ...]:
    """Comparison key of a path with the root stripped."""
    return tuple(i.key for i in path[1:])


def head(path: Sequence[Item]) -> Item:
    """The item directly below the root."""
    return path[1]


def tail(path: Sequence[Item]) -> Item:
    return path[-1]


def root_replace(paths: Iterable[Path], nroot: Item) -> list[Path]:
    """Replace the first element of every path with ``nroot``, deduplicated."""
    out: list[Path] = []
    seen: set[tuple[ItemKey, ...]] = set()
    for p in paths:
        if not p:
            raise ValueError("cannot re-root an empty path")
        k = path_key(p)
        if k not in seen:
            seen.add(k)
            out.append((nroot,) + tuple(p[1:]))
    return out


@dataclass(frozen=True)
class SetNode:
    item: Item
    children: tuple["SetNode", ...] = ()


def fresh_root() -> Item:
    return Item(ROOT_ID, ENTITY)


class ExplorationSet:
    """An ordered tree of items, canonically a set of root-to-leaf paths.

    Children of one node are unique by item; inserting a duplicate merges the
    subtrees.  Child order is insertion order and only matters to ``rank``
    and ``slice``; equality ignores it.
    """

    __slots__ = ("root", "_children", "__dict__")

    def __init__(self, root: Item | None = None, children: tuple[SetNode, ...] = ()):
        self.root = root if root is not None else fresh_root()
        self._children = children

    # -- construction -------------------------------------------------

    @classmethod
    def from_paths(cls, paths: Iterable[Sequence[Item]], root: Item | None = None) -> "ExplorationSet":
        """Build the tree whose path set is ``paths`` (roots of the inputs
        are ignored and replaced by a fresh root)."""
        builder = _TrieBuilder()
        for p in paths:
            builder.insert([i for i in p[1:]])
        return cls(root, builder.freeze())

    @classmethod
    def from_tails(cls, tails: Iterable[Sequence[Item]], root: Item | None = None) -> "ExplorationSet":
        """Like ``from_paths`` but the sequences do not include a root."""
        builder = _TrieBuilder()
        for p in tails:
            builder.insert(list(p))
        return cls(root, builder.freeze())

    @classmethod
    def flat(cls, items: Iterable[Item], root: Item | None = None) -> "ExplorationSet":
        builder = _TrieBuilder()
        for i in items:
            builder.insert([i])
        return cls(root, builder.freeze())

    # -- structure ----------------------------------------------------

    @property
    def children(self) -> tuple[SetNode, ...]:
        return self._children

    def is_empty(self) -> bool:
        return not self._children

    @cached_property
    def _paths(self) -> tuple[Path, ...]:
        out: list[Path] = []

        def walk(node: SetNode, prefix: tuple[Item, ...]) -> None:
            here = prefix + (node.item,)
            if not node.children:
                out.append(here)
            else:
                for c in node.children:
                    walk(c, here)

        for child in self._children:
            walk(child, (self.root,))
        return tuple(out)

    def paths(self) -> tuple[Path, ...]:
        """All root-to-leaf paths.  A set with no items has no paths."""
        return self._paths

    @cached_property
    def path_keys(self) -> frozenset[tuple[ItemKey, ...]]:
        return frozenset(path_key(p) for p in self._paths)

    def leaves(self) -> list[Item]:
        """Tail items of all paths, deduplicated in traversal order."""
        seen: set[ItemKey] = set()
        out: list[Item] = []
        for p in self._paths:
            t = p[-1]
            if t.key not in seen:
                seen.add(t.key)
                out.append(t)
        return out

    def level_nodes(self, level: int) -> list[SetNode]:
        """Nodes at the given level (root = level 1, not returned)."""
        if level < 2:
            return []
        frontier = list(self._children)
        depth = 2
        while depth < level:
            frontier = [c for n in frontier for c in n.children]
            depth += 1
        return frontier

    def level_items(self, level: int) -> list[Item]:
        if level == 1:
            return [self.root]
        seen: set[ItemKey] = set()
        out: list[Item] = []
        for n in self.level_nodes(level):
            if n.item.key not in seen:
                seen.add(n.item.key)
                out.append(n.item)
        return out

    @cached_property
    def depth(self) -> int:
        """Level of the deepest leaf (1 for a bare root)."""
        best = 1

        def walk(node: SetNode, lvl: int) -> None:
            nonlocal best
            if lvl > best:
                best = lvl
            for c in node.children:
                walk(c, lvl + 1)

        for child in self._children:
            walk(child, 2)
        return best

    def size(self) -> int:
        """Number of item occurrences, root excluded."""
        def count(node: SetNode) -> int:
            return 1 + sum(count(c) for c in node.children)

        return sum(count(c) for c in self._children)

    # -- comparison ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExplorationSet):
            return NotImplemented
        return self.path_keys == other.path_keys

    def __hash__(self) -> int:
        return hash(self.path_keys)

    def leaf_keys(self) -> frozenset[ItemKey]:
        return frozenset(i.key for i in self.leaves())

    def __repr__(self) -> str:
        return f"ExplorationSet({self.render()})"

    def render(self) -> str:
        """One-line nested rendering, e.g. ``{a1: {p1, p2}, a2: {p2}}``."""

        def fmt(node: SetNode) -> str:
            if not node.children:
                return repr(node.item)
            inner = ", ".join(fmt(c) for c in node.children)
            return f"{node.item!r}: {{{inner}}}"

        return "{" + ", ".join(fmt(c) for c in self._children) + "}"


class _TrieBuilder:
    """Mutable helper that merges item sequences into an ordered trie."""

    def __init__(self) -> None:
        self._order: list[Item] = []
        self._subs: dict[ItemKey, "_TrieBuilder"] = {}

    def insert(self, seq: Sequence[Item]) -> None:
        if not seq:
            return
        first, rest = seq[0], seq[1:]
        sub = self._subs.get(first.key)
        if sub is None:
            sub = _TrieBuilder()
            self._subs[first.key] = sub
            self._order.append(first)
        if rest:
            sub.insert(rest)

    def freeze(self) -> tuple[SetNode, ...]:
        return tuple(
            SetNode(item, self._subs[item.key].freeze()) for item in self._order
        )


# -- relations ---------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """A binary relation between items, viewable as a two-level tree rooted
    at the relation identifier."""

    id: str
    pairs: tuple[tuple[Item, Item], ...]
    provenance: str = "schema"  # "schema" | "computed" | "inverse-of:<id>"

    def __post_init__(self) -> None:
        if not self.id.startswith(":"):
            raise ValueError(f"relation id must start with ':', got {self.id!r}")

    @cached_property
    def _forward(self) -> dict[ItemKey, list[Item]]:
        idx: dict[ItemKey, list[Item]] = {}
        for i, j in self.pairs:
            idx.setdefault(i.key, []).append(j)
        return idx

    @cached_property
    def _backward(self) -> dict[ItemKey, list[Item]]:
        idx: dict[ItemKey, list[Item]] = {}
        for i, j in self.pairs:
            idx.setdefault(j.key, []).append(i)
        return idx

    def domain(self) -> list[Item]:
        return _dedup(i for i, _ in self.pairs)

    def image(self) -> list[Item]:
        return _dedup(j for _, j in self.pairs)

    def image_of(self, item: Item) -> list[Item]:
        """Restricted image: all items the given domain item maps to."""
        return _dedup(self._forward.get(item.key, ()))

    def domain_of(self, item: Item) -> list[Item]:
        """Restricted domain: all items mapping to the given image item."""
        return _dedup(self._backward.get(item.key, ()))

    def inverse(self) -> "Relation":
        return Relation(
            self.id + "⁻¹" if not self.id.endswith("⁻¹") else self.id[:-1],
            tuple((j, i) for i, j in self.pairs),
            provenance=f"inverse-of:{self.id}",
        )

    def as_set(self) -> ExplorationSet:
        """The two-level tree rooted at the relation identifier."""
        return ExplorationSet.from_tails(
            ((i, j) for i, j in self.pairs), root=entity(self.id)
        )

    def pair_keys(self) -> frozenset[tuple[ItemKey, ItemKey]]:
        return frozenset((i.key, j.key) for i, j in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


def _dedup(items: Iterable[Item]) -> list[Item]:
    seen: set[ItemKey] = set()
    out: list[Item] = []
    for i in items:
        if i.key not in seen:
            seen.add(i.key)
            out.append(i)
    return out


def rjoin(r1: Relation, r2: Relation) -> Relation:
    """Compose two relations: pairs ⟨i,j⟩ with some k linking i to j."""
    pairs: list[tuple[Item, Item]] = []
    seen: set[tuple[ItemKey, ItemKey]] = set()
    for i, k in r1.pairs:
        for j in r2.image_of(k):
            key = (i.key, j.key)
            if key not in seen:
                seen.add(key)
                pairs.append((i, j))
    return Relation(r1.id + r2.id, tuple(pairs), provenance="computed")


# -- relation paths ----------------------------------------------------


@dataclass(frozen=True)
class RelationPath:
    """An ordered sequence of relation references, each optionally inverted.

    The denotation is the left fold of ``rjoin`` over the sequence.
    """

    steps: tuple[tuple[str, bool], ...]  # (relation id, inverted)

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("relation path must have at least one step")

    @classmethod
    def single(cls, rel_id: str, inverted: bool = False) -> "RelationPath":
        return cls(((rel_id, inverted),))

    @classmethod
    def of(cls, *rel_ids: str) -> "RelationPath":
        return cls(tuple((r, False) for r in rel_ids))

    def inverse(self) -> "RelationPath":
        return RelationPath(tuple((r, not inv) for r, inv in reversed(self.steps)))

    def __add__(self, other: "RelationPath") -> "RelationPath":
        return RelationPath(self.steps + other.steps)

    def __str__(self) -> str:
        parts = []
        for rel_id, inv in self.steps:
            parts.append(f"inverse({rel_id})" if inv else rel_id)
        return "".join(parts)


# -- datasets ----------------------------------------------------------


class Dataset:
    """Entities plus named relations.  Immutable once built."""

    def __init__(self, items: Iterable[Item], relations: Iterable[Relation]):
        self.entities: dict[str, Item] = {}
        for i in items:
            if i.kind == ENTITY:
                self.entities[i.id] = i
        self.relations: dict[str, Relation] = {}
        for r in relations:
            if r.id in self.relations:
                raise ValueError(f"duplicate relation id {r.id}")
            self.relations[r.id] = r
        for r in self.relations.values():
            for i, j in r.pairs:
                if i.kind == ENTITY and i.id not in self.entities:
                    self.entities[i.id] = i
                if j.kind == ENTITY and j.id not in self.entities:
                    self.entities[j.id] = j

    def item(self, id: str) -> Item:
        try:
            return self.entities[id]
        except KeyError:
            raise ResolutionError(f"unknown item {id!r}") from None

    def has_item(self, id: str) -> bool:
        return id in self.entities

    def all_items(self) -> Iterator[Item]:
        """Entities followed by every distinct literal used in a relation."""
        yield from self.entities.values()
        seen: set[ItemKey] = set()
        for r in self.relations.values():
            for _, j in r.pairs:
                if j.kind != ENTITY and j.key not in seen:
                    seen.add(j.key)
                    yield j

    def as_set(self) -> ExplorationSet:
        """The whole dataset as a flat set of its entities."""
        return ExplorationSet.flat(self.entities.values())


class Resolver:
    """Resolves relation references against a dataset plus an optional
    namespace of computed relations (session scope).

    Unknown ids ending in ``Of`` fall back to the inverse of the base
    relation, so ``:AuthorOf`` works without materialising it.
    """

    def __init__(self, dataset: Dataset, computed: dict[str, Relation] | None = None):
        self.dataset = dataset
        self.computed = computed if computed is not None else {}

    def relation(self, rel_id: str) -> Relation:
        if rel_id in self.dataset.relations:
            return self.dataset.relations[rel_id]
        if rel_id in self.computed:
            return self.computed[rel_id]
        if rel_id.endswith("Of"):
            base = rel_id[:-2]
            if base in self.dataset.relations:
                return self.dataset.relations[base].inverse()
            if base in self.computed:
                return self.computed[base].inverse()
        raise ResolutionError(f"unknown relation {rel_id!r}")

    def all_relations(self) -> list[Relation]:
        return list(self.dataset.relations.values()) + list(self.computed.values())

    def resolve_path(self, path: RelationPath) -> Relation:
        folded: Relation | None = None
        for rel_id, inverted in path.steps:
            rel = self.relation(rel_id)
            if inverted:
                rel = rel.inverse()
            folded = rel if folded is None else rjoin(folded, rel)
        assert folded is not None
        return folded

    def item(self, id: str) -> Item:
        return self.dataset.item(id)
