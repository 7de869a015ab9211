"""Filter predicates and level-indexed path patterns for ``refine``.

A predicate is a total boolean function over items.  A path pattern chains
one predicate per tree level starting with the always-true root filter: a
path passes when every level the pattern covers passes, and it fails when
it is shorter than the pattern.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .model import Item, ItemKey, RelationPath, Resolver
from .values import ValueContext, ValueExpr


@dataclass(frozen=True)
class Predicate:
    def test(self, resolver: Resolver, item: Item) -> bool:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class TruePred(Predicate):
    def test(self, resolver: Resolver, item: Item) -> bool:
        return True

    def render(self) -> str:
        return "true()"


@dataclass(frozen=True)
class SetValue:
    """Leaf items of an exploration set, frozen for use as a filter value."""

    keys: frozenset[ItemKey]
    name: str = field(default="<set>", compare=False)


FilterValue = Item | int | float | str | SetValue


def _value_matches(value: FilterValue, candidate: Item) -> bool:
    if isinstance(value, SetValue):
        return candidate.key in value.keys
    if isinstance(value, Item):
        return candidate.key == value.key
    if isinstance(value, str):
        return candidate.kind == "string" and candidate.id == value
    # int / float literal
    num = candidate.numeric
    return num is not None and num == value


def _render_value(value: FilterValue) -> str:
    if isinstance(value, SetValue):
        return value.name
    if isinstance(value, Item):
        return repr(value)
    if isinstance(value, str):
        return f'"{value}"'
    return repr(value)


@dataclass(frozen=True)
class Equals(Predicate):
    """``equals(value)`` tests the item itself; ``equals(:Path, value)``
    tests membership of the value in the item's relation image.  A set
    value matches when the image meets the set's leaves."""

    value: FilterValue
    rel: RelationPath | None = None

    def test(self, resolver: Resolver, item: Item) -> bool:
        if self.rel is None:
            return _value_matches(self.value, item)
        image = resolver.resolve_path(self.rel).image_of(item)
        return any(_value_matches(self.value, j) for j in image)

    def render(self) -> str:
        if self.rel is None:
            return f"equals({_render_value(self.value)})"
        return f"equals({self.rel}, {_render_value(self.value)})"


@dataclass(frozen=True)
class EqualsOne(Predicate):
    """At least one image item of the relation path lies in the given set."""

    rel: RelationPath
    value: SetValue

    def test(self, resolver: Resolver, item: Item) -> bool:
        image = resolver.resolve_path(self.rel).image_of(item)
        return any(j.key in self.value.keys for j in image)

    def render(self) -> str:
        return f"equalsOne({self.rel}, {self.value.name})"


@dataclass(frozen=True)
class Contains(Predicate):
    """Membership of a value in the item's image under a relation path."""

    rel: RelationPath
    value: FilterValue

    def test(self, resolver: Resolver, item: Item) -> bool:
        image = resolver.resolve_path(self.rel).image_of(item)
        return any(_value_matches(self.value, j) for j in image)

    def render(self) -> str:
        return f"contains({self.rel}, {_render_value(self.value)})"


_TOKEN = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> set[str]:
    return set(_TOKEN.findall(text.lower()))


def _keyword_tokens(keywords: Sequence[str]) -> set[str]:
    out: set[str] = set()
    for kw in keywords:
        out |= _tokens(kw)
    return out


@dataclass(frozen=True)
class MatchAll(Predicate):
    """Case-insensitive whole-token match of every keyword in the label."""

    keywords: tuple[str, ...]

    def test(self, resolver: Resolver, item: Item) -> bool:
        have = _tokens(item.display())
        return _keyword_tokens(self.keywords) <= have

    def render(self) -> str:
        inner = ", ".join(f'"{k}"' for k in self.keywords)
        return f"matchAll({inner})"


@dataclass(frozen=True)
class MatchOne(Predicate):
    keywords: tuple[str, ...]

    def test(self, resolver: Resolver, item: Item) -> bool:
        have = _tokens(item.display())
        return any(_tokens(kw) <= have for kw in self.keywords)

    def render(self) -> str:
        inner = ", ".join(f'"{k}"' for k in self.keywords)
        return f"matchOne({inner})"


@dataclass(frozen=True)
class Not(Predicate):
    inner: Predicate

    def test(self, resolver: Resolver, item: Item) -> bool:
        return not self.inner.test(resolver, item)

    def render(self) -> str:
        return f"not({self.inner.render()})"


@dataclass(frozen=True)
class And(Predicate):
    parts: tuple[Predicate, ...]

    def test(self, resolver: Resolver, item: Item) -> bool:
        return all(p.test(resolver, item) for p in self.parts)

    def render(self) -> str:
        return f"and({', '.join(p.render() for p in self.parts)})"


@dataclass(frozen=True)
class Or(Predicate):
    parts: tuple[Predicate, ...]

    def test(self, resolver: Resolver, item: Item) -> bool:
        return any(p.test(resolver, item) for p in self.parts)

    def render(self) -> str:
        return f"or({', '.join(p.render() for p in self.parts)})"


@dataclass(frozen=True)
class GreaterThan(Predicate):
    """Numeric comparison of two value expressions; unresolvable → False."""

    left: ValueExpr
    right: ValueExpr

    def test(self, resolver: Resolver, item: Item) -> bool:
        ctx = ValueContext(resolver, item)
        a = self.left.eval(ctx)
        b = self.right.eval(ctx)
        return a is not None and b is not None and a > b

    def render(self) -> str:
        return f"greaterThan({self.left.render()}, {self.right.render()})"


@dataclass(frozen=True)
class PathPattern:
    """Level-indexed chain of predicates; index 0 is the root filter and is
    always the true predicate."""

    filters: tuple[Predicate, ...]

    def __post_init__(self) -> None:
        if not self.filters:
            raise ValueError("a path pattern has at least the root filter")
        if not isinstance(self.filters[0], TruePred):
            raise ValueError("the root filter of a path pattern is always true")

    @classmethod
    def over(cls, *level_filters: Predicate) -> "PathPattern":
        """Build a pattern from the filters for levels 2..n (root implied)."""
        return cls((TruePred(),) + tuple(level_filters))

    def matches(self, resolver: Resolver, path: Sequence[Item]) -> bool:
        if len(path) < len(self.filters):
            return False
        return all(
            f.test(resolver, path[k]) for k, f in enumerate(self.filters)
        )

    def render(self) -> str:
        inner = ", ".join(f.render() for f in self.filters[1:])
        return f"pattern({inner})"


IDENTITY_PATTERN = PathPattern((TruePred(),))
