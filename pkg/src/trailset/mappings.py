"""Mapping functions for the horizontal and vertical map operators.

Three kinds exist: transformations rewrite each child independently,
aggregations fold a children set to one value (seeded with an identity
element), and combinations apply an n-ary function to tuples of children.
Vertical maps use edge functions over the ⟨parent, child⟩ pairs of a path.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import Item, RelationPath, Resolver, SetNode, literal
from .values import ItemPlaceholder, ValueContext, ValueExpr, ValueExprError


def _require_number(item: Item) -> int | float:
    n = item.numeric
    if n is None:
        raise ValueExprError(f"expected a numeric item, got {item!r}")
    return n


def _as_literal(value: int | float) -> Item:
    return literal(value)


@dataclass(frozen=True)
class Transformation:
    """Unary map over items, built from a value expression over %item."""

    expr: ValueExpr
    name: str = "expr"

    def apply(self, resolver: Resolver, item: Item, node: SetNode | None = None) -> Item:
        v = self.expr.eval(ValueContext(resolver, item, node))
        if v is None:
            raise ValueExprError(f"transformation undefined for {item!r}")
        return _as_literal(v)

    def render(self) -> str:
        if isinstance(self.expr, ItemPlaceholder):
            return "identity"
        return self.expr.render()


IDENTITY = Transformation(ItemPlaceholder(), name="identity")


@dataclass(frozen=True)
class Aggregation:
    """Binary fold over a children set with an identity seed."""

    name: str  # "count" | "sum" | "mean"

    def fold(self, items: list[Item]) -> Item:
        if self.name == "count":
            return literal(len(items))
        if self.name == "sum":
            total: int | float = 0
            for it in items:
                total = total + _require_number(it)
            return literal(total)
        if self.name == "mean":
            if not items:
                return literal(0.0)
            total = 0
            for it in items:
                total = total + _require_number(it)
            return literal(total / len(items))
        raise ValueExprError(f"unknown aggregation {self.name!r}")

    def render(self) -> str:
        return self.name


COUNT = Aggregation("count")
SUM = Aggregation("sum")
MEAN = Aggregation("mean")


@dataclass(frozen=True)
class Combination:
    """n-ary function over tuples of children."""

    name: str  # "product" | "sum"
    arity: int = 2

    def apply(self, items: tuple[Item, ...]) -> Item:
        if len(items) != self.arity:
            raise ValueExprError(
                f"{self.name} expects {self.arity} items, got {len(items)}"
            )
        numbers = [_require_number(i) for i in items]
        if self.name == "product":
            out: int | float = 1
            for n in numbers:
                out = out * n
            return literal(out)
        if self.name == "sum":
            return literal(sum(numbers))
        raise ValueExprError(f"unknown combination {self.name!r}")

    def render(self) -> str:
        return self.name


PRODUCT = Combination("product", 2)


Edge = tuple[Item, Item]


@dataclass(frozen=True)
class EdgeMap:
    """Edge → edge transformation for ``tvmap``.

    ``type_pair(:Rel)`` maps ⟨i, j⟩ to ⟨:Rel[i], :Rel[j]⟩ (first image item
    when multi-valued); ``identity`` keeps the edge.
    """

    name: str  # "identity" | "type_pair"
    rel: RelationPath | None = None

    def apply(self, resolver: Resolver, edge: Edge) -> Edge:
        if self.name == "identity":
            return edge
        if self.name == "type_pair":
            if self.rel is None:
                raise ValueExprError("type_pair needs a relation path")
            relation = resolver.resolve_path(self.rel)

            def first_image(item: Item) -> Item:
                image = relation.image_of(item)
                if not image:
                    raise ValueExprError(f"no image for {item!r} under {self.rel}")
                return image[0]

            return (first_image(edge[0]), first_image(edge[1]))
        raise ValueExprError(f"unknown edge map {self.name!r}")

    def render(self) -> str:
        if self.name == "type_pair":
            return f"type_pair({self.rel})"
        return self.name


@dataclass(frozen=True)
class EdgeFold:
    """Fold (avmap) or one-shot combination (cvmap) over a path's edges.

    ``count`` yields the number of edges, i.e. the path length.
    """

    name: str  # "count"

    def fold(self, resolver: Resolver, edges: list[Edge]) -> list[Item]:
        if self.name == "count":
            return [literal(len(edges))]
        raise ValueExprError(f"unknown edge fold {self.name!r}")

    def render(self) -> str:
        return self.name


EDGE_COUNT = EdgeFold("count")
