"""Small numeric expressions over the item under evaluation.

These drive score functions (``rank``), numeric filters (``greaterThan``)
and transformation maps.  The only placeholder is ``%item``; relation
lookups like ``:Year[%item]`` read the relation image of the current item,
and ``c(%item)`` counts its children in the set being processed.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import Item, RelationPath, Resolver, SetNode, TrailsetError

MISSING = float("-inf")


class ValueExprError(TrailsetError):
    """A value expression could not be evaluated for an item."""


@dataclass(frozen=True)
class ValueExpr:
    def eval(self, ctx: "ValueContext") -> float | int | None:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ValueContext:
    resolver: Resolver
    item: Item
    node: SetNode | None = None  # occurrence in the current set, when known


@dataclass(frozen=True)
class Num(ValueExpr):
    value: int | float

    def eval(self, ctx: ValueContext) -> int | float:
        return self.value

    def render(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class ItemPlaceholder(ValueExpr):
    def eval(self, ctx: ValueContext) -> int | float | None:
        return ctx.item.numeric

    def render(self) -> str:
        return "%item"


@dataclass(frozen=True)
class RelImage(ValueExpr):
    """``:Path[expr]`` — numeric image of the item under a relation path.

    Multi-valued images collapse to their maximum; an empty image yields
    None (rank treats that as the configured missing score).
    """

    path: RelationPath
    arg: ValueExpr

    def eval(self, ctx: ValueContext) -> int | float | None:
        if not isinstance(self.arg, ItemPlaceholder):
            raise ValueExprError("relation lookup argument must be %item")
        rel = ctx.resolver.resolve_path(self.path)
        values = [v.numeric for v in rel.image_of(ctx.item)]
        numbers = [v for v in values if v is not None]
        if not numbers:
            return None
        return max(numbers)

    def render(self) -> str:
        return f"{self.path}[{self.arg.render()}]"


@dataclass(frozen=True)
class ChildCount(ValueExpr):
    """``c(%item)`` — number of children of the current occurrence."""

    def eval(self, ctx: ValueContext) -> int:
        if ctx.node is None:
            raise ValueExprError("c(%item) needs the item's position in a set")
        return len(ctx.node.children)

    def render(self) -> str:
        return "c(%item)"


@dataclass(frozen=True)
class BinOp(ValueExpr):
    op: str  # "+", "-", "*"
    left: ValueExpr
    right: ValueExpr

    def eval(self, ctx: ValueContext) -> int | float | None:
        a = self.left.eval(ctx)
        b = self.right.eval(ctx)
        if a is None or b is None:
            return None
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        raise ValueExprError(f"unknown operator {self.op!r}")

    def render(self) -> str:
        return f"{self.left.render()} {self.op} {self.right.render()}"


@dataclass(frozen=True)
class Round(ValueExpr):
    """``round(expr, ndigits)`` — useful for currency-style conversions."""

    arg: ValueExpr
    ndigits: int

    def eval(self, ctx: ValueContext) -> int | float | None:
        v = self.arg.eval(ctx)
        if v is None:
            return None
        return round(v, self.ndigits)

    def render(self) -> str:
        return f"round({self.arg.render()}, {self.ndigits})"


def evaluate_score(
    expr: ValueExpr,
    resolver: Resolver,
    item: Item,
    node: SetNode | None = None,
    missing: float = MISSING,
) -> float | int:
    """Evaluate a score expression; empty relation images become ``missing``."""
    v = expr.eval(ValueContext(resolver, item, node))
    return missing if v is None else v
