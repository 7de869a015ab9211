"""Evaluation of parsed expressions against a session.

Each operator application becomes one session invocation, bottom-up; a
statement name binds the state produced by its root application.  Free
identifiers resolve, in order, to the branch input (``irs``), previously
bound states, the reserved dataset source ``d``, or a dataset item (which
yields a singleton set).  A trailing ``!`` back-propagates a refinement
over the pivot chain beneath it.
"""
from __future__ import annotations

from typing import Any, Sequence

from . import dsl
from .mappings import (
    EDGE_COUNT,
    IDENTITY,
    Aggregation,
    Combination,
    EdgeMap,
    Transformation,
)
from .model import RelationPath, TrailsetError
from .predicates import (
    And,
    Contains,
    Equals,
    EqualsOne,
    GreaterThan,
    MatchAll,
    MatchOne,
    Not,
    Or,
    PathPattern,
    Predicate,
    SetValue,
    TruePred,
)
from .session import ExplorationState, Session
from .values import (
    BinOp,
    ChildCount,
    ItemPlaceholder,
    Num,
    RelImage,
    Round,
    ValueExpr,
)


class EvaluationError(TrailsetError):
    def __init__(self, message: str, source: str | None = None):
        self.source = source
        super().__init__(f"{message}" + (f" in {source!r}" if source else ""))


Result = ExplorationState | tuple[ExplorationState, ExplorationState]


def evaluate_script(session: Session, text: str) -> list[Result]:
    """Run a whole script; returns one result per statement."""
    script = dsl.parse_script(text)
    return [evaluate_statement(session, stmt) for stmt in script.statements]


def evaluate(session: Session, text: str) -> Result:
    """Run a script and return the final statement's state."""
    results = evaluate_script(session, text)
    if not results:
        raise EvaluationError("empty script")
    return results[-1]


def evaluate_statement(session: Session, stmt: dsl.Stmt) -> Result:
    ev = _Evaluator(session)
    result = ev.eval(stmt.expr, name=stmt.name)
    if stmt.name is not None:
        if isinstance(result, tuple):
            session.bindings[stmt.name] = tuple(s.id for s in result)
        elif result.id != stmt.name:
            # plain alias like "x = s1"
            session.bindings[stmt.name] = (result.id,)
    root = stmt.expr
    is_register = isinstance(root, dsl.OpCall) and root.op == "register"
    if not is_register:
        session.journal.append(dsl.print_ast(stmt))
    return result


class _Evaluator:
    def __init__(self, session: Session):
        self.session = session
        self.scope: dict[str, ExplorationState] = {}

    # -- sources ---------------------------------------------------------

    def resolve_source(self, name: str) -> ExplorationState:
        if name in self.scope:
            return self.scope[name]
        if name in self.session.bindings:
            bound = self.session.bindings[name]
            if len(bound) == 1:
                return self.session.states[bound[0]]
            raise EvaluationError(
                f"{name!r} names a branch pair, not a single set"
            )
        if name in self.session.states:
            return self.session.states[name]
        if name == "d":
            return self.session.dataset_state()
        if name == "irs":
            raise EvaluationError("irs is only defined inside branch bodies")
        if self.session.dataset.has_item(name):
            return self.session.item_state(name)
        raise EvaluationError(f"unbound name {name!r}")

    # -- expressions -------------------------------------------------------

    def eval(self, node: dsl.Node, name: str | None = None) -> Result:
        if isinstance(node, dsl.Bang):
            state = self.eval(node.inner, name=name)
            if isinstance(state, tuple):
                raise EvaluationError("'!' does not apply to a branch pair")
            self.session.back_propagate(state)
            return state
        if isinstance(node, dsl.Source):
            return self.resolve_source(node.name)
        if isinstance(node, dsl.SetLit):
            return self.session.items_state(node.ids, name=name)
        if isinstance(node, dsl.OpCall):
            return self.eval_call(node, name)
        raise EvaluationError(f"cannot evaluate {dsl.print_ast(node)!r} as a set")

    def eval_state(self, node: dsl.Node) -> ExplorationState:
        result = self.eval(node)
        if isinstance(result, tuple):
            raise EvaluationError("a branch pair cannot be used as one set")
        return result

    def eval_call(self, call: dsl.OpCall, name: str | None) -> Result:
        op = call.op
        if op == "branch":
            return self.eval_branch(call, name)
        if op == "register":
            return self.eval_register(call)

        positional = [a for a in call.args if not isinstance(a, dsl.Kwarg)]
        kwargs = {a.name: a.value for a in call.args if isinstance(a, dsl.Kwarg)}

        if call.receiver is not None:
            receiver = self.eval_state(call.receiver)
        else:
            if not positional:
                raise EvaluationError(f"{op} needs an input set")
            receiver = self.eval_state(positional.pop(0))

        inputs: list[str] = [receiver.id]
        args: dict[str, Any] = {}

        try:
            self.bind_args(op, positional, kwargs, inputs, args)
        except TrailsetError as exc:
            raise EvaluationError(str(exc), dsl.print_ast(call)) from exc

        if call.slice is not None:
            args["slice_range"] = call.slice
        return self.session.invoke(op, tuple(inputs), args, name=name, journal=False)

    def bind_args(
        self,
        op: str,
        positional: list[dsl.Node],
        kwargs: dict[str, dsl.Node],
        inputs: list[str],
        args: dict[str, Any],
    ) -> None:
        if op == "pivot":
            args["rel"] = self.relpath_args(positional)
        elif op == "refine":
            args["pattern"] = self.pattern_arg(positional)
        elif op == "group":
            rel_parts = [p for p in positional if isinstance(p, dsl.RelPathLit)]
            args["rel"] = self.relpath_args(rel_parts)
            rest = [p for p in positional if not isinstance(p, dsl.RelPathLit)]
            if rest:
                args["level"] = self.int_arg(rest[0])
            if "level" in kwargs:
                args["level"] = self.int_arg(kwargs["level"])
            if "keep_ungrouped" in kwargs:
                args["keep_ungrouped"] = bool(self.int_arg(kwargs["keep_ungrouped"]))
        elif op == "rank":
            if len(positional) != 2:
                raise EvaluationError("rank takes a level and a score expression")
            args["level"] = self.int_arg(positional[0])
            args["score"] = self.value_arg(positional[1])
        elif op == "slice":
            args["start"] = self.int_arg(positional[0])
            args["stop"] = self.int_arg(positional[1])
        elif op == "correlate":
            if not positional:
                raise EvaluationError("correlate needs a target set")
            other = self.eval_state(positional.pop(0))
            inputs.append(other.id)
            if positional:
                args["pattern"] = self.pattern_arg(positional)
            if "pattern" in kwargs:
                args["pattern"] = self.pattern_arg([kwargs["pattern"]])
            if "maxLength" in kwargs:
                args["max_length"] = self.int_arg(kwargs["maxLength"])
            if "undirected" in kwargs:
                args["undirected"] = bool(self.int_arg(kwargs["undirected"]))
        elif op in ("thmap", "ahmap", "chmap"):
            level: int | None = None
            if len(positional) == 2:
                level = self.int_arg(positional.pop(0))
            if "level" in kwargs:
                level = self.int_arg(kwargs["level"])
            fn_node = kwargs.get("f") if "f" in kwargs else (positional[0] if positional else None)
            if fn_node is None:
                raise EvaluationError(f"{op} needs a mapping function")
            args["level"] = level
            args["f"] = self.mapping_arg(op, fn_node)
            if op == "chmap" and "select" in kwargs:
                args["selector"] = self.selector_arg(kwargs["select"])
        elif op in ("tvmap", "avmap", "cvmap"):
            fn_node = kwargs.get("f") if "f" in kwargs else (positional[0] if positional else None)
            if fn_node is None:
                raise EvaluationError(f"{op} needs a mapping function")
            args["f"] = self.mapping_arg(op, fn_node)
        elif op in ("unite", "intersect", "diff"):
            if len(positional) != 1:
                raise EvaluationError(f"{op} takes exactly one other set")
            other = self.eval_state(positional[0])
            inputs.append(other.id)
        else:
            raise EvaluationError(f"unknown operator {op!r}")

    def eval_branch(self, call: dsl.OpCall, name: str | None) -> Result:
        positional = [a for a in call.args if not isinstance(a, dsl.Kwarg)]
        if call.receiver is not None:
            positional.insert(0, call.receiver)
        if len(positional) != 3:
            raise EvaluationError("branch takes an input and two expressions")
        input_state = self.eval_state(positional[0])
        saved = self.scope.get("irs")
        self.scope["irs"] = input_state
        try:
            names = (f"{name}_1", f"{name}_2") if name else (None, None)
            first = self.eval(positional[1], name=names[0])
            second = self.eval(positional[2], name=names[1])
        finally:
            if saved is None:
                self.scope.pop("irs", None)
            else:
                self.scope["irs"] = saved
        if isinstance(first, tuple) or isinstance(second, tuple):
            raise EvaluationError("branch bodies must produce single sets")
        return (first, second)

    def eval_register(self, call: dsl.OpCall) -> ExplorationState:
        positional = [a for a in call.args if not isinstance(a, dsl.Kwarg)]
        path_args = [p for p in positional if isinstance(p, dsl.RelPathLit)]
        state_args = [p for p in positional if not isinstance(p, dsl.RelPathLit)]
        if call.receiver is not None:
            state_args.insert(0, call.receiver)
        if len(path_args) != 1 or len(state_args) != 1:
            raise EvaluationError("register takes a relation name and a state")
        rel_path = path_args[0]
        if len(rel_path.parts) != 1 or rel_path.inverted:
            raise EvaluationError("register needs a single relation name")
        state = self.eval_state(state_args[0])
        self.session.register_computed_relation(state, rel_path.parts[0])
        return state

    # -- argument conversion ------------------------------------------------

    def relpath_args(self, nodes: Sequence[dsl.Node]) -> RelationPath:
        paths = []
        for n in nodes:
            if not isinstance(n, dsl.RelPathLit):
                raise EvaluationError(f"expected a relation path, got {dsl.print_ast(n)!r}")
            paths.append(n.to_model())
        if not paths:
            raise EvaluationError("expected a relation path")
        combined = paths[0]
        for p in paths[1:]:
            combined = combined + p
        return combined

    def int_arg(self, node: dsl.Node) -> int:
        if isinstance(node, dsl.Num) and isinstance(node.value, int):
            return node.value
        raise EvaluationError(f"expected an integer, got {dsl.print_ast(node)!r}")

    def pattern_arg(self, nodes: Sequence[dsl.Node]) -> PathPattern:
        if not nodes:
            return PathPattern.over()
        if len(nodes) == 1 and isinstance(nodes[0], dsl.Pred) and nodes[0].name == "pattern":
            filters = [self.predicate_arg(a) for a in nodes[0].args]
            return PathPattern.over(*filters)
        filters = [self.predicate_arg(n) for n in nodes]
        return PathPattern.over(*filters)

    def predicate_arg(self, node: dsl.Node) -> Predicate:
        if not isinstance(node, dsl.Pred):
            raise EvaluationError(f"expected a filter, got {dsl.print_ast(node)!r}")
        name, args = node.name, list(node.args)
        if name == "true":
            return TruePred()
        if name == "not":
            return Not(self.predicate_arg(args[0]))
        if name == "and":
            return And(tuple(self.predicate_arg(a) for a in args))
        if name == "or":
            return Or(tuple(self.predicate_arg(a) for a in args))
        if name in ("matchAll", "matchOne"):
            keywords = []
            for a in args:
                if not isinstance(a, dsl.Str):
                    raise EvaluationError(f"{name} takes keyword strings")
                keywords.append(a.value)
            cls = MatchAll if name == "matchAll" else MatchOne
            return cls(tuple(keywords))
        if name == "greaterThan":
            if len(args) != 2:
                raise EvaluationError("greaterThan takes two value expressions")
            return GreaterThan(self.value_arg(args[0]), self.value_arg(args[1]))
        if name in ("equals", "equalsOne", "contains"):
            rel: RelationPath | None = None
            if args and isinstance(args[0], dsl.RelPathLit):
                rel = args.pop(0).to_model()
            if len(args) != 1:
                raise EvaluationError(f"{name} takes a value")
            value = self.filter_value(args[0])
            if name == "equalsOne":
                if rel is None or not isinstance(value, SetValue):
                    raise EvaluationError("equalsOne takes a relation path and a set")
                return EqualsOne(rel, value)
            if name == "contains":
                if rel is None:
                    raise EvaluationError("contains takes a relation path and a value")
                return Contains(rel, value)
            return Equals(value, rel)
        raise EvaluationError(f"unknown filter {name!r}")

    def filter_value(self, node: dsl.Node):
        if isinstance(node, dsl.Num):
            return node.value
        if isinstance(node, dsl.Str):
            return node.value
        if isinstance(node, dsl.Source):
            name = node.name
            if (
                name in self.scope
                or name in self.session.states
                or name == "d"
            ):
                state = self.resolve_source(name)
                return SetValue(state.extension.leaf_keys(), name=state.id)
            if self.session.dataset.has_item(name):
                return self.session.dataset.item(name)
            raise EvaluationError(f"unbound name {name!r} in filter")
        if isinstance(node, (dsl.SetLit, dsl.OpCall)):
            state = self.eval_state(node)
            return SetValue(state.extension.leaf_keys(), name=state.id)
        raise EvaluationError(f"cannot use {dsl.print_ast(node)!r} as a filter value")

    def value_arg(self, node: dsl.Node) -> ValueExpr:
        if isinstance(node, dsl.Num):
            return Num(node.value)
        if isinstance(node, dsl.ItemPh):
            return ItemPlaceholder()
        if isinstance(node, dsl.RelLookup):
            return RelImage(node.path.to_model(), self.value_arg(node.arg))
        if isinstance(node, dsl.ValBin):
            return BinOp(node.op, self.value_arg(node.left), self.value_arg(node.right))
        if isinstance(node, dsl.Neg):
            return BinOp("*", self.value_arg(node.operand), Num(-1))
        if isinstance(node, dsl.FuncCall):
            if node.name == "c":
                return ChildCount()
            if node.name == "round":
                if len(node.args) != 2:
                    raise EvaluationError("round takes an expression and digits")
                digits = node.args[1]
                if not isinstance(digits, dsl.Num) or not isinstance(digits.value, int):
                    raise EvaluationError("round digits must be an integer")
                return Round(self.value_arg(node.args[0]), digits.value)
        raise EvaluationError(f"cannot use {dsl.print_ast(node)!r} as a value expression")

    def mapping_arg(self, op: str, node: dsl.Node):
        if op == "thmap":
            if isinstance(node, dsl.Source) and node.name == "identity":
                return IDENTITY
            return Transformation(self.value_arg(node))
        if op == "ahmap":
            if isinstance(node, dsl.Source) and node.name in ("count", "sum", "mean"):
                return Aggregation(node.name)
            raise EvaluationError("ahmap takes count, sum or mean")
        if op == "chmap":
            if isinstance(node, dsl.Source) and node.name in ("product", "sum"):
                return Combination(node.name, 2)
            raise EvaluationError("chmap takes product or sum")
        if op == "tvmap":
            if isinstance(node, dsl.Source) and node.name == "identity":
                return EdgeMap("identity")
            if isinstance(node, dsl.FuncCall) and node.name == "type_pair":
                if len(node.args) != 1 or not isinstance(node.args[0], dsl.RelPathLit):
                    raise EvaluationError("type_pair takes a relation path")
                return EdgeMap("type_pair", node.args[0].to_model())
            raise EvaluationError("tvmap takes identity or type_pair(:Rel)")
        if op in ("avmap", "cvmap"):
            if isinstance(node, dsl.Source) and node.name == "count":
                return EDGE_COUNT
            raise EvaluationError(f"{op} takes count")
        raise EvaluationError(f"no mapping functions for {op!r}")

    def selector_arg(self, node: dsl.Node) -> tuple[tuple[int, ...], ...]:
        if not isinstance(node, dsl.Str):
            raise EvaluationError('chmap select is a string like "0,1;1,0"')
        combos = []
        for chunk in node.value.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            combos.append(tuple(int(x) for x in chunk.split(",")))
        return tuple(combos)
