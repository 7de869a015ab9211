"""Exploration sessions: a DAG of states with intentions and extensions.

A state records the *intention* (operator plus argument bindings) and
materialises its *extension* (the result set) lazily, memoized.  States are
append-only; reuse and replay always create new states, so trails never
rewrite history.  One writer per session; materialised states may be read
concurrently.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import operators as ops
from .model import (
    Dataset,
    ExplorationSet,
    Item,
    Relation,
    ResolutionError,
    Resolver,
    ShapeError,
)
from .predicates import IDENTITY_PATTERN, PathPattern

SOURCE_OPS = ("dataset", "item", "items")


@dataclass
class Invocation:
    """Operator identifier plus argument bindings; the durable record of
    how a state came to be."""

    op: str
    inputs: tuple[str, ...] = ()
    args: dict[str, Any] = field(default_factory=dict)

    def render(self, name: str | None = None) -> str:
        text = self._render_expr()
        return f"{name} = {text}" if name else text

    def _render_expr(self) -> str:
        op, inputs, args = self.op, self.inputs, self.args
        if op == "dataset":
            return "d"
        if op == "item":
            return str(args["id"])
        if op == "items":
            return "{" + ", ".join(args["ids"]) + "}"
        if op == "backprop":
            return f"backprop({inputs[1]}, {args['steps_back']})"

        parts: list[str] = []
        if op in ("pivot", "group"):
            parts.append(str(args["rel"]))
        if op == "group" and args.get("level") is not None:
            parts.append(f"level={args['level']}")
        if op == "group" and args.get("keep_ungrouped"):
            parts.append("keep_ungrouped=1")
        if op == "refine":
            pattern: PathPattern = args["pattern"]
            if len(pattern.filters) == 1:
                pass
            elif len(pattern.filters) == 2:
                parts.append(pattern.filters[1].render())
            else:
                parts.append(pattern.render())
        if op == "rank":
            parts.append(str(args["level"]))
            parts.append(args["score"].render())
        if op == "slice":
            parts.append(str(args["start"]))
            parts.append(str(args["stop"]))
        if op == "correlate":
            parts.append(inputs[1])
            if args.get("pattern") is not None:
                parts.append(args["pattern"].render())
            if args.get("max_length") not in (None, ops.DEFAULT_CORRELATE_MAX_LENGTH):
                parts.append(f"maxLength={args['max_length']}")
        if op in ("thmap", "ahmap", "chmap", "tvmap", "avmap", "cvmap"):
            if args.get("level") is not None:
                parts.append(f"level={args['level']}")
            parts.append(args["f"].render())
        if op == "chmap" and args.get("selector") is not None:
            sel = ";".join(",".join(str(i) for i in combo) for combo in args["selector"])
            parts.append(f'select="{sel}"')
        if op in ("unite", "intersect", "diff"):
            parts.append(inputs[1])

        receiver = inputs[0] if inputs else ""
        text = f"{receiver}.{op}({', '.join(parts)})"
        if args.get("slice_range") is not None:
            a, b = args["slice_range"]
            text += f"[{a}..{b}]"
        return text


class ExplorationState:
    """One node of the exploration process graph."""

    def __init__(self, id: str, invocation: Invocation, session: "Session", text: str | None = None):
        self.id = id
        self.invocation = invocation
        self.created_at = time.time()
        self.text = text if text is not None else invocation.render(id)
        self._session = session
        self._extension: ExplorationSet | None = None

    @property
    def extension(self) -> ExplorationSet:
        if self._extension is None:
            self._extension = self._session._compute(self)
        return self._extension

    def __repr__(self) -> str:
        return f"<state {self.id}: {self.text}>"


class Session:
    """Append-only record of an exploration over one dataset."""

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self.computed: dict[str, Relation] = {}
        self.resolver = Resolver(dataset, self.computed)
        self.states: dict[str, ExplorationState] = {}
        self.order: list[str] = []
        self.deps: list[tuple[str, str]] = []
        self.bindings: dict[str, tuple[str, ...]] = {}  # branch pair names
        self.journal: list[str] = []
        self._counter = 0

    # -- state management ----------------------------------------------

    def _fresh_id(self) -> str:
        self._counter += 1
        return f"_t{self._counter}"

    def state(self, id: str) -> ExplorationState:
        try:
            return self.states[id]
        except KeyError:
            raise ResolutionError(f"unknown state {id!r}") from None

    def invoke(
        self,
        op: str,
        inputs: Sequence[str] = (),
        args: dict[str, Any] | None = None,
        name: str | None = None,
        text: str | None = None,
        journal: bool = True,
    ) -> ExplorationState:
        """Append a new state for the given operator application."""
        for ref in inputs:
            if ref not in self.states:
                raise ResolutionError(f"unknown state {ref!r}")
        if name is not None and name in self.states:
            raise ValueError(f"state id {name!r} already bound")
        sid = name if name is not None else self._fresh_id()
        inv = Invocation(op, tuple(inputs), args or {})
        state = ExplorationState(sid, inv, self, text)
        self.states[sid] = state
        self.order.append(sid)
        for ref in inputs:
            self.deps.append((ref, sid))
        if journal and op not in SOURCE_OPS:
            self.journal.append(state.text)
        return state

    # convenience sources ------------------------------------------------

    def dataset_state(self) -> ExplorationState:
        if "d" not in self.states:
            self.invoke("dataset", name="d", journal=False)
        return self.states["d"]

    def item_state(self, item_id: str) -> ExplorationState:
        if item_id not in self.states:
            self.dataset.item(item_id)  # raises for unknown ids
            self.invoke("item", args={"id": item_id}, name=item_id, journal=False)
        return self.states[item_id]

    def items_state(self, ids: Sequence[str], name: str | None = None) -> ExplorationState:
        for i in ids:
            self.dataset.item(i)
        return self.invoke("items", args={"ids": tuple(ids)}, name=name, journal=False)

    # -- extension computation -------------------------------------------

    def _compute(self, state: ExplorationState) -> ExplorationSet:
        inv = state.invocation
        r = self.resolver
        ext = [self.states[i].extension for i in inv.inputs]
        a = inv.args
        op = inv.op
        if op == "dataset":
            result = self.dataset.as_set()
        elif op == "item":
            result = ExplorationSet.flat([self.dataset.item(a["id"])])
        elif op == "items":
            result = ExplorationSet.flat([self.dataset.item(i) for i in a["ids"]])
        elif op == "pivot":
            result = ops.pivot(r, ext[0], a["rel"])
        elif op == "refine":
            result = ops.refine(r, ext[0], a.get("pattern", IDENTITY_PATTERN))
        elif op == "group":
            result = ops.group(
                r, ext[0], a["rel"], a.get("level"), a.get("keep_ungrouped", False)
            )
        elif op == "rank":
            result = ops.rank(r, ext[0], a["level"], a["score"])
        elif op == "slice":
            result = ops.slice_top(ext[0], a["start"], a["stop"])
        elif op == "correlate":
            result = ops.correlate(
                r,
                ext[0],
                ext[1],
                a.get("pattern"),
                a.get("max_length") or ops.DEFAULT_CORRELATE_MAX_LENGTH,
                a.get("undirected", False),
            )
        elif op == "thmap":
            result = ops.thmap(r, ext[0], a["f"], a.get("level"))
        elif op == "ahmap":
            result = ops.ahmap(r, ext[0], a["f"], a.get("level"))
        elif op == "chmap":
            result = ops.chmap(r, ext[0], a["f"], a.get("level"), a.get("selector"))
        elif op == "tvmap":
            result = ops.tvmap(r, ext[0], a["f"])
        elif op == "avmap":
            result = ops.avmap(r, ext[0], a["f"])
        elif op == "cvmap":
            result = ops.cvmap(r, ext[0], a["f"])
        elif op == "unite":
            result = ops.unite(ext[0], ext[1])
        elif op == "intersect":
            result = ops.intersect(ext[0], ext[1])
        elif op == "diff":
            result = ops.diff(ext[0], ext[1])
        else:
            raise ShapeError(f"unknown operator {op!r}")
        if a.get("slice_range") is not None:
            start, stop = a["slice_range"]
            result = ops.slice_top(result, start, stop)
        return result

    # -- session-level operations ------------------------------------------

    def back_propagate(self, refine_state: ExplorationState) -> list[ExplorationState]:
        """Push the restriction of a refinement back over the pivot chain it
        was applied to, emitting one derived state per chain link.

        The originals stay untouched; derived states hold only the items
        with at least one surviving descendant path.
        """
        if refine_state.invocation.op != "refine" or not refine_state.invocation.inputs:
            raise ShapeError("back-propagation applies to a refine state")
        chain: list[ExplorationState] = []
        cur = self.states[refine_state.invocation.inputs[0]]
        while cur.invocation.op == "pivot":
            chain.append(cur)
            cur = self.states[cur.invocation.inputs[0]]
        if not chain:
            raise ShapeError("refinement input is not a pivot chain")

        survivors = refine_state.extension.leaf_keys()
        derived: list[ExplorationState] = []
        for steps_back, pivot_state in enumerate(chain, start=1):
            ancestor = self.states[pivot_state.invocation.inputs[0]]
            relation = self.resolver.resolve_path(pivot_state.invocation.args["rel"])
            kept = [
                p
                for p in ancestor.extension.paths()
                if any(j.key in survivors for j in relation.image_of(p[-1]))
            ]
            restricted = ExplorationSet.from_paths(kept)
            state = self.invoke(
                "backprop",
                inputs=(ancestor.id, refine_state.id),
                args={"steps_back": steps_back},
                journal=False,
            )
            state._extension = restricted
            derived.append(state)
            survivors = restricted.leaf_keys()
        return derived

    def register_computed_relation(self, state: ExplorationState, name: str) -> Relation:
        """Turn a depth-3, single-valued state extension (item → value) into
        a named computed relation usable by refine, rank and group."""
        if not name.startswith(":"):
            raise ValueError(f"relation name must start with ':', got {name!r}")
        if name in self.dataset.relations:
            raise ValueError(f"{name} collides with a schema relation")
        if name in self.computed:
            raise ValueError(f"{name} is already registered")
        extension = state.extension
        pairs: list[tuple[Item, Item]] = []
        for node in extension.children:
            if len(node.children) > 1 or any(c.children for c in node.children):
                raise ShapeError(
                    "computed relations need a two-level item → value shape"
                )
            for child in node.children:
                pairs.append((node.item, child.item))
        rel = Relation(name, tuple(pairs), provenance="computed")
        self.computed[name] = rel
        self.journal.append(f"register({name}, {state.id})")
        return rel

    def trail(self) -> dict[str, Any]:
        """Topologically ordered nodes with intention summaries plus the
        dependency edges."""
        nodes = [
            {"id": sid, "intentionText": self.states[sid].text}
            for sid in self.order
        ]
        edges = [[a, b] for a, b in self.deps]
        return {"nodes": nodes, "edges": edges}

    def replay(
        self,
        state_ids: Sequence[str],
        substitutions: dict[str, str] | None = None,
    ) -> list[ExplorationState]:
        """Re-evaluate the induced subgraph of the given states, mapping
        substituted sources to their replacements and reusing everything
        else.  Fresh states are appended; the originals stay."""
        substitutions = substitutions or {}
        for old, new in substitutions.items():
            self.state(old)
            self.state(new)
        requested = set(state_ids)
        mapping: dict[str, str] = dict(substitutions)
        created: list[ExplorationState] = []
        for sid in list(self.order):
            if sid not in requested or sid in substitutions:
                continue
            src = self.states[sid]
            new_inputs = tuple(mapping.get(i, i) for i in src.invocation.inputs)
            inv = src.invocation
            state = self.invoke(inv.op, new_inputs, dict(inv.args))
            mapping[sid] = state.id
            created.append(state)
        return created

    def is_acyclic(self) -> bool:
        """Deps always point from earlier to later states, so the graph is
        acyclic by construction; this re-checks it explicitly."""
        position = {sid: n for n, sid in enumerate(self.order)}
        return all(position[a] < position[b] for a, b in self.deps)

    # -- persistence -------------------------------------------------------

    def save(self, path: str) -> None:
        from .ingest import fingerprint

        lines = [f"#dataset {fingerprint(self.dataset)}"]
        lines.extend(self.journal)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def load_session(path: str, dataset: Dataset, verify: bool = True) -> Session:
    """Rebuild a session by re-evaluating its saved script."""
    from .evaluator import evaluate_script
    from .ingest import fingerprint

    with open(path, encoding="utf-8") as fh:
        content = fh.read()
    lines = content.splitlines()
    if not lines or not lines[0].startswith("#dataset "):
        raise ValueError("session file must start with a '#dataset' header")
    fp = lines[0].split(" ", 1)[1].strip()
    if verify and fp != fingerprint(dataset):
        raise ValueError("session file was recorded against a different dataset")
    session = Session(dataset)
    evaluate_script(session, "\n".join(lines[1:]))
    return session
