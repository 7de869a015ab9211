"""HTTP/JSON service over datasets, sessions, evaluation and analysis.

All endpoints live under ``/v1``.  Datasets are registered at startup and
shared read-only; each session has a single writer, enforced by a per
session lock (concurrent evals queue by default, or get 409 when the app is
created with ``queue_writes=False``).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import RedirectResponse

from .. import dsl, grammar
from ..evaluator import EvaluationError, evaluate_statement
from ..ingest import fingerprint, schema_summary
from ..model import Dataset, ResolutionError, SetNode, ShapeError, TrailsetError
from ..session import Session
from .schemas import (
    CreateSessionRequest,
    CreateSessionResponse,
    DatasetInfo,
    EvalError,
    EvalRequest,
    EvalResponse,
    GrammarCheckRequest,
    GrammarCheckResponse,
    ItemModel,
    ItemsResponse,
    ManifestResponse,
    OperatorParam,
    OperatorSignature,
    RelationSummary,
    ReplayRequest,
    ReplayResponse,
    SchemaResponse,
    TrailNode,
    TrailResponse,
    TreeNode,
)


@dataclass
class _SessionEntry:
    session: Session
    dataset_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)


class Registry:
    def __init__(self) -> None:
        self.datasets: dict[str, Dataset] = {}
        self.sessions: dict[str, _SessionEntry] = {}
        self._counter = 0

    def add_dataset(self, name: str, dataset: Dataset) -> None:
        self.datasets[name] = dataset

    def new_session(self, dataset_id: str) -> str:
        if dataset_id not in self.datasets:
            raise KeyError(dataset_id)
        self._counter += 1
        sid = f"sess{self._counter}"
        self.sessions[sid] = _SessionEntry(Session(self.datasets[dataset_id]), dataset_id)
        return sid


def _item_model(item) -> ItemModel:
    return ItemModel(id=item.id, kind=item.kind, label=item.label)


def _tree_node(node: SetNode) -> TreeNode:
    return TreeNode(
        item=_item_model(node.item),
        children=[_tree_node(c) for c in node.children],
    )


def create_app(
    datasets: dict[str, Dataset] | None = None,
    queue_writes: bool = True,
    serve_ui: bool = True,
) -> FastAPI:
    app = FastAPI(title="trailset", version="0.1.0")
    registry = Registry()
    app.state.registry = registry
    for name, ds in (datasets or {}).items():
        registry.add_dataset(name, ds)

    def _dataset(dataset_id: str) -> Dataset:
        try:
            return registry.datasets[dataset_id]
        except KeyError:
            raise HTTPException(404, f"unknown dataset {dataset_id!r}")

    def _session(session_id: str) -> _SessionEntry:
        try:
            return registry.sessions[session_id]
        except KeyError:
            raise HTTPException(404, f"unknown session {session_id!r}")

    def _find_state(state_id: str):
        if "." in state_id:
            sess_id, name = state_id.split(".", 1)
            entry = _session(sess_id)
            if name not in entry.session.states:
                raise HTTPException(404, f"unknown state {state_id!r}")
            return entry.session, entry.session.states[name]
        for entry in registry.sessions.values():
            if state_id in entry.session.states:
                return entry.session, entry.session.states[state_id]
        raise HTTPException(404, f"unknown state {state_id!r}")

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/v1/datasets", response_model=list[DatasetInfo])
    def list_datasets() -> list[DatasetInfo]:
        return [
            DatasetInfo(
                id=name,
                fingerprint=fingerprint(ds),
                entities=len(ds.entities),
                relations=len(ds.relations),
            )
            for name, ds in registry.datasets.items()
        ]

    @app.get("/v1/datasets/{dataset_id}/schema", response_model=SchemaResponse)
    def dataset_schema(dataset_id: str) -> SchemaResponse:
        ds = _dataset(dataset_id)
        return SchemaResponse(
            datasetId=dataset_id,
            relations=[RelationSummary(**row) for row in schema_summary(ds)],
        )

    @app.post("/v1/sessions", response_model=CreateSessionResponse)
    def create_session(req: CreateSessionRequest) -> CreateSessionResponse:
        try:
            sid = registry.new_session(req.datasetId)
        except KeyError:
            raise HTTPException(404, f"unknown dataset {req.datasetId!r}")
        return CreateSessionResponse(sessionId=sid)

    @app.post("/v1/sessions/{session_id}/eval", response_model=EvalResponse)
    def eval_script(session_id: str, req: EvalRequest) -> EvalResponse:
        entry = _session(session_id)
        try:
            script = dsl.parse_script(req.script)
        except dsl.ParseError as exc:
            raise HTTPException(400, str(exc))
        if not queue_writes and not entry.lock.acquire(blocking=False):
            raise HTTPException(409, "session is busy")
        if queue_writes:
            entry.lock.acquire()
        try:
            before = set(entry.session.states)
            errors: list[EvalError] = []
            for stmt in script.statements:
                try:
                    evaluate_statement(entry.session, stmt)
                except (EvaluationError, TrailsetError) as exc:
                    errors.append(
                        EvalError(statement=dsl.print_ast(stmt), message=str(exc))
                    )
                    break
            created = [
                f"{session_id}.{sid}"
                for sid in entry.session.order
                if sid not in before
            ]
            return EvalResponse(stateIds=created, errors=errors)
        finally:
            entry.lock.release()

    @app.get("/v1/sessions/{session_id}/trail", response_model=TrailResponse)
    def trail(session_id: str) -> TrailResponse:
        entry = _session(session_id)
        data = entry.session.trail()
        return TrailResponse(
            nodes=[TrailNode(**n) for n in data["nodes"]],
            edges=[list(e) for e in data["edges"]],
        )

    @app.post("/v1/sessions/{session_id}/replay", response_model=ReplayResponse)
    def replay(session_id: str, req: ReplayRequest) -> ReplayResponse:
        entry = _session(session_id)
        with entry.lock:
            try:
                created = entry.session.replay(req.stateIds, req.substitutions)
            except (ResolutionError, ShapeError) as exc:
                raise HTTPException(400, str(exc))
            return ReplayResponse(stateIds=[f"{session_id}.{s.id}" for s in created])

    @app.get("/v1/states/{state_id}/items", response_model=ItemsResponse)
    def state_items(state_id: str, offset: int = 0, limit: int = 50) -> ItemsResponse:
        session, state = _find_state(state_id)
        try:
            extension = state.extension
        except TrailsetError as exc:
            raise HTTPException(400, str(exc))
        children = extension.children
        window = children[offset : offset + limit]
        return ItemsResponse(
            stateId=state_id,
            total=len(children),
            offset=offset,
            limit=limit,
            root=_item_model(extension.root),
            children=[_tree_node(c) for c in window],
        )

    @app.post("/v1/grammar/check", response_model=GrammarCheckResponse)
    def grammar_check(req: GrammarCheckRequest) -> GrammarCheckResponse:
        try:
            if "->" in req.grammar:
                g = grammar.parse_grammar(req.grammar, name="inline")
            else:
                g = grammar.grammar_preset(req.grammar.strip())
            sk = grammar.parse_skeleton(req.expr)
        except (grammar.GrammarError, dsl.ParseError) as exc:
            raise HTTPException(400, str(exc))
        derivation = grammar.derivable(g, sk)
        return GrammarCheckResponse(
            accepted=derivation is not None,
            skeleton=sk.render(),
            derivation=derivation.render() if derivation else None,
            warnings=grammar.lint_skeleton(sk),
        )

    @app.get("/v1/manifest/operators", response_model=ManifestResponse)
    def manifest() -> ManifestResponse:
        return ManifestResponse(operators=OPERATOR_MANIFEST, predicates=PREDICATES)

    if serve_ui:
        import os

        from fastapi.staticfiles import StaticFiles

        ui_dir = os.environ.get(
            "TRAILSET_UI_DIR",
            os.path.join(os.path.dirname(__file__), "..", "..", "..", "frontend", "dist"),
        )
        if os.path.isdir(ui_dir):
            app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

            @app.get("/", include_in_schema=False)
            def index() -> RedirectResponse:
                return RedirectResponse("/ui/")

    return app


PREDICATES = [
    "equals", "equalsOne", "contains", "matchAll", "matchOne",
    "not", "and", "or", "greaterThan", "true",
]

OPERATOR_MANIFEST = [
    OperatorSignature(
        name="pivot",
        summary="replace the leaves by the items they relate to",
        params=[OperatorParam(name="relation", kind="relation")],
    ),
    OperatorSignature(
        name="refine",
        summary="keep the paths whose items pass the filters",
        params=[OperatorParam(name="filter", kind="filter")],
    ),
    OperatorSignature(
        name="group",
        summary="insert related items as new parents",
        params=[
            OperatorParam(name="relation", kind="relation"),
            OperatorParam(name="level", kind="level", required=False),
        ],
    ),
    OperatorSignature(
        name="rank",
        summary="order one level by a descending score",
        params=[
            OperatorParam(name="level", kind="level"),
            OperatorParam(name="score", kind="score"),
        ],
    ),
    OperatorSignature(
        name="slice",
        summary="keep a window of the top-level children",
        params=[OperatorParam(name="range", kind="range")],
    ),
    OperatorSignature(
        name="correlate",
        summary="find connection chains into another set",
        params=[
            OperatorParam(name="other", kind="set"),
            OperatorParam(name="maxLength", kind="level", required=False),
        ],
    ),
    OperatorSignature(
        name="thmap",
        summary="transform every child at one level",
        params=[
            OperatorParam(name="level", kind="level", required=False),
            OperatorParam(name="f", kind="function"),
        ],
    ),
    OperatorSignature(
        name="ahmap",
        summary="fold each children set to one value",
        params=[
            OperatorParam(name="level", kind="level", required=False),
            OperatorParam(name="f", kind="function"),
        ],
    ),
    OperatorSignature(
        name="chmap",
        summary="combine tuples of children",
        params=[
            OperatorParam(name="level", kind="level", required=False),
            OperatorParam(name="f", kind="function"),
            OperatorParam(name="select", kind="text", required=False),
        ],
    ),
    OperatorSignature(
        name="tvmap",
        summary="map every edge of every path",
        params=[OperatorParam(name="f", kind="function")],
    ),
    OperatorSignature(
        name="avmap",
        summary="fold each path's edges to one value",
        params=[OperatorParam(name="f", kind="function")],
    ),
    OperatorSignature(
        name="cvmap",
        summary="combine each path's edges in one application",
        params=[OperatorParam(name="f", kind="function")],
    ),
    OperatorSignature(
        name="unite",
        summary="union of two path sets",
        params=[OperatorParam(name="other", kind="set")],
    ),
    OperatorSignature(
        name="intersect",
        summary="intersection of two path sets",
        params=[OperatorParam(name="other", kind="set")],
    ),
    OperatorSignature(
        name="diff",
        summary="paths of this set absent from the other",
        params=[OperatorParam(name="other", kind="set")],
    ),
    OperatorSignature(
        name="branch",
        summary="apply two independent expressions to one input",
        params=[
            OperatorParam(name="first", kind="text"),
            OperatorParam(name="second", kind="text"),
        ],
    ),
]
