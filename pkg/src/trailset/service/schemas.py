"""Request/response models for the HTTP API."""
from __future__ import annotations

from pydantic import BaseModel


class DatasetInfo(BaseModel):
    id: str
    fingerprint: str
    entities: int
    relations: int


class CreateSessionRequest(BaseModel):
    datasetId: str


class CreateSessionResponse(BaseModel):
    sessionId: str


class EvalRequest(BaseModel):
    script: str


class EvalError(BaseModel):
    statement: str
    message: str


class EvalResponse(BaseModel):
    stateIds: list[str]
    errors: list[EvalError]


class ItemModel(BaseModel):
    id: str
    kind: str
    label: str | None = None


class TreeNode(BaseModel):
    item: ItemModel
    children: list["TreeNode"] = []


class ItemsResponse(BaseModel):
    stateId: str
    total: int
    offset: int
    limit: int
    root: ItemModel
    children: list[TreeNode]


class TrailNode(BaseModel):
    id: str
    intentionText: str


class TrailResponse(BaseModel):
    nodes: list[TrailNode]
    edges: list[list[str]]


class RelationSummary(BaseModel):
    id: str
    pairs: int
    domainSize: int
    imageSize: int


class SchemaResponse(BaseModel):
    datasetId: str
    relations: list[RelationSummary]


class GrammarCheckRequest(BaseModel):
    grammar: str  # preset name or grammar text
    expr: str


class GrammarCheckResponse(BaseModel):
    accepted: bool
    skeleton: str
    derivation: str | None = None
    warnings: list[str] = []


class ReplayRequest(BaseModel):
    stateIds: list[str]
    substitutions: dict[str, str] = {}


class ReplayResponse(BaseModel):
    stateIds: list[str]


class OperatorParam(BaseModel):
    name: str
    kind: str  # "set" | "relation" | "filter" | "level" | "score" | "function" | "range" | "text"
    required: bool = True


class OperatorSignature(BaseModel):
    name: str
    params: list[OperatorParam]
    summary: str


class ManifestResponse(BaseModel):
    operators: list[OperatorSignature]
    predicates: list[str]


TreeNode.model_rebuild()
