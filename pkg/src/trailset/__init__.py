"""Exploration engine over nested item sets.

Composable set operators (pivot, refine, group, rank, correlate, maps and
set algebra) over a generic item/relation data model, recorded as a session
trail, scriptable through a small textual language, and analysable through
strategy grammars and tactical profiles.
"""
from .model import (
    Dataset,
    ExplorationSet,
    Item,
    Relation,
    RelationPath,
    ResolutionError,
    Resolver,
    ShapeError,
    TrailsetError,
    entity,
    literal,
)
from .session import ExplorationState, Invocation, Session, load_session

__all__ = [
    "Dataset",
    "ExplorationSet",
    "ExplorationState",
    "Invocation",
    "Item",
    "Relation",
    "RelationPath",
    "ResolutionError",
    "Resolver",
    "Session",
    "ShapeError",
    "TrailsetError",
    "entity",
    "literal",
    "load_session",
]

__version__ = "0.1.0"
