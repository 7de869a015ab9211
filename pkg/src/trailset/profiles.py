"""Tactical profiles: what a tool's atomic actions can take and return.

A profile describes each available operation by a small attribute map
(cardinality, accepted data and relation types, relation structure, match
type, mapping kinds).  Comparing two profiles reports operations present in
only one of them plus per-attribute differences of the shared ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import TrailsetError

CARDINALITY = ("one-to-one", "one-to-many", "many-to-many")
DATA_TYPES = ("data", "metadata")
RELATION_TYPES = ("schema", "computed")
RELATION_STRUCTURES = ("single", "path-any", "path-fixed")
MATCH_TYPES = ("exact", "approximate")
MAPPING_KINDS = ("aggregation", "combination", "transformation")

_ATTRIBUTE_VOCAB: dict[str, tuple[str, ...]] = {
    "cardinality": CARDINALITY,
    "dataType": DATA_TYPES,
    "relationType": RELATION_TYPES,
    "relationStructure": RELATION_STRUCTURES,
    "matchType": MATCH_TYPES,
    "mappingKinds": MAPPING_KINDS,
}

_SINGLE_VALUED = {"cardinality", "relationStructure"}


class ProfileError(TrailsetError):
    pass


@dataclass
class TacticalProfile:
    tool: str
    operations: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)

    def add_operation(self, name: str, **attrs: str | tuple[str, ...]) -> None:
        table: dict[str, tuple[str, ...]] = {}
        for attr, value in attrs.items():
            if attr not in _ATTRIBUTE_VOCAB:
                raise ProfileError(f"unknown attribute {attr!r}")
            values = (value,) if isinstance(value, str) else tuple(value)
            vocab = _ATTRIBUTE_VOCAB[attr]
            for v in values:
                if v not in vocab:
                    raise ProfileError(f"{attr} value {v!r} not in {vocab}")
            if attr in _SINGLE_VALUED and len(values) != 1:
                raise ProfileError(f"{attr} takes exactly one value")
            table[attr] = values
        self.operations[name] = table

    # -- text form ----------------------------------------------------

    def serialize(self) -> str:
        lines = [f"tool: {self.tool}"]
        for op, attrs in self.operations.items():
            for attr, values in attrs.items():
                lines.append(f"{op}.{attr}: {', '.join(values)}")
        return "\n".join(lines) + "\n"


def parse_profile(text: str) -> TacticalProfile:
    tool: str | None = None
    staged: dict[str, dict[str, tuple[str, ...]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ProfileError(f"line {lineno}: expected 'key: value'")
        key, value = (part.strip() for part in line.split(":", 1))
        if key == "tool":
            tool = value
            continue
        if "." not in key:
            raise ProfileError(f"line {lineno}: expected 'operation.attribute'")
        op, attr = key.split(".", 1)
        staged.setdefault(op, {})[attr] = tuple(
            v.strip() for v in value.split(",") if v.strip()
        )
    if tool is None:
        raise ProfileError("profile must declare a tool name")
    profile = TacticalProfile(tool)
    for op, attrs in staged.items():
        profile.add_operation(op, **attrs)
    return profile


@dataclass
class ProfileComparison:
    a: str
    b: str
    only_in_a: list[str]
    only_in_b: list[str]
    attribute_diffs: list[tuple[str, str, tuple[str, ...], tuple[str, ...]]]

    def is_empty(self) -> bool:
        return not (self.only_in_a or self.only_in_b or self.attribute_diffs)

    def render(self) -> str:
        lines = [f"tactical comparison: {self.a} vs {self.b}"]
        if self.is_empty():
            lines.append("no differences")
            return "\n".join(lines)
        if self.only_in_a:
            lines.append(f"operations only in {self.a}: {', '.join(self.only_in_a)}")
        if self.only_in_b:
            lines.append(f"operations only in {self.b}: {', '.join(self.only_in_b)}")
        for op, attr, va, vb in self.attribute_diffs:
            lines.append(
                f"{op}.{attr}: {self.a}={','.join(va) or '-'}"
                f" vs {self.b}={','.join(vb) or '-'}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "onlyInA": self.only_in_a,
            "onlyInB": self.only_in_b,
            "attributeDiffs": [
                {"operation": op, "attribute": attr, "a": list(va), "b": list(vb)}
                for op, attr, va, vb in self.attribute_diffs
            ],
        }


def compare_profiles(pa: TacticalProfile, pb: TacticalProfile) -> ProfileComparison:
    ops_a = set(pa.operations)
    ops_b = set(pb.operations)
    diffs: list[tuple[str, str, tuple[str, ...], tuple[str, ...]]] = []
    for op in sorted(ops_a & ops_b):
        attrs = set(pa.operations[op]) | set(pb.operations[op])
        for attr in sorted(attrs):
            va = tuple(sorted(pa.operations[op].get(attr, ())))
            vb = tuple(sorted(pb.operations[op].get(attr, ())))
            if va != vb:
                diffs.append((op, attr, va, vb))
    return ProfileComparison(
        pa.tool,
        pb.tool,
        sorted(ops_a - ops_b),
        sorted(ops_b - ops_a),
        diffs,
    )


# -- presets ---------------------------------------------------------------


def gfacet_profile() -> TacticalProfile:
    """Graph-style faceted browser: pivot and refine only, schema relations,
    no metadata manipulation."""
    p = TacticalProfile("gfacet")
    p.add_operation(
        "pivot",
        cardinality="many-to-many",
        dataType=("data",),
        relationType=("schema",),
        relationStructure="single",
    )
    p.add_operation(
        "refine",
        cardinality="many-to-many",
        dataType=("data",),
        relationType=("schema",),
        relationStructure="path-any",
        matchType=("exact",),
    )
    return p


def seco_profile() -> TacticalProfile:
    """Tabular exploration service: adds group, rank and map, filters over
    computed relations and item-type metadata."""
    p = TacticalProfile("seco")
    p.add_operation(
        "pivot",
        cardinality="many-to-many",
        dataType=("data",),
        relationType=("schema",),
        relationStructure="single",
    )
    p.add_operation(
        "refine",
        cardinality="many-to-many",
        dataType=("data", "metadata"),
        relationType=("schema", "computed"),
        relationStructure="path-any",
        matchType=("exact",),
    )
    p.add_operation(
        "group",
        cardinality="many-to-many",
        dataType=("data",),
        relationType=("schema", "computed"),
        relationStructure="single",
    )
    p.add_operation(
        "rank",
        cardinality="many-to-many",
        dataType=("data",),
        relationType=("schema", "computed"),
        relationStructure="single",
    )
    p.add_operation(
        "map",
        cardinality="many-to-many",
        dataType=("data",),
        mappingKinds=("combination",),
    )
    return p


def profile_presets() -> dict[str, TacticalProfile]:
    return {"gfacet": gfacet_profile(), "seco": seco_profile()}
