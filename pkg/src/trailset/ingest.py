"""Dataset loading, serialization and the built-in fixtures.

The on-disk format is one tab-separated triple per line::

    subject <TAB> relation <TAB> object

Relations start with ``:``.  Objects are entity ids, or literals by syntax:
quoted strings, bare integers, or decimals.  The reserved ``:label``
relation sets display labels instead of creating a relation.  ``#`` lines
and blank lines are skipped.
"""
from __future__ import annotations

import hashlib
import io
import random
import re
from dataclasses import dataclass, field

from .model import (
    Dataset,
    Item,
    Relation,
    TrailsetError,
    entity,
    literal,
)

LABEL_RELATION = ":label"

_INT_RE = re.compile(r"-?\d+$")
_FLOAT_RE = re.compile(r"-?\d+\.\d+$")


class IngestError(TrailsetError):
    pass


@dataclass(frozen=True)
class TripleRecord:
    subject: str
    relation: str
    object: Item


def _parse_object(text: str) -> Item:
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return literal(text[1:-1].replace('\\"', '"'))
    if _INT_RE.match(text):
        return literal(int(text))
    if _FLOAT_RE.match(text):
        return literal(float(text))
    return entity(text)


def load_triples(source: str | io.TextIOBase) -> Dataset:
    """Parse a triple file (text or open file) into a dataset."""
    if isinstance(source, str):
        text = source
    else:
        text = source.read()

    labels: dict[str, str] = {}
    relation_pairs: dict[str, list[tuple[Item, Item]]] = {}
    relation_order: list[str] = []
    entities: dict[str, Item] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise IngestError(
                f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        subject, relation, obj_text = (f.strip() for f in fields)
        if not relation.startswith(":"):
            raise IngestError(f"line {lineno}: relation must start with ':'")
        if _INT_RE.match(subject) or _FLOAT_RE.match(subject) or subject.startswith('"'):
            raise IngestError(f"line {lineno}: subject must be an entity id")
        if subject not in entities:
            entities[subject] = entity(subject)
        if relation == LABEL_RELATION:
            obj = _parse_object(obj_text)
            labels[subject] = str(obj.value)
            continue
        obj = _parse_object(obj_text)
        if obj.kind == "entity" and obj.id not in entities:
            entities[obj.id] = obj
        if relation not in relation_pairs:
            relation_pairs[relation] = []
            relation_order.append(relation)
        relation_pairs[relation].append((entities[subject], obj))

    for eid, text_label in labels.items():
        entities[eid] = entity(eid, text_label)

    relations = []
    for rel_id in relation_order:
        pairs = []
        seen = set()
        for i, j in relation_pairs[rel_id]:
            i = entities.get(i.id, i) if i.kind == "entity" else i
            j = entities.get(j.id, j) if j.kind == "entity" else j
            key = (i.key, j.key)
            if key not in seen:
                seen.add(key)
                pairs.append((i, j))
        relations.append(Relation(rel_id, tuple(pairs)))
    return Dataset(entities.values(), relations)


def load_file(path: str) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return load_triples(fh.read())


def _serialize_object(item: Item) -> str:
    if item.kind == "entity":
        return item.id
    if item.kind == "string":
        return '"' + item.id.replace('"', '\\"') + '"'
    return item.id


def serialize(dataset: Dataset) -> str:
    """Canonical text form: sorted records, one line per relation pair.

    Entities mentioned by no relation survive as ``:label`` lines (their id
    doubles as the label text, which is also the display fallback).
    """
    lines: list[str] = []
    mentioned: set[str] = set()
    for rel in dataset.relations.values():
        for i, j in rel.pairs:
            mentioned.add(i.id)
            if j.kind == "entity":
                mentioned.add(j.id)
            lines.append(f"{i.id}\t{rel.id}\t{_serialize_object(j)}")
    for item in dataset.entities.values():
        if item.label is not None:
            lines.append(f'{item.id}\t{LABEL_RELATION}\t"{item.label}"')
        elif item.id not in mentioned:
            lines.append(f'{item.id}\t{LABEL_RELATION}\t"{item.id}"')
    return "\n".join(sorted(lines)) + "\n"


def fingerprint(dataset: Dataset) -> str:
    return hashlib.sha256(serialize(dataset).encode("utf-8")).hexdigest()


def schema_summary(dataset: Dataset) -> list[dict]:
    """Relation ids with pair counts and domain/image sizes."""
    return [
        {
            "id": rel.id,
            "pairs": len(rel.pairs),
            "domainSize": len(rel.domain()),
            "imageSize": len(rel.image()),
        }
        for rel in dataset.relations.values()
    ]


def schema_set(dataset: Dataset):
    """The schema itself as a flat exploration set, so the usual operators
    can browse relation metadata."""
    from .model import ExplorationSet

    items = [
        entity(rel.id, f"{rel.id} ({len(rel.pairs)} pairs)")
        for rel in dataset.relations.values()
    ]
    return ExplorationSet.flat(items)


# -- the small publications demo -----------------------------------------


def demo_dataset(with_year: bool = True) -> Dataset:
    """Four papers, three authors, three affiliations; the running example
    used across the test-suite and the docs."""
    p1, p2, p3, p4 = (entity(f"p{i}") for i in range(1, 5))
    a1, a2, a3 = (entity(f"a{i}") for i in range(1, 4))
    f1, f2, f3 = (entity(f"f{i}") for i in range(1, 4))
    author = Relation(
        ":Author",
        ((p1, a1), (p2, a1), (p3, a2), (p2, a2), (p3, a3), (p4, a3)),
    )
    affiliation = Relation(":Affiliation", ((a1, f1), (a2, f1), (a3, f2)))
    relations = [author, affiliation]
    if with_year:
        relations.append(
            Relation(
                ":Year",
                (
                    (p2, literal(2001)),
                    (p1, literal(2002)),
                    (p3, literal(2003)),
                    (p4, literal(2004)),
                ),
            )
        )
    items = [p1, p2, p3, p4, a1, a2, a3, f1, f2, f3]
    return Dataset(items, relations)


# -- synthetic citation corpus -------------------------------------------


@dataclass
class CitationFixture:
    """A generated citation corpus plus the ground truth planted in it.

    The designated paper has id ``p``; the recorded statistics are what an
    exploration of the corpus should find for it.
    """

    dataset: Dataset
    paper_id: str
    citation_ids: list[str] = field(default_factory=list)
    mean_citation_year: float = 0.0
    self_citation_count: int = 0
    same_venue_citation_count: int = 0


def build_citation_fixture(seed: int, scale: int) -> CitationFixture:
    """Deterministic corpus of ``scale`` publications with authors, venues,
    years, citations and holder records.

    Publications relate to holder records via ``:isContextFor`` and records
    to their authors or venue via ``:isHeldBy``; ``:cite`` links
    publications, ``:year`` gives publication years, and ``:type`` tags
    publications, authors and venues.
    """
    if not (50 <= scale <= 5000):
        raise IngestError(f"scale must be in [50, 5000], got {scale}")
    rng = random.Random(seed)

    n_authors = max(8, scale // 3)
    n_venues = max(3, scale // 40)

    type_pub = entity("Publication")
    type_author = entity("Author")
    type_venue = entity("Venue")
    authors = [entity(f"a{i}") for i in range(1, n_authors + 1)]
    venues = [entity(f"v{i}", f"Venue {i}") for i in range(1, n_venues + 1)]

    pub_ids = ["p"] + [f"p{i}" for i in range(2, scale + 1)]
    titles = {}
    sw_share = max(10, scale // 4)
    sw_pubs = set(rng.sample(range(1, scale), k=min(sw_share, scale - 1)))
    for idx, pid in enumerate(pub_ids):
        if idx == 0:
            titles[pid] = "A survey of exploratory interfaces"
        elif idx in sw_pubs:
            titles[pid] = f"Semantic Web study {idx}"
        else:
            titles[pid] = f"Information systems report {idx}"
    pubs = [entity(pid, titles[pid]) for pid in pub_ids]
    pub_by_id = {p.id: p for p in pubs}

    type_pairs = [(p, type_pub) for p in pubs]
    type_pairs += [(a, type_author) for a in authors]
    type_pairs += [(v, type_venue) for v in venues]

    # authorship and venues via holder records
    pub_authors: dict[str, list[Item]] = {}
    pub_venue: dict[str, Item] = {}
    venue_record_index: dict[str, int] = {}  # pub id -> index into held_pairs
    context_pairs: list[tuple[Item, Item]] = []
    held_pairs: list[tuple[Item, Item]] = []
    ctx_counter = 0

    def add_holder(pub: Item, holder: Item) -> int:
        nonlocal ctx_counter
        ctx_counter += 1
        record = entity(f"r{ctx_counter}")
        context_pairs.append((pub, record))
        held_pairs.append((record, holder))
        return len(held_pairs) - 1

    for p in pubs:
        k = rng.randint(1, 3)
        chosen = rng.sample(authors, k)
        pub_authors[p.id] = chosen
        for a in chosen:
            add_holder(p, a)
        v = rng.choice(venues)
        pub_venue[p.id] = v
        venue_record_index[p.id] = add_holder(p, v)

    # years; the designated paper's citations get pairwise distinct years so
    # the mean is unambiguous
    years: dict[str, int] = {}
    for p in pubs:
        years[p.id] = rng.randint(1995, 2020)

    # citations of the designated paper
    paper = pubs[0]
    n_cites = min(12, scale // 10)
    cited = rng.sample(pubs[1:], n_cites)
    distinct_years = rng.sample(range(1996, 2019), n_cites)
    for c, y in zip(cited, distinct_years):
        years[c.id] = y

    cite_pairs: list[tuple[Item, Item]] = [(paper, c) for c in cited]

    # make some citations self-citations: held by the paper's own authors
    own_authors = pub_authors[paper.id]
    n_self = max(2, n_cites // 4)
    self_cited = cited[:n_self]
    for c in self_cited:
        if not any(a.id in {x.id for x in own_authors} for a in pub_authors[c.id]):
            extra = own_authors[0]
            pub_authors[c.id].append(extra)
            add_holder(c, extra)

    # make some citations share the paper's venue
    n_same_venue = max(2, n_cites // 3)
    target_venue = pub_venue[paper.id]
    same_venue = cited[-n_same_venue:]
    for c in same_venue:
        if pub_venue[c.id].id != target_venue.id:
            n = venue_record_index[c.id]
            held_pairs[n] = (held_pairs[n][0], target_venue)
            pub_venue[c.id] = target_venue

    # background citations among the other publications
    for p in pubs[1:]:
        for _ in range(rng.randint(0, 4)):
            other = rng.choice(pubs)
            if other.id != p.id:
                cite_pairs.append((p, other))
    cite_pairs = list(dict.fromkeys(cite_pairs))

    year_pairs = [(pub_by_id[pid], literal(y)) for pid, y in years.items()]

    dataset = Dataset(
        pubs + authors + venues + [type_pub, type_author, type_venue],
        [
            Relation(":cite", tuple(cite_pairs)),
            Relation(":year", tuple(year_pairs)),
            Relation(":isContextFor", tuple(context_pairs)),
            Relation(":isHeldBy", tuple(held_pairs)),
            Relation(":type", tuple(type_pairs)),
        ],
    )

    # ground truth, computed the way the generator planted it
    cited_years = [years[c.id] for c in cited]
    mean_year = sum(cited_years) / len(cited_years)
    own = {a.id for a in pub_authors[paper.id]}
    self_count = sum(
        1 for c in cited if any(a.id in own for a in pub_authors[c.id])
    )
    venue_count = sum(1 for c in cited if pub_venue[c.id].id == target_venue.id)

    return CitationFixture(
        dataset=dataset,
        paper_id=paper.id,
        citation_ids=[c.id for c in cited],
        mean_citation_year=mean_year,
        self_citation_count=self_count,
        same_venue_citation_count=venue_count,
    )
