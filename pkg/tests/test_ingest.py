"""Triple loading, serialization round-trips, and the citation fixture."""
import pytest

from trailset.ingest import (
    IngestError,
    build_citation_fixture,
    demo_dataset,
    fingerprint,
    load_triples,
    schema_set,
    schema_summary,
    serialize,
)

PUBLICATIONS_TSV = """\
# four papers, three authors, three affiliations
p1\t:Author\ta1
p2\t:Author\ta1
p3\t:Author\ta2
p2\t:Author\ta2
p3\t:Author\ta3
p4\t:Author\ta3
a1\t:Affiliation\tf1
a2\t:Affiliation\tf1
a3\t:Affiliation\tf2
f3\t:label\t"f3"
"""


class TestLoadTriples:
    def test_publications_file_counts(self):
        ds = load_triples(PUBLICATIONS_TSV)
        assert len(ds.entities) == 10
        assert len(ds.relations) == 2
        assert len(ds.relations[":Author"].pairs) == 6
        assert len(ds.relations[":Affiliation"].pairs) == 3

    def test_empty_file(self):
        ds = load_triples("")
        assert not ds.entities and not ds.relations

    def test_integer_literal_objects(self):
        ds = load_triples("p1\t:Year\t2002")
        (pair,) = ds.relations[":Year"].pairs
        assert pair[1].kind == "int" and pair[1].value == 2002

    def test_float_and_string_literals(self):
        ds = load_triples('x\t:w\t3.25\nx\t:n\t"hello world"')
        assert ds.relations[":w"].pairs[0][1].kind == "float"
        assert ds.relations[":n"].pairs[0][1].value == "hello world"

    def test_malformed_line_reports_number(self):
        with pytest.raises(IngestError) as err:
            load_triples("p1\t:Author\ta1\nbroken line\n")
        assert "line 2" in str(err.value)

    def test_relation_must_be_prefixed(self):
        with pytest.raises(IngestError):
            load_triples("p1\tAuthor\ta1")

    def test_literal_subject_rejected(self):
        with pytest.raises(IngestError):
            load_triples("2002\t:Year\tp1")

    def test_labels_attach_to_items(self):
        ds = load_triples('p1\t:label\t"A fine paper"\np1\t:Author\ta1')
        assert ds.item("p1").label == "A fine paper"


class TestRoundTrip:
    def test_serialize_then_load_is_identity(self):
        ds = demo_dataset()
        again = load_triples(serialize(ds))
        assert set(again.entities) == set(ds.entities)
        assert set(again.relations) == set(ds.relations)
        for rel_id, rel in ds.relations.items():
            assert again.relations[rel_id].pair_keys() == rel.pair_keys()

    def test_fingerprint_stable_and_content_sensitive(self):
        ds = demo_dataset()
        assert fingerprint(ds) == fingerprint(demo_dataset())
        assert fingerprint(ds) != fingerprint(demo_dataset(with_year=False))


class TestSchemaSummary:
    def test_demo_counts(self):
        rows = {r["id"]: r for r in schema_summary(demo_dataset(with_year=False))}
        assert rows[":Author"]["pairs"] == 6
        assert rows[":Affiliation"]["pairs"] == 3
        assert rows[":Author"]["domainSize"] == 4
        assert rows[":Author"]["imageSize"] == 3

    def test_empty_dataset(self):
        assert schema_summary(load_triples("")) == []

    def test_counts_match_pair_scan(self):
        ds = demo_dataset()
        for row in schema_summary(ds):
            rel = ds.relations[row["id"]]
            assert row["pairs"] == len(rel.pairs)
            assert row["domainSize"] == len({i.key for i, _ in rel.pairs})
            assert row["imageSize"] == len({j.key for _, j in rel.pairs})

    def test_schema_browsable_as_set(self):
        s = schema_set(demo_dataset())
        assert {i.id for i in s.leaves()} == {":Author", ":Affiliation", ":Year"}


class TestCitationFixture:
    def test_scale_is_publication_count(self):
        fx = build_citation_fixture(seed=1, scale=100)
        type_rel = fx.dataset.relations[":type"]
        pubs = [i for i, t in type_rel.pairs if t.id == "Publication"]
        assert len(pubs) == 100

    def test_scale_bounds(self):
        with pytest.raises(IngestError):
            build_citation_fixture(seed=1, scale=10)
        with pytest.raises(IngestError):
            build_citation_fixture(seed=1, scale=9000)

    def test_deterministic_serialization(self):
        a = build_citation_fixture(seed=3, scale=60)
        b = build_citation_fixture(seed=3, scale=60)
        assert serialize(a.dataset) == serialize(b.dataset)
        assert a.mean_citation_year == b.mean_citation_year
        c = build_citation_fixture(seed=4, scale=60)
        assert serialize(a.dataset) != serialize(c.dataset)

    def test_mean_year_matches_dataset_scan(self):
        fx = build_citation_fixture(seed=1, scale=200)
        year = fx.dataset.relations[":year"]
        years = []
        for cid in fx.citation_ids:
            (y,) = year.image_of(fx.dataset.item(cid))
            years.append(y.value)
        assert fx.mean_citation_year == sum(years) / len(years)

    def test_planted_self_citations_exist(self):
        fx = build_citation_fixture(seed=1, scale=200)
        assert fx.self_citation_count >= 2
        assert fx.same_venue_citation_count >= 2
        assert fx.self_citation_count <= len(fx.citation_ids)

    def test_designated_paper_exists_with_citations(self):
        fx = build_citation_fixture(seed=1, scale=200)
        assert fx.dataset.has_item("p")
        cite = fx.dataset.relations[":cite"]
        assert {i.id for i in cite.image_of(fx.dataset.item("p"))} == set(
            fx.citation_ids
        )
