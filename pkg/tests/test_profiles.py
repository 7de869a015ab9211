"""Tactical profiles and their comparison reports."""
import pytest

from trailset.profiles import (
    ProfileError,
    TacticalProfile,
    compare_profiles,
    gfacet_profile,
    parse_profile,
    profile_presets,
    seco_profile,
)


class TestPresets:
    def test_two_profile_presets(self):
        assert set(profile_presets()) == {"gfacet", "seco"}

    def test_gfacet_pivot_attributes(self):
        p = gfacet_profile()
        pivot = p.operations["pivot"]
        assert pivot["cardinality"] == ("many-to-many",)
        assert pivot["relationStructure"] == ("single",)
        assert pivot["relationType"] == ("schema",)

    def test_gfacet_refine_is_path_and_exact(self):
        refine = gfacet_profile().operations["refine"]
        assert refine["relationStructure"] == ("path-any",)
        assert refine["matchType"] == ("exact",)

    def test_gfacet_has_no_metadata_support(self):
        for attrs in gfacet_profile().operations.values():
            assert "metadata" not in attrs.get("dataType", ())


class TestComparison:
    def test_report_matches_golden_file(self):
        report = compare_profiles(gfacet_profile(), seco_profile())
        with open("tests/data/gfacet_vs_seco.golden", encoding="utf-8") as fh:
            assert report.render() + "\n" == fh.read()

    def test_findings(self):
        report = compare_profiles(gfacet_profile(), seco_profile())
        assert report.only_in_b == ["group", "map", "rank"]
        assert not report.only_in_a
        diffs = {(op, attr): (a, b) for op, attr, a, b in report.attribute_diffs}
        assert diffs[("refine", "relationType")] == (
            ("schema",),
            ("computed", "schema"),
        )
        assert diffs[("refine", "dataType")] == (("data",), ("data", "metadata"))
        # nothing else differs
        assert set(diffs) == {("refine", "relationType"), ("refine", "dataType")}

    def test_self_comparison_empty(self):
        report = compare_profiles(gfacet_profile(), gfacet_profile())
        assert report.is_empty()
        assert "no differences" in report.render()

    def test_structured_form_mirrors_text(self):
        report = compare_profiles(gfacet_profile(), seco_profile())
        data = report.to_dict()
        assert data["onlyInB"] == ["group", "map", "rank"]
        assert len(data["attributeDiffs"]) == 2


class TestSerialization:
    def test_round_trip(self):
        for build in (gfacet_profile, seco_profile):
            p = build()
            again = parse_profile(p.serialize())
            assert again.tool == p.tool
            assert again.operations == p.operations

    def test_vocabulary_enforced(self):
        p = TacticalProfile("x")
        with pytest.raises(ProfileError):
            p.add_operation("pivot", cardinality="splendid")
        with pytest.raises(ProfileError):
            p.add_operation("pivot", sparkle="yes")

    def test_parse_needs_tool_name(self):
        with pytest.raises(ProfileError):
            parse_profile("pivot.cardinality: many-to-many")
