"""Cross-cutting operator laws on generated structures."""
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from trailset import operators as ops
from trailset.mappings import COUNT
from trailset.model import ExplorationSet, Relation, RelationPath, Resolver, entity
from trailset.predicates import Equals, MatchOne, Not, Or, PathPattern
from trailset.values import ChildCount

from oracles import (
    diff_oracle,
    group_oracle,
    intersect_oracle,
    path_set,
    random_tree,
    union_oracle,
)

POOL = [entity(f"i{k}") for k in range(8)]


def tree_strategy():
    tail = st.lists(st.sampled_from(POOL), min_size=1, max_size=3).map(tuple)
    return st.lists(tail, max_size=10).map(ExplorationSet.from_tails)


class TestSetAlgebra:
    @given(tree_strategy(), tree_strategy())
    @settings(max_examples=120, deadline=None)
    def test_unite_commutative_and_oracle(self, a, b):
        assert path_set(ops.unite(a, b)) == union_oracle(a, b)
        assert ops.unite(a, b) == ops.unite(b, a)

    @given(tree_strategy(), tree_strategy(), tree_strategy())
    @settings(max_examples=80, deadline=None)
    def test_unite_intersect_associative(self, a, b, c):
        assert ops.unite(ops.unite(a, b), c) == ops.unite(a, ops.unite(b, c))
        assert ops.intersect(ops.intersect(a, b), c) == ops.intersect(
            a, ops.intersect(b, c)
        )

    @given(tree_strategy(), tree_strategy())
    @settings(max_examples=120, deadline=None)
    def test_diff_is_disjoint_from_subtrahend(self, a, b):
        assert not path_set(ops.diff(a, b)) & path_set(b)

    def test_absorption_on_uniform_depth_pairs(self):
        # intersect(a, unite(a, b)) = a needs union steps that do not absorb
        # any of a's paths as prefixes, which uniform depth guarantees
        rng = random.Random(77)
        for _ in range(60):
            depth = rng.randint(1, 3)
            a = random_tree(rng, POOL, depth=depth)
            b = random_tree(rng, POOL, depth=depth)
            assert ops.intersect(a, ops.unite(a, b)) == a

    def test_unite_absorbs_prefix_paths_when_rebuilt(self):
        i0 = POOL[0]
        short = ExplorationSet.from_tails([(i0,)])
        long = ExplorationSet.from_tails([(i0, i0)])
        assert path_set(ops.unite(short, long)) == path_set(long)

    @given(tree_strategy(), tree_strategy())
    @settings(max_examples=120, deadline=None)
    def test_intersect_diff_oracles(self, a, b):
        assert path_set(ops.intersect(a, b)) == intersect_oracle(a, b)
        assert path_set(ops.diff(a, b)) == diff_oracle(a, b)


class TestOperatorPurity:
    def test_repeated_application_is_stable(self, resolver):
        rng = random.Random(17)
        for _ in range(30):
            s = random_tree(rng, POOL)
            before = path_set(s)
            pattern = PathPattern.over(
                Or((Equals(POOL[0]), Equals(POOL[1]), Equals(POOL[2])))
            )
            first = ops.refine(resolver, s, pattern)
            second = ops.refine(resolver, s, pattern)
            assert first == second
            assert path_set(s) == before  # input untouched


class TestRefineLaws:
    def test_refine_filters_are_subsets(self, resolver):
        rng = random.Random(29)
        for _ in range(40):
            s = random_tree(rng, POOL)
            pattern = PathPattern.over(Not(Equals(POOL[3])))
            out = ops.refine(resolver, s, pattern)
            assert path_set(out) <= path_set(s)

    def test_true_pattern_is_identity(self, resolver):
        rng = random.Random(31)
        for _ in range(40):
            s = random_tree(rng, POOL)
            assert path_set(ops.refine(resolver, s, PathPattern.over())) == path_set(s)


class TestGroupLaws:
    def test_group_inverse_recovers_grouped_leaves(self, resolver, demo):
        s = ExplorationSet.flat([entity(f"p{i}") for i in range(1, 5)])
        rel = demo.relations[":Author"]
        grouped = ops.group(resolver, s, RelationPath.of(":Author"))
        regathered = {p[-1].key for p in grouped.paths()}
        expected = {i.key for i in s.leaves() if rel.image_of(i)}
        assert regathered == expected

    def test_group_matches_pair_scan_oracle(self, resolver):
        rng = random.Random(41)
        for _ in range(30):
            s = random_tree(rng, POOL)
            pairs = tuple(
                (rng.choice(POOL), rng.choice(POOL)) for _ in range(10)
            )
            rel = Relation(":g", pairs)
            out = ops.group(resolver, s, rel)
            assert path_set(out) == group_oracle(rel, s)


class TestRankLaws:
    def test_rank_is_stable_descending_permutation(self, resolver):
        rng = random.Random(53)
        scored = [entity(f"s{k}") for k in range(10)]
        for _ in range(40):
            tails = [(rng.choice(scored),) for _ in range(rng.randint(1, 8))]
            s = ExplorationSet.from_tails(tails)
            out = ops.rank(resolver, s, 2, ChildCount())
            assert path_set(out) == path_set(s)
            counts = [len(n.children) for n in out.children]
            assert counts == sorted(counts, reverse=True)

    def test_equal_scores_preserve_input_order(self, resolver):
        items = [entity(f"t{k}") for k in range(6)]
        s = ExplorationSet.flat(items)
        out = ops.rank(resolver, s, 2, ChildCount())
        assert [n.item.id for n in out.children] == [i.id for i in items]


class TestMapLaws:
    def test_ahmap_count_equals_child_counts(self, resolver):
        rng = random.Random(61)
        for _ in range(30):
            s = random_tree(rng, POOL)
            if s.depth < 2:
                continue
            level = rng.randint(1, s.depth - 1)
            out = ops.ahmap(resolver, s, COUNT, level=level)
            for before, after in zip(s.level_nodes(level), out.level_nodes(level)):
                if level == 1:
                    break
                assert after.children[0].item.value == len(before.children)
            if level == 1:
                assert out.children[0].item.value == len(s.children)


class TestKeywordFilters:
    @given(st.sampled_from(["alpha beta", "beta gamma", "delta"]))
    @settings(max_examples=30, deadline=None)
    def test_match_one_and_all_relate(self, label):
        item = entity("x", label)
        r = Resolver.__new__(Resolver)  # predicates ignore the resolver here
        from trailset.predicates import MatchAll

        both = MatchAll(("alpha", "beta"))
        either = MatchOne(("alpha", "beta"))
        if both.test(r, item):
            assert either.test(r, item)
