"""Tree normal forms, surgery, and the multicurve recipe."""

import pytest

from multitwist.recipe import (
    CurveRecipeOutput,
    EndTreeSpec,
    FaceInfo,
    RecipeError,
    build_multicurves,
    curve_is_essential,
    induced_subtree,
    ladder_tree,
    loch_ness_tree,
    simplify_tree,
    surgery,
    verify_recipe,
)
from multitwist.surfaces import cylinders, euler_characteristic


class TestInducedSubtree:
    def test_full_binary_tree(self):
        t = induced_subtree(["cone:"], depth=3)
        assert len(t.vertices()) == 1 + 2 + 4 + 8
        assert len(t.leaves()) == 8
        assert t.leaves() <= t.frontier

    def test_single_ray(self):
        t = induced_subtree(["000"], depth=3)
        assert t.vertices() == {"", "0", "00", "000"}

    def test_comb(self):
        addrs = ["0" * 5] + [("0" * k) + "1" for k in range(5)]
        t = induced_subtree(addrs, depth=5)
        # the spine plus one tooth per level
        assert "0001" in t.vertices() and "00000" in t.vertices()
        assert t.is_simple()  # teeth at every level attach directly already

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            induced_subtree([], depth=3)


class TestSimplify:
    def test_already_simple_unchanged(self):
        t = induced_subtree(["000"], depth=3)
        s = simplify_tree(t)
        assert s.vertices() == t.vertices()

    def test_chain_before_branch_contracts(self):
        # ray with a tooth deep down: the degree-2 run above the branching
        # vertex contracts
        addrs = ["000000", "00001"]
        t = induced_subtree(addrs, depth=6)
        s = simplify_tree(t)
        assert s.is_simple()
        assert len(s.vertices()) < len(t.vertices())

    def test_idempotent(self):
        addrs = ["0" * 6] + [("0" * k) + "1" for k in (2, 4)]
        t = induced_subtree(addrs, depth=6)
        s1 = simplify_tree(t)
        s2 = simplify_tree(s1)
        assert s1.vertices() == s2.vertices()
        assert dict(s1.parents) == dict(s2.parents)

    def test_comb_teeth_attach_directly(self):
        addrs = ["0" * 5] + [("0" * k) + "1" for k in range(5)]
        s = simplify_tree(induced_subtree(addrs, depth=5))
        assert s.is_simple()


class TestSurgery:
    def test_empty_marks_change_nothing(self):
        t = induced_subtree(["000"], depth=3)
        g = surgery(t, marks=())
        assert g.triangles == 0
        assert g.genus() == 0

    def test_single_mark_gives_one_triangle(self):
        t = loch_ness_tree(1)
        g = surgery(t)
        assert g.triangles == 1
        assert g.genus() == 1

    def test_loch_ness_depth_g(self):
        for depth in (1, 2, 4):
            g = surgery(loch_ness_tree(depth))
            assert g.triangles == depth
            assert g.genus() == depth  # one independent cycle per triangle

    def test_leaf_mark_rejected(self):
        t = induced_subtree(["000"], depth=3)
        leaf = sorted(t.leaves())[0]
        with pytest.raises(ValueError, match="leaf"):
            surgery(t, marks={leaf})


class TestBuildMulticurves:
    def test_once_punctured_torus_m1(self):
        out = build_multicurves((1, 1), 1)
        rep = verify_recipe(out, 1)
        assert rep.passes
        marked = next(f for f in out.faces if f.marked)
        assert marked.sides == 2
        assert euler_characteristic(out.complex) == 0
        assert sum(1 for f in out.faces if f.puncture) == 1

    def test_loch_ness_m2(self):
        out = build_multicurves(loch_ness_tree(3), 2)
        rep = verify_recipe(out, 2)
        assert rep.passes
        assert out.genus == 3
        assert sum(1 for f in out.faces if f.end) == 1
        census = {f.sides for f in out.faces if not f.marked}
        assert census <= {2, 4, 6, 8}

    def test_odd_m_adds_extra_pair(self):
        # the odd-weight chamber block ends on a straight curve: the marked
        # face has 2m sides for odd m
        out = build_multicurves((1, 2), 3)
        marked = next(f for f in out.faces if f.marked)
        assert marked.sides == 6

    def test_weight_five(self):
        out = build_multicurves((2, 4), 5)
        rep = verify_recipe(out, 5)
        assert rep.passes
        assert max(f.sides for f in out.faces if not f.marked) <= 8
        marked = next(f for f in out.faces if f.marked)
        assert marked.sides == 10

    def test_sphere_needs_four_punctures(self):
        with pytest.raises(RecipeError, match="sphere"):
            build_multicurves((0, 3), 1)

    def test_angle_excess_bound(self):
        with pytest.raises(RecipeError, match="at least"):
            build_multicurves((0, 4), 3)

    def test_intersection_bound_everywhere(self):
        for src, m in [((2, 0), 2), ((3, 2), 3), (loch_ness_tree(4), 1),
                       (ladder_tree(2), 2)]:
            out = build_multicurves(src, m)
            rep = verify_recipe(out, m)
            assert rep.max_pair_intersections <= 2

    def test_every_bigon_is_flagged(self):
        out = build_multicurves((1, 2), 1)
        for f in out.faces:
            if f.sides == 2:
                assert f.puncture or f.marked


class TestVerifyRecipe:
    def test_hand_built_violations_fail_loudly(self):
        out = build_multicurves((1, 1), 2)
        # oversize the first unmarked face
        victim = next(f.index for f in out.faces if not f.marked)
        faces = tuple(FaceInfo(f.index, 10 if f.index == victim else f.sides,
                               f.puncture, f.end, f.marked)
                      for f in out.faces)
        bad = CurveRecipeOutput(graph=out.graph, ribbon=out.ribbon, faces=faces,
                                marked_face=out.marked_face, m=2,
                                genus=out.genus, complex=out.complex)
        rep = verify_recipe(bad, 2)
        assert not rep.passes
        assert any("sides" in msg for msg in rep.failures)

    def test_wrong_marked_size_fails(self):
        out = build_multicurves((1, 1), 2)
        rep = verify_recipe(out, 3)  # marked face is a 4-gon, not a 6-gon
        assert not rep.passes
        assert any("marked" in msg for msg in rep.failures)


class TestEssential:
    def test_all_generated_curves_essential(self):
        for src, m in [((1, 1), 1), ((2, 0), 2), ((2, 1), 3)]:
            out = build_multicurves(src, m)
            for v in out.graph.vertices():
                assert curve_is_essential(out.complex, v)

    def test_curve_bounding_once_punctured_disc_detected(self):
        # staircase-style torus where one curve cuts off a once-punctured
        # disc: two squares, second curve encircles a puncture
        from multitwist.graphs import BipartiteConfigGraph
        from multitwist.surfaces import RibbonData, build_surface

        g = BipartiteConfigGraph.make([0], [1], {0: (0, 1), 1: (0, 1)}, 4)
        rib = RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0},
                              flips=[(0, "N"), (1, "N")])
        m = build_surface(g, rib, values={0: 1, 1: 1})
        # pillowcase: every curve bounds twice-punctured discs when all four
        # bigons are punctured -> essential; with only one puncture per side
        # the cut pieces are once-punctured discs -> not essential
        tokens = [c.corners[0] for c in m.corner_cycles]
        m_two = build_surface(g, rib, values={0: 1, 1: 1}, punctures=tokens[:2])
        assert not curve_is_essential(m_two, 0) or not curve_is_essential(m_two, 1)
        m_all = build_surface(g, rib, values={0: 1, 1: 1}, punctures=tokens)
        assert curve_is_essential(m_all, 0) and curve_is_essential(m_all, 1)


class TestFeedsFlatBuilder:
    def test_cone_angles_match_census(self):
        from multitwist.graphs import perron_pair
        from multitwist.surfaces import build_surface

        out = build_multicurves((2, 1), 2)
        h = perron_pair(out.graph, tol=1e-13)
        m = build_surface(out.graph, out.ribbon, h)
        assert sorted(c.k for c in m.corner_cycles) == sorted(f.sides for f in out.faces)
        for direction in ("horizontal", "vertical"):
            for cyl in cylinders(m, direction):
                assert abs(float(cyl.modulus) * h.lam - 1) < 1e-10

    def test_valence_bound_constant_across_depths(self):
        worst = 0
        for depth in (1, 2, 3, 4, 5):
            out = build_multicurves(loch_ness_tree(depth), 2)
            rep = verify_recipe(out, 2)
            worst = max(worst, rep.valence)
        assert worst <= 16  # frozen family constant


class TestExplicitTreePipeline:
    def test_mixed_tree_through_surgery(self):
        # root - a - b(genus) - c(frontier), root - p(puncture leaf)
        t = EndTreeSpec.make(
            "r", {"a": "r", "b": "a", "c": "b", "p": "r"},
            punctures={"p"}, genus_marks={"b"}, frontier={"c"})
        g = surgery(t)
        assert g.triangles == 1 and g.genus() == 1
        out = build_multicurves(t, 2)
        assert out.genus == 1
        assert sum(1 for f in out.faces if f.puncture) == 2  # puncture + end
        assert sum(1 for f in out.faces if f.end) == 1
        assert verify_recipe(out, 2).passes


class TestLargeWeights:
    def test_general_chain_covers_big_m(self):
        for g, n, m in ((3, 2, 6), (2, 4, 4), (3, 4, 8)):
            try:
                out = build_multicurves((g, n), m)
            except RecipeError:
                continue
            rep = verify_recipe(out, m)
            assert rep.passes, (g, n, m, rep.failures)
            marked = next(f for f in out.faces if f.marked)
            assert marked.sides == 2 * m
        # at least the first must be feasible
        out = build_multicurves((3, 2), 6)
        assert verify_recipe(out, 6).passes
