"""Rectangle complexes: building, cylinders, cone points, double covers."""

from fractions import Fraction

import pytest

from multitwist.graphs import BipartiteConfigGraph, HarmonicAssignment, perron_pair
from multitwist.surfaces import (
    RibbonData,
    RibbonError,
    build_surface,
    cone_points,
    cylinders,
    euler_characteristic,
    is_translation,
    orientation_double_cover,
    ribbon_from_gluings,
    square_torus,
    staircase_complex,
)


def double_edge_graph():
    return BipartiteConfigGraph.make([0], [1], {0: (0, 1), 1: (0, 1)}, 4)


def unit_h(graph, lam=1):
    return HarmonicAssignment(lam=lam, values={v: 1 for v in graph.vertices()})


def pillowcase():
    rib = RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0}, flips=[(0, "N"), (1, "N")])
    return build_surface(double_edge_graph(), rib, unit_h(double_edge_graph(), lam=2))


class TestBuild:
    def test_square_torus(self):
        t = square_torus()
        assert [c.k for c in t.corner_cycles] == [4]
        assert euler_characteristic(t) == 0
        assert is_translation(t)

    def test_double_edge_two_unit_squares(self):
        g = double_edge_graph()
        rib = RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0})
        m = build_surface(g, rib, unit_h(g, lam=2))
        hc = cylinders(m, "horizontal")
        vc = cylinders(m, "vertical")
        assert len(hc) == len(vc) == 1
        assert hc[0].circumference == 2 and hc[0].height == 1
        assert vc[0].circumference == 2 and vc[0].height == 1

    def test_staircase_window_matches_picture(self):
        st = staircase_complex(-4, 5, 2)
        assert all(float(w) == 1 for w in st.width.values())
        # four corner chains, one per point at infinity of the staircase
        assert len(st.corner_cycles) == 4
        assert all(c.truncated for c in st.corner_cycles)
        assert is_translation(st)

    def test_fiber_violation_is_rejected(self):
        g = BipartiteConfigGraph.make([0, 2], [1, 3],
                                      {0: (0, 1), 1: (2, 1), 2: (2, 3), 3: (0, 3)}, 2)
        bad = RibbonData.make({0: 1, 1: 2, 2: 3, 3: 0}, {0: 0, 1: 1, 2: 2, 3: 3})
        with pytest.raises(RibbonError, match="mixes fibers"):
            build_surface(g, bad, unit_h(g))

    def test_odd_flip_cycle_is_rejected(self):
        g = double_edge_graph()
        rib = RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0}, flips=[(0, "N")])
        with pytest.raises(RibbonError, match="odd number of flips"):
            build_surface(g, rib, unit_h(g))

    def test_nonpositive_values_rejected(self):
        g = double_edge_graph()
        rib = RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0})
        with pytest.raises(ValueError, match="positive"):
            build_surface(g, rib, values={0: 1, 1: 0})


class TestCylinders:
    def test_torus_modulus(self):
        t = square_torus()
        cyl = cylinders(t, "horizontal")[0]
        assert cyl.modulus == 1  # 1/lam with lam = 1

    def test_staircase_modulus_is_exactly_one_over_lambda(self):
        for lam in (2, 3):
            st = staircase_complex(-4, 5, lam)
            for direction in ("horizontal", "vertical"):
                for cyl in cylinders(st, direction):
                    if not cyl.truncated:
                        assert cyl.modulus * lam == 1

    def test_staircase_lam3_circumference_identity(self):
        st = staircase_complex(-4, 5, 3)
        h = st.harmonic
        for cyl in cylinders(st, "horizontal"):
            if not cyl.truncated:
                n = cyl.vertex
                assert cyl.circumference == 3 * h[n]  # r^(n-1) + r^(n+1) = 3 r^n

    def test_cylinder_fiber_duality(self):
        st = staircase_complex(-4, 5, 2)
        g = st.graph
        assert len(cylinders(st, "horizontal")) == len(g.part_i)
        assert len(cylinders(st, "vertical")) == len(g.part_j)


class TestConePoints:
    def test_torus_regular_point(self):
        import math

        pts = cone_points(square_torus())
        assert len(pts) == 1
        cyc, angle, punct, valence = pts[0]
        assert angle == pytest.approx(2 * math.pi) and not punct and valence == 4

    def test_pillowcase_cones(self):
        m = pillowcase()
        assert sorted(c.k for c in m.corner_cycles) == [2, 2, 2, 2]
        assert not is_translation(m)

    def test_angle_is_quarter_of_cycle_length(self):
        m = pillowcase()
        import math
        for c in m.corner_cycles:
            assert c.angle() == pytest.approx(c.k * math.pi / 2)

    def test_corner_partition(self):
        for m in (square_torus(), pillowcase(), staircase_complex(-3, 4, 2)):
            assert sum(c.k for c in m.corner_cycles) == 4 * len(m.edges)


class TestGaussBonnet:
    def test_identity_on_closed_complexes(self):
        samples = [square_torus(), pillowcase()]
        g = double_edge_graph()
        samples.append(build_surface(g, RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0}),
                                     unit_h(g, 2)))
        for m in samples:
            chi = euler_characteristic(m)
            excess = sum(Fraction(c.k, 2) - 2 for c in m.corner_cycles)
            assert excess == -2 * chi


class TestDoubleCover:
    def test_pillowcase_cover_is_torus(self):
        m = pillowcase()
        cov = orientation_double_cover(m)
        assert len(cov.edges) == 2 * len(m.edges)
        assert is_translation(cov)
        # odd cones (angle pi) lift to single cones of angle 2 pi
        assert sorted(c.k for c in cov.corner_cycles) == [4, 4, 4, 4]
        assert sum(c.k for c in cov.corner_cycles) == 2 * sum(c.k for c in m.corner_cycles)

    def test_even_cone_lifts_to_two_copies(self):
        # half-translation sphere with two 2pi cones and four pi cones
        g = BipartiteConfigGraph.make([0, 2], [1],
                                      {0: (0, 1), 1: (0, 1), 2: (2, 1), 3: (2, 1)}, 4)
        rib = RibbonData.make({0: 1, 1: 0, 2: 3, 3: 2}, {0: 1, 1: 3, 3: 2, 2: 0},
                              flips=[(0, "E"), (1, "E"), (2, "E"), (3, "E")])
        m = build_surface(g, rib, unit_h(g, 2))
        assert sorted(c.k for c in m.corner_cycles) == [2, 2, 2, 2, 4, 4]
        cov = orientation_double_cover(m)
        # 4 odd pi-cones -> 4 cones of 2pi; 2 even 2pi-cones -> 4 cones of 2pi
        assert sorted(c.k for c in cov.corner_cycles) == [4] * 8
        assert euler_characteristic(cov) == 0

    def test_translation_input_is_refused(self):
        with pytest.raises(ValueError, match="already a translation"):
            orientation_double_cover(square_torus())


class TestIsTranslation:
    def test_staircase_is_translation(self):
        assert is_translation(staircase_complex(-4, 5, 2))

    def test_odd_pi_cone_forces_half_translation(self):
        m = pillowcase()
        assert any(c.k == 2 for c in m.corner_cycles)
        assert not is_translation(m)


class TestRibbonRoundTrip:
    def test_gluings_reconstruct_ribbon(self):
        for m in (square_torus(), pillowcase()):
            rib = ribbon_from_gluings(m.edges, m.gluings)
            m2 = build_surface(m.graph, rib, values={v: 1 for v in m.graph.vertices()})
            assert m2.gluings == {k: v for k, v in m.gluings.items()}


def test_perron_built_surfaces_have_uniform_modulus():
    cases = []
    g1 = BipartiteConfigGraph.make([0], [1], {0: (0, 1)}, 2)
    cases.append((g1, RibbonData.make({0: 0}, {0: 0})))
    g2 = double_edge_graph()
    cases.append((g2, RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0})))
    g3 = BipartiteConfigGraph.make([0], [1, 3], {0: (0, 1), 1: (0, 3)}, 2)
    cases.append((g3, RibbonData.make({0: 1, 1: 0}, {0: 0, 1: 1})))
    g4 = BipartiteConfigGraph.make([0, 2], [1, 3],
                                   {0: (0, 1), 1: (2, 1), 2: (2, 3), 3: (0, 3)}, 2)
    cases.append((g4, RibbonData.make({0: 3, 3: 0, 1: 2, 2: 1},
                                      {0: 1, 1: 0, 2: 3, 3: 2})))
    g5 = BipartiteConfigGraph.make([0], [1, 3, 5],
                                   {0: (0, 1), 1: (0, 3), 2: (0, 5)}, 3)
    cases.append((g5, RibbonData.make({0: 1, 1: 2, 2: 0}, {0: 0, 1: 1, 2: 2})))
    for g, rib in cases:
        h = perron_pair(g, tol=1e-14)
        m = build_surface(g, rib, h)
        for direction in ("horizontal", "vertical"):
            for cyl in cylinders(m, direction):
                assert abs(float(cyl.modulus) * h.lam - 1) < 1e-12


class TestCoverFlagLifting:
    def test_punctured_odd_cone_lifts_once(self):
        g = double_edge_graph()
        rib = RibbonData.make({0: 1, 1: 0}, {0: 1, 1: 0}, flips=[(0, "N"), (1, "N")])
        base = build_surface(g, rib, unit_h(g, 2))
        tok = base.corner_cycles[0].corners[0]
        m = build_surface(g, rib, unit_h(g, 2), punctures=[tok])
        cov = orientation_double_cover(m)
        # an angle-pi cone is a branch point: one punctured preimage
        assert sum(1 for c in cov.corner_cycles if c.puncture) == 1

    def test_punctured_even_cone_lifts_twice(self):
        g = BipartiteConfigGraph.make([0, 2], [1],
                                      {0: (0, 1), 1: (0, 1), 2: (2, 1), 3: (2, 1)}, 4)
        rib = RibbonData.make({0: 1, 1: 0, 2: 3, 3: 2}, {0: 1, 1: 3, 3: 2, 2: 0},
                              flips=[(0, "E"), (1, "E"), (2, "E"), (3, "E")])
        base = build_surface(g, rib)
        even = next(c for c in base.corner_cycles if c.k == 4)
        m = build_surface(g, rib, punctures=[even.corners[0]])
        cov = orientation_double_cover(m)
        assert sum(1 for c in cov.corner_cycles if c.puncture) == 2
