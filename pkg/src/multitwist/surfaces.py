"""Rectangle complexes: flat surfaces glued from one rectangle per edge.

Each edge e of a configuration graph carries a rectangle whose width is the
value of the vertex function at the J-endpoint and whose height is the value
at the I-endpoint.  Ribbon data prescribes, for every curve, the cyclic
order in which its rectangles are crossed; flip flags mark where the gluing
is the half-translation z -> -z + c instead of a translation.

Internally the ribbon permutations are unrolled into an explicit side-gluing
table.  Walking a sigma_h cycle keeps a chart orientation: a flipped arrow
lands in a rectangle whose chart is rotated by pi relative to the cylinder,
so the gluing pairs same-letter sides (E-E, W-W) and reflects the transverse
coordinate, while unflipped arrows pair opposite sides (E-W) by translation.
A cycle with an odd number of flips would force a fixed point of z -> -z + c
in the cylinder interior and is rejected.

Cone points are corner cycles: the quarter-neighbourhoods of rectangle
corners, chained counterclockwise through the gluings.  A cycle of k
quarters is a cone point of angle k*pi/2.  Gluings missing from a window
truncation leave frontier sides; corner chains touching them are reported
as truncated instead of closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .graphs import BipartiteConfigGraph, HarmonicAssignment

SIDES = ("E", "W", "N", "S")
OPPOSITE = {"E": "W", "W": "E", "N": "S", "S": "N"}
CORNERS = ("SW", "SE", "NE", "NW")
OPPOSITE_CORNER = {"SW": "NE", "NE": "SW", "SE": "NW", "NW": "SE"}

# side + end -> corner at that end (lo = small coordinate along the side)
_END_CORNER = {
    ("E", "lo"): "SE", ("E", "hi"): "NE",
    ("W", "lo"): "SW", ("W", "hi"): "NW",
    ("N", "lo"): "NW", ("N", "hi"): "NE",
    ("S", "lo"): "SW", ("S", "hi"): "SE",
}
# counterclockwise walk around a vertex: enter a quarter along one side,
# leave along the other
_CCW_EXIT = {"SW": ("W", "lo"), "SE": ("S", "hi"), "NE": ("E", "hi"), "NW": ("N", "lo")}
_CCW_ENTRY = {"SW": ("S", "lo"), "SE": ("E", "lo"), "NE": ("N", "hi"), "NW": ("W", "hi")}
# chart angle of the quarter's entry ray, in quarter turns
_ENTRY_QUARTER_TURNS = {"SW": 0, "SE": 1, "NE": 2, "NW": 3}


class RibbonError(ValueError):
    """Ribbon data inconsistent with the graph or with flat geometry."""


@dataclass(frozen=True)
class RibbonData:
    """Successor maps for the horizontal and vertical cylinder traversals.

    sigma_h maps an edge to the next rectangle eastward inside its
    horizontal cylinder, sigma_v northward inside its vertical one.  Both
    may be partial on window truncations (missing arrows leave frontier
    sides).  flips holds arrows that reverse chart orientation, keyed by
    (source edge, "E") for horizontal and (source edge, "N") for vertical.
    """

    sigma_h: tuple  # ((edge, successor), ...) sorted
    sigma_v: tuple
    flips: frozenset

    @staticmethod
    def make(sigma_h, sigma_v, flips=()) -> "RibbonData":
        sh = tuple(sorted((int(a), int(b)) for a, b in dict(sigma_h).items()))
        sv = tuple(sorted((int(a), int(b)) for a, b in dict(sigma_v).items()))
        fl = frozenset((int(e), str(s)) for e, s in flips)
        for e, s in fl:
            if s not in ("E", "N"):
                raise RibbonError(f"flip side must be E or N, got {s!r}")
        for name, entries in (("sigma_h", sh), ("sigma_v", sv)):
            targets = [b for _, b in entries]
            if len(set(targets)) != len(targets):
                raise RibbonError(f"{name} is not injective")
        return RibbonData(sh, sv, fl)

    def h_map(self) -> dict:
        return dict(self.sigma_h)

    def v_map(self) -> dict:
        return dict(self.sigma_v)

    @staticmethod
    def from_cycles(h_cycles, v_cycles, flips=()) -> "RibbonData":
        """Build from explicit cycles/paths: (sequence, closed) pairs or plain lists (closed)."""

        def unroll(items):
            out = {}
            for item in items:
                seq, closed = (item if isinstance(item, tuple) and len(item) == 2
                               and isinstance(item[1], bool) else (item, True))
                seq = list(seq)
                for a, b in zip(seq, seq[1:]):
                    out[a] = b
                if closed and len(seq) >= 1:
                    out[seq[-1]] = seq[0]
            return out

        return RibbonData.make(unroll(h_cycles), unroll(v_cycles), flips)


@dataclass(frozen=True)
class CornerCycle:
    """A cone point: the cyclic chain of rectangle quarters around it."""

    index: int
    corners: tuple  # ((edge, corner), ...) in ccw order
    truncated: bool = False
    puncture: bool = False
    marked: bool = False

    @property
    def k(self) -> int:
        return len(self.corners)

    @property
    def angle_quarters(self) -> int:
        return self.k

    def angle(self) -> float:
        return self.k * math.pi / 2


@dataclass(frozen=True)
class CylinderLayout:
    """Unrolled coordinates of one cylinder: rectangles, orientations, offsets."""

    vertex: int
    edges: tuple
    orients: tuple  # +1 chart-aligned, -1 chart rotated by pi
    offsets: tuple  # start of each rectangle along the cylinder
    length: object  # total length along the cylinder (circumference if closed)
    transverse: object  # common transverse dimension (height for horizontal)
    closed: bool


@dataclass(frozen=True)
class Cylinder:
    direction: str  # "horizontal" | "vertical"
    vertex: int
    edges: tuple
    circumference: object
    height: object
    truncated: bool

    @property
    def modulus(self):
        return self.height / self.circumference


@dataclass(frozen=True)
class RectangleComplex:
    """Immutable flat surface assembled from rectangles."""

    graph: BipartiteConfigGraph
    ribbon: RibbonData
    lam: object
    width: dict
    height: dict
    gluings: dict  # (edge, side) -> (edge, side, reversed); symmetric
    frontier: frozenset
    corner_cycles: tuple
    h_layouts: dict
    v_layouts: dict
    h_orient: dict
    v_orient: dict
    harmonic: HarmonicAssignment = None
    cover_projection: dict = field(default=None, compare=False)

    @property
    def edges(self) -> tuple:
        return tuple(e for e, _, _ in self.graph.edges)

    def corner_cycle_of(self, edge, corner) -> CornerCycle:
        for cyc in self.corner_cycles:
            if (edge, corner) in cyc.corners:
                return cyc
        raise KeyError((edge, corner))

    def side_length(self, edge, side):
        return self.height[edge] if side in ("E", "W") else self.width[edge]

    def cross(self, edge, side, coord):
        """Follow the gluing on (edge, side) at position coord along the side.

        Returns (edge2, side2, coord2, reversed).  Raises KeyError on a
        frontier side.
        """
        e2, s2, rev = self.gluings[(edge, side)]
        if rev:
            coord = self.side_length(e2, s2) - coord
        return e2, s2, coord, rev

    def is_window_truncated(self) -> bool:
        return bool(self.frontier)


def _components(mapping: dict, universe) -> list:
    """Cycle/path decomposition of a partial injective map.

    Returns (sequence, closed) pairs covering all of universe; paths start
    at elements without a preimage, cycles are anchored at their minimum.
    """
    targets = set(mapping.values())
    seen = set()
    comps = []
    for start in sorted(set(universe) - targets):  # path starts
        seq = [start]
        seen.add(start)
        cur = start
        while cur in mapping:
            cur = mapping[cur]
            if cur in seen:
                raise RibbonError(f"successor map re-enters {cur} from a path")
            seq.append(cur)
            seen.add(cur)
        comps.append((seq, False))
    for start in sorted(set(universe) - seen):  # remaining: cycles
        if start in seen:
            continue
        seq = [start]
        seen.add(start)
        cur = mapping.get(start)
        while cur is not None and cur != start:
            if cur in seen:
                raise RibbonError(f"successor map re-enters {cur} from a cycle")
            seq.append(cur)
            seen.add(cur)
            cur = mapping.get(cur)
        if cur != start:
            raise RibbonError(f"component starting at {start} neither closes nor ends")
        comps.append((seq, True))
    return comps


def _values_close(x, y) -> bool:
    if isinstance(x, float) or isinstance(y, float):
        fx, fy = float(x), float(y)
        scale = max(abs(fx), abs(fy), 1.0)
        return abs(fx - fy) <= 1e-9 * scale
    return x == y


def _unroll_axis(graph, edges, mapping, flips, flip_key, fiber_of, size, axis):
    """Walk one axis of the ribbon; returns (gluings, frontier, orient, layouts).

    axis "h": arrows leave through intrinsic east, land on intrinsic west,
    sizes along the cylinder are widths.  axis "v": north/south, heights.
    """
    src_side, tgt_side = ("E", "W") if axis == "h" else ("N", "S")
    comps = _components(mapping, edges)
    # fiber discipline: one component per vertex, covering its fiber exactly
    by_vertex = {}
    for seq, closed in comps:
        verts = {fiber_of(e) for e in seq}
        if len(verts) != 1:
            raise RibbonError(f"sigma_{axis} component {seq} mixes fibers {sorted(verts)}")
        v = verts.pop()
        if v in by_vertex:
            raise RibbonError(f"vertex {v} split across several sigma_{axis} components")
        by_vertex[v] = (seq, closed)
    for v in ({fiber_of(e) for e in edges}):
        seq, _ = by_vertex[v]
        fiber = {e for e in edges if fiber_of(e) == v}
        if set(seq) != fiber:
            raise RibbonError(f"sigma_{axis} component at vertex {v} misses edges {sorted(fiber - set(seq))}")

    gluings = {}
    frontier = set()
    orient = {}
    layouts = {}
    for v, (seq, closed) in sorted(by_vertex.items()):
        o = 1
        orients = []
        offsets = []
        pos = 0
        for e in seq:
            orient[e] = o
            orients.append(o)
            offsets.append(pos)
            pos = pos + size(e)
            if e in mapping:
                nxt = mapping[e]
                flip = (e, flip_key) in flips
                o2 = -o if flip else o
                side_a = src_side if o == 1 else OPPOSITE[src_side]
                side_b = tgt_side if o2 == 1 else OPPOSITE[tgt_side]
                gluings[(e, side_a)] = (nxt, side_b, flip)
                gluings[(nxt, side_b)] = (e, side_a, flip)
                o = o2
        if closed and o != 1:
            raise RibbonError(
                f"sigma_{axis} cycle at vertex {v} has an odd number of flips")
        if not closed:
            first, last = seq[0], seq[-1]
            frontier.add((first, OPPOSITE[src_side] if orients[0] == 1 else src_side))
            frontier.add((last, src_side if orients[-1] == 1 else OPPOSITE[src_side]))
        transverse = None
        for e in seq:
            t = size(e, transverse_axis=True)
            if transverse is None:
                transverse = t
            elif not _values_close(transverse, t):
                raise RibbonError(f"cylinder at vertex {v} has mismatched sides")
        layouts[v] = CylinderLayout(vertex=v, edges=tuple(seq), orients=tuple(orients),
                                    offsets=tuple(offsets), length=pos,
                                    transverse=transverse, closed=closed)
    return gluings, frontier, orient, layouts


def _corner_chains(edges, gluings, frontier):
    """Counterclockwise corner cycles; frontier-touching chains flagged."""
    token_owner = {}
    for e in edges:
        for (side, end), corner in _END_CORNER.items():
            token_owner[(e, side, end)] = (e, corner)

    def glued_token(e, side, end):
        if (e, side) in frontier or (e, side) not in gluings:
            return None
        e2, side2, rev = gluings[(e, side)]
        end2 = end if not rev else ("hi" if end == "lo" else "lo")
        return (e2, side2, end2)

    def successor(corner):
        e, c = corner
        side, end = _CCW_EXIT[c]
        tok = glued_token(e, side, end)
        return token_owner[tok] if tok else None

    def predecessor(corner):
        e, c = corner
        side, end = _CCW_ENTRY[c]
        tok = glued_token(e, side, end)
        return token_owner[tok] if tok else None

    all_corners = [(e, c) for e in edges for c in CORNERS]
    seen = set()
    chains = []
    # chains broken by the frontier first
    for corner in all_corners:
        if corner in seen or predecessor(corner) is not None:
            continue
        chain = [corner]
        seen.add(corner)
        cur = successor(corner)
        while cur is not None:
            chain.append(cur)
            seen.add(cur)
            cur = successor(cur)
        chains.append((chain, True))
    for corner in all_corners:
        if corner in seen:
            continue
        chain = [corner]
        seen.add(corner)
        cur = successor(corner)
        while cur != corner:
            if cur is None or cur in seen:
                raise RibbonError(f"corner walk broke at {cur} from {corner}")
            chain.append(cur)
            seen.add(cur)
            cur = successor(cur)
        # canonical rotation: start at the minimal corner token
        k = chain.index(min(chain))
        chains.append((chain[k:] + chain[:k], False))
    chains.sort(key=lambda item: item[0][0])
    return chains


def ribbon_from_gluings(edges, gluings) -> RibbonData:
    """Reconstruct successor maps and flip flags from a side-gluing table.

    Inverse of the cycle walk in build_surface, for complete complexes:
    cycles are read anchored at their minimal edge with the chart-aligned
    orientation, and a same-letter gluing (E-E, W-W, ...) records a flip on
    the outgoing arrow.
    """
    sigma_h, sigma_v = {}, {}
    flips = set()
    for sides, sigma, arrow_key in ((("E", "W"), sigma_h, "E"),
                                    (("N", "S"), sigma_v, "N")):
        seen = set()
        for start in sorted(edges):
            if start in seen:
                continue
            e, o = start, 1
            while True:
                seen.add(e)
                out_side = sides[0] if o == 1 else sides[1]
                if (e, out_side) not in gluings:
                    raise ValueError("ribbon reconstruction needs every side glued")
                e2, s2, _ = gluings[(e, out_side)]
                flip = s2 == out_side
                sigma[e] = e2
                if flip:
                    flips.add((e, arrow_key))
                o = -o if flip else o
                e = e2
                if e == start:
                    break
    return RibbonData.make(sigma_h, sigma_v, flips)


def build_surface(graph: BipartiteConfigGraph, ribbon: RibbonData,
                  harmonic: HarmonicAssignment = None, *,
                  punctures=(), marked=None, values=None) -> RectangleComplex:
    """Assemble the rectangle complex over a graph with ribbon data.

    Rectangle e gets width values[j] and height values[i] for its endpoints
    (i, j); values defaults to the harmonic assignment, or to all-1 squares
    when neither is given (combinatorial census builds).  punctures and
    marked select corner cycles by any (edge, corner) token they contain.
    """
    if values is None:
        values = harmonic.values if harmonic is not None else {v: 1 for v in graph.vertices()}
    for v in graph.vertices():
        if v not in values:
            raise ValueError(f"no value for vertex {v}")
        if not values[v] > 0:
            raise ValueError(f"value at vertex {v} must be positive")
    emap = graph.edge_map()
    edges = sorted(emap)
    width = {e: values[emap[e][1]] for e in edges}
    height = {e: values[emap[e][0]] for e in edges}

    def h_size(e, transverse_axis=False):
        return height[e] if transverse_axis else width[e]

    def v_size(e, transverse_axis=False):
        return width[e] if transverse_axis else height[e]

    gl_h, fr_h, or_h, lay_h = _unroll_axis(
        graph, edges, ribbon.h_map(), ribbon.flips, "E",
        lambda e: emap[e][0], h_size, "h")
    gl_v, fr_v, or_v, lay_v = _unroll_axis(
        graph, edges, ribbon.v_map(), ribbon.flips, "N",
        lambda e: emap[e][1], v_size, "v")
    gluings = {**gl_h, **gl_v}
    frontier = frozenset(fr_h | fr_v)
    for (e, side), (e2, side2, rev) in gluings.items():
        la, lb = (height, height) if side in ("E", "W") else (width, width)
        if not _values_close(la[e], lb[e2]):
            raise RibbonError(f"glued sides ({e},{side})-({e2},{side2}) have different lengths")

    chains = _corner_chains(edges, gluings, frontier)
    cycles = []
    for idx, (chain, truncated) in enumerate(chains):
        cycles.append(CornerCycle(index=idx, corners=tuple(chain), truncated=truncated))

    def resolve(token):
        e, c = token
        for cyc in cycles:
            if (e, c) in cyc.corners:
                return cyc.index
        raise ValueError(f"no corner cycle contains {token}")

    flagged = {}
    for token in punctures:
        flagged.setdefault(resolve(tuple(token)), set()).add("puncture")
    if marked is not None:
        flagged.setdefault(resolve(tuple(marked)), set()).add("marked")
    cycles = [replace(c, puncture="puncture" in flagged.get(c.index, ()),
                      marked="marked" in flagged.get(c.index, ()))
              for c in cycles]

    lam = harmonic.lam if harmonic is not None else None
    return RectangleComplex(graph=graph, ribbon=ribbon, lam=lam,
                            width=width, height=height, gluings=gluings,
                            frontier=frontier, corner_cycles=tuple(cycles),
                            h_layouts=lay_h, v_layouts=lay_v,
                            h_orient=or_h, v_orient=or_v, harmonic=harmonic)


def cylinders(m: RectangleComplex, direction: str) -> list:
    """Maximal cylinders in one direction, one per curve of that family."""
    if direction not in ("horizontal", "vertical"):
        raise ValueError(f"direction must be horizontal or vertical, got {direction!r}")
    layouts = m.h_layouts if direction == "horizontal" else m.v_layouts
    out = []
    for v in sorted(layouts):
        lay = layouts[v]
        out.append(Cylinder(direction=direction, vertex=v, edges=lay.edges,
                            circumference=lay.length, height=lay.transverse,
                            truncated=not lay.closed))
    return out


def cone_points(m: RectangleComplex) -> list:
    """(cycle, angle, puncture flag, dual valence k) per cone point; the
    angle is k*pi/2 radians for a cycle of k quarters."""
    return [(c, c.angle(), c.puncture, c.k) for c in m.corner_cycles]


def euler_characteristic(m: RectangleComplex) -> int:
    """V - E + F of the cell structure; complete complexes only."""
    if m.frontier:
        raise ValueError("Euler characteristic of a window truncation is undefined")
    n = len(m.edges)
    v = len(m.corner_cycles)
    return v - 2 * n + n


def total_angle_quarters(m: RectangleComplex) -> int:
    return sum(c.k for c in m.corner_cycles)


def is_translation(m: RectangleComplex) -> bool:
    """True iff chart rotations can remove every orientation-reversing gluing."""
    edges = m.edges
    color = {}
    for start in edges:
        if start in color:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            e = stack.pop()
            for side in SIDES:
                if (e, side) not in m.gluings:
                    continue
                e2, _, rev = m.gluings[(e, side)]
                want = color[e] ^ int(rev)
                if e2 not in color:
                    color[e2] = want
                    stack.append(e2)
                elif color[e2] != want:
                    return False
    return True


def orientation_double_cover(m: RectangleComplex) -> RectangleComplex:
    """Translation-surface double cover of a genuinely half-translation complex.

    Sheet 1 of every rectangle carries the pi-rotated chart, so each lifted
    gluing is a translation.  Cone points of angle n*pi lift to two copies
    for n even and to a single cone of angle 2*n*pi for n odd.
    """
    if is_translation(m):
        raise ValueError("complex is already a translation surface; the "
                         "orientation double cover would be two disjoint copies")
    if m.frontier:
        raise ValueError("double cover of a window truncation is not supported")
    base_edges = list(m.edges)
    cover_id = {(e, s): 2 * k + s for k, e in enumerate(base_edges) for s in (0, 1)}

    lifted = {}
    for (e, side), (e2, side2, rev) in m.gluings.items():
        for s in (0, 1):
            s2 = s ^ int(rev)
            side_a = side if s == 0 else OPPOSITE[side]
            side_b = side2 if s2 == 0 else OPPOSITE[side2]
            lifted[(cover_id[(e, s)], side_a)] = (cover_id[(e2, s2)], side_b)

    sigma_h = {}
    sigma_v = {}
    for (ce, side), (ce2, side2) in lifted.items():
        if side == "E":
            assert side2 == "W"
            sigma_h[ce] = ce2
        elif side == "N":
            assert side2 == "S"
            sigma_v[ce] = ce2
    ribbon = RibbonData.make(sigma_h, sigma_v, flips=())

    # cover graph: one I-vertex per horizontal cycle, one J-vertex per vertical
    cover_edges = sorted(cover_id.values())
    h_comps = _components(sigma_h, cover_edges)
    v_comps = _components(sigma_v, cover_edges)
    i_of = {}
    for k, (seq, _) in enumerate(h_comps):
        for ce in seq:
            i_of[ce] = 2 * k
    j_of = {}
    for k, (seq, _) in enumerate(v_comps):
        for ce in seq:
            j_of[ce] = 2 * k + 1
    graph = BipartiteConfigGraph.make(
        part_i=set(i_of.values()), part_j=set(j_of.values()),
        edges={ce: (i_of[ce], j_of[ce]) for ce in cover_edges},
        valence_bound=m.graph.valence_bound)

    back = {ce: es for es, ce in cover_id.items()}
    values = {}
    emap = m.graph.edge_map()
    for ce in cover_edges:
        e, _ = back[ce]
        values[i_of[ce]] = m.height[e]
        values[j_of[ce]] = m.width[e]
    harmonic = None
    if m.harmonic is not None:
        harmonic = HarmonicAssignment(lam=m.lam, values=values)

    # project corner marks: sheet-1 corners sit at the rotated position
    punctures = []
    marked = None
    for cyc in m.corner_cycles:
        if not (cyc.puncture or cyc.marked):
            continue
        e0, c0 = cyc.corners[0]
        for s in (0, 1):
            c_lift = c0 if s == 0 else OPPOSITE_CORNER[c0]
            token = (cover_id[(e0, s)], c_lift)
            if cyc.puncture:
                punctures.append(token)
            if cyc.marked:
                marked = token if marked is None else marked
    cover = build_surface(graph, ribbon, harmonic=harmonic,
                          punctures=punctures, marked=marked, values=values)
    projection = {ce: back[ce] for ce in cover_edges}
    return replace(cover, cover_projection=projection)


# -- stock complexes -------------------------------------------------------

def square_torus(side=1) -> RectangleComplex:
    """One unit square with opposite sides identified."""
    g = BipartiteConfigGraph.make([0], [1], {0: (0, 1)}, 2)
    ribbon = RibbonData.make({0: 0}, {0: 0})
    h = HarmonicAssignment(lam=1, values={0: side, 1: side})
    return build_surface(g, ribbon, h)


def staircase_complex(lo: int, hi: int, lam, exact: bool = True) -> RectangleComplex:
    """Window of the infinite staircase built over the ladder graph.

    Rectangles sit over the edges n -- n+1 for lo <= n < hi; interior
    curves close into two-rectangle cylinders, the two extreme curves are
    window-truncated.  Heights follow the ladder's harmonic function for
    the given lam (exact quadratic arithmetic when lam is rational).
    """
    from .graphs import LadderFamily, harmonic_closed_form

    fam = LadderFamily(lo, hi)
    g = fam.graph()
    h = harmonic_closed_form(fam, lam)
    if not exact:
        h = HarmonicAssignment(lam=float(h.lam), values={v: float(x) for v, x in h.values.items()})
    sigma_h = {}
    sigma_v = {}
    for v in range(lo, hi + 1):
        fiber = [e for e in range(lo, hi) if e in (v - 1, v)]
        if len(fiber) == 2:
            target = sigma_h if v % 2 == 0 else sigma_v
            target[fiber[0]] = fiber[1]
            target[fiber[1]] = fiber[0]
    ribbon = RibbonData.make(sigma_h, sigma_v)
    return build_surface(g, ribbon, h)
