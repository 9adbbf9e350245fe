"""Straight-line flow and multitwist point actions on rectangle complexes.

Trajectories are piecewise linear in rectangle charts: a segment runs until
it leaves through a side, the gluing table transports the exit point (and,
across an orientation-reversing gluing, negates the direction), and the
next segment continues in the neighbouring chart.  A crossing that lands
within corner_tol of a corner stops the trajectory: corners are the points
of the completion where cone angle concentrates, and distinguishing true
saddle connections from near misses is exactly the corner_tol contract.
With exact coordinates the tolerance degenerates to exact incidence.

Twists act cylinder by cylinder: inside a horizontal cylinder of
circumference c and height h with h/c = 1/lam, the point (x, y) in
unrolled coordinates moves to (x + power*lam*y mod c, y), which is the
affine Dehn twist fixing both boundary circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .surfaces import RectangleComplex, CornerCycle, _END_CORNER, cylinders

_CORNER_COORDS = {
    "SW": (0, 0), "SE": (1, 0), "NE": (1, 1), "NW": (0, 1),
}
_ENTRY_TURNS = {"SW": 0, "SE": 1, "NE": 2, "NW": 3}


@dataclass(frozen=True)
class SurfacePoint:
    edge: int
    x: object
    y: object

    def as_floats(self) -> tuple:
        return (self.edge, float(self.x), float(self.y))


@dataclass(frozen=True)
class Segment:
    edge: int
    x_in: object
    y_in: object
    x_out: object
    y_out: object
    length: float
    dir_in: tuple


@dataclass(frozen=True)
class Trajectory:
    start: SurfacePoint
    direction: tuple
    segments: tuple
    terminal: str  # budget | singular | window-exit
    terminal_detail: object
    final_point: SurfacePoint
    final_direction: tuple
    min_corner_distance: float

    @property
    def total_length(self) -> float:
        return sum(s.length for s in self.segments)

    def visited_edges(self) -> set:
        return {s.edge for s in self.segments}


class FlowError(ValueError):
    pass


def _validate_point(m: RectangleComplex, p: SurfacePoint):
    w, h = m.width[p.edge], m.height[p.edge]
    if not (0 <= p.x <= w and 0 <= p.y <= h):
        raise FlowError(f"point {p} outside its rectangle")


def _is_corner(m, p) -> bool:
    w, h = m.width[p.edge], m.height[p.edge]
    return (p.x == 0 or p.x == w) and (p.y == 0 or p.y == h)


def canonical_point(m: RectangleComplex, p: SurfacePoint) -> SurfacePoint:
    """Boundary points get a canonical chart: south/west sides preferred."""
    _validate_point(m, p)
    reps = {(_side_rank(m, p), p.as_floats()): p}
    w, h = m.width[p.edge], m.height[p.edge]
    for side, coord in (("E", p.y) if p.x == w else (None, None),
                        ("W", p.y) if p.x == 0 else (None, None),
                        ("N", p.x) if p.y == h else (None, None),
                        ("S", p.x) if p.y == 0 else (None, None)):
        if side is None or (p.edge, side) not in m.gluings:
            continue
        e2, s2, c2, _ = m.cross(p.edge, side, coord)
        w2, h2 = m.width[e2], m.height[e2]
        if s2 == "E":
            q = SurfacePoint(e2, w2, c2)
        elif s2 == "W":
            q = SurfacePoint(e2, w2 - w2, c2)
        elif s2 == "N":
            q = SurfacePoint(e2, c2, h2)
        else:
            q = SurfacePoint(e2, c2, h2 - h2)
        reps[(_side_rank(m, q), q.as_floats())] = q
    return reps[min(reps)]


def _side_rank(m, p) -> int:
    """0 when the point uses a south/west chart position, higher otherwise."""
    w, h = m.width[p.edge], m.height[p.edge]
    rank = 0
    if p.x == w and w != 0:
        rank += 1
    if p.y == h and h != 0:
        rank += 1
    return rank


def flow(m: RectangleComplex, p0: SurfacePoint, direction, max_length,
         corner_tol: float = 1e-9, max_steps: int = 2_000_000,
         _allow_corner_start: bool = False) -> Trajectory:
    """Trace the straight-line flow from p0 with oriented direction (dx, dy).

    Exact coordinates flow exactly (corner incidence is then exact); float
    coordinates use corner_tol.  The budget max_length is metric length.
    """
    dx, dy = direction
    if dx == 0 and dy == 0:
        raise FlowError("direction must be nonzero")
    _validate_point(m, p0)
    if _is_corner(m, p0) and not _allow_corner_start:
        raise FlowError("start lies on a cone corner; launch via separatrices() instead")
    e, x, y = p0.edge, p0.x, p0.y
    exact = not any(isinstance(v, float) for v in (x, y, dx, dy))
    exact = exact and not any(isinstance(v, float) for v in m.width.values())
    if exact:
        wd, ht = m.width, m.height
    else:  # keep mixed inputs from dragging exact types through float math
        x, y, dx, dy = float(x), float(y), float(dx), float(dy)
        wd = {k: float(v) for k, v in m.width.items()}
        ht = {k: float(v) for k, v in m.height.items()}
    segments = []
    acc = 0.0
    min_corner = math.inf
    terminal = "budget"
    detail = None
    speed = math.hypot(float(dx), float(dy))
    for _ in range(max_steps):
        w, h = wd[e], ht[e]
        # first wall hit
        best_t, best_side = None, None
        for side, t in (("E", (w - x) / dx if dx > 0 else None),
                        ("W", -x / dx if dx < 0 else None),
                        ("N", (h - y) / dy if dy > 0 else None),
                        ("S", -y / dy if dy < 0 else None)):
            if t is None:
                continue
            if best_t is None or t < best_t:
                best_t, best_side = t, side
        if best_t is None:  # direction parallel to an unglued axis? impossible
            raise FlowError("flow stalled: no exit wall")
        seg_len = float(best_t) * speed
        if acc + seg_len >= max_length:
            t_cut = (max_length - acc) / speed
            t_cut = Fraction(t_cut) if exact else t_cut
            fx, fy = x + t_cut * dx, y + t_cut * dy
            segments.append(Segment(e, x, y, fx, fy, max_length - acc, (dx, dy)))
            e_fin, x_fin, y_fin = e, fx, fy
            acc = max_length
            break
        x2, y2 = x + best_t * dx, y + best_t * dy
        # pin the crossing onto the wall to kill float drift
        if not exact:
            if best_side == "E":
                x2 = float(w)
            elif best_side == "W":
                x2 = 0.0
            elif best_side == "N":
                y2 = float(h)
            else:
                y2 = 0.0
        segments.append(Segment(e, x, y, x2, y2, seg_len, (dx, dy)))
        acc += seg_len
        coord = y2 if best_side in ("E", "W") else x2
        side_len = ht[e] if best_side in ("E", "W") else wd[e]
        dist = min(float(coord), float(side_len) - float(coord))
        if dist < min_corner:
            min_corner = dist
        hit = (dist == 0) if exact else (dist <= corner_tol)
        if hit:
            end = "lo" if float(coord) <= float(side_len) / 2 else "hi"
            corner = _END_CORNER[(best_side, end)]
            terminal, detail = "singular", (e, corner)
            e_fin, x_fin, y_fin = e, x2, y2
            break
        if (e, best_side) in m.frontier:
            terminal, detail = "window-exit", (e, best_side)
            e_fin, x_fin, y_fin = e, x2, y2
            break
        e2, s2, rev = m.gluings[(e, best_side)]
        w2, h2 = wd[e2], ht[e2]
        c2 = ((h2 if s2 in ("E", "W") else w2) - coord) if rev else coord
        if s2 == "E":
            x, y = w2, c2
        elif s2 == "W":
            x, y = w2 - w2, c2
        elif s2 == "N":
            x, y = c2, h2
        else:
            x, y = c2, h2 - h2
        if rev:
            dx, dy = -dx, -dy
        e = e2
    else:
        raise FlowError(f"flow exceeded {max_steps} crossings before the length budget")
    if terminal == "budget" and not segments:
        e_fin, x_fin, y_fin = e, x, y
    return Trajectory(start=p0, direction=direction, segments=tuple(segments),
                      terminal=terminal, terminal_detail=detail,
                      final_point=SurfacePoint(e_fin, x_fin, y_fin),
                      final_direction=(dx, dy), min_corner_distance=min_corner)


def closure_length(m: RectangleComplex, p0: SurfacePoint, direction,
                   max_length, corner_tol: float = 1e-9, tol: float = 1e-9):
    """Length at which the orbit first returns to its start, or None."""
    traj = flow(m, p0, direction, max_length, corner_tol)
    acc = 0.0
    x0, y0 = float(p0.x), float(p0.y)
    d0 = direction
    for k, seg in enumerate(traj.segments):
        if k > 0 and seg.edge == p0.edge:
            same_pos = math.hypot(float(seg.x_in) - x0, float(seg.y_in) - y0) <= tol
            cross = float(seg.dir_in[0]) * float(d0[1]) - float(seg.dir_in[1]) * float(d0[0])
            same_dir = abs(cross) <= tol and float(seg.dir_in[0]) * float(d0[0]) + float(seg.dir_in[1]) * float(d0[1]) > 0
            if same_pos and same_dir:
                return acc
        acc += seg.length
    return None


@dataclass(frozen=True)
class FlowStats:
    distinct_rectangles: int
    visits_to_start: int
    min_corner_distance: float
    coverage_fraction: float


def coverage_stats(traj: Trajectory, window) -> FlowStats:
    """Coverage of a window of rectangles by one trajectory."""
    window = set(window)
    visited = traj.visited_edges()
    in_window = visited & window
    visits = sum(1 for s in traj.segments if s.edge == traj.start.edge)
    frac = len(in_window) / len(window) if window else 0.0
    return FlowStats(distinct_rectangles=len(in_window),
                     visits_to_start=visits,
                     min_corner_distance=traj.min_corner_distance,
                     coverage_fraction=frac)


def visit_lengths(traj: Trajectory, edge: int) -> list:
    """Cumulative lengths at which the trajectory re-enters a rectangle."""
    acc = 0.0
    out = []
    for seg in traj.segments:
        if seg.edge == edge:
            out.append(acc)
        acc += seg.length
    return out


def _rotate_quarters(vec, turns: int) -> tuple:
    dx, dy = vec
    for _ in range(turns % 4):
        dx, dy = -dy, dx
    return (dx, dy)


def separatrices(m: RectangleComplex, cycle, direction):
    """Ray starts of the foliation leaves based at one cone point.

    Returns [(SurfacePoint, chart_direction), ...], one ray per pi-sector
    of the cone angle: a closed corner cycle of k quarters yields k/2 rays
    (its angle is k*pi/2).  Punctured cycles carry no separatrices.
    """
    if not isinstance(cycle, CornerCycle):
        cycle = m.corner_cycles[int(cycle)]
    if cycle.puncture:
        raise FlowError(f"corner cycle {cycle.index} is a puncture; no separatrices there")
    if not cycle.truncated and cycle.k % 2:
        raise FlowError(f"cone angle {cycle.k}*pi/2 is not a multiple of pi")
    dx, dy = direction
    if dx == 0 and dy == 0:
        raise FlowError("direction must be nonzero")
    # canonical foliation direction: angle in [0, pi)
    if dy < 0 or (dy == 0 and dx < 0):
        dx, dy = -dx, -dy
    if dx > 0:
        base_quarter, local = 0, (dx, dy)
    elif dx == 0:
        base_quarter, local = 1, (dy, -dx)  # ray along the quarter's entry side
    else:
        base_quarter, local = 1, (dy, -dx)
    rays = []
    j = 0
    while True:
        q = base_quarter + 2 * j
        if q >= cycle.k:
            break
        edge, corner = cycle.corners[q]
        cx, cy = _CORNER_COORDS[corner]
        pos = SurfacePoint(edge,
                           m.width[edge] * cx if cx else m.width[edge] - m.width[edge],
                           m.height[edge] * cy if cy else m.height[edge] - m.height[edge])
        chart_dir = _rotate_quarters(local, _ENTRY_TURNS[corner])
        rays.append((pos, chart_dir))
        j += 1
    return rays


@dataclass(frozen=True)
class SaddleSearchReport:
    found: object  # None or (cycle index, ray index, hit corner, length)
    rays_launched: int
    window_exits: int
    min_corner_distance: float


def detect_saddle_connection(m: RectangleComplex, direction, length_bound,
                             corner_tol: float = 1e-9) -> SaddleSearchReport:
    """Launch every separatrix in the window; report the first one that ends
    on a corner within the length bound."""
    rays_launched = 0
    window_exits = 0
    min_corner = math.inf
    for cycle in m.corner_cycles:
        if cycle.puncture:
            continue
        for ridx, (pos, chart_dir) in enumerate(separatrices(m, cycle, direction)):
            rays_launched += 1
            traj = flow(m, pos, chart_dir, length_bound, corner_tol,
                        _allow_corner_start=True)
            if traj.min_corner_distance < min_corner:
                min_corner = traj.min_corner_distance
            if traj.terminal == "singular":
                return SaddleSearchReport(
                    found=(cycle.index, ridx, traj.terminal_detail, traj.total_length),
                    rays_launched=rays_launched, window_exits=window_exits,
                    min_corner_distance=traj.min_corner_distance)
            if traj.terminal == "window-exit":
                window_exits += 1
    return SaddleSearchReport(found=None, rays_launched=rays_launched,
                              window_exits=window_exits,
                              min_corner_distance=min_corner)


def twist_action(m: RectangleComplex, family: str, p: SurfacePoint, power: int,
                 support=None) -> SurfacePoint:
    """Image of a point under the multitwist along one curve family.

    family "alpha" shears inside horizontal cylinders by (x, y) ->
    (x + power*lam*y mod c, y); family "beta" inside vertical ones by
    (x, y) -> (x, y - power*lam*x mod c), matching the derivative
    [[1, 0], [-lam, 1]].  support restricts the twist to a sub-multicurve
    (a set of curve vertices); cylinder boundaries stay fixed.  Requires
    all complete cylinders to have modulus 1/lam.
    """
    if family not in ("alpha", "beta"):
        raise ValueError("family must be alpha or beta")
    if m.lam is None:
        raise ValueError("complex carries no modulus parameter")
    _validate_point(m, p)
    direction = "horizontal" if family == "alpha" else "vertical"
    for cyl in cylinders(m, direction):
        if not cyl.truncated and not _mod_is_inverse_lam(cyl, m.lam):
            raise ValueError(f"cylinder at vertex {cyl.vertex} has modulus != 1/lam; "
                             "uniform-modulus complexes only")
    emap = m.graph.edge_map()
    vertex = emap[p.edge][0] if family == "alpha" else emap[p.edge][1]
    if support is not None and vertex not in support:
        return p
    layouts = m.h_layouts if family == "alpha" else m.v_layouts
    lay = layouts[vertex]
    if not lay.closed:
        raise ValueError(f"cylinder at vertex {vertex} is window-truncated; twist undefined")
    k = lay.edges.index(p.edge)
    o = lay.orients[k]
    w, h = m.width[p.edge], m.height[p.edge]
    if family == "alpha":
        along, across, across_len = p.x, p.y, h
        rect_len = w
    else:
        along, across, across_len = p.y, p.x, w
        rect_len = h
    pos = lay.offsets[k] + (along if o == 1 else rect_len - along)
    trans = across if o == 1 else across_len - across
    if trans == 0 or trans == lay.transverse:
        return p  # cylinder boundary is fixed pointwise
    shift = power * m.lam * trans
    if family == "beta":
        shift = -shift
    pos2 = _mod_length(pos + shift, lay.length)
    # locate the rectangle containing pos2
    k2 = len(lay.edges) - 1
    for idx in range(len(lay.edges)):
        nxt = lay.offsets[idx + 1] if idx + 1 < len(lay.edges) else lay.length
        if pos2 < nxt:
            k2 = idx
            break
    e2 = lay.edges[k2]
    o2 = lay.orients[k2]
    rect_len2 = m.width[e2] if family == "alpha" else m.height[e2]
    local = pos2 - lay.offsets[k2]
    along2 = local if o2 == 1 else rect_len2 - local
    across2 = trans if o2 == 1 else lay.transverse - trans
    if family == "alpha":
        q = SurfacePoint(e2, along2, across2)
    else:
        q = SurfacePoint(e2, across2, along2)
    return canonical_point(m, q)


def _mod_is_inverse_lam(cyl, lam) -> bool:
    mod = cyl.modulus
    if isinstance(mod, float) or isinstance(lam, float):
        return abs(float(mod) * float(lam) - 1.0) <= 1e-12
    return mod * lam == 1


def _mod_length(x, length):
    q = math.floor(float(x) / float(length))
    x = x - q * length
    while x < 0:
        x = x + length
    while x >= length:
        x = x - length
    return x


@dataclass(frozen=True)
class ConvergenceReport:
    """Window stabilization of a shrinking-support twist family."""

    window: tuple
    n_stable: int
    checked_up_to: int
    pointwise_verified: bool
    touching: tuple  # per n, whether the support difference meets the window


def compact_open_convergence_check(m: RectangleComplex, supports, limit_support,
                                   window, n_max: int, probes_per_edge: int = 2
                                   ) -> ConvergenceReport:
    """Least N with T_alpha T_{beta_n}^-1 == T_alpha T_{beta'}^-1 on the window
    for all n >= N; equality of point actions is exact once the support
    difference misses every window rectangle.

    supports: callable n -> set of beta-vertices, or an indexable sequence.
    """
    window = tuple(sorted(set(window)))
    limit_support = frozenset(limit_support)
    emap = m.graph.edge_map()
    window_vertices = {emap[e][1] for e in window}
    get = supports if callable(supports) else supports.__getitem__
    touching = []
    for n in range(n_max + 1):
        diff = frozenset(get(n)) ^ limit_support
        touching.append(bool(diff & window_vertices))
    n_stable = n_max + 1
    for n in range(n_max, -1, -1):
        if touching[n]:
            break
        n_stable = n
    # pointwise spot check with probe points in the window rectangles
    verified = True
    probes = []
    for e in window:
        w, h = m.width[e], m.height[e]
        for k in range(1, probes_per_edge + 1):
            frac = Fraction(k, probes_per_edge + 2)
            probes.append(SurfacePoint(e, w * frac, h * frac))

    def act(p, support):
        q = twist_action(m, "beta", p, -1, support=support)
        return twist_action(m, "alpha", q, 1)

    for n in range(n_stable, n_max + 1):
        sup = frozenset(get(n))
        for p in probes:
            if act(p, sup) != act(p, limit_support):
                verified = False
    if n_stable > 0 and touching[n_stable - 1]:
        sup = frozenset(get(n_stable - 1))
        if all(act(p, sup) == act(p, limit_support) for p in probes):
            # difference cylinder meets the window but no probe detects it:
            # probes may sit off the moved cylinder; not a failure
            pass
    return ConvergenceReport(window=window, n_stable=n_stable,
                             checked_up_to=n_max, pointwise_verified=verified,
                             touching=tuple(touching))
