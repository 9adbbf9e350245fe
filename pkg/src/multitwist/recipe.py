"""Filling multicurve pairs from tree normal forms of surfaces.

An infinite-type surface is encoded as a rooted subtree of the binary tree
(its space of ends), with genus introduced by a surgery that replaces tree
vertices by triangles.  From the surgered graph the generator reads off the
data that determines the truncated surface up to homeomorphism: the genus
(independent cycles), the puncture leaves, and the truncated ends.  It then
assembles a filling pair with the contract of the curve recipe:

  - every complementary face is a polygon or once-punctured polygon with at
    most max(8, m) sides (observed sizes stay in {2, 4, 6, 8}),
  - the face holding the marked point p has exactly 2m sides,
  - any two curves from opposite families meet at most twice,
  - the configuration graph has bounded valence.

The marked chamber comes from a chain of m+1 linked curves in taxicab
position (consecutive curves meeting twice): its outer face is a 2m-gon and
it carries m+2 two-sided faces, each of which must hold a puncture (an
empty bigon would contradict minimal position).  Genus is added by splicing
in four-square blocks whose faces are all 4-gons; a splice re-targets two
parallel gluing arrows and merges the flanking faces pairwise, so spliced
bigons are absorbed into 4- and 6-gons.  Puncture-heavy surfaces splice in
pillowcase blocks, which contribute two fresh bigon faces each.
"""

from __future__ import annotations

from dataclasses import dataclass, field


from .graphs import BipartiteConfigGraph
from .surfaces import RectangleComplex, RibbonData, build_surface, euler_characteristic

FACE_BOUND = 8


class RecipeError(ValueError):
    """Requested surface/weight combination is not realizable here."""


# ---------------------------------------------------------------------------
# tree normal forms


@dataclass(frozen=True)
class EndTreeSpec:
    """Rooted tree encoding of a surface: parent links, puncture leaves,
    genus-surgery marks, and frontier vertices where a truncation stopped."""

    root: object
    parents: tuple  # ((child, parent), ...) sorted
    punctures: frozenset
    genus_marks: frozenset
    frontier: frozenset
    family: str = "finite"

    @staticmethod
    def make(root, parents, punctures=(), genus_marks=(), frontier=(),
             family="finite") -> "EndTreeSpec":
        parents = dict(parents)
        spec = EndTreeSpec(root=root, parents=tuple(sorted(parents.items(), key=repr)),
                           punctures=frozenset(punctures),
                           genus_marks=frozenset(genus_marks),
                           frontier=frozenset(frontier), family=family)
        spec._validate()
        return spec

    def parent_map(self) -> dict:
        return dict(self.parents)

    def vertices(self) -> set:
        return {self.root} | set(self.parent_map())

    def children(self) -> dict:
        out = {v: [] for v in self.vertices()}
        for c, p in self.parents:
            out[p].append(c)
        return {v: sorted(ch, key=repr) for v, ch in out.items()}

    def degree(self, v) -> int:
        ch = self.children()
        return len(ch[v]) + (0 if v == self.root else 1)

    def leaves(self) -> set:
        ch = self.children()
        return {v for v in self.vertices() if v != self.root and not ch[v]}

    def _validate(self):
        pm = self.parent_map()
        if self.root in pm:
            raise ValueError("root cannot have a parent")
        for c, p in pm.items():
            cur, seen = p, {c}
            while cur != self.root:
                if cur in seen or cur not in pm:
                    raise ValueError(f"vertex {c} is not connected to the root")
                seen.add(cur)
                cur = pm[cur]
        if self.degree(self.root) > 2:
            raise ValueError("root degree must be at most 2")
        leaves = self.leaves()
        for v in self.punctures:
            if v not in leaves:
                raise ValueError(f"puncture mark {v} is not a leaf")
        for v in self.genus_marks:
            if v in leaves:
                raise ValueError(f"genus mark {v} sits on a leaf")
        for v in self.frontier:
            if v not in self.vertices():
                raise ValueError(f"frontier vertex {v} not in the tree")
        bare = leaves - self.punctures - self.frontier
        if bare:
            raise ValueError(f"leaves {sorted(bare, key=repr)} are neither "
                             "punctures nor frontier")

    def is_simple(self) -> bool:
        ch = self.children()
        for v in self.vertices():
            if v == self.root or self.degree(v) != 2:
                continue
            stack = list(ch[v])
            while stack:
                w = stack.pop()
                if self.degree(w) != 2 and w not in self.leaves():
                    return False
                stack.extend(ch[w])
        return True


def induced_subtree(addresses, depth: int) -> EndTreeSpec:
    """Union of the root rays through a prefix-coded end set.

    addresses: entries "ray:<bits>" (the single end <bits>000...) or
    "cone:<bits>" (every end through <bits>); bare strings mean ray.
    Vertices are bit-string prefixes, the root is "".  All materialized
    leaves at the truncation depth are frontier vertices.
    """
    if not addresses:
        raise ValueError("end set must be nonempty")
    rays, cones = set(), set()
    for a in addresses:
        kind, _, bits = a.partition(":") if ":" in a else ("ray", "", a)
        if set(bits) - {"0", "1"}:
            raise ValueError(f"address {a!r} is not binary")
        (rays if kind == "ray" else cones).add(bits)
    verts = {""}
    for bits in rays:
        ray = (bits + "0" * depth)[:max(depth, len(bits))]
        for k in range(1, len(ray) + 1):
            verts.add(ray[:k])
    for bits in cones:
        for k in range(1, len(bits) + 1):
            verts.add(bits[:k])
        frontier_layer = [bits]
        while frontier_layer:
            w = frontier_layer.pop()
            if len(w) >= max(depth, len(bits)):
                continue
            for b in "01":
                verts.add(w + b)
                frontier_layer.append(w + b)
    parents = {v: v[:-1] for v in verts if v}
    kids = {v: 0 for v in verts}
    for v in verts:
        if v:
            kids[v[:-1]] += 1
    leaves = {v for v in verts if v and kids[v] == 0}
    return EndTreeSpec.make("", parents, frontier=leaves, family="induced")


def simplify_tree(t: EndTreeSpec) -> EndTreeSpec:
    """Contract maximal chains of degree-2 vertices that shadow a branching.

    Afterwards every descendant of a non-root degree-2 vertex has degree 2,
    so the tree is simple; the end space at the materialized depth is kept.
    """
    pm = t.parent_map()
    ch = t.children()
    protected = t.punctures | t.frontier | t.genus_marks | {t.root}

    def has_branch_below(v) -> bool:
        stack = list(ch[v])
        while stack:
            w = stack.pop()
            if t.degree(w) >= 3:
                return True
            stack.extend(ch[w])
        return False

    removable = {v for v in t.vertices()
                 if v not in protected and t.degree(v) == 2 and has_branch_below(v)}
    new_parents = {}
    for v in t.vertices():
        if v == t.root or v in removable:
            continue
        p = pm[v]
        while p in removable:
            p = pm[p]
        new_parents[v] = p
    return EndTreeSpec.make(t.root, new_parents, punctures=t.punctures,
                            genus_marks=t.genus_marks & set(new_parents) | (t.genus_marks & {t.root}),
                            frontier=t.frontier, family=t.family)


@dataclass(frozen=True)
class SurgeredGraph:
    """Plain graph after genus surgery: adjacency plus bookkeeping marks."""

    edges: tuple  # sorted pairs
    punctures: frozenset
    frontier: frozenset
    triangles: int

    def vertices(self) -> set:
        return {v for e in self.edges for v in e}

    def genus(self) -> int:
        v = len(self.vertices())
        return len(self.edges) - v + 1 if v else 0


def surgery(t: EndTreeSpec, marks=None) -> SurgeredGraph:
    """Replace each marked vertex by a triangle (one handle apiece).

    A degree-3 vertex loses its two descendant edges and gains the triangle
    v, v'_*, v''_* re-routing them; a degree-2 vertex splits its descendant
    edge through the triangle.  Leaves cannot be marked.
    """
    marks = t.genus_marks if marks is None else frozenset(marks)
    leaves = t.leaves()
    for v in marks:
        if v in leaves:
            raise ValueError(f"genus mark {v} is a leaf")
        if v not in t.vertices():
            raise ValueError(f"genus mark {v} not in the tree")
    edges = set()
    pm = t.parent_map()
    for c, p in pm.items():
        edges.add(tuple(sorted((repr(c), repr(p)))))
    triangles = 0
    ch = t.children()
    for v in sorted(marks, key=repr):
        kids = sorted(ch[v], key=repr)
        va, vb = f"{v!r}*a", f"{v!r}*b"
        if len(kids) == 2:
            c1, c2 = kids
            edges.discard(tuple(sorted((repr(v), repr(c1)))))
            edges.discard(tuple(sorted((repr(v), repr(c2)))))
            edges |= {tuple(sorted(e)) for e in
                      ((repr(v), va), (repr(v), vb), (va, repr(c1)),
                       (vb, repr(c2)), (va, vb))}
        elif len(kids) == 1:
            c1 = kids[0]
            edges.discard(tuple(sorted((repr(v), repr(c1)))))
            edges |= {tuple(sorted(e)) for e in
                      ((repr(v), va), (repr(v), vb), (va, repr(c1)), (va, vb))}
        else:
            raise ValueError(f"marked vertex {v} has {len(kids)} descendants; "
                             "only degree 2 and 3 are supported")
        triangles += 1
    return SurgeredGraph(edges=tuple(sorted(edges)),
                         punctures=frozenset(repr(v) for v in t.punctures),
                         frontier=frozenset(repr(v) for v in t.frontier),
                         triangles=triangles)


def loch_ness_tree(genus: int) -> EndTreeSpec:
    """Truncated one-ended infinite-genus surface: a ray with every interior
    vertex marked for surgery."""
    if genus < 1:
        raise ValueError("need genus >= 1")
    verts = list(range(genus + 1))
    parents = {v: v - 1 for v in verts[1:]}
    return EndTreeSpec.make(0, parents, genus_marks=set(verts[:-1]),
                            frontier={verts[-1]}, family="loch-ness")


def ladder_tree(genus: int) -> EndTreeSpec:
    """Truncated two-ended infinite-genus surface (the ladder)."""
    if genus < 1:
        raise ValueError("need genus >= 1")
    left = [f"l{k}" for k in range(1, genus // 2 + 2)]
    right = [f"r{k}" for k in range(1, (genus + 1) // 2 + 2)]
    parents = {}
    prev = 0
    for v in right:
        parents[v] = prev
        prev = v
    prev = 0
    for v in left:
        parents[v] = prev
        prev = v
    marks = set(right[:-1]) | set(left[:-1]) | {0}
    marks = set(list(sorted(marks, key=repr))[:genus])
    return EndTreeSpec.make(0, parents, genus_marks=marks,
                            frontier={left[-1], right[-1]}, family="ladder")


# ---------------------------------------------------------------------------
# square-complex assembly


class _Assembly:
    """Mutable square complex under construction: successor maps + flips."""

    def __init__(self):
        self.h = {}
        self.v = {}
        self.flips = set()
        self.next_id = 0

    def fresh(self, k: int) -> list:
        ids = list(range(self.next_id, self.next_id + k))
        self.next_id += k
        return ids

    def add_chainlink(self, r: int) -> dict:
        """Chain of r linked taxicab loops; returns the block's square ids.

        Odd-position curves run horizontally, even vertically; consecutive
        curves meet twice (squares u, d per pair).  Curve ends make U-turns
        (flips); a trailing even curve crosses its neighbour on one column
        and closes without flips.
        """
        if r < 2:
            raise ValueError("chain needs at least 2 curves")
        ids = self.fresh(2 * (r - 1))

        def u(j):
            return ids[2 * (j - 1)]

        def d(j):
            return ids[2 * (j - 1) + 1]

        for j in range(1, r + 1):
            ax = "E" if j % 2 == 1 else "N"
            tgt = self.h if j % 2 == 1 else self.v
            if j == 1:
                tgt[u(1)] = d(1)
                tgt[d(1)] = u(1)
                self.flips |= {(u(1), ax), (d(1), ax)}
            elif j == r:
                tgt[u(r - 1)] = d(r - 1)
                tgt[d(r - 1)] = u(r - 1)
                if j % 2 == 1:
                    self.flips |= {(u(r - 1), ax), (d(r - 1), ax)}
            elif j % 2 == 1:
                tgt[u(j - 1)] = u(j)
                tgt[u(j)] = d(j)
                tgt[d(j)] = d(j - 1)
                tgt[d(j - 1)] = u(j - 1)
                self.flips |= {(u(j), ax), (d(j - 1), ax)}
            else:
                tgt[d(j - 1)] = u(j - 1)
                tgt[u(j - 1)] = u(j)
                tgt[u(j)] = d(j)
                tgt[d(j)] = d(j - 1)
                self.flips |= {(u(j - 1), ax), (d(j), ax)}
        return {"squares": ids, "kind": f"chainlink({r})"}

    def add_genus_block(self) -> dict:
        """Four squares, faces all 4-gons, genus one, no flips.  Terminal
        arm block: enters at (q0, axis), exposes nothing further."""
        a, b, c, e = self.fresh(4)
        self.h.update({a: b, b: a, c: e, e: c})
        self.v.update({a: c, c: b, b: e, e: a})  # interleaved: adds the handle
        return {"squares": [a, b, c, e], "kind": "genus"}

    def add_ff4_block(self, transposed: bool = False) -> dict:
        """Six squares, faces {2,2,2,2,8,8}, genus one.  A through block:
        the entry and exit arrows are bigon-flanked and sit on different
        curves, so chained blocks keep every curve's valence bounded."""
        q = self.fresh(6)
        h = {q[0]: q[1], q[1]: q[0], q[2]: q[3], q[3]: q[5], q[5]: q[4], q[4]: q[2]}
        v = {q[0]: q[1], q[1]: q[3], q[3]: q[2], q[2]: q[0], q[4]: q[5], q[5]: q[4]}
        fl = [(q[0], "E"), (q[1], "E"), (q[4], "N"), (q[5], "N")]
        if transposed:
            h, v = v, h
            fl = [(e, "N" if ax == "E" else "E") for e, ax in fl]
        self.h.update(h)
        self.v.update(v)
        self.flips |= set(fl)
        entry = (q[0], "E" if transposed else "N")
        exit_ = (q[5], "N" if transposed else "E")
        return {"squares": q, "kind": "ff4", "entry": entry, "exit": exit_}

    def add_penta5_block(self) -> dict:
        """Five squares, faces {2,2,2,4,10}, genus one: a weight-5 chamber
        with three punctured bigons (frozen from an exhaustive search)."""
        q = self.fresh(5)
        self.h.update({q[0]: q[0], q[1]: q[2], q[2]: q[3], q[3]: q[4], q[4]: q[1]})
        self.v.update({q[0]: q[1], q[1]: q[2], q[2]: q[0], q[3]: q[4], q[4]: q[3]})
        self.flips |= {(q[1], "E"), (q[3], "E")}
        return {"squares": q, "kind": "penta5"}

    def add_pente_block(self) -> dict:
        """Six squares, faces {2,6,6,10}, genus two: a weight-5 chamber with
        a single punctured bigon (frozen from a randomized search)."""
        q = self.fresh(6)
        self.h.update({q[0]: q[1], q[1]: q[0], q[2]: q[4], q[3]: q[2],
                       q[4]: q[3], q[5]: q[5]})
        self.v.update({q[0]: q[0], q[1]: q[3], q[2]: q[5], q[3]: q[4],
                       q[4]: q[1], q[5]: q[2]})
        self.flips |= {(q[2], "E"), (q[3], "E"), (q[3], "N"), (q[4], "N")}
        return {"squares": q, "kind": "pente"}

    def add_pillow_block(self) -> dict:
        """Two squares glued as a pillowcase: four 2-gon faces."""
        a, b = self.fresh(2)
        self.h.update({a: b, b: a})
        self.v.update({a: b, b: a})
        self.flips |= {(a, "N"), (b, "N")}
        return {"squares": [a, b], "kind": "pillow"}

    def splice(self, port1, port2):
        """Swap the partners of two side-gluings of the same kind (both
        vertical or both horizontal sides), then rebuild the successor maps.

        Working at the gluing level keeps the surgery local: exactly the
        faces flanking the two gluings merge pairwise, everything else,
        including flipped arrows elsewhere in the cylinders, is untouched.
        """
        from .surfaces import ribbon_from_gluings

        kinds = {"E": "h", "W": "h", "N": "v", "S": "v"}
        if kinds[port1[1]] != kinds[port2[1]]:
            raise RecipeError("splice needs two gluings of the same kind")
        gl = self._gluings()
        a, b = port1, gl[port1][:2]
        c, d = port2, gl[port2][:2]
        if len({a, b, c, d}) != 4:
            raise RecipeError("splice needs two disjoint gluings")

        def reglue(x, y):
            rev = x[1] == y[1]  # same side letter: half-translation
            gl[x] = (y[0], y[1], rev)
            gl[y] = (x[0], x[1], rev)

        reglue(a, d)
        reglue(c, b)
        rib = ribbon_from_gluings(sorted(self.h), gl)
        self.h = rib.h_map()
        self.v = rib.v_map()
        self.flips = set(rib.flips)

    def _gluings(self) -> dict:
        """Chart-level side gluings derived from the successor maps alone
        (no graph construction, so disconnected stages are fine)."""
        gl = {}
        for mapping, sides, key in ((self.h, ("E", "W"), "E"),
                                    (self.v, ("N", "S"), "N")):
            seen = set()
            for start in sorted(mapping):
                if start in seen:
                    continue
                e, o = start, 1
                while True:
                    seen.add(e)
                    nxt = mapping[e]
                    flip = (e, key) in self.flips
                    o2 = -o if flip else o
                    sa = sides[0] if o == 1 else sides[1]
                    sb = sides[1] if o2 == 1 else sides[0]
                    gl[(e, sa)] = (nxt, sb, flip)
                    gl[(nxt, sb)] = (e, sa, flip)
                    e, o = nxt, o2
                    if e == start:
                        break
        return gl

    def build(self) -> RectangleComplex:
        squares = sorted(self.h)
        if sorted(self.v) != squares:
            raise RecipeError("h/v square sets disagree")
        i_of, j_of = {}, {}
        for k, cyc in enumerate(_cycles(self.h)):
            for s in cyc:
                i_of[s] = 2 * k
        for k, cyc in enumerate(_cycles(self.v)):
            for s in cyc:
                j_of[s] = 2 * k + 1
        deg = {}
        for s in squares:
            deg[i_of[s]] = deg.get(i_of[s], 0) + 1
            deg[j_of[s]] = deg.get(j_of[s], 0) + 1
        graph = BipartiteConfigGraph.make(
            set(i_of.values()), set(j_of.values()),
            {s: (i_of[s], j_of[s]) for s in squares},
            valence_bound=max(deg.values()))
        ribbon = RibbonData.make(self.h, self.v, self.flips)
        return build_surface(graph, ribbon)


def _cycles(mapping: dict) -> list:
    seen, out = set(), []
    for s in sorted(mapping):
        if s in seen:
            continue
        cyc = [s]
        seen.add(s)
        cur = mapping[s]
        while cur != s:
            cyc.append(cur)
            seen.add(cur)
            cur = mapping[cur]
        out.append(cyc)
    return out


def _flanking(m: RectangleComplex) -> dict:
    """One key (edge, side) per gluing -> (face at lo end, face at hi end)."""
    from .surfaces import _END_CORNER
    cyc_of = {}
    for c in m.corner_cycles:
        for cor in c.corners:
            cyc_of[cor] = c.index
    out = {}
    seen = set()
    for (e, side), (e2, side2, _) in m.gluings.items():
        pair = frozenset(((e, side), (e2, side2)))
        if pair in seen:
            continue
        seen.add(pair)
        lo = cyc_of[(e, _END_CORNER[(side, "lo")])]
        hi = cyc_of[(e, _END_CORNER[(side, "hi")])]
        out[(e, side)] = (lo, hi)
    return out


def _face_sizes(m: RectangleComplex) -> dict:
    return {c.index: c.k for c in m.corner_cycles}


def _find_port(asm: _Assembly, marked_token, max_flank: int) -> tuple:
    """Best arrow for a splice: flanked by two distinct faces of size at most
    max_flank, neither the marked chamber; ports eating more bigon faces are
    preferred, then smaller flanks.  Returns (arrow, bigons eaten) or None."""
    m = asm.build()
    fl = _flanking(m)
    sizes = _face_sizes(m)
    marked = _cycle_index_of(m, marked_token)
    best = None
    for arrow in sorted(fl):
        lo, hi = fl[arrow]
        if lo == hi or marked in (lo, hi):
            continue
        if sizes[lo] > max_flank or sizes[hi] > max_flank:
            continue
        eaten = (sizes[lo] == 2) + (sizes[hi] == 2)
        key = (-eaten, sizes[lo] + sizes[hi], arrow)
        if best is None or key < best:
            best = key
    return (best[2], -best[0]) if best else None


def _cycle_index_of(m: RectangleComplex, token) -> int:
    for c in m.corner_cycles:
        if token in c.corners:
            return c.index
    raise RecipeError(f"corner {token} lost during assembly")


def _marked_face_index(m: RectangleComplex, p_squares) -> int:
    """The p-chamber: the largest face whose corners live on the p-block."""
    cands = [c for c in m.corner_cycles
             if all(e in p_squares for e, _ in c.corners)]
    if not cands:
        cands = list(m.corner_cycles)
    return max(cands, key=lambda c: (c.k, -c.index)).index


@dataclass(frozen=True)
class FaceInfo:
    index: int
    sides: int
    puncture: bool = False
    end: bool = False
    marked: bool = False


@dataclass(frozen=True)
class CurveRecipeOutput:
    """A filling pair as combinatorial data plus its assembled complex."""

    graph: BipartiteConfigGraph
    ribbon: RibbonData
    faces: tuple
    marked_face: int
    m: int
    genus: int
    complex: RectangleComplex = field(compare=False)

    def face(self, index: int) -> FaceInfo:
        return self.faces[index]


def build_multicurves(source, m: int, p: str = "auto") -> CurveRecipeOutput:
    """Assemble a filling pair realizing a surface with weight-m marked point.

    source: a SurgeredGraph, an EndTreeSpec (surgered automatically), or a
    plain (genus, punctures) pair for finite-type surfaces.  Frontier ends
    of truncations are carried as end-flagged punctured faces.
    """
    if m < 1:
        raise RecipeError("weight m must be at least 1")
    if p != "auto":
        raise RecipeError("only the automatic p placement is implemented")
    ends = 0
    if isinstance(source, EndTreeSpec):
        source = surgery(source)
    if isinstance(source, SurgeredGraph):
        genus = source.genus()
        punctures = len(source.punctures)
        ends = len(source.frontier)
    else:
        genus, punctures = source
    n_total = punctures + ends
    if genus == 0 and n_total < 4:
        raise RecipeError("a sphere needs at least 4 punctures to carry "
                          "essential curves")
    if n_total < m + 2 - 4 * genus:
        raise RecipeError(f"weight {m} on genus {genus} needs at least "
                          f"{m + 2 - 4 * genus} punctures (angle excess count)")
    last_error = None
    for variant in _p_block_variants(m):
        try:
            out = _attempt(variant, genus, n_total, ends, m)
        except RecipeError as exc:
            last_error = exc
            continue
        report = verify_recipe(out, m)
        if report.passes:
            return out
        last_error = RecipeError(f"{variant}: verification failed: "
                                 f"{report.failures}")
    raise RecipeError(f"no supported assembly for genus {genus}, {n_total} "
                      f"punctures/ends, weight {m}: {last_error}")


def _attempt(variant: str, genus: int, n: int, ends: int, m: int) -> CurveRecipeOutput:
    """One variant end to end: assemble, distribute flags, build, package."""
    asm, sizes, marked_idx, complex_ = _assemble_variant(variant, genus, n, m)
    # every unmarked bigon must hold a puncture (minimal position); leftover
    # punctures go to the largest faces; if slots run out, p doubles as a
    # marked puncture
    order = sorted((idx for idx in sizes if idx != marked_idx),
                   key=lambda idx: (sizes[idx] != 2, -sizes[idx], idx))
    bigons = [idx for idx in order if sizes[idx] == 2]
    flagged = bigons + [idx for idx in order if sizes[idx] != 2][: n - len(bigons)]
    if len(flagged) < n:
        if len(flagged) == n - 1:
            flagged.append(marked_idx)
        else:
            raise RecipeError(f"{variant}: not enough faces for {n} punctures")
    # truncated ends sit on the largest flagged faces away from p
    end_pool = sorted((idx for idx in flagged if idx != marked_idx),
                      key=lambda idx: (-sizes[idx], idx))
    if len(end_pool) < ends:
        raise RecipeError(f"{variant}: not enough faces for {ends} ends")
    end_faces = set(end_pool[:ends])
    punct_faces = set(flagged)
    infos = []
    for c in complex_.corner_cycles:
        infos.append(FaceInfo(index=c.index, sides=c.k,
                              puncture=c.index in punct_faces,
                              end=c.index in end_faces,
                              marked=c.index == marked_idx))
    punct_tokens = [complex_.corner_cycles[i].corners[0] for i in sorted(punct_faces)]
    marked_token = complex_.corner_cycles[marked_idx].corners[0]
    final = build_surface(complex_.graph, complex_.ribbon,
                          punctures=punct_tokens, marked=marked_token)
    return CurveRecipeOutput(graph=final.graph, ribbon=final.ribbon,
                             faces=tuple(infos), marked_face=marked_idx,
                             m=m, genus=genus, complex=final)


def _p_block_variants(m: int):
    """Alternative marked-chamber blocks, tried in order.  Standalone blocks
    (no spliceable port clear of the marked chamber) realize low-puncture
    cases the general chain cannot reach."""
    variants = []
    if m == 2:
        variants.append("torus")
    if m == 3:
        variants.append("fs3")
    if m == 4:
        variants.append("double-handle")
    if m == 5:
        variants.extend(["penta5", "pente"])
    variants.append("chainlink")
    return variants


def _assemble_variant(name: str, genus: int, n: int, m: int):
    asm = _Assembly()
    standalone = False
    g0 = 0
    if name == "chainlink":
        p_block = asm.add_chainlink(m + 1)
    elif name == "torus":
        a, b = asm.fresh(2)
        asm.h.update({a: b, b: a})
        asm.v.update({a: b, b: a})
        p_block = {"squares": [a, b], "kind": "torus"}
        g0, standalone = 1, True
    elif name == "fs3":
        # open 3-chain, one flipped end: faces {2,2,6,6}, genus 1
        a, b, c, e = asm.fresh(4)
        asm.h.update({a: b, b: a, c: e, e: c})
        asm.v.update({a: b, b: e, e: c, c: a})
        asm.flips |= {(a, "E"), (b, "E")}
        p_block = {"squares": [a, b, c, e], "kind": "fs3"}
        g0 = 1
    elif name == "double-handle":
        a, b, c, e = asm.fresh(4)
        asm.h.update({a: b, b: a, c: e, e: c})
        asm.v.update({a: b, b: e, e: c, c: a})  # faces {8,8}, genus 2
        p_block = {"squares": [a, b, c, e], "kind": "double-handle"}
        g0, standalone = 2, True
    elif name == "penta5":
        p_block = asm.add_penta5_block()
        g0 = 1  # has bigon-flanked gluings clear of the chamber: arms attach
    elif name == "pente":
        p_block = asm.add_pente_block()
        g0, standalone = 2, True
    else:
        raise RecipeError(f"unknown block {name}")
    p_squares = set(p_block["squares"])
    if genus < g0:
        raise RecipeError(f"{name} block carries genus {g0} > requested {genus}")
    if standalone and genus > g0:
        raise RecipeError(f"{name} block has no splice ports to grow genus")

    base = asm.build()
    marked_token = base.corner_cycles[_marked_face_index(base, p_squares)].corners[0]

    def bigon_excess() -> int:
        mm = asm.build()
        szs = _face_sizes(mm)
        marked = _cycle_index_of(mm, marked_token)
        return sum(1 for idx, k in szs.items()
                   if k == 2 and idx != marked) - n

    genus_needed = genus - g0
    while genus_needed > 0:
        found = _find_port(asm, marked_token, max_flank=4)
        if found is None:
            raise RecipeError(f"{name}: no legal splice port for a genus arm")
        port, eaten = found
        if bigon_excess() > 0 and eaten == 0:
            raise RecipeError(f"{name}: bigon faces outnumber punctures and "
                              "no port can absorb more")
        # while bigons still exceed punctures, spend genus one arm at a
        # time on absorbing ports; afterwards one long arm of through
        # blocks takes the rest
        length = 1 if bigon_excess() > 0 else genus_needed
        transposed = port[1] in ("E", "W")
        while length > 1:
            blk = asm.add_ff4_block(transposed=transposed)
            asm.splice(port, blk["entry"])
            port = blk["exit"]
            transposed = not transposed
            length -= 1
            genus_needed -= 1
        blk = asm.add_genus_block()
        entry = (blk["squares"][0], "E" if port[1] in ("E", "W") else "N")
        asm.splice(port, entry)
        genus_needed -= 1

    complex_ = asm.build()
    sizes = _face_sizes(complex_)
    if any(k > max(FACE_BOUND, 2 * m) for k in sizes.values()):
        raise RecipeError(f"{name}: face bound exceeded: {sorted(sizes.values())}")
    marked_idx = _cycle_index_of(complex_, marked_token)
    if sizes[marked_idx] != 2 * m:
        raise RecipeError(f"{name}: marked chamber has {sizes[marked_idx]} "
                          f"sides, wanted {2 * m}")
    bigons = sum(1 for idx, k in sizes.items() if k == 2 and idx != marked_idx)
    if bigons > n:
        raise RecipeError(f"{name}: {bigons} bigon faces exceed {n} punctures")
    if n > len(sizes):  # every face can hold one puncture, p's included
        raise RecipeError(f"{name}: only {len(sizes)} faces for {n} punctures")
    chi = euler_characteristic(complex_)
    if chi != 2 - 2 * genus:
        raise RecipeError(f"{name}: assembled genus {(2 - chi) // 2} != {genus}")
    return asm, sizes, marked_idx, complex_


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class RecipeReport:
    passes: bool
    failures: tuple
    face_census: tuple
    valence: int
    max_pair_intersections: int


def verify_recipe(out: CurveRecipeOutput, m: int) -> RecipeReport:
    """Check the curve-recipe contract on an emitted filling pair."""
    failures = []
    sizes = {f.index: f.sides for f in out.faces}
    bound = max(FACE_BOUND, m)
    for f in out.faces:
        if f.marked:
            if f.sides != 2 * m:
                failures.append(f"marked face {f.index} has {f.sides} sides, "
                                f"expected {2 * m}")
        elif f.sides > bound:
            failures.append(f"face {f.index} has {f.sides} > {bound} sides")
        if f.sides == 2 and not (f.puncture or f.marked):
            failures.append(f"bigon face {f.index} is empty (not minimal position)")
    # pairwise intersections <= 2
    pair_counts = {}
    for e, i, j in out.graph.edges:
        pair_counts[(i, j)] = pair_counts.get((i, j), 0) + 1
    worst = max(pair_counts.values()) if pair_counts else 0
    if worst > 2:
        bad = max(pair_counts, key=pair_counts.get)
        failures.append(f"curves {bad} intersect {worst} > 2 times")
    # finite valence is structural; record the bound
    valence = max(out.graph.degree(v) for v in out.graph.vertices())
    # essentiality of every curve
    for v in sorted(out.graph.vertices()):
        verdict = curve_is_essential(out.complex, v)
        if not verdict:
            failures.append(f"curve {v} bounds a disc or once-punctured disc")
    return RecipeReport(passes=not failures, failures=tuple(failures),
                        face_census=tuple(sorted(sizes.values())),
                        valence=valence, max_pair_intersections=worst)


def curve_is_essential(m: RectangleComplex, vertex: int) -> bool:
    """Cut along the core curve of the vertex's cylinder and test whether a
    side is a disc or once-punctured disc (marked points count as punctures)."""
    horizontal = vertex % 2 == 0
    layouts = m.h_layouts if horizontal else m.v_layouts
    lay = layouts[vertex]
    cyl = set(lay.edges)
    # cells: full squares outside, two halves inside the cylinder
    cells = {}
    for e in m.edges:
        if e in cyl:
            cells[(e, "pos")] = None  # N half (horizontal) or E half (vertical)
            cells[(e, "neg")] = None
        else:
            cells[(e, "full")] = None

    def cell_of(e, side):
        if e not in cyl:
            return (e, "full")
        if horizontal:
            return (e, "pos") if side == "N" else ((e, "neg") if side == "S" else None)
        return (e, "pos") if side == "E" else ((e, "neg") if side == "W" else None)

    parent = {c: c for c in cells}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            return True
        return False

    edge_count = 0
    seen_gluings = set()
    for (e, side), (e2, side2, rev) in m.gluings.items():
        key = frozenset(((e, side), (e2, side2)))
        if key in seen_gluings:
            continue
        seen_gluings.add(key)
        along = ("E", "W") if horizontal else ("N", "S")
        if e in cyl and e2 in cyl and side in along:
            # side gluing inside the cylinder: connects halves levelwise,
            # crosswise when the gluing reverses orientation
            for half in ("pos", "neg"):
                other = half if not rev else ("neg" if half == "pos" else "pos")
                union((e, half), (e2, other))
                edge_count += 1
            continue
        ca = cell_of(e, side)
        cb = cell_of(e2, side2)
        if ca is None or cb is None:
            # gluing along the cut circle itself cannot happen: those sides
            # are interior to the cylinder's transverse direction
            raise RecipeError("unexpected cut side")
        union(ca, cb)
        edge_count += 1

    comps = {}
    for c in cells:
        comps.setdefault(find(c), []).append(c)
    if len(comps) == 1:
        return True  # nonseparating
    # chi per side: original vertices carried by the side + cells - edges
    marked_like = {c.index for c in m.corner_cycles if c.puncture or c.marked}
    for comp_cells in comps.values():
        comp_set = set(comp_cells)
        n_cells = len(comp_set)
        n_edges = 0
        for (e, side), (e2, side2, rev) in m.gluings.items():
            key = frozenset(((e, side), (e2, side2)))
            along = ("E", "W") if horizontal else ("N", "S")
            if e in cyl and e2 in cyl and side in along:
                for half in ("pos", "neg"):
                    if (e, half) in comp_set:
                        n_edges += 1
                continue
            ca = cell_of(e, side)
            if ca in comp_set:
                n_edges += 1
        n_edges //= 2  # each gluing visited from both sides
        # corner cycles whose corners all sit in this component
        n_verts = 0
        punct = 0
        for c in m.corner_cycles:
            side_cells = set()
            for (e, cor) in c.corners:
                if e in cyl:
                    if horizontal:
                        side_cells.add((e, "pos") if cor in ("NE", "NW") else (e, "neg"))
                    else:
                        side_cells.add((e, "pos") if cor in ("NE", "SE") else (e, "neg"))
                else:
                    side_cells.add((e, "full"))
            if side_cells <= comp_set:
                n_verts += 1
                if c.index in marked_like:
                    punct += 1
        chi = n_verts - n_edges + n_cells
        if chi == 1 and punct <= 1:
            return False
    return True
