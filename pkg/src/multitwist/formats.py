"""Line-oriented text formats for graphs, harmonic data, surfaces, flows.

Every emitter is deterministic (sorted iteration, canonical number
formatting) and every parser reports the offending line number.  Numbers
round-trip exactly: rationals as p/q, quadratic values as a+b*rD (so
3/2+1/2r5 is (3 + sqrt(5))/2), floats via repr.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .graphs import BipartiteConfigGraph, HarmonicAssignment
from .quadfield import QuadExt
from .surfaces import RectangleComplex, RibbonData, build_surface


class FormatError(ValueError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


_QUAD_RE = re.compile(r"^(?P<a>[+-]?\d+(?:/\d+)?)"
                      r"(?P<sign>[+-])(?P<b>\d+(?:/\d+)?)r(?P<d>\d+)$")


def format_number(x) -> str:
    if isinstance(x, QuadExt):
        if x.b == 0:
            return str(x.a)
        sign = "+" if x.b > 0 else "-"
        return f"{x.a}{sign}{abs(x.b)}r{x.d}"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def parse_number(tok: str, line: int = 0):
    m = _QUAD_RE.match(tok)
    if m:
        b = Fraction(m.group("b"))
        if m.group("sign") == "-":
            b = -b
        return QuadExt(Fraction(m.group("a")), b, int(m.group("d")))
    try:
        if "/" in tok or re.fullmatch(r"[+-]?\d+", tok):
            return Fraction(tok)
        return float(tok)
    except ValueError as exc:
        raise FormatError(f"bad number {tok!r}", line) from exc


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


# -- graphs -----------------------------------------------------------------

def write_graph(g: BipartiteConfigGraph) -> str:
    lines = [f"bipartite {len(g.part_i)} {len(g.part_j)} {len(g.edges)} {g.valence_bound}"]
    for e, i, j in g.edges:
        lines.append(f"edge {e} {i} {j}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> BipartiteConfigGraph:
    header = None
    edges = {}
    for lineno, toks in _tokens(text):
        if toks[0] == "bipartite":
            if len(toks) != 5:
                raise FormatError("bipartite header needs 4 integers", lineno)
            header = tuple(int(t) for t in toks[1:])
        elif toks[0] == "edge":
            if len(toks) != 4:
                raise FormatError("edge needs <id> <i> <j>", lineno)
            try:
                e, i, j = (int(t) for t in toks[1:])
            except ValueError as exc:
                raise FormatError(f"bad edge line: {exc}", lineno) from exc
            if e in edges:
                raise FormatError(f"duplicate edge id {e}", lineno)
            edges[e] = (i, j)
        elif toks[0] in ("lambda", "h", "sigma_h", "sigma_v", "sigma_h*",
                         "sigma_v*", "flip", "puncture", "marked"):
            continue  # surface/harmonic records share the file
        else:
            raise FormatError(f"unknown record {toks[0]!r}", lineno)
    if header is None:
        raise FormatError("missing bipartite header")
    ni, nj, ne, bound = header
    part_i = {i for i, _ in edges.values()}
    part_j = {j for _, j in edges.values()}
    if (len(part_i), len(part_j), len(edges)) != (ni, nj, ne):
        raise FormatError(f"header {header[:3]} does not match edge records "
                          f"({len(part_i)}, {len(part_j)}, {len(edges)})")
    try:
        return BipartiteConfigGraph.make(part_i, part_j, edges, bound)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# -- harmonic assignments ---------------------------------------------------

def write_harmonic(h: HarmonicAssignment) -> str:
    lines = [f"lambda {format_number(h.lam)}"]
    for v in sorted(h.values):
        lines.append(f"h {v} {format_number(h.values[v])}")
    return "\n".join(lines) + "\n"


def parse_harmonic(text: str) -> HarmonicAssignment:
    lam = None
    values = {}
    for lineno, toks in _tokens(text):
        if toks[0] == "lambda":
            lam = parse_number(toks[1], lineno)
        elif toks[0] == "h":
            if len(toks) != 3:
                raise FormatError("h needs <vertex> <value>", lineno)
            values[int(toks[1])] = parse_number(toks[2], lineno)
        elif toks[0] in ("bipartite", "edge", "sigma_h", "sigma_v", "sigma_h*",
                         "sigma_v*", "flip", "puncture", "marked"):
            continue
        else:
            raise FormatError(f"unknown record {toks[0]!r}", lineno)
    if lam is None:
        raise FormatError("missing lambda record")
    if not values:
        raise FormatError("no h records")
    return HarmonicAssignment(lam=lam, values=values)


# -- surfaces ---------------------------------------------------------------

def _component_lines(mapping: dict, edges, tag: str) -> list:
    """Cycles as `tag e1 e2 ...`, open chains as `tag* e1 e2 ...`."""
    targets = set(mapping.values())
    seen = set()
    lines = []
    for start in sorted(set(edges) - targets):
        seq = [start]
        cur = start
        while cur in mapping:
            cur = mapping[cur]
            seq.append(cur)
        seen.update(seq)
        lines.append(f"{tag}* " + " ".join(str(e) for e in seq))
    for start in sorted(edges):
        if start in seen or start not in mapping:
            continue
        seq = [start]
        seen.add(start)
        cur = mapping[start]
        while cur != start:
            seq.append(cur)
            seen.add(cur)
            cur = mapping[cur]
        lines.append(f"{tag} " + " ".join(str(e) for e in seq))
    return lines


def write_surface(m: RectangleComplex) -> str:
    lines = [write_graph(m.graph).rstrip("\n")]
    if m.harmonic is not None:
        lines.append(write_harmonic(m.harmonic).rstrip("\n"))
    edges = m.edges
    lines.extend(_component_lines(m.ribbon.h_map(), edges, "sigma_h"))
    lines.extend(_component_lines(m.ribbon.v_map(), edges, "sigma_v"))
    for e, side in sorted(m.ribbon.flips):
        lines.append(f"flip {e} {side}")
    for c in m.corner_cycles:
        if c.puncture:
            lines.append(f"puncture {c.index}")
        if c.marked:
            lines.append(f"marked {c.index}")
    return "\n".join(lines) + "\n"


def parse_surface(text: str) -> RectangleComplex:
    graph = parse_graph(text)
    harmonic = None
    if any(toks[0] == "lambda" for _, toks in _tokens(text)):
        harmonic = parse_harmonic(text)
    sigma_h, sigma_v = {}, {}
    flips = []
    punctures = []
    marked = None
    for lineno, toks in _tokens(text):
        tag = toks[0]
        if tag in ("sigma_h", "sigma_v", "sigma_h*", "sigma_v*"):
            try:
                seq = [int(t) for t in toks[1:]]
            except ValueError as exc:
                raise FormatError(f"bad cycle: {exc}", lineno) from exc
            if not seq:
                raise FormatError("empty cycle", lineno)
            target = sigma_h if tag.startswith("sigma_h") else sigma_v
            closed = not tag.endswith("*")
            for a, b in zip(seq, seq[1:]):
                target[a] = b
            if closed:
                target[seq[-1]] = seq[0]
        elif tag == "flip":
            if len(toks) != 3 or toks[2] not in ("E", "N"):
                raise FormatError("flip needs <edge> <E|N>", lineno)
            flips.append((int(toks[1]), toks[2]))
        elif tag == "puncture":
            punctures.append(int(toks[1]))
        elif tag == "marked":
            marked = int(toks[1])
    try:
        ribbon = RibbonData.make(sigma_h, sigma_v, flips)
        bare = build_surface(graph, ribbon, harmonic=harmonic)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    punct_tokens = []
    marked_token = None
    for idx in punctures:
        if not 0 <= idx < len(bare.corner_cycles):
            raise FormatError(f"puncture cycle {idx} out of range")
        punct_tokens.append(bare.corner_cycles[idx].corners[0])
    if marked is not None:
        if not 0 <= marked < len(bare.corner_cycles):
            raise FormatError(f"marked cycle {marked} out of range")
        marked_token = bare.corner_cycles[marked].corners[0]
    if punct_tokens or marked_token:
        return build_surface(graph, ribbon, harmonic=harmonic,
                             punctures=punct_tokens, marked=marked_token)
    return bare


# -- trajectories -----------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryDump:
    """File-level view of a trajectory: segments plus the terminal event."""

    segments: tuple  # (edge, x_in, y_in, x_out, y_out, length)
    terminal: str
    detail: tuple


def dump_of(traj) -> TrajectoryDump:
    segs = tuple((s.edge, s.x_in, s.y_in, s.x_out, s.y_out, s.length)
                 for s in traj.segments)
    detail = traj.terminal_detail
    if detail is None:
        detail = ()
    elif isinstance(detail, tuple):
        detail = tuple(str(x) for x in detail)
    else:
        detail = (str(detail),)
    return TrajectoryDump(segments=segs, terminal=traj.terminal, detail=detail)


def write_trajectory(traj_or_dump) -> str:
    dump = traj_or_dump if isinstance(traj_or_dump, TrajectoryDump) else dump_of(traj_or_dump)
    lines = []
    for e, xi, yi, xo, yo, ln in dump.segments:
        lines.append(f"seg {e} {format_number(xi)} {format_number(yi)} "
                     f"{format_number(xo)} {format_number(yo)} {format_number(ln)}")
    lines.append(" ".join(("end", dump.terminal) + dump.detail))
    return "\n".join(lines) + "\n"


def parse_trajectory(text: str) -> TrajectoryDump:
    segs = []
    terminal = None
    detail = ()
    for lineno, toks in _tokens(text):
        if toks[0] == "seg":
            if len(toks) != 7:
                raise FormatError("seg needs 6 fields", lineno)
            segs.append((int(toks[1]),) + tuple(parse_number(t, lineno) for t in toks[2:]))
        elif toks[0] == "end":
            terminal = toks[1]
            detail = tuple(toks[2:])
        else:
            raise FormatError(f"unknown record {toks[0]!r}", lineno)
    if terminal is None:
        raise FormatError("missing end record")
    return TrajectoryDump(segments=tuple(segs), terminal=terminal, detail=detail)


# -- trees ------------------------------------------------------------------

def write_tree(spec) -> str:
    lines = []
    if spec.family in ("loch-ness", "ladder"):
        depth = len(spec.genus_marks)
        lines.append(f"family {spec.family} {depth}")
        return "\n".join(lines) + "\n"
    lines.append(f"vertex {spec.root} root")
    for c, p in spec.parents:
        lines.append(f"vertex {c} {p}")
    for v in sorted(spec.punctures, key=repr):
        lines.append(f"puncture {v}")
    for v in sorted(spec.genus_marks, key=repr):
        lines.append(f"genus-mark {v}")
    for v in sorted(spec.frontier, key=repr):
        lines.append(f"frontier {v}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str):
    from .recipe import EndTreeSpec, loch_ness_tree, ladder_tree

    root = None
    parents = {}
    punctures, marks, frontier = set(), set(), set()
    for lineno, toks in _tokens(text):
        if toks[0] == "family":
            if len(toks) != 3:
                raise FormatError("family needs <tag> <depth>", lineno)
            tag, depth = toks[1], int(toks[2])
            if tag == "loch-ness":
                return loch_ness_tree(depth)
            if tag == "ladder":
                return ladder_tree(depth)
            raise FormatError(f"unknown family {tag!r}", lineno)
        elif toks[0] == "vertex":
            if len(toks) != 3:
                raise FormatError("vertex needs <id> <parent|root>", lineno)
            v = _vertex_id(toks[1])
            if toks[2] == "root":
                root = v
            else:
                parents[v] = _vertex_id(toks[2])
        elif toks[0] == "puncture":
            punctures.add(_vertex_id(toks[1]))
        elif toks[0] == "genus-mark":
            marks.add(_vertex_id(toks[1]))
        elif toks[0] == "frontier":
            frontier.add(_vertex_id(toks[1]))
        else:
            raise FormatError(f"unknown record {toks[0]!r}", lineno)
    if root is None:
        raise FormatError("missing root vertex")
    try:
        return EndTreeSpec.make(root, parents, punctures=punctures,
                                genus_marks=marks, frontier=frontier)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _vertex_id(tok: str):
    return int(tok) if re.fullmatch(r"-?\d+", tok) else tok
