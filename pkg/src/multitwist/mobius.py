"""Multitwist matrices in PSL(2,R) and their projective dynamics.

The two multitwists act with derivatives

    A = [[1, lam], [0, 1]]      (horizontal family)
    B = [[1, 0], [-lam, 1]]     (vertical family)

and words in A, B evaluate to 2x2 determinant-1 matrices up to sign.  For
lam >= 2 the group they generate is free; its elements have the integer
shape [[1 + k11*lam^2, k12*lam], [k21*lam, 1 + k22*lam^2]] and, when
k12 != 0, the ratio |(1 + k11*lam^2)/(k12*lam)| avoids the open interval
(1/t, t) with t = (lam + sqrt(lam^2 - 4))/2.

Directions are tested against the limit set by interval coding on the
projective line in the slope coordinate u = x/y: the generators own the
closed intervals

    A: [lam/2, inf]   A^-1: [-inf, -lam/2]   B: [-2/lam, 0]   B^-1: [0, 2/lam]

and repeatedly applying the inverse of the owning generator either drives
the point into a gap (not in the limit set), reaches an excluded
eigendirection, or survives, in which case the direction is declared
renormalizable at the probed depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .quadfield import QuadExt, quad_sqrt

# word letters: +1 = A, -1 = A^-1, +2 = B, -2 = B^-1
LETTER_NAMES = {1: "A", -1: "A'", 2: "B", -2: "B'"}
_CHAR_TO_LETTER = {"a": 1, "A": -1, "b": 2, "B": -2}
_LETTER_TO_CHAR = {v: k for k, v in _CHAR_TO_LETTER.items()}

ALL_DIRECTIONS = object()  # sentinel: every direction is an eigendirection of +-Id


def _is_exact(x) -> bool:
    return isinstance(x, (Rational, QuadExt)) and not isinstance(x, float)


def _exactify(x):
    if isinstance(x, QuadExt):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    return None


@dataclass(frozen=True)
class TwistWord:
    """A freely reduced word in the two multitwists."""

    letters: tuple
    positive_semigroup: bool = False

    @staticmethod
    def make(letters) -> "TwistWord":
        if isinstance(letters, str):
            try:
                letters = tuple(_CHAR_TO_LETTER[ch] for ch in letters)
            except KeyError as exc:
                raise ValueError(f"word letters must be among a A b B, got {exc}") from exc
        letters = tuple(int(x) for x in letters)
        for x in letters:
            if x not in LETTER_NAMES:
                raise ValueError(f"invalid letter {x}")
        for x, y in zip(letters, letters[1:]):
            if x == -y:
                raise ValueError(f"word is not freely reduced at {LETTER_NAMES[x]}{LETTER_NAMES[y]}")
        positive = bool(letters) and all(x in (1, -2) for x in letters)
        return TwistWord(letters, positive)

    def __str__(self):
        return "".join(_LETTER_TO_CHAR[x] for x in self.letters)

    def __len__(self):
        return len(self.letters)


def reduce_letters(letters) -> tuple:
    """Free reduction of a letter sequence."""
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class MobiusClass:
    """2x2 determinant-1 matrix modulo sign.

    Entries are stored sign-normalized: the first nonzero of (a, b, c, d)
    is positive, so equality of classes is equality of entries.  Traces are
    those of this canonical representative (well defined up to sign only).
    """

    a: object
    b: object
    c: object
    d: object

    @staticmethod
    def make(a, b, c, d, tol: float = 1e-12) -> "MobiusClass":
        entries = (a, b, c, d)
        det = a * d - b * c
        if _is_exact(det):
            if det != 1:
                raise ValueError(f"determinant must be 1, got {det}")
        elif abs(float(det) - 1.0) > tol:
            raise ValueError(f"determinant must be 1, got {det}")
        for x in entries:
            if x != 0:
                if x < 0:
                    entries = tuple(-e for e in entries)
                break
        return MobiusClass(*entries)

    @staticmethod
    def identity(exact: bool = True) -> "MobiusClass":
        one = Fraction(1) if exact else 1.0
        zero = Fraction(0) if exact else 0.0
        return MobiusClass.make(one, zero, zero, one)

    def __mul__(self, other: "MobiusClass") -> "MobiusClass":
        return MobiusClass.make(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusClass":
        return MobiusClass.make(self.d, -self.b, -self.c, self.a)

    def trace(self):
        return self.a + self.d

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def is_exact(self) -> bool:
        return all(_is_exact(x) for x in self.entries())

    def is_identity(self, tol: float = 1e-12) -> bool:
        vals = (self.a - 1, self.b, self.c, self.d - 1)
        if self.is_exact():
            return all(v == 0 for v in vals)
        return all(abs(float(v)) <= tol for v in vals)

    def apply_slope(self, u):
        """Action on the slope coordinate u = x/y; None encodes infinity."""
        a, b, c, d = self.entries()
        if u is None:
            return None if c == 0 else a / c
        den = c * u + d
        if den == 0:
            return None
        return (a * u + b) / den


def generator(letter: int, lam) -> MobiusClass:
    """Derivative matrix of one multitwist letter."""
    lam_e = _exactify(lam)
    lam = lam_e if lam_e is not None else float(lam)
    one = lam / lam if lam != 0 else 1  # matches the numeric type of lam
    zero = lam - lam
    if letter == 1:
        return MobiusClass.make(one, lam, zero, one)
    if letter == -1:
        return MobiusClass.make(one, -lam, zero, one)
    if letter == 2:
        return MobiusClass.make(one, zero, -lam, one)
    if letter == -2:
        return MobiusClass.make(one, zero, lam, one)
    raise ValueError(f"invalid letter {letter}")


def rho(word: TwistWord, lam) -> MobiusClass:
    """Evaluate the representation on a word, left to right."""
    if float(lam) <= 0:
        raise ValueError("lam must be positive")
    lam_e = _exactify(lam)
    exact = lam_e is not None
    out = MobiusClass.identity(exact=exact)
    for letter in word.letters:
        out = out * generator(letter, lam_e if exact else float(lam))
    return out


def classify(m: MobiusClass, tol: float = 1e-9) -> str:
    """identity / elliptic / parabolic / hyperbolic by |trace| against 2."""
    if m.is_identity():
        return "identity"
    tr = m.trace()
    if m.is_exact():
        at = abs(tr)
        if at == 2:
            return "parabolic"
        return "elliptic" if at < 2 else "hyperbolic"
    at = abs(float(tr))
    if abs(at - 2.0) <= tol:
        return "parabolic"
    return "elliptic" if at < 2.0 else "hyperbolic"


@dataclass(frozen=True)
class BrennerReport:
    """Integer-shape recovery for elements of the lam-multitwist group."""

    in_form: bool
    ks: tuple
    sign: int
    interval_ok: bool
    vacuous: bool
    ratio: object


def brenner_check(m: MobiusClass, lam, tol: float = 1e-9) -> BrennerReport:
    """Recover the integer parameters (k11, k12, k21, k22) and test the
    trace-field interval exclusion with t = (lam + sqrt(lam^2 - 4))/2."""
    lam_e = _exactify(lam)
    if lam_e is None or lam_e < 2:
        raise ValueError("brenner_check needs rational lam >= 2")
    lam2 = lam_e * lam_e

    def try_sign(sign):
        a, b, c, d = (sign * x for x in m.entries())
        raw = ((a - 1) / lam2, b / lam_e, c / lam_e, (d - 1) / lam2)
        ks = []
        for r in raw:
            if _is_exact(r):
                fr = r.as_fraction() if isinstance(r, QuadExt) else Fraction(r)
                if fr.denominator != 1:
                    return None
                ks.append(int(fr))
            else:
                n = round(float(r))
                if abs(float(r) - n) > tol:
                    return None
                ks.append(n)
        return tuple(ks)

    ks = try_sign(1)
    sign = 1
    if ks is None:
        ks = try_sign(-1)
        sign = -1
    if ks is None:
        return BrennerReport(False, (), 0, False, False, None)
    k11, k12, _, _ = ks
    if k12 == 0:
        return BrennerReport(True, ks, sign, True, True, None)
    t = (QuadExt(lam_e) + quad_sqrt(lam2 - 4)) / 2
    num = 1 + k11 * lam2
    ratio = abs(Fraction(num, 1) / (Fraction(k12) * lam_e))
    inside = (1 / t) < ratio < t
    return BrennerReport(True, ks, sign, not inside, False, ratio)


@dataclass(frozen=True)
class ProjectiveDirection:
    """A slope (x : y) up to scale; canonical form (1, y/x) or (0, 1)."""

    x: object
    y: object

    @staticmethod
    def make(x, y) -> "ProjectiveDirection":
        if x == 0 and y == 0:
            raise ValueError("direction (0,0) is not projective")
        xe, ye = _exactify(x), _exactify(y)
        if xe is None or ye is None:
            x, y = float(x), float(y)
            n = (x * x + y * y) ** 0.5
            x, y = x / n, y / n
            if x < 0 or (x == 0 and y < 0):
                x, y = -x, -y
            return ProjectiveDirection(x, y)
        x = xe if xe is not None else x
        y = ye if ye is not None else y
        if x != 0:
            return ProjectiveDirection(x / x, y / x)
        return ProjectiveDirection(x - x, y / y)

    def slope_u(self):
        """u = x/y; None is infinity (the horizontal direction)."""
        if self.y == 0:
            return None
        return self.x / self.y

    @staticmethod
    def from_slope_u(u) -> "ProjectiveDirection":
        if u is None:
            return ProjectiveDirection.make(1, 0)
        return ProjectiveDirection.make(u, 1 if _is_exact(u) else 1.0)

    def is_exact(self) -> bool:
        return _is_exact(self.x) and _is_exact(self.y)

    def close_to(self, other: "ProjectiveDirection", tol: float = 1e-9) -> bool:
        cross = self.x * other.y - self.y * other.x
        if self.is_exact() and other.is_exact():
            return cross == 0
        return abs(float(cross)) <= tol

    def vector(self) -> tuple:
        return (self.x, self.y)


def eigendirections(m: MobiusClass, tol: float = 1e-9):
    """Fixed directions on the projective line: 2 / 1 / 0 for hyperbolic /
    parabolic / elliptic, expanding first; identity gives ALL_DIRECTIONS."""
    cls = classify(m, tol)
    if cls == "identity":
        return ALL_DIRECTIONS
    if cls == "elliptic":
        return []
    a, b, c, d = m.entries()
    tr = m.trace()
    if cls == "parabolic":
        mu = tr / 2
        if b != 0:
            return [ProjectiveDirection.make(b, mu - a)]
        if c != 0:
            return [ProjectiveDirection.make(mu - d, c)]
        return [ProjectiveDirection.make(1, 0)]
    disc = tr * tr - 4
    root = None
    if m.is_exact():
        try:
            fr = disc.as_fraction() if isinstance(disc, QuadExt) else Fraction(disc)
            root = quad_sqrt(fr)
            half = Fraction(1, 2)
        except ValueError:  # irrational trace: drop to floats
            root = None
    if root is None:
        tr = float(tr)
        a, b, c, d = (float(x) for x in (a, b, c, d))
        root = float(disc) ** 0.5
        half = 0.5
    mus = [(tr + root) * half, (tr - root) * half]
    mus.sort(key=lambda t_: -abs(float(t_)))  # expanding eigenvalue first
    out = []
    for mu in mus:
        if b != 0:
            out.append(ProjectiveDirection.make(b, mu - a))
        elif c != 0:
            out.append(ProjectiveDirection.make(mu - d, c))
        else:
            out.append(ProjectiveDirection.make(1, 0) if abs(float(a)) > 1
                       else ProjectiveDirection.make(0, 1))
    return out


@dataclass(frozen=True)
class RenormVerdict:
    verdict: str  # yes | no | undetermined
    reason: str
    steps: int


def _excluded_slopes(lam):
    """Slopes (as u values) whose group orbits are never renormalizable:
    fixed directions of A, of B^-1, and of the product B*A."""
    lam_e = _exactify(lam)
    exact = lam_e is not None
    lamv = lam_e if exact else float(lam)
    targets = [None, lamv - lamv]  # u = inf (A) and u = 0 (B^-1)
    ba = generator(2, lamv) * generator(1, lamv)
    eig = eigendirections(ba)
    if eig is not ALL_DIRECTIONS:
        targets.extend(e.slope_u() for e in eig)
    return targets


def renormalizable(d: ProjectiveDirection, lam, depth: int = 60,
                   tol: float = 1e-9) -> RenormVerdict:
    """Depth-bounded limit-set coding of a direction.

    "no" when the coding exits the generator intervals (lam > 2) or hits an
    excluded eigendirection; "yes" when it survives depth steps; floating
    ties too close to an interval boundary leave "undetermined".
    """
    lam_e = _exactify(lam)
    exact = lam_e is not None and d.is_exact()
    if (lam_e if lam_e is not None else float(lam)) < 2:
        raise ValueError("renormalizable directions need lam >= 2")
    if depth < 1:
        raise ValueError("depth must be positive")
    lamv = lam_e if exact else float(lam)
    u = d.slope_u()
    if not exact and u is not None:
        u = float(u)
    half = lamv / 2
    small = 2 / lamv
    excluded = _excluded_slopes(lamv)
    inv_letter = {1: -1, -1: 1, 2: -2, -2: 2}
    # interval owners, each as (letter, membership test)
    zones = [
        (1, lambda v: v is None or v >= half),
        (-1, lambda v: v is None or v <= -half),
        (2, lambda v: v is not None and -small <= v <= 0),
        (-2, lambda v: v is not None and 0 <= v <= small),
    ]

    def hits_excluded(v):
        for t in excluded:
            if v is None and t is None:
                return True
            if v is None or t is None:
                continue
            if exact and _is_exact(t):
                if v == t:
                    return True
            elif abs(float(v) - float(t)) <= tol:
                return True
        return False

    def near_boundary(v):
        if v is None:
            return False
        vf = float(v)
        return min(abs(abs(vf) - float(half)), abs(abs(vf) - float(small))) <= tol

    prev = 0
    ambiguous = False
    for step in range(depth):
        if hits_excluded(u):
            return RenormVerdict("no", "excluded eigendirection reached", step)
        if not exact and near_boundary(u):
            ambiguous = True
        owners = [letter for letter, test in zones if test(u) and letter != -prev]
        if not owners:
            if not exact and ambiguous:
                return RenormVerdict("undetermined", "boundary-ambiguous exit", step)
            return RenormVerdict("no", "coding exits the limit-set intervals", step)
        letter = owners[0]
        u = generator(inv_letter[letter], lamv).apply_slope(u)
        prev = letter
    if ambiguous and not exact:
        return RenormVerdict("undetermined", "depth exhausted near interval boundary", depth)
    return RenormVerdict("yes", "coding survives the probed depth", depth)
