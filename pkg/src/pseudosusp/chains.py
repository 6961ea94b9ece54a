"""Chain patterns, folding refinements, stretching tests and horseshoe
certificates on a piecewise-linear desk model.

All geometry here is exact rational arithmetic (fractions.Fraction); the only
floats are reported entropies.  Closed intervals stand in for the subcontinua
of the folding construction: the itinerary structure is identical, only the
ambient space is simplified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .cantor import spectral_radius

FR = Fraction


class PatternError(ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ChainError(ValueError):
    """Chain violates tautness/adjacency, or a refinement is infeasible."""


class StretchPreconditionError(ValueError):
    """Horseshoe extraction requires a passing stretch test."""


# ---------------------------------------------------------------------------
# patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    """Unit-step index map f: {1..m} -> {1..n} between chains."""

    values: tuple[int, ...]
    n: int

    @property
    def m(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        return self.values[i - 1]


def pattern_validate(values: Sequence[int], n: Optional[int] = None) -> Pattern:
    values = tuple(int(v) for v in values)
    if not values:
        raise PatternError("pattern must be nonempty", 0)
    if n is None:
        n = max(values)
    for i, v in enumerate(values, start=1):
        if not 1 <= v <= n:
            raise PatternError(f"value {v} at position {i} outside 1..{n}", i)
    for i in range(1, len(values)):
        # violations are reported at the left endpoint of the step (1-based)
        if abs(values[i] - values[i - 1]) > 1:
            raise PatternError(
                f"step |{values[i]} - {values[i - 1]}| > 1 at position {i}", i)
    return Pattern(values, n)


def kfold(k: int) -> Pattern:
    """The 7-link folding pattern on 2k+5 indices; defined for odd k >= 3."""
    if k % 2 == 0 or k < 3:
        raise ValueError(f"k-fold requires an odd k >= 3, got {k}")
    values = []
    top = 2 * k + 5
    for i in range(1, top + 1):
        if i <= 5:
            values.append(i)
        elif i == top - 1:
            values.append(6)
        elif i == top:
            values.append(7)
        elif i % 2 == 0:
            values.append(4)
        elif i % 4 == 3:
            values.append(3)
        else:
            values.append(5)
    return pattern_validate(values, 7)


def identity_pattern(n: int) -> Pattern:
    return pattern_validate(tuple(range(1, n + 1)), n)


# ---------------------------------------------------------------------------
# piecewise-linear interval maps (exact)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PLMap:
    """Continuous piecewise-linear self-map of [0,1], exact breakpoints."""

    breakpoints: tuple[tuple[FR, FR], ...]

    def __post_init__(self):
        xs = [x for x, _ in self.breakpoints]
        ys = [y for _, y in self.breakpoints]
        if len(xs) < 2 or xs[0] != 0 or xs[-1] != 1:
            raise ValueError("breakpoints must span [0,1]")
        if any(b >= a for a, b in zip(xs[1:], xs)):
            raise ValueError("breakpoint abscissae must strictly increase")
        if any(y < 0 or y > 1 for y in ys):
            raise ValueError("image must stay inside [0,1]")

    def __call__(self, x: FR) -> FR:
        bp = self.breakpoints
        for (x0, y0), (x1, y1) in zip(bp, bp[1:]):
            if x0 <= x <= x1:
                if x1 == x0:
                    return y0
                return y0 + (x - x0) * (y1 - y0) / (x1 - x0)
        raise ValueError(f"{x} outside [0,1]")

    def image(self, interval: tuple[FR, FR]) -> tuple[FR, FR]:
        lo, hi = interval
        if lo > hi:
            raise ValueError("empty interval")
        vals = [self(lo), self(hi)]
        vals += [y for x, y in self.breakpoints if lo < x < hi]
        return min(vals), max(vals)

    def preimages(self, interval: tuple[FR, FR]) -> list[tuple[FR, FR]]:
        lo, hi = interval
        pieces = []
        bp = self.breakpoints
        for (x0, y0), (x1, y1) in zip(bp, bp[1:]):
            ymin, ymax = min(y0, y1), max(y0, y1)
            if ymax < lo or ymin > hi:
                continue
            if y0 == y1:
                pieces.append((x0, x1))
                continue
            slope = (y1 - y0) / (x1 - x0)
            a = x0 + (lo - y0) / slope
            b = x0 + (hi - y0) / slope
            a, b = min(a, b), max(a, b)
            a, b = max(a, x0), min(b, x1)
            if a <= b:
                pieces.append((a, b))
        return _merge_intervals(pieces)

    def compose_after(self, inner: "PLMap") -> "PLMap":
        """The map self ∘ inner, with exact breakpoint refinement."""
        xs = {x for x, _ in inner.breakpoints}
        outer_knots = [x for x, _ in self.breakpoints]
        bp = inner.breakpoints
        for (x0, y0), (x1, y1) in zip(bp, bp[1:]):
            if y0 == y1:
                continue
            for knot in outer_knots:
                if min(y0, y1) < knot < max(y0, y1):
                    xs.add(x0 + (knot - y0) * (x1 - x0) / (y1 - y0))
        knots = sorted(xs)
        return PLMap(tuple((x, self(inner(x))) for x in knots))

    def iterate(self, m: int) -> "PLMap":
        if m < 1:
            raise ValueError("iterate exponent must be >= 1")
        out = self
        for _ in range(m - 1):
            out = self.compose_after(out)
        return out

    def lap_pieces(self) -> list[tuple[tuple[FR, FR], tuple[FR, FR]]]:
        """(domain, image) per linear piece between consecutive breakpoints."""
        bp = self.breakpoints
        return [((x0, x1), (min(y0, y1), max(y0, y1)))
                for (x0, y0), (x1, y1) in zip(bp, bp[1:])]


def _merge_intervals(pieces: list[tuple[FR, FR]]) -> list[tuple[FR, FR]]:
    if not pieces:
        return []
    pieces = sorted(pieces)
    out = [pieces[0]]
    for lo, hi in pieces[1:]:
        plo, phi = out[-1]
        if lo <= phi:
            out[-1] = (plo, max(phi, hi))
        else:
            out.append((lo, hi))
    return out


def transition_matrix(g: PLMap) -> np.ndarray:
    """0/1 covering matrix of the linear pieces: A[i][j] = 1 iff the image of
    piece i contains piece j.  Degenerate (constant) pieces cover nothing."""
    pieces = g.lap_pieces()
    n = len(pieces)
    a = np.zeros((n, n))
    for i, (_, (ilo, ihi)) in enumerate(pieces):
        if ilo == ihi:
            continue
        for j, ((dlo, dhi), _) in enumerate(pieces):
            if ilo <= dlo and dhi <= ihi:
                a[i, j] = 1.0
    return a


def transition_entropy(g: PLMap) -> float:
    """log of the spectral radius of the covering matrix (the Markov oracle)."""
    sigma = spectral_radius(transition_matrix(g))
    if sigma <= 1.0:
        return 0.0
    return math.log(sigma)


# ---------------------------------------------------------------------------
# one-dimensional chains, stretching, horseshoes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalChain:
    """Ordered closed subintervals of [0,1]; taut = only consecutive closures
    meet."""

    links: tuple[tuple[FR, FR], ...]

    def validate_taut(self) -> None:
        ln = self.links
        for i, (lo, hi) in enumerate(ln):
            if lo >= hi:
                raise ChainError(f"link {i + 1} is degenerate")
        for i in range(len(ln) - 1):
            if ln[i][1] < ln[i + 1][0]:
                raise ChainError(f"links {i + 1},{i + 2} do not meet")
        for i in range(len(ln)):
            for j in range(i + 2, len(ln)):
                if ln[i][1] >= ln[j][0]:
                    raise ChainError(f"links {i + 1},{j + 1} are not taut")

    def core(self, i: int) -> tuple[FR, FR]:
        """Part of link i (1-based) exclusive of the neighbour overlaps."""
        lo, hi = self.links[i - 1]
        if i >= 2:
            lo = max(lo, self.links[i - 2][1])
        if i <= len(self.links) - 1:
            hi = min(hi, self.links[i][0])
        if lo >= hi:
            raise ChainError(f"link {i} has empty core")
        return lo, hi


def refine_interval_chain(chain: IntervalChain, f: Pattern) -> IntervalChain:
    """1D shadow of a pattern refinement: each parent's core is subdivided
    equally among the visits, with 10% margins.  Containment is exact; the
    folding itself cannot be taut on a line, so only the per-parent slot
    disjointness is guaranteed."""
    if f.n > len(chain.links):
        raise ChainError("pattern range exceeds parent chain length")
    visits: dict[int, list[int]] = {}
    for i in range(1, f.m + 1):
        visits.setdefault(f(i), []).append(i)
    out: dict[int, tuple[FR, FR]] = {}
    for parent, idxs in visits.items():
        clo, chi = chain.core(parent)
        w = (chi - clo) / len(idxs)
        if w <= FR(1, 10 ** 6):
            raise ChainError(f"refinement margins collapse inside parent {parent}")
        for slot, i in enumerate(idxs):
            out[i] = (clo + slot * w + w / 10, clo + (slot + 1) * w - w / 10)
    return IntervalChain(tuple(out[i] for i in range(1, f.m + 1)))


@dataclass(frozen=True)
class StretchResult:
    stretches: bool
    exponent: int
    orientation: str  # "standard", "swapped" or "none"


def _contains(outer: tuple[FR, FR], inner: tuple[FR, FR]) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def stretch_check(g: PLMap, chain: IntervalChain, m_bound: int = 8) -> StretchResult:
    """Does some iterate send link 3 into an end link and link 5 into the
    opposite end link?  Exact interval images."""
    chain.validate_taut()
    if len(chain.links) != 7:
        raise ChainError("stretch test is defined on 7-link chains")
    u1, u3, u5, u7 = (chain.links[i] for i in (0, 2, 4, 6))
    gm = g
    for m in range(1, m_bound + 1):
        i3, i5 = gm.image(u3), gm.image(u5)
        if _contains(u1, i3) and _contains(u7, i5):
            return StretchResult(True, m, "standard")
        if _contains(u7, i3) and _contains(u1, i5):
            return StretchResult(True, m, "swapped")
        if m < m_bound:
            gm = g.compose_after(gm)
    return StretchResult(False, 0, "none")


@dataclass
class HorseshoeCertificate:
    k: int
    depth: int
    exponent: int
    orientation: str
    passed: bool
    nonempty: int
    expected: int
    failing_word: Optional[tuple[int, ...]]
    entropy_bound: float
    slots: tuple[tuple[FR, FR], ...]
    intervals: dict[tuple[int, ...], tuple[FR, FR]] = field(default_factory=dict)

    def summary(self) -> str:
        if self.passed:
            return (f"horseshoe certificate: k={self.k} depth={self.depth} "
                    f"m={self.exponent}: all {self.expected} itinerary intervals "
                    f"nonempty, entropy >= {self.entropy_bound:.9g}")
        word = ",".join(map(str, self.failing_word or ()))
        return (f"horseshoe certificate FAILED: k={self.k} depth={self.depth} "
                f"m={self.exponent}: empty branch at word ({word}); "
                f"{self.nonempty}/{self.expected} intervals nonempty")


def horseshoe_extract(g: PLMap, chain: IntervalChain, k: int, depth: int,
                      m_bound: int = 8) -> HorseshoeCertificate:
    """Itinerary certificate over the k symbol slots of the k-fold refinement.

    Forward interval arithmetic decides branch nonemptiness exactly; pullback
    hulls of the surviving full-depth words are reported.  A passing
    certificate lower-bounds the entropy by log(k)/m."""
    if k % 2 == 0 or k < 3:
        raise ValueError(f"horseshoe extraction requires odd k >= 3, got {k}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    stretch = stretch_check(g, chain, m_bound)
    if not stretch.stretches:
        raise StretchPreconditionError(
            f"map does not stretch the chain for any exponent <= {m_bound}")
    refined = refine_interval_chain(chain, kfold(k))
    slots = tuple(refined.links[2 * i + 1] for i in range(1, k + 1))
    for i in range(k - 1):
        if slots[i][1] >= slots[i + 1][0]:
            raise ChainError("symbol slots are not pairwise disjoint")
    gm = g.iterate(stretch.exponent)

    frontier: dict[tuple[int, ...], tuple[FR, FR]] = {
        (i + 1,): slots[i] for i in range(k)}
    failing = None
    for _ in range(depth):
        nxt: dict[tuple[int, ...], tuple[FR, FR]] = {}
        for word in sorted(frontier):
            img = gm.image(frontier[word])
            for sym in range(1, k + 1):
                slo = max(img[0], slots[sym - 1][0])
                shi = min(img[1], slots[sym - 1][1])
                child = word + (sym,)
                if slo <= shi:
                    nxt[child] = (slo, shi)
                elif failing is None:
                    failing = child
        frontier = nxt
    nonempty = len(frontier)
    expected = k ** (depth + 1)
    passed = nonempty == expected
    bound = math.log(k) / stretch.exponent

    intervals: dict[tuple[int, ...], tuple[FR, FR]] = {}
    for word in sorted(frontier):
        pieces = [slots[word[-1] - 1]]
        for sym in reversed(word[:-1]):
            pulled: list[tuple[FR, FR]] = []
            for piece in pieces:
                for pre in gm.preimages(piece):
                    lo = max(pre[0], slots[sym - 1][0])
                    hi = min(pre[1], slots[sym - 1][1])
                    if lo <= hi:
                        pulled.append((lo, hi))
            pieces = _merge_intervals(pulled)
            if not pieces:
                break
        if pieces:
            intervals[word] = (pieces[0][0], pieces[-1][1])

    return HorseshoeCertificate(
        k=k, depth=depth, exponent=stretch.exponent, orientation=stretch.orientation,
        passed=passed, nonempty=nonempty, expected=expected,
        failing_word=None if passed else failing, entropy_bound=bound,
        slots=slots, intervals=intervals)


# ---------------------------------------------------------------------------
# two-dimensional chain covers and pattern refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rect:
    t: tuple[FR, FR]
    a: tuple[FR, FR]

    def hull_with(self, t_pt: FR, a_pt: FR) -> "Rect":
        return Rect((min(self.t[0], t_pt), max(self.t[1], t_pt)),
                    (min(self.a[0], a_pt), max(self.a[1], a_pt)))

    def contains(self, other: "Rect") -> bool:
        return (self.t[0] <= other.t[0] and other.t[1] <= self.t[1]
                and self.a[0] <= other.a[0] and other.a[1] <= self.a[1])


def _intervals_meet(x: tuple[FR, FR], y: tuple[FR, FR]) -> bool:
    return x[0] <= y[1] and y[0] <= x[1]


def rects_meet(p: Rect, q: Rect, wrap: bool = True) -> bool:
    if not _intervals_meet(p.t, q.t):
        return False
    shifts = (-1, 0, 1) if wrap else (0,)
    return any(_intervals_meet(p.a, (q.a[0] + s, q.a[1] + s)) for s in shifts)


@dataclass(frozen=True)
class ChainCover:
    """Chain of rectangles in (radial, angular) coordinates.

    `essential` chains close around the annulus: the last and first links are
    also adjacent.  `taut` is computed, never assumed: folding refinements of
    rectangle chains are genuinely non-taut (that obstruction is the point of
    the folding construction)."""

    links: tuple[Rect, ...]
    essential: bool = False
    taut: bool = True

    @staticmethod
    def build(links: Sequence[Rect], essential: bool = False) -> "ChainCover":
        links = tuple(links)
        n = len(links)
        for i, link in enumerate(links):
            if link.a[1] - link.a[0] >= FR(1, 2):
                raise ChainError(f"link {i + 1} angular extent must stay below 1/2")
        for i in range(n - 1):
            if not rects_meet(links[i], links[i + 1]):
                raise ChainError(f"links {i + 1},{i + 2} do not meet")
        if essential and n > 2 and not rects_meet(links[-1], links[0]):
            raise ChainError("essential chain must close around the annulus")
        taut = True
        for i in range(n):
            for j in range(i + 2, n):
                if essential and i == 0 and j == n - 1:
                    continue
                if rects_meet(links[i], links[j]):
                    taut = False
        return ChainCover(links, essential, taut)


def essential_seven_chain(overlap: FR = FR(1, 36)) -> ChainCover:
    """Uniform essential 7-chain of full-height rectangles around the annulus."""
    links = []
    for i in range(7):
        lo = FR(i, 7) - overlap
        hi = FR(i + 1, 7) + overlap
        links.append(Rect((FR(1, 10), FR(9, 10)), (lo, hi)))
    return ChainCover.build(links, essential=True)


def refine_chain(parent: ChainCover, f: Pattern) -> ChainCover:
    """Child chain following the pattern: link i strictly inside parent f(i),
    consecutive children meeting at a connector point inside the shared
    parent overlap.  Containment and adjacency are exact; tautness is
    computed honestly (folding patterns lose it on rectangles)."""
    n = len(parent.links)
    if f.n > n:
        raise ChainError("pattern range exceeds parent chain length")
    m = f.m
    s = FR(1, 1) / (m + FR(1, 2))

    def band(i: int) -> tuple[FR, FR]:
        return ((i - 1) * s, (i - 1) * s + s * FR(3, 2))

    def t_in_parent(p: Rect, frac_lo: FR, frac_hi: FR) -> tuple[FR, FR]:
        h = p.t[1] - p.t[0]
        return (p.t[0] + h * (FR(1, 20) + FR(9, 10) * frac_lo),
                p.t[0] + h * (FR(1, 20) + FR(9, 10) * frac_hi))

    children: list[Rect] = []
    for i in range(1, m + 1):
        p = parent.links[f(i) - 1]
        blo, bhi = band(i)
        tlo, thi = t_in_parent(p, blo, bhi)
        w = p.a[1] - p.a[0]
        alo, ahi = p.a[0] + w / 10, p.a[1] - w / 10
        if thi - tlo <= FR(1, 10 ** 6) or ahi - alo <= FR(1, 10 ** 6):
            raise ChainError("refinement margins collapse")
        children.append(Rect((tlo, thi), (alo, ahi)))

    def connector(i: int) -> tuple[FR, FR, FR]:
        """(t, a in parent-f(i) coords, angular shift to parent-f(i+1) coords)."""
        p = parent.links[f(i) - 1]
        q = parent.links[f(i + 1) - 1]
        b_lo = max(band(i)[0], band(i + 1)[0])
        b_hi = min(band(i)[1], band(i + 1)[1])
        b_mid = (b_lo + b_hi) / 2
        if f(i) == f(i + 1):
            tlo, thi = t_in_parent(p, b_mid, b_mid)
            return tlo, (p.a[0] + p.a[1]) / 2, FR(0)
        t_lo = max(p.t[0], q.t[0])
        t_hi = min(p.t[1], q.t[1])
        if t_lo > t_hi:
            raise ChainError(f"parents {f(i)},{f(i + 1)} share no radial range")
        if p.t == q.t:
            t_pt = t_in_parent(p, b_mid, b_mid)[0]
        else:
            t_pt = (t_lo + t_hi) / 2
        for shift in (FR(0), FR(1), FR(-1)):
            a_lo = max(p.a[0], q.a[0] + shift)
            a_hi = min(p.a[1], q.a[1] + shift)
            if a_lo <= a_hi:
                return t_pt, (a_lo + a_hi) / 2, shift
        raise ChainError(f"parents {f(i)},{f(i + 1)} share no angular range")

    for i in range(1, m):
        t_pt, a_pt, shift = connector(i)
        children[i - 1] = children[i - 1].hull_with(t_pt, a_pt)
        children[i] = children[i].hull_with(t_pt, a_pt - shift)

    for i in range(1, m + 1):
        if not parent.links[f(i) - 1].contains(children[i - 1]):
            raise ChainError(f"child {i} escaped parent {f(i)}")
    return ChainCover.build(children, essential=False)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RenderStyle:
    width: int = 1000
    height: int = 500
    palette: tuple[str, ...] = ("#0f3460", "#e94560", "#2ecc71", "#f39c12", "#533483")
    fill_opacity: float = 0.25
    stroke_width: float = 1.5


def render_chains(levels: Sequence[ChainCover], style: Optional[RenderStyle] = None) -> str:
    """Deterministic SVG: one layer per level, one polygon per link."""
    st = style or RenderStyle()
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {st.width} {st.height}">']
    for li, level in enumerate(levels):
        color = st.palette[li % len(st.palette)]
        out.append(f'  <g id="level{li}">')
        for ki, link in enumerate(level.links):
            x0 = float(link.a[0]) * st.width
            x1 = float(link.a[1]) * st.width
            y0 = (1.0 - float(link.t[1])) * st.height
            y1 = (1.0 - float(link.t[0])) * st.height
            pts = f"{x0:.3f},{y0:.3f} {x1:.3f},{y0:.3f} {x1:.3f},{y1:.3f} {x0:.3f},{y1:.3f}"
            out.append(
                f'    <polygon id="level{li}-link{ki}" points="{pts}" '
                f'fill="{color}" fill-opacity="{st.fill_opacity}" '
                f'stroke="{color}" stroke-width="{st.stroke_width}" />')
        out.append('  </g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# shipped desk fixtures
# ---------------------------------------------------------------------------

def tent_map() -> PLMap:
    return PLMap(((FR(0), FR(0)), (FR(1, 2), FR(1)), (FR(1), FR(0))))


def full_branch_middle_map(k: int) -> PLMap:
    """PL map with k full branches folded over the middle seventh of [0,1],
    constant outside; Markov entropy exactly log k."""
    if k % 2 == 0 or k < 3:
        raise ValueError("need odd k >= 3")
    left, right = FR(3, 7), FR(4, 7)
    pts = [(FR(0), FR(0)), (left, FR(0))]
    for j in range(1, k + 1):
        pts.append((left + FR(j, 7 * k), FR(j % 2)))
    pts.append((FR(1), FR(1)))
    return PLMap(tuple(pts))


def uniform_seven_chain(overlap: FR = FR(1, 252)) -> IntervalChain:
    links = []
    for i in range(7):
        lo = max(FR(0), FR(i, 7) - overlap)
        hi = min(FR(1), FR(i + 1, 7) + overlap)
        links.append((lo, hi))
    return IntervalChain(tuple(links))


def tent_seven_chain() -> IntervalChain:
    """Taut 7-chain tailored to the tent map: stretching holds at exponent 2,
    and the k = 3 certificate fails (the shipped negative fixture)."""
    return IntervalChain((
        (FR(0), FR(1, 4)),
        (FR(6, 25), FR(3, 10)),
        (FR(29, 100), FR(31, 100)),
        (FR(61, 200), FR(89, 200)),
        (FR(11, 25), FR(23, 50)),
        (FR(91, 200), FR(19, 25)),
        (FR(3, 4), FR(1)),
    ))
