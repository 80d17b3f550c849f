"""Enumeration and recognition of primitive elements (simple closed curves).

Free rank 2: primitive classes up to conjugacy and inversion are indexed by
coprime exponent pairs via Christoffel words (lower construction), and are
cross-checked by a brute-force Whitehead reduction oracle.

Surface kinds: a class is accepted when it is not a proper power and no
conjugate within the search depth has an axis crossing its own under the
faithful reference structure (axis linking on the boundary circle of the
Fuchsian plane).  A shared axis is not a crossing: a one-sided curve's
conjugates can share its axis with reversed translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import charlab
from . import words as W
from .defaults import DEFAULT_SETTINGS, PRIMS_BUDGET, NumericSettings
from .errors import DomainError
from .hyp import Isometry

CROSSING = "crossing"
DISJOINT = "disjoint"
SAME_AXIS = "same_axis"


@dataclass(frozen=True, order=True)
class PrimitiveClass:
    """Canonical conjugacy-and-inversion class of a primitive element."""

    length: int
    word: W.Word
    orientation: int
    verdict_depth: int  # conjugator depth checked; 0 = exact combinatorial


@dataclass
class ReferenceStructure:
    """Faithful geometric oracle: a reference representation plus cached
    conjugator matrices by geodesic length."""

    representation: charlab.Representation
    conjugator_depth: int = 6
    _ball: W.CayleyBall | None = field(default=None, repr=False)
    _layers: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def presentation(self) -> W.Presentation:
        return self.representation.presentation

    def ball(self, depth: int) -> W.CayleyBall:
        if self._ball is None or self._ball.radius < depth:
            self._ball = W.build_ball(self.presentation, depth, verify=False)
            self._layers = None
        return self._ball

    def conjugator_layers(self, depth: int) -> list[np.ndarray]:
        """[(n_k, 2, 2) matrices of the length-k sphere] for k <= depth."""
        ball = self.ball(depth)
        if self._layers is None or len(self._layers) <= depth:
            gens = [np.array([[m.a, m.b], [m.c, m.d]], dtype=complex)
                    for m in self.representation.matrices]
            mats = W.ball_matrices(ball, gens)
            layers = []
            start = 0
            for size in ball.layer_sizes:
                layers.append(mats[start:start + size])
                start += size
            self._layers = layers
        return self._layers[:depth + 1]


def reference_structure(p: W.Presentation, conjugator_depth: int = 6) -> ReferenceStructure:
    return ReferenceStructure(charlab.reference_representation(p), conjugator_depth)


def is_proper_power(w: W.Word) -> bool:
    """Exact combinatorial check: some period properly divides the length."""
    n = len(w)
    if n == 0:
        return False
    for d in range(1, n):
        if n % d:
            continue
        if all(w[i] == w[i % d] for i in range(n)):
            return True
    return False


def _fixed_points(m: Isometry, settings: NumericSettings) -> tuple[complex, complex] | None:
    """Both fixed points as complex numbers; None when one is at infinity."""
    tsq = m.trace_squared()
    if abs(tsq - 4.0) < settings.class_tol or m.dist_to_identity() < settings.class_tol:
        raise DomainError("axis oracle unusable: element not loxodromic")
    if abs(tsq.imag) < settings.class_tol and -settings.class_tol < tsq.real < 4.0:
        raise DomainError("axis oracle unusable: element not loxodromic")
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
    if abs(m.c) < 1e-13 * scale:
        return None
    disc = np.sqrt(complex((m.d - m.a) ** 2 + 4.0 * m.b * m.c))
    z1 = ((m.a - m.d) + disc) / (2.0 * m.c)
    z2 = ((m.a - m.d) - disc) / (2.0 * m.c)
    return (complex(z1), complex(z2))


def _cross_ratio_sign(p1, p2, q1, q2) -> float:
    """Negative iff the pairs {p1,p2}, {q1,q2} are linked on the circle."""
    return ((p1 - q1) * (p2 - q2) * (p1 - q2) * (p2 - q1)).real


def axes_cross(g: W.Word, h: W.Word, ref: ReferenceStructure,
               settings: NumericSettings = DEFAULT_SETTINGS) -> str:
    """Linking verdict for the axes of two loxodromic images on the boundary
    circle of the reference structure."""
    mg = ref.representation.evaluate(g)
    mh = ref.representation.evaluate(h)
    fg = _fixed_points(mg, settings)
    fh = _fixed_points(mh, settings)

    def as_pair(f, m):
        if f is not None:
            return f
        other = m.b / (m.d - m.a)
        return (complex(other), None)  # second point at infinity

    pg, ph = as_pair(fg, mg), as_pair(fh, mh)
    return _linking_verdict(pg, ph, settings.axis_match_tol)


def _linking_verdict(pg, ph, tol) -> str:
    """pg, ph: endpoint pairs, None meaning the point at infinity."""

    def matches(u, v):
        if u is None or v is None:
            return u is None and v is None
        return abs(u - v) < tol

    same = ((matches(pg[0], ph[0]) and matches(pg[1], ph[1]))
            or (matches(pg[0], ph[1]) and matches(pg[1], ph[0])))
    if same:
        return SAME_AXIS
    # move any infinite endpoint to a finite chart via z -> 1/(z - shift)
    pts = [pg[0], pg[1], ph[0], ph[1]]
    if any(x is None for x in pts):
        finite = [x for x in pts if x is not None]
        shift = min(x.real for x in finite) - 1.0
        pts = [complex(0.0) if x is None else 1.0 / (x - shift) for x in pts]
    s = _cross_ratio_sign(*pts)
    return CROSSING if s < 0 else DISJOINT


def is_simple(w: W.Word, ref: ReferenceStructure, depth: int | None = None,
              settings: NumericSettings = DEFAULT_SETTINGS) -> bool:
    """True iff w is not a proper power and no conjugate u w u^-1 with
    ||u|| <= depth has an axis crossing w's axis (surface kinds), or the
    rank-2 Whitehead oracle accepts (free kind)."""
    p = ref.presentation
    core, _ = W.cyclic_reduce(w)
    if not core:
        raise DomainError("identity is not a curve")
    if p.kind == W.FREE:
        if p.rank != 2:
            raise DomainError("free-group simplicity oracle is rank 2 only")
        return whitehead_is_primitive(core)
    if is_proper_power(core):
        return False
    if depth is None:
        depth = len(core) + 4
    return _surface_simple_depth(core, ref, depth, settings)


def _adjugate(mats: np.ndarray) -> np.ndarray:
    """Adjugate batch: the inverse of det-1 matrices without cancellation
    (a scalar det drift is invisible to the Mobius action)."""
    out = np.empty_like(mats)
    out[:, 0, 0] = mats[:, 1, 1]
    out[:, 0, 1] = -mats[:, 0, 1]
    out[:, 1, 0] = -mats[:, 1, 0]
    out[:, 1, 1] = mats[:, 0, 0]
    return out


def _mobius_batch(mats: np.ndarray, p: complex | None) -> tuple[np.ndarray, np.ndarray]:
    """Images of a boundary point under an (n, 2, 2) batch, as (values, at_inf).

    The image of w's axis under u is the axis of u w u^-1; mapping endpoints
    avoids the catastrophic cancellation of fixed points of triple products.
    """
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    scale = np.max(np.abs(mats), axis=(1, 2))
    if p is None:
        num, den = a, c
    else:
        num, den = a * p + b, c * p + d
    at_inf = np.abs(den) < 1e-14 * scale
    vals = np.where(at_inf, 0.0, num / np.where(at_inf, 1.0, den))
    return vals, at_inf


def _surface_simple_depth(core: W.Word, ref: ReferenceStructure, depth: int,
                          settings: NumericSettings) -> bool:
    rep = ref.representation
    mw = rep.evaluate(core)
    fw = _fixed_points(mw, settings)
    if fw is None:
        other = mw.b / (mw.d - mw.a)
        fw = (complex(other), None)
    tol = settings.axis_match_tol
    p1, p2 = fw
    for layer in ref.conjugator_layers(depth):
        if len(layer) == 0:
            continue
        q1, q1_inf = _mobius_batch(layer, p1)
        q2, q2_inf = _mobius_batch(layer, p2)
        any_inf = bool(np.any(q1_inf) or np.any(q2_inf)) or p2 is None
        if not any_inf and p2 is not None:
            s11 = np.abs(q1 - p1) < tol
            s12 = np.abs(q1 - p2) < tol
            s21 = np.abs(q2 - p1) < tol
            s22 = np.abs(q2 - p2) < tol
            same = (s11 & s22) | (s12 & s21)
            s = ((p1 - q1) * (p2 - q2) * (p1 - q2) * (p2 - q1)).real
            if np.any(~same & (s < 0)):
                return False
        else:
            for i in range(len(layer)):
                ph = (None if q1_inf[i] else complex(q1[i]),
                      None if q2_inf[i] else complex(q2[i]))
                if _linking_verdict((p1, p2), ph, tol) == CROSSING:
                    return False
    return True


# ---------------------------------------------------------------------------
# rank-2 free group: Christoffel words and the Whitehead oracle

def christoffel_word(p: int, q: int) -> W.Word:
    """Lower Christoffel word of slope p/q on (a, b): q a-steps, p b-steps."""
    if math.gcd(p, q) != 1:
        raise DomainError("christoffel slope must be in lowest terms")
    n = p + q
    out = []
    for i in range(1, n + 1):
        out.append(2 if (i * p) // n != ((i - 1) * p) // n else 1)
    return tuple(out)


def _class_canonical_free(w: W.Word) -> W.Word:
    """Shortlex-minimal word over rotations of the core and of its inverse."""
    core, _ = W.cyclic_reduce(w)
    if not core:
        return ()
    best = None
    for word in (core, W.invert_word(core)):
        b = W.pack(word)
        for k in range(len(b)):
            rot = b[k:] + b[:k]
            if best is None or rot < best:
                best = rot
    return W.unpack(best)


_WH_AUTOS_F2 = (
    ((1, 2), (2,)), ((1, -2), (2,)), ((2, 1), (2,)), ((-2, 1), (2,)),
    ((1,), (2, 1)), ((1,), (2, -1)), ((1,), (1, 2)), ((1,), (-1, 2)),
)


def _cyclic_len(w: W.Word) -> int:
    return len(W.cyclic_reduce(w)[0])


def whitehead_is_primitive(w: W.Word) -> bool:
    """Brute-force Whitehead reduction for rank 2: w is primitive iff
    elementary automorphisms shrink its cyclic length to 1."""
    core, _ = W.cyclic_reduce(W.free_reduce(w))
    if not core:
        return False
    while True:
        n = len(core)
        if n == 1:
            return True
        best = None
        for img_a, img_b in _WH_AUTOS_F2:
            table = {1: img_a, -1: W.invert_word(img_a),
                     2: img_b, -2: W.invert_word(img_b)}
            image = W.free_reduce(tuple(y for x in core for y in table[x]))
            image, _ = W.cyclic_reduce(image)
            if len(image) < n and (best is None or len(image) < len(best)):
                best = image
        if best is None:
            return False
        core = best


def f2_primitives(max_len: int) -> list[PrimitiveClass]:
    """All rank-2 primitive classes up to conjugacy and inversion with
    cyclic length <= max_len, via Christoffel words indexed by slopes."""
    p = W.free_group(2)
    out = []
    seen = set()
    for total in range(1, max_len + 1):
        for nb in range(0, total + 1):
            na = total - nb
            if math.gcd(na, nb) != 1:
                continue
            if na == 0:
                cands = [(2,)]
            elif nb == 0:
                cands = [(1,)]
            else:
                base = christoffel_word(nb, na)
                flip = tuple(x if x == 1 else -2 for x in base)
                cands = [base, flip]
            for wd in cands:
                canon = _class_canonical_free(wd)
                if canon not in seen:
                    seen.add(canon)
                    out.append(PrimitiveClass(len(canon), canon,
                                              W.orientation_class(p, canon), 0))
    return sorted(out)


def f2_primitives_bruteforce(max_len: int) -> list[PrimitiveClass]:
    """Whitehead-oracle enumeration: every cyclically reduced class up to
    max_len tested by reduction (the acceptance oracle for f2_primitives)."""
    p = W.free_group(2)
    seen = set()
    out = []
    letters = (1, -1, 2, -2)

    def rec(word: list[int], length: int):
        if word:
            if word[0] != -word[-1] or len(word) == 1:
                canon = _class_canonical_free(tuple(word))
                if canon not in seen and len(canon) == len(word):
                    seen.add(canon)
                    if whitehead_is_primitive(canon):
                        out.append(PrimitiveClass(
                            len(canon), canon, W.orientation_class(p, canon), 0))
        if len(word) == length:
            return
        for x in letters:
            if word and word[-1] == -x:
                continue
            word.append(x)
            rec(word, length)
            word.pop()

    for n in range(1, max_len + 1):
        rec([], n)
    return sorted(out)


# ---------------------------------------------------------------------------
# enumeration

def _code_class_canonical(w: tuple[int, ...]) -> tuple[int, ...]:
    """Rotation+inversion minimum of a cyclic word in letter-code space."""
    best = None
    inv = tuple((c ^ 1) for c in reversed(w))
    for word in (w, inv):
        for k in range(len(word)):
            rot = word[k:] + word[:k]
            if best is None or rot < best:
                best = rot
    return best


def _candidate_classes(p: W.Presentation, max_len: int, budget: int):
    """Cyclically reduced words up to rotation+inversion, emitted in letter
    codes by length (a word is emitted iff it is the class minimum)."""
    ncodes = 2 * p.rank
    count = 0
    for n in range(1, max_len + 1):
        for first in range(ncodes):
            stack = [first]

            def rec():
                nonlocal count
                if len(stack) == n:
                    if n > 1 and stack[-1] == (stack[0] ^ 1):
                        return
                    wd = tuple(stack)
                    if _code_class_canonical(wd) == wd:
                        count += 1
                        if count > budget:
                            raise DomainError("budget exceeded")
                        yield wd
                    return
                last = stack[-1]
                # rotation-min words never contain a letter below their first
                for c in range(first, ncodes):
                    if c == (last ^ 1):
                        continue
                    stack.append(c)
                    yield from rec()
                    stack.pop()

            yield from rec()


def _scalar_matrix(word: W.Word, gens: list[tuple[complex, complex, complex, complex]]):
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for x in word:
        if x > 0:
            e, f, g, h = gens[x - 1]
        else:
            ge = gens[-x - 1]
            e, f, g, h = ge[3], -ge[1], -ge[2], ge[0]
        a, b, c, d = a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h
    return a, b, c, d


def _batch_simple_filter(cands: list[W.Word], ref: ReferenceStructure, depth: int,
                         settings: NumericSettings,
                         chunk: int = 2048) -> list[W.Word]:
    """Reject candidates with a crossing conjugate within the given depth;
    vectorized over candidates x conjugators.  Words with an axis endpoint at
    infinity or a degenerate image fall back to the scalar path."""
    if not cands:
        return []
    rep = ref.representation
    gens = [(m.a, m.b, m.c, m.d) for m in rep.matrices]
    layers = ref.conjugator_layers(depth)
    tol = settings.axis_match_tol
    out: list[W.Word] = []
    for lo in range(0, len(cands), chunk):
        block = cands[lo:lo + chunk]
        quad = np.array([_scalar_matrix(w, gens) for w in block], dtype=complex)
        a, b = quad[:, 0], quad[:, 1]
        c, d = quad[:, 2], quad[:, 3]
        tr2 = (a + d) ** 2
        scale = np.abs(quad).max(axis=1)
        bad = (np.abs(tr2 - 4.0) < settings.class_tol)
        bad |= (np.abs(tr2.imag) < settings.class_tol) & \
               (tr2.real > -settings.class_tol) & (tr2.real < 4.0)
        if np.any(bad):
            raise DomainError("axis oracle unusable: element not loxodromic")
        finite = np.abs(c) > 1e-13 * scale
        disc = np.sqrt((d - a) ** 2 + 4.0 * b * c)
        denom = np.where(finite, 2.0 * c, 1.0)
        p1 = ((a - d) + disc) / denom
        p2 = ((a - d) - disc) / denom
        alive = np.ones(len(block), dtype=bool)
        slow = ~finite
        for layer in layers:
            if len(layer) == 0 or not np.any(alive & ~slow):
                continue
            idx = np.nonzero(alive & ~slow)[0]
            la, lb = layer[:, 0, 0], layer[:, 0, 1]
            lc, ld = layer[:, 1, 0], layer[:, 1, 1]
            lscale = np.max(np.abs(layer), axis=(1, 2))
            u1, v1 = p1[idx, None], p2[idx, None]
            den1 = lc[None, :] * u1 + ld[None, :]
            den2 = lc[None, :] * v1 + ld[None, :]
            inf_mask = (np.abs(den1) < 1e-13 * lscale[None, :]) | \
                       (np.abs(den2) < 1e-13 * lscale[None, :])
            q1 = (la[None, :] * u1 + lb[None, :]) / np.where(inf_mask, 1.0, den1)
            q2 = (la[None, :] * v1 + lb[None, :]) / np.where(inf_mask, 1.0, den2)
            s11 = np.abs(q1 - u1) < tol
            s12 = np.abs(q1 - v1) < tol
            s21 = np.abs(q2 - u1) < tol
            s22 = np.abs(q2 - v1) < tol
            same = (s11 & s22) | (s12 & s21)
            sign = ((u1 - q1) * (v1 - q2) * (u1 - q2) * (v1 - q1)).real
            crossing = (~same) & (sign < 0.0) & ~inf_mask
            slow_rows = np.any(inf_mask, axis=1)
            slow[idx[slow_rows]] = True
            alive[idx[np.any(crossing & ~inf_mask, axis=1)]] = False
        for k, w in enumerate(block):
            if slow[k]:
                if _surface_simple_depth(w, ref, depth, settings):
                    out.append(w)
            elif alive[k]:
                out.append(w)
    return out


def enumerate_primitives(p: W.Presentation, ref: ReferenceStructure,
                         max_len: int, depth: int,
                         budget: int = PRIMS_BUDGET,
                         settings: NumericSettings = DEFAULT_SETTINGS) -> list[PrimitiveClass]:
    """All primitive classes of cyclic length <= max_len, deduplicated under
    conjugacy and inversion, each tagged with its orientation class."""
    if p.kind == W.FREE:
        if p.rank != 2:
            raise DomainError("free-group enumeration is rank 2 only")
        return [c for c in f2_primitives(max_len)]
    rs = W.rewrite_system(p)
    ref.conjugator_layers(depth)  # force the cache before the scan loop
    seen: set[bytes] = set()
    cands: list[W.Word] = []
    for code_wd in _candidate_classes(p, max_len, budget):
        b = bytes(code_wd)
        conj_canon = rs.conjugacy_canonical(b)
        if len(conj_canon) < len(b):
            continue  # class already covered at a shorter length
        key = min(conj_canon, rs.conjugacy_canonical(W.invert_bytes(conj_canon)))
        if key in seen:
            continue
        seen.add(key)
        word = W.unpack(key)
        if not is_proper_power(word):
            cands.append(word)
    # staged conjugator depth: shallow crossings reject most candidates
    survivors = _batch_simple_filter(cands, ref, min(2, depth), settings)
    if depth > 2:
        survivors = _batch_simple_filter(survivors, ref, min(4, depth), settings)
    out: list[PrimitiveClass] = []
    for word in survivors:
        if depth > 4 and not _surface_simple_depth(word, ref, depth, settings):
            continue
        out.append(PrimitiveClass(len(word), word,
                                  W.orientation_class(p, word), depth))
    return sorted(out)
