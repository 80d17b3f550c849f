"""Group presentations, reduced words, and a desk-scale geodesic oracle.

Words are tuples of signed 1-based generator indices (2 = second generator,
-2 = its inverse).  Internally the rewriting engine packs letters into bytes
with code 2*(index-1) + (0 for a positive letter, 1 for an inverse), so that
plain byte order realizes the pinned shortlex order: generator index
ascending, positive letter before inverse.

Equality in surface groups is decided by Dehn-style rewriting: any subword
that is strictly more than half of a cyclic rotation of a relator (or its
inverse) is replaced by the shorter complement; length-preserving half-relator
swaps connect the geodesic representatives of an element, and the canonical
form is the shortlex minimum of that closure.  A Cayley ball build verifies
the table against a faithful reference representation (matrix fingerprints)
and aborts on any disagreement.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .errors import DomainError

Word = tuple[int, ...]

FREE = "free"
NONORIENTABLE = "nonorientable"
ORIENTABLE = "orientable"


# ---------------------------------------------------------------------------
# letters

def letter_code(letter: int) -> int:
    return 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)


def code_letter(code: int) -> int:
    idx = code // 2 + 1
    return idx if code % 2 == 0 else -idx


def pack(word: Word) -> bytes:
    return bytes(letter_code(x) for x in word)


def unpack(b: bytes) -> Word:
    return tuple(code_letter(c) for c in b)


def invert_bytes(b: bytes) -> bytes:
    return bytes(c ^ 1 for c in reversed(b))


def free_reduce_bytes(b: bytes) -> bytes:
    out = bytearray()
    for c in b:
        if out and out[-1] == c ^ 1:
            out.pop()
        else:
            out.append(c)
    return bytes(out)


# ---------------------------------------------------------------------------
# presentations

@dataclass(frozen=True)
class Presentation:
    """Presentation of a free or closed-surface group.

    orientation_char maps each generator to +-1; it is -1 on every generator
    of a nonorientable surface group and +1 otherwise, and kills relators.
    """

    kind: str
    gen_names: tuple[str, ...]
    relators: tuple[Word, ...]
    orientation_char: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.gen_names)

    def __post_init__(self):
        for r in self.relators:
            core, conj = cyclic_reduce(free_reduce(r))
            if conj or core != r:
                raise DomainError("relators must be cyclically reduced")
            if orientation_class(self, r) != 1:
                raise DomainError("orientation character must kill relators")

    def name(self) -> str:
        if self.kind == FREE:
            return "free%d" % self.rank
        if self.kind == NONORIENTABLE:
            return "nonorientable%d" % self.rank
        return "orientable%d" % (self.rank // 2)


def free_group(rank: int) -> Presentation:
    if rank < 1 or rank > 12:
        raise DomainError("free rank out of range")
    names = tuple(string.ascii_lowercase[:rank])
    return Presentation(FREE, names, (), (1,) * rank)


def nonorientable_surface(genus: int) -> Presentation:
    """<a_1 ... a_k | a_1^2 ... a_k^2>, hyperbolic for genus k >= 3."""
    if genus < 3 or genus > 12:
        raise DomainError("nonorientable genus must be >= 3 (hyperbolic)")
    names = tuple(string.ascii_lowercase[:genus])
    relator = tuple(x for i in range(1, genus + 1) for x in (i, i))
    return Presentation(NONORIENTABLE, names, (relator,), (-1,) * genus)


def orientable_surface(genus: int) -> Presentation:
    """Standard commutator-product presentation, hyperbolic for genus >= 2."""
    if genus < 2 or genus > 6:
        raise DomainError("orientable genus must be >= 2 (hyperbolic)")
    names = tuple(string.ascii_lowercase[:2 * genus])
    relator = []
    for i in range(genus):
        a, b = 2 * i + 1, 2 * i + 2
        relator += [a, b, -a, -b]
    return Presentation(ORIENTABLE, names, (tuple(relator),), (1,) * (2 * genus))


def presentation_by_name(name: str) -> Presentation:
    for kind, builder in ((FREE, free_group), (NONORIENTABLE, nonorientable_surface),
                          (ORIENTABLE, orientable_surface)):
        if name.startswith(kind):
            try:
                return builder(int(name[len(kind):]))
            except ValueError:
                break
    raise DomainError("unknown presentation name: %s" % name)


# ---------------------------------------------------------------------------
# word utilities

def free_reduce(w: Word) -> Word:
    """Freely reduced word equal to w in the free group."""
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """(core, conjugator) with w = conjugator * core * conjugator^-1 freely."""
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j], w[:i]


def orientation_class(p: Presentation, w: Word) -> int:
    """Product of the orientation character over the letters; a homomorphism."""
    s = 1
    for x in w:
        s *= p.orientation_char[abs(x) - 1]
    return s


def word_to_str(w: Word, p: Presentation) -> str:
    """Compact display: inverse letters are uppercase (aB = a b^-1)."""
    if not w:
        return "1"
    out = []
    for x in w:
        name = p.gen_names[abs(x) - 1]
        out.append(name if x > 0 else name.upper())
    return "".join(out)


def parse_word(s: str, p: Presentation) -> Word:
    """Parse `a B c` / `aBc` / `a b^-1 c` into a word (freely reduced)."""
    lookup = {name: i + 1 for i, name in enumerate(p.gen_names)}
    tokens = []
    for chunk in s.replace(";", " ").split():
        i = 0
        while i < len(chunk):
            ch = chunk[i]
            if chunk[i:i + 1].lower() not in lookup:
                raise DomainError("unknown generator in word: %r" % chunk[i:])
            idx = lookup[ch.lower()]
            sign = 1 if ch.islower() else -1
            i += 1
            if chunk[i:i + 3] == "^-1":
                sign = -sign
                i += 3
            tokens.append(sign * idx)
    if s.strip() in ("1", ""):
        return ()
    return free_reduce(tuple(tokens))


# ---------------------------------------------------------------------------
# rewriting engine

class RewriteSystem:
    """Dehn rewriting rules of a presentation, packed for byte words."""

    def __init__(self, p: Presentation):
        self.presentation = p
        self.strict: dict[bytes, bytes] = {}
        self.half: dict[bytes, bytes] = {}
        self.strict_lengths: tuple[int, ...] = ()
        self.half_length = 0
        for rel in p.relators:
            r = pack(rel)
            n = len(r)
            rotations = set()
            for word in (r, invert_bytes(r)):
                for k in range(n):
                    rotations.add(word[k:] + word[:k])
            for rot in rotations:
                for k in range(n // 2 + 1, n + 1):
                    u, v = rot[:k], invert_bytes(rot[k:])
                    if u in self.strict and self.strict[u] != v:
                        raise DomainError("ambiguous rewriting rule")
                    self.strict[u] = v
                if n % 2 == 0:
                    k = n // 2
                    u, v = rot[:k], invert_bytes(rot[k:])
                    if u in self.half and self.half[u] != v:
                        raise DomainError("ambiguous half rule")
                    self.half[u] = v
        self.strict_lengths = tuple(sorted({len(k) for k in self.strict}, reverse=True))
        self.half_length = len(next(iter(self.half))) if self.half else 0

    def _find_strict(self, w: bytes) -> bytes | None:
        """One strict replacement (with free reduction), or None."""
        for L in self.strict_lengths:
            if L > len(w):
                continue
            for i in range(len(w) - L + 1):
                rep = self.strict.get(w[i:i + L])
                if rep is not None:
                    return free_reduce_bytes(w[:i] + rep + w[i + L:])
        return None

    def _greedy_shrink(self, w: bytes) -> bytes:
        while True:
            w2 = self._find_strict(w)
            if w2 is None:
                return w
            w = w2

    def canonicalize(self, w: bytes) -> bytes:
        """Shortlex-minimal word in the rewriting closure of w (the canonical
        geodesic representative at desk scale)."""
        w = free_reduce_bytes(w)
        if not self.half and not self.strict:
            return w
        hl = self.half_length
        while True:
            w = self._greedy_shrink(w)
            best = w
            seen = {w}
            queue = [w]
            shorter = None
            while queue and shorter is None:
                u = queue.pop()
                for i in range(len(u) - hl + 1):
                    rep = self.half.get(u[i:i + hl])
                    if rep is None:
                        continue
                    v = free_reduce_bytes(u[:i] + rep + u[i + hl:])
                    if len(v) < len(u):
                        shorter = v
                        break
                    sv = self._find_strict(v)
                    if sv is not None:
                        shorter = sv
                        break
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
                        if (len(v), v) < (len(best), best):
                            best = v
            if shorter is None:
                return best
            w = shorter

    def tail_is_quiet(self, w: bytes) -> bool:
        """True when no rule can touch the suffix of w; then an extension of a
        canonical word by one letter is itself canonical."""
        hl = self.half_length
        lmax = self.strict_lengths[0] if self.strict_lengths else 0
        # region whose alteration could interact with the last letter
        start = max(0, len(w) - (hl + lmax))
        for L in self.strict_lengths:
            for i in range(max(0, len(w) - L), len(w) - L + 1):
                if i >= 0 and w[i:i + L] in self.strict:
                    return False
        if hl:
            for i in range(start, len(w) - hl + 1):
                if w[i:i + hl] in self.half:
                    return False
        return True

    # -- conjugacy ---------------------------------------------------------

    def _cyclic_core(self, w: bytes) -> bytes:
        w = free_reduce_bytes(w)
        i, j = 0, len(w)
        while j - i >= 2 and w[i] == w[j - 1] ^ 1:
            i += 1
            j -= 1
        return w[i:j]

    @staticmethod
    def _rotation_min(u: bytes) -> bytes:
        return min(u[k:] + u[:k] for k in range(len(u))) if u else u

    def _cyclic_core_full(self, w: bytes) -> bytes:
        return self._cyclic_core(free_reduce_bytes(w))

    def conjugacy_canonical(self, w: bytes) -> bytes:
        """Shortlex-minimal rotation representative of the conjugacy class,
        via cyclic Dehn rewriting (rotations + cyclic half swaps + strict
        reductions on the cyclic word).  Exact for free groups; for surface
        kinds it is the implemented surrogate (cross-checked against the
        fingerprint oracle)."""
        w = self._cyclic_core_full(w)
        if not self.strict:
            return self._rotation_min(w)
        lmax = self.strict_lengths[0]
        while True:
            w = self._cyclic_core(self.canonicalize(w))
            if len(w) <= lmax:
                return self._short_conjugacy_canonical(w)
            shorter = self._cyclic_closure(w)
            if isinstance(shorter, bytes):
                w = shorter
                continue
            return shorter[0]

    def _cyclic_closure(self, w: bytes):
        """Half-swap closure on the cyclic word (period > rule length, so no
        wrapped self-overlaps).  Returns shorter bytes to restart, or a
        1-tuple with the minimal representative."""
        hl = self.half_length
        start = self._rotation_min(w)
        best = start
        seen = {start}
        queue = [start]
        while queue:
            u = queue.pop()
            m = len(u)
            dd = u + u
            # strict matches on the cyclic word
            for L in self.strict_lengths:
                if L > m:
                    continue
                for i in range(m):
                    rep = self.strict.get(dd[i:i + L])
                    if rep is not None:
                        return self._cyclic_core_full(rep + dd[i + L:i + m])
            if hl and hl <= m:
                for i in range(m):
                    rep = self.half.get(dd[i:i + hl])
                    if rep is None:
                        continue
                    v = self._cyclic_core_full(rep + dd[i + hl:i + m])
                    if len(v) < m:
                        return v
                    v = self._rotation_min(v)
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
                        if v < best:
                            best = v
        return (best,)

    def _short_conjugacy_canonical(self, w: bytes) -> bytes:
        """Closure with explicit letter conjugations for words no longer than
        a relator, where cyclic matches could wrap around the period."""
        letters = range(2 * self.presentation.rank)
        w = self.canonicalize(self._cyclic_core(w))
        while True:
            best = self._rotation_min(w)
            seen = {best}
            queue = [best]
            shorter = None
            while queue and shorter is None:
                u = queue.pop()
                neighbors = [u[k:] + u[:k] for k in range(1, len(u))]
                for s in letters:
                    neighbors.append(bytes([s ^ 1]) + u + bytes([s]))
                for v in neighbors:
                    v = self.canonicalize(self._cyclic_core_full(v))
                    if len(v) < len(u):
                        shorter = v
                        break
                    if len(v) == len(u):
                        v = self._rotation_min(v)
                        if v not in seen:
                            seen.add(v)
                            queue.append(v)
                            if v < best:
                                best = v
            if shorter is None:
                return best
            w = shorter


_REWRITE_CACHE: dict[Presentation, RewriteSystem] = {}


def rewrite_system(p: Presentation) -> RewriteSystem:
    rs = _REWRITE_CACHE.get(p)
    if rs is None:
        rs = _REWRITE_CACHE[p] = RewriteSystem(p)
    return rs


# ---------------------------------------------------------------------------
# Cayley ball

@dataclass
class CayleyBall:
    """Ball of radius R about the identity in the Cayley graph.

    `canonical` lists the shortlex-minimal geodesic word of every element
    (BFS order, identity first); `index` maps those words back to positions.
    Queries fall back to the exact rewriting engine beyond the table radius,
    up to `query_cap` letters.
    """

    presentation: Presentation
    radius: int
    canonical: list[bytes] = field(repr=False)
    index: dict[bytes, int] = field(repr=False)
    layer_sizes: list[int]
    rewrites: RewriteSystem = field(repr=False)
    fingerprint_margin: float = 0.0

    @property
    def query_cap(self) -> int:
        return self.radius * defaults.QUERY_LENGTH_FACTOR

    def size(self) -> int:
        return len(self.canonical)

    def canonical_bytes(self, w: Word | bytes) -> bytes:
        b = w if isinstance(w, bytes) else pack(free_reduce(w))
        c = self.rewrites.canonicalize(b)
        if len(c) > self.query_cap:
            raise DomainError("outside ball")
        return c

    def canonical_word(self, w: Word) -> Word:
        return unpack(self.canonical_bytes(w))

    def elements_of_length(self, length: int) -> list[bytes]:
        if length > self.radius:
            raise DomainError("outside ball")
        start = sum(self.layer_sizes[:length])
        return self.canonical[start:start + self.layer_sizes[length]]


def _reference_matrices(p: Presentation) -> list[np.ndarray]:
    """Faithful reference representation used as the equality oracle
    (anchor NEC / Fuchsian / Schottky matrices per generator)."""
    from . import charlab

    rep = charlab.reference_representation(p)
    return [np.array([[m.a, m.b], [m.c, m.d]], dtype=complex) for m in rep.matrices]


def build_ball(p: Presentation, radius: int,
               budget: int = defaults.BALL_BUDGET, verify: bool = True) -> CayleyBall:
    """BFS construction of the radius-R ball with canonical geodesic words.

    Surface kinds are verified against the reference representation: two
    distinct canonical forms whose matrix fingerprints come closer than
    1e3 x the accumulated float residual abort the build.
    """
    if radius > defaults.BALL_RADIUS_CAP:
        raise DomainError("radius cap exceeded")
    rs = rewrite_system(p)
    canonical: list[bytes] = [b""]
    index: dict[bytes, int] = {b"": 0}
    layer_sizes = [1]
    letters = list(range(2 * p.rank))
    frontier = [b""]
    for _ in range(radius):
        new: list[bytes] = []
        for w in frontier:
            last = w[-1] if w else -1
            for s in letters:
                if w and (s ^ 1) == last:
                    continue
                cand = w + bytes([s])
                if rs.strict and not rs.tail_is_quiet(cand):
                    cand = rs.canonicalize(cand)
                if len(cand) <= len(w):
                    if cand not in index:
                        raise DomainError("ball inconsistent")
                    continue
                if cand not in index:
                    index[cand] = len(canonical)
                    canonical.append(cand)
                    new.append(cand)
                    if len(canonical) > budget:
                        raise DomainError("ball budget exceeded")
        layer_sizes.append(len(new))
        frontier = new
    ball = CayleyBall(p, radius, canonical, index, layer_sizes, rs)
    if verify:
        try:
            ball.fingerprint_margin = _verify_ball(ball)
        except DomainError as exc:
            if "no reference representation" not in str(exc):
                raise
            # kinds without a shipped faithful reference (orientable) rely on
            # the rewriting side alone; margin 0 records the skipped pass
            ball.fingerprint_margin = 0.0
    return ball


def ball_matrices(ball: CayleyBall, gens: list[np.ndarray] | None = None) -> np.ndarray:
    """(N, 2, 2) complex array of reference matrices, one per ball element,
    computed along canonical words (which are prefix-closed)."""
    p = ball.presentation
    if gens is None:
        gens = _reference_matrices(p)
    gen_arr = np.empty((2 * p.rank, 2, 2), dtype=complex)
    for i, g in enumerate(gens):
        gen_arr[2 * i] = g
        gen_arr[2 * i + 1] = np.linalg.inv(g)
    mats = np.empty((ball.size(), 2, 2), dtype=complex)
    mats[0] = np.eye(2)
    for i, w in enumerate(ball.canonical):
        if i == 0:
            continue
        parent = ball.index.get(w[:-1])
        if parent is None:
            raise DomainError("ball inconsistent")  # canonical words not prefix-closed
        mats[i] = mats[parent] @ gen_arr[w[-1]]
    return mats


def _verify_ball(ball: CayleyBall) -> float:
    """Fingerprint verification pass; returns the worst separation margin
    (distance / threshold) over the scanned close pairs."""
    mats = ball_matrices(ball)
    n = ball.size()
    flat = mats.reshape(n, 4)
    vecs = np.concatenate([flat.real, flat.imag], axis=1)
    norms = np.maximum(np.abs(vecs).max(axis=1), 1.0)
    # accumulated per-element residual: word length * eps * matrix scale
    eps_unit = ball.radius * np.finfo(float).eps * 8.0
    window = 1e3 * eps_unit * float(norms.max())
    # compare both sign lifts of every fingerprint
    both = np.concatenate([vecs, -vecs], axis=0)
    owner = np.concatenate([np.arange(n), np.arange(n)])
    rng = np.random.default_rng(20240517)
    proj = rng.standard_normal(8)
    proj /= np.linalg.norm(proj)
    keys = both @ proj
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    margin = np.inf
    for i in range(len(sk)):
        j = i + 1
        while j < len(sk) and sk[j] - sk[i] <= window:
            a, b = order[i], order[j]
            if owner[a] != owner[b]:
                dist = float(np.max(np.abs(both[a] - both[b])))
                pair_threshold = 1e3 * eps_unit * float(
                    max(norms[owner[a]], norms[owner[b]]))
                if dist <= pair_threshold:
                    raise DomainError("ball inconsistent")
                margin = min(margin, dist / pair_threshold)
            j += 1
    return float(margin)


def geodesic_length(ball: CayleyBall, w: Word) -> int:
    """Length of the shortlex canonical geodesic word."""
    return len(ball.canonical_bytes(w))


def cayley_translation_length(ball: CayleyBall, w: Word) -> int:
    """Minimal geodesic length over the conjugacy class surrogate (rotation,
    letter-conjugation and rewriting closure of the cyclic core); exact for
    free groups."""
    b = pack(free_reduce(w))
    if len(b) > ball.query_cap:
        raise DomainError("outside ball")
    return len(ball.rewrites.conjugacy_canonical(b))


@dataclass(frozen=True)
class GeodesicPath:
    """Periodic bi-infinite vertex path of a quasi-axis.

    base is the geodesic period word; vertex m is base^(m // p) * prefix of
    length (m % p), so consecutive vertices differ by one generator and the
    arclength parameter is the vertex index.
    """

    base: Word
    windows: int

    @property
    def period(self) -> int:
        return len(self.base)

    @property
    def span(self) -> tuple[int, int]:
        n = self.windows * self.period
        return (-n, n)

    def vertex_word(self, m: int) -> Word:
        p = self.period
        q, r = divmod(m, p)
        prefix = self.base[:r]
        if q == 0:
            return prefix
        block = self.base if q > 0 else invert_word(self.base)
        return free_reduce(block * abs(q) + prefix)


def quasi_axis(ball: CayleyBall, w: Word, windows: int) -> GeodesicPath:
    """Periodic geodesic path through the identity for the cyclic core of w:
    the shortlex geodesic word of the shortlex-minimal rotation of the core,
    repeated `windows` times on each side."""
    rs = ball.rewrites
    core = rs.canonicalize(ball.canonical_bytes(w))
    core = rs._cyclic_core(core)
    if not core:
        raise DomainError("identity has no axis")
    while True:
        rotations = [core[k:] + core[:k] for k in range(len(core))]
        cands = sorted(rs.canonicalize(r) for r in rotations)
        best = min(cands, key=lambda c: (len(c), c))
        if len(best) < len(core):
            core = rs._cyclic_core(best)
            continue
        return GeodesicPath(unpack(best), windows)


# ---------------------------------------------------------------------------
# automorphisms

@dataclass(frozen=True)
class Automorphism:
    """Automorphism given by generator images, shipped with its inverse."""

    presentation: Presentation
    name: str
    images: tuple[Word, ...]
    inverse_images: tuple[Word, ...]

    def image_of(self, letter: int) -> Word:
        w = self.images[abs(letter) - 1]
        return w if letter > 0 else invert_word(w)

    def inverse(self) -> "Automorphism":
        return Automorphism(self.presentation, self.name + "^-1",
                            self.inverse_images, self.images)


def apply_automorphism(f: Automorphism, w: Word) -> Word:
    """Generator-wise substitution followed by free reduction."""
    out: list[int] = []
    for x in w:
        for y in f.image_of(x):
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def apply_inverse_automorphism(f: Automorphism, w: Word) -> Word:
    return apply_automorphism(f.inverse(), w)


def compose(f: Automorphism, g: Automorphism, name: str | None = None) -> Automorphism:
    """f after g (apply g first)."""
    if f.presentation != g.presentation:
        raise DomainError("automorphisms of different presentations")
    images = tuple(apply_automorphism(f, w) for w in g.images)
    inv = tuple(apply_automorphism(g.inverse(), w) for w in f.inverse_images)
    return Automorphism(f.presentation, name or (f.name + "*" + g.name), images, inv)


def identity_automorphism(p: Presentation) -> Automorphism:
    gens = tuple((i,) for i in range(1, p.rank + 1))
    return Automorphism(p, "id", gens, gens)


def automorphism_power(f: Automorphism, n: int) -> Automorphism:
    if n == 0:
        return identity_automorphism(f.presentation)
    if n < 0:
        return automorphism_power(f.inverse(), -n)
    r = f
    for _ in range(n - 1):
        r = compose(f, r)
    return Automorphism(f.presentation, "%s^%d" % (f.name, n), r.images,
                        r.inverse_images)


def validate_automorphism(f: Automorphism) -> None:
    """Check f o f^-1 fixes the generators and relators map to conjugates of
    relators (or inverses); raises DomainError otherwise."""
    p = f.presentation
    rs = rewrite_system(p)
    for i in range(1, p.rank + 1):
        w = apply_automorphism(f, apply_automorphism(f.inverse(), (i,)))
        if rs.canonicalize(pack(w)) != pack((i,)):
            raise DomainError("automorphism %s: inverse check failed" % f.name)
    for rel in p.relators:
        img = rs.conjugacy_canonical(pack(apply_automorphism(f, rel)))
        ok = False
        for target in (rel, invert_word(rel)):
            if img == rs.conjugacy_canonical(pack(target)):
                ok = True
        if not ok:
            raise DomainError("automorphism %s: relator not preserved" % f.name)
