"""Representation families over character-variety slices and the outer
automorphism action.

NecGenus3 realizes <a,b,c | a^2 b^2 c^2> by glide-type isometries: a glides
along the geodesic (-1, 1) and b along (kappa-1, kappa+1) with translation
lengths t1, t2 (a glide extends to a pi-rotation loxodromic of H^3, built
from a real determinant -1 matrix divided by i, so tr^2 is real negative).
The relator is closed exactly by c = sqrt(h), h = (a^2 b^2)^{-1}, using the
closed form sqrt(h) = (h + I)/sqrt(tr h + 2): Cayley-Hamilton gives c^2 = h
identically, so the relator holds to float error by construction.  The
principal square root makes c glide-type when tr h < -2 (the Fuchsian range,
where a^2, b^2, (a^2 b^2)^{-1} are the boundary of a Fricke pants group and
the three folds close a hyperbolic nonorientable surface) and hyperbolic when
tr h > 2; |tr h| <= 2 is rejected and tr h = -2 is the branch point.  Sign
flips of the root across the cut are invisible in PSL(2, C).

TraceTripleF2 reconstructs a two-generator group from (tr a, tr b, tr ab)
in the normal form a = [[x, -1], [1, 0]], b = [[0, z], [-1/z, y]] with
z + 1/z = tr ab.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, replace

from . import words as W
from .defaults import DEFAULT_SETTINGS, NumericSettings
from .errors import DomainError
from .hyp import HYPERBOLIC, LOXODROMIC, Isometry, classify


@dataclass(frozen=True)
class Representation:
    """One isometry per generator, with the recorded relator residual
    (max over relators of the sup-norm distance of the image from +-I)."""

    presentation: W.Presentation
    matrices: tuple[Isometry, ...]
    residual: float
    provenance: str

    def evaluate(self, w: W.Word) -> Isometry:
        m = Isometry.identity()
        for x in w:
            g = self.matrices[abs(x) - 1]
            m = m * (g if x > 0 else g.inverse())
        return m

    def conjugated(self, g: Isometry) -> "Representation":
        mats = tuple(g * m * g.inverse() for m in self.matrices)
        return replace(self, matrices=mats, provenance=self.provenance + " (conjugated)")


def make_representation(p: W.Presentation, matrices: tuple[Isometry, ...],
                        provenance: str) -> Representation:
    residual = 0.0
    rep = Representation(p, matrices, 0.0, provenance)
    for rel in p.relators:
        residual = max(residual, rep.evaluate(rel).dist_to_identity())
    return replace(rep, residual=residual)


# ---------------------------------------------------------------------------
# families

def _mobius_to(p: complex, q: complex) -> Isometry:
    """Isometry sending the geodesic (0, oo) to (p, q)."""
    return Isometry.from_entries(q, p, 1.0, 1.0)


def glide(p: complex, q: complex, t: float | complex) -> Isometry:
    """pi-rotation loxodromic translating by t along the geodesic (p, q):
    the extension of a glide reflection when p, q, t are real."""
    s = _mobius_to(p, q)
    lam = cmath.exp(t / 2.0)
    d = Isometry(1j * lam, 0j, 0j, -1j / lam)
    return s * d * s.inverse()


def _denman_beavers(h: Isometry) -> Isometry:
    """Stable square-root iteration (principal branch; eigenvalues of h must
    avoid the negative real axis)."""
    ya, yb, yc, yd = h.a, h.b, h.c, h.d
    za, zb, zc, zd = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for _ in range(80):
        dz = za * zd - zb * zc
        dy = ya * yd - yb * yc
        na = 0.5 * (ya + zd / dz)
        nb = 0.5 * (yb - zb / dz)
        nc = 0.5 * (yc - zc / dz)
        nd = 0.5 * (yd + za / dz)
        ma = 0.5 * (za + yd / dy)
        mb = 0.5 * (zb - yb / dy)
        mc = 0.5 * (zc - yc / dy)
        md = 0.5 * (zd + ya / dy)
        drift = max(abs(na - ya), abs(nb - yb), abs(nc - yc), abs(nd - yd))
        ya, yb, yc, yd = na, nb, nc, nd
        za, zb, zc, zd = ma, mb, mc, md
        if drift <= 1e-15 * max(1.0, abs(ya), abs(yd)):
            break
    return Isometry.from_entries(ya, yb, yc, yd)


def sqrt_isometry(h: Isometry) -> Isometry:
    """Matrix square root on the branch of (h + I)/sqrt(tr h + 2) (principal
    square root; glide-type for tr h < -2 via c = i sqrt(-h), which is the
    same projective element).

    The closed form loses eps * |h| / |tr h + 2| near the branch point, so
    the root is computed by the Denman-Beavers iteration instead.
    """
    tr = h.trace()
    if abs(tr + 2.0) < 1e-12:
        raise DomainError("square root undefined")
    if abs(tr + 2.0) >= 1.0:
        s = cmath.sqrt(tr + 2.0)
        return Isometry((h.a + 1.0) / s, h.b / s, h.c / s, (h.d + 1.0) / s)
    if (tr + 2.0).real < 0.0:
        m = _denman_beavers(Isometry(-h.a, -h.b, -h.c, -h.d))
        return Isometry(1j * m.a, 1j * m.b, 1j * m.c, 1j * m.d)
    return _denman_beavers(h)


def build_nec_genus3(t1: float, t2: float, kappa: complex,
                     settings: NumericSettings = DEFAULT_SETTINGS) -> Representation:
    """Glide family for the genus-3 nonorientable surface group.

    kappa is the midpoint of b's axis (kappa - 1, kappa + 1); real kappa in
    the Fuchsian range (tr(a^2 b^2) < -2, axes disjoint) gives the anchor.
    Rejects parameters where h = (a^2 b^2)^{-1} is elliptic/parabolic.
    """
    if not (t1 > 0 and t2 > 0):
        raise DomainError("glide lengths must be positive")
    p = W.nonorientable_surface(3)
    a = glide(-1.0, 1.0, t1)
    b = glide(kappa - 1.0, kappa + 1.0, t2)
    h = ((a * a) * (b * b)).inverse()
    tr = h.trace()
    tsq = tr * tr
    if abs(tsq.imag) < settings.class_tol and -settings.class_tol < tsq.real < 4.0:
        raise DomainError("h not loxodromic")
    if abs(tsq - 4.0) < settings.class_tol:
        raise DomainError("h not loxodromic")
    c = sqrt_isometry(h)
    return make_representation(
        p, (a, b, c),
        "nec3 t1=%.17g t2=%.17g kappa=%.17g%+.17gj"
        % (t1, t2, complex(kappa).real, complex(kappa).imag))


NEC3_ANCHOR = (3.0, 3.0, 3.0)


def build_trace_triple_f2(x: complex, y: complex, z: complex) -> Representation:
    """Two-generator representation with tr a = x, tr b = y, tr ab = z."""
    p = W.free_group(2)
    zeta = (z + cmath.sqrt(z * z - 4.0)) / 2.0
    if abs(zeta) < 1e-9:
        raise DomainError("degenerate trace triple")
    a = Isometry.from_entries(x, -1.0, 1.0, 0.0)
    b = Isometry.from_entries(0.0, zeta, -1.0 / zeta, y)
    return make_representation(
        p, (a, b),
        "f2 traces (%.17g%+.17gj, %.17g%+.17gj, %.17g%+.17gj)"
        % (complex(x).real, complex(x).imag, complex(y).real,
           complex(y).imag, complex(z).real, complex(z).imag))


def schottky_f2() -> Representation:
    """Discrete free reference for the rank-2 free group: two hyperbolics
    with well-separated axes."""
    p = W.free_group(2)
    s = _mobius_to(4.0, 8.0)
    lam = math.exp(1.5)
    a = Isometry(lam, 0j, 0j, 1.0 / lam)
    b = s * a * s.inverse()
    return make_representation(p, (a, b), "schottky f2")


def schottky_free(rank: int) -> Representation:
    """Schottky reference for a free group: hyperbolics along spread axes."""
    p = W.free_group(rank)
    lam = math.exp(1.5)
    d = Isometry(lam, 0j, 0j, 1.0 / lam)
    mats = []
    for i in range(rank):
        lo = 6.0 * i
        s = _mobius_to(lo, lo + 2.0) if i else Isometry.identity()
        mats.append(s * d * s.inverse())
    return make_representation(p, tuple(mats), "schottky free%d" % rank)


@dataclass(frozen=True)
class RepFamily:
    """A parametrized slice: kind "nec3" (grid parameter = complex kappa) or
    "f2" (grid parameter = complex tr ab; tr a, tr b fixed)."""

    kind: str
    t1: float = NEC3_ANCHOR[0]
    t2: float = NEC3_ANCHOR[1]
    tr_a: complex = 3.0
    tr_b: complex = 3.0
    # real path domain for 1-d root finding (not the scan window)
    window: tuple[float, float] = (1.0, 3.5)

    def build(self, param: complex) -> Representation:
        if self.kind == "nec3":
            return build_nec_genus3(self.t1, self.t2, param)
        if self.kind == "f2":
            return build_trace_triple_f2(self.tr_a, self.tr_b, param)
        raise DomainError("unknown family kind: %s" % self.kind)

    @property
    def presentation(self) -> W.Presentation:
        return W.nonorientable_surface(3) if self.kind == "nec3" else W.free_group(2)


def nec3_family(t1: float = NEC3_ANCHOR[0], t2: float = NEC3_ANCHOR[1]) -> RepFamily:
    return RepFamily("nec3", t1=t1, t2=t2)


def f2_family(tr_a: complex = 3.0, tr_b: complex = 3.0,
              window: tuple[float, float] = (-4.0, 12.0)) -> RepFamily:
    return RepFamily("f2", tr_a=tr_a, tr_b=tr_b, window=window)


def anchor_representation() -> Representation:
    """The Fuchsian NEC anchor (t1 = t2 = 3, kappa = 3)."""
    return build_nec_genus3(*NEC3_ANCHOR)


# Shallow Fuchsian reference (t1 = t2 = 1, kappa = 3): same construction as
# the anchor but with unit glide lengths, so conformal contraction along
# deep conjugators stays far above float resolution in the axis oracle and
# the ball fingerprints.
NEC3_REFERENCE = (1.0, 1.0, 3.0)


def reference_representation(p: W.Presentation) -> Representation:
    """Discrete faithful reference used as equality/geometry oracle."""
    if p.kind == W.FREE:
        return schottky_free(p.rank)
    if p.kind == W.NONORIENTABLE and p.rank == 3:
        return build_nec_genus3(*NEC3_REFERENCE)
    raise DomainError("no reference representation for %s" % p.name())


# ---------------------------------------------------------------------------
# the outer action and fingerprints

def act(f: W.Automorphism, rho: Representation) -> Representation:
    """[f] . [rho] = [rho o f^-1]: generator g maps to rho(f^-1(g))."""
    if f.presentation != rho.presentation:
        raise DomainError("automorphism/representation mismatch")
    mats = tuple(rho.evaluate(w) for w in f.inverse_images)
    return make_representation(rho.presentation, mats,
                               rho.provenance + " . " + f.name)


def trace_squared(rho: Representation, w: W.Word) -> complex:
    """(tr rho(w))^2; conjugacy-class invariant, sign-unambiguous."""
    return rho.evaluate(w).trace_squared()


_PROBE_CACHE: dict[W.Presentation, tuple[W.Word, ...]] = {}


def probe_words(p: W.Presentation) -> tuple[W.Word, ...]:
    """Fixed fingerprint word list: generators, ordered pair products, and a
    seeded 20-word probe set (deterministic per presentation)."""
    cached = _PROBE_CACHE.get(p)
    if cached is not None:
        return cached
    out: list[W.Word] = [(i,) for i in range(1, p.rank + 1)]
    out += [(i, j) for i in range(1, p.rank + 1)
            for j in range(1, p.rank + 1) if i != j]
    kind_id = {W.FREE: 1, W.NONORIENTABLE: 2, W.ORIENTABLE: 3}[p.kind]
    rng = random.Random(97 * p.rank + kind_id)
    n = 0
    while n < 20:
        length = rng.randint(3, 8)
        w = []
        for _ in range(length):
            x = rng.choice([s * i for i in range(1, p.rank + 1) for s in (1, -1)])
            if w and w[-1] == -x:
                continue
            w.append(x)
        word = W.free_reduce(tuple(w))
        if len(word) >= 3 and word not in out:
            out.append(word)
            n += 1
    result = tuple(out)
    _PROBE_CACHE[p] = result
    return result


def fingerprint(rho: Representation) -> tuple[complex, ...]:
    """tr^2 along the probe list; conjugation-invariant character proxy."""
    return tuple(trace_squared(rho, w) for w in probe_words(rho.presentation))


def conjugacy_distance(r1: Representation, r2: Representation) -> float:
    """L-infinity distance between trace fingerprints, each coordinate scaled
    by 1 + |tr^2| (absolute near the identity trace, relative for the huge
    traces of long probe words, where float noise is itself proportional)."""
    if r1.presentation != r2.presentation:
        raise DomainError("representations of different presentations")
    f1, f2 = fingerprint(r1), fingerprint(r2)
    return max(abs(u - v) / (1.0 + abs(u) + abs(v)) for u, v in zip(f1, f2))


def is_reducible(rho: Representation, tol: float = 1e-9) -> bool:
    """Commutator-trace test: tr[a, b] = 2 for every generator pair means a
    common fixed point (reducible); such characters are excluded from
    stabilizer claims."""
    n = rho.presentation.rank
    for i in range(n):
        for j in range(i + 1, n):
            gi, gj = rho.matrices[i], rho.matrices[j]
            comm = gi * gj * gi.inverse() * gj.inverse()
            if abs(comm.trace_squared() - 4.0) > tol:
                return False
    return True


def stabilizer_check(rho: Representation, f: W.Automorphism,
                     tol: float = DEFAULT_SETTINGS.fingerprint_tol) -> bool:
    """True iff [f] fixes the character of rho at fingerprint tolerance."""
    return conjugacy_distance(rho, act(f, rho)) < tol


# ---------------------------------------------------------------------------
# elliptic tuning

def find_elliptic_approx(fam: RepFamily, gamma: W.Word, n: int, k: int,
                         seed_param: float) -> float:
    """Parameter on the family's real path where tr^2(rho(gamma)) equals
    4 cos^2(k pi / n) to 1e-10 (bisection bracket nearest the seed, then
    secant polish)."""
    if math.gcd(k, n) != 1:
        raise DomainError("rotation numbers k, n must be coprime")
    if fam.kind == "nec3" and any(abs(x) == 3 for x in gamma):
        # the trace along the path is evaluated without closing the relator,
        # so the tuned word must avoid the derived generator c
        raise DomainError("tuning word must use generators a, b only")
    target_sq = 4.0 * math.cos(math.pi * k / n) ** 2

    def raw_trace(s: float) -> float:
        if fam.kind == "nec3":
            a = glide(-1.0, 1.0, fam.t1)
            b = glide(s - 1.0, s + 1.0, fam.t2)
            m = Isometry.identity()
            for x in gamma:
                gen = a if abs(x) == 1 else b
                m = m * (gen if x > 0 else gen.inverse())
            return m.trace().real
        return fam.build(s).evaluate(gamma).trace().real

    # root-find the signed trace against +-2cos(k pi / n): tr^2 - target is
    # tangent to zero at the tuning point, so it never changes sign
    lo, hi = fam.window
    samples = 256
    xs = [lo + (hi - lo) * i / (samples - 1) for i in range(samples)]
    traces = [raw_trace(x) for x in xs]
    brackets = []
    for sign in (1.0, -1.0):
        target = sign * 2.0 * math.cos(math.pi * k / n)
        ys = [t - target for t in traces]
        for i in range(samples - 1):
            if ys[i] == 0.0:
                brackets.append((xs[i], xs[i], target))
            elif (ys[i] < 0) != (ys[i + 1] < 0):
                brackets.append((xs[i], xs[i + 1], target))
    if not brackets:
        raise DomainError("no bracketing interval")
    a, b, target = min(brackets,
                       key=lambda br: abs(0.5 * (br[0] + br[1]) - seed_param))

    def g(s: float) -> float:
        return raw_trace(s) - target

    fa = g(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = g(m)
        if fm == 0.0 or (b - a) < 1e-14:
            a = b = m
            break
        if (fa < 0) != (fm < 0):
            b = m
        else:
            a, fa = m, fm
    s = 0.5 * (a + b)
    # secant polish
    s0, s1 = s - 1e-9, s
    f0, f1 = g(s0), g(s1)
    for _ in range(8):
        if f1 == f0:
            break
        s2 = s1 - f1 * (s1 - s0) / (f1 - f0)
        s0, f0, s1, f1 = s1, f1, s2, g(s2)
    s = s1
    if abs(raw_trace(s) ** 2 - target_sq) > 1e-10:
        raise DomainError("elliptic tuning did not converge")
    return s


# ---------------------------------------------------------------------------
# orbit sampling

@dataclass(frozen=True)
class OrbitReport:
    depth: int
    applied: int
    distinct_characters: int
    in_window: int
    window_bound: float


def orbit_sample(rho: Representation, gens: list[W.Automorphism], depth: int,
                 window_bound: float = 1e4,
                 tol: float = DEFAULT_SETTINGS.fingerprint_tol) -> OrbitReport:
    """Apply all automorphism words of length <= depth; count distinct
    characters and how many land in the compact fingerprint window."""
    if depth > 8:
        raise DomainError("orbit depth cap exceeded")
    letters: list[W.Automorphism] = []
    for f in gens:
        letters.append(f)
        letters.append(f.inverse())
    fingerprints: list[tuple[complex, ...]] = []

    def record(r: Representation) -> None:
        fp = fingerprint(r)
        for known in fingerprints:
            if max(abs(u - v) for u, v in zip(fp, known)) < tol:
                return
        fingerprints.append(fp)

    record(rho)
    applied = 0
    frontier = [(rho, None)]
    for _ in range(depth):
        new = []
        for rep, last in frontier:
            for idx, f in enumerate(letters):
                if last is not None and idx == (last ^ 1):
                    continue
                nxt = act(f, rep)
                applied += 1
                record(nxt)
                new.append((nxt, idx))
        frontier = new
    in_window = 0
    for fp in fingerprints:
        if max(abs(v) for v in fp) <= window_bound:
            in_window += 1
    return OrbitReport(depth, applied, len(fingerprints), in_window, window_bound)


# ---------------------------------------------------------------------------
# grid scans

@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def param(self, i: int, j: int) -> complex:
        re = self.re_min if self.nx == 1 else (
            self.re_min + (self.re_max - self.re_min) * i / (self.nx - 1))
        im = self.im_min if self.ny == 1 else (
            self.im_min + (self.im_max - self.im_min) * j / (self.ny - 1))
        return complex(re, im)


@dataclass(frozen=True)
class ScanRow:
    cell_i: int
    cell_j: int
    p_re: float
    p_im: float
    residual: float | None
    verdict: str
    min_gap: float | None
    stride: int | None
    witness: str
    n_parabolic: int
    r_emp: float | None
    R_emp: float | None


@dataclass(frozen=True)
class ScanResult:
    grid: GridSpec
    rows: tuple[ScanRow, ...]

    def verdict_grid(self) -> list[list[str]]:
        g = [["error"] * self.grid.nx for _ in range(self.grid.ny)]
        for row in self.rows:
            g[row.cell_j][row.cell_i] = row.verdict
        return g


def scan(fam: RepFamily, grid: GridSpec, cert_params, prims=None,
         threads: int = 1) -> ScanResult:
    """Certify every grid cell; per-cell errors are recorded in the row and
    never abort the scan.  Output order is cell index, independent of the
    thread schedule."""
    from concurrent.futures import ThreadPoolExecutor

    from . import pscert
    from . import primitives as P

    if grid.nx * grid.ny > 1_000_000:
        raise DomainError("grid cell cap exceeded")
    if prims is None:
        ref = P.reference_structure(fam.presentation)
        prims = P.enumerate_primitives(fam.presentation, ref,
                                       cert_params.max_len, cert_params.depth)

    def run_cell(idx: int) -> ScanRow:
        i, j = idx % grid.nx, idx // grid.nx
        param = grid.param(i, j)
        try:
            rep = fam.build(param)
        except DomainError:
            return ScanRow(i, j, param.real, param.imag, None, "error",
                           None, None, "", 0, None, None)
        try:
            res = pscert.certify(pscert.OrbitMap(rep), prims, cert_params.plane,
                                 auto_tune=cert_params.auto_tune)
        except DomainError:
            return ScanRow(i, j, param.real, param.imag, rep.residual, "error",
                           None, None, "", 0, None, None)
        return ScanRow(i, j, param.real, param.imag, rep.residual, res.verdict,
                       res.min_gap, res.stride, res.witness or "",
                       len(res.parabolic_suspects), res.r_emp, res.R_emp)

    indices = range(grid.nx * grid.ny)
    if threads <= 1:
        rows = [run_cell(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_cell, indices))
    return ScanResult(grid, tuple(rows))
