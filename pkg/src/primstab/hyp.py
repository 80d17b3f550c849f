"""Hyperbolic 2- and 3-space kernel.

Model: upper half-space H^3 = {(x, y, t) : t > 0} with the metric
(dx^2 + dy^2 + dt^2)/t^2.  PSL(2,C) acts by the Poincare extension of the
Mobius action on the boundary C u {oo}; matrices are normalized to
determinant 1 and are identified with their negatives.

Totally geodesic planes are stored in inversive coordinates: a plane is the
generalized boundary circle a|z|^2 + conj(b) z + b conj(z) + c = 0 (a, c real,
b complex), normalized so |b|^2 - a c = 1.  The inversive product of two
normalized planes is <w, w'> = Re(b conj(b')) - (a c' + a' c)/2; it equals
cos(angle) for crossing planes and +-cosh(distance) for disjoint ones.  The
overall sign of (a, b, c) orients the plane: side(z, t) = a(|z|^2 + t^2) +
2 Re(conj(b) z) + c.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .defaults import DEFAULT_SETTINGS, NumericSettings
from .errors import DomainError

# Classification tags.
IDENTITY = "identity"
ELLIPTIC = "elliptic"
PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"
LOXODROMIC = "loxodromic"


class BoundaryInfinity:
    """The point at infinity of the boundary sphere (explicit, no sentinels)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "oo"


OO = BoundaryInfinity()


@dataclass(frozen=True, eq=False)
class Isometry:
    """Element of PSL(2,C): det = 1 after normalization, sign-ambiguous."""

    a: complex
    b: complex
    c: complex
    d: complex

    @staticmethod
    def from_entries(a, b, c, d) -> "Isometry":
        """Normalize by a square root of the determinant."""
        det = a * d - b * c
        if det == 0:
            raise DomainError("singular matrix is not an isometry")
        s = cmath.sqrt(det)
        return Isometry(a / s, b / s, c / s, d / s)

    @staticmethod
    def identity() -> "Isometry":
        return Isometry(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def trace(self) -> complex:
        """Trace of one matrix lift; only tr^2 is well defined in PSL."""
        return self.a + self.d

    def trace_squared(self) -> complex:
        t = self.a + self.d
        return t * t

    def __mul__(self, o: "Isometry") -> "Isometry":
        return Isometry(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "Isometry":
        if n < 0:
            return self.inverse() ** (-n)
        r = Isometry.identity()
        p = self
        while n:
            if n & 1:
                r = r * p
            p = p * p
            n >>= 1
        return r

    def __eq__(self, other) -> bool:
        if not isinstance(other, Isometry):
            return NotImplemented
        return self.equals(other)

    def equals(self, other: "Isometry", tol: float = 1e-9) -> bool:
        """Equality in PSL: compare against both signs of the other lift."""
        dp = max(abs(self.a - other.a), abs(self.b - other.b),
                 abs(self.c - other.c), abs(self.d - other.d))
        dm = max(abs(self.a + other.a), abs(self.b + other.b),
                 abs(self.c + other.c), abs(self.d + other.d))
        return min(dp, dm) < tol

    def dist_to_identity(self) -> float:
        """min over signs of the sup-norm distance to the identity matrix."""
        dp = max(abs(self.a - 1), abs(self.b), abs(self.c), abs(self.d - 1))
        dm = max(abs(self.a + 1), abs(self.b), abs(self.c), abs(self.d + 1))
        return min(dp, dm)

    def mobius(self, z):
        """Action on the boundary C u {oo}."""
        if isinstance(z, BoundaryInfinity):
            if abs(self.c) == 0.0:
                return OO
            return self.a / self.c
        den = self.c * z + self.d
        if abs(den) == 0.0:
            return OO
        return (self.a * z + self.b) / den


@dataclass(frozen=True)
class H3Point:
    """Point of upper half-space; t > 0."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("H3 point needs t > 0")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


BASEPOINT = H3Point(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class GeodesicLine:
    """Oriented geodesic of H^3 by boundary endpoints (repelling, attracting)."""

    repelling: object  # complex | BoundaryInfinity
    attracting: object


@dataclass(frozen=True)
class IsometryClass:
    """Conjugacy type by tr^2, with the tested tr^2 value reported.

    complex_length = l + i*theta with l = Re >= 0 (principal arccosh branch,
    theta wrapped to (-pi, pi]); set for hyperbolic/loxodromic elements.
    angle is the rotation angle for elliptic elements.
    """

    tag: str
    trace_sq: complex
    angle: float | None = None
    complex_length: complex | None = None


@dataclass(frozen=True)
class BisectorPlane:
    """Totally geodesic plane in inversive coordinates (see module docstring)."""

    a: float
    b: complex
    c: float

    @property
    def vector4(self) -> tuple[float, float, float, float]:
        return (self.a, self.b.real, self.b.imag, self.c)

    def norm(self) -> float:
        return abs(self.b) ** 2 - self.a * self.c

    def side_of(self, p: H3Point) -> float:
        z = p.z
        return (self.a * (abs(z) ** 2 + p.t ** 2)
                + 2.0 * (self.b.conjugate() * z).real + self.c)

    def boundary_side_of(self, z: complex) -> float:
        return self.a * abs(z) ** 2 + 2.0 * (self.b.conjugate() * z).real + self.c

    def interior_point(self) -> H3Point:
        """A point of the plane inside H^3 (hemisphere summit, or a line point
        at height 1 for vertical planes)."""
        if abs(self.a) > 1e-14:
            center = -self.b / self.a
            return H3Point(center.real, center.imag, 1.0 / abs(self.a))
        z0 = -0.5 * self.c * self.b / (abs(self.b) ** 2)
        return H3Point(z0.real, z0.imag, 1.0)

    def flipped(self) -> "BisectorPlane":
        return BisectorPlane(-self.a, -self.b, -self.c)

    def same_unoriented(self, other: "BisectorPlane", tol: float = 1e-8) -> bool:
        dp = max(abs(self.a - other.a), abs(self.b - other.b), abs(self.c - other.c))
        dm = max(abs(self.a + other.a), abs(self.b + other.b), abs(self.c + other.c))
        return min(dp, dm) < tol


def apply(m: Isometry, p: H3Point) -> H3Point:
    """Poincare extension of the Mobius action to upper half-space."""
    z, t = p.z, p.t
    u = m.c * z + m.d
    den = abs(u) ** 2 + abs(m.c) ** 2 * t * t
    z2 = ((m.a * z + m.b) * u.conjugate() + m.a * m.c.conjugate() * t * t) / den
    return H3Point(z2.real, z2.imag, t / den)


def h3_distance(p: H3Point, q: H3Point) -> float:
    """cosh d = 1 + (|z_p - z_q|^2 + (t_p - t_q)^2) / (2 t_p t_q)."""
    num = (p.x - q.x) ** 2 + (p.y - q.y) ** 2 + (p.t - q.t) ** 2
    return math.acosh(1.0 + num / (2.0 * p.t * q.t))


def _wrap_angle(theta: float) -> float:
    while theta > math.pi:
        theta -= 2.0 * math.pi
    while theta <= -math.pi:
        theta += 2.0 * math.pi
    return theta


def complex_length(m: Isometry) -> complex:
    """mu = 2 arccosh(tr/2), principal branch (Re >= 0), Im wrapped to (-pi, pi]."""
    mu = 2.0 * cmath.acosh(m.trace() / 2.0)
    return complex(abs(mu.real), _wrap_angle(mu.imag))


def classify(m: Isometry, tol: float | None = None,
             settings: NumericSettings = DEFAULT_SETTINGS) -> IsometryClass:
    """Conjugacy type from tr^2.

    tr^2 = 4 within tol and m != +-I: parabolic; tr^2 real in [0, 4):
    elliptic; tr^2 real > 4: hyperbolic; otherwise loxodromic.
    """
    if tol is None:
        tol = settings.class_tol
    tsq = m.trace_squared()
    if m.dist_to_identity() < tol:
        return IsometryClass(IDENTITY, tsq)
    if abs(tsq - 4.0) < tol:
        return IsometryClass(PARABOLIC, tsq)
    if abs(tsq.imag) < tol and -tol < tsq.real < 4.0:
        mu = complex_length(m)
        return IsometryClass(ELLIPTIC, tsq, angle=abs(mu.imag))
    mu = complex_length(m)
    if abs(tsq.imag) < tol and tsq.real > 4.0:
        return IsometryClass(HYPERBOLIC, tsq, complex_length=complex(mu.real, 0.0))
    return IsometryClass(LOXODROMIC, tsq, complex_length=mu)


def translation_length(m: Isometry) -> float:
    """Re(2 arccosh(tr/2)); zero for parabolic/elliptic/identity elements."""
    ell = complex_length(m).real
    # kill float noise for elements with real tr^2 in [0, 4]; negative real
    # tr^2 is a pi-rotation loxodromic and keeps its positive length
    tsq = m.trace_squared()
    if abs(tsq.imag) < 1e-14 and -1e-14 <= tsq.real <= 4.0 + 1e-14:
        return 0.0
    return ell


def axis(m: Isometry, settings: NumericSettings = DEFAULT_SETTINGS) -> GeodesicLine:
    """Invariant geodesic (repelling, attracting) of a hyperbolic/loxodromic
    element; endpoints are the fixed points of the Mobius action."""
    cls = classify(m, settings=settings)
    if cls.tag not in (HYPERBOLIC, LOXODROMIC):
        raise DomainError("no axis: element is %s" % cls.tag)
    scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
    if abs(m.c) < 1e-14 * scale:
        # fixed points oo and b/(d - a); derivative at oo is a/d
        other = m.b / (m.d - m.a)
        if abs(m.a) > abs(m.d):
            return GeodesicLine(other, OO)
        return GeodesicLine(OO, other)
    disc = cmath.sqrt((m.d - m.a) ** 2 + 4.0 * m.b * m.c)
    z1 = ((m.a - m.d) + disc) / (2.0 * m.c)
    z2 = ((m.a - m.d) - disc) / (2.0 * m.c)
    # attracting fixed point has |derivative| = |cz + d|^{-2} < 1
    d1 = abs(m.c * z1 + m.d)
    if d1 > 1.0:
        return GeodesicLine(z2, z1)
    return GeodesicLine(z1, z2)


def perpendicular_bisector(p: H3Point, q: H3Point,
                           settings: NumericSettings = DEFAULT_SETTINGS) -> BisectorPlane:
    """The plane of points equidistant from p and q, oriented so p is on the
    negative side.

    Equating cosh distances gives the closed form
      a = t_q - t_p,  b = t_p z_q - t_q z_p,
      c = t_q (|z_p|^2 + t_p^2) - t_p (|z_q|^2 + t_q^2),
    normalized to inversive norm 1; conjugating p, q to (0,0,1), (0,0,e^d)
    this is the hemisphere of radius e^{d/2} about 0.  The coefficients are
    evaluated in difference form and the norm via the cancellation-free
    identity |b|^2 - ac = t_p t_q (|z_p - z_q|^2 + (t_p - t_q)^2), so the
    plane stays accurate for deep near-boundary point pairs.
    """
    if h3_distance(p, q) < settings.degenerate_tol:
        raise DomainError("degenerate bisector: points coincide")
    zp, zq = p.z, q.z
    dz = zq - zp
    dt = q.t - p.t
    a = dt
    b = p.t * dz - zp * dt
    c = -q.t * (dz.conjugate() * (zp + zq)).real + (abs(zq) ** 2) * dt \
        - p.t * q.t * dt
    n = p.t * q.t * (abs(dz) ** 2 + dt * dt)
    s = math.sqrt(n)
    plane = BisectorPlane(a / s, b / s, c / s)
    if plane.side_of(p) > 0.0:
        plane = plane.flipped()
    return plane


def inversive_product(p1: BisectorPlane, p2: BisectorPlane) -> float:
    return ((p1.b * p2.b.conjugate()).real
            - 0.5 * (p1.a * p2.c + p2.a * p1.c))


def plane_distance(p1: BisectorPlane, p2: BisectorPlane) -> float:
    """Hyperbolic distance between disjoint planes; 0 if they meet or are
    tangent (arccosh of |inversive product|, isometry-invariant)."""
    ip = abs(inversive_product(p1, p2))
    if ip <= 1.0:
        return 0.0
    return math.acosh(ip)


def plane_separates(p1: BisectorPlane, p2: BisectorPlane, p3: BisectorPlane,
                    settings: NumericSettings = DEFAULT_SETTINGS) -> bool:
    """True iff p2 separates p1 from p3 in H^3.

    Decided by the sign of p2's defining function at interior points of p1
    and p3.  Transversally crossing inputs are rejected; boundary-tangent
    (asymptotic) planes are disjoint in H^3 and are allowed.
    """
    tol = settings.plane_disjoint_tol
    for u, v in ((p1, p2), (p2, p3), (p1, p3)):
        if abs(inversive_product(u, v)) < 1.0 - tol:
            raise DomainError("planes not pairwise disjoint")
    s1 = p2.side_of(p1.interior_point())
    s3 = p2.side_of(p3.interior_point())
    if min(abs(s1), abs(s3)) < tol:
        raise DomainError("planes not pairwise disjoint")
    return (s1 > 0.0) != (s3 > 0.0)


def transform_plane(m: Isometry, plane: BisectorPlane) -> BisectorPlane:
    """Image plane under an isometry: H' = (M^-1)^H H M^-1 on the Hermitian
    form H = [[a, b], [conj b, c]]; preserves norm and orientation."""
    inv = m.inverse()
    a, b, c = plane.a, plane.b, plane.c
    # rows of M^-1
    p, q, r, s = inv.a, inv.b, inv.c, inv.d
    # H * M^-1
    h00 = a * p + b * r
    h01 = a * q + b * s
    h10 = b.conjugate() * p + c * r
    h11 = b.conjugate() * q + c * s
    # (M^-1)^H * (H M^-1)
    a2 = (p.conjugate() * h00 + r.conjugate() * h10).real
    b2 = p.conjugate() * h01 + r.conjugate() * h11
    c2 = (q.conjugate() * h01 + s.conjugate() * h11).real
    # the transform preserves the inversive norm exactly; recomputing it from
    # the new coefficients cancels catastrophically for large translations,
    # so renormalize only when the drift is resolvable
    n = abs(b2) ** 2 - a2 * c2
    if abs(n - 1.0) < 0.5:
        s2 = math.sqrt(n)
        return BisectorPlane(a2 / s2, b2 / s2, c2 / s2)
    return BisectorPlane(a2, b2, c2)
