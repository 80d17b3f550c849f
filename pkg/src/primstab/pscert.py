"""The stability certifier: plane-separation criterion on quasi-axis orbits,
a brute-force quasi-geodesic oracle, parabolic-primitive detection, and
translation-length ratio statistics.

The plane criterion checks, along the orbit of a periodic geodesic word,
that the perpendicular bisector of each stride segment separates its
neighbors and stays at distance > c from the next one.  Windows are
evaluated in identity-anchored coordinates: the window starting at vertex m
is translated by rho(vertex_m)^{-1}, so every plane is built from points a
bounded word length from the basepoint regardless of how deep the global
orbit runs (separation and gaps are isometry-invariant, and the criterion
itself is invariant under the deck translation by the period).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import charlab
from . import words as W
from .defaults import (AUTO_STRIDES, DEFAULT_SETTINGS, NumericSettings,
                       WINDOW_PERIODS)
from .errors import DomainError
from .hyp import (BASEPOINT, H3Point, Isometry, apply, h3_distance,
                  inversive_product, perpendicular_bisector, plane_distance,
                  transform_plane, translation_length)
from .primitives import PrimitiveClass

CERTIFIED = "certified"
FAILED = "failed"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class OrbitMap:
    """Equivariant orbit map data: representation and basepoint."""

    representation: charlab.Representation
    basepoint: H3Point = BASEPOINT
    residual_bound: float = DEFAULT_SETTINGS.residual_bound

    def __post_init__(self):
        if self.representation.residual > self.residual_bound:
            raise DomainError(
                "relator residual %.3e exceeds bound %.3e"
                % (self.representation.residual, self.residual_bound))


@dataclass(frozen=True)
class PlaneCriterionParams:
    """Stride i, minimum plane gap c, and window periods per side."""

    i: int = 1
    c: float = DEFAULT_SETTINGS.gap_c
    window: int = WINDOW_PERIODS

    def __post_init__(self):
        if self.i < 1 or self.c <= 0 or self.window < 1:
            raise DomainError("invalid plane criterion parameters")


@dataclass(frozen=True)
class QGConstants:
    K: float
    A: float

    def __post_init__(self):
        if self.K < 1.0 or self.A < 0.0:
            raise DomainError("quasi-geodesic constants need K >= 1, A >= 0")


@dataclass(frozen=True)
class PlaneCheck:
    passed: bool
    structural_ok: bool
    min_gap: float
    fail_index: int | None


@dataclass(frozen=True)
class WordReport:
    word: W.Word
    length: int
    stride: int
    min_gap: float
    verdict: str
    fail_index: int | None


@dataclass(frozen=True)
class CertResult:
    verdict: str
    stride: int
    gap_threshold: float
    window: int
    max_len: int
    min_gap: float | None
    rows: tuple[WordReport, ...]
    witness: str | None
    parabolic_suspects: tuple[tuple[str, int], ...]
    r_emp: float | None
    R_emp: float | None
    R_lip: float
    K_emp: float | None
    A_emp: float | None


def orbit_point(om: OrbitMap, w: W.Word) -> H3Point:
    """tau(w) = rho(w) . basepoint."""
    return apply(om.representation.evaluate(w), om.basepoint)


def _stride_step(om: OrbitMap, path: W.GeodesicPath, stride: int, j: int) -> Isometry:
    """rho of the relative word from stride vertex j to stride vertex j+1."""
    u = path.vertex_word(j * stride)
    v = path.vertex_word((j + 1) * stride)
    return om.representation.evaluate(W.free_reduce(W.invert_word(u) + v))


def check_plane_criterion(om: OrbitMap, path: W.GeodesicPath,
                          params: PlaneCriterionParams,
                          settings: NumericSettings = DEFAULT_SETTINGS) -> PlaneCheck:
    """Separation and gap test over all stride windows across one period plus
    wrap periods on both sides.

    For each window index j, the plane of the stride segment [v_j, v_{j+1}]
    must separate the two neighboring segment planes and clear the gap c to
    the next one.  Every pairwise plane comparison is evaluated in a chart
    anchored at a shared stride vertex, so all points involved are at most
    two strides from the basepoint no matter how deep the global orbit runs
    (the criterion is equivariant under the deck translations).  Coinciding
    stride endpoints are a structural failure (bisector undefined).
    """
    i = params.i
    x = om.basepoint
    period = path.period
    # windows covering one period plus wraps, as stride indices
    per_strides = max(1, -(-period // i))
    j_lo = -params.window * per_strides - 1
    j_hi = params.window * per_strides + 1
    min_gap = math.inf
    tol = settings.plane_disjoint_tol
    for j in range(j_lo, j_hi):
        m_prev = _stride_step(om, path, i, j - 1)
        m_mid = _stride_step(om, path, i, j)
        m_next = _stride_step(om, path, i, j + 1)
        # chart A: anchored at v_j (covers P_{j-1} and P_j)
        pm1 = apply(m_prev.inverse(), x)
        pp1 = apply(m_mid, x)
        # chart B: anchored at v_{j+1} (covers P_j and P_{j+1})
        q0 = apply(m_mid.inverse(), x)
        q2 = apply(m_next, x)
        if (h3_distance(pm1, x) < settings.degenerate_tol
                or h3_distance(x, pp1) < settings.degenerate_tol
                or h3_distance(x, q2) < settings.degenerate_tol):
            return PlaneCheck(False, False, 0.0, j)
        p_minus = perpendicular_bisector(pm1, x, settings)
        p_mid_a = perpendicular_bisector(x, pp1, settings)
        p_mid_b = perpendicular_bisector(q0, x, settings)
        p_plus = perpendicular_bisector(x, q2, settings)
        # transversality guards, each in a chart where both planes are shallow
        if abs(inversive_product(p_minus, p_mid_a)) < 1.0 - tol:
            return PlaneCheck(False, False, min(min_gap, 0.0), j)
        if abs(inversive_product(p_mid_b, p_plus)) < 1.0 - tol:
            return PlaneCheck(False, False, min(min_gap, 0.0), j)
        p_plus_a = transform_plane(m_mid, p_plus)
        if abs(inversive_product(p_minus, p_plus_a)) < 1.0 - tol:
            return PlaneCheck(False, False, min(min_gap, 0.0), j)
        # separation: the middle plane's side of each neighbor witness,
        # each evaluated in the neighbor's own chart
        s_minus = p_mid_a.side_of(p_minus.interior_point())
        s_plus = p_mid_b.side_of(p_plus.interior_point())
        if min(abs(s_minus), abs(s_plus)) < tol:
            return PlaneCheck(False, False, min(min_gap, 0.0), j)
        if (s_minus > 0.0) == (s_plus > 0.0):
            return PlaneCheck(False, False, min(min_gap, 0.0), j)
        gap = plane_distance(p_mid_b, p_plus)
        if j == j_lo:
            min_gap = min(min_gap, plane_distance(p_minus, p_mid_a))
        min_gap = min(min_gap, gap)
    passed = min_gap > params.c
    return PlaneCheck(passed, True, min_gap, None)


def brute_force_qg_check(om: OrbitMap, path: W.GeodesicPath, k: QGConstants,
                         span: int) -> tuple[bool, tuple[int, int, float] | None]:
    """Check (1/K)|s-t| - A <= d(alpha(s), alpha(t)) on all vertex pairs with
    |s-t| <= span; distances are evaluated on relative words so only the
    separation |s-t| matters.  Returns (pass, worst pair)."""
    lo, hi = path.span
    if span > hi - lo:
        raise DomainError("span exceeds materialized path")
    worst = None
    worst_margin = math.inf
    ok = True
    for s in range(lo, hi + 1):
        acc = Isometry.identity()
        prev = path.vertex_word(s)
        for t in range(s + 1, min(s + span, hi) + 1):
            word = path.vertex_word(t)
            step = W.free_reduce(W.invert_word(prev) + word)
            acc = acc * om.representation.evaluate(step)
            prev = word
            d = h3_distance(om.basepoint, apply(acc, om.basepoint))
            margin = d - ((t - s) / k.K - k.A)
            if margin < worst_margin:
                worst_margin = margin
                worst = (s, t, margin)
            if margin < -1e-12:
                ok = False
    return ok, worst


def detect_parabolic_primitives(om: OrbitMap, prims: list[PrimitiveClass],
                                tol: float = DEFAULT_SETTINGS.parabolic_tol
                                ) -> list[tuple[str, int]]:
    """Classes whose image has |tr^2 - 4| < tol and is not +-identity,
    tagged with orientation (two-sided suspects are the expected kind)."""
    out = []
    for c in sorted(prims):
        m = om.representation.evaluate(c.word)
        if abs(m.trace_squared() - 4.0) < tol and m.dist_to_identity() > tol:
            out.append((W.word_to_str(c.word, om.representation.presentation),
                        c.orientation))
    return out


def ratio_stats(om: OrbitMap, ball: W.CayleyBall,
                prims: list[PrimitiveClass]) -> tuple[float, float, float]:
    """(r_emp, R_emp, R_lip): min/max of translation_length(rho(w)) / ||w||
    over the classes, and the Lipschitz bound max_s d(x, rho(s) x)."""
    if not prims:
        raise DomainError("ratio statistics need a nonempty class list")
    r_emp, R_emp = math.inf, 0.0
    for c in prims:
        ell = translation_length(om.representation.evaluate(c.word))
        denom = c.length if ball is None else W.cayley_translation_length(ball, c.word)
        ratio = ell / denom
        r_emp = min(r_emp, ratio)
        R_emp = max(R_emp, ratio)
    return r_emp, R_emp, lipschitz_bound(om)


def lipschitz_bound(om: OrbitMap) -> float:
    return max(h3_distance(om.basepoint, apply(m, om.basepoint))
               for m in om.representation.matrices)


def certify(om: OrbitMap, prims: list[PrimitiveClass],
            params: PlaneCriterionParams | None = None, auto_tune: bool = True,
            ball: W.CayleyBall | None = None,
            settings: NumericSettings = DEFAULT_SETTINGS) -> CertResult:
    """Run the plane criterion on the quasi-axis of every class.

    With auto_tune, strides 1..4 are tried and the first whose global
    min_gap clears c is accepted.  Verdict: certified iff every window test
    passes and there are no parabolic suspects; failed on a structural
    failure (separation/degeneracy) or on any suspect, with a witness;
    inconclusive when only the gap threshold is missed.
    """
    if params is None:
        params = PlaneCriterionParams()
    classes = sorted(prims)
    R_lip = lipschitz_bound(om)
    suspects = tuple(detect_parabolic_primitives(om, classes, settings.parabolic_tol))
    max_len = max((c.length for c in classes), default=0)
    p = om.representation.presentation

    if not classes:
        return CertResult(CERTIFIED, params.i, params.c, params.window, 0,
                          None, (), None, suspects, None, None, R_lip, None, None)

    paths = {}
    rs = W.rewrite_system(p)
    for c in classes:
        core = rs.canonicalize(W.pack(c.word))
        paths[c.word] = W.GeodesicPath(W.unpack(core), params.window)

    def run(word: W.Word, stride: int) -> PlaneCheck:
        try:
            return check_plane_criterion(
                om, paths[word],
                PlaneCriterionParams(stride, params.c, params.window), settings)
        except (OverflowError, ZeroDivisionError, DomainError):
            return PlaneCheck(False, False, 0.0, None)

    rows: dict[W.Word, WordReport] = {}

    def report(word, length, stride, pc: PlaneCheck) -> WordReport:
        verdict = CERTIFIED if pc.passed else (
            FAILED if not pc.structural_ok else INCONCLUSIVE)
        return WordReport(word, length, stride, pc.min_gap, verdict, pc.fail_index)

    if not auto_tune:
        for c in classes:
            rows[c.word] = report(c.word, c.length, params.i, run(c.word, params.i))
    else:
        # first a shared stride from the default set, accepted when the
        # global gap clears c
        shared = None
        for stride in AUTO_STRIDES:
            attempt = {c.word: run(c.word, stride) for c in classes}
            if all(pc.passed for pc in attempt.values()):
                shared = stride
                rows = {c.word: report(c.word, c.length, stride, attempt[c.word])
                        for c in classes}
                break
        if shared is None:
            # per-word escalation: stride multiples of the word's own period
            # keep every stride step a power of one isometry, which tames the
            # orbit oscillation of short surface geodesics spelled by long
            # generators (per-word stride and gap are reported per row)
            for c in classes:
                period = paths[c.word].period
                ladder = list(AUTO_STRIDES)
                for k in (1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64):
                    if k * period not in ladder:
                        ladder.append(k * period)
                best = None
                for stride in ladder:
                    pc = run(c.word, stride)
                    cand = report(c.word, c.length, stride, pc)
                    if pc.passed:
                        best = cand
                        break
                    if best is None or (
                            (cand.verdict == INCONCLUSIVE, cand.min_gap)
                            > (best.verdict == INCONCLUSIVE, best.min_gap)):
                        best = cand
                rows[c.word] = best

    ordered = tuple(rows[c.word] for c in classes)
    min_gap = min((r.min_gap for r in ordered), default=math.inf)
    stride = max((r.stride for r in ordered), default=params.i)
    failed_rows = [r for r in ordered if r.verdict == FAILED]
    inconclusive_rows = [r for r in ordered if r.verdict == INCONCLUSIVE]

    r_emp, R_emp, _ = ratio_stats(om, ball, classes)
    witness = None
    if failed_rows:
        verdict = FAILED
        witness = W.word_to_str(failed_rows[0].word, p)
    elif suspects:
        verdict = FAILED
        witness = suspects[0][0]
    elif inconclusive_rows:
        verdict = INCONCLUSIVE
    else:
        verdict = CERTIFIED
    K_emp = A_emp = None
    if verdict == CERTIFIED and min_gap > 0:
        K_emp = max(1.0, stride * R_lip / min_gap)
        A_emp = 2.0 * stride * R_lip
    return CertResult(verdict, stride, params.c, params.window, max_len,
                      min_gap, tuple(ordered), witness, suspects,
                      r_emp, R_emp, R_lip, K_emp, A_emp)


def wordset_distortion(f: W.Automorphism, ball: W.CayleyBall) -> float:
    """max over the test set (generators and distinct pair products) of
    ||f(w)|| / ||w||."""
    p = f.presentation
    wordset = [(i,) for i in range(1, p.rank + 1)]
    wordset += [(i, j) for i in range(1, p.rank + 1)
                for j in range(1, p.rank + 1) if i != j]
    worst = 0.0
    for w in wordset:
        num = W.cayley_translation_length(ball, W.apply_automorphism(f, w))
        den = W.cayley_translation_length(ball, w)
        worst = max(worst, num / den)
    return worst
