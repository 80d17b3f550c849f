"""Fast invariant suites behind `primstab selftest`."""

from __future__ import annotations

import cmath
import math
import random

from . import charlab, formats, pscert
from . import primitives as P
from . import words as W
from .hyp import (H3Point, Isometry, apply, classify, h3_distance,
                  perpendicular_bisector, plane_distance, translation_length)


def _check(name: str, ok: bool, failures: list) -> None:
    print("%s %s" % ("PASS" if ok else "FAIL", name))
    if not ok:
        failures.append(name)


def run() -> int:
    failures: list[str] = []
    rng = random.Random(1)

    # geometry: isometries preserve distance
    ok = True
    for _ in range(50):
        e = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(4)]
        if abs(e[0] * e[3] - e[1] * e[2]) < 1e-2:
            continue
        m = Isometry.from_entries(*e)
        p = H3Point(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 2))
        q = H3Point(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 2))
        if abs(h3_distance(apply(m, p), apply(m, q)) - h3_distance(p, q)) > 1e-10:
            ok = False
    _check("isometry-invariance of distance", ok, failures)

    # geometry: closed forms
    ok = abs(h3_distance(H3Point(0, 0, 1), H3Point(0, 0, math.e)) - 1.0) < 1e-12
    plane = perpendicular_bisector(H3Point(0, 0, 1), H3Point(0, 0, math.e ** 2))
    ok &= abs(1.0 / abs(plane.a) - math.e) < 1e-9
    ok &= abs(translation_length(Isometry(math.e, 0, 0, 1 / math.e)) - 2.0) < 1e-12
    _check("geometry closed forms", ok, failures)

    # words: free ball counts and surface rewriting
    ball = W.build_ball(W.free_group(2), 5)
    ok = ball.layer_sizes == [1, 4, 12, 36, 108, 324]
    n3 = W.nonorientable_surface(3)
    nball = W.build_ball(n3, 4)
    ok &= nball.canonical_word((1, 1, 2, 2, 3, 3)) == ()
    ok &= W.geodesic_length(nball, (1, 1, 2, 2, 3)) == 1
    _check("word layer (counts, rewriting, fingerprints)", ok, failures)

    # primitives: christoffel against whitehead
    ok = P.f2_primitives(7) == P.f2_primitives_bruteforce(7)
    _check("rank-2 primitive enumeration oracle", ok, failures)

    # certifier: loxodromic passes, parabolic fails
    p1 = W.free_group(1)
    lox = charlab.make_representation(p1, (Isometry(math.e, 0, 0, 1 / math.e),), "lox")
    par = charlab.make_representation(p1, (Isometry(1, 1, 0, 1),), "par")
    path = W.GeodesicPath((1,), 8)
    ok = pscert.check_plane_criterion(
        pscert.OrbitMap(lox), path, pscert.PlaneCriterionParams()).passed
    ok &= not pscert.check_plane_criterion(
        pscert.OrbitMap(par), path, pscert.PlaneCriterionParams()).passed
    _check("plane criterion on model orbits", ok, failures)

    # charlab: action composition + trace identity on the shallow reference
    rep = charlab.reference_representation(n3)
    autos = formats.load_shipped_automorphisms(n3)
    tw = autos[0]
    ok = True
    for _ in range(50):
        w = tuple(rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(5))
        lhs = charlab.trace_squared(charlab.act(tw, rep), w)
        rhs = charlab.trace_squared(rep, W.apply_automorphism(tw.inverse(), w))
        if abs(lhs - rhs) / (1 + abs(lhs) + abs(rhs)) > 1e-10:
            ok = False
    _check("outer action trace identity", ok, failures)

    # config defaults self-consistency
    cfg = formats.Config()
    from . import defaults
    ok = (cfg.ball_radius == defaults.BALL_RADIUS_CAP
          and cfg.max_len_certify == defaults.MAX_LEN_CERTIFY
          and cfg.max_len_scan == defaults.MAX_LEN_SCAN
          and cfg.conjugator_depth == defaults.CONJUGATOR_DEPTH
          and cfg.gap_c == defaults.DEFAULT_SETTINGS.gap_c
          and cfg.tol_class == defaults.DEFAULT_SETTINGS.class_tol
          and cfg.tol_fingerprint == defaults.DEFAULT_SETTINGS.fingerprint_tol)
    _check("config defaults match module defaults", ok, failures)

    if failures:
        print("selftest: %d failure(s)" % len(failures))
        return 1
    print("selftest: all suites passed")
    return 0
