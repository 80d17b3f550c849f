"""Shared numeric defaults and budgets.

Single source of truth: the CLI config schema mirrors these values and a
self-consistency test asserts they stay equal.
"""

from __future__ import annotations

from dataclasses import dataclass

# Word layer
BALL_RADIUS_CAP = 16      # hard cap on the table radius of a Cayley ball
QUERY_LENGTH_FACTOR = 4   # geodesic queries allowed up to factor * radius
BALL_BUDGET = 2_000_000   # max elements materialized in one ball table
CONJUGATOR_DEPTH = 5      # default conjugator search depth for enumeration

# Certification
MAX_LEN_CERTIFY = 12      # primitive word-length cap, single certification
MAX_LEN_SCAN = 10         # primitive word-length cap, grid scans
WINDOW_PERIODS = 3        # quasi-axis periods materialized on each side
AUTO_STRIDES = (1, 2, 3, 4)
PRIMS_BUDGET = 1_000_000  # candidate cap for primitive enumeration
ORBIT_DEPTH_CAP = 8       # automorphism-word depth cap in orbit sampling
GRID_CELL_CAP = 1_000_000
THREADS = 1


@dataclass(frozen=True)
class NumericSettings:
    """Tolerance record threaded through the geometry and certification APIs."""

    class_tol: float = 1e-9        # |tr^2 - 4| and |Im tr^2| threshold
    plane_norm_tol: float = 1e-10  # allowed drift of the inversive norm from 1
    degenerate_tol: float = 1e-12  # coincident-point threshold for bisectors
    axis_match_tol: float = 1e-8   # endpoint matching for shared axes
    parabolic_tol: float = 1e-6    # parabolic-suspect threshold on tr^2
    fingerprint_tol: float = 1e-6  # character comparison threshold
    residual_bound: float = 1e-6   # relator residual accepted by the certifier
    gap_c: float = 1e-4            # minimum plane gap c of the criterion
    plane_disjoint_tol: float = 1e-9  # transversality margin for separation


DEFAULT_SETTINGS = NumericSettings()
