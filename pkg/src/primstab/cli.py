"""Command-line surface: subcommand dispatch and deterministic outputs.

Exit codes: 0 success, 1 domain error (one-line `error: ...` on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import charlab, defaults, formats, pscert
from . import primitives as P
from . import words as W
from .errors import DomainError


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="primstab",
        description="Certify primitive-stability of PSL(2,C) surface-group "
                    "representations and explore character-variety slices.")
    top.add_argument("--config", help="key=value config file")
    sub = top.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="certify one representation")
    cert.add_argument("--rep", help="representation file")
    cert.add_argument("--family", choices=["nec3", "f2"],
                      help="build from a family instead of a file")
    cert.add_argument("--t1", type=float, default=charlab.NEC3_ANCHOR[0])
    cert.add_argument("--t2", type=float, default=charlab.NEC3_ANCHOR[1])
    cert.add_argument("--kappa-re", type=float, default=charlab.NEC3_ANCHOR[2])
    cert.add_argument("--kappa-im", type=float, default=0.0)
    cert.add_argument("--max-len", type=int, default=None)
    cert.add_argument("--depth", type=int, default=None)
    cert.add_argument("--gap-c", type=float, default=None)
    cert.add_argument("--stride", type=int, default=0,
                      help="fixed stride (0 = auto-tune)")
    cert.add_argument("--window", type=int, default=defaults.WINDOW_PERIODS)
    cert.add_argument("--out", help="CSV path (default stdout)")

    scan = sub.add_parser("scan", help="grid scan of a family slice")
    scan.add_argument("--family", choices=["nec3", "f2"], default="nec3")
    scan.add_argument("--t1", type=float, default=charlab.NEC3_ANCHOR[0])
    scan.add_argument("--t2", type=float, default=charlab.NEC3_ANCHOR[1])
    scan.add_argument("--max-len", type=int, default=None)
    scan.add_argument("--depth", type=int, default=None)
    scan.add_argument("--out-csv", default=None)
    scan.add_argument("--out-ppm", default=None)
    scan.add_argument("--threads", type=int, default=None)

    prims = sub.add_parser("primitives", help="enumerate primitive classes")
    prims.add_argument("--presentation", default="nonorientable3")
    prims.add_argument("--max-len", type=int, default=6)
    prims.add_argument("--depth", type=int, default=None)
    prims.add_argument("--out", help="CSV path (default stdout)")

    orbit = sub.add_parser("orbit", help="sample the outer-automorphism orbit")
    orbit.add_argument("--rep", help="representation file")
    orbit.add_argument("--family", choices=["nec3", "f2"])
    orbit.add_argument("--t1", type=float, default=charlab.NEC3_ANCHOR[0])
    orbit.add_argument("--t2", type=float, default=charlab.NEC3_ANCHOR[1])
    orbit.add_argument("--kappa-re", type=float, default=charlab.NEC3_ANCHOR[2])
    orbit.add_argument("--kappa-im", type=float, default=0.0)
    orbit.add_argument("--depth", type=int, default=4)
    orbit.add_argument("--out", help="CSV path (default stdout)")

    para = sub.add_parser("parabolics", help="list parabolic primitive suspects")
    para.add_argument("--rep", help="representation file")
    para.add_argument("--family", choices=["nec3", "f2"])
    para.add_argument("--t1", type=float, default=charlab.NEC3_ANCHOR[0])
    para.add_argument("--t2", type=float, default=charlab.NEC3_ANCHOR[1])
    para.add_argument("--kappa-re", type=float, default=charlab.NEC3_ANCHOR[2])
    para.add_argument("--kappa-im", type=float, default=0.0)
    para.add_argument("--max-len", type=int, default=6)
    para.add_argument("--depth", type=int, default=None)
    para.add_argument("--tol", type=float, default=None)
    para.add_argument("--out", help="CSV path (default stdout)")

    sub.add_parser("selftest", help="run the fast invariant suites")
    return top


def _load_config(args) -> formats.Config:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            return formats.parse_config(fh.read())
    return formats.Config()


def _load_representation(args) -> charlab.Representation:
    if getattr(args, "rep", None):
        with open(args.rep, "r", encoding="utf-8") as fh:
            return formats.parse_representation(fh.read())
    if getattr(args, "family", None) == "nec3":
        return charlab.build_nec_genus3(
            args.t1, args.t2, complex(args.kappa_re, args.kappa_im))
    if getattr(args, "family", None) == "f2":
        return charlab.build_trace_triple_f2(
            3.0, 3.0, complex(args.kappa_re, args.kappa_im))
    raise DomainError("need --rep FILE or --family")


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_certify(args, cfg: formats.Config) -> int:
    rep = _load_representation(args)
    p = rep.presentation
    max_len = args.max_len if args.max_len else cfg.max_len_certify
    depth = args.depth if args.depth else cfg.conjugator_depth
    ref = P.reference_structure(p)
    prims = P.enumerate_primitives(p, ref, max_len, depth)
    gap = args.gap_c if args.gap_c else cfg.gap_c
    params = pscert.PlaneCriterionParams(max(args.stride, 1), gap, args.window)
    res = pscert.certify(pscert.OrbitMap(rep), prims, params,
                         auto_tune=(args.stride == 0))
    _emit(formats.certify_csv(res, p), args.out)
    return 0


def _cmd_scan(args, cfg: formats.Config) -> int:
    fam = (charlab.nec3_family(args.t1, args.t2) if args.family == "nec3"
           else charlab.f2_family())
    grid = charlab.GridSpec(cfg.grid_re_min, cfg.grid_re_max,
                            cfg.grid_im_min, cfg.grid_im_max,
                            cfg.grid_nx, cfg.grid_ny)
    max_len = args.max_len if args.max_len else cfg.max_len_scan
    depth = args.depth if args.depth else cfg.conjugator_depth
    cert_params = CertParams(max_len, depth,
                             pscert.PlaneCriterionParams(1, cfg.gap_c,
                                                         defaults.WINDOW_PERIODS),
                             True)
    threads = args.threads if args.threads else cfg.threads
    result = charlab.scan(fam, grid, cert_params, threads=threads)
    _emit(formats.scan_csv(result), args.out_csv or cfg.out_csv)
    _emit(formats.write_ppm(result.verdict_grid()), args.out_ppm or cfg.out_ppm)
    return 0


class CertParams:
    """Certification parameters carried into grid scans."""

    def __init__(self, max_len: int, depth: int,
                 plane: pscert.PlaneCriterionParams, auto_tune: bool):
        self.max_len = max_len
        self.depth = depth
        self.plane = plane
        self.auto_tune = auto_tune


def _cmd_primitives(args, cfg: formats.Config) -> int:
    p = W.presentation_by_name(args.presentation)
    depth = args.depth if args.depth else cfg.conjugator_depth
    ref = P.reference_structure(p)
    classes = P.enumerate_primitives(p, ref, args.max_len, depth)
    _emit(formats.primitives_csv(classes, p), args.out)
    return 0


def _cmd_orbit(args, cfg: formats.Config) -> int:
    del cfg
    rep = _load_representation(args)
    gens = formats.load_shipped_automorphisms(rep.presentation)
    report = charlab.orbit_sample(rep, gens, args.depth)
    text = formats.write_csv(
        ["depth", "applied", "distinct_characters", "in_window", "window_bound"],
        [[report.depth, report.applied, report.distinct_characters,
          report.in_window, report.window_bound]])
    _emit(text, args.out)
    return 0


def _cmd_parabolics(args, cfg: formats.Config) -> int:
    rep = _load_representation(args)
    p = rep.presentation
    depth = args.depth if args.depth else cfg.conjugator_depth
    ref = P.reference_structure(p)
    prims = P.enumerate_primitives(p, ref, args.max_len, depth)
    tol = args.tol if args.tol else cfg.tol_fingerprint
    om = pscert.OrbitMap(rep, residual_bound=float("inf"))
    suspects = pscert.detect_parabolic_primitives(om, prims, tol)
    text = formats.write_csv(["word", "orientation"],
                             [[wd, o] for wd, o in suspects])
    _emit(text, args.out)
    return 0


def _cmd_selftest(args, cfg: formats.Config) -> int:
    del args, cfg
    from . import selftest
    return selftest.run()


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "certify": _cmd_certify,
        "scan": _cmd_scan,
        "primitives": _cmd_primitives,
        "orbit": _cmd_orbit,
        "parabolics": _cmd_parabolics,
        "selftest": _cmd_selftest,
    }
    try:
        cfg = _load_config(args)
        return handlers[args.command](args, cfg)
    except DomainError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
