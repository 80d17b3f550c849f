"""Text formats and bit-exact writers.

All outputs are plain text with \n line endings and floats at 17 significant
digits, so identical inputs produce byte-identical files.

Representation file:      automorphism file:
    # comment                 gens a b c
    presentation free2        relator a a b b c c
    gen a <re a> <im a> ...   auto twist_ab: a -> a a b ; b -> b^-1 a^-1 b ; c -> c
                              inverse: a -> a b^-1 a^-1 ; b -> a b b ; c -> c

Config files are `key = value` lines with # comments and a closed key schema.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, fields

from . import charlab
from . import defaults
from . import words as W
from .errors import DomainError
from .hyp import Isometry


def fmt_float(x: float) -> str:
    return "%.17g" % x


# ---------------------------------------------------------------------------
# config

@dataclass
class Config:
    """Closed key=value schema; unknown keys are errors.  Numeric defaults
    mirror the module-level defaults (asserted by a self-consistency test)."""

    ball_radius: int = defaults.BALL_RADIUS_CAP
    max_len_certify: int = defaults.MAX_LEN_CERTIFY
    max_len_scan: int = defaults.MAX_LEN_SCAN
    conjugator_depth: int = defaults.CONJUGATOR_DEPTH
    tol_class: float = defaults.DEFAULT_SETTINGS.class_tol
    gap_c: float = defaults.DEFAULT_SETTINGS.gap_c
    tol_fingerprint: float = defaults.DEFAULT_SETTINGS.fingerprint_tol
    # default scan window: the real Fuchsian segment with its elliptic tail
    # and a complex collar (row 16 lies exactly on the real axis)
    grid_re_min: float = 1.6
    grid_re_max: float = 3.2
    grid_im_min: float = -0.4
    grid_im_max: float = 0.375
    grid_nx: int = 32
    grid_ny: int = 32
    out_csv: str = "scan.csv"
    out_ppm: str = "scan.ppm"
    threads: int = defaults.THREADS


_INT_KEYS = {"ball_radius", "max_len_certify", "max_len_scan",
             "conjugator_depth", "grid_nx", "grid_ny", "threads"}
_FLOAT_KEYS = {"tol_class", "gap_c", "tol_fingerprint", "grid_re_min",
               "grid_re_max", "grid_im_min", "grid_im_max"}
_STR_KEYS = {"out_csv", "out_ppm"}


def parse_config(text: str) -> Config:
    cfg = Config()
    known = {f.name for f in fields(Config)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError("config line %d: expected key = value" % lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise DomainError("config line %d: unknown key %r" % (lineno, key))
        try:
            if key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
        except ValueError:
            raise DomainError("config line %d: bad value for %s" % (lineno, key))
    return cfg


# ---------------------------------------------------------------------------
# representation files

def write_representation(rep: charlab.Representation) -> str:
    lines = ["presentation %s" % rep.presentation.name()]
    for name, m in zip(rep.presentation.gen_names, rep.matrices):
        nums = []
        for e in (m.a, m.b, m.c, m.d):
            nums.append(fmt_float(e.real))
            nums.append(fmt_float(e.imag))
        lines.append("gen %s %s" % (name, " ".join(nums)))
    return "\n".join(lines) + "\n"


def parse_representation(text: str) -> charlab.Representation:
    presentation = None
    mats: dict[str, Isometry] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "presentation":
            if len(parts) != 2:
                raise DomainError("line %d: presentation <name>" % lineno)
            presentation = W.presentation_by_name(parts[1])
        elif parts[0] == "gen":
            if presentation is None:
                raise DomainError("line %d: gen before presentation" % lineno)
            if len(parts) != 10:
                raise DomainError("line %d: gen <name> and 8 numbers" % lineno)
            name = parts[1]
            if name not in presentation.gen_names:
                raise DomainError("line %d: unknown generator %r" % (lineno, name))
            try:
                v = [float(x) for x in parts[2:]]
            except ValueError:
                raise DomainError("line %d: bad number" % lineno)
            mats[name] = Isometry.from_entries(
                complex(v[0], v[1]), complex(v[2], v[3]),
                complex(v[4], v[5]), complex(v[6], v[7]))
        else:
            raise DomainError("line %d: unknown directive %r" % (lineno, parts[0]))
    if presentation is None:
        raise DomainError("missing presentation header")
    missing = [n for n in presentation.gen_names if n not in mats]
    if missing:
        raise DomainError("missing generators: %s" % " ".join(missing))
    return charlab.make_representation(
        presentation, tuple(mats[n] for n in presentation.gen_names), "file")


# ---------------------------------------------------------------------------
# automorphism files

def parse_automorphisms(text: str) -> list[W.Automorphism]:
    """Parse `gens`/`relator`/`auto`/`inverse` blocks; every automorphism is
    validated (inverse roundtrip, relator preserved up to conjugacy)."""
    gen_names: tuple[str, ...] | None = None
    relators: list[W.Word] = []
    presentation: W.Presentation | None = None
    out: list[W.Automorphism] = []
    pending: tuple[str, tuple[W.Word, ...]] | None = None

    def finish_presentation():
        nonlocal presentation
        if presentation is not None:
            return
        if gen_names is None:
            raise DomainError("automorphism file: missing gens line")
        for cand in _candidate_presentations(len(gen_names)):
            if cand.gen_names == gen_names and list(cand.relators) == relators:
                presentation = cand
                return
        raise DomainError("automorphism file: unrecognized presentation")

    def parse_images(s: str) -> tuple[W.Word, ...]:
        finish_presentation()
        images: dict[str, W.Word] = {}
        for clause in s.split(";"):
            clause = clause.strip()
            if not clause:
                continue
            if "->" not in clause:
                raise DomainError("automorphism clause needs ->: %r" % clause)
            lhs, _, rhs = clause.partition("->")
            name = lhs.strip()
            if name not in presentation.gen_names:
                raise DomainError("unknown generator %r" % name)
            images[name] = W.parse_word(rhs.strip(), presentation)
        missing = [n for n in presentation.gen_names if n not in images]
        if missing:
            raise DomainError("automorphism misses generators: %s" % " ".join(missing))
        return tuple(images[n] for n in presentation.gen_names)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("gens "):
            gen_names = tuple(line.split()[1:])
        elif line.startswith("relator "):
            if gen_names is None:
                raise DomainError("line %d: relator before gens" % lineno)
            tmp = _candidate_presentations(len(gen_names))[0]
            relators.append(W.parse_word(" ".join(line.split()[1:]), tmp))
        elif line.startswith("auto "):
            if pending is not None:
                raise DomainError("line %d: auto %r has no inverse block"
                                  % (lineno, pending[0]))
            head, _, body = line[5:].partition(":")
            pending = (head.strip(), parse_images(body))
        elif line.startswith("inverse:"):
            if pending is None:
                raise DomainError("line %d: inverse without auto" % lineno)
            name, images = pending
            inverse = parse_images(line.partition(":")[2])
            f = W.Automorphism(presentation, name, images, inverse)
            W.validate_automorphism(f)
            out.append(f)
            pending = None
        else:
            raise DomainError("line %d: unknown directive" % lineno)
    if pending is not None:
        raise DomainError("auto %r has no inverse block" % pending[0])
    return out


def _candidate_presentations(n: int) -> list[W.Presentation]:
    cands = [W.free_group(n)]
    try:
        cands.append(W.nonorientable_surface(n))
    except DomainError:
        pass
    if n % 2 == 0:
        try:
            cands.append(W.orientable_surface(n // 2))
        except DomainError:
            pass
    return cands


def load_shipped_automorphisms(p: W.Presentation) -> list[W.Automorphism]:
    """Mapping-class automorphisms shipped as package data."""
    name = "autos_%s.txt" % p.name()
    try:
        text = (importlib.resources.files("primstab.data") / name).read_text()
    except FileNotFoundError:
        raise DomainError("no shipped automorphisms for %s" % p.name())
    return parse_automorphisms(text)


# ---------------------------------------------------------------------------
# CSV / PPM writers

def csv_field(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        s = fmt_float(value)
    else:
        s = str(value)
    if any(ch in s for ch in (',', '"', '\n')):
        s = '"' + s.replace('"', '""') + '"'
    return s


def write_csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(csv_field(h) for h in header)]
    for row in rows:
        lines.append(",".join(csv_field(v) for v in row))
    return "\n".join(lines) + "\n"


VERDICT_PALETTE = {
    "certified": (30, 160, 70),
    "inconclusive": (250, 180, 20),
    "failed": (200, 30, 30),
    "error": (60, 60, 60),
}


def write_ppm(verdict_grid: list[list[str]]) -> str:
    """Plain P3, maxval 255, one pixel per cell, row-major from the top row
    (the last grid row, so increasing imaginary part points up)."""
    h = len(verdict_grid)
    w = len(verdict_grid[0]) if h else 0
    if w > 4096 or h > 4096:
        raise DomainError("raster dimensions exceed 4096")
    lines = ["P3", "%d %d" % (w, h), "255"]
    for row in reversed(verdict_grid):
        for verdict in row:
            r, g, b = VERDICT_PALETTE[verdict]
            lines.append("%d %d %d" % (r, g, b))
    return "\n".join(lines) + "\n"


def parse_ppm(text: str) -> list[list[tuple[int, int, int]]]:
    tokens = []
    for raw in text.splitlines():
        tokens.extend(raw.split("#", 1)[0].split())
    if tokens[0] != "P3":
        raise DomainError("not a plain P3 file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    del maxval
    vals = [int(t) for t in tokens[4:4 + 3 * w * h]]
    rows = []
    for j in range(h):
        row = []
        for i in range(w):
            k = 3 * (j * w + i)
            row.append((vals[k], vals[k + 1], vals[k + 2]))
        rows.append(row)
    return rows


def scan_csv(result: charlab.ScanResult) -> str:
    header = ["cell_i", "cell_j", "p_re", "p_im", "residual", "verdict",
              "min_gap", "stride", "witness", "n_parabolic", "r_emp", "R_emp"]
    rows = []
    for r in result.rows:
        rows.append([r.cell_i, r.cell_j, r.p_re, r.p_im, r.residual, r.verdict,
                     r.min_gap, r.stride, r.witness, r.n_parabolic,
                     r.r_emp, r.R_emp])
    return write_csv(header, rows)


def certify_csv(result, presentation: W.Presentation) -> str:
    header = ["word", "length", "stride", "min_gap", "verdict"]
    rows = [[W.word_to_str(r.word, presentation), r.length, r.stride,
             r.min_gap, r.verdict] for r in result.rows]
    rows.append(["(summary)", result.max_len, result.stride,
                 result.min_gap, result.verdict])
    return write_csv(header, rows)


def primitives_csv(classes, presentation: W.Presentation) -> str:
    header = ["canonical_word", "length", "orientation", "verdict_depth"]
    rows = [[W.word_to_str(c.word, presentation), c.length, c.orientation,
             c.verdict_depth] for c in classes]
    return write_csv(header, rows)
