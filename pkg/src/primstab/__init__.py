"""primstab: primitive-stability certification for PSL(2,C) representations
of nonorientable-surface and free groups, with character-variety slice
exploration (scans, orbits, parabolic loci, elliptic stabilizer points)."""

__version__ = "0.1.0"

from . import charlab, formats, hyp, primitives, pscert, words  # noqa: F401
