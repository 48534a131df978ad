"""Arithmetic ladder.

Two working precisions are offered.  ``double`` runs the multiprecision
code paths at 53 bits, which reproduces binary64 behaviour and is useful to
see where conditioning bites.  ``extended`` (the default) raises the
decimal precision with the truncation size, because the bimoment matrix
behaves like a Hankel matrix whose condition number grows geometrically.
"""

import os

import mpmath

from .errors import ConfigInvalid

ENV_VAR = "BIMATRIX_PRECISION"
MODES = ("double", "extended")


def precision_mode(mode=None):
    """Return the active precision mode, reading ``BIMATRIX_PRECISION``."""
    if mode is None:
        mode = os.environ.get(ENV_VAR, "extended")
    mode = str(mode).strip().lower()
    if mode not in MODES:
        raise ConfigInvalid(f"{ENV_VAR} must be one of {MODES}, got {mode!r}")
    return mode


def working_dps(M, mode=None):
    """Decimal digits used for a truncation of size ``M``.

    The value is rounded up to a multiple of 20 so that quadrature node
    tables can be cached across nearby sizes.
    """
    if precision_mode(mode) == "double":
        return 15
    dps = 40 + 2 * int(M)
    return 20 * ((dps + 19) // 20)


def make_context(dps):
    """Fresh mpmath context; contexts are never shared between calls."""
    ctx = mpmath.MPContext()
    ctx.dps = int(dps)
    return ctx
