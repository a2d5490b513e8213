"""Dense minimal-norm least squares with rank diagnostics.

Thin wrapper around LAPACK's rank-revealing drivers.  Both exposed drivers
return the minimal-norm solution of min ||A w - b||_2: ``gelsd`` (SVD,
divide and conquer) also reports singular values; ``gelsy`` (complete
orthogonal factorization) is roughly twice as fast on the very large
stacked systems and reports only the numerical rank.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SolverError

# beyond this min(N, M) the SVD driver would dominate the runtime
_AUTO_GELSY_DIM = 6000
_RESID_CHUNK = 512


@dataclass(frozen=True)
class LstsqResult:
    """Minimal-norm solution with conditioning diagnostics.

    ``singular_value_extremes`` holds (sigma_max, sigma_min_retained) of
    the retained spectrum; the QR-based driver does not compute singular
    values and reports (nan, nan).
    """

    weights: np.ndarray
    residual_norm: float
    rank: int
    singular_value_extremes: tuple


def solve_min_norm(A, b, rcond=None, driver=None, overwrite_a=False):
    """Solve min ||A w - b||_2, returning the minimal-norm ``w``.

    Parameters
    ----------
    A : ndarray, shape (N, M)
    b : ndarray, shape (N,)
    rcond : float, optional
        Relative truncation threshold; singular values (or pivoted
        diagonal entries) below ``rcond * sigma_max`` are discarded.
        Defaults to machine precision times max(N, M).
    driver : {None, "gelsd", "gelsy"}
        None picks gelsd, switching to gelsy for very large systems.
    overwrite_a : bool
        Allow the factorization to destroy ``A``.  The residual is then
        evaluated from a temporary on-disk copy, which keeps peak memory
        near a single copy of the matrix.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"A must be a matrix, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    if not np.isfinite(A).all():
        raise ValueError("A contains non-finite entries")
    if not np.isfinite(b).all():
        raise ValueError("b contains non-finite entries")
    if driver is None:
        driver = "gelsd" if min(A.shape) <= _AUTO_GELSY_DIM else "gelsy"
    if driver not in ("gelsd", "gelsy"):
        raise ValueError(f"unknown driver {driver!r}")

    b_in = b.copy()  # LAPACK may scribble on the right-hand side
    spill = None
    if overwrite_a:
        fd, spill = tempfile.mkstemp(suffix=".npy", prefix="msrbf-lstsq-")
        os.close(fd)
        np.save(spill, A)
    try:
        w, _, rank, s = scipy.linalg.lstsq(
            A,
            b_in,
            cond=rcond,
            lapack_driver=driver,
            overwrite_a=overwrite_a,
            overwrite_b=True,
            check_finite=False,
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"least-squares driver {driver} failed: {exc}") from exc
    finally:
        if spill is not None and not os.path.exists(spill):
            spill = None

    try:
        if spill is not None:
            src = np.load(spill, mmap_mode="r")
            sq = 0.0
            for lo in range(0, src.shape[0], _RESID_CHUNK):
                hi = min(lo + _RESID_CHUNK, src.shape[0])
                r = np.asarray(src[lo:hi]) @ w - b[lo:hi]
                sq += float(r @ r)
            del src
            residual = float(np.sqrt(sq))
        else:
            residual = float(np.linalg.norm(A @ w - b))
    finally:
        if spill is not None:
            os.unlink(spill)

    if s is not None and s.size:
        extremes = (float(s[0]), float(s[rank - 1]) if rank > 0 else float("nan"))
    else:
        extremes = (float("nan"), float("nan"))
    if not np.isfinite(w).all():
        raise SolverError("least-squares solution contains non-finite entries")
    return LstsqResult(w, residual, int(rank), extremes)
