"""Minimum-norm least squares, the output-weight training step."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import LinearSystem

__all__ = ["SolveMethod", "SolveOptions", "SolveReport", "solve_min_norm", "pinv_solve", "residual_stats"]


class SolveMethod(str, enum.Enum):
    SVD = "svd"
    QR = "qr"


@dataclass(frozen=True)
class SolveOptions:
    method: SolveMethod = SolveMethod.SVD
    rcond: float = 1e-14

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", SolveMethod(str(getattr(self.method, "value", self.method)).lower()))
        except ValueError:
            raise ValueError(f"unknown solver method {self.method!r}; expected 'svd' or 'qr'") from None
        if not 0.0 <= self.rcond < 1.0:
            raise ValueError(f"rcond must lie in [0, 1), got {self.rcond}")


@dataclass(frozen=True)
class SolveReport:
    method: str
    residual_norm: float
    relative_residual: float
    effective_rank: int
    singular_value_max: float | None
    singular_value_min_kept: float | None
    wall_time: float


def pinv_solve(H: np.ndarray, T: np.ndarray, rcond: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """``H^+ T`` via a truncated SVD; returns the weights and the singular values.

    Tall systems are first reduced with a Householder QR of ``[H | T]``. Since
    ``H = Q R`` with orthonormal ``Q``, ``H^+ T = R^+ Q^T T`` exactly, and the
    SVD then runs on the small square factor only.
    """
    m, n = H.shape
    if m >= 2 * n:
        R = scipy.linalg.qr(np.column_stack([H, T]), mode="r", overwrite_a=True, check_finite=False)[0]
        Hr, Tr = R[:n, :n], R[:n, n]
    else:
        Hr, Tr = H, T
    U, s, Vt = scipy.linalg.svd(Hr, full_matrices=False, check_finite=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(n), s
    keep = s > rcond * s[0]
    coef = (U[:, keep].T @ Tr) / s[keep]
    return Vt[keep].T @ coef, s


def solve_min_norm(system: LinearSystem, options: SolveOptions | None = None):
    """Least-squares weights for ``system``; returns ``(weights, SolveReport)``.

    The SVD method gives the minimum-norm minimizer, discarding singular
    values below ``rcond * s_max``. The QR method (LAPACK ``gelsy``, column
    pivoting) matches it on full-rank systems and is offered for parity.
    """
    options = options or SolveOptions()
    H, T = system.matrix, system.rhs
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(T))):
        raise ValueError("cannot solve a system with non-finite entries")
    start = time.perf_counter()
    if options.method is SolveMethod.SVD:
        W, s = pinv_solve(H, T, options.rcond)
        kept = s[s > options.rcond * s[0]] if s.size and s[0] > 0 else s[:0]
        rank = int(kept.size)
        smax = float(s[0]) if s.size else None
        smin = float(kept[-1]) if kept.size else None
    else:
        if not np.any(H):
            W, rank = np.zeros(H.shape[1]), 0
        else:
            W, _, rank, _ = scipy.linalg.lstsq(H, T, cond=options.rcond, lapack_driver="gelsy", check_finite=False)
        smax = smin = None
    elapsed = time.perf_counter() - start
    res = float(np.linalg.norm(H @ W - T))
    tnorm = float(np.linalg.norm(T))
    report = SolveReport(
        method=options.method.value,
        residual_norm=res,
        relative_residual=res / tnorm if tnorm > 0 else res,
        effective_rank=int(rank),
        singular_value_max=smax,
        singular_value_min_kept=smin,
        wall_time=elapsed,
    )
    return W, report


def residual_stats(system: LinearSystem, weights) -> dict:
    """Per-block RMS and max residuals, with the beta scaling divided back out."""
    W = np.asarray(weights, dtype=float).reshape(-1)
    if W.shape[0] != system.matrix.shape[1]:
        raise ValueError(f"weights have length {W.shape[0]}, system has {system.matrix.shape[1]} columns")
    r = system.matrix @ W - system.rhs
    stats = {}
    for name, sl in system.row_blocks.items():
        block = r[sl] / system.block_scale(name)
        stats[f"{name}_rms"] = float(np.sqrt(np.mean(block**2))) if block.size else 0.0
        stats[f"{name}_max_abs"] = float(np.max(np.abs(block))) if block.size else 0.0
    stats["max_abs"] = float(np.max(np.abs(r))) if r.size else 0.0
    return stats
