"""Dense collocation system ``H W = T`` for a problem, a network and a point set."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .features import FeatureNetwork, eval_features
from .problems import PdeProblem, apply_operator
from .sampling import CollocationSet

__all__ = [
    "AssemblyError",
    "RowBlocks",
    "LinearSystem",
    "assemble",
    "condition_report",
    "save_system",
    "load_system",
]


class AssemblyError(ValueError):
    """Raised when a coefficient or data value makes a row non-finite."""


@dataclass(frozen=True)
class RowBlocks:
    interior: slice
    spatial: slice
    temporal: slice

    def items(self):
        return (("interior", self.interior), ("spatial", self.spatial), ("temporal", self.temporal))


@dataclass(frozen=True)
class LinearSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    row_blocks: RowBlocks
    beta1: float = 1.0
    beta2: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def block_scale(self, name: str) -> float:
        return {"interior": 1.0, "spatial": self.beta1, "temporal": self.beta2}[name]


def assemble(
    problem: PdeProblem,
    net: FeatureNetwork,
    colloc: CollocationSet,
    backend=None,
    beta1: float = 1.0,
    beta2: float = 1.0,
) -> LinearSystem:
    """Stack interior, spatial-boundary and initial-time rows, in that order.

    Boundary rows are scaled by ``beta1`` and initial rows by ``beta2`` (rows
    and right-hand side alike). Monte Carlo boundary data is drawn here once.
    """
    if not (beta1 > 0 and beta2 > 0):
        raise ValueError(f"row scalings must be positive, got beta1={beta1}, beta2={beta2}")
    n_int, n_sb, n_tb = colloc.counts
    n_rows = n_int + n_sb + n_tb
    blocks = RowBlocks(
        slice(0, n_int), slice(n_int, n_int + n_sb), slice(n_int + n_sb, n_rows)
    )
    H = np.empty((n_rows, net.width))
    T = np.empty(n_rows)

    if n_int:
        H[blocks.interior] = apply_operator(problem, net, colloc.interior, backend)
        T[blocks.interior] = problem.rhs(problem.check_points(colloc.interior))
    if n_sb:
        P = problem.check_points(colloc.spatial_boundary)
        H[blocks.spatial] = beta1 * eval_features(net, problem.network_inputs(P))
        T[blocks.spatial] = beta1 * problem.boundary_values(P)
    if n_tb:
        P = problem.check_points(colloc.temporal_boundary)
        H[blocks.temporal] = beta2 * eval_features(net, problem.network_inputs(P))
        T[blocks.temporal] = beta2 * problem.initial_values(P)

    bad = ~(np.isfinite(T) & np.all(np.isfinite(H), axis=1))
    if bad.any():
        row = int(np.argmax(bad))
        block = next(name for name, sl in blocks.items() if sl.start <= row < sl.stop)
        raise AssemblyError(f"non-finite entry in row {row} ({block} block)")
    return LinearSystem(H, T, blocks, float(beta1), float(beta2))


def condition_report(system: LinearSystem, rcond: float | None = None) -> dict:
    """Row-norm ranges per block plus singular-value diagnostics of ``H``."""
    H = system.matrix
    report: dict = {"rows": H.shape[0], "cols": H.shape[1]}
    norms = np.linalg.norm(H, axis=1)
    for name, sl in system.row_blocks.items():
        block = norms[sl]
        report[f"{name}_row_norm_min"] = float(block.min()) if block.size else None
        report[f"{name}_row_norm_max"] = float(block.max()) if block.size else None
    s = scipy.linalg.svdvals(H) if H.size else np.empty(0)
    if rcond is None:
        rcond = np.finfo(float).eps * max(H.shape)
    smax = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > rcond * smax)) if smax > 0 else 0
    smin = float(s[-1]) if s.size else 0.0
    report.update(
        singular_value_max=smax,
        singular_value_min=smin,
        rank=rank,
        condition_number=(smax / smin) if smin > 0 else float("inf"),
    )
    return report


# Binary layout: two little-endian uint64 (rows, cols), then H as row-major
# little-endian float64, then T as rows little-endian float64.
_HEADER = struct.Struct("<QQ")


def save_system(system: LinearSystem, path) -> None:
    H = np.ascontiguousarray(system.matrix, dtype="<f8")
    with open(Path(path), "wb") as fh:
        fh.write(_HEADER.pack(*H.shape))
        fh.write(H.tobytes(order="C"))
        fh.write(np.ascontiguousarray(system.rhs, dtype="<f8").tobytes())


def load_system(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back ``(H, T)`` written by :func:`save_system`."""
    with open(Path(path), "rb") as fh:
        rows, cols = _HEADER.unpack(fh.read(_HEADER.size))
        H = np.frombuffer(fh.read(8 * rows * cols), dtype="<f8").reshape(rows, cols)
        T = np.frombuffer(fh.read(8 * rows), dtype="<f8")
    if T.size != rows:
        raise ValueError(f"truncated system file {path}")
    return H.astype(float), T.astype(float)
