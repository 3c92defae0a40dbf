"""Discretised real-form linearisation ``J L(omega)`` about a solitary wave.

Vectors are stored component-major: index ``c * M + i`` holds component ``c``
of the real field at node ``i``.  ``L = D_m - omega - V(x)`` where ``V`` is
the pointwise Jacobian of the nonlinear term.  On stretched grids ``L`` is
self-adjoint for the quadrature-weighted inner product rather than the plain
dot product.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GridMismatch, ParityDefect
from .grid import Grid, differentiation_matrix  # noqa: F401  (re-exported)
from .model import ALPHA4, BETA4, J4, ModelSpec, nonlinear_jacobian
from .profile import WaveProfile

PARITY_TOL = 1e-10


@dataclass(frozen=True)
class LinearizedOperator:
    model: ModelSpec
    omega: float
    grid: Grid
    A: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)

    @property
    def band_edges(self) -> tuple[float, float, float, float]:
        """Imaginary parts where the four essential-spectrum rays start."""
        lo = self.model.m - abs(self.omega)
        hi = self.model.m + abs(self.omega)
        return (-hi, -lo, lo, hi)

    @property
    def gap_threshold(self) -> float:
        return self.model.m - abs(self.omega)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def apply(self, field4) -> np.ndarray:
        """``J L`` applied to a ``(4, M)`` field; returns ``(4, M)``."""
        return (self.A @ np.asarray(field4).ravel()).reshape(4, -1)

    def apply_L(self, field4) -> np.ndarray:
        return (self.S @ np.asarray(field4).ravel()).reshape(4, -1)

    def weighted_symmetry_defect(self) -> float:
        W = np.tile(self.grid.weights, 4)
        WS = W[:, None] * self.S
        return float(np.abs(WS - WS.T).max() / self.grid.weights.max())


def potential_blocks(model: ModelSpec, profile: WaveProfile) -> np.ndarray:
    """Pointwise 4x4 Jacobians along the profile, shape ``(M, 4, 4)``."""
    return nonlinear_jacobian(model, profile.field.T)


def assemble_L(model: ModelSpec, profile: WaveProfile, grid: Grid | None = None) -> np.ndarray:
    """The self-adjoint part ``L = D_m - omega - V`` as a ``(4M, 4M)`` matrix."""
    grid = profile.grid if grid is None else grid
    if not grid.same_as(profile.grid):
        raise GridMismatch("profile was not computed on the operator grid")
    M = grid.M
    D = grid.D
    S = np.kron(J4 @ ALPHA4, D)
    S += np.kron(model.m * BETA4 - profile.omega * np.eye(4), np.eye(M))
    V = potential_blocks(model, profile)
    idx = np.arange(M)
    for a in range(4):
        for b in range(4):
            S[a * M + idx, b * M + idx] -= V[:, a, b]
    return S


def assemble_JL(model: ModelSpec, profile: WaveProfile, grid: Grid | None = None) -> LinearizedOperator:
    grid = profile.grid if grid is None else grid
    S = assemble_L(model, profile, grid)
    M = grid.M
    A = np.empty_like(S)
    # J is a signed permutation of the component blocks
    for r in range(4):
        c = int(np.flatnonzero(J4[r])[0])
        A[r * M:(r + 1) * M] = J4[r, c] * S[c * M:(c + 1) * M]
    return LinearizedOperator(model, float(profile.omega), grid, A, S)


def parity_signs(block: str) -> np.ndarray:
    """Reflection sign per component: the parity operator is ``beta`` combined
    with ``x -> -x``; the even class contains the profile itself."""
    if block == "even":
        return np.diag(BETA4).copy()
    if block == "odd":
        return -np.diag(BETA4)
    raise ValueError(block)


def profile_parity_defect(profile: WaveProfile) -> float:
    v, u = profile.v, profile.u
    scale = max(profile.amplitude, 1e-300)
    return float(max(np.abs(v - v[::-1]).max(), np.abs(u + u[::-1]).max()) / scale)


def _parity_index(M: int, block: str):
    """Row/column bookkeeping for one parity block.

    Returns the kept indices (positive half, plus the centre node for
    components that are even in ``x``), their mirror images and the
    reflection sign of each kept index.
    """
    half = M // 2
    odd = M % 2
    keep, mirror, sign = [], [], []
    for c, sgn in enumerate(parity_signs(block)):
        start = half if (odd and sgn > 0) else half + odd
        j = np.arange(start, M)
        keep.append(c * M + j)
        mirror.append(c * M + (M - 1 - j))
        sign.append(np.full(j.size, sgn))
    return np.concatenate(keep), np.concatenate(mirror), np.concatenate(sign)


def parity_decompose(op: LinearizedOperator, profile: WaveProfile | None = None):
    """Restrict ``J L`` to the two parity-invariant subspaces.

    Each block acts on the nodal values with ``x >= 0`` of the four components
    (the value at ``x = 0`` is dropped for components that are odd in ``x``).
    The two blocks have sizes summing to ``4M`` and their spectra together
    give the spectrum of ``op.A``.
    """
    if profile is not None:
        defect = profile_parity_defect(profile)
        if defect > PARITY_TOL:
            raise ParityDefect(f"profile parity defect {defect:.3g} exceeds {PARITY_TOL}")
    M = op.grid.M
    blocks = []
    for name in ("even", "odd"):
        keep, mirror, sign = _parity_index(M, name)
        rows = op.A[keep]
        B = rows[:, keep] + rows[:, mirror] * sign[None, :]
        centre = keep == mirror
        B[:, centre] = rows[:, keep[centre]]
        blocks.append(B)
    return blocks[0], blocks[1]


def restrict_field(field4, block: str) -> np.ndarray:
    """Coordinates of a ``(4, M)`` field in the reduced space of ``block``."""
    field4 = np.asarray(field4)
    keep, _, _ = _parity_index(field4.shape[1], block)
    return field4.ravel()[keep]


def expand_field(coords, M: int, block: str) -> np.ndarray:
    """Inverse of :func:`restrict_field` for a vector in the block subspace."""
    keep, mirror, sign = _parity_index(M, block)
    out = np.zeros(4 * M, dtype=np.result_type(coords, float))
    out[mirror] = sign * coords
    out[keep] = coords
    return out.reshape(4, M)


def dump_operator(op: LinearizedOperator, path) -> Path:
    """Row-major little-endian float64 matrix preceded by a one-line JSON header."""
    path = Path(path)
    header = {
        "format": "nldstab-operator-v1",
        "model": {"family": op.model.family.value, "k": op.model.k, "m": op.model.m},
        "omega": op.omega,
        "grid": {"R": op.grid.R, "M": op.grid.M, "scheme": op.grid.scheme.value,
                 "stretch": op.grid.stretch},
        "shape": list(op.A.shape),
        "dtype": "<f8",
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(np.ascontiguousarray(op.A, dtype="<f8").tobytes(order="C"))
    return path


def load_operator_matrix(path) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        data = np.frombuffer(fh.read(), dtype="<f8")
    return header, data.reshape(header["shape"])
