"""Computational grids, differentiation matrices and quadrature weights.

Nodes are cell centred and symmetric about ``x = 0``, so the reflection
``x -> -x`` is the index reversal ``j -> M - 1 - j``; odd ``M`` puts a node
at the origin.  For the Fourier scheme odd ``M`` is preferred: with even
``M`` the Nyquist mode lies in the kernel of the differentiation matrix and
produces a delocalised spurious eigenvalue near each band edge.  An
optional sinh stretching ``x = c sinh(xi / c)`` concentrates nodes in the
core of narrow profiles while still reaching far into the exponential tail;
all derivatives and integrals are taken in the uniform coordinate ``xi``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import toeplitz

from .errors import ParameterError


class Scheme(str, enum.Enum):
    FOURIER = "fourier"
    FD4 = "fd4"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown scheme {value!r}; expected fourier or fd4") from None


@dataclass(frozen=True)
class Grid:
    """Half-width ``R``, ``M`` nodes, scheme, optional stretch scale.

    With ``stretch=None`` the grid is uniform with spacing ``h = 2R/M``.
    """

    R: float
    M: int
    scheme: Scheme = Scheme.FOURIER
    stretch: float | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if int(self.M) != self.M or self.M < 64:
            raise ParameterError(f"grid needs an integer M >= 64, got {self.M}")
        if not self.R > 0:
            raise ParameterError(f"half-width R must be positive, got {self.R}")
        if self.stretch is not None and not self.stretch > 0:
            raise ParameterError("stretch scale must be positive")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "M", int(self.M))
        if self.stretch is not None:
            object.__setattr__(self, "stretch", float(self.stretch))

    @property
    def xi_max(self) -> float:
        if self.stretch is None:
            return self.R
        c = self.stretch
        return c * np.arcsinh(self.R / c)

    @property
    def h(self) -> float:
        """Spacing in the uniform coordinate."""
        return 2.0 * self.xi_max / self.M

    @cached_property
    def xi(self) -> np.ndarray:
        return -self.xi_max + (np.arange(self.M) + 0.5) * self.h

    @cached_property
    def x(self) -> np.ndarray:
        if self.stretch is None:
            return self.xi.copy()
        c = self.stretch
        return c * np.sinh(self.xi / c)

    @cached_property
    def jacobian(self) -> np.ndarray:
        """``dx/dxi`` at the nodes."""
        if self.stretch is None:
            return np.ones(self.M)
        return np.cosh(self.xi / self.stretch)

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal (periodic) quadrature weights in ``x``."""
        return self.h * self.jacobian

    def integrate(self, values, axis=-1):
        return np.tensordot(np.asarray(values), self.weights, axes=([axis], [0]))

    @property
    def center(self) -> int:
        """Index of the first node with ``x >= 0``."""
        return self.M // 2

    @cached_property
    def D(self) -> np.ndarray:
        return differentiation_matrix(self)

    def key(self) -> tuple:
        return (round(self.R, 12), self.M, self.scheme.value,
                None if self.stretch is None else round(self.stretch, 12))

    def same_as(self, other: "Grid") -> bool:
        return self.key() == other.key()


def _fourier_xi(M: int, period: float) -> np.ndarray:
    # periodic spectral differentiation (Trefethen, Spectral Methods in MATLAB)
    n = np.arange(1, M)
    angle = np.pi * n / M
    if M % 2 == 0:
        col = 0.5 * (-1.0) ** n / np.tan(angle)
    else:
        col = 0.5 * (-1.0) ** n / np.sin(angle)
    col = np.concatenate(([0.0], col)) * (2.0 * np.pi / period)
    return toeplitz(col, -col)


def _fd4_xi(M: int, h: float) -> np.ndarray:
    D = np.zeros((M, M))
    stencil = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    for i in range(2, M - 2):
        D[i, i - 2:i + 3] = stencil
    left0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    left1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12.0 * h)
    D[0, :5] = left0
    D[1, :5] = left1
    D[-1, -5:] = -left0[::-1]
    D[-2, -5:] = -left1[::-1]
    return D


def differentiation_matrix(grid: Grid) -> np.ndarray:
    """First-derivative matrix in ``x`` on the grid nodes."""
    if grid.scheme is Scheme.FOURIER:
        D = _fourier_xi(grid.M, 2.0 * grid.xi_max)
    else:
        D = _fd4_xi(grid.M, grid.h)
    if grid.stretch is not None:
        D = D / grid.jacobian[:, None]
    return D


def default_half_width(m: float, omega: float) -> float:
    kappa = np.sqrt(m * m - omega * omega)
    return max(30.0, 30.0 / kappa)


def core_width(model, omega) -> float:
    """Half-width of the profile core, from the closed-form pure-power waves."""
    m, k = model.m, model.k
    kappa = np.sqrt(m * m - omega * omega)
    if model.family.value == "MTM":
        y = np.arccosh(2.0 + omega / m)
    elif omega > 0:
        y = np.arccosh((m + 2.0 * omega) / omega)
    else:
        y = 1.0
    return float(y / (2.0 * k * kappa))


def auto_stretch(model, omega, R) -> float | None:
    """Stretch scale giving ~4x finer spacing per core width than per tail
    decay length; ``None`` when the uniform grid already does that."""
    kappa = np.sqrt(model.m ** 2 - omega ** 2)
    c = 0.25 * core_width(model, omega) * kappa * R
    return None if c >= 0.5 * R else float(c)


def make_grid(model, omega, M=512, scheme="fourier", R=None, stretch="auto") -> Grid:
    """Grid sized for the wave at ``omega``.

    ``stretch="auto"`` picks a sinh stretch from the core width and decay
    rate; ``None`` forces a uniform grid.
    """
    omega = model.check_omega(omega)
    if R is None:
        R = default_half_width(model.m, omega)
    if isinstance(stretch, str):
        if stretch != "auto":
            raise ParameterError(f"stretch must be a positive number, None or 'auto', got {stretch!r}")
        stretch = auto_stretch(model, omega, R)
    return Grid(R=R, M=M, scheme=scheme, stretch=stretch)
