"""Periodic cubic lattice geometry, torus metric, and the dispersion relation.

The lattice is the cube (-L, L]^nu of integer points with periodic boundary
conditions; its dual momentum grid is {x*pi/L : x in lattice}, contained in
(-pi, pi]^nu.  Every other module indexes fields through the single site
enumeration defined here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = ["TorusLattice", "Couplings", "dispersion"]


@dataclass(frozen=True)
class Couplings:
    """On-site frequency omega >= 0 and per-axis bond couplings lambda_j >= 0."""

    omega: float
    lam: tuple[float, ...]

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if any(l < 0 for l in self.lam):
            raise ValueError("all bond couplings must be >= 0")
        if self.omega == 0 and all(l == 0 for l in self.lam):
            raise ValueError("couplings must not all vanish")

    @property
    def nu(self) -> int:
        return len(self.lam)

    @property
    def c_max(self) -> float:
        """Maximal mode frequency (omega^2 + 4*sum(lambda))^(1/2)."""
        return float(np.sqrt(self.omega**2 + 4.0 * sum(self.lam)))


class TorusLattice:
    """Finite torus (-L, L]^nu with |sites| = (2L)^nu.

    Sites are enumerated row-major over coordinates -L+1, ..., L per axis.
    The dual grid is index-aligned: dual[i] = sites[i] * pi / L.
    """

    def __init__(self, nu: int, L: int):
        if nu < 1 or L < 1:
            raise ValueError("nu and L must be positive integers")
        self.nu = int(nu)
        self.L = int(L)
        self.side = 2 * self.L
        coords = range(-self.L + 1, self.L + 1)
        self.sites = np.array(list(itertools.product(coords, repeat=self.nu)),
                              dtype=np.int64)
        self.dual = self.sites * (np.pi / self.L)
        self.sites.flags.writeable = False
        self.dual.flags.writeable = False

    @property
    def n_sites(self) -> int:
        return self.side ** self.nu

    def index(self, x) -> int:
        """Flat index of site x under the canonical row-major enumeration."""
        x = np.asarray(x, dtype=np.int64)
        self._check_site(x)
        idx = 0
        for c in x:
            idx = idx * self.side + (int(c) + self.L - 1)
        return idx

    def _check_site(self, x):
        x = np.atleast_2d(x)
        if x.shape[-1] != self.nu:
            raise ValueError(f"site must have {self.nu} coordinates")
        if np.any(x <= -self.L) or np.any(x > self.L):
            raise ValueError(f"coordinates must lie in (-{self.L}, {self.L}]")

    def wrap(self, x):
        """Map integer coordinates back into (-L, L] componentwise."""
        x = np.asarray(x, dtype=np.int64)
        return (x + self.L - 1) % self.side - self.L + 1

    def distance(self, x, y) -> int:
        """Torus metric: sum_j min_eta |x_j - y_j + 2L*eta|."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        self._check_site(x)
        self._check_site(y)
        d = np.abs(x - y) % self.side
        return int(np.sum(np.minimum(d, self.side - d)))

    def distances_from(self, x) -> np.ndarray:
        """Torus distances from x to every site, in enumeration order."""
        x = np.asarray(x, dtype=np.int64)
        self._check_site(x)
        d = np.abs(self.sites - x) % self.side
        return np.sum(np.minimum(d, self.side - d), axis=1)

    def abs_l1(self) -> np.ndarray:
        """Torus distance |x| from the origin for every site."""
        return self.distances_from(np.zeros(self.nu, dtype=np.int64))

    def neg_indices(self) -> np.ndarray:
        """Index of -x for each site index.

        Uses the convention that the boundary coordinate L maps to itself
        (exact index arithmetic, no floating point).
        """
        neg = self.wrap(-self.sites)
        return self._indices_of(neg)

    def _indices_of(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.int64)
        idx = np.zeros(len(pts), dtype=np.int64)
        for j in range(self.nu):
            idx = idx * self.side + (pts[:, j] + self.L - 1)
        return idx

    def to_grid(self, values: np.ndarray) -> np.ndarray:
        """Reshape a flat site-indexed array onto the FFT grid (x mod 2L)."""
        grid = np.empty((self.side,) * self.nu, dtype=values.dtype)
        mods = tuple(self.sites[:, j] % self.side for j in range(self.nu))
        grid[mods] = values
        return grid

    def from_grid(self, grid: np.ndarray) -> np.ndarray:
        """Inverse of to_grid."""
        mods = tuple(self.sites[:, j] % self.side for j in range(self.nu))
        return grid[mods]

    def __eq__(self, other):
        return (isinstance(other, TorusLattice)
                and self.nu == other.nu and self.L == other.L)

    def __hash__(self):
        return hash((self.nu, self.L))

    def __repr__(self):
        return f"TorusLattice(nu={self.nu}, L={self.L})"


def dispersion(c: Couplings, k) -> np.ndarray:
    """Mode frequency gamma(k) = sqrt(omega^2 + 4 sum_j lambda_j sin^2(k_j/2)).

    k may be a single dual point (shape (nu,)) or an array of them.
    Even in each component; maximum over the dual grid is c.c_max.
    """
    k = np.atleast_2d(np.asarray(k, dtype=float))
    if k.shape[-1] != c.nu:
        raise ValueError("dual point dimension does not match couplings")
    lam = np.asarray(c.lam)
    g = np.sqrt(c.omega**2 + 4.0 * np.sum(lam * np.sin(k / 2.0) ** 2, axis=-1))
    return g if g.size > 1 else float(g[0])
