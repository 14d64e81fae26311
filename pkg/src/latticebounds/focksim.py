"""Brute-force oracle: exact Heisenberg dynamics of a few coupled
oscillators in a truncated number-state basis.

Systems of N <= 4 sites (open chain or ring) are represented on the tensor
product of per-site truncated oscillator bases.  Small systems use dense
eigendecomposition throughout; for the largest truncations the propagator
is applied matrix-free (Krylov expm_multiply), so no dense matrix beyond
the observables themselves is ever formed.

Commutator norms are measured on the span of the lowest-lying energy
eigenvectors.  The truncated propagator is only faithful on states well
below the truncation edge; the restricted norm converges as the per-site
dimension grows, while the norm over the full truncated space is dominated
by edge artifacts and never does.  For the harmonic model the commutator
of two Weyl operators is a scalar multiple of a unitary, so the restricted
norm equals the true norm up to truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh, expm_multiply

from .torus import Couplings
from .anharmonic import PerturbationSpec

__all__ = ["FockSystem", "build_system", "evolve_observable",
           "commutator_front", "truncation_gate", "ring_distance"]

MAX_DENSE_DIM = 20736
DENSE_EIG_DIM = 2100  # above this, propagation goes matrix-free


def ring_distance(n_sites: int, i: int, j: int) -> int:
    d = abs(i - j) % n_sites
    return min(d, n_sites - d)


def _local_ops(n: int, omega0: float):
    """Truncated q and p with [q, p] = i away from the truncation edge
    (mass 1/2 convention): q = (b + b*)/sqrt(2 w0), p = i sqrt(w0/2) (b* - b)."""
    s = np.sqrt(np.arange(1, n))
    b = np.diag(s, 1)
    q = (b + b.T) / np.sqrt(2.0 * omega0)
    p = 1j * np.sqrt(omega0 / 2.0) * (b.T - b)
    return q, p


def _matrix_function(h: np.ndarray, fn) -> np.ndarray:
    """fn applied to a Hermitian matrix through its spectral decomposition."""
    w, v = np.linalg.eigh(h)
    return (v * fn(w)) @ v.conj().T


class FockSystem:
    """N-site oscillator system in a truncated per-site number basis."""

    def __init__(self, n_sites: int, trunc: int, couplings: Couplings,
                 geometry: str = "ring",
                 perturbation: PerturbationSpec | None = None):
        if n_sites < 1 or n_sites > 4:
            raise ValueError("the oracle supports 1 to 4 sites")
        if geometry not in ("ring", "chain"):
            raise ValueError("geometry must be 'ring' or 'chain'")
        if couplings.nu != 1:
            raise ValueError("the oracle is one-dimensional (nu = 1)")
        if trunc < 3:
            raise ValueError("truncation must be at least 3")
        dim = trunc ** n_sites
        if dim > MAX_DENSE_DIM:
            raise ValueError(
                f"dimension {dim} exceeds the dense-feasibility cap "
                f"{MAX_DENSE_DIM}")
        self.n_sites = n_sites
        self.trunc = trunc
        self.dim = dim
        self.couplings = couplings
        self.geometry = geometry
        self.perturbation = perturbation or PerturbationSpec.zero()
        omega0 = couplings.omega if couplings.omega > 0 else couplings.c_max
        self.omega0 = omega0
        self.q1, self.p1 = _local_ops(trunc, omega0)
        self._assemble_local_terms()
        self._eig = None
        self._dense_h = None
        self._low_basis: dict[int, np.ndarray] = {}

    # -- assembly -----------------------------------------------------

    def bonds(self) -> list[tuple[int, int]]:
        if self.n_sites == 1:
            return []
        if self.geometry == "chain":
            return [(x, x + 1) for x in range(self.n_sites - 1)]
        return [(x, (x + 1) % self.n_sites) for x in range(self.n_sites)]

    def _assemble_local_terms(self):
        n = self.trunc
        c = self.couplings
        lam = c.lam[0]
        pert = self.perturbation
        onsite = self.p1 @ self.p1 + c.omega**2 * (self.q1 @ self.q1)
        if pert.potential is not None and pert.tag == "site":
            onsite = onsite + _matrix_function(self.q1, pert.potential)
        if pert.potential is not None and pert.tag == "site_p":
            onsite = onsite + _matrix_function(self.p1, pert.potential)
        self._onsite = onsite
        # lam (q_i - q_j)^2 on a pair, plus an optional bond potential
        eye = np.eye(n)
        dq = np.kron(self.q1, eye) - np.kron(eye, self.q1)
        bond = lam * (dq @ dq)
        if pert.potential is not None and pert.tag == "bond":
            bond = bond + _matrix_function(dq, pert.potential)
        self._bond = bond
        if not np.allclose(onsite, onsite.conj().T) \
                or not np.allclose(bond, bond.conj().T):
            raise AssertionError("non-Hermitian assembly")

    # -- tensor application (vectors or column blocks) -------------------

    def _apply_one_site(self, op: np.ndarray, site: int,
                        v: np.ndarray) -> np.ndarray:
        n, N = self.trunc, self.n_sites
        batch = v.shape[1:]
        t = v.reshape((n,) * N + batch)
        t = np.moveaxis(t, site, 0)
        moved = t.shape
        t = op @ t.reshape(n, -1)
        t = np.moveaxis(t.reshape(moved), 0, site)
        return t.reshape((self.dim,) + batch)

    def _apply_two_site(self, op2: np.ndarray, i: int, j: int,
                        v: np.ndarray) -> np.ndarray:
        n, N = self.trunc, self.n_sites
        batch = v.shape[1:]
        t = v.reshape((n,) * N + batch)
        t = np.moveaxis(t, (i, j), (0, 1))
        moved = t.shape
        t = op2 @ t.reshape(n * n, -1)
        t = np.moveaxis(t.reshape((n, n) + moved[2:]), (0, 1), (i, j))
        return t.reshape((self.dim,) + batch)

    def apply_h(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = np.zeros(v.shape, dtype=complex)
        for x in range(self.n_sites):
            out += self._apply_one_site(self._onsite, x, v)
        for i, j in self.bonds():
            out += self._apply_two_site(self._bond, i, j, v)
        return out

    def hamiltonian(self) -> np.ndarray:
        """Dense Hamiltonian (only assembled on demand)."""
        if self._dense_h is None:
            self._dense_h = self.apply_h(np.eye(self.dim))
        return self._dense_h

    def h_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.apply_h,
                              rmatvec=self.apply_h, matmat=self.apply_h,
                              dtype=complex)

    def h_trace(self) -> float:
        n = self.trunc
        tr = self.n_sites * np.trace(self._onsite).real * n ** (self.n_sites - 1)
        if self.n_sites >= 2:
            tr += len(self.bonds()) * np.trace(self._bond).real \
                * n ** (self.n_sites - 2)
        return float(tr)

    # -- spectra and states --------------------------------------------

    def eigensystem(self):
        """Cached dense eigendecomposition (small dimensions only)."""
        if self._eig is None:
            if self.dim > DENSE_EIG_DIM:
                raise ValueError(
                    f"dense eigendecomposition disabled at dim {self.dim}; "
                    "use the matrix-free paths")
            h = self.hamiltonian()
            self._eig = np.linalg.eigh(h)
        return self._eig

    def eigenvalues(self, k: int | None = None) -> np.ndarray:
        if self.dim <= DENSE_EIG_DIM:
            w = self.eigensystem()[0]
            return w if k is None else w[:k]
        if k is None:
            raise ValueError("full spectrum needs the dense path")
        vals = eigsh(self.h_operator(), k=k, which="SA",
                     return_eigenvectors=False)
        return np.sort(vals)

    def low_energy_basis(self, k: int) -> np.ndarray:
        """Orthonormal columns spanning the k lowest energy eigenvectors."""
        k = min(k, self.dim if self.dim <= DENSE_EIG_DIM else self.dim - 2)
        if k not in self._low_basis:
            if self.dim <= DENSE_EIG_DIM:
                _, v = self.eigensystem()
                basis = v[:, :k]
            else:
                w, v = eigsh(self.h_operator(), k=k, which="SA",
                             maxiter=50 * self.dim)
                basis = v[:, np.argsort(w)]
            self._low_basis[k] = np.ascontiguousarray(basis)
        return self._low_basis[k]

    def ground_state(self) -> tuple[float, np.ndarray]:
        if self.dim <= DENSE_EIG_DIM:
            w, v = self.eigensystem()
            return float(w[0]), v[:, 0]
        w, v = eigsh(self.h_operator(), k=1, which="SA")
        return float(w[0]), v[:, 0]

    # -- Weyl operators -------------------------------------------------

    def weyl_local_factors(self, f: np.ndarray) -> list[np.ndarray]:
        """Per-site unitaries of W(f) = prod_x exp(i(q_x Re f_x + p_x Im f_x))."""
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.n_sites,):
            raise ValueError("f must assign one amplitude per site")
        facs = []
        for x in range(self.n_sites):
            gen = self.q1 * f[x].real + self.p1 * f[x].imag
            facs.append(_matrix_function(gen, lambda w: np.exp(1j * w)))
        return facs

    def weyl_matrix(self, f: np.ndarray) -> np.ndarray:
        facs = self.weyl_local_factors(f)
        out = facs[0]
        for m in facs[1:]:
            out = np.kron(out, m)
        return out

    def apply_weyl(self, f_or_factors, v: np.ndarray,
                   adjoint: bool = False) -> np.ndarray:
        facs = (self.weyl_local_factors(f_or_factors)
                if isinstance(f_or_factors, np.ndarray) else f_or_factors)
        for x, m in enumerate(facs):
            v = self._apply_one_site(m.conj().T if adjoint else m, x, v)
        return v

    # -- dynamics --------------------------------------------------------

    def propagate(self, v: np.ndarray, t: float) -> np.ndarray:
        """exp(-i t H) v for a vector or column block."""
        if self.dim <= DENSE_EIG_DIM:
            w, vecs = self.eigensystem()
            coef = vecs.conj().T @ v
            phase = np.exp(-1j * t * w)
            return vecs @ (phase[:, None] * coef if coef.ndim == 2
                           else phase * coef)
        if t == 0.0:
            return v.astype(complex)
        return expm_multiply(-1j * t * self.h_operator(), v.astype(complex),
                             traceA=-1j * t * self.h_trace())

    def heisenberg_apply(self, f_factors, t: float,
                         v: np.ndarray) -> np.ndarray:
        """tau_t(W(f)) v = e^{itH} W(f) e^{-itH} v."""
        v = self.propagate(v, t)
        v = self.apply_weyl(f_factors, v)
        return self.propagate(v, -t)

    def commutator_norm(self, f: np.ndarray, g: np.ndarray, t: float,
                        n_low: int = 20) -> float:
        """Norm of [tau_t(W(f)), W(g)] restricted to the lowest n_low
        energy eigenvectors (the converged sector of the truncation)."""
        ff = self.weyl_local_factors(np.asarray(f, dtype=complex))
        gf = self.weyl_local_factors(np.asarray(g, dtype=complex))
        basis = self.low_energy_basis(n_low)
        a = self.heisenberg_apply(ff, t, self.apply_weyl(gf, basis))
        b = self.apply_weyl(gf, self.heisenberg_apply(ff, t, basis))
        return float(np.linalg.norm(a - b, 2))


def build_system(n_sites: int, trunc: int, couplings: Couplings,
                 geometry: str = "ring",
                 perturbation: PerturbationSpec | None = None) -> FockSystem:
    return FockSystem(n_sites, trunc, couplings, geometry, perturbation)


def evolve_observable(sys: FockSystem, a: np.ndarray, t: float) -> np.ndarray:
    """Dense Heisenberg evolution e^{itH} A e^{-itH} via eigendecomposition."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (sys.dim, sys.dim):
        raise ValueError("observable has the wrong dimension")
    w, v = sys.eigensystem()
    at = v.conj().T @ a @ v
    phases = np.exp(1j * t * w)
    at = (phases[:, None] * at) * np.conj(phases)[None, :]
    return v @ at @ v.conj().T


@dataclass
class FrontSeries:
    tgrid: np.ndarray
    norms: np.ndarray
    fitted_slope: float
    fit_residual_rel: float


def commutator_front(sys: FockSystem, f: np.ndarray, g: np.ndarray,
                     tgrid, n_low: int = 20) -> FrontSeries:
    """Commutator norms over a time grid for disjointly supported f, g,
    with a linear short-time fit through the origin."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if np.any((f != 0) & (g != 0)):
        raise ValueError("supports of f and g must be disjoint")
    tgrid = np.asarray(tgrid, dtype=float)
    norms = np.array([sys.commutator_norm(f, g, t, n_low=n_low)
                      for t in tgrid])
    nz = tgrid != 0
    if np.count_nonzero(nz) >= 2:
        slope = float(np.sum(tgrid[nz] * norms[nz])
                      / np.sum(tgrid[nz] ** 2))
        resid = norms[nz] - slope * tgrid[nz]
        rel = float(np.linalg.norm(resid) / max(np.linalg.norm(norms[nz]),
                                                1e-300))
    else:
        slope, rel = float("nan"), float("nan")
    return FrontSeries(tgrid=tgrid, norms=norms, fitted_slope=slope,
                       fit_residual_rel=rel)


def truncation_gate(sys: FockSystem, f: np.ndarray, g: np.ndarray,
                    tgrid, dn: int = 4, tol: float = 1e-4,
                    n_low: int = 20) -> tuple[np.ndarray, float, bool]:
    """Convergence gate: recompute the commutator norms with the per-site
    dimension raised by dn and report (refined norms, max change, pass)."""
    bigger = FockSystem(sys.n_sites, sys.trunc + dn, sys.couplings,
                        sys.geometry, sys.perturbation)
    tgrid = np.asarray(tgrid, dtype=float)
    small = np.array([sys.commutator_norm(f, g, t, n_low=n_low)
                      for t in tgrid])
    big = np.array([bigger.commutator_norm(f, g, t, n_low=n_low)
                    for t in tgrid])
    change = float(np.max(np.abs(small - big))) if len(tgrid) else 0.0
    return big, change, change < tol
