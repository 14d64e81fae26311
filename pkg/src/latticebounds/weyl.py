"""Weyl arguments, their exact harmonic evolution, and the propagation
bound evaluators for the harmonic model.

A Weyl operator W(f) = exp(i sum_x (q_x Re f_x + p_x Im f_x)) is represented
by its complex argument f alone; the harmonic dynamics maps arguments to
arguments,

    f_t = f * conj(h1_t) + conj(f) * h2_t      (periodic convolution)

and the commutator norm of two evolved Weyl operators is exactly
2 |sin(sigma/2)| with sigma = Im<g, f_t>.  Inner products conjugate the
first argument throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .torus import Couplings, TorusLattice, dispersion
from .kernels import KernelField, compute_h, velocity

__all__ = ["WeylFunction", "HarmonicBoundParams", "evolve",
           "evolve_mode_space", "symplectic_form", "commutator_norm_exact",
           "harmonic_bound_rhs", "observable_transfer", "weight_integral",
           "geometric_lattice_sum"]


class WeylFunction:
    """Complex field over the lattice with an explicitly recorded support."""

    def __init__(self, lattice: TorusLattice, values: np.ndarray,
                 support: frozenset[int] | None = None):
        values = np.asarray(values, dtype=complex)
        if values.shape != (lattice.n_sites,):
            raise ValueError("values must be a flat array over all sites")
        if support is None:
            support = frozenset(np.nonzero(values)[0].tolist())
        else:
            support = frozenset(int(i) for i in support)
            outside = np.ones(lattice.n_sites, dtype=bool)
            outside[list(support)] = False
            if np.any(values[outside] != 0):
                raise ValueError("values must vanish outside the support")
        self.lattice = lattice
        self.values = values
        self.support = support

    @classmethod
    def from_sites(cls, lattice: TorusLattice, entries) -> "WeylFunction":
        """Build from (site, amplitude) pairs."""
        vals = np.zeros(lattice.n_sites, dtype=complex)
        for site, amp in entries:
            vals[lattice.index(site)] += amp
        return cls(lattice, vals)

    @classmethod
    def delta(cls, lattice: TorusLattice, site, amp=1.0) -> "WeylFunction":
        return cls.from_sites(lattice, [(site, amp)])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def conj(self) -> "WeylFunction":
        return WeylFunction(self.lattice, np.conj(self.values), self.support)

    def support_sites(self) -> np.ndarray:
        return self.lattice.sites[sorted(self.support)]


def _check_same_lattice(*objs):
    lat = objs[0].lattice
    for o in objs[1:]:
        if o.lattice != lat:
            raise ValueError("lattice mismatch")
    return lat


def _conv(lat: TorusLattice, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Periodic convolution (a*b)_x = sum_y a_y b_{x-y} via the FFT grid."""
    ga = lat.to_grid(a.astype(complex))
    gb = lat.to_grid(b.astype(complex))
    return lat.from_grid(np.fft.ifftn(np.fft.fftn(ga) * np.fft.fftn(gb)))


def evolve(f: WeylFunction, t: float,
           kernels: tuple[KernelField, KernelField] | None = None,
           zero_omega: bool = False,
           couplings: Couplings | None = None) -> WeylFunction:
    """Exact harmonic evolution f -> f_t.

    Either pass precomputed kernels (h1, h2) at time t, or couplings from
    which they are computed.  The result is supported on the whole lattice.
    """
    lat = f.lattice
    if kernels is None:
        if couplings is None:
            raise ValueError("need kernels or couplings")
        kernels = compute_h(lat, couplings, t, zero_omega=zero_omega)
    h1, h2 = kernels
    if h1.lattice != lat or h2.lattice != lat:
        raise ValueError("lattice mismatch between f and kernels")
    if h1.t != t or h2.t != t:
        raise ValueError(f"kernels are at time {h1.t}, requested {t}")
    ft = _conv(lat, f.values, np.conj(h1.values)) \
        + _conv(lat, np.conj(f.values), h2.values)
    return WeylFunction(lat, ft, frozenset(range(lat.n_sites)))


def evolve_mode_space(f: WeylFunction, t: float, c: Couplings) -> WeylFunction:
    """Independent oracle: evolve through the normal-mode amplitudes.

    The generator sum_x (q_x Re f_x + p_x Im f_x) is decomposed over the
    lowering operators b_k, whose Heisenberg evolution is the exact phase
    exp(-2i gamma(k) t); the evolved argument is reassembled from the
    rotated amplitudes.  O(N^2), used only on small lattices.
    """
    lat = f.lattice
    n = lat.n_sites
    gam = np.atleast_1d(dispersion(c, lat.dual))
    if np.any(gam == 0):
        raise ZeroDivisionError("mode-space oracle requires omega > 0")
    # forward transforms R(k) = N^(-1/2) sum_x e^{ikx} Re f_x, same for Im
    phase = np.exp(1j * lat.dual @ lat.sites.T)  # phase[k, x]
    rhat = phase @ f.values.real / np.sqrt(n)
    ihat = phase @ f.values.imag / np.sqrt(n)
    # amplitude of b_k in the generator
    ck = (1j * rhat / np.sqrt(gam) + np.sqrt(gam) * ihat) / np.sqrt(2.0)
    ck = ck * np.exp(-2j * gam * t)
    # invert, using c_{-k} to separate the two real transforms
    neg = lat.neg_indices()
    ck_neg_conj = np.conj(ck[neg])
    rhat_t = np.sqrt(gam) * (ck - ck_neg_conj) * np.sqrt(2.0) / 2j
    ihat_t = (ck + ck_neg_conj) / (np.sqrt(2.0) * np.sqrt(gam))
    re_t = np.conj(phase).T @ rhat_t / np.sqrt(n)
    im_t = np.conj(phase).T @ ihat_t / np.sqrt(n)
    return WeylFunction(lat, re_t.real + 1j * im_t.real,
                        frozenset(range(n)))


def symplectic_form(f: WeylFunction, g: WeylFunction) -> float:
    """Im<f, g> with <f, g> = sum_x conj(f_x) g_x.  Antisymmetric."""
    _check_same_lattice(f, g)
    return float(np.imag(np.vdot(f.values, g.values)))


def commutator_norm_exact(f: WeylFunction, g: WeylFunction, t: float,
                          kernels=None, couplings: Couplings | None = None,
                          zero_omega: bool = False) -> float:
    """Exact ||[tau_t(W(f)), W(g)]|| = 2 |sin(Im<g, f_t>/2)|, in [0, 2]."""
    ft = evolve(f, t, kernels=kernels, zero_omega=zero_omega,
                couplings=couplings)
    sigma = symplectic_form(g, ft)
    return float(2.0 * np.abs(np.sin(sigma / 2.0)))


@dataclass(frozen=True)
class HarmonicBoundParams:
    """mu > 0, and for the corollary form a contraction factor 0 < a < 1."""

    mu: float
    couplings: Couplings
    a: float | None = None

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.a is not None and not (0.0 < self.a < 1.0):
            raise ValueError("a must lie in (0, 1)")


def geometric_lattice_sum(b: float, nu: int) -> float:
    """sum over z in Z^nu of e^(-b |z|) in closed form (product of 1-d sums)."""
    if b <= 0:
        raise ValueError("decay rate must be positive")
    q = np.exp(-b)
    return float(((1.0 + q) / (1.0 - q)) ** nu)


def _pair_sum(lat: TorusLattice, f: WeylFunction, g: WeylFunction,
              mu: float, v: float, t: float) -> float:
    xs = f.support_sites()
    ys = g.support_sites()
    total = 0.0
    for x in xs:
        for y in ys:
            total += np.exp(-mu * (lat.distance(x, y) - v * abs(t)))
    return total


def support_distance(f: WeylFunction, g: WeylFunction) -> int:
    """d(X, Y) = min over support pairs of the torus distance."""
    lat = _check_same_lattice(f, g)
    xs = f.support_sites()
    ys = g.support_sites()
    return min(lat.distance(x, y) for x in xs for y in ys)


def harmonic_bound_rhs(f: WeylFunction, g: WeylFunction, t: float,
                       p: HarmonicBoundParams, form: str = "theorem") -> float:
    """Right-hand side of the harmonic propagation bound.

    form = "theorem":    C ||f|| ||g|| sum_{x in X, y in Y}
                         exp(-mu (d(x,y) - v_h(mu) |t|))
           "corollary":  Ctilde ||f|| ||g|| min(|X|,|Y|)
                         exp(-mu (a d(X,Y) - v_h(mu) |t|))
           "small_time": theorem form times t^(2 d(X,Y)); requires
                         d(X,Y) > 1 + c_max * e^(mu/2 + 1)
    """
    lat = _check_same_lattice(f, g)
    c = p.couplings
    mu = p.mu
    cmax = c.c_max
    v = velocity(c, mu)
    C = 2.0 + cmax * np.exp(mu / 2.0) + 1.0 / cmax
    norms = f.sup_norm * g.sup_norm
    if form == "theorem":
        return float(C * norms * _pair_sum(lat, f, g, mu, v, t))
    if form == "small_time":
        dxy = support_distance(f, g)
        if not dxy > 1.0 + cmax * np.exp(mu / 2.0 + 1.0):
            raise ValueError(
                "small-time form requires d(X,Y) > 1 + c_max*e^(mu/2 + 1); "
                f"got d(X,Y) = {dxy}")
        return float(abs(t) ** (2 * dxy)
                     * C * norms * _pair_sum(lat, f, g, mu, v, t))
    if form == "corollary":
        if p.a is None:
            raise ValueError("corollary form requires the parameter a")
        dxy = support_distance(f, g)
        Ct = C * geometric_lattice_sum(mu * (1.0 - p.a), lat.nu)
        size = min(len(f.support), len(g.support))
        return float(Ct * norms * size
                     * np.exp(-mu * (p.a * dxy - v * abs(t))))
    raise ValueError(f"unknown form {form!r}")


def weight_integral(ahat, lo: float = -np.inf, hi: float = np.inf) -> float:
    """Quadrature of the observable weight integral(|s * ahat(s)| ds)."""
    val, _ = quad(lambda s: abs(s * ahat(s)), lo, hi, limit=200)
    return float(val)


def observable_transfer(bound: float, w_a: float, w_b: float) -> float:
    """Transfer a Weyl commutator bound to smeared observables: bound*wA*wB."""
    if w_a < 0 or w_b < 0:
        raise ValueError("observable weights must be nonnegative")
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    return float(bound * w_a * w_b)
