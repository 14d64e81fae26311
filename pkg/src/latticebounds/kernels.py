"""Finite Fourier-sum propagation kernels of the harmonic lattice.

Three base kernels are computed over the torus,

    H0(t,x)  = Re (1/N) sum_k            exp(i k.x - 2i gamma(k) t)
    H1(t,x)  = Im (1/N) sum_k gamma(k)   exp(i k.x - 2i gamma(k) t)
    Hm1(t,x) = Im (1/N) sum_k gamma(k)^-1 exp(i k.x - 2i gamma(k) t)

with N the number of sites, together with the evolution kernels

    h1 = H0 + (i/2)(H1 + Hm1),      h2 = (i/2)(H1 - Hm1)

through which the Weyl argument evolves.  For omega = 0 the zero mode is
removed from the sums and replaced by the explicit free-particle terms
(1 - i t)/N and i t/N.

Two evaluation paths are provided: a direct summation oracle and an
FFT-based fast path that reproduces the same finite sums exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .torus import Couplings, TorusLattice, dispersion

__all__ = ["KernelField", "EnvelopeParams", "compute_H", "compute_H_direct",
           "compute_h", "envelope", "velocity"]

_KINDS = {"H0", "H1", "Hm1", "h1", "h2", "h01", "h02"}
_M_TO_KIND = {0: "H0", 1: "H1", -1: "Hm1"}


@dataclass(frozen=True)
class KernelField:
    """One sampled kernel: complex values indexed by the site enumeration."""

    lattice: TorusLattice
    couplings: Couplings
    t: float
    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    def at(self, x) -> complex:
        return self.values[self.lattice.index(x)]


@dataclass(frozen=True)
class EnvelopeParams:
    """Decay rate mu > 0 for the exponential kernel envelopes."""

    mu: float
    couplings: Couplings

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")


def _weights(lat: TorusLattice, c: Couplings, m: int, t: float) -> np.ndarray:
    """gamma(k)^m * exp(-2i gamma(k) t) over the dual grid, zero mode masked
    out when it would be singular (omega = 0, m = -1 handled by callers)."""
    gam = np.atleast_1d(dispersion(c, lat.dual))
    if m == -1:
        if np.any(gam == 0.0):
            raise ZeroDivisionError(
                "singular mode: gamma(k) = 0 at k = 0 (omega = 0 with m = -1)")
        fac = 1.0 / gam
    elif m == 1:
        fac = gam
    elif m == 0:
        fac = np.ones_like(gam)
    else:
        raise ValueError("m must be one of -1, 0, 1")
    return fac * np.exp(-2j * gam * t)


def _fourier_sum_fft(lat: TorusLattice, w: np.ndarray) -> np.ndarray:
    """(1/N) sum_k w(k) exp(i k.x) for all x, via the FFT grid."""
    grid = lat.to_grid(w.astype(complex))
    return lat.from_grid(np.fft.ifftn(grid))


def _fourier_sum_direct(lat: TorusLattice, w: np.ndarray,
                        site_index: int | None = None):
    """Brute-force evaluation of the same finite sum (oracle path)."""
    if site_index is not None:
        phase = np.exp(1j * lat.dual @ lat.sites[site_index])
        return np.sum(w * phase) / lat.n_sites
    out = np.empty(lat.n_sites, dtype=complex)
    for i in range(lat.n_sites):
        phase = np.exp(1j * lat.dual @ lat.sites[i])
        out[i] = np.sum(w * phase) / lat.n_sites
    return out


def compute_H(lat: TorusLattice, c: Couplings, m: int, t: float) -> KernelField:
    """Real-valued base kernel H^(m) at time t (fast FFT path)."""
    s = _fourier_sum_fft(lat, _weights(lat, c, m, t))
    vals = s.real if m == 0 else s.imag
    return KernelField(lat, c, float(t), _M_TO_KIND[m], vals)


def compute_H_direct(lat: TorusLattice, c: Couplings, m: int, t: float,
                     site_index: int | None = None):
    """Direct-summation oracle for H^(m); optionally a single site probe."""
    s = _fourier_sum_direct(lat, _weights(lat, c, m, t), site_index)
    if site_index is not None:
        return float(s.real if m == 0 else s.imag)
    vals = s.real if m == 0 else s.imag
    return KernelField(lat, c, float(t), _M_TO_KIND[m], vals)


def compute_h(lat: TorusLattice, c: Couplings, t: float,
              zero_omega: bool = False) -> tuple[KernelField, KernelField]:
    """Evolution kernel pair (h1, h2) at time t.

    With zero_omega the k = 0 mode is excluded from the Fourier sums and the
    explicit zero-mode terms (1 - i t)/N and i t/N are added instead; this is
    required (and only valid) for omega = 0.
    """
    if not zero_omega and c.omega == 0:
        raise ZeroDivisionError(
            "singular mode: k = 0 requires zero_omega=True when omega = 0")
    gam = np.atleast_1d(dispersion(c, lat.dual))
    phase = np.exp(-2j * gam * t)
    if zero_omega:
        mask = np.all(lat.sites == 0, axis=1)  # the k = 0 dual point
        phase = np.where(mask, 0.0, phase)
        inv_gam = np.divide(1.0, gam, out=np.zeros_like(gam), where=~mask)
    else:
        inv_gam = 1.0 / gam
    s0 = _fourier_sum_fft(lat, phase)
    s1 = _fourier_sum_fft(lat, gam * phase)
    sm1 = _fourier_sum_fft(lat, inv_gam * phase)
    h1 = s0.real + 0.5j * (s1.imag + sm1.imag)
    h2 = 0.5j * (s1.imag - sm1.imag)
    if zero_omega:
        n = lat.n_sites
        h1 = h1 + (1.0 - 1j * t) / n
        h2 = h2 + 1j * t / n
        kinds = ("h01", "h02")
    else:
        kinds = ("h1", "h2")
    return (KernelField(lat, c, float(t), kinds[0], h1),
            KernelField(lat, c, float(t), kinds[1], h2))


def velocity(c: Couplings, mu: float) -> float:
    """Propagation speed of the envelopes: c_max * max(2/mu, e^(mu/2 + 1))."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return c.c_max * max(2.0 / mu, np.exp(mu / 2.0 + 1.0))


def envelope(e: EnvelopeParams, m: int, t: float, r) -> float:
    """Exponential envelope dominating |H^(m)(t, x)| at torus distance r.

    Prefactor 1, c_max * e^(mu/2), or 1/c_max for m = 0, 1, -1.
    """
    c = e.couplings
    if m == 0:
        pref = 1.0
    elif m == 1:
        pref = c.c_max * np.exp(e.mu / 2.0)
    elif m == -1:
        pref = 1.0 / c.c_max
    else:
        raise ValueError("m must be one of -1, 0, 1")
    r = np.asarray(r, dtype=float)
    out = pref * np.exp(-e.mu * (r - velocity(c, e.mu) * abs(t)))
    return float(out) if out.ndim == 0 else out
