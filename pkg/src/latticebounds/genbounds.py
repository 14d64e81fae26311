"""Propagation bounds for arbitrary finite site sets with bounded
interactions: decay functions, interaction norms, interaction boundaries,
and the general bound evaluators.

Only the numbers ||Phi(Z)|| enter the bound, so interactions are modelled
as (subset, norm) pairs; no operators are represented here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["DecayFunction", "InteractionGraph", "decay_constants",
           "interaction_norm", "phi_boundary_and_D", "theorem_phi_bound",
           "power_law_zeta", "l1_metric"]


@dataclass(frozen=True)
class DecayFunction:
    """Non-increasing positive F(r), optionally exponentially weighted:
    F_a(r) = e^(-a r) F(r)."""

    base: Callable[[float], float]
    a: float = 0.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")

    def f(self, r: float) -> float:
        v = self.base(r)
        if v <= 0:
            raise ValueError(f"F({r}) = {v} is not positive")
        return float(np.exp(-self.a * r) * v)

    def with_a(self, a: float) -> "DecayFunction":
        return DecayFunction(self.base, a)


def power_law(exponent: float) -> DecayFunction:
    """F(r) = (1 + r)^(-exponent)."""
    return DecayFunction(lambda r: (1.0 + r) ** (-exponent))


def l1_metric(points) -> np.ndarray:
    """Pairwise l1 distance table for integer points (rows)."""
    pts = np.asarray(points, dtype=float)
    return np.sum(np.abs(pts[:, None, :] - pts[None, :, :]), axis=2)


class InteractionGraph:
    """Finite site list with a metric table and interaction term norms."""

    def __init__(self, metric: np.ndarray, terms, check_metric: bool = True):
        d = np.asarray(metric, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("metric must be a square table")
        self.n = d.shape[0]
        self.d = d
        self.terms = []
        for Z, norm in terms:
            Z = frozenset(int(i) for i in Z)
            if not Z or any(i < 0 or i >= self.n for i in Z):
                raise ValueError("term subsets must be nonempty site subsets")
            if norm < 0:
                raise ValueError("term norms must be >= 0")
            self.terms.append((Z, float(norm)))
        if check_metric:
            self._check_metric()

    def _check_metric(self):
        d = self.d
        if np.any(np.diag(d) != 0):
            raise ValueError("metric must vanish on the diagonal")
        if np.any(d != d.T):
            raise ValueError("metric must be symmetric")
        if np.any((d == 0) & ~np.eye(self.n, dtype=bool)):
            raise ValueError("distinct sites must have positive distance")
        # triangle inequality, exhaustive
        for z in range(self.n):
            if np.any(d > d[:, z][:, None] + d[z, :][None, :] + 1e-12):
                raise ValueError("triangle inequality violated")

    def set_distance(self, X, Y) -> float:
        X, Y = list(X), list(Y)
        return float(np.min(self.d[np.ix_(X, Y)]))


def decay_constants(G: InteractionGraph, F: DecayFunction) -> tuple[float, float]:
    """(||F_a||, C_a): the uniform-integrability norm and the convolution
    constant, both by exhaustive summation over the finite site set."""
    fa = np.vectorize(F.f)(G.d)
    norm = float(np.max(np.sum(fa, axis=1)))
    # C_a = sup_{x,y} sum_z F_a(d(x,z)) F_a(d(z,y)) / F_a(d(x,y))
    conv = fa @ fa
    ca = float(np.max(conv / fa))
    return norm, ca


def interaction_norm(G: InteractionGraph, F: DecayFunction) -> float:
    """||Phi||_a = max over site pairs of sum_{Z containing both} ||Phi(Z)||
    divided by F_a of their distance."""
    best = 0.0
    for x in range(G.n):
        for y in range(G.n):
            s = sum(norm for Z, norm in G.terms if x in Z and y in Z)
            if s > 0:
                best = max(best, s / F.f(G.d[x, y]))
    return best


def phi_boundary(G: InteractionGraph, X) -> frozenset[int]:
    """Sites of X touched by a nonzero term straddling X and its complement."""
    X = frozenset(int(i) for i in X)
    out = set()
    for Z, norm in G.terms:
        if norm == 0:
            continue
        if Z & X and Z - X:
            out |= Z & X
    return frozenset(out)


def phi_boundary_and_D(G: InteractionGraph, F: DecayFunction, X, Y):
    """Interaction boundaries of X and Y and the boundary-weighted pair sum

        D_a(X,Y) = min( sum_{x in bX, y in Y} F_a(d(x,y)),
                        sum_{x in X, y in bY} F_a(d(x,y)) ).
    """
    X = frozenset(int(i) for i in X)
    Y = frozenset(int(i) for i in Y)
    bX = phi_boundary(G, X)
    bY = phi_boundary(G, Y)
    s1 = sum(F.f(G.d[x, y]) for x in bX for y in Y)
    s2 = sum(F.f(G.d[x, y]) for x in X for y in bY)
    return bX, bY, float(min(s1, s2))


def power_law_zeta(nu: int, rmax: int = 2000) -> float:
    """sum over x in Z^nu of (1 + |x|)^(-nu-1), |x| the l1 norm.

    The l1 shell counts c_nu(r) are summed directly up to rmax; beyond that
    c_nu(r) is an exact polynomial of degree nu-1, so the tail is evaluated
    in closed form through Hurwitz zeta functions.
    """
    from scipy.special import zeta as hurwitz

    if nu < 1:
        raise ValueError("nu must be >= 1")
    # c_nu(r) = #{x in Z^nu : |x|_1 = r}; each 1-d factor contributes one
    # point at offset 0 and two at every offset >= 1
    counts = np.zeros(rmax + 1)
    counts[0] = 1.0  # nu = 0
    for _ in range(nu):
        cum = np.concatenate(([0.0], np.cumsum(counts)[:-1]))
        counts = counts + 2.0 * cum
    head = float(np.sum(counts * (1.0 + np.arange(rmax + 1)) ** (-nu - 1)))
    # express c_nu(r) = sum_m b_m (1+r)^m for r >= nu (polynomial, deg nu-1)
    rs = np.arange(rmax - nu + 1, rmax + 1, dtype=float)
    V = np.vander(rs + 1.0, nu, increasing=True)
    b = np.linalg.solve(V, counts[rmax - nu + 1:rmax + 1])
    tail = sum(b[m] * hurwitz(nu + 1 - m, rmax + 2) for m in range(nu))
    return head + float(tail)


def theorem_phi_bound(G: InteractionGraph, F: DecayFunction, X, Y,
                      normA: float, normB: float, t: float,
                      form: str = "theorem", nu: int | None = None) -> float:
    """General bound for bounded interactions.

    form = "theorem":   (2 ||A|| ||B|| / C_a) g_a(t) D_a(X,Y) with
                        g_a(t) = e^(2 ||Phi||_a C_a |t|) - 1 if d(X,Y) > 0,
                        no "-1" otherwise.
           "corollary": (2 ||A|| ||B|| ||F|| / C_a) min(|bX|, |bY|)
                        e^(-a (d(X,Y) - 2 ||Phi||_a C_a |t| / a)); a > 0.
           "lrexp":     specialization to F(r) = (1+r)^(-nu-1) on Z^nu with
                        its convolution constant C = 2^(nu+1) * zeta sum.
    """
    X = frozenset(int(i) for i in X)
    Y = frozenset(int(i) for i in Y)
    dxy = G.set_distance(X, Y)
    if form == "lrexp":
        if nu is None:
            raise ValueError("lrexp form requires nu")
        if F.a <= 0:
            raise ValueError("lrexp form requires a > 0")
        Fpow = DecayFunction(lambda r: (1.0 + r) ** (-nu - 1), F.a)
        phia = interaction_norm(G, Fpow)
        Cbig = 2.0 ** (nu + 1) * power_law_zeta(nu)
        bX = phi_boundary(G, X)
        bY = phi_boundary(G, Y)
        return float(2.0 ** (-(nu + 1)) * normA * normB
                     * min(len(bX), len(bY))
                     * np.exp(-(F.a * dxy - 2.0 * phia * Cbig * abs(t))))
    _, ca = decay_constants(G, F)
    if ca == 0:
        raise ValueError("degenerate graph: C_a = 0")
    phia = interaction_norm(G, F)
    if form == "theorem":
        ga = np.exp(2.0 * phia * ca * abs(t))
        if dxy > 0:
            ga -= 1.0
        _, _, da = phi_boundary_and_D(G, F, X, Y)
        return float(2.0 * normA * normB / ca * ga * da)
    if form == "corollary":
        if F.a <= 0:
            raise ValueError("corollary form requires a > 0")
        normF0, _ = decay_constants(G, F.with_a(0.0))
        bX = phi_boundary(G, X)
        bY = phi_boundary(G, Y)
        return float(2.0 * normA * normB * normF0 / ca
                     * min(len(bX), len(bY))
                     * np.exp(-F.a * (dxy - 2.0 * phia * ca / F.a * abs(t))))
    raise ValueError(f"unknown form {form!r}")
