import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticebounds.torus import Couplings, TorusLattice, dispersion


def test_site_and_dual_counts():
    for nu, L in [(1, 4), (2, 3), (3, 2)]:
        lat = TorusLattice(nu, L)
        assert lat.n_sites == (2 * L) ** nu
        assert lat.sites.shape == lat.dual.shape == ((2 * L) ** nu, nu)


def test_dual_alignment_and_range():
    lat = TorusLattice(2, 5)
    assert np.allclose(lat.dual, lat.sites * np.pi / lat.L)
    assert np.all(lat.dual > -np.pi)
    assert np.all(lat.dual <= np.pi + 1e-15)


def test_distance_wraparound():
    lat = TorusLattice(1, 4)
    assert lat.distance((3,), (-3,)) == 2  # around the back: |6 - 8| = 2
    assert lat.distance((3,), (3,)) == 0


def test_distance_two_dimensional():
    lat = TorusLattice(2, 8)
    assert lat.distance((7, 0), (-7, 3)) == 5


def test_distance_exhaustive_eta_minimum():
    lat = TorusLattice(2, 3)
    rng = np.random.default_rng(1)
    for _ in range(60):
        x = lat.sites[rng.integers(lat.n_sites)]
        y = lat.sites[rng.integers(lat.n_sites)]
        brute = min(
            sum(abs(x[j] - y[j] + 2 * lat.L * eta[j]) for j in range(2))
            for eta in [(a, b) for a in range(-2, 3) for b in range(-2, 3)])
        assert lat.distance(x, y) == brute


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.data())
def test_metric_axioms(L, data):
    lat = TorusLattice(1, L)
    i = data.draw(st.integers(0, lat.n_sites - 1))
    j = data.draw(st.integers(0, lat.n_sites - 1))
    k = data.draw(st.integers(0, lat.n_sites - 1))
    x, y, z = lat.sites[i], lat.sites[j], lat.sites[k]
    assert lat.distance(x, y) == lat.distance(y, x)
    assert (lat.distance(x, y) == 0) == (i == j)
    assert lat.distance(x, z) <= lat.distance(x, y) + lat.distance(y, z)
    assert lat.distance(x, y) <= lat.nu * lat.L


def test_distance_rejects_out_of_range():
    lat = TorusLattice(1, 4)
    with pytest.raises(ValueError):
        lat.distance((5,), (0,))


def test_wrap_is_idempotent_and_in_range():
    lat = TorusLattice(2, 3)
    for raw in [(-9, 7), (6, 6), (-3, 3), (0, 0)]:
        w = lat.wrap(np.array(raw))
        assert np.array_equal(lat.wrap(w), w)
        assert np.all(w > -lat.L) and np.all(w <= lat.L)
        assert np.all((w - np.array(raw)) % (2 * lat.L) == 0)


def test_index_roundtrip():
    lat = TorusLattice(2, 4)
    for i in range(lat.n_sites):
        assert lat.index(lat.sites[i]) == i


def test_neg_indices_involution():
    lat = TorusLattice(2, 3)
    neg = lat.neg_indices()
    assert np.array_equal(neg[neg], np.arange(lat.n_sites))
    # -k maps pi to pi (the boundary point is its own negative)
    for i in range(lat.n_sites):
        expect = lat.wrap(-lat.sites[i])
        assert lat.index(expect) == neg[i]


def test_grid_roundtrip():
    lat = TorusLattice(2, 3)
    v = np.arange(lat.n_sites, dtype=complex)
    assert np.array_equal(lat.from_grid(lat.to_grid(v)), v)


def test_couplings_validation():
    with pytest.raises(ValueError):
        Couplings(-1.0, (1.0,))
    with pytest.raises(ValueError):
        Couplings(1.0, (-0.5,))
    with pytest.raises(ValueError):
        Couplings(0.0, (0.0, 0.0))
    c = Couplings(0.5, (2.0, 0.0))
    assert c.nu == 2
    assert c.c_max == pytest.approx(np.sqrt(0.25 + 8.0))


def test_dispersion_values_and_evenness():
    c = Couplings(1.0, (1.0,))
    assert dispersion(c, np.array([0.0])) == pytest.approx(1.0)
    assert dispersion(c, np.array([np.pi])) == pytest.approx(np.sqrt(5.0))
    lat = TorusLattice(1, 6)
    gam = dispersion(c, lat.dual)
    assert np.allclose(gam, gam[lat.neg_indices()])
    assert np.all(gam <= c.c_max + 1e-15)


def test_dispersion_gapless_at_zero_when_omega_vanishes():
    c = Couplings(0.0, (1.0,))
    assert dispersion(c, np.array([0.0])) == 0.0
    assert dispersion(c, np.array([0.1])) > 0.0
