"""Velocity grid: quadrature, invariants, projections, weighted pairings."""

import numpy as np
import pytest

from mvpb.velocity import VelocityBasis, basis_pair, maxwellian


@pytest.fixture(scope="module")
def b32():
    return VelocityBasis(32, 16, 8.0, sector=0)


def test_maxwellian_mass(b32):
    assert abs(np.sum(maxwellian(b32.v1, b32.vr) * b32.w) - 1.0) <= 1e-10


def test_weights_positive_and_nodes_in_box(b32):
    assert np.all(b32.w > 0)
    assert np.all(b32.vr >= 0)
    assert np.all(np.abs(b32.v1) <= b32.vmax)
    assert b32.n == len(b32.w) == 32 * 16


def test_vmax_rejected():
    with pytest.raises(ValueError):
        VelocityBasis(16, 8, 5.0)


def test_invariant_orthonormality(b32):
    chi = b32.invariants
    G = chi @ (chi * b32.w).T
    assert abs(G[0, 2]) <= 1e-9          # mass vs energy
    assert abs(G[2, 2] - 1.0) <= 1e-8    # energy normalization
    assert np.abs(G - np.eye(3)).max() <= 1e-8


def test_project_energy_fixed_point(b32):
    chi4 = b32.invariants[2]
    assert np.abs(b32.project(chi4, "hydro") - chi4).max() <= 1e-12
    assert np.abs(b32.project(chi4, "micro")).max() <= 1e-12


def test_project_v1sq_maxwell(b32):
    # Gaussian moments: (v1^2 sqrtM, chi0) = 1, (v1^2 sqrtM, chi4) = sqrt(2/3)
    f = b32.v1 ** 2 * b32.sqrt_maxwell
    p0 = b32.project(f, "hydro")
    target = b32.invariants[0] + np.sqrt(2.0 / 3.0) * b32.invariants[2]
    assert b32.norm(p0 - target) <= 1e-8


def test_projection_algebra_random(b32, rng):
    for _ in range(20):
        f = rng.standard_normal(b32.n)
        p0 = b32.project(f, "hydro")
        p1 = b32.project(f, "micro")
        assert np.abs(p0 + p1 - f).max() <= 1e-12
        assert b32.norm(b32.project(p1, "hydro")) <= 1e-12
        assert np.abs(b32.project(p0, "hydro") - p0).max() <= 1e-12
        blocks = sum(b32.project(f, p) for p in ("mass", "momentum", "energy"))
        assert np.abs(blocks - p0).max() <= 1e-12


def test_inner_eta_closed_values(b32):
    chi0, chi1 = b32.invariants[0], b32.invariants[1]
    assert abs(b32.inner_eta(chi0, chi0, 0.0) - 2.0) <= 1e-8
    assert abs(b32.inner_eta(chi0, chi0, 1.0) - 1.5) <= 1e-8
    for eta in (0.0, 0.7, 3.0):
        assert abs(b32.inner_eta(chi1, chi1, eta) - 1.0) <= 1e-8


def test_inner_eta_reduces_to_plain(b32, rng):
    f = rng.standard_normal(b32.n)
    f = f - b32.project(f, "mass")
    g = rng.standard_normal(b32.n)
    assert abs(b32.inner_eta(f, g, 0.4) - b32.inner(f, g)) <= 1e-10


def test_eta_metric_consistency(b32, rng):
    f = rng.standard_normal(b32.n)
    g = rng.standard_normal(b32.n)
    W = b32.eta_metric(0.8)
    assert abs(f @ W @ g - b32.inner_eta(f, g, 0.8)) <= 1e-10


def test_quadrature_exactness(b32):
    # low-degree polynomial moments of M against the Gaussian oracle
    M = maxwellian(b32.v1, b32.vr)
    moments = {
        (0, 0): 1.0, (2, 0): 1.0, (0, 2): 2.0, (4, 0): 3.0,
        (2, 2): 2.0, (0, 4): 8.0, (6, 0): 15.0, (0, 6): 48.0,
        (4, 4): 24.0, (8, 0): 105.0,
    }
    for (p1, pr), val in moments.items():
        got = np.sum(b32.v1 ** p1 * b32.vr ** pr * M * b32.w)
        assert abs(got - val) <= 1e-9 * val, (p1, pr, got, val)


def test_sector1_invariant(bases16):
    _, b1 = bases16
    assert b1.invariants.shape[0] == 1
    assert abs(b1.inner(b1.invariants[0], b1.invariants[0]) - 1.0) <= 1e-10
    # the perpendicular-momentum invariant carries no mass component
    assert abs(b1.mass_component(b1.invariants[0])) <= 1e-12


def test_weighted_sup_norm(b32):
    f = np.zeros(b32.n)
    f[0] = 2.0
    expect = 2.0 * (1.0 + b32.speed[0] ** 2) ** 1.5
    assert abs(b32.weighted_sup_norm(f, 3) - expect) <= 1e-12


def test_basis_pair_shares_grid():
    b0, b1 = basis_pair(16, 8)
    assert np.array_equal(b0.v1, b1.v1)
    assert np.array_equal(b0.vr, b1.vr)
    assert b0.azimuthal_factor == 2 * b1.azimuthal_factor
