"""Fluid moments, the Navier-Stokes-Poisson closure, and energy diagnostics.

The closure evolves density, momentum and heat moments with viscosity and
heat-conduction coefficients taken from the kinetic quadratic forms, the
field coupling solved each step, and an IMEX arrangement: diffusion exactly
in frequency space, transport and coupling with an explicit midpoint step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collision import CollisionOperator
from .errors import CFLViolation, Instability
from .green import SpaceGrid
from .spectral import mode_matrix
from .velocity import VelocityBasis

ROOT23 = np.sqrt(2.0 / 3.0)


@dataclass
class MomentState:
    """Macroscopic fields on one spatial grid."""

    grid: SpaceGrid
    n: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    q: np.ndarray
    phi: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.phi is None:
            self.phi = solve_field(self.grid, self.n)

    def copy(self):
        return MomentState(self.grid, self.n.copy(), self.m1.copy(),
                           self.m2.copy(), self.m3.copy(), self.q.copy(),
                           self.phi.copy())


def solve_field(grid: SpaceGrid, n):
    """Linearized field equation: (I - d_xx) phi = -n."""
    return grid.to_physical(grid.poisson_coefficients(grid.to_coefficients(-np.asarray(n))))


def extract_moments(basis: VelocityBasis, grid: SpaceGrid, f_field,
                    f1_field=None, basis1: VelocityBasis = None):
    """Project a sector-0 velocity field (nx, n) onto the invariants.

    Transverse momentum comes from the matching sector-1 field when given
    (one axisymmetric profile; the second transverse component is zero by
    symmetry of the reduction).
    """
    f = np.asarray(f_field)
    chi = basis.invariants            # rows: mass, momentum, energy
    n = np.real(f @ (chi[0] * basis.w))
    m1 = np.real(f @ (chi[1] * basis.w))
    q = np.real(f @ (chi[2] * basis.w))
    if f1_field is not None:
        m2 = np.real(np.asarray(f1_field) @ (basis1.invariants[0] * basis1.w))
    else:
        m2 = np.zeros_like(n)
    m3 = np.zeros_like(n)
    return MomentState(grid, n, m1, m2, m3, q)


# ---------------------------------------------------------------------- #
# Navier-Stokes-Poisson closure
# ---------------------------------------------------------------------- #

def nsp_symbol(eta, kappa1, kappa2, coupled=True):
    """3x3 frequency symbol of the closure on (n, m1, q)."""
    s = 1.0 / (1.0 + eta ** 2) if coupled else 0.0
    ie = 1j * eta
    return np.array([
        [0.0, -ie, 0.0],
        [-ie * (1.0 + s), -(4.0 / 3.0) * kappa1 * eta ** 2, -ie * ROOT23],
        [0.0, -ie * ROOT23, -kappa2 * eta ** 2],
    ], dtype=complex)


def nsp_acoustic_speeds(kappa1, kappa2, coupled=True, eta=1e-4):
    """Long-wave signal speeds from the symbol eigenvalues."""
    lam = np.linalg.eigvals(nsp_symbol(eta, kappa1, kappa2, coupled))
    return np.sort(-np.imag(lam) / eta)


def nsp_damping_coefficients(kappa1, kappa2, coupled=True, eta=1e-3):
    """Quadratic damping rates a_j of the symbol branches.

    Returns the rates sorted by branch speed (-c, 0, +c).
    """
    lam = np.linalg.eigvals(nsp_symbol(eta, kappa1, kappa2, coupled))
    order = np.argsort(-np.imag(lam) / eta)
    return -np.real(lam[order]) / eta ** 2


class NSPEvolver:
    """IMEX Strang stepper for the moment closure on a periodic grid.

    Diffusion is applied exactly in frequency space over half steps; the
    hyperbolic transport and the field coupling use an explicit midpoint
    rule in between.  The field solve is linearized (small perturbations).
    """

    def __init__(self, grid: SpaceGrid, kappa1, kappa2, coupled=True,
                 nonlinear_terms=True, cfl=0.9):
        self.grid = grid
        self.kappa1 = float(kappa1)
        self.kappa2 = float(kappa2)
        self.coupled = coupled
        self.nonlinear_terms = nonlinear_terms
        self.cfl = float(cfl)
        self.max_speed = np.sqrt(8.0 / 3.0 if coupled else 5.0 / 3.0)

    def _dx(self, u):
        g = self.grid
        return g.to_physical(g.derivative_coefficients(g.to_coefficients(u)))

    def _rhs(self, st: MomentState):
        g = self.grid
        phi = solve_field(g, st.n) if self.coupled else np.zeros_like(st.n)
        dphi = self._dx(phi) if self.coupled else 0.0
        dn = -self._dx(st.m1)
        dm1 = -self._dx(st.n) - ROOT23 * self._dx(st.q)
        dq = -ROOT23 * self._dx(st.m1)
        if self.coupled:
            dm1 = dm1 + dphi
            if self.nonlinear_terms:
                dm1 = dm1 + st.n * dphi
                dq = dq + ROOT23 * st.m1 * dphi
        return dn, dm1, dq

    def _diffuse(self, st: MomentState, dt):
        g = self.grid
        for name, kap in (("m1", 4.0 * self.kappa1 / 3.0), ("m2", self.kappa1),
                          ("m3", self.kappa1), ("q", self.kappa2)):
            u = getattr(st, name)
            c = g.to_coefficients(u) * np.exp(-kap * g.eta ** 2 * dt)
            setattr(st, name, g.to_physical(c))

    def step(self, st: MomentState, dt):
        self._diffuse(st, dt / 2.0)
        dn, dm1, dq = self._rhs(st)
        mid = MomentState(self.grid, st.n + dt / 2.0 * dn,
                          st.m1 + dt / 2.0 * dm1, st.m2, st.m3,
                          st.q + dt / 2.0 * dq)
        dn, dm1, dq = self._rhs(mid)
        st.n = st.n + dt * dn
        st.m1 = st.m1 + dt * dm1
        st.q = st.q + dt * dq
        self._diffuse(st, dt / 2.0)
        st.phi = solve_field(self.grid, st.n) if self.coupled \
            else np.zeros_like(st.n)
        return st

    def evolve(self, state0: MomentState, t_end, dt, out_ts=None):
        """March to t_end; returns (times, list of MomentState snapshots)."""
        if dt > self.cfl * self.grid.dx / self.max_speed:
            raise CFLViolation(
                "dt=%g exceeds advective limit %g"
                % (dt, self.cfl * self.grid.dx / self.max_speed))
        nsteps = int(round(t_end / dt))
        out_ts = np.asarray(out_ts if out_ts is not None else [t_end], dtype=float)
        st = state0.copy()
        norm0 = float(np.linalg.norm(np.concatenate([st.n, st.m1, st.q])))
        times, snaps = [], []
        for k in range(nsteps + 1):
            t = k * dt
            if np.any(np.abs(out_ts - t) < dt / 2.0 + 1e-12):
                times.append(t)
                snaps.append(st.copy())
            if k == nsteps:
                break
            st = self.step(st, dt)
            norm = float(np.linalg.norm(np.concatenate([st.n, st.m1, st.q])))
            if not np.isfinite(norm) or norm > 1e3 * (norm0 + 1e-300):
                raise Instability("norm grew to %.3e at t=%g" % (norm, t))
        return np.array(times), snaps


def kinetic_moment_trajectory(op: CollisionOperator, grid: SpaceGrid,
                              profile, ts, seed=None):
    """Exact linear kinetic moments for initial data profile(x) * seed(v).

    Propagates each active frequency with one dense eigendecomposition and
    returns MomentState snapshots (sector 0 only).
    """
    b = op.basis
    seed = b.invariants[0] if seed is None else np.asarray(seed, dtype=complex)
    ts = np.asarray(ts, dtype=float)
    phat = grid.to_coefficients(np.asarray(profile, dtype=float))
    active = np.where(np.abs(phat) > 1e-14 * np.abs(phat).max())[0]
    coef = np.zeros((len(ts), grid.nh, b.n), dtype=complex)
    for k in active:
        B = mode_matrix(op, grid.eta[k])
        w, V = np.linalg.eig(B)
        c0 = np.linalg.solve(V, seed)
        coef[:, k, :] = np.einsum("ij,tj,j->ti", V, np.exp(np.outer(ts, w)),
                                  c0) * phat[k]
    states = []
    for it in range(len(ts)):
        f = grid.to_physical(coef[it], axis=0)
        states.append(extract_moments(b, grid, f))
    return states


# ---------------------------------------------------------------------- #
# energy functionals
# ---------------------------------------------------------------------- #

def _v1_derivative_matrix(basis: VelocityBasis):
    """Second-order finite-difference d/dv1 on the tensor velocity grid.

    The v1 nodes are a nonuniform quadrature grid; per vr column a
    three-point Lagrange stencil is used, one-sided at the ends.
    """
    n1, nr = basis.n1, basis.nr
    v1 = basis.v1.reshape(n1, nr)[:, 0]
    D1 = np.zeros((n1, n1))
    for i in range(n1):
        j = min(max(i - 1, 0), n1 - 3)
        x0, x1, x2 = v1[j], v1[j + 1], v1[j + 2]
        t = v1[i]
        D1[i, j] = (2 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
        D1[i, j + 1] = (2 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
        D1[i, j + 2] = (2 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
    return D1


def apply_v1_derivative(basis: VelocityBasis, f_field, order=1):
    """d^order/dv1^order of an (..., n) velocity field."""
    D1 = _v1_derivative_matrix(basis)
    shape = f_field.shape
    f = np.asarray(f_field).reshape(-1, basis.n1, basis.nr)
    for _ in range(order):
        f = np.einsum("ij,xjr->xir", D1, f)
    return f.reshape(shape)


def energy_functionals(basis: VelocityBasis, grid: SpaceGrid, f_field,
                       phi, N=2, k=0):
    """Weighted Sobolev energies of a sector-0 field.

    Returns a dict with the three diagnostics: the full energy, the
    microscopic energy with first-order macro terms, and the dissipation
    weight (extra half power of w on the micro terms).
    """
    f = np.asarray(f_field, dtype=float)
    phi = np.asarray(phi, dtype=float)
    w_v = np.sqrt(1.0 + basis.v1 ** 2 + basis.vr ** 2)
    dx = grid.dx

    def xnorm2(u, weight_pow):
        # u: (nx, n); weighted L2_{x,v}
        return float(np.einsum("xi,i->", np.abs(u) ** 2,
                               basis.w * w_v ** (2.0 * weight_pow)) * dx)

    def phinorm2(p):
        dp = grid.to_physical(grid.derivative_coefficients(grid.to_coefficients(p)))
        return float((np.abs(p) ** 2 + np.abs(dp) ** 2).sum() * dx)

    # cache x-derivatives of f and phi
    fx = {0: f}
    px = {0: phi}
    for a in range(1, N + 1):
        c = grid.to_coefficients(fx[a - 1], axis=0)
        fx[a] = grid.to_physical(grid.derivative_coefficients(c, axis=0), axis=0)
        px[a] = grid.to_physical(grid.derivative_coefficients(
            grid.to_coefficients(px[a - 1])))

    E = 0.0
    H = 0.0
    D = 0.0
    for a in range(N + 1):
        for bq in range(N + 1 - a):
            u = apply_v1_derivative(basis, fx[a], order=bq) if bq else fx[a]
            E += xnorm2(u, k)
            u1 = np.stack([basis.project(row, "micro") for row in u])
            H += xnorm2(u1, k)
            D += xnorm2(u1, k + 0.5)
    for a in range(N + 1):
        E += phinorm2(px[a])
    # macro terms carry one extra x-derivative (orders 1 .. N)
    for a in range(1, N + 1):
        macro = np.stack([basis.project(row, "hydro") for row in fx[a]])
        H += xnorm2(macro, 0.0)
        D += xnorm2(macro, 0.0)
        H += phinorm2(px[a])
        D += phinorm2(px[a])
    return {"E": E, "H": H, "D": D}
