"""Full nonlinear evolution: transport, field coupling, bilinear collisions.

The perturbation system is advanced by a Strang split: the stiff linear
part (collisions, streaming, linear field response) uses exact per-mode
propagators; the quadratic terms (field products, bilinear collision
operator, nonlinear field correction) use an explicit midpoint rule in
physical space.  The bilinear collision operator is a dense third-order
tensor over the velocity nodes, built once by quadrature and cached.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

from .collision import CollisionOperator
from .errors import CFLViolation, Instability, MemoryBudget, NoConvergence
from .green import SpaceGrid, power_law_fit
from .moments import _v1_derivative_matrix
from .spectral import mode_matrix
from .velocity import VelocityBasis, maxwellian


# ---------------------------------------------------------------------- #
# barycentric interpolation on the tensor velocity grid
# ---------------------------------------------------------------------- #

def _bary_weights(nodes):
    w = np.ones(len(nodes))
    for i in range(len(nodes)):
        w[i] = 1.0 / np.prod(nodes[i] - np.delete(nodes, i))
    return w


def _bary_matrix(nodes, bw, pts):
    """Rows of Lagrange cardinal values at pts; exact at nodes."""
    d = pts[:, None] - nodes[None, :]
    exact = np.abs(d) < 1e-13
    with np.errstate(divide="ignore", invalid="ignore"):
        c = bw[None, :] / d
        s = c.sum(axis=1)
        out = c / s[:, None]
    hit = exact.any(axis=1)
    out[hit] = exact[hit].astype(float)
    return out


class _TensorInterp:
    """Product barycentric interpolation on the (v1, vr) node grid."""

    def __init__(self, basis: VelocityBasis):
        self.n1, self.nr = basis.n1, basis.nr
        self.v1 = basis.v1.reshape(self.n1, self.nr)[:, 0]
        self.vr = basis.vr.reshape(self.n1, self.nr)[0, :]
        self.b1 = _bary_weights(self.v1)
        self.br = _bary_weights(self.vr)
        self.vmax = basis.vmax

    def matrix(self, p1, pr):
        """(npts, n) cardinal matrix; rows are zero outside the node box."""
        inside = (np.abs(p1) <= self.vmax) & (pr <= self.vmax)
        A1 = _bary_matrix(self.v1, self.b1, np.clip(p1, -self.vmax, self.vmax))
        Ar = _bary_matrix(self.vr, self.br, np.clip(pr, 0.0, self.vmax))
        out = np.einsum("qa,qb->qab", A1, Ar).reshape(len(p1), -1)
        out[~inside] = 0.0
        return out


# ---------------------------------------------------------------------- #
# bilinear collision tensor
# ---------------------------------------------------------------------- #

def _gamma_quadrature(basis: VelocityBasis, n_phi_star=16, n_omega_theta=12,
                      n_omega_phi=24):
    """Quadrature node set over (v*, phi*, omega) shared by both paths.

    v* runs over the basis's own 2-D node set (its quadrature weights
    divided by the azimuthal factor give the (v*1, v*r) measure), phi* is
    a midpoint rule for the azimuth of v*, and omega uses Gauss nodes in
    the polar cosine times a midpoint azimuth.
    """
    phis = (np.arange(n_phi_star) + 0.5) * 2.0 * np.pi / n_phi_star
    ct, wt = leggauss(n_omega_theta)
    pho = (np.arange(n_omega_phi) + 0.5) * 2.0 * np.pi / n_omega_phi
    st = np.sqrt(1.0 - ct ** 2)
    omega = np.stack([
        np.repeat(ct, n_omega_phi),
        np.outer(st, np.cos(pho)).ravel(),
        np.outer(st, np.sin(pho)).ravel(),
    ], axis=1)                                           # (n_om, 3)
    w_omega = np.repeat(wt, n_omega_phi) * (2.0 * np.pi / n_omega_phi)
    # v* in 3-D for each (node, phi*)
    v1s = np.repeat(basis.v1, n_phi_star)
    vrs = np.repeat(basis.vr, n_phi_star)
    phs = np.tile(phis, basis.n)
    vstar = np.stack([v1s, vrs * np.cos(phs), vrs * np.sin(phs)], axis=1)
    # measure: basis.w includes the sector azimuthal factor 2*pi; the
    # explicit phi* rule replaces it
    w_star = np.repeat(basis.w / (2.0 * np.pi), n_phi_star) \
        * (2.0 * np.pi / n_phi_star)
    sqm_star = np.sqrt(maxwellian(vstar[:, 0], np.hypot(vstar[:, 1], vstar[:, 2])))
    return {"vstar": vstar, "w_star": w_star, "sqm_star": sqm_star,
            "omega": omega, "w_omega": w_omega,
            "tag": (basis.n1, basis.nr, basis.vmax, n_phi_star,
                    n_omega_theta, n_omega_phi, 2)}


def _gamma_geometry(v, quad):
    """Post-collision velocities and rate factors for one output node v.

    Returns flattened arrays over (v*, omega): weight, sqrt-Maxwellian
    factors and the (v1, vr) coordinates of v' and v'*.
    """
    vstar, omega = quad["vstar"], quad["omega"]
    rel = v[None, :] - vstar                              # (ns, 3)
    proj = rel @ omega.T                                  # (ns, nom)
    rate = np.abs(proj)
    vp = v[None, None, :] - proj[:, :, None] * omega[None, :, :]
    vps = vstar[:, None, :] + proj[:, :, None] * omega[None, :, :]
    wq = (quad["w_star"][:, None] * quad["w_omega"][None, :] * rate).ravel()
    sqm_s = np.broadcast_to(quad["sqm_star"][:, None], rate.shape).ravel()
    vp = vp.reshape(-1, 3)
    vps = vps.reshape(-1, 3)
    return {
        "wq": wq, "sqm_star": sqm_s,
        "p1": vp[:, 0], "pr": np.hypot(vp[:, 1], vp[:, 2]),
        "s1": vps[:, 0], "sr": np.hypot(vps[:, 1], vps[:, 2]),
        "star_idx": np.repeat(
            np.repeat(np.arange(len(vstar)), len(omega)), 1),
    }


def _invariant_cleanup(basis: VelocityBasis, arr):
    """Remove the collision-invariant components along the first axis.

    The continuum bilinear operator is orthogonal to the invariants;
    quadrature breaks this at discretization-error level, so the exact
    identity is restored by projection.
    """
    chi = basis.invariants
    load = np.tensordot(chi * basis.w, arr, axes=(1, 0))
    return arr - np.tensordot(chi.T, load, axes=(1, 0))


@dataclass
class GammaTensor:
    tensor: np.ndarray          # (n, n, n), symmetric in the last two axes
    tag: tuple
    build_seconds: float = 0.0


def build_gamma(basis: VelocityBasis, n_phi_star=16, n_omega_theta=12,
                n_omega_phi=24, cache_dir=None, memory_cap=512 ** 3,
                chunk=32768):
    """Dense node tensor of the bilinear collision operator (sector m=0).

    T[i, j, k] is the coefficient of node i in the operator applied to the
    (j, k) node pair, symmetrized in (j, k) and projected off the
    invariants.  Cached to disk keyed by the grid/quadrature signature.
    """
    n = basis.n
    if n ** 3 > memory_cap:
        raise MemoryBudget("gamma tensor would need %d entries (cap %d)"
                           % (n ** 3, memory_cap))
    quad = _gamma_quadrature(basis, n_phi_star, n_omega_theta, n_omega_phi)
    key = hashlib.sha256(json.dumps(quad["tag"]).encode()).hexdigest()[:16]
    path = os.path.join(cache_dir, "gamma_%s.npy" % key) if cache_dir else None
    if path and os.path.exists(path):
        return GammaTensor(np.load(path), quad["tag"])

    t_start = time.time()
    interp = _TensorInterp(basis)
    nodes3 = np.stack([basis.v1, basis.vr, np.zeros(n)], axis=1)
    nom = len(quad["omega"])
    star_of_q = np.repeat(np.arange(len(quad["vstar"])), nom)
    # All square-root-Maxwellian factors reduce in closed form: with
    # F = sqrtM f, G = sqrtM g the gain products carry
    # sqrtM(v') sqrtM(v'*) / sqrtM(v) = sqrtM(v*) by energy conservation
    # (detailed balance), and the loss terms carry the same sqrtM(v*).
    # Only f and g themselves are interpolated, which keeps the tensor
    # entries O(1) and the apply path well conditioned.
    ell_star = interp.matrix(quad["vstar"][:, 0],
                             np.hypot(quad["vstar"][:, 1],
                                      quad["vstar"][:, 2]))
    T = np.zeros((n, n, n))
    for i in range(n):
        geo = _gamma_geometry(nodes3[i], quad)
        wq = geo["wq"]
        nq = len(wq)
        gain = np.zeros((n, n))
        loss_vec = np.zeros(n)
        cw_all = wq * quad["sqm_star"][star_of_q]
        for q0 in range(0, nq, chunk):
            sl = slice(q0, min(q0 + chunk, nq))
            Ap = interp.matrix(geo["p1"][sl], geo["pr"][sl])
            As = interp.matrix(geo["s1"][sl], geo["sr"][sl])
            gain += (As * cw_all[sl, None]).T @ Ap
            loss_vec += cw_all[sl] @ ell_star[star_of_q[sl]]
        T[i] = 0.5 * (gain + gain.T)
        T[i, :, i] -= 0.5 * loss_vec
        T[i, i, :] -= 0.5 * loss_vec
    T = _invariant_cleanup(basis, T)
    # The Maxwellian pair annihilates the continuum operator; the residual
    # quadrature defect in that single input direction is removed by a
    # rank-one correction (exact at equilibrium, symmetric, and itself
    # invariant-free since the defect vector was already projected).
    e = basis.invariants[0]
    ew = e * basis.w
    r = np.einsum("ijk,j,k->i", T, e, e)
    T -= np.einsum("i,j,k->ijk", r, ew, ew)
    built = time.time() - t_start
    if path:
        np.save(path, T)
    return GammaTensor(T, quad["tag"], built)


def _apply_gamma_raw(T, f2, g2):
    n = T.shape[0]
    # out[x, i] = sum_{jk} T[i, j, k] f[x, j] g[x, k]
    A = f2 @ T.transpose(1, 0, 2).reshape(n, n * n)
    return np.einsum("xik,xk->xi", A.reshape(-1, n, n), g2)


def apply_gamma(gamma: GammaTensor, f, g):
    """Symmetric bilinear application on (..., n) node fields.

    The two contraction orders are averaged so the bilinear symmetry holds
    exactly in floating point, not just up to contraction roundoff.
    """
    T = gamma.tensor
    n = T.shape[0]
    same = f is g
    f = np.asarray(f)
    g = np.asarray(g)
    shape = np.broadcast_shapes(f.shape, g.shape)
    f2 = np.broadcast_to(f, shape).reshape(-1, n)
    g2 = np.broadcast_to(g, shape).reshape(-1, n)
    out = _apply_gamma_raw(T, f2, g2)
    if not same:
        out = 0.5 * (out + _apply_gamma_raw(T, g2, f2))
    return out.reshape(shape)


def gamma_direct(basis: VelocityBasis, f, g, n_phi_star=16, n_omega_theta=12,
                 n_omega_phi=24, chunk=32768):
    """Direct quadrature of the bilinear operator, bypassing the tensor.

    Independent evaluation path: interpolates the node profiles at the
    post-collision points, sums the quadrature with the closed-form
    sqrt-Maxwellian factor, removes the invariant components, and applies
    the same equilibrium-direction defect correction as the tensor build.
    Accepts stacked pairs (m, n) and evaluates them in one sweep.
    """
    quad = _gamma_quadrature(basis, n_phi_star, n_omega_theta, n_omega_phi)
    interp = _TensorInterp(basis)
    f2 = np.atleast_2d(np.asarray(f, dtype=float))
    g2 = np.atleast_2d(np.asarray(g, dtype=float))
    single = np.asarray(f).ndim == 1
    # append the equilibrium pair to measure the quadrature defect
    e = basis.invariants[0]
    P = np.concatenate([f2, e[None, :]], axis=0).T       # (n, m+1)
    Q = np.concatenate([g2, e[None, :]], axis=0).T
    nodes3 = np.stack([basis.v1, basis.vr, np.zeros(basis.n)], axis=1)
    ell_star = interp.matrix(quad["vstar"][:, 0],
                             np.hypot(quad["vstar"][:, 1], quad["vstar"][:, 2]))
    P_star = ell_star @ P                                # (ns, m+1)
    Q_star = ell_star @ Q
    nom = len(quad["omega"])
    star_of_q = np.repeat(np.arange(len(quad["vstar"])), nom)
    out = np.zeros((basis.n, P.shape[1]))
    for i in range(basis.n):
        geo = _gamma_geometry(nodes3[i], quad)
        wq = geo["wq"]
        acc = np.zeros(P.shape[1])
        nq = len(wq)
        for q0 in range(0, nq, chunk):
            sl = slice(q0, min(q0 + chunk, nq))
            sq = star_of_q[sl]
            Ap = interp.matrix(geo["p1"][sl], geo["pr"][sl])
            As = interp.matrix(geo["s1"][sl], geo["sr"][sl])
            bracket = ((As @ P) * (Ap @ Q) + (Ap @ P) * (As @ Q)
                       - P_star[sq] * Q[i][None, :]
                       - P[i][None, :] * Q_star[sq])
            acc += (wq[sl] * quad["sqm_star"][sq]) @ bracket
        out[i] = 0.5 * acc
    out = _invariant_cleanup(basis, out)
    ew = e * basis.w
    defect = out[:, -1]
    cf = ew @ P[:, :-1]
    cg = ew @ Q[:, :-1]
    out = out[:, :-1] - np.outer(defect, cf * cg)
    return out[:, 0] if single else out.T


# ---------------------------------------------------------------------- #
# nonlinear field solve
# ---------------------------------------------------------------------- #

def poisson_newton(grid: SpaceGrid, n, tol=1e-12, maxit=25):
    """Field from the nonlinear relation with Boltzmann-distributed charge.

    Solves (I - d_xx) phi - (exp(-phi) + phi - 1) = -n by Newton iteration;
    each linear solve inverts the frequency-diagonal part and treats the
    pointwise Jacobian term as a contraction (small-data regime).
    """
    n = np.asarray(n, dtype=float)
    if np.abs(n).max() > 0.5:
        raise NoConvergence("density amplitude %.3f outside small-data regime"
                            % np.abs(n).max())
    phi = np.zeros_like(n)
    sym = 1.0 + grid.eta ** 2

    def residual(p):
        lap = grid.to_physical(grid.to_coefficients(p) * sym)
        return lap - (np.exp(-p) + p - 1.0) + n

    for _ in range(maxit):
        r = residual(phi)
        if np.abs(r).max() <= tol:
            return phi
        a = np.exp(-phi) - 1.0          # pointwise Jacobian correction
        d = np.zeros_like(phi)
        for _inner in range(60):
            d_new = grid.to_physical(grid.to_coefficients(-r - a * d) / sym)
            if np.abs(d_new - d).max() < 0.01 * tol:
                d = d_new
                break
            d = d_new
        phi = phi + d
    r = residual(phi)
    if np.abs(r).max() <= tol:
        return phi
    raise NoConvergence("field residual %.2e after %d Newton steps"
                        % (np.abs(r).max(), maxit))


def field_time_derivative(grid: SpaceGrid, phi, dn_dt):
    """d_t phi from the differentiated field relation."""
    sym = 1.0 + grid.eta ** 2
    a = np.exp(-phi) - 1.0
    d = np.zeros_like(phi)
    for _ in range(60):
        d_new = grid.to_physical(grid.to_coefficients(-dn_dt - a * d) / sym)
        if np.abs(d_new - d).max() < 1e-14 * (1.0 + np.abs(d).max()):
            return d_new
        d = d_new
    return d


# ---------------------------------------------------------------------- #
# time stepper
# ---------------------------------------------------------------------- #

@dataclass
class KineticState:
    """Sector-0 perturbation in mixed representation (frequency x nodes)."""

    coef: np.ndarray            # (nh, n) complex, non-negative modes
    phi: np.ndarray             # (nx,) real
    t: float


class NonlinearStepper:
    """Strang-split integrator for the perturbation system.

    Half-steps of the exact linear propagator (collisions, streaming,
    linearized field response) sandwich an explicit midpoint step of the
    quadratic terms: the field products, the collision bilinear form, and
    the beyond-linear part of the field equation.
    """

    def __init__(self, op: CollisionOperator, grid: SpaceGrid, dt,
                 gamma: GammaTensor = None, field_terms=True,
                 nonlinear_poisson=True, cfl=0.9):
        self.op = op
        self.grid = grid
        self.dt = float(dt)
        self.gamma = gamma
        self.field_terms = field_terms
        self.nonlinear_poisson = nonlinear_poisson
        self.cfl = float(cfl)
        b = op.basis
        self.b = b
        self.Dv1 = _v1_derivative_matrix(b)
        self.Dv1_full = np.kron(self.Dv1, np.eye(b.nr))
        self.chi0 = b.invariants[0]
        self.mass_w = self.chi0 * b.w
        self.v1chi0 = b.v1 * self.chi0
        self._dv_min = np.min(np.diff(np.unique(np.round(b.v1, 12))))
        self.props = np.empty((grid.nh, b.n, b.n), dtype=complex)
        for k, eta in enumerate(grid.eta):
            self.props[k] = scipy.linalg.expm(
                mode_matrix(op, eta) * (self.dt / 2.0))

    # -------------------------------------------------------------- #

    def density(self, coef):
        return self.grid.to_physical(coef @ self.mass_w)

    def solve_phi(self, n_x):
        if self.nonlinear_poisson:
            return poisson_newton(self.grid, n_x)
        c = self.grid.to_coefficients(-n_x) / (1.0 + self.grid.eta ** 2)
        return self.grid.to_physical(c)

    def _half_linear(self, coef):
        return np.einsum("kij,kj->ki", self.props, coef)

    def _quadratic_rhs(self, coef):
        """Explicit sources in physical space; returns coefficient rhs."""
        g = self.grid
        f_x = g.to_physical(coef, axis=0)       # (nx, n) real field
        f_x = np.real(f_x)
        n_x = f_x @ self.mass_w
        phi = self.solve_phi(n_x)
        dphi = g.to_physical(g.derivative_coefficients(g.to_coefficients(phi)))
        rhs = np.zeros_like(f_x)
        if self.field_terms:
            rhs += 0.5 * dphi[:, None] * (self.b.v1[None, :] * f_x)
            rhs -= dphi[:, None] * (f_x @ self.Dv1_full.T)
            # beyond-linear part of the field source (the linear response
            # is inside the propagator)
            phi_lin = g.to_physical(g.to_coefficients(-n_x)
                                    / (1.0 + g.eta ** 2))
            dphi_nl = g.to_physical(g.derivative_coefficients(
                g.to_coefficients(phi - phi_lin)))
            rhs += dphi_nl[:, None] * self.v1chi0[None, :]
            cfl_speed = np.abs(dphi).max()
            if self.dt * cfl_speed > self.cfl * self._dv_min:
                raise CFLViolation(
                    "field advection dt*|dphi|=%.2e exceeds %.2e"
                    % (self.dt * cfl_speed, self.cfl * self._dv_min))
        if self.gamma is not None:
            rhs += apply_gamma(self.gamma, f_x, f_x)
        return g.to_coefficients(rhs, axis=0), phi

    def step(self, state: KineticState):
        coef = self._half_linear(state.coef)
        if self.field_terms or self.gamma is not None:
            r1, _ = self._quadratic_rhs(coef)
            mid = coef + 0.5 * self.dt * r1
            r2, _ = self._quadratic_rhs(mid)
            coef = coef + self.dt * r2
        coef = self._half_linear(coef)
        n_x = self.density(coef)
        phi = self.solve_phi(n_x)
        norm = float(np.abs(coef).max())
        if not np.isfinite(norm):
            raise Instability("non-finite state at t=%g" % (state.t + self.dt))
        return KineticState(coef, phi, state.t + self.dt)


# ---------------------------------------------------------------------- #
# pointwise decay study
# ---------------------------------------------------------------------- #

def diffusive_profile(t, x, k=0.5):
    """Algebraic space-time profile centered on the three wave lines."""
    betas = (-np.sqrt(8.0 / 3.0), 0.0, np.sqrt(8.0 / 3.0))
    out = np.zeros_like(np.asarray(x, dtype=float))
    for b in betas:
        out += (1.0 + (x - b * t) ** 2 / (1.0 + t)) ** (-k)
    return out


def initial_state(op: CollisionOperator, grid: SpaceGrid, delta0=1e-3,
                  gamma0=1.0, seed=None, nonlinear_poisson=True):
    """Localized small initial datum delta0 (1+x^2)^{-gamma0} seed(v)."""
    b = op.basis
    seed = b.invariants[0] if seed is None else np.asarray(seed, dtype=float)
    bump = delta0 * (1.0 + grid.x ** 2) ** (-gamma0)
    f_x = np.outer(bump, seed)
    coef = grid.to_coefficients(f_x, axis=0)
    n_x = f_x @ (b.invariants[0] * b.w)
    phi = poisson_newton(grid, n_x) if nonlinear_poisson else \
        grid.to_physical(grid.to_coefficients(-n_x) / (1.0 + grid.eta ** 2))
    return KineticState(coef, phi, 0.0)


def state_diagnostics(stepper: NonlinearStepper, state: KineticState):
    """Pointwise sup norms and profile-normalized ratios at one time."""
    b = stepper.b
    g = stepper.grid
    f_x = np.real(g.to_physical(state.coef, axis=0))
    w3 = (1.0 + b.v1 ** 2 + b.vr ** 2) ** 1.5
    w2 = 1.0 + b.v1 ** 2 + b.vr ** 2
    sup_f = np.abs(f_x * w3[None, :]).max(axis=1)          # L^inf_{v,3}
    dvf = f_x @ stepper.Dv1_full.T
    sup_dvf = np.abs(dvf * w2[None, :]).max(axis=1)        # L^inf_{v,2}
    phi = state.phi
    dphi = g.to_physical(g.derivative_coefficients(g.to_coefficients(phi)))
    # density time derivative from the continuity relation d_t n = -d_x m1
    m1_x = f_x @ (b.v1 * stepper.mass_w)
    dn_dt = -np.real(g.to_physical(
        g.derivative_coefficients(g.to_coefficients(m1_x))))
    phit = field_time_derivative(g, phi, dn_dt)
    prof = diffusive_profile(state.t, g.x, 0.5)
    r_half = (1.0 + state.t) ** (-0.5) * prof
    r_one = (1.0 + state.t) ** (-1.0) * prof
    return {
        "t": state.t,
        "sup_f": float(sup_f.max()),
        "sup_dvf": float(sup_dvf.max()),
        "sup_phi": float(np.abs(phi).max()),
        "sup_dphi": float(np.abs(dphi).max()),
        "sup_phit": float(np.abs(phit).max()),
        "ratio_f": float((sup_f / r_half).max()),
        "ratio_dvf": float((sup_dvf / r_half).max()),
        "ratio_field": float(((np.abs(dphi) + np.abs(phit)) / r_one).max()),
    }


def decay_study(op: CollisionOperator, grid: SpaceGrid, gamma: GammaTensor,
                t_end=60.0, dt=0.1, delta0=1e-3, gamma0=1.0,
                sample_every=10, progress=None):
    """Integrate the full system and collect the pointwise-decay report.

    Returns a dict with the diagnostic time series and fitted exponents of
    the weighted velocity sup norm and of the field gradients over
    t in [10, t_end].
    """
    stepper = NonlinearStepper(op, grid, dt, gamma=gamma,
                               field_terms=True, nonlinear_poisson=True)
    state = initial_state(op, grid, delta0, gamma0)
    rows = [state_diagnostics(stepper, state)]
    nsteps = int(round(t_end / dt))
    for k in range(1, nsteps + 1):
        state = stepper.step(state)
        if k % sample_every == 0 or k == nsteps:
            rows.append(state_diagnostics(stepper, state))
            if progress:
                progress(rows[-1])
    ts = np.array([r["t"] for r in rows])
    sel = ts >= 10.0
    p_f, _, r2_f = power_law_fit(ts[sel], np.array(
        [r["sup_f"] for r in rows])[sel])
    p_dv, _, r2_dv = power_law_fit(ts[sel], np.array(
        [r["sup_dvf"] for r in rows])[sel])
    p_field, _, r2_field = power_law_fit(ts[sel], np.array(
        [r["sup_dphi"] + r["sup_phit"] for r in rows])[sel])
    q = np.array([r["ratio_f"] for r in rows])[sel]
    slope_q = float(np.polyfit(np.log1p(ts[sel]), np.log(q), 1)[0])
    return {
        "rows": rows,
        "exponent_f": p_f, "r2_f": r2_f,
        "exponent_dvf": p_dv, "r2_dvf": r2_dv,
        "exponent_field": p_field, "r2_field": r2_field,
        "q_log_slope": slope_q,
    }
