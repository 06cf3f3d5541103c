"""Pointwise Green's-function synthesis on a periodic spatial box.

The Green's function of the linearized system is assembled per spatial
frequency from the semigroup exp(t B(eta)) and split into

* a low-frequency fluid part (rank-per-branch synthesis over |eta| < r0/2),
* a family of kinetic wave fronts J_0, J_1, ... built by a Picard
  recursion in frequency space around the damped free streaming flow, and
* exponentially small remainders measured pointwise in (t, x).

All operator-valued objects are evaluated in seed-action mode: fields are
the application of the operator to a fixed family of velocity profiles.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

from .collision import CollisionOperator
from .errors import AliasingWarning, IllConditioned, QuadratureWarning
from .spectral import eigen_branches_at, mode_matrix
from .velocity import VelocityBasis


class SpaceGrid:
    """Periodic grid on [-L, L) with real-field Fourier synthesis.

    Frequency coefficients are stored for the non-negative modes
    eta_k = pi k / L, k = 0..nx/2; fields are real so negative modes follow
    by conjugation.  A point source at x = 0 has the flat coefficient
    profile 1/(2L) (band-limited mollification).
    """

    def __init__(self, box_half_length=200.0, nx=4096):
        self.L = float(box_half_length)
        self.nx = int(nx)
        if self.nx % 2:
            raise ValueError("nx must be even")
        self.dx = 2.0 * self.L / self.nx
        self.x = -self.L + self.dx * np.arange(self.nx)
        self.eta = np.pi * np.arange(self.nx // 2 + 1) / self.L
        self.nh = self.nx // 2 + 1

    def delta_coefficients(self):
        return np.full(self.nh, 1.0 / (2.0 * self.L))

    def to_physical(self, coef, axis=-1):
        """Real field on self.x from non-negative-mode coefficients."""
        f = np.fft.irfft(np.moveaxis(np.asarray(coef), axis, -1) * self.nx,
                         n=self.nx, axis=-1)
        f = np.roll(f, self.nx // 2, axis=-1)
        return np.moveaxis(f, -1, axis)

    def to_coefficients(self, field, axis=-1):
        g = np.moveaxis(np.asarray(field), axis, -1)
        g = np.roll(g, -self.nx // 2, axis=-1)
        c = np.fft.rfft(g, axis=-1) / self.nx
        return np.moveaxis(c, -1, axis)

    def derivative_coefficients(self, coef, axis=-1, order=1):
        c = np.moveaxis(np.asarray(coef, dtype=complex), axis, -1)
        c = c * (1j * self.eta) ** order
        return np.moveaxis(c, -1, axis)

    def poisson_coefficients(self, coef, axis=-1):
        """(I - d_xx)^{-1} in frequency space."""
        c = np.moveaxis(np.asarray(coef, dtype=complex), axis, -1)
        c = c / (1.0 + self.eta ** 2)
        return np.moveaxis(c, -1, axis)

    def poisson_kernel(self):
        """Physical kernel of (I - d_xx)^{-1}; continuum limit exp(-|x|)/2."""
        return self.to_physical(self.delta_coefficients() / (1.0 + self.eta ** 2))


# ---------------------------------------------------------------------- #
# full Green's function, seed-action mode
# ---------------------------------------------------------------------- #

def green_action(op: CollisionOperator, grid: SpaceGrid, seeds, ts,
                 scale_delta=True):
    """Frequency coefficients of G(t) applied to seed profiles.

    Returns complex array (n_seeds, n_times, grid.nh, n).  Each frequency
    uses one dense eigendecomposition of B(eta); falls back to expm when
    the eigenbasis is ill-conditioned.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=complex))
    ts = np.asarray(ts, dtype=float)
    ns, n = seeds.shape
    amp = 1.0 / (2.0 * grid.L) if scale_delta else 1.0
    out = np.empty((ns, len(ts), grid.nh, n), dtype=complex)
    for k, eta in enumerate(grid.eta):
        B = mode_matrix(op, eta)
        w, V = scipy.linalg.eig(B)
        if np.linalg.cond(V) < 1e10:
            coef = np.linalg.solve(V, seeds.T)          # (n, ns)
            phases = np.exp(np.multiply.outer(ts, w))   # (nt, n)
            out[:, :, k, :] = np.einsum("ij,tj,js->sti", V, phases, coef) * amp
        else:
            for it, t in enumerate(ts):
                out[:, it, k, :] = (scipy.linalg.expm(B * t) @ seeds.T).T * amp
    return out


def synthesize_green(op: CollisionOperator, grid: SpaceGrid, seeds, ts,
                     r0_hat, scale_delta=True):
    """Green's-function coefficients with low/high frequency split.

    Returns a dict with the full coefficient field ``coef`` of shape
    (n_seeds, n_times, nh, n) and the masked split fields ``low``
    (|eta| < r0_hat / 2) and ``high`` (the complement).  Warns when the
    Nyquist mode carries more than 1e-6 of the total spectral energy.
    """
    coef = green_action(op, grid, seeds, ts, scale_delta=scale_delta)
    w = op.basis.w
    ts = np.asarray(ts, dtype=float)
    # t = 0 is the band-limited delta itself (flat in eta by construction),
    # so the resolution check only applies to evolved times
    energy = np.einsum("stki,i->tk", np.abs(coef) ** 2, w)[ts > 0]
    if energy.size:
        ratio = energy[:, -1] / np.maximum(energy.sum(axis=1), 1e-300)
        if ratio.max() > 1e-6:
            warnings.warn(
                "Nyquist mode carries %.2e of the spectral energy"
                % float(ratio.max()), AliasingWarning)
    low_mask = grid.eta < r0_hat / 2.0
    low = np.where(low_mask[None, None, :, None], coef, 0.0)
    return {"coef": coef, "low": low, "high": coef - low, "low_mask": low_mask}


# ---------------------------------------------------------------------- #
# fluid (low-frequency) part
# ---------------------------------------------------------------------- #

class FluidPart:
    """Rank-per-branch low-frequency part of the Green's function.

    Synthesizes  sum_j int_{|eta|<r0/2} exp(i x eta + lambda_j t)
    psi_j <dual psi_j| deta  on the discrete mode set of the grid, one
    term per fluid branch of the sector-0 operator.
    """

    def __init__(self, op: CollisionOperator, grid: SpaceGrid, r0_hat, mu_hat=None):
        self.op = op
        self.grid = grid
        self.cut = r0_hat / 2.0
        b = op.basis
        sel = grid.eta < self.cut
        self.mode_idx = np.where(sel)[0]
        etas = grid.eta[self.mode_idx]
        bs = eigen_branches_at(op, etas, mu_hat=mu_hat)
        self.branches = bs
        self.lam = bs.lam                       # (nb, nm)
        nb, nm = self.lam.shape
        self.psi = bs.psi                       # (nb, nm, n)
        # dual profile: (g, psi)_eta = (g, dual) in the plain pairing
        dual = np.array(self.psi, dtype=complex)
        if b.sector == 0:
            chi0 = b.invariants[0]
            s = 1.0 / (1.0 + etas ** 2)
            mass = self.psi @ (chi0 * b.w)
            dual = dual + (s[None, :] * mass)[:, :, None] * chi0[None, None, :]
        self.dual = dual
        self.amp = 1.0 / (2.0 * grid.L)

    def mode_coefficients(self, t, g, left=None, right=None):
        """Frequency coefficients of [G1(t) g] on the full grid mode set."""
        b = self.op.basis
        g = np.asarray(g, dtype=complex)
        if right == "micro":
            g = b.project(g, "micro")
        coef = np.zeros((self.grid.nh, b.n), dtype=complex)
        load = self.dual @ (b.w * g)            # (nb, nm)
        phases = np.exp(self.lam * t)
        psi = self.psi
        if left is not None:
            psi = np.array([[b.project(p, left) for p in row] for row in psi])
        coef[self.mode_idx] = np.einsum("jm,jm,jmk->mk", phases, load, psi) * self.amp
        return coef

    def action(self, t, g, left=None, right=None):
        """Physical field (nx, n) of [P_left G1(t) P_right g](x, v)."""
        return self.grid.to_physical(self.mode_coefficients(t, g, left, right), axis=0)

    def macro_block(self, t):
        """3x3 macro kernel block in the invariant coordinates, per x."""
        b = self.op.basis
        A = self.psi @ (b.invariants * b.w).T    # (nb, nm, 3)
        D = self.dual @ (b.invariants * b.w).T   # (nb, nm, 3)
        phases = np.exp(self.lam * t)
        coef = np.zeros((self.grid.nh, 3, 3), dtype=complex)
        coef[self.mode_idx] = np.einsum("jm,jma,jmb->mab", phases, A, D) * self.amp
        return self.grid.to_physical(coef, axis=0)


# ---------------------------------------------------------------------- #
# kinetic wave fronts (Picard recursion in frequency space)
# ---------------------------------------------------------------------- #

def _exp_moments(c, delta, p):
    """I_m(c) = int_0^delta exp(-c (delta - s)) s^m ds for m = 0..p-1.

    Stable downward-free recurrence I_m = delta^m / c - (m / c) I_{m-1};
    c has positive real part bounded away from zero here.
    """
    out = np.empty((p,) + c.shape, dtype=complex)
    ecd = np.exp(-c * delta)
    out[0] = (1.0 - ecd) / c
    for m in range(1, p):
        out[m] = (delta ** m - m * out[m - 1]) / c
    return out, ecd


class KineticWaves:
    """Recursive wave-front family J_0 .. J_{levels-1} applied to seeds.

    The recursion (per frequency eta, acting on a seed g):

        J_0(t) = exp(-(nu + i v1 eta) t) g
        d_t J_k = -(nu + i v1 eta) J_k + K J_{k-1} + i v1 eta chi0 Theta_{k-1}
        (1 + eta^2) Theta_k = -(J_k, chi0)

    integrated interval-by-interval with Gauss collocation nodes and exact
    exponential-polynomial product integration, so the only error is the
    polynomial interpolation of the source between nodes.
    """

    def __init__(self, op: CollisionOperator, grid: SpaceGrid, seeds, out_ts,
                 levels=7, interval=0.5, nodes=4, guard=False):
        self.op = op
        self.grid = grid
        b = op.basis
        self.seeds = np.atleast_2d(np.asarray(seeds, dtype=complex))
        self.out_ts = np.asarray(out_ts, dtype=float)
        self.levels = int(levels)
        ns, n = self.seeds.shape
        nh = grid.nh
        eta = grid.eta
        amp = 1.0 / (2.0 * grid.L)

        Keff = (op.Lmat + np.diag(op.nu)).astype(complex)
        chi0 = b.invariants_raw[0]
        mass_w = chi0 * b.w
        c = (op.nu[None, :] + 1j * np.outer(eta, b.v1))        # (nh, n)
        src_field = 1j * np.outer(eta, b.v1 * chi0)            # (nh, n)
        s_eta = 1.0 / (1.0 + eta ** 2)

        T = float(self.out_ts.max())
        nsteps = int(np.ceil(T / interval - 1e-12))
        edges = np.linspace(0.0, nsteps * interval, nsteps + 1)
        xg, wg = leggauss(nodes)
        p = nodes
        # monomial conversion on the reference interval
        tau_ref = (xg + 1.0) / 2.0
        Vinv = np.linalg.inv(np.vander(tau_ref, p, increasing=True).T).T

        def theta_of(J):
            return -(J @ mass_w) * s_eta[None, :]              # (ns, nh)

        # running values at the current interval start, per level
        J_start = np.zeros((self.levels, ns, nh, n), dtype=complex)
        J_start[0] = amp * np.broadcast_to(self.seeds[:, None, :], (ns, nh, n))

        nt = len(self.out_ts)
        # wave_sum excludes the top level: the highest computed front is the
        # leading term of the remainder, not part of the truncated wave sum
        self.wave_sum = np.zeros((ns, nt, nh, n), dtype=complex)
        self.top = np.zeros((ns, nt, nh, n), dtype=complex)
        self.theta_sum = np.zeros((ns, nt, nh), dtype=complex)
        self.theta_top = np.zeros((ns, nt, nh), dtype=complex)
        self._record(0.0, J_start, theta_of)

        for istep in range(nsteps):
            t0, t1 = edges[istep], edges[istep + 1]
            h = t1 - t0
            taus = tau_ref * h                                  # node offsets
            # precompute exponential moments for each node offset and for h
            targets = np.concatenate([taus, [h]])
            moms = []
            for d in targets:
                I, ecd = _exp_moments(c, d, p)
                moms.append((I, ecd))
            J_nodes_prev = None
            J_end = np.empty_like(J_start)
            for k in range(self.levels):
                if k == 0:
                    J_nodes = np.empty((p, ns, nh, n), dtype=complex)
                    for q in range(p):
                        J_nodes[q] = J_start[0] * moms[q][1][None, :, :]
                    J_end[0] = J_start[0] * moms[p][1][None, :, :]
                else:
                    # source at the interval nodes from the previous level
                    F = np.empty((p, ns, nh, n), dtype=complex)
                    for q in range(p):
                        F[q] = J_nodes_prev[q] @ Keff.T
                        F[q] += theta_of(J_nodes_prev[q])[:, :, None] * src_field[None, :, :]
                    # monomial coefficients in s/h on [0, 1]
                    coefs = np.tensordot(Vinv, F, axes=(1, 0))  # (p, ns, nh, n)
                    J_nodes = np.empty((p, ns, nh, n), dtype=complex)
                    for qt, d in enumerate(targets):
                        I, ecd = moms[qt]
                        acc = J_start[k] * ecd[None, :, :]
                        for m in range(p):
                            acc = acc + coefs[m] * (I[m] / h ** m)[None, :, :]
                        if qt < p:
                            J_nodes[qt] = acc
                        else:
                            J_end[k] = acc
                J_nodes_prev = J_nodes
            J_start = J_end
            self._record(t1, J_start, theta_of)

        if guard:
            ref = KineticWaves(op, grid, seeds, out_ts, levels=levels,
                               interval=interval, nodes=2 * nodes, guard=False)
            drift = float(np.abs(self.wave_sum - ref.wave_sum).max())
            if drift > 1e-6:
                warnings.warn(
                    "wave sum changes by %.2e when doubling time nodes" % drift,
                    QuadratureWarning)

    def _record(self, t, J_levels, theta_of):
        hits = np.where(np.abs(self.out_ts - t) < 1e-9)[0]
        for it in hits:
            self.wave_sum[:, it] = J_levels[:-1].sum(axis=0)
            self.top[:, it] = J_levels[-1]
            th = np.stack([theta_of(J) for J in J_levels])
            self.theta_sum[:, it] = th[:-1].sum(axis=0)
            self.theta_top[:, it] = th[-1]

    # ------------------------------------------------------------------ #

    def free_flow_coefficients(self, t):
        """Closed form of the level-0 coefficients at time t."""
        b = self.op.basis
        c = (self.op.nu[None, :] + 1j * np.outer(self.grid.eta, b.v1))
        amp = 1.0 / (2.0 * self.grid.L)
        return amp * np.exp(-c * t)[None, :, :] * self.seeds[:, None, :]


def weighted_field_norm(basis: VelocityBasis, coef_field):
    """Velocity L2 norm of a (…, n) coefficient field."""
    return np.sqrt(np.einsum("...i,i->...", np.abs(coef_field) ** 2, basis.w))


# ---------------------------------------------------------------------- #
# fits
# ---------------------------------------------------------------------- #

def power_law_fit(ts, amps):
    """Fit amp = C (1+t)^p; returns (p, C, r_squared)."""
    x = np.log1p(np.asarray(ts, dtype=float))
    y = np.log(np.maximum(np.asarray(amps, dtype=float), 1e-300))
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[1]), float(np.exp(coef[0])), r2


def linear_log_fit(x, vals):
    """Fit log(vals) = a + b x; returns (b, a, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.log(np.maximum(np.asarray(vals, dtype=float), 1e-300))
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[1]), float(coef[0]), r2


def hump_centers(x, profile, expected, window):
    """Locations of local maxima of profile near each expected center.

    Returns array of located centers (nan when no local max falls in the
    window around the expected position).
    """
    x = np.asarray(x)
    profile = np.asarray(profile)
    found = []
    for xe in np.atleast_1d(expected):
        sel = np.abs(x - xe) <= window
        if not np.any(sel):
            found.append(np.nan)
            continue
        idx = np.where(sel)[0]
        sub = profile[idx]
        k = int(np.argmax(sub))
        i = idx[k]
        if 0 < i < len(x) - 1:
            # quadratic refinement of the peak position
            y0, y1, y2 = profile[i - 1], profile[i], profile[i + 1]
            denom = (y0 - 2 * y1 + y2)
            shift = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-300 else 0.0
            shift = np.clip(shift, -1.0, 1.0)
            found.append(x[i] + shift * (x[1] - x[0]))
        else:
            found.append(x[i])
    return np.asarray(found)
