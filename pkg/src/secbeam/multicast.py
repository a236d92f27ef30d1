"""Minimum-power multicast beamforming under per-user MSE constraints.

A single transmit beam must serve every user at a common SINR target.  With
the targets recast as MSE ceilings (eps = 1/(1+S)), the transmit-side
problem for fixed receive beams is a small second-order cone program; MMSE
receive updates for a fixed transmit beam are closed-form.  Alternating the
two shrinks the information power monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BeamformerSolution, complex_gaussian, mse_of_sinr
from .socp import solve_cone_program

__all__ = [
    "SocpProblem",
    "SocpSolution",
    "KktResiduals",
    "build_socp_problem",
    "solve_socp",
    "update_multicast_rx",
    "multicast_design",
    "multicast_sinr",
]

LOOP_TOL = 1e-6
MAX_ROUNDS = 200
# Fraction of the MSE budget granted to the initial receive-beam noise term.
# Unit-norm random beams would put sigma_n^2 >= eps into every constraint and
# leave the cones empty, so the random directions are scaled down instead.
INIT_NOISE_BUDGET = 0.25


@dataclass
class SocpProblem:
    """Transmit-beam cone program for fixed receive beams.

    Minimizes the beam norm ``||u||`` (epigraph variable t) subject to one
    cone per user: |row_k . u - 1| <= sqrt(mse_target_k - noise_term_k),
    where row_k = r_k^H H_k and noise_term_k = sigma_n^2 ||r_k||^2.  A
    nonpositive radicand means no transmit beam can meet that user's MSE
    ceiling with the current receive beam.
    """

    effective_rows: np.ndarray  # (K, N_t) complex
    mse_targets: np.ndarray  # (K,)
    noise_terms: np.ndarray  # (K,)

    @property
    def cone_radii_sq(self):
        return self.mse_targets - self.noise_terms

    def is_feasible(self):
        return bool(np.all(self.cone_radii_sq > 0))

    def to_conic(self):
        """Real-embedded inequality-form data (c, G, h, dims).

        The complex beam becomes x[1:] = [Re u; Im u] with x[0] the norm
        epigraph; each user contributes a 3-dimensional cone holding the
        constant radius and the real/imaginary parts of row_k . u - 1.
        """
        K, n_tx = self.effective_rows.shape
        n = 1 + 2 * n_tx
        dims = [n] + [3] * K
        m = n + 3 * K
        G = np.zeros((m, n))
        h = np.zeros(m)
        G[:n, :] = -np.eye(n)
        off = n
        radii = np.sqrt(self.cone_radii_sq)
        for k in range(K):
            ar = self.effective_rows[k].real
            ai = self.effective_rows[k].imag
            h[off] = radii[k]
            h[off + 1] = 1.0
            G[off + 1, 1:1 + n_tx] = ar
            G[off + 1, 1 + n_tx:] = -ai
            G[off + 2, 1:1 + n_tx] = ai
            G[off + 2, 1 + n_tx:] = ar
            off += 3
        c = np.zeros(n)
        c[0] = 1.0
        return c, G, h, dims


@dataclass
class KktResiduals:
    primal: float
    dual: float
    gap: float
    relative_gap: float


@dataclass
class SocpSolution:
    u_opt: np.ndarray  # complex transmit vector (power absorbed in its norm)
    objective: float
    status: str  # "optimal" | "infeasible" | "max_iterations"
    kkt_residuals: KktResiduals


def build_socp_problem(chans, rx_beams, cfg):
    """Assemble the cone program for the current receive beams."""
    K = chans.n_users
    rows = np.empty((K, cfg.n_tx), dtype=complex)
    noise_terms = np.empty(K)
    for k in range(K):
        rows[k] = rx_beams[k].conj() @ chans.user_channels[k]
        noise_terms[k] = cfg.noise_var_rx * float(np.linalg.norm(rx_beams[k]) ** 2)
    targets = mse_of_sinr(cfg.sinr_targets)
    return SocpProblem(effective_rows=rows, mse_targets=np.atleast_1d(targets),
                       noise_terms=noise_terms)


def solve_socp(prob, tol=1e-8):
    """Solve the transmit-beam program to global optimality (it is convex)."""
    empty = KktResiduals(np.nan, np.nan, np.nan, np.nan)
    if not prob.is_feasible():
        return SocpSolution(np.zeros(prob.effective_rows.shape[1], complex),
                            np.nan, "infeasible", empty)
    c, G, h, dims = prob.to_conic()
    res = solve_cone_program(c, G, h, dims, tol=tol)
    n_tx = prob.effective_rows.shape[1]
    u = res.x[1:1 + n_tx] + 1j * res.x[1 + n_tx:]
    kkt = KktResiduals(res.primal_residual, res.dual_residual, res.gap,
                       res.relative_gap)
    return SocpSolution(u, float(np.linalg.norm(u)), res.status, kkt)


def update_multicast_rx(u, chans, cfg):
    """MMSE receive beams for a fixed transmit vector, one per user."""
    K = chans.n_users
    out = np.empty((K, cfg.n_rx), dtype=complex)
    for k in range(K):
        hu = chans.user_channels[k] @ u
        cov = np.outer(hu, hu.conj()) + cfg.noise_var_rx * np.eye(cfg.n_rx)
        out[k] = np.linalg.solve(cov, hu)
    return out


def _random_rx_init(chans, cfg, rng):
    # Random directions, scaled so the receive-noise term eats only part of
    # the MSE budget and every cone starts out nonempty.
    eps = np.atleast_1d(mse_of_sinr(cfg.sinr_targets))
    out = np.empty((cfg.n_users, cfg.n_rx), dtype=complex)
    for k in range(chans.n_users):
        d = complex_gaussian(rng, cfg.n_rx)
        d /= np.linalg.norm(d)
        out[k] = d * np.sqrt(INIT_NOISE_BUDGET * eps[k] / cfg.noise_var_rx)
    return out


def multicast_design(chans, cfg, rng, full_output=False):
    """Alternate the cone program with MMSE receive updates until ``||u||`` settles.

    Convergence is measured on the objective rather than the beams, which
    would be compared up to phase.  The returned unit beam carries fraction
    ``||u||^2 / P`` of the power; past the budget the full-power fallback
    applies (all power to the information signal) and the solution is
    flagged infeasible.
    """
    rx = _random_rx_init(chans, cfg, rng)
    u = None
    converged = False
    power_history = []
    for _ in range(MAX_ROUNDS):
        prob = build_socp_problem(chans, rx, cfg)
        sol = solve_socp(prob)
        if sol.status != "optimal":
            raise RuntimeError(f"transmit-beam solve failed: {sol.status}")
        u_new = sol.u_opt
        power_history.append(float(np.linalg.norm(u_new) ** 2))
        if u is not None and abs(np.linalg.norm(u_new) - np.linalg.norm(u)) \
                <= LOOP_TOL * np.linalg.norm(u):
            u = u_new
            converged = True
            break
        u = u_new
        rx = update_multicast_rx(u, chans, cfg)

    info_power = float(np.linalg.norm(u) ** 2)
    fraction = info_power / cfg.total_power
    feasible = fraction <= 1.0
    if not feasible:
        fraction = 1.0
    beam = u / np.linalg.norm(u)
    out = BeamformerSolution(
        tx_beams=beam[np.newaxis, :],
        rx_beams=rx,
        power_fractions=np.array([fraction]),
        feasible=feasible,
        converged=converged,
    )
    if full_output:
        return out, {"power_history": power_history, "rounds": len(power_history)}
    return out


def multicast_sinr(chans, sol, cfg, k):
    """Achieved SINR of user k: single stream, jamming nulled by construction."""
    if not 0 <= k < chans.n_users:
        raise IndexError(f"user index {k} out of range")
    r = sol.rx_beams[k]
    amp = r.conj() @ chans.user_channels[k] @ sol.tx_beams[0]
    signal = sol.power_fractions[0] * cfg.total_power * abs(amp) ** 2
    noise = cfg.noise_var_rx * float(np.linalg.norm(r) ** 2)
    return float(signal / noise)
