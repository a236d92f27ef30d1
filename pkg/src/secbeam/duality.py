"""Minimum-power joint transmit/receive beamforming via uplink-downlink duality.

The per-user SINR-constrained downlink problem is non-convex in the beam
pair, but the minimum sum power is the same on a dual uplink with the beam
roles swapped.  Alternating MMSE beam updates with exact power reallocation
on each link walks the sum power down monotonically to the joint optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import BeamformerSolution
from .zf import zf_design, _fix_phase

__all__ = [
    "InfeasibleTargets",
    "DualityState",
    "gain_table",
    "solve_power_allocation",
    "update_rx_beams",
    "update_tx_beams",
    "joint_design",
]

SUM_POWER_TOL = 1e-6
MAX_ITER = 500
RADIUS_MARGIN = 1e-9


class InfeasibleTargets(Exception):
    """The SINR target set cannot be met by any power allocation."""


@dataclass
class DualityState:
    """One iterate of the duality loop.

    ``gains[s, k]`` is the squared beam-coupling |w_k^H H_k t_s|^2; the
    downlink reads interference into user k down column k, the dual uplink
    reads interference into combiner k along row k.
    """

    tx_beams: np.ndarray  # (K, N_t), unit-norm rows
    rx_beams: np.ndarray  # (K, N_r), unit-norm rows
    downlink_powers: np.ndarray
    uplink_powers: np.ndarray
    gains: np.ndarray  # (K, K)
    iteration: int = 0
    sum_power_history: list = field(default_factory=list)

    def coupling_matrix(self, link):
        """Zero-diagonal interference coupling for 'downlink' or 'uplink'."""
        if link == "downlink":
            c = self.gains.T.copy()
        elif link == "uplink":
            c = self.gains.copy()
        else:
            raise ValueError(f"unknown link {link!r}")
        np.fill_diagonal(c, 0.0)
        return c

    def target_matrix(self, targets):
        return np.diag(np.asarray(targets, dtype=float) / np.diag(self.gains))


def gain_table(chans, tx_beams, rx_beams):
    """All squared couplings g[s, k] = |w_k^H H_k t_s|^2."""
    K = chans.n_users
    g = np.empty((K, K))
    for k in range(K):
        amps = rx_beams[k].conj() @ chans.user_channels[k] @ tx_beams.T
        g[:, k] = np.abs(amps) ** 2
    return g


def solve_power_allocation(coupling, target_diag, noise_power=1.0):
    """Powers meeting every SINR target with equality: x = (I - DC)^{-1} D n.

    ``coupling`` must be the zero-diagonal matrix whose row k holds the
    interference gains into stream k, and ``target_diag`` the diagonal
    matrix of target-to-direct-gain ratios.  Raises InfeasibleTargets when
    the spectral radius of DC reaches one (no finite power works) or the
    solve turns up a nonpositive power.
    """
    coupling = np.asarray(coupling, dtype=float)
    target_diag = np.asarray(target_diag, dtype=float)
    K = coupling.shape[0]
    if np.any(np.diag(coupling) != 0):
        raise ValueError("coupling matrix must have a zero diagonal")
    dc = target_diag @ coupling
    radius = float(np.max(np.abs(np.linalg.eigvals(dc)))) if K > 1 else 0.0
    if radius >= 1.0 - RADIUS_MARGIN:
        raise InfeasibleTargets(f"spectral radius {radius:.6f} >= 1")
    x = np.linalg.solve(np.eye(K) - dc, target_diag @ np.full(K, float(noise_power)))
    if np.any(x <= 0):
        raise InfeasibleTargets("power solve produced a nonpositive power")
    return x


def achieved_sinr(gains, powers, link, noise_power=1.0):
    """Per-stream SINR on the chosen link for a given power vector."""
    K = gains.shape[0]
    direct = np.diag(gains) * powers
    out = np.empty(K)
    for k in range(K):
        if link == "downlink":
            interf = gains[:, k] @ powers - gains[k, k] * powers[k]
        else:
            interf = gains[k, :] @ powers - gains[k, k] * powers[k]
        out[k] = direct[k] / (interf + noise_power)
    return out


def update_rx_beams(state, chans, noise_var=1.0):
    """MMSE receive beams for the current transmit beams and downlink powers."""
    K, n_rx = state.rx_beams.shape
    out = np.empty_like(state.rx_beams)
    for k in range(K):
        hk = chans.user_channels[k]
        steered = hk @ state.tx_beams.T  # (N_r, K) effective stream vectors
        cov = noise_var * np.eye(n_rx, dtype=complex)
        cov += (steered * state.downlink_powers) @ steered.conj().T
        w = np.linalg.solve(cov, steered[:, k])
        out[k] = _fix_phase(w / np.linalg.norm(w))
    return out


def update_tx_beams(state, chans, noise_var=1.0):
    """Transmit beams as MMSE combiners on the dual uplink.

    On the dual link the users transmit through the conjugated channels with
    their receive beams, so the base station's combiner for stream k is the
    regularized inverse applied to H_k^H w_k.  Scale factors are stripped:
    powers live exclusively in the allocation vectors.
    """
    K, n_tx = state.tx_beams.shape
    steered = np.empty((n_tx, K), dtype=complex)
    for j in range(K):
        steered[:, j] = chans.user_channels[j].conj().T @ state.rx_beams[j]
    cov = noise_var * np.eye(n_tx, dtype=complex)
    cov += (steered * state.uplink_powers) @ steered.conj().T
    out = np.empty_like(state.tx_beams)
    for k in range(K):
        t = np.linalg.solve(cov, steered[:, k])
        out[k] = _fix_phase(t / np.linalg.norm(t))
    return out


def joint_design(chans, cfg, full_output=False):
    """Minimum-power beamforming with per-user SINR constraints.

    Starts from the zero-forcing beams with an even power split, then loops
    receive-MMSE update -> uplink power solve -> transmit update -> downlink
    power solve until uplink and downlink sum powers agree to
    ``SUM_POWER_TOL`` (relative).  The resulting downlink powers divided by
    the budget give the power fractions; if they exceed the budget the
    proportional full-power fallback applies and the solution is flagged.
    """
    K = chans.n_users
    P = cfg.total_power
    noise = cfg.noise_var_rx
    targets = cfg.sinr_targets

    zf_sol = zf_design(chans, cfg)
    state = DualityState(
        tx_beams=zf_sol.tx_beams.copy(),
        rx_beams=zf_sol.rx_beams.copy(),
        downlink_powers=np.full(K, P / K),
        uplink_powers=np.zeros(K),
        gains=gain_table(chans, zf_sol.tx_beams, zf_sol.rx_beams),
    )

    converged = False
    for it in range(MAX_ITER):
        state.iteration = it
        state.rx_beams = update_rx_beams(state, chans, noise)
        state.gains = gain_table(chans, state.tx_beams, state.rx_beams)
        state.uplink_powers = solve_power_allocation(
            state.coupling_matrix("uplink"), state.target_matrix(targets), noise
        )
        state.tx_beams = update_tx_beams(state, chans, noise)
        state.gains = gain_table(chans, state.tx_beams, state.rx_beams)
        state.downlink_powers = solve_power_allocation(
            state.coupling_matrix("downlink"), state.target_matrix(targets), noise
        )
        sum_p = state.downlink_powers.sum()
        sum_q = state.uplink_powers.sum()
        state.sum_power_history.append(float(sum_p))
        if abs(sum_p - sum_q) <= SUM_POWER_TOL * sum_p:
            converged = True
            break

    fractions = state.downlink_powers / P
    feasible = fractions.sum() <= 1.0
    if not feasible:
        fractions = fractions / fractions.sum()
    sol = BeamformerSolution(
        tx_beams=state.tx_beams,
        rx_beams=state.rx_beams,
        power_fractions=fractions,
        feasible=feasible,
        converged=converged,
    )
    if full_output:
        return sol, state
    return sol
