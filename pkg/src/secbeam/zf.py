"""Coordinated zero-forcing beamforming with closed-form power allocation.

Each transmit beam is confined to the nullspace of the other users' effective
channel rows, which kills multiuser interference exactly; the matching
receive beam is then the maximum-ratio combiner.  Because each side depends
on the other, the pair is computed by alternating updates to a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import BeamformerSolution

__all__ = ["ZfWorkspace", "zf_design", "zf_power_allocation"]

MAX_ITER = 100
BEAM_TOL = 1e-8


@dataclass
class ZfWorkspace:
    """Per-user excluded-channel stacks and their SVD factors (last iterate)."""

    excluded_channels: list  # K matrices, each (K-1) x N_t
    svd_factors: list  # K tuples (U, s, Vh)


def _fix_phase(v):
    # Beams are phase-ambiguous; pin the largest entry to the positive real
    # axis so iterates are comparable and runs reproducible.
    i0 = int(np.argmax(np.abs(v)))
    pivot = v[i0]
    if pivot != 0:
        v = v * (pivot.conjugate() / abs(pivot))
    return v


def _null_beam(excluded, channel):
    """Unit beam in the nullspace of ``excluded`` with maximal gain through ``channel``.

    The nullspace generally has dimension N_t - K + 1 > 1; among the
    zero-singular-value directions we take the one maximizing the user's own
    channel gain, which is what makes the coordinated update converge to a
    useful fixed point.
    """
    u_f, s_f, vh = np.linalg.svd(excluded, full_matrices=True)
    basis = vh[excluded.shape[0]:].conj().T  # N_t x (N_t - K + 1)
    proj = channel @ basis
    _, _, vh2 = np.linalg.svd(proj)
    beam = basis @ vh2[0].conj()
    return _fix_phase(beam / np.linalg.norm(beam)), (u_f, s_f, vh)


def zf_design(chans, cfg, return_workspace=False):
    """Alternate nullspace transmit beams with max-ratio receive combining.

    Receive beams start from each user's dominant left singular vector and
    the two updates alternate until the largest beam change drops below
    ``BEAM_TOL`` or ``MAX_ITER`` is hit (the solution is then flagged via
    ``converged=False`` but still returned).  K=1 degenerates to max-ratio
    transmission on the dominant singular pair.
    """
    H = chans.user_channels
    K, n_rx, n_tx = H.shape
    if K >= n_tx:
        raise ValueError("coordinated zero-forcing needs K < N_t")

    rx = np.empty((K, n_rx), dtype=complex)
    for k in range(K):
        u_f, _, _ = np.linalg.svd(H[k])
        rx[k] = u_f[:, 0]
    tx = np.zeros((K, n_tx), dtype=complex)
    rows = np.array([rx[k].conj() @ H[k] for k in range(K)])

    if K == 1:
        _, _, vh = np.linalg.svd(H[0])
        tx[0] = _fix_phase(vh[0].conj())
        w = H[0] @ tx[0]
        rx[0] = w / np.linalg.norm(w)
        workspace = ZfWorkspace(excluded_channels=[np.zeros((0, n_tx), complex)],
                                svd_factors=[None])
        converged = True
    else:
        converged = False
        workspace = ZfWorkspace(excluded_channels=[None] * K, svd_factors=[None] * K)
        for _ in range(MAX_ITER):
            max_change = 0.0
            for k in range(K):
                excluded = np.delete(rows, k, axis=0)
                beam, factors = _null_beam(excluded, H[k])
                max_change = max(max_change, float(np.linalg.norm(beam - tx[k])))
                tx[k] = beam
                w = H[k] @ beam
                rx[k] = w / np.linalg.norm(w)
                rows[k] = rx[k].conj() @ H[k]
                workspace.excluded_channels[k] = excluded
                workspace.svd_factors[k] = factors
            if max_change < BEAM_TOL:
                converged = True
                break

    sol = BeamformerSolution(
        tx_beams=tx,
        rx_beams=rx,
        power_fractions=np.zeros(K),
        feasible=True,
        converged=converged,
    )
    fractions, feasible = zf_power_allocation(chans, sol, cfg)
    sol = replace(sol, power_fractions=fractions, feasible=feasible)
    if return_workspace:
        return sol, workspace
    return sol


def zf_power_allocation(chans, sol, cfg):
    """Per-user power fractions hitting the SINR targets exactly.

    With interference and jamming both nulled, user k needs
    rho_k = sigma_n^2 * S_k / (||H_k t_k||^2 * P).  If the fractions sum
    past one, all power goes to the users instead of the jammer: the
    fractions are rescaled proportionally to sum to one and the solution is
    flagged infeasible.  A user with zero effective gain can never meet a
    positive target and also flags the solution.
    """
    H = chans.user_channels
    K = chans.n_users
    gains = np.array([np.linalg.norm(H[k] @ sol.tx_beams[k]) ** 2 for k in range(K)])
    feasible = True
    fractions = np.zeros(K)
    ok = gains > 0
    if not np.all(ok):
        feasible = False
    fractions[ok] = cfg.noise_var_rx * cfg.sinr_targets[ok] / (gains[ok] * cfg.total_power)
    total = fractions.sum()
    if total > 1.0:
        fractions /= total
        feasible = False
    return fractions, feasible
