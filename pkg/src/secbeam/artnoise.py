"""Artificial-noise construction: effective channel, nullspace, covariance.

The transmitter stacks the rows w_k^H H_k seen after receive combining into
an effective downlink channel, then radiates the leftover power isotropically
over that matrix's nullspace.  Receivers are unaffected by construction; only
the eavesdropper picks the jamming up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import complex_gaussian

__all__ = [
    "NoiseCovariance",
    "effective_channel",
    "nullspace_basis",
    "build_noise_covariance",
    "sample_noise",
]


@dataclass
class NoiseCovariance:
    """Jamming covariance together with the nullspace basis that shapes it.

    ``covariance`` is Hermitian PSD with trace equal to ``jam_power`` and
    support restricted to the columns of ``null_basis``.
    """

    null_basis: np.ndarray  # (N_t, null_dim), orthonormal columns
    covariance: np.ndarray  # (N_t, N_t) Hermitian PSD
    jam_power: float

    def __post_init__(self):
        if self.jam_power < 0:
            raise ValueError("jamming power must be nonnegative")
        if not np.allclose(self.covariance, self.covariance.conj().T, atol=1e-12):
            raise ValueError("covariance must be Hermitian")

    @property
    def null_dim(self):
        return self.null_basis.shape[1]


def effective_channel(chans, sol):
    """Stack the per-user rows w_k^H H_k into a K x N_t matrix."""
    K = chans.n_users
    if sol.rx_beams.shape[0] != K:
        raise ValueError("solution must carry one receive beam per user")
    rows = np.empty((K, chans.user_channels.shape[2]), dtype=complex)
    for k in range(K):
        rows[k] = sol.rx_beams[k].conj() @ chans.user_channels[k]
    return rows


def nullspace_basis(mat):
    """Orthonormal basis of the nullspace of ``mat`` via SVD.

    Singular values below max(shape) * eps * s_max count as zero (the usual
    numerical-rank rule), so a rank-deficient input yields a larger basis.
    """
    _, svals, vh = np.linalg.svd(mat, full_matrices=True)
    cutoff = max(mat.shape) * np.finfo(float).eps * (svals[0] if svals.size else 0.0)
    rank = int(np.sum(svals > cutoff))
    return vh[rank:].conj().T


def build_noise_covariance(eff, jam_power):
    """Isotropic jamming covariance over the nullspace of the effective channel.

    Power is spread uniformly across the nullspace dimensions -- with no
    eavesdropper information there is nothing to shape towards -- so the
    covariance is (jam_power / null_dim) * V0 V0^H, and its trace equals
    jam_power exactly.
    """
    n_rows, n_tx = eff.shape
    if n_rows >= n_tx:
        raise ValueError(f"nullspace jamming needs K < N_t, got {n_rows} x {n_tx}")
    if jam_power < 0:
        raise ValueError("jamming power must be nonnegative")
    basis = nullspace_basis(eff)
    null_dim = basis.shape[1]
    if jam_power == 0.0 or null_dim == 0:
        cov = np.zeros((n_tx, n_tx), dtype=complex)
    else:
        cov = (jam_power / null_dim) * (basis @ basis.conj().T)
    return NoiseCovariance(null_basis=basis, covariance=cov, jam_power=float(jam_power))


def sample_noise(nc, rng, size=None):
    """Draw jamming vector(s) z' = V0 g with E{z' z'^H} equal to the covariance.

    With ``size=None`` a single length-N_t vector is returned, otherwise an
    array of shape (size, N_t).  The Gaussian draw is consumed even when the
    jamming power is zero, so paired experiments that only differ in
    ``jam_power`` stay on a common random stream.
    """
    n_tx, null_dim = nc.null_basis.shape
    n = 1 if size is None else int(size)
    g = complex_gaussian(rng, (n, null_dim))
    if nc.jam_power > 0 and null_dim > 0:
        g *= np.sqrt(nc.jam_power / null_dim)
        out = g @ nc.null_basis.T
    else:
        out = np.zeros((n, n_tx), dtype=complex)
    return out[0] if size is None else out
