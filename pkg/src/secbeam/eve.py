"""Eavesdropper models: per-stream max-SINR interception and joint ML detection.

The eavesdropper is granted the stream signatures (channel times scaled
beams).  For the linear receiver the interference-plus-noise covariances use
the true jamming statistics, giving the best SINR any linear front end can
reach.  The joint detector whitens with whatever covariance it is handed;
the bit-error trials model an eavesdropper that cannot estimate the
artificial-noise covariance unless explicitly made aware of it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .artnoise import sample_noise
from .detect import ml_argmin
from .model import complex_gaussian

__all__ = [
    "EveContext",
    "build_eve_context",
    "whitening_matrix",
    "eve_max_sinr",
    "eve_ml_detect",
    "eve_ber_trial",
    "BPSK",
]

BPSK = (1.0, -1.0)
MAX_CANDIDATES = 4096


@dataclass
class EveContext:
    """Everything the eavesdropper works with for one channel realization.

    ``stream_powers`` carries the per-stream symbol powers rho_k * P; the
    signatures and covariances fold these in, since the signal model scales
    each unit-power symbol by its allotted power.
    """

    eve_channel: np.ndarray  # (N_e, N_t)
    tx_beams: np.ndarray  # (n_streams, N_t), unit-norm rows
    stream_powers: np.ndarray  # (n_streams,)
    jam_covariance: np.ndarray  # (N_t, N_t)
    noise_var: float
    per_stream_cov: list  # n_streams matrices (N_e, N_e)
    joint_cov: np.ndarray  # (N_e, N_e): jamming plus thermal noise at the eve

    @property
    def n_streams(self):
        return self.tx_beams.shape[0]

    def signatures(self):
        """Scaled stream signatures H_e t_k sqrt(rho_k P), as columns."""
        scaled = self.tx_beams.T * np.sqrt(self.stream_powers)
        return self.eve_channel @ scaled


def build_eve_context(chans, sol, nc, cfg):
    """Assemble covariances for one realization, powers folded in."""
    he = chans.eve_channel
    n_eve = he.shape[0]
    jam_at_eve = he @ nc.covariance @ he.conj().T
    joint = jam_at_eve + cfg.noise_var_eve * np.eye(n_eve)
    sig = he @ (sol.tx_beams.T * np.sqrt(sol.power_fractions * cfg.total_power))
    per_stream = []
    for k in range(sol.n_streams):
        cov = joint.copy()
        for j in range(sol.n_streams):
            if j != k:
                cov += np.outer(sig[:, j], sig[:, j].conj())
        per_stream.append(cov)
    return EveContext(
        eve_channel=he,
        tx_beams=sol.tx_beams,
        stream_powers=sol.power_fractions * cfg.total_power,
        jam_covariance=nc.covariance,
        noise_var=cfg.noise_var_eve,
        per_stream_cov=per_stream,
        joint_cov=joint,
    )


def whitening_matrix(cov):
    """Inverse square root of a Hermitian positive-definite covariance."""
    vals, vecs = np.linalg.eigh(cov)
    if np.any(vals <= 0):
        raise ValueError("covariance must be positive definite")
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def eve_max_sinr(ctx, k):
    """Best linear receiver for stream k and the SINR it attains.

    The beam is the per-stream whitened matched filter (Q_e^k)^{-1} H_e t_k;
    its SINR reduces to rho_k P t_k^H H_e^H (Q_e^k)^{-1} H_e t_k.
    """
    if not 0 <= k < ctx.n_streams:
        raise IndexError(f"stream index {k} out of range")
    target = ctx.eve_channel @ ctx.tx_beams[k]
    beam = np.linalg.solve(ctx.per_stream_cov[k], target)
    sinr = ctx.stream_powers[k] * float(np.real(target.conj() @ beam))
    return beam, sinr


def _candidate_matrix(constellation, n_streams):
    n_cand = len(constellation) ** n_streams
    if n_cand > MAX_CANDIDATES:
        raise ValueError(
            f"{len(constellation)}^{n_streams} = {n_cand} candidates exceed "
            f"the exhaustive-search bound of {MAX_CANDIDATES}"
        )
    return np.array(list(itertools.product(constellation, repeat=n_streams)))


def eve_ml_detect(received, ctx, constellation=BPSK):
    """Exhaustive joint detection of all streams from one received vector.

    Minimizes the whitened residual ||Q^{-1/2}(y - S z)|| over the full
    candidate lattice, Q being the context's joint covariance and S the
    scaled signatures.  Ties go to the first candidate in lexicographic
    constellation order.
    """
    cand = _candidate_matrix(constellation, ctx.n_streams)
    white = whitening_matrix(ctx.joint_cov)
    sig_w = (white @ ctx.signatures() @ cand.T).T  # (n_cand, N_e)
    idx = ml_argmin((white @ received)[np.newaxis, :], sig_w)
    return cand[int(idx[0])]


def eve_ber_trial(chans, sol, nc, cfg, n_symbols, rng, constellation=BPSK,
                  an_aware=False):
    """Transmit a symbol batch, run joint ML detection, count stream errors.

    Per symbol: i.i.d. constellation points per stream scaled by their
    powers, a fresh artificial-noise draw, and thermal noise at the
    eavesdropper.  The detector whitens with the covariance the eavesdropper
    perceives: thermal noise only by default, or the true jamming-plus-noise
    covariance when ``an_aware`` is set.  Returns (symbol errors summed over
    streams, n_symbols * n_streams); for BPSK those are bit counts.
    """
    ctx = build_eve_context(chans, sol, nc, cfg)
    cand = _candidate_matrix(constellation, ctx.n_streams)
    n_eve = ctx.eve_channel.shape[0]
    points = np.asarray(constellation)

    true_idx = rng.integers(0, len(points), size=(n_symbols, ctx.n_streams))
    symbols = points[true_idx]
    thermal = complex_gaussian(rng, (n_symbols, n_eve), var=cfg.noise_var_eve)
    jam = sample_noise(nc, rng, size=n_symbols)

    sig = ctx.signatures()  # (N_e, n_streams)
    received = symbols @ sig.T + jam @ ctx.eve_channel.T + thermal

    perceived = ctx.joint_cov if an_aware \
        else cfg.noise_var_eve * np.eye(n_eve)
    white = whitening_matrix(perceived)
    detected = cand[ml_argmin(received @ white.T, (white @ sig @ cand.T).T)]

    errors = int(np.sum(detected != symbols))
    return errors, n_symbols * ctx.n_streams
