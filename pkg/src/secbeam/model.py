"""Shared domain types, random channel generation, and SINR/MSE arithmetic.

All SINR values are carried in linear scale throughout the library; dB
conversion happens only in the reporting layer.  Every random quantity is
drawn from an explicitly passed numpy Generator, so all functions here are
pure and safe to call concurrently as long as each caller owns its stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScenarioConfig",
    "ChannelSet",
    "BeamformerSolution",
    "TrialRecord",
    "complex_gaussian",
    "generate_channels",
    "broadcast_sinr",
    "mse_of_sinr",
    "sinr_of_mse",
]

UNIT_NORM_TOL = 1e-10


@dataclass
class ScenarioConfig:
    """Network dimensions, power budget, noise levels and quality targets.

    ``sinr_targets`` holds one linear target per user for the broadcast
    designs; the multicast design uses a common target, passed here as a
    length-1 array or as K equal entries.
    """

    n_tx: int
    n_rx: int
    n_eve: int
    n_users: int
    total_power: float
    sinr_targets: np.ndarray
    noise_var_rx: float = 1.0
    noise_var_eve: float = 1.0
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        targets = np.atleast_1d(np.asarray(self.sinr_targets, dtype=float))
        if targets.size == 1:
            targets = np.full(self.n_users, targets[0])
        self.sinr_targets = targets
        if self.n_users >= self.n_tx:
            raise ValueError(
                f"need n_users < n_tx for nullspace jamming, got "
                f"K={self.n_users}, N_t={self.n_tx}"
            )
        if min(self.n_tx, self.n_rx, self.n_eve, self.n_users) < 1:
            raise ValueError("antenna and user counts must be positive")
        if self.total_power <= 0:
            raise ValueError("total_power must be positive")
        if self.noise_var_rx <= 0 or self.noise_var_eve <= 0:
            raise ValueError("noise variances must be positive")
        if targets.shape != (self.n_users,) or np.any(targets <= 0):
            raise ValueError("need one positive linear SINR target per user")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class ChannelSet:
    """One realization of the K user channels and the eavesdropper channel."""

    user_channels: np.ndarray  # (K, N_r, N_t) complex
    eve_channel: np.ndarray  # (N_e, N_t) complex

    def __post_init__(self):
        if not (np.all(np.isfinite(self.user_channels.view(float)))
                and np.all(np.isfinite(self.eve_channel.view(float)))):
            raise ValueError("channel entries must be finite")

    @property
    def n_users(self):
        return self.user_channels.shape[0]


@dataclass
class BeamformerSolution:
    """Transmit/receive beamformers plus the per-stream power split.

    ``tx_beams`` has one unit-norm row per stream: K rows for a broadcast
    design, a single row for multicast.  ``power_fractions`` holds the
    matching share of the total power per stream; whatever is left over,
    ``1 - info_fraction``, feeds the artificial noise.  ``feasible`` is
    False when the targets could not be met within the power budget and
    the full-power fallback was applied; ``converged`` is False when an
    iterative design hit its iteration cap and returned the last iterate.
    """

    tx_beams: np.ndarray  # (n_streams, N_t) complex, unit-norm rows
    rx_beams: np.ndarray  # (K, N_r) complex
    power_fractions: np.ndarray  # (n_streams,) nonnegative
    feasible: bool = True
    converged: bool = True

    def __post_init__(self):
        norms = np.linalg.norm(self.tx_beams, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ValueError("transmit beams must be unit norm")
        if np.any(self.power_fractions < 0):
            raise ValueError("power fractions must be nonnegative")
        if self.feasible and self.power_fractions.sum() > 1.0 + 1e-9:
            raise ValueError("feasible solution exceeds the power budget")

    @property
    def info_fraction(self):
        return float(self.power_fractions.sum())

    @property
    def n_streams(self):
        return self.tx_beams.shape[0]


@dataclass
class TrialRecord:
    """Per-realization outcome collected by the simulation harness."""

    achieved_sinr_users: np.ndarray
    eve_sinr_per_stream: np.ndarray
    info_fraction: float
    jam_fraction: float
    feasible: bool
    eve_bit_errors: int = 0
    bits_total: int = 0

    def __post_init__(self):
        if abs(self.info_fraction + self.jam_fraction - 1.0) > 1e-12:
            raise ValueError("info and jamming fractions must sum to one")
        if self.eve_bit_errors > self.bits_total:
            raise ValueError("error count exceeds bit total")


def complex_gaussian(rng, shape, var=1.0):
    """I.i.d. circularly-symmetric complex Gaussian entries of total variance ``var``."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_channels(cfg, rng):
    """Draw a fresh ChannelSet with unit-variance CN(0,1) entries."""
    users = complex_gaussian(rng, (cfg.n_users, cfg.n_rx, cfg.n_tx))
    eve = complex_gaussian(rng, (cfg.n_eve, cfg.n_tx))
    return ChannelSet(user_channels=users, eve_channel=eve)


def broadcast_sinr(chans, sol, cfg, k):
    """Achieved SINR of user k under a broadcast solution.

    The artificial noise is orthogonal to every receive beam by
    construction, so only multiuser interference and thermal noise appear
    in the denominator.
    """
    n_users = chans.n_users
    if not 0 <= k < n_users:
        raise IndexError(f"user index {k} out of range for K={n_users}")
    if sol.n_streams != n_users:
        raise ValueError("broadcast SINR needs one stream per user")
    w = sol.rx_beams[k]
    eff = w.conj() @ chans.user_channels[k] @ sol.tx_beams.T  # gain per stream
    powers = sol.power_fractions * cfg.total_power
    gains = powers * np.abs(eff) ** 2
    signal = gains[k]
    interference = gains.sum() - signal
    noise = cfg.noise_var_rx * float(np.linalg.norm(w) ** 2)
    return float(signal / (interference + noise))


def mse_of_sinr(sinr):
    """Minimum achievable MSE of a stream received at the given SINR."""
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0):
        raise ValueError("SINR must be nonnegative")
    out = 1.0 / (1.0 + sinr)
    return float(out) if out.ndim == 0 else out


def sinr_of_mse(mse):
    """Inverse of :func:`mse_of_sinr`; accepts MSE values in (0, 1]."""
    mse = np.asarray(mse, dtype=float)
    if np.any(mse <= 0) or np.any(mse > 1):
        raise ValueError("MSE must lie in (0, 1]")
    out = 1.0 / mse - 1.0
    return float(out) if out.ndim == 0 else out
