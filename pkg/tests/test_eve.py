import numpy as np
import pytest

from secbeam import (
    BeamformerSolution,
    ScenarioConfig,
    build_eve_context,
    build_noise_covariance,
    effective_channel,
    eve_ber_trial,
    eve_max_sinr,
    eve_ml_detect,
    generate_channels,
    whitening_matrix,
    zf_design,
)
from secbeam.artnoise import NoiseCovariance
from secbeam.eve import BPSK, _candidate_matrix
from secbeam.model import ChannelSet


def single_stream_setup(seed, n_tx=4, n_eve=4, jam_power=0.0, stream_power=1.0):
    cfg = ScenarioConfig(n_tx=n_tx, n_rx=2, n_eve=n_eve, n_users=1,
                         total_power=stream_power, sinr_targets=1.0)
    rng = np.random.default_rng(seed)
    chans = generate_channels(cfg, rng)
    beam = rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
    beam /= np.linalg.norm(beam)
    rx = np.ones((1, 2), complex)
    sol = BeamformerSolution(tx_beams=beam[None, :], rx_beams=rx,
                             power_fractions=np.array([1.0]))
    null = rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
    null -= beam * (beam.conj() @ null)
    null /= np.linalg.norm(null)
    cov = jam_power * np.outer(null, null.conj())
    nc = NoiseCovariance(null_basis=null[:, None], covariance=cov,
                         jam_power=jam_power)
    return cfg, chans, sol, nc


def test_matched_filter_sinr_without_interference():
    cfg, chans, sol, nc = single_stream_setup(0, jam_power=0.0, stream_power=1.0)
    ctx = build_eve_context(chans, sol, nc, cfg)
    _, sinr = eve_max_sinr(ctx, 0)
    expected = np.linalg.norm(chans.eve_channel @ sol.tx_beams[0]) ** 2
    assert sinr == pytest.approx(expected, rel=1e-10)


def test_heavy_jamming_saturates_at_projection_limit():
    cfg, chans, sol, nc = single_stream_setup(1, jam_power=1e12)
    ctx = build_eve_context(chans, sol, nc, cfg)
    _, sinr = eve_max_sinr(ctx, 0)
    # oracle: project the signature off the jamming direction seen at the eve
    jam_dir = chans.eve_channel @ nc.null_basis[:, 0]
    pinv = np.outer(jam_dir, jam_dir.conj()) / (jam_dir.conj() @ jam_dir)
    target = chans.eve_channel @ sol.tx_beams[0]
    clean = target - pinv @ target
    ceiling = np.linalg.norm(clean) ** 2 / cfg.noise_var_eve
    assert sinr == pytest.approx(ceiling, rel=1e-4)


def test_sinr_equals_rayleigh_quotient(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(2))
    sol = zf_design(chans, desk_cfg)
    eff = effective_channel(chans, sol)
    nc = build_noise_covariance(eff, (1 - sol.info_fraction) * desk_cfg.total_power)
    ctx = build_eve_context(chans, sol, nc, desk_cfg)
    for k in range(3):
        beam, sinr = eve_max_sinr(ctx, k)
        sig = ctx.stream_powers[k] * abs(
            beam.conj() @ chans.eve_channel @ sol.tx_beams[k]) ** 2
        denom = np.real(beam.conj() @ ctx.per_stream_cov[k] @ beam)
        assert sinr == pytest.approx(sig / denom, rel=1e-10)
    with pytest.raises(IndexError):
        eve_max_sinr(ctx, 3)


def test_whitening_validity(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(3))
    sol = zf_design(chans, desk_cfg)
    nc = build_noise_covariance(effective_channel(chans, sol), 40.0)
    ctx = build_eve_context(chans, sol, nc, desk_cfg)
    white = whitening_matrix(ctx.joint_cov)
    eye = white @ ctx.joint_cov @ white
    assert np.linalg.norm(eye - np.eye(4)) < 1e-10


def test_noiseless_detection_is_exact(desk_cfg):
    rng = np.random.default_rng(4)
    for _ in range(25):
        chans = generate_channels(desk_cfg, rng)
        sol = zf_design(chans, desk_cfg)
        nc = build_noise_covariance(effective_channel(chans, sol), 0.0)
        ctx = build_eve_context(chans, sol, nc, desk_cfg)
        truth = rng.choice(BPSK, size=3)
        received = ctx.signatures() @ truth
        assert np.array_equal(eve_ml_detect(received, ctx), truth)


def test_two_user_detection_matches_explicit_enumeration():
    cfg = ScenarioConfig(n_tx=3, n_rx=2, n_eve=3, n_users=2,
                         total_power=4.0, sinr_targets=1.0)
    rng = np.random.default_rng(5)
    chans = generate_channels(cfg, rng)
    sol = zf_design(chans, cfg)
    nc = build_noise_covariance(effective_channel(chans, sol), 1.5)
    ctx = build_eve_context(chans, sol, nc, cfg)
    received = np.array([0.3 - 0.2j, -1.1 + 0.4j, 0.05 + 0.9j])
    white = whitening_matrix(ctx.joint_cov)
    sig = ctx.signatures()
    best, best_metric = None, np.inf
    for z1 in BPSK:
        for z2 in BPSK:
            cand = np.array([z1, z2])
            metric = np.linalg.norm(white @ (received - sig @ cand)) ** 2
            if metric < best_metric:
                best, best_metric = cand, metric
    assert np.array_equal(eve_ml_detect(received, ctx), best)


def test_detection_invariant_to_covariance_scaling(desk_cfg):
    rng = np.random.default_rng(6)
    chans = generate_channels(desk_cfg, rng)
    sol = zf_design(chans, desk_cfg)
    nc = build_noise_covariance(effective_channel(chans, sol), 30.0)
    ctx = build_eve_context(chans, sol, nc, desk_cfg)
    from dataclasses import replace
    scaled = replace(ctx, joint_cov=7.3 * ctx.joint_cov)
    for _ in range(20):
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert np.array_equal(eve_ml_detect(y, ctx), eve_ml_detect(y, scaled))


def test_candidate_bound_enforced(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(7))
    sol = zf_design(chans, desk_cfg)
    nc = build_noise_covariance(effective_channel(chans, sol), 1.0)
    ctx = build_eve_context(chans, sol, nc, desk_cfg)
    too_big = tuple(range(17))  # 17^3 > 4096
    with pytest.raises(ValueError):
        eve_ml_detect(np.zeros(4, complex), ctx, constellation=too_big)
    assert len(_candidate_matrix(BPSK, 3)) == 8


def test_ber_trial_error_counts_and_noiseless_limit(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(8))
    sol = zf_design(chans, desk_cfg)
    nc_off = build_noise_covariance(effective_channel(chans, sol), 0.0)
    quiet = ScenarioConfig(n_tx=4, n_rx=2, n_eve=4, n_users=3,
                           total_power=100.0, sinr_targets=10 ** 0.5,
                           noise_var_eve=1e-12)
    errors, bits = eve_ber_trial(chans, sol, nc_off, quiet, 200,
                                 np.random.default_rng(9))
    assert bits == 600
    assert errors == 0


def test_ber_arms_coincide_when_jamming_is_off(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(10))
    sol = zf_design(chans, desk_cfg)
    nc_off = build_noise_covariance(effective_channel(chans, sol), 0.0)
    seed = np.random.SeedSequence(77)
    e1, b1 = eve_ber_trial(chans, sol, nc_off, desk_cfg, 100,
                           np.random.default_rng(seed))
    e2, b2 = eve_ber_trial(chans, sol, nc_off, desk_cfg, 100,
                           np.random.default_rng(seed), an_aware=True)
    assert (e1, b1) == (e2, b2)


def test_aware_detection_beats_naive_under_jamming(desk_cfg):
    # the covariance-aware whitener can only help; check as a trend
    total_naive = total_aware = 0
    for seed in range(10):
        chans = generate_channels(desk_cfg, np.random.default_rng(200 + seed))
        sol = zf_design(chans, desk_cfg)
        nc = build_noise_covariance(effective_channel(chans, sol),
                                    (1 - sol.info_fraction) * desk_cfg.total_power)
        key = np.random.SeedSequence((1, seed))
        e_naive, _ = eve_ber_trial(chans, sol, nc, desk_cfg, 300,
                                   np.random.default_rng(key))
        e_aware, _ = eve_ber_trial(chans, sol, nc, desk_cfg, 300,
                                   np.random.default_rng(key), an_aware=True)
        total_naive += e_naive
        total_aware += e_aware
    assert total_aware < total_naive


def test_ml_dominates_linear_receiver_with_slicing(desk_cfg):
    # aware joint detection against per-stream max-SINR beams with slicing,
    # compared as vector-error totals over a long batch
    rng = np.random.default_rng(11)
    chans = generate_channels(desk_cfg, rng)
    sol = zf_design(chans, desk_cfg)
    nc = build_noise_covariance(effective_channel(chans, sol),
                                (1 - sol.info_fraction) * desk_cfg.total_power)
    ctx = build_eve_context(chans, sol, nc, desk_cfg)
    sig = ctx.signatures()
    n_sym = 12_000
    from secbeam.artnoise import sample_noise
    from secbeam.model import complex_gaussian

    truth = rng.choice(BPSK, size=(n_sym, 3))
    received = truth @ sig.T \
        + sample_noise(nc, rng, size=n_sym) @ ctx.eve_channel.T \
        + complex_gaussian(rng, (n_sym, 4), var=desk_cfg.noise_var_eve)

    white = whitening_matrix(ctx.joint_cov)
    cand = _candidate_matrix(BPSK, 3)
    from secbeam.detect import ml_argmin
    ml_hat = cand[ml_argmin(received @ white.T, (white @ sig @ cand.T).T)]
    ml_vec_errors = int(np.sum(np.any(ml_hat != truth, axis=1)))

    stream_wrong = np.zeros((n_sym, 3), dtype=bool)
    for k in range(3):
        beam, _ = eve_max_sinr(ctx, k)
        align = np.conj(beam.conj() @ sig[:, k])
        decision = np.sign(np.real((received @ beam.conj()) * align))
        decision[decision == 0] = 1.0
        stream_wrong[:, k] = decision != truth[:, k]
    lin_vec_errors = int(np.sum(np.any(stream_wrong, axis=1)))

    slack = 3 * np.sqrt(lin_vec_errors + 1) + 5
    assert ml_vec_errors <= lin_vec_errors + slack
