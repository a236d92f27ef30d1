import numpy as np
import pytest

from secbeam import ScenarioConfig, broadcast_sinr, generate_channels, zf_design, zf_power_allocation
from secbeam import zf as zf_mod
from secbeam.model import ChannelSet


def cross_gains(chans, sol):
    K = chans.n_users
    out = np.zeros((K, K))
    for k in range(K):
        for j in range(K):
            out[k, j] = abs(sol.rx_beams[k].conj()
                            @ chans.user_channels[k] @ sol.tx_beams[j])
    return out


def test_single_user_is_max_ratio_transmission():
    cfg = ScenarioConfig(n_tx=4, n_rx=2, n_eve=2, n_users=1,
                         total_power=10.0, sinr_targets=2.0)
    chans = generate_channels(cfg, np.random.default_rng(0))
    sol = zf_design(chans, cfg)
    _, svals, vh = np.linalg.svd(chans.user_channels[0])
    dominant = vh[0].conj()
    assert abs(np.vdot(dominant, sol.tx_beams[0])) == pytest.approx(1.0, abs=1e-10)
    mrc = chans.user_channels[0] @ sol.tx_beams[0]
    mrc /= np.linalg.norm(mrc)
    assert abs(np.vdot(mrc, sol.rx_beams[0])) == pytest.approx(1.0, abs=1e-10)


def test_cross_interference_nulled(desk_cfg):
    for seed in range(8):
        chans = generate_channels(desk_cfg, np.random.default_rng(seed))
        sol = zf_design(chans, desk_cfg)
        assert sol.converged
        g = cross_gains(chans, sol)
        off = g[~np.eye(3, dtype=bool)]
        assert off.max() < 1e-8
        # squared leakage is negligible against the total received power
        assert (off ** 2).sum() < 1e-16 * (g ** 2).sum()
        assert np.allclose(np.linalg.norm(sol.tx_beams, axis=1), 1.0, atol=1e-12)


def test_two_user_real_case_matches_analytic_nullspace():
    cfg = ScenarioConfig(n_tx=3, n_rx=1, n_eve=2, n_users=2,
                         total_power=10.0, sinr_targets=1.0)
    rng = np.random.default_rng(1)
    users = rng.standard_normal((2, 1, 3)).astype(complex)
    chans = ChannelSet(user_channels=users, eve_channel=np.zeros((2, 3), complex))
    sol = zf_design(chans, cfg)
    for k in range(2):
        other = users[1 - k][0]
        # beam must lie in the analytic nullspace of the other user's row
        proj = sol.tx_beams[k] - other * (other.conj() @ sol.tx_beams[k]) / (other.conj() @ other)
        assert np.linalg.norm(proj - sol.tx_beams[k]) < 1e-10
        # and, within that plane, along the user's own projected channel
        own = users[k][0]
        expected = own.conj() - other * (other.conj() @ own.conj()) / (other.conj() @ other)
        expected /= np.linalg.norm(expected)
        assert abs(np.vdot(expected, sol.tx_beams[k])) == pytest.approx(1.0, abs=1e-9)


def test_power_allocation_meets_targets(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(2))
    sol = zf_design(chans, desk_cfg)
    assert sol.feasible
    for k in range(3):
        assert broadcast_sinr(chans, sol, desk_cfg, k) == pytest.approx(
            desk_cfg.sinr_targets[k], rel=1e-9)


def test_power_allocation_scales_inversely_with_budget(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(3))
    sol = zf_design(chans, desk_cfg)
    rho_1, _ = zf_power_allocation(chans, sol, desk_cfg)
    cfg2 = ScenarioConfig(n_tx=4, n_rx=2, n_eve=4, n_users=3,
                          total_power=200.0, sinr_targets=10 ** 0.5)
    rho_2, _ = zf_power_allocation(chans, sol, cfg2)
    assert np.allclose(rho_2, rho_1 / 2.0, rtol=1e-14)


def test_infinite_budget_sends_everything_to_jamming(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(4))
    cfg = ScenarioConfig(n_tx=4, n_rx=2, n_eve=4, n_users=3,
                         total_power=1e12, sinr_targets=10 ** 0.5)
    sol = zf_design(chans, cfg)
    assert sol.info_fraction < 1e-9
    assert 1.0 - sol.info_fraction > 1.0 - 1e-9


def test_infeasible_budget_falls_back_to_full_power(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(5))
    cfg = ScenarioConfig(n_tx=4, n_rx=2, n_eve=4, n_users=3,
                         total_power=0.05, sinr_targets=10 ** 0.5)
    sol = zf_design(chans, cfg)
    assert not sol.feasible
    assert sol.info_fraction == pytest.approx(1.0, rel=1e-12)
    # proportional rescale preserves the relative targets
    raw, _ = zf_power_allocation(chans, zf_design(chans, desk_cfg), desk_cfg)
    ratios = sol.power_fractions / raw
    assert np.allclose(ratios, ratios[0], rtol=1e-9)


def test_zero_gain_user_flagged(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(6))
    sol = zf_design(chans, desk_cfg)
    dead = ChannelSet(user_channels=chans.user_channels.copy(),
                      eve_channel=chans.eve_channel)
    dead.user_channels[1] = 0.0
    rho, feasible = zf_power_allocation(dead, sol, desk_cfg)
    assert not feasible
    assert rho[1] == 0.0
    assert np.all(rho[[0, 2]] > 0)


def test_iteration_cap_flags_solution(desk_cfg, monkeypatch):
    monkeypatch.setattr(zf_mod, "MAX_ITER", 1)
    chans = generate_channels(desk_cfg, np.random.default_rng(7))
    sol = zf_design(chans, desk_cfg)
    # one sweep cannot reach the fixed point; the iterate is returned flagged
    assert not sol.converged
    assert np.allclose(np.linalg.norm(sol.tx_beams, axis=1), 1.0, atol=1e-12)


def test_workspace_shapes(desk_cfg):
    chans = generate_channels(desk_cfg, np.random.default_rng(8))
    _, ws = zf_design(chans, desk_cfg, return_workspace=True)
    assert len(ws.excluded_channels) == 3
    for mat in ws.excluded_channels:
        assert mat.shape == (2, 4)
    for factors in ws.svd_factors:
        u_f, svals, vh = factors
        assert vh.shape == (4, 4)
        assert svals.shape == (2,)
