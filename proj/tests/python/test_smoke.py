import math

import numpy as np
import pytest

import edgempc as em


def test_hover_is_equilibrium():
    x = em.UavState(position=[1.0, -2.0, 3.0])
    d = em.state_derivative(x, em.ControlInput(9.81))
    assert np.allclose(d, 0.0, atol=1e-12)


def test_non_finite_state_rejected():
    x = em.UavState(position=[0.0, 0.0, 0.0], roll=math.nan)
    with pytest.raises(em.ModelDomainError):
        em.state_derivative(x, em.ControlInput(9.81))


def test_rk4_step_keeps_hover():
    x = em.UavState(position=[0.5, 0.5, 2.0])
    assert em.step_rk4(x, em.ControlInput(9.81), em.ModelParams(), 0.01) == x


def test_predict_free_fall():
    cfg = em.MpcConfig()
    cfg.horizon = 3
    params = em.ModelParams()
    params.damping = [0.0, 0.0, 0.0]
    traj = em.predict(em.UavState(), [em.ControlInput(0.0)] * 3, cfg, params)
    assert [s.velocity[2] for s in traj] == pytest.approx([-0.0981, -0.1962, -0.2943])


def test_solve_hover_is_optimal():
    cfg = em.MpcConfig()
    cfg.horizon = 10
    hover = em.UavState(position=[0.0, 0.0, 1.0])
    ref = [em.ReferencePoint(hover)] * 10
    sol = em.solve(hover, ref, [cfg.steady_input] * 10, cfg.steady_input, cfg)
    assert sol.cost == pytest.approx(0.0, abs=1e-12)
    assert sol.first_input.thrust == pytest.approx(9.81, abs=1e-6)


def test_gradient_matches_finite_differences():
    cfg = em.MpcConfig()
    cfg.horizon = 2
    cfg.dt = 0.05
    x0 = em.UavState(position=[0.1, 0.2, 0.3], velocity=[0.3, -0.2, 0.1], roll=0.1)
    target = em.UavState(position=[1.0, 0.0, 1.0])
    ref = [em.ReferencePoint(target)] * 2
    u = [em.ControlInput(11.0, 0.05, -0.1), em.ControlInput(9.0, -0.1, 0.2)]
    prev = em.ControlInput(10.0)
    g = em.cost_gradient(x0, u, ref, prev, cfg)
    h = 1e-6
    flat = np.array([c.to_vector() for c in u]).ravel()
    for i in range(flat.size):
        def cost(z):
            seq = [em.ControlInput(*z[3 * j:3 * j + 3]) for j in range(2)]
            return em.total_cost(x0, seq, ref, prev, cfg)
        zp, zm = flat.copy(), flat.copy()
        zp[i] += h
        zm[i] -= h
        fd = (cost(zp) - cost(zm)) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-6)


def test_reference_quarter_period():
    spec = em.TrajectorySpec()
    spec.kind = em.TrajectoryKind.CIRCULAR
    t = (math.pi / 2) / spec.angular_rate
    p = em.sample_reference(spec, t).state.position
    assert p[0] == pytest.approx(0.0, abs=1e-12)
    assert p[1] == pytest.approx(spec.radius)


def test_degenerate_delay_is_exact():
    assert em.sample_delays(em.LatencyProfile.degenerate(14.2), 100) == [14.2] * 100


def test_builtin_profile_a_means():
    cfg = em.builtin_scenario("helical-profile-A")
    assert cfg.uplink.mean == 14.2
    assert cfg.downlink.mean == 17.6
    assert cfg.exec_model == "simulated:16.1"
    assert em.parse_config_text(cfg.to_yaml()) == cfg


def test_config_error_is_line_anchored():
    with pytest.raises(em.ConfigError, match="line 2"):
        em.parse_config_text("scenario: hover-ideal\ncontrol_rate: 0\n")


def test_degenerate_episode_round_trip_time():
    cfg = em.builtin_scenario("helical-profile-B")
    cfg.uplink = em.LatencyProfile.degenerate(9.5)
    cfg.downlink = em.LatencyProfile.degenerate(13.1)
    cfg.duration = 2.0
    records, summary = em.run_episode(cfg)
    assert len(records) == pytest.approx(200, abs=1)
    assert summary["rtt"]["mean"] == pytest.approx(39.5, abs=1e-9)
    for r in records:
        assert r.rtt - (r.ttre + r.exec + r.tter) == 0.0
    assert em.trace_csv(records).count("\n") == len(records) + 1


def test_run_cli(tmp_path):
    code, out, _ = em.run_cli(["--scenario", "hover-ideal", "--duration", "1",
                               "--out", str(tmp_path)])
    assert code == 0
    assert "round trip" in out
    assert (tmp_path / "trace.csv").exists()
    code, _, err = em.run_cli(["--scenario", "no-such"])
    assert code == 1
    assert err
