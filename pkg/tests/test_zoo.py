"""Zoo systems: closed-form agreement, witnesses, oracles, safe regions."""

from __future__ import annotations

import math

import numpy as np
import pytest

from ioslab.errors import DomainError
from ioslab.signals import InputSignal
from ioslab.systems import SimPlan, simulate
from ioslab import zoo
from ioslab.properties import PropertyId


def test_riccati_oracle_roundtrip():
    c = zoo.riccati_seed_for_blowup_at(1.0)
    assert c == pytest.approx(2.0 * math.e**2 / (math.e**2 - 1.0), rel=1e-12)
    assert c == pytest.approx(2.31304, abs=1e-3)
    assert zoo.riccati_blowup_time(c) == pytest.approx(1.0, rel=1e-12)


def test_riccati_oracle_against_integration():
    # integrate dz = -2z + z^2 from the seed and watch it cross a huge level
    c = zoo.BLOWUP_SEED
    z, t, h = c, 0.0, 1e-6
    while z < 1e6 and t < 2.0:
        z += h * (-2.0 * z + z * z)
        t += h
    assert t == pytest.approx(1.0, abs=5e-3)


@pytest.mark.parametrize("zoo_id,x0", [
    ("sin_output", [1.3]),
    ("rotation", [0.8, -0.6]),
    ("lin_scalar", [2.0]),
])
def test_analytic_flow_matches_rk4_on_grid(zoo_id, x0):
    sys = zoo.make_example(zoo_id)
    u = InputSignal.constant([0.7]) if sys.input_dim else InputSignal.zero(0)
    traj = simulate(sys, np.asarray(x0), u, SimPlan(5.0, 1e-2), with_oracle=True)
    idx = np.linspace(0, len(traj.times) - 1, 50).astype(int)
    err = np.max(np.linalg.norm(traj.states[idx] - traj.oracle_states[idx], axis=1))
    assert err <= 1e-5


def test_sin_output_witness_values():
    sys = zoo.make_example("sin_output")
    w = zoo.known_witness("sin_output", PropertyId.OL)
    traj = simulate(sys, np.asarray(w.x0), w.signal(sys.input_dim), SimPlan(2.0, 1e-3))
    y = traj.output_norms()
    assert y[0] <= 1e-9
    assert y[traj.at_time(1.0)] >= 0.9
    assert y[traj.at_time(1.0)] == pytest.approx(math.sin(math.pi / math.e), abs=1e-6)


def test_rotation_witness_and_recurrence():
    sys = zoo.make_example("rotation")
    w = zoo.known_witness("rotation", PropertyId.OL)
    traj = simulate(sys, np.asarray(w.x0), InputSignal.zero(0), SimPlan(7.0, 1e-3))
    y = traj.output_norms()
    assert y[0] <= 1e-9
    assert y[traj.at_time(1.5 * math.pi)] >= w.output_floor
    # output returns to the initial radius at full turns minus the phase
    k = traj.at_time(2.0 * math.pi - 0.5 * math.pi)
    assert traj.outputs[k, 0] == pytest.approx(1.0, abs=1e-6)


def test_sat_polar_witness_sweep():
    sys = zoo.make_example("sat_polar")
    w = zoo.known_witness("sat_polar", PropertyId.OL)
    c = 4.0 * math.exp(0.5 * math.pi)
    t_star = c * (1.0 - math.exp(-0.5 * math.pi))
    assert w.t == pytest.approx(t_star, rel=1e-12)
    traj = simulate(sys, np.asarray(w.x0), InputSignal.zero(0), SimPlan(t_star + 1.0, 1e-3))
    y = traj.output_norms()
    assert y[0] == pytest.approx(1.0, abs=1e-9)
    assert float(np.max(y)) >= w.output_floor
    assert y[traj.at_time(t_star)] == pytest.approx(c * math.exp(-0.5 * math.pi), abs=1e-2)


def test_sat_polar_obors_bound_y_le_y0_plus_t():
    sys = zoo.make_example("sat_polar")
    rng = np.random.default_rng(5)
    for _ in range(10):
        theta = rng.uniform(0, 2 * math.pi)
        rho = rng.uniform(0.1, 30.0)
        traj = simulate(sys, np.array([theta, rho]), InputSignal.zero(0), SimPlan(10.0, 1e-2))
        y = traj.output_norms()
        assert np.all(y <= y[0] + traj.times + 1e-6)


def test_l2_blowup_witness_reaches_level():
    n, j = 64, 51
    sys = zoo.make_example("l2_blowup", n=n)
    x0 = zoo.blowup_seed_state(n, j)
    assert np.linalg.norm(x0) <= zoo.blowup_ball_radius()
    traj = simulate(sys, x0, InputSignal.zero(0), SimPlan(1.0, 2e-4))
    yj = np.abs(traj.states[:, j])
    crossed = traj.times[yj >= j]
    assert crossed.size > 0
    assert crossed[0] < 1.0


def test_l2_blowup_seed_validation():
    with pytest.raises(DomainError):
        zoo.blowup_seed_state(8, 0)
    with pytest.raises(DomainError):
        zoo.blowup_seed_state(8, 8)


def test_l2_blowup_safe_region_norm_nonincreasing():
    n = 64
    sys = zoo.make_example("l2_blowup", n=n)
    rng = np.random.default_rng(7)
    x0 = rng.uniform(-0.5, 0.5, size=n)
    x0[0] = abs(x0[0])
    traj = simulate(sys, x0, InputSignal.zero(0), SimPlan(10.0, 1e-2))
    norms = np.linalg.norm(traj.states, axis=1)
    assert traj.blow_up is None
    assert np.all(np.diff(norms) <= 1e-10)


def test_timewarp_is_exact_time_dilation_for_constant_input():
    n = 8
    warped = zoo.make_example("l2_timewarp", n=n)
    plain = zoo.make_example("l2_blowup", n=n)
    x0 = np.zeros(n)
    x0[0] = 1.0
    x0[3] = 0.8
    level = 3.0
    u = InputSignal.constant([level])
    factor = 1.0 + level**2
    t_w = simulate(warped, x0, u, SimPlan(2.0 * factor, 1e-2))
    t_p = simulate(plain, x0, InputSignal.zero(0), SimPlan(2.0, 1e-2 / factor))
    k_w = t_w.at_time(2.0 * factor)
    k_p = t_p.at_time(2.0)
    np.testing.assert_allclose(t_w.states[k_w], t_p.states[k_p], atol=1e-6)


def test_timewarp_defeat_input_formula():
    assert zoo.timewarp_defeat_input(4.0, 1.0) == pytest.approx(math.sqrt(3.0))
    with pytest.raises(DomainError):
        zoo.timewarp_defeat_input(1.0, 2.0)


def test_every_failure_has_witness_recipe():
    for zid in zoo.zoo_ids():
        entry = zoo.get_entry(zid)
        for prop, verdict in entry.expected.items():
            if verdict == "fails":
                assert prop in entry.witnesses, (zid, prop)


def test_describe_is_json_serialisable():
    import json

    for zid in zoo.zoo_ids():
        text = json.dumps(zoo.get_entry(zid).describe(), sort_keys=True)
        assert json.loads(text)["id"] == zid


def test_make_example_rejects_unknown():
    with pytest.raises(DomainError):
        zoo.make_example("spiral_of_doom")
    with pytest.raises(DomainError):
        zoo.make_example("l2_blowup", n=1)


def test_full_state_alias():
    sys = zoo.make_example("full_state", base="lin_scalar")
    assert sys.meta.get("full_state") is True
