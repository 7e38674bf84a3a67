import numpy as np
import pytest

from minellip import (
    design_gain,
    find_beta,
    make_disturbance,
    metrics,
    minimize_trace,
    simulate,
)
from minellip.errors import (
    DisturbanceBoundViolatedError,
    DimensionMismatchError,
    MissingEllipsoidError,
)

PAPER_AMPS = [0.02, 0.0125]
PAPER_FREQ = 0.5


def random_admissible(plant, rng):
    """Sinusoidal sampler with random direction, frequency and sub-unit level."""
    direction = rng.normal(size=plant.p)
    direction /= np.sqrt(direction @ plant.Q @ direction)
    level = rng.uniform(0.3, 0.99)
    freq = rng.uniform(0.1, 2.0)
    phase = rng.uniform(0.0, 2 * np.pi)
    return lambda t, e: level * np.sin(freq * t + phase) * direction


# --- disturbance construction ----------------------------------------

def test_sinusoid_peak_level(paper_plant):
    spec = make_disturbance("sinusoid", paper_plant, amplitudes=PAPER_AMPS,
                            angular_frequency=PAPER_FREQ)
    amps = np.array(PAPER_AMPS)
    peak = amps @ paper_plant.Q @ amps
    assert peak == pytest.approx(800 / 2500 + 4000 / 6400)
    assert peak <= 1.0
    w = spec.sampler(np.pi, np.zeros(6))  # sin(pi/2) = 1, full swing
    np.testing.assert_allclose(w, amps)


def test_sinusoid_rejects_excessive_amplitudes(paper_plant):
    with pytest.raises(DisturbanceBoundViolatedError):
        make_disturbance("sinusoid", paper_plant, amplitudes=[0.05, 0.02],
                         angular_frequency=PAPER_FREQ)


def test_worst_case_needs_p(paper_plant):
    with pytest.raises(MissingEllipsoidError):
        make_disturbance("worst_case", paper_plant)


def test_worst_case_samples_on_unit_sphere(paper_plant, paper_minimization):
    spec = make_disturbance("worst_case", paper_plant, P=paper_minimization.P_star)
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = spec.sampler(0.0, rng.normal(size=6))
        assert w @ paper_plant.Q @ w == pytest.approx(1.0, abs=1e-9)


def test_none_is_zero(paper_plant):
    spec = make_disturbance("none", paper_plant)
    np.testing.assert_array_equal(spec.sampler(3.0, np.ones(6)), np.zeros(2))


def test_custom_bound_enforced_online(scalar_plant, scalar_topology):
    spec = make_disturbance("custom", scalar_plant, sample=lambda t, e: np.array([1.5]))
    with pytest.raises(DisturbanceBoundViolatedError):
        simulate(scalar_plant, scalar_topology, [[0.0]], [0.0], [[0.0], [1.0]],
                 spec, 1.0, 1e-2)


# --- simulate ----------------------------------------------------------

def test_equilibrium_stays_at_machine_precision(paper_plant, fig1_topology, paper_gain):
    x0 = np.tile([0.4, -0.1], (4, 1))
    dist = make_disturbance("none", paper_plant)
    traj = simulate(paper_plant, fig1_topology, paper_gain, [0.3], x0, dist, 2.0, 1e-3)
    assert np.abs(traj.errors).max() <= 1e-14


def test_designed_gain_reaches_consensus(paper_plant, fig1_topology, fig1_laplacian):
    k = design_gain(paper_plant, fig1_laplacian, gamma=10.0)
    rng = np.random.default_rng(5)
    x0 = rng.normal(size=(4, 2))
    dist = make_disturbance("none", paper_plant)
    traj = simulate(paper_plant, fig1_topology, k, [0.0], x0, dist, 40.0, 1e-3)
    assert np.linalg.norm(traj.errors[-1]) <= 1e-6


def test_paper_example_converges_to_neighborhood(paper_plant, fig1_topology, paper_gain,
                                                 paper_x0):
    dist = make_disturbance("sinusoid", paper_plant, amplitudes=PAPER_AMPS,
                            angular_frequency=PAPER_FREQ)
    traj = simulate(paper_plant, fig1_topology, paper_gain, [0.0], paper_x0, dist, 30.0, 1e-3)
    tail = np.abs(traj.errors[traj.times >= 15.0])
    assert tail.max() <= 0.05
    assert np.abs(traj.errors[0]).max() == pytest.approx(1.0)


def test_rejects_bad_dimensions(paper_plant, fig1_topology, paper_gain):
    dist = make_disturbance("none", paper_plant)
    with pytest.raises(DimensionMismatchError):
        simulate(paper_plant, fig1_topology, paper_gain, [0.0], np.zeros((3, 2)),
                 dist, 1.0, 1e-2)


def test_controls_match_stacked_protocol(paper_plant, fig1_topology, paper_gain, paper_x0):
    from minellip import build_laplacian, stacked_control

    dist = make_disturbance("sinusoid", paper_plant, amplitudes=PAPER_AMPS,
                            angular_frequency=PAPER_FREQ)
    traj = simulate(paper_plant, fig1_topology, paper_gain, [0.25], paper_x0, dist, 0.5, 1e-2)
    lp = build_laplacian(fig1_topology)
    for idx in (0, 17, 50):
        expected = stacked_control(lp, paper_gain, traj.errors[idx], [0.25])
        np.testing.assert_allclose(traj.controls[idx], expected, atol=1e-12)


# --- metrics -----------------------------------------------------------

def test_metrics_zero_trajectory(paper_plant, fig1_topology, paper_gain):
    x0 = np.zeros((4, 2))
    dist = make_disturbance("none", paper_plant)
    traj = simulate(paper_plant, fig1_topology, paper_gain, [0.0], x0, dist, 1.0, 1e-2,
                    P=np.eye(6))
    met = metrics(traj, 0.5)
    np.testing.assert_array_equal(met.max_abs_error_per_agent, np.zeros((3, 2)))
    assert met.entry_time == 0.0
    assert met.steady_window[0] < met.steady_window[1]


def test_metrics_window_selection(scalar_plant, scalar_topology, scalar_gain):
    dist = make_disturbance("none", scalar_plant)
    traj = simulate(scalar_plant, scalar_topology, scalar_gain, [0.0], [[0.0], [1.0]],
                    dist, 10.0, 1e-2)
    met_full = metrics(traj, 1.0)
    met_tail = metrics(traj, 0.2)
    assert met_full.max_abs_error_per_agent[0, 0] == pytest.approx(1.0)
    # |e| = exp(-t) decays, so the late window peak sits at its left edge t=8
    assert met_tail.max_abs_error_per_agent[0, 0] == pytest.approx(np.exp(-8.0), rel=1e-3)


# --- integration accuracy and invariance -------------------------------

def test_halving_dt_leaves_metrics_unchanged(paper_plant, fig1_topology, paper_gain, paper_x0):
    dist = make_disturbance("sinusoid", paper_plant, amplitudes=PAPER_AMPS,
                            angular_frequency=PAPER_FREQ)
    met = []
    for dt in (2e-3, 1e-3):
        traj = simulate(paper_plant, fig1_topology, paper_gain, [0.0], paper_x0,
                        dist, 40.0, dt)
        met.append(metrics(traj, 0.5).max_abs_error_per_agent)
    drift = np.abs(met[0] - met[1]).max() / np.abs(met[1]).max()
    assert drift < 1e-3


def test_worst_case_dominates_sinusoid(paper_plant, fig1_topology, paper_gain,
                                       paper_minimization, paper_x0):
    sin_dist = make_disturbance("sinusoid", paper_plant, amplitudes=PAPER_AMPS,
                                angular_frequency=PAPER_FREQ)
    worst = make_disturbance("worst_case", paper_plant, P=paper_minimization.P_star)
    met = {}
    for name, dist in (("sin", sin_dist), ("worst", worst)):
        traj = simulate(paper_plant, fig1_topology, paper_gain, [0.0], paper_x0,
                        dist, 40.0, 1e-3)
        met[name] = metrics(traj, 0.5).max_abs_error_per_agent
    assert (met["worst"] >= met["sin"] - 1e-9).all()


def test_invariance_once_inside_stays_inside(scalar_plant, scalar_topology, scalar_laplacian,
                                             scalar_gain):
    res = minimize_trace(scalar_plant, scalar_laplacian, scalar_gain)
    p = res.P_star
    beta = find_beta(scalar_plant, scalar_laplacian, scalar_gain, p)
    assert beta is not None
    rng = np.random.default_rng(9)
    # the worst-case push drives a scalar error to the boundary from any side,
    # so that run starts inside; the rest start outside and must enter
    cases = [(make_disturbance("sinusoid", scalar_plant, amplitudes=[0.95],
                               angular_frequency=0.7), 2.0),
             (make_disturbance("worst_case", scalar_plant, P=p), 0.5)]
    cases += [(make_disturbance("custom", scalar_plant,
                                sample=random_admissible(scalar_plant, rng)), 2.0)
              for _ in range(5)]
    for spec, e0 in cases:
        traj = simulate(scalar_plant, scalar_topology, scalar_gain, [0.0],
                        [[0.0], [e0]], spec, 20.0, 1e-3, P=p)
        v = traj.V
        inside = np.nonzero(v <= 1.0)[0]
        assert inside.size > 0
        assert v[inside[0]:].max() <= 1.0 + 5e-3
        outside = v[:-1] >= 1.0 + 1e-3
        assert np.all(v[1:][outside] < v[:-1][outside])
