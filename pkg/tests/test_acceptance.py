"""End-to-end acceptance gate.

Each test covers one shipped guarantee; the conftest hook turns their
outcomes into one "[criterion NN] <name>: PASS|FAIL" line each in the
terminal summary. Tolerances are pinned in the assertions; statistical
checks use fixed seeds and 4-sigma bands.
"""

import filecmp
import time

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from polarsim import cli, qkd
from polarsim.dynamics import (
    DetectorModel,
    build_joint_initial,
    decompose,
    evolve,
    recurrence_scan,
)
from polarsim.epr import (
    chsh_experiment,
    correlation_experiment,
    joint_probabilities,
    left_marginal,
    local_deterministic_chsh_max,
    pair_state,
    required_events,
    right_marginal,
    singlet_state,
)
from polarsim.presets import get_preset, preset_names
from polarsim.qstate import (
    equal_up_to_phase,
    ket_from_bloch,
    pre_analyzer_state,
    reduction_unitaries,
)
from polarsim.strategy import average_density, cycle_plan, run_strategy

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])
SQRT_HALF = np.sqrt(0.5)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def test_criterion_01_born_rule_frequencies():
    """Sampled +1 frequencies track (1 + n.m)/2 within 4 sigma."""
    start = time.perf_counter()
    rng = np.random.default_rng(20260801)
    K = 100_000
    for i in range(20):
        n, m = random_unit(rng), random_unit(rng)
        outcomes = run_strategy(cycle_plan(K, [n], [m]), seed=1000 + i)
        nu = float(np.mean(outcomes.d == 1))
        p_v = 0.5 * (1.0 + float(n @ m))
        band = 4.0 * np.sqrt(p_v * (1.0 - p_v) / K)
        assert abs(nu - p_v) <= band, (i, nu, p_v, band)
    assert time.perf_counter() - start < 10.0


def test_criterion_02_aligned_analyzer_agreement():
    """Preparing along the analyzer axis never yields a -1 outcome."""
    rng = np.random.default_rng(20260802)
    K = 100_000
    for n in (Z, X, random_unit(rng)):
        outcomes = run_strategy(cycle_plan(K, [n], [n]), seed=77)
        assert int(np.sum(outcomes.d == -1)) == 0
        assert outcomes.d.shape == (K,)


def test_criterion_03_alternating_plan_densities():
    """The two observable subsequences of the alternating plan average
    to exactly the pinned density matrices."""
    plan = cycle_plan(400, [Z, X, Z, Y], [Z, Y])
    rho_first = average_density(plan, selector=Z)
    assert_allclose(rho_first, np.diag([0.0, 1.0]), atol=1e-12)
    rho_second = average_density(plan, selector=Y)
    expected = np.array([[0.5, 0.25 - 0.25j], [0.25 + 0.25j, 0.5]])
    assert_allclose(rho_second, expected, atol=1e-12)
    weights = np.linalg.eigvalsh(rho_second)
    assert_allclose(
        weights,
        [(1.0 - SQRT_HALF) / 2.0, (1.0 + SQRT_HALF) / 2.0],
        atol=1e-12,
    )


def test_criterion_04_reduction_unitaries():
    """Both reduction unitaries are unitary to 1e-12 and send the
    pre-analyzer ket to the corresponding basis state up to phase."""
    rng = np.random.default_rng(20260804)
    eye = np.eye(2)
    for _ in range(1000):
        n, m = random_unit(rng), random_unit(rng)
        pair = reduction_unitaries(n, m)
        mes = pre_analyzer_state(n, m)
        for u in (pair.u_vertical, pair.u_horizontal):
            assert np.max(np.abs(u.conj().T @ u - eye)) <= 1e-12
        assert equal_up_to_phase(pair.u_vertical @ mes, [0.0, 1.0])
        assert equal_up_to_phase(pair.u_horizontal @ mes, [1.0, 0.0])


def test_criterion_05_detector_coherence_dynamics():
    """Joint evolution is trace/spectrum preserving, the two-level
    coherence follows |alpha beta||cos(2 g0 t)|, revivals land on
    k pi/(2 g0), and ending the pulse freezes the coherence."""
    start = time.perf_counter()
    g0 = 1.0
    model = DetectorModel.ladder(2, 0.0, g0, 0.0, 1000.0, "ground")
    photon = ket_from_bloch(X)
    joint = build_joint_initial(model, photon)
    spectrum = np.linalg.eigvalsh(joint)
    for t in np.arange(0.0, 3.0 * np.pi / g0, 0.05):
        evolved = evolve(joint, model, t)
        assert abs(np.trace(evolved).real - 1.0) <= 1e-9
        assert_allclose(np.linalg.eigvalsh(evolved), spectrum, atol=1e-8)
        dec = decompose(evolved)
        oracle = 0.5 * abs(np.cos(2.0 * g0 * t))
        assert abs(dec.lambda_norm - oracle) <= 1e-6
        assert abs(dec.p1 - 0.5) <= 1e-9
    dt = 0.02
    revivals = recurrence_scan(model, photon, 9.0, dt, 0.9995)
    assert len(revivals) == 5
    for j, t_rev in enumerate(revivals, start=1):
        assert abs(t_rev - j * np.pi / (2.0 * g0)) <= dt + 1e-9
    t_f = np.pi / (8.0 * g0)
    truncated = DetectorModel.ladder(2, 0.0, g0, 0.0, t_f, "ground")
    joint_t = build_joint_initial(truncated, photon)
    frozen = decompose(evolve(joint_t, truncated, t_f)).lambda_norm
    assert abs(frozen - 0.5 * np.cos(np.pi / 4.0)) <= 1e-9
    for t in (t_f + 0.5, t_f + 2.0, t_f + 10.0):
        later = decompose(evolve(joint_t, truncated, t)).lambda_norm
        assert abs(later - frozen) <= 1e-9
    assert time.perf_counter() - start < 5.0


def test_criterion_06_singlet_correlations():
    """Sampled singlet covariances converge to -m_l.m_r, and the
    antiparallel arrangement matches on every single event."""
    state = singlet_state(Z)
    rng = np.random.default_rng(20260806)
    N = 100_000
    for i in range(10):
        m_l, m_r = random_unit(rng), random_unit(rng)
        res = correlation_experiment(state, m_l, m_r, N, seed=3000 + i)
        assert abs(res.covariance - (-float(m_l @ m_r))) <= 4.0 / np.sqrt(N)
    m_l = random_unit(rng)
    res = correlation_experiment(state, m_l, -m_l, N, seed=3100)
    assert res.covariance == 1.0
    assert res.mismatch_count == 0


def test_criterion_07_correlation_bound():
    """A perfect N-event record bounds the mismatch odds by 1/(N+1);
    pushing that bound below 0.1 takes 59 events."""
    state = singlet_state(Z)
    res_1 = correlation_experiment(state, Z, -Z, 1, seed=41)
    assert res_1.bound == 0.5
    res_9 = correlation_experiment(state, Z, -Z, 9, seed=41)
    assert res_9.bound == 0.1
    assert required_events(0.1) == 59


def test_criterion_08_chsh_violation():
    """The optimal settings give |S| = 2 sqrt(2) within 4 sigma while
    any local deterministic assignment caps at 2."""
    start = time.perf_counter()
    result = chsh_experiment(
        Z,
        X,
        np.array([SQRT_HALF, 0.0, SQRT_HALF]),
        np.array([SQRT_HALF, 0.0, -SQRT_HALF]),
        100_000,
        seed=20260808,
    )
    assert abs(abs(result.analytic_s) - 2.0 * np.sqrt(2.0)) <= 1e-12
    assert abs(result.s_value - result.analytic_s) <= 4.0 * result.stderr
    assert abs(result.s_value) > 2.0
    assert local_deterministic_chsh_max() == 2.0
    assert time.perf_counter() - start < 10.0


def test_criterion_09_no_signaling():
    """Either party's marginal is unchanged by the remote setting."""
    rng = np.random.default_rng(20260809)
    for i in range(100):
        axis = random_unit(rng)
        if i % 2 == 0:
            state = singlet_state(axis)
        else:
            theta = rng.uniform(0.0, np.pi)
            phi = rng.uniform(0.0, 2.0 * np.pi)
            state = pair_state(theta, phi, axis)
        m_l, m_r = random_unit(rng), random_unit(rng)
        m_l_alt, m_r_alt = random_unit(rng), random_unit(rng)
        base = joint_probabilities(state, m_l, m_r)
        swap_r = joint_probabilities(state, m_l, m_r_alt)
        swap_l = joint_probabilities(state, m_l_alt, m_r)
        assert_allclose(left_marginal(base), left_marginal(swap_r), atol=1e-12)
        assert_allclose(right_marginal(base), right_marginal(swap_l), atol=1e-12)


def test_criterion_10_key_duplication():
    """Noise-free sessions duplicate the key exactly; flip noise at
    epsilon shows up as a 2 eps (1 - eps) error rate."""
    bases = np.array([Z, X])
    for seed in range(100):
        agents = qkd.coordinated_agents(bases, 2 * seed + 1, 2 * seed + 2)
        records = qkd.run_session(512, agents, qkd.NoiseModel(epsilon=0.0), seed)
        key_l, key_r = qkd.sift(*records)
        assert_array_equal(key_l.bits, key_r.bits)
        assert_array_equal(key_l.rounds, key_r.rounds)
    rounds = 10_000
    epsilon = 0.05
    agents = qkd.coordinated_agents(bases, 11, 12)
    records = qkd.run_session(
        rounds, agents, qkd.NoiseModel(epsilon=epsilon), 20260810
    )
    key_l, key_r = qkd.sift(*records)
    assert abs(len(key_l) - rounds / 2) <= 4.0 * np.sqrt(rounds * 0.25)
    qber, _ = qkd.estimate_qber(key_l, key_r, 0.5, seed=20260810)
    expected = 2.0 * epsilon * (1.0 - epsilon)
    n_sample = int(0.5 * len(key_l))
    band = 4.0 * np.sqrt(expected * (1.0 - expected) / n_sample)
    assert abs(qber - expected) <= band


def test_criterion_11_cli_determinism(tmp_path):
    """Rerunning every built-in preset reproduces each artifact file
    byte for byte, figures included."""
    for name in preset_names():
        kind = get_preset(name)["experiment"]
        dirs = (tmp_path / f"{name}-a", tmp_path / f"{name}-b")
        for out in dirs:
            rc = cli.main([kind, "--preset", name, "--out", str(out)])
            assert rc == 0
        files = sorted(p.name for p in dirs[0].iterdir())
        assert files == sorted(p.name for p in dirs[1].iterdir())
        match, mismatch, errors = filecmp.cmpfiles(
            dirs[0], dirs[1], files, shallow=False
        )
        assert mismatch == [] and errors == [], (name, mismatch, errors)
        assert sorted(match) == files
