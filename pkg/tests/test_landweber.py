from fractions import Fraction

import numpy as np
import pytest

from bouligand_landweber import (
    ForwardProblem,
    GridFunction,
    LandweberConfig,
    NoiseSpec,
    RunRecord,
    add_noise,
    build_mesh,
    check_parameters,
    empirical_rate,
    exact_fields,
    m_norm,
    relative_error,
    run,
    solve_forward,
)


def test_check_parameters_default_experiment_values():
    # exact arithmetic oracle: with mu=1/10, tau=7/5, Lam=720, L=1/20 the two
    # left-hand sides are 11/7 and 81/10, both positive (conditions violated)
    cfg = LandweberConfig(mu=0.1, tau=1.4, lbar=0.05)
    assert cfg.effective_bounds()[1] == pytest.approx(720.0, rel=1e-12)
    res = check_parameters(cfg, L=0.05)
    choice_exact = 2 * (Fraction(1, 10) + 1) / Fraction(7, 5) - (
        2 - Fraction(2, 10) - 720 * Fraction(1, 400)
    )
    aux_exact = -1 + Fraction(1, 10) + 5 * 720 * Fraction(1, 400)
    assert res.choice == pytest.approx(float(choice_exact), abs=1e-12)
    assert res.choice_aux == pytest.approx(float(aux_exact), abs=1e-12)
    assert float(choice_exact) == pytest.approx(1.5714285714285714, abs=1e-15)
    assert float(aux_exact) == 8.1
    assert res.satisfied == (False, False)


def test_check_parameters_satisfiable_regime():
    cfg = LandweberConfig(mu=0.0, tau=2.0, lbar=1.0, Lam=0.1, lam=0.1, steps=(0.1,) * 10)
    res = check_parameters(cfg, L=1.0)
    assert res.choice == pytest.approx(-0.9, abs=1e-12)
    assert res.choice_aux == pytest.approx(-0.5, abs=1e-12)
    assert res.satisfied == (True, True)


def test_check_parameters_limiting_case():
    cfg = LandweberConfig(mu=0.0, tau=1e12, lbar=1.0, steps=(1e-12,) * 4)
    res = check_parameters(cfg, L=1.0)
    assert res.choice == pytest.approx(-2.0, abs=1e-10)
    assert res.choice_aux == pytest.approx(-1.0, abs=1e-10)


def test_check_parameters_requires_positive_norm_bound():
    with pytest.raises(ValueError):
        check_parameters(LandweberConfig(), L=0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        LandweberConfig(mu=1.0)
    with pytest.raises(ValueError):
        LandweberConfig(tau=1.0)
    with pytest.raises(ValueError):
        LandweberConfig(max_iter=0)
    with pytest.raises(ValueError):
        LandweberConfig(delta=-1.0)
    with pytest.raises(ValueError):
        LandweberConfig(steps=(1.0, -1.0))
    with pytest.raises(ValueError):
        LandweberConfig(lam=2.0, Lam=1.0)


def test_step_schedule():
    cfg = LandweberConfig(steps=(1.0, 2.0, 3.0))
    assert cfg.step_size(0) == 1.0
    assert cfg.step_size(2) == 3.0
    assert cfg.effective_bounds() == (1.0, 3.0)
    with pytest.raises(ValueError, match="exhausted"):
        cfg.step_size(3)


def test_constant_step_default_value():
    assert LandweberConfig().constant_step == pytest.approx(720.0, rel=1e-12)


def test_relative_error_trivial(problem17):
    M = problem17.M
    n = problem17.mesh.n_interior
    u_exact = np.ones(n)
    assert relative_error(u_exact, u_exact, M) == 0.0
    assert relative_error(np.zeros(n), u_exact, M) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError, match="zero norm"):
        relative_error(u_exact, np.zeros(n), M)


def test_empirical_rate():
    assert empirical_rate(0.3, 0.04) == pytest.approx(1.5, rel=1e-14)
    with pytest.raises(ValueError):
        empirical_rate(0.3, 0.0)


def test_discrepancy_satisfied_at_start(problem17):
    # tau*delta above the initial residual stops the run at N = 0
    u_exact, y_exact, _ = exact_fields(problem17.mesh)
    u0 = GridFunction(problem17.mesh, np.zeros(problem17.mesh.n_interior), "source")
    res0 = m_norm(problem17.M, y_exact.values - solve_forward(problem17, u0).y.values)
    cfg = LandweberConfig(delta=res0 / 1.4 * 1.01)
    record = run(problem17, y_exact, cfg, u0, u_exact)
    assert record.stopping_index == 0
    assert record.reason == "discrepancy"
    assert np.array_equal(record.final.values, u0.values)


def _noisy_run(problem, seed=5, target=1e-3, **cfg_kwargs):
    u_exact, y_exact, u_bar = exact_fields(problem.mesh)
    y_noisy, delta = add_noise(y_exact, NoiseSpec(seed=seed, mode="rescale", value=target), problem.M)
    cfg = LandweberConfig(delta=delta, **cfg_kwargs)
    return run(problem, y_noisy, cfg, u_bar, u_exact), cfg


def test_noisy_run_record_invariants(problem33):
    record, cfg = _noisy_run(problem33)
    assert record.reason == "discrepancy"
    N = record.stopping_index
    assert record.residual_norms[N] <= cfg.tau * cfg.delta
    assert np.all(record.residual_norms[:N] > cfg.tau * cfg.delta)
    assert record.check_discrepancy()
    assert len(record.residual_norms) == N + 1
    assert len(record.ssn_counts) == N + 1
    assert record.total_ssn == int(np.sum(record.ssn_counts))


def test_fejer_monotonicity_up_to_stopping(problem33):
    record, _ = _noisy_run(problem33, seed=9, target=5e-4)
    errors = record.rel_errors
    assert np.all(np.diff(errors) <= 1e-12)


def test_noise_free_monotone_error(problem17):
    # inverse-crime data on a small mesh: error decreases monotonically
    u_exact, _, u_bar = exact_fields(problem17.mesh)
    y_data = solve_forward(problem17, u_exact).y
    cfg = LandweberConfig(delta=0.0, max_iter=40)
    record = run(problem17, y_data, cfg, u_bar, u_exact)
    assert record.reason == "max-iterations"
    assert np.all(np.diff(record.rel_errors) <= 1e-12)
    assert record.rel_errors[-1] < record.rel_errors[0]


def test_run_deterministic(problem33):
    rec1, _ = _noisy_run(problem33, seed=13)
    rec2, _ = _noisy_run(problem33, seed=13)
    assert np.array_equal(rec1.residual_norms, rec2.residual_norms)
    assert np.array_equal(rec1.rel_errors, rec2.rel_errors)
    assert np.array_equal(rec1.final.values, rec2.final.values)


def test_warm_start_agrees(problem33):
    cold, _ = _noisy_run(problem33, seed=4)
    warm, _ = _noisy_run(problem33, seed=4, warm_start=True)
    assert warm.stopping_index == cold.stopping_index
    assert warm.total_ssn <= cold.total_ssn
    assert warm.rel_errors[-1] == pytest.approx(cold.rel_errors[-1], abs=1e-8)


def test_store_iterates(problem17):
    u_exact, y_exact, u_bar = exact_fields(problem17.mesh)
    cfg = LandweberConfig(delta=0.0, max_iter=3, store_iterates=True)
    record = run(problem17, y_exact, cfg, u_bar, u_exact)
    assert len(record.iterates) == len(record.residual_norms)
    assert np.array_equal(record.iterates[0], u_bar.values)


def test_forward_failure_truncates(problem17):
    broken = ForwardProblem.build(build_mesh(17), ssn_max_iter=0)
    u_exact, y_exact, u_bar = exact_fields(broken.mesh)
    record = run(broken, y_exact, LandweberConfig(), u_bar, u_exact)
    assert record.reason == "forward-failure"
    assert len(record.residual_norms) == 0
    assert record.stopping_index == -1


def test_update_failure_truncates_after_residual(problem17, monkeypatch):
    from bouligand_landweber import ConvergenceError
    from bouligand_landweber import landweber as lw

    def boom(op, M, w):
        raise ConvergenceError("stalled", residual=1.0)

    monkeypatch.setattr(lw, "apply_subderivative", boom)
    u_exact, y_exact, u_bar = exact_fields(problem17.mesh)
    record = lw.run(problem17, y_exact, LandweberConfig(), u_bar, u_exact)
    assert record.reason == "forward-failure"
    assert len(record.residual_norms) == 1  # the starting residual was recorded
    assert record.stopping_index == 0


def test_record_roundtrip(tmp_path, problem33):
    record, cfg = _noisy_run(problem33, seed=2)
    base = tmp_path / "run"
    csv_path, json_path = record.save(base)
    assert csv_path.exists() and json_path.exists()
    back = RunRecord.load(base)
    assert np.array_equal(back.residual_norms, record.residual_norms)
    assert np.array_equal(back.rel_errors, record.rel_errors)
    assert np.array_equal(back.ssn_counts, record.ssn_counts)
    assert back.stopping_index == record.stopping_index
    assert back.reason == record.reason
    assert back.delta == record.delta
    assert back.tau == record.tau
    assert back.config == record.config
    # the stopping rule is re-checkable from the serialized record alone
    assert back.check_discrepancy()


def test_record_roundtrip_without_exact(tmp_path, problem17):
    u_exact, y_exact, u_bar = exact_fields(problem17.mesh)
    y_noisy, delta = add_noise(y_exact, NoiseSpec(seed=0, mode="rescale", value=1e-2), problem17.M)
    record = run(problem17, y_noisy, LandweberConfig(delta=delta), u_bar)
    assert record.rel_errors is None
    base = tmp_path / "run"
    record.save(base)
    back = RunRecord.load(base)
    assert back.rel_errors is None
    assert np.array_equal(back.residual_norms, record.residual_norms)
