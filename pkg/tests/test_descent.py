from types import SimpleNamespace

import numpy as np
import pytest

from helpers import random_integer_control
from pmpdescent import (MODE_FULL_STEP, TERMINATION_MAX_OUTER, TERMINATION_MESH,
                        TERMINATION_RESIDUAL, AcceptedStep, AlgorithmConfig,
                        CellSet, ControlField, InfeasibleControlError,
                        MeshResolutionReached, NodalField,
                        Problem, armijo_search, build_unit_square_mesh,
                        candidate_control, descent_identity_residual, phi_cells,
                        rho, run, select_set, step, verify_pmp)


def constant_adjoint(mesh, value):
    return NodalField(mesh, np.full(mesh.num_vertices, value))


def test_config_validation():
    with pytest.raises(ValueError):
        AlgorithmConfig(beta=1.0)
    with pytest.raises(ValueError):
        AlgorithmConfig(sigma=0.0)
    with pytest.raises(ValueError):
        AlgorithmConfig(delta_tol=-1.0)
    with pytest.raises(ValueError):
        AlgorithmConfig(mode="newton")


def test_candidate_zero_adjoint(benchmark_integrand):
    mesh = build_unit_square_mesh(4)
    utilde = candidate_control(constant_adjoint(mesh, 0.0), benchmark_integrand)
    assert np.array_equal(utilde.values, np.zeros(mesh.num_cells))


def test_candidate_saturates_box(benchmark_integrand):
    mesh = build_unit_square_mesh(2)
    utilde = candidate_control(constant_adjoint(mesh, -0.5), benchmark_integrand)
    assert np.array_equal(utilde.values, np.full(mesh.num_cells, 10.0))


def test_phi_zero_when_candidate_equals_control(benchmark_integrand):
    mesh = build_unit_square_mesh(3)
    u = ControlField(mesh, np.full(mesh.num_cells, 2.0))
    p = constant_adjoint(mesh, 0.1)
    phi = phi_cells(u, u, p, benchmark_integrand)
    assert np.array_equal(phi, np.zeros(mesh.num_cells))


def test_phi_hand_value(benchmark_integrand):
    # |T| = 1/8, jump 0 -> 10 at averaged adjoint -0.5:
    # phi = (1/8) * (10*(-0.5) + 0.5 - 0) = -0.5625
    mesh = build_unit_square_mesh(2)
    u = ControlField(mesh, np.zeros(mesh.num_cells))
    utilde = ControlField(mesh, np.full(mesh.num_cells, 10.0))
    phi = phi_cells(u, utilde, constant_adjoint(mesh, -0.5), benchmark_integrand)
    assert phi == pytest.approx(np.full(mesh.num_cells, -0.5625), abs=1e-15)
    assert rho(phi) == pytest.approx(-0.5625 * mesh.num_cells, abs=1e-14)


def test_phi_rejects_infeasible_control(benchmark_integrand):
    mesh = build_unit_square_mesh(2)
    u = ControlField(mesh, np.full(mesh.num_cells, 0.5))
    utilde = ControlField(mesh, np.zeros(mesh.num_cells))
    with pytest.raises(InfeasibleControlError):
        phi_cells(u, utilde, constant_adjoint(mesh, 0.0), benchmark_integrand)


def test_rho_is_plain_sum():
    assert rho(np.zeros(5)) == 0.0
    phi = np.zeros(4)
    phi[2] = -0.5625
    assert rho(phi) == -0.5625


def test_select_set_hand_example():
    # three cells of area 1/3, phi = (-5, -3, -1), t = 1/3: only the -5 cell
    # fits and it captures -5 <= (1/3)(-9) = -3
    stub = SimpleNamespace(cell_area=1.0 / 3.0, domain_area=1.0)
    phi = np.array([-5.0, -3.0, -1.0])
    cs = select_set(phi, 1.0 / 3.0, stub)
    assert np.array_equal(cs.indices, [0])
    assert cs.total_area == pytest.approx(1.0 / 3.0)


def test_select_set_full_step_takes_all_negative():
    stub = SimpleNamespace(cell_area=0.25, domain_area=1.0)
    phi = np.array([-1.0, 0.0, -2.0, 0.0])
    cs = select_set(phi, 1.0, stub)
    assert np.array_equal(cs.indices, [0, 2])
    assert cs.total_area == 0.5


def test_select_set_infeasible_when_no_cell_fits():
    stub = SimpleNamespace(cell_area=0.25, domain_area=1.0)
    phi = np.array([-1.0, -1.0, -1.0, -1.0])
    assert select_set(phi, 0.2, stub) is None


def test_select_set_infeasible_from_area_granularity():
    # one cell is allowed but captures only 1/4 of the integral < t = 0.49
    stub = SimpleNamespace(cell_area=0.25, domain_area=1.0)
    phi = np.array([-1.0, -1.0, -1.0, -1.0])
    assert select_set(phi, 0.49, stub) is None


def test_select_set_breaks_ties_by_cell_index():
    stub = SimpleNamespace(cell_area=0.25, domain_area=1.0)
    phi = np.array([-1.0, -2.0, -1.0, -2.0])
    cs = select_set(phi, 0.5, stub)
    assert np.array_equal(cs.indices, [1, 3])
    stub_small = SimpleNamespace(cell_area=0.25, domain_area=1.0)
    cs1 = select_set(phi, 0.26, stub_small)
    assert np.array_equal(cs1.indices, [1])


def test_select_set_requires_negative_total():
    stub = SimpleNamespace(cell_area=0.5, domain_area=1.0)
    with pytest.raises(ValueError):
        select_set(np.zeros(2), 0.5, stub)
    with pytest.raises(ValueError):
        select_set(np.array([-1.0, 0.5]), 1.5, stub)


@pytest.fixture(scope="module")
def problem4(benchmark_integrand):
    return Problem.build(4, benchmark_integrand)


def test_armijo_accepts_first_feasible_step(problem4, benchmark_integrand):
    u = problem4.zero_control()
    y = problem4.solve_state(u)
    p = problem4.solve_adjoint(y)
    utilde = candidate_control(p, benchmark_integrand)
    phi = phi_cells(u, utilde, p, benchmark_integrand)
    result = armijo_search(problem4, u, y, utilde, phi, AlgorithmConfig())
    assert isinstance(result, AcceptedStep)
    assert 0.0 < result.t <= 1.0
    assert result.objective < problem4.objective(y, u)
    # the accepted inequality holds with the selected set's integral
    assert result.objective - problem4.objective(y, u) <= 0.1 * result.selected_phi_sum


def test_step_terminates_at_pmp_point(problem4):
    cfg = AlgorithmConfig()
    history = run(problem4, cfg)
    assert history.termination in (TERMINATION_RESIDUAL, TERMINATION_MESH)
    outcome = step(problem4, history.control, cfg, k=99)
    if history.termination == TERMINATION_RESIDUAL:
        assert outcome.terminated == TERMINATION_RESIDUAL
        assert outcome.control is None
        assert outcome.record.t_k == 0.0


def test_run_descends_and_stays_feasible(problem4, benchmark_integrand):
    history = run(problem4, AlgorithmConfig(), keep_iterates=True)
    records = history.records
    assert len(records) >= 2
    js = [r.J for r in records]
    assert all(a > b for a, b in zip(js, js[1:]))  # strictly decreasing
    assert all(r.rho <= 0.0 for r in records)
    for it in history.iterates:
        vals = it.values
        assert np.all(vals == np.round(vals))
        assert np.all(np.abs(vals) <= 10)
    # terminal record took no step
    assert records[-1].t_k == 0.0
    # accepted records satisfy the sufficient-decrease inequality exactly
    for prev, nxt in zip(records, records[1:]):
        assert nxt.J - prev.J <= 0.1 * prev.selected_phi_sum
        # selected integral captures at least the t-fraction of the total
        assert prev.selected_phi_sum <= prev.t_k * prev.rho + 1e-15
        # measure bound
        assert prev.set_measure <= prev.t_k * 1.0 + problem4.mesh.cell_area * 1e-9


def test_run_summability_bound(problem4):
    # sum of t_k |rho_k| over accepted steps is bounded by (J_0 - min J) / sigma
    sigma = 0.1
    history = run(problem4, AlgorithmConfig(sigma=sigma))
    accepted = [r for r in history.records if r.t_k > 0.0]
    total = sum(r.t_k * r.rho_l1 for r in accepted)
    js = [r.J for r in history.records]
    assert total <= (js[0] - min(js)) / sigma + 1e-12


def test_run_huge_tolerance_single_record(problem4):
    history = run(problem4, AlgorithmConfig(delta_tol=1e9))
    assert history.termination == TERMINATION_RESIDUAL
    assert len(history.records) == 1
    assert history.records[0].t_k == 0.0
    assert history.accepted_steps == 0


def test_run_max_outer_cap(problem4):
    history = run(problem4, AlgorithmConfig(max_outer=1))
    assert history.termination in (TERMINATION_MAX_OUTER, TERMINATION_RESIDUAL)
    if history.termination == TERMINATION_MAX_OUTER:
        assert len(history.records) == 2  # one step plus the terminal evaluation
        assert history.accepted_steps == 1


def test_run_rejects_infeasible_start(problem4):
    bad = ControlField(problem4.mesh, np.full(problem4.mesh.num_cells, 0.5))
    with pytest.raises(InfeasibleControlError):
        run(problem4, AlgorithmConfig(), u0=bad)


def test_run_degenerate_mesh_without_interior(benchmark_integrand):
    # n=1 has no interior vertex: state and adjoint vanish, the candidate
    # equals the zero start, and the run terminates immediately
    problem = Problem.build(1, benchmark_integrand)
    history = run(problem, AlgorithmConfig())
    assert history.termination == TERMINATION_RESIDUAL
    assert history.records[0].rho == 0.0
    assert np.array_equal(history.control.values, np.zeros(2))


def test_full_step_mode_runs_and_logs(benchmark_integrand):
    problem = Problem.build(8, benchmark_integrand)
    cfg = AlgorithmConfig(mode=MODE_FULL_STEP, max_outer=15)
    history = run(problem, cfg, keep_iterates=True)
    assert history.termination in (TERMINATION_RESIDUAL, TERMINATION_MAX_OUTER)
    for it in history.iterates:
        assert np.all(it.values == np.round(it.values))
        assert np.all(np.abs(it.values) <= 10)
    steps = [r for r in history.records if r.t_k > 0.0]
    assert all(r.t_k == 1.0 for r in steps)


def test_descent_identity_empty_set_is_exact(problem4):
    mesh = problem4.mesh
    u = problem4.zero_control()
    utilde = ControlField(mesh, np.ones(mesh.num_cells))
    empty = CellSet(np.array([], dtype=np.int64), 0.0)
    assert descent_identity_residual(problem4, u, utilde, empty) == 0.0


def test_descent_identity_all_cells(benchmark_integrand):
    problem = Problem.build(8, benchmark_integrand)
    mesh = problem.mesh
    u = problem.zero_control()
    utilde = ControlField(mesh, np.ones(mesh.num_cells))
    full = CellSet(np.arange(mesh.num_cells), 1.0)
    res = descent_identity_residual(problem, u, utilde, full)
    y = problem.solve_state(u)
    j = problem.objective(y, u)
    assert res <= 1e-8 * max(1.0, abs(j))


def test_descent_identity_random_triples(benchmark_integrand):
    problem = Problem.build(8, benchmark_integrand)
    mesh = problem.mesh
    rng = np.random.default_rng(17)
    for _ in range(20):
        u = random_integer_control(mesh, rng)
        utilde = random_integer_control(mesh, rng)
        mask = rng.random(mesh.num_cells) < 0.5
        cells = CellSet(np.flatnonzero(mask), float(mask.sum()) * mesh.cell_area)
        res = descent_identity_residual(problem, u, utilde, cells)
        y = problem.solve_state(u)
        j = problem.objective(y, u)
        assert res <= 1e-8 * max(1.0, abs(j))


def test_verify_pmp_zero_at_candidate(problem4, benchmark_integrand):
    u = problem4.zero_control()
    y = problem4.solve_state(u)
    p = problem4.solve_adjoint(y)
    utilde = candidate_control(p, benchmark_integrand)
    assert verify_pmp(utilde, p, benchmark_integrand) == 0.0


def test_verify_pmp_detects_perturbation(problem4, benchmark_integrand):
    u = problem4.zero_control()
    y = problem4.solve_state(u)
    p = problem4.solve_adjoint(y)
    utilde = candidate_control(p, benchmark_integrand)
    values = utilde.values.copy()
    cell = int(np.argmax(np.abs(values)))
    values[cell] = values[cell] - 2.0 if values[cell] > 0 else values[cell] + 2.0
    worse = ControlField(problem4.mesh, values)
    assert verify_pmp(worse, p, benchmark_integrand) > 0.0


def test_phi_nonpositive_for_candidate_controls(benchmark_integrand):
    # the candidate is the cellwise argmin, so phi_T <= 0 must hold exactly
    # in floating point, whatever the current control and adjoint are
    mesh = build_unit_square_mesh(16)
    rng = np.random.default_rng(31)
    for _ in range(10):
        inner = np.zeros(mesh.num_vertices)
        inner[mesh.interior] = rng.normal(scale=0.05, size=len(mesh.interior))
        p = NodalField(mesh, inner)
        u = random_integer_control(mesh, rng)
        utilde = candidate_control(p, benchmark_integrand)
        phi = phi_cells(u, utilde, p, benchmark_integrand)
        assert np.all(phi <= 0.0)
        assert rho(phi) <= 0.0


def test_armijo_requires_negative_residual(problem4, benchmark_integrand):
    u = problem4.zero_control()
    y = problem4.solve_state(u)
    with pytest.raises(ValueError):
        armijo_search(problem4, u, y, u, np.zeros(problem4.mesh.num_cells),
                      AlgorithmConfig())


def test_mesh_resolution_described_by_trials(benchmark_integrand):
    # with beta = 0.01 and n = 4 there are only two usable step sizes, so a
    # search that rejects both reports the trial count and underflows
    problem = Problem.build(4, benchmark_integrand)
    u = problem.zero_control()
    y = problem.solve_state(u)
    p = problem.solve_adjoint(y)
    utilde = candidate_control(p, benchmark_integrand)
    phi = phi_cells(u, utilde, p, benchmark_integrand)
    # sigma close to 1 makes the sufficient-decrease test nearly unsatisfiable
    result = armijo_search(problem, u, y, utilde, phi,
                           AlgorithmConfig(sigma=0.999999999))
    if isinstance(result, MeshResolutionReached):
        assert result.trials >= 1
