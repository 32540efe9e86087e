//! Behavioral checks of the nonlinear Euler-Lagrange solver: convergence,
//! the exact energy identity, residual order, and initial-guess agreement.

use odcm_core::control::*;
use odcm_core::el::*;
use odcm_core::rate::rate_time_domain;
use odcm_core::spectra::*;
use odcm_core::TimeGrid;

fn scenario_a() -> (CorrelationFunction, TimeGrid) {
    (
        lorentzian_correlation(1.0, 1.0).unwrap(),
        TimeGrid::new(10.0, 1024).unwrap(),
    )
}

#[test]
fn converged_solution_properties() {
    let (c, grid) = scenario_a();
    let energy = 20.0;
    let cfg = SolverConfig::new(grid, InitialGuess::Chirp { a: None });
    let sol = solve_optimal(&c, energy, &cfg).unwrap();
    assert!(sol.converged, "solver did not converge in {} iterations", sol.iterations);

    // the returned iterate spends the budget exactly (same quadrature on
    // both sides of the identity)
    assert!(
        ((sol.energy_realized - energy) / energy).abs() <= 1e-12,
        "energy {} vs budget {energy}",
        sol.energy_realized
    );
    assert!(((sol.field.energy() - energy) / energy).abs() <= 1e-12);

    // stationarity at the stated tolerance
    let tol = residual_tolerance(&c, energy, &grid);
    assert!(sol.residual <= tol, "residual {} above tolerance {tol}", sol.residual);

    // the optimum beats both the unmodulated field and the initial guess
    let r_unmod = rate_time_domain(&c, &ControlField::zero(grid));
    let guess = chirp_ansatz((energy / chirp_ansatz(1.0, grid).unwrap().energy()).sqrt(), grid)
        .unwrap();
    let r_guess = rate_time_domain(&c, &guess);
    assert!(sol.objective < r_unmod, "{} vs unmodulated {r_unmod}", sol.objective);
    assert!(sol.objective < r_guess, "{} vs initial guess {r_guess}", sol.objective);

    // boundary conditions: phi(0) = 0 and phid(0) = 0 to discrete order
    let phase = sol.field.phase();
    assert_eq!(phase[0], 0.0);
    assert!(sol.field.amplitude()[0].abs() < 1e-6 * energy.sqrt());
}

#[test]
fn solver_is_deterministic() {
    let (c, grid) = scenario_a();
    let cfg = SolverConfig::new(grid, InitialGuess::Chirp { a: None });
    let a = solve_optimal(&c, 20.0, &cfg).unwrap();
    let b = solve_optimal(&c, 20.0, &cfg).unwrap();
    assert_eq!(a.field.phase(), b.field.phase());
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn residual_halves_under_grid_doubling() {
    let (c, grid) = scenario_a();
    let energy = 20.0;
    let cfg = SolverConfig::new(grid, InitialGuess::Chirp { a: None });
    let sol = solve_optimal(&c, energy, &cfg).unwrap();
    let grid2 = grid.refined();
    let cfg2 = SolverConfig::new(grid2, InitialGuess::Chirp { a: None });
    let sol2 = solve_optimal(&c, energy, &cfg2).unwrap();
    let ratio = sol.residual / sol2.residual;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "residual ratio {ratio} outside [3.5, 4.5] ({} vs {})",
        sol.residual,
        sol2.residual
    );
}

#[test]
fn distinct_initial_guesses_reach_the_same_optimum() {
    let (c, grid) = scenario_a();
    let energy = 20.0;
    let tol_phase = 1e-10;
    let guesses = [
        InitialGuess::Chirp { a: None },
        InitialGuess::LinearPhase { slope: (energy / grid.duration()).sqrt() },
        InitialGuess::Dd { nu_pulse: 1.0 },
    ];
    let mut phases: Vec<Vec<f64>> = Vec::new();
    for guess in guesses {
        let mut cfg = SolverConfig::new(grid, guess);
        cfg.tol_phase = tol_phase;
        let sol = solve_optimal(&c, energy, &cfg).unwrap();
        assert!(sol.converged);
        phases.push(sol.field.phase().to_vec());
    }
    for i in 0..phases.len() {
        for j in i + 1..phases.len() {
            let diff = phases[i]
                .iter()
                .zip(&phases[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            assert!(
                diff <= 10.0 * tol_phase,
                "guesses {i} and {j} disagree by {diff}"
            );
        }
    }
}

#[test]
fn residual_of_a_non_stationary_field_is_large() {
    let (c, grid) = scenario_a();
    let energy = 20.0;
    let (dd, _) = dd_sequence(energy, grid, 1.0).unwrap();
    let res = el_residual(&c, &dd, dd.energy()).unwrap();
    assert!(
        res > 10.0 * residual_tolerance(&c, energy, &grid),
        "pulse train looks stationary: residual {res}"
    );
}

#[test]
fn flat_phase_on_resonance_is_rejected_as_degenerate() {
    let (c, grid) = scenario_a();
    let cfg = SolverConfig::new(grid, InitialGuess::Explicit(vec![0.0; grid.len()]));
    match solve_optimal(&c, 20.0, &cfg) {
        Err(odcm_core::Error::DegenerateStationaryPoint(_)) => {}
        other => panic!("expected a degenerate-stationary-point error, got {other:?}"),
    }
}

#[test]
fn off_resonant_solution_converges_and_improves() {
    let delta = 1.5;
    let c = shift_center(&lorentzian_correlation(1.0, 2.0).unwrap(), delta);
    let grid = TimeGrid::new(10.0, 1024).unwrap();
    let cfg = SolverConfig::new(grid, InitialGuess::Chirp { a: None });
    let sol = solve_optimal(&c, 30.0, &cfg).unwrap();
    assert!(sol.converged);
    let r_unmod = rate_time_domain(&c, &ControlField::zero(grid));
    assert!(sol.objective < r_unmod);
    assert!(sol.residual <= residual_tolerance(&c, 30.0, &grid));
}
