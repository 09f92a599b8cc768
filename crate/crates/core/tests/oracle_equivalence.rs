mod common;

use common::instance;
use wpcn_core::oracle::{grid_maxmin_coop, grid_maxmin_independent, OracleSettings};
use wpcn_core::{solve_independent, solve_p3, Error, SolverSettings};

fn agree(solver: f64, oracle: f64, settings: &OracleSettings) {
    let tol = (1e-3 * oracle).max(settings.final_resolution() * oracle);
    assert!((solver - oracle).abs() <= tol, "solver {solver:e} oracle {oracle:e}");
}

#[test]
fn cooperative_single_antenna() {
    let settings = OracleSettings::default();
    for seed in 0..6 {
        for n in [2, 3] {
            let (phy, chan) = instance(n, 1, seed);
            let oracle = grid_maxmin_coop(&chan, &phy, &settings).unwrap();
            let solved = solve_p3(&chan, &phy, &SolverSettings::default()).unwrap();
            agree(solved.sbar_star, oracle.sbar, &settings);
        }
    }
}

#[test]
fn cooperative_two_antennas() {
    let settings = OracleSettings::default();
    let (phy, chan) = instance(3, 2, 21);
    let oracle = grid_maxmin_coop(&chan, &phy, &settings).unwrap();
    let solved = solve_p3(&chan, &phy, &SolverSettings::default()).unwrap();
    agree(solved.sbar_star, oracle.sbar, &settings);
}

#[test]
fn independent_matches_grid() {
    let settings = OracleSettings::default();
    for (n, m, seed) in [(2, 1, 1), (3, 1, 2), (2, 2, 3)] {
        let (phy, chan) = instance(n, m, seed);
        let oracle = grid_maxmin_independent(&chan, &phy, &settings).unwrap();
        let solved = solve_independent(&chan, &phy, &SolverSettings::default()).unwrap();
        agree(solved.sbar_star, oracle.sbar, &settings);
    }
}

#[test]
fn oracle_refuses_large_instances() {
    let (phy, chan) = instance(4, 1, 0);
    assert!(matches!(
        grid_maxmin_coop(&chan, &phy, &OracleSettings::default()),
        Err(Error::InstanceTooLarge { .. })
    ));
    let (phy, chan) = instance(2, 3, 0);
    assert!(grid_maxmin_independent(&chan, &phy, &OracleSettings::default()).is_err());
}
