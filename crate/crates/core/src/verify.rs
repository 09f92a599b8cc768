//! Self-checks shared by the command line tool and the acceptance suite:
//! solver against the grid oracle on tiny instances, and the perspective
//! Hessian against finite differences.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::exec::Execution;
use crate::harness::{trial_instance, SweepPoint};
use crate::network::{rng_from_seed, ChStrategy, PhyParams};
use crate::oracle::{closed_form_hessian, fd_hessian, grid_maxmin_coop, hessian_psd_check, OracleSettings};
use crate::solver::{solve_p3, SolverSettings};

/// Relative agreement required between solver and oracle.
pub const ORACLE_RELATIVE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub seed: u64,
    pub devices: usize,
    pub antennas: usize,
    pub solver: f64,
    pub oracle: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn error(&self) -> f64 {
        (self.solver - self.oracle).abs()
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.tolerance
    }
}

/// `(seed, N, M)` of the `k`-th oracle instance, cycling through
/// `N in {2, 3}` and `M in {1, 2}`.
pub fn oracle_instance(base_seed: u64, k: usize) -> (u64, usize, usize) {
    (base_seed.wrapping_add(k as u64), 2 + k % 2, 1 + (k / 2) % 2)
}

pub fn oracle_check(seed: u64, devices: usize, antennas: usize, settings: &OracleSettings) -> Result<OracleCheck> {
    let phy = PhyParams {
        antennas,
        ..PhyParams::default()
    };
    let point = SweepPoint {
        devices,
        distance_m: 6.0,
        radius_m: 3.0,
    };
    let (_, chan) = trial_instance(&point, &phy, seed, 0, ChStrategy::ClosestToCenter, 0)?;
    let oracle = grid_maxmin_coop(&chan, &phy, settings)?.sbar;
    let solver = solve_p3(&chan, &phy, &SolverSettings::default())?.sbar_star;
    Ok(OracleCheck {
        seed,
        devices,
        antennas,
        solver,
        oracle,
        tolerance: (ORACLE_RELATIVE_TOLERANCE * oracle).max(settings.final_resolution() * oracle),
    })
}

/// Runs `count` oracle checks; instances fan out according to `exec`.
pub fn oracle_suite(
    count: usize,
    base_seed: u64,
    settings: &OracleSettings,
    exec: Execution,
) -> Result<Vec<OracleCheck>> {
    let inner = OracleSettings {
        execution: if exec.is_parallel() {
            Execution::Sequential
        } else {
            settings.execution
        },
        ..*settings
    };
    let keys: Vec<usize> = (0..count).collect();
    exec.map(&keys, |&k| {
        let (seed, n, m) = oracle_instance(base_seed, k);
        oracle_check(seed, n, m, &inner)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianSweep {
    pub points: usize,
    /// Points where the check failed.
    pub failures: usize,
    /// Largest `|H - H_fd| / |H|` (Frobenius) seen.
    pub worst_fd_error: f64,
}

impl HessianSweep {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks `points` random `(x, y)` in `(0, 10]^2`.
pub fn hessian_sweep(points: usize, seed: u64) -> Result<HessianSweep> {
    let mut rng = rng_from_seed(seed);
    let mut sweep = HessianSweep {
        points,
        failures: 0,
        worst_fd_error: 0.0,
    };
    let norm = |m: &[[f64; 2]; 2]| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..points {
        let x = 10.0 * (1.0 - rng.random::<f64>());
        let y = 10.0 * (1.0 - rng.random::<f64>());
        if !hessian_psd_check(x, y)? {
            sweep.failures += 1;
        }
        let h = closed_form_hessian(x, y)?;
        let fd = fd_hessian(x, y)?;
        let diff = [
            [h[0][0] - fd[0][0], h[0][1] - fd[0][1]],
            [h[1][0] - fd[1][0], h[1][1] - fd[1][1]],
        ];
        sweep.worst_fd_error = sweep.worst_fd_error.max(norm(&diff) / norm(&h));
    }
    Ok(sweep)
}
