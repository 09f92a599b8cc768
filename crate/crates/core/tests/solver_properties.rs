mod common;

use common::instance;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpcn_core::hermitian::CMatrix;
use wpcn_core::{
    evaluate, kkt_residuals, recover_primal, solve_no_eb, solve_p3, Allocation, SolveStatus, SolverSettings,
};

fn settings() -> SolverSettings {
    SolverSettings::default()
}

/// Random feasible allocation: the time budget is split at random and the CH
/// spends a random fraction of what it harvested.
fn random_allocation(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    chan: &wpcn_core::ChannelRealization,
    phy: &wpcn_core::PhyParams,
) -> Allocation {
    let weights: Vec<f64> = (0..2 * n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum::<f64>() / rng.random_range(0.7..1.0);
    let tau1 = weights[0] / total;
    let tau2: Vec<f64> = weights[1..n].iter().map(|w| w / total).collect();
    let tau3: Vec<f64> = weights[n..].iter().map(|w| w / total).collect();

    let b = CMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let g = &b * b.adjoint();
    let tr: f64 = g.diagonal().iter().map(|v| v.re).sum();
    let q = g * Complex64::new(phy.tx_power_watts * rng.random_range(0.5..1.0) / tr, 0.0);

    let a0 = &chan.hap_channels[0];
    let harvested = phy.harvest_efficiency * tau1 * (a0.adjoint() * &q * a0)[(0, 0)].re;
    let shares: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let share_total: f64 = shares.iter().sum::<f64>() / rng.random_range(0.5..0.99);
    let p3 = shares
        .iter()
        .zip(&tau3)
        .map(|(s, t)| harvested * s / share_total / t)
        .collect();
    Allocation {
        tau1,
        tau2,
        tau3,
        p3,
        q,
    }
}

#[test]
fn no_feasible_allocation_beats_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..4 {
        let (phy, chan) = instance(4, 3, seed);
        let report = solve_p3(&chan, &phy, &settings()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        for _ in 0..200 {
            let alloc = random_allocation(&mut rng, 4, 3, &chan, &phy);
            let rates = evaluate(&alloc, &chan, &phy).unwrap();
            assert!(
                rates.min_rate <= report.sbar_star * (1.0 + 1e-9),
                "{} > {}",
                rates.min_rate,
                report.sbar_star
            );
        }
    }
}

#[test]
fn single_antenna_matches_no_beamforming() {
    for seed in 0..5 {
        let (phy, chan) = instance(5, 1, seed);
        let a = solve_p3(&chan, &phy, &settings()).unwrap();
        let b = solve_no_eb(&chan, &phy, &settings()).unwrap();
        assert!((a.sbar_star - b.sbar_star).abs() <= 1e-6 * a.sbar_star.max(1e-300));
    }
}

#[test]
fn beamforming_dominates_isotropic() {
    for seed in 0..5 {
        let (phy, chan) = instance(8, 4, seed);
        let a = solve_p3(&chan, &phy, &settings()).unwrap();
        let b = solve_no_eb(&chan, &phy, &settings()).unwrap();
        assert!(a.sbar_star >= b.sbar_star * (1.0 - 1e-8));
    }
}

#[test]
fn recovered_allocation_reproduces_rates() {
    for seed in 0..5 {
        let (phy, chan) = instance(10, 4, seed);
        let report = solve_p3(&chan, &phy, &settings()).unwrap();
        let alloc = recover_primal(&report).unwrap();
        let rates = evaluate(&alloc, &chan, &phy).unwrap();
        for (a, b) in rates.rates.iter().zip(&report.rates.rates) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-3), "{a} vs {b}");
        }
        assert!((rates.min_rate - report.sbar_star).abs() <= 1e-6 * report.sbar_star);
    }
}

#[test]
fn residuals_are_small_and_track_perturbations() {
    let (phy, chan) = instance(6, 3, 2);
    let mut report = solve_p3(&chan, &phy, &settings()).unwrap();
    let r = kkt_residuals(&report, &chan, &phy);
    assert!(r.max_primal() <= 1e-9, "{r:?}");
    let before = r.time_budget;
    if let wpcn_core::OperatingPoint::Cooperative(v) = &mut report.point {
        v.tau1 += 0.1;
    }
    let r = kkt_residuals(&report, &chan, &phy);
    assert!((r.time_budget - before - 0.1).abs() < 1e-12);
    assert!(r.time_budget > 0.09);
}

#[test]
fn solving_twice_is_bitwise_identical() {
    let (phy, chan) = instance(7, 3, 5);
    let a = solve_p3(&chan, &phy, &settings()).unwrap();
    let b = solve_p3(&chan, &phy, &settings()).unwrap();
    assert_eq!(a.sbar_star.to_bits(), b.sbar_star.to_bits());
    assert_eq!(a.rates, b.rates);
}

#[test]
fn more_power_never_hurts() {
    for seed in 0..3 {
        let (mut phy, chan) = instance(6, 3, seed);
        let mut last = 0.0;
        for p in [1.0, 2.0, 3.0] {
            phy.tx_power_watts = p;
            let s = solve_p3(&chan, &phy, &settings()).unwrap().sbar_star;
            assert!(s >= last * (1.0 - 1e-8));
            last = s;
        }
    }
}

#[test]
fn lower_noise_never_hurts() {
    let (mut phy, chan) = instance(5, 2, 9);
    let base = solve_p3(&chan, &phy, &settings()).unwrap().sbar_star;
    phy.noise_watts /= 2.0;
    let better = solve_p3(&chan, &phy, &settings()).unwrap().sbar_star;
    assert!(better > base);
}

#[test]
fn zero_channels_report_infeasible_input() {
    let (phy, mut chan) = instance(3, 2, 0);
    for a in &mut chan.hap_channels {
        a.fill(Complex64::new(0.0, 0.0));
    }
    chan.intra_channels.fill(Complex64::new(0.0, 0.0));
    let chan = wpcn_core::ChannelRealization::from_parts(chan.hap_channels, chan.intra_channels).unwrap();
    let report = solve_p3(&chan, &phy, &settings()).unwrap();
    assert_eq!(report.status, SolveStatus::InfeasibleInput);
    assert_eq!(report.sbar_star, 0.0);
}

#[test]
fn whole_block_overhead_is_rejected() {
    let (mut phy, chan) = instance(3, 2, 0);
    phy.ce_overhead = 1.0;
    assert!(matches!(
        solve_p3(&chan, &phy, &settings()),
        Err(wpcn_core::Error::InfeasibleInput(_))
    ));
}

#[test]
fn overhead_shrinks_the_optimum() {
    let (mut phy, chan) = instance(5, 2, 4);
    let full = solve_p3(&chan, &phy, &settings()).unwrap().sbar_star;
    phy.ce_overhead = 0.2;
    let less = solve_p3(&chan, &phy, &settings()).unwrap().sbar_star;
    assert!(less < full);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimum_is_feasible_and_balanced(seed in 0u64..1000, n in 2usize..8, m in 1usize..5) {
        let (phy, chan) = instance(n, m, seed);
        let report = solve_p3(&chan, &phy, &settings()).unwrap();
        prop_assert_eq!(report.status, SolveStatus::Optimal);
        prop_assert!(report.residuals.max_primal() <= 1e-9);
        let alloc = recover_primal(&report).unwrap();
        prop_assert!(evaluate(&alloc, &chan, &phy).is_ok());
        let min = report.rates.rates.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min, report.sbar_star);
    }
}
