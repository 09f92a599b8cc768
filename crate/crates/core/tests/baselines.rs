mod common;

use common::instance;
use nalgebra::DVector;
use num_complex::Complex64;
use wpcn_core::baselines::{evaluate_independent, recover_independent};
use wpcn_core::hermitian::CVector;
use wpcn_core::{
    solve_independent, solve_no_eb, solve_p3, solve_scheme, ChannelRealization, PhyParams, SchemeId, SolveStatus,
    SolverSettings,
};

fn symmetric(n: usize, m: usize) -> ChannelRealization {
    // identical gains on orthogonal HAP channels
    let hap = (0..n)
        .map(|i| {
            let mut a = CVector::zeros(m);
            a[i % m] = Complex64::new(1e-3, 0.0);
            a
        })
        .collect();
    ChannelRealization::from_parts(hap, vec![Complex64::new(0.0, 5e-3); n - 1]).unwrap()
}

#[test]
fn symmetric_instance_gets_equal_slots() {
    let phy = PhyParams {
        antennas: 3,
        ..PhyParams::default()
    };
    let chan = symmetric(3, 3);
    let report = solve_independent(&chan, &phy, &SolverSettings::default()).unwrap();
    let alloc = recover_independent(&report).unwrap();
    for t in &alloc.tau2 {
        assert!((t - alloc.tau2[0]).abs() < 1e-6, "{:?}", alloc.tau2);
    }
    let rates = evaluate_independent(&alloc, &chan, &phy).unwrap();
    assert!((rates.min_rate - report.sbar_star).abs() <= 1e-8 * report.sbar_star);
}

#[test]
fn dead_device_zeroes_the_independent_optimum() {
    let (phy, chan) = instance(4, 2, 3);
    let mut hap = chan.hap_channels.clone();
    hap[2] = DVector::from_element(2, Complex64::new(0.0, 0.0));
    let chan = ChannelRealization::from_parts(hap, chan.intra_channels.clone()).unwrap();
    let report = solve_independent(&chan, &phy, &SolverSettings::default()).unwrap();
    assert_eq!(report.sbar_star, 0.0);
}

#[test]
fn scheme_dispatch_matches_direct_calls() {
    let (phy, chan) = instance(5, 2, 8);
    let s = SolverSettings::default();
    let direct = [
        solve_p3(&chan, &phy, &s).unwrap().sbar_star,
        solve_no_eb(&chan, &phy, &s).unwrap().sbar_star,
        solve_independent(&chan, &phy, &s).unwrap().sbar_star,
    ];
    for (scheme, expected) in SchemeId::ALL.iter().zip(direct) {
        let r = solve_scheme(*scheme, &chan, &phy, &s).unwrap();
        assert_eq!(r.scheme, *scheme);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.sbar_star.to_bits(), expected.to_bits());
    }
}

#[test]
fn scheme_names_round_trip() {
    for scheme in SchemeId::ALL {
        assert_eq!(scheme.name().parse::<SchemeId>().unwrap(), scheme);
    }
    assert!("bogus".parse::<SchemeId>().is_err());
}

#[test]
fn cooperation_helps_far_clusters() {
    // far from the HAP the relay gain dominates
    let mut wins = 0;
    for seed in 0..10 {
        let (phy, chan) = common::instance_at(10, 4, seed, 8.0, 3.0);
        let s = SolverSettings::default();
        let coop = solve_p3(&chan, &phy, &s).unwrap().sbar_star;
        let ind = solve_independent(&chan, &phy, &s).unwrap().sbar_star;
        wins += usize::from(coop > ind);
    }
    assert!(wins >= 8, "{wins}");
}
