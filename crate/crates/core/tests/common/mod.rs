#![allow(dead_code)]

use wpcn_core::harness::{trial_instance, SweepPoint};
use wpcn_core::{ChStrategy, ChannelRealization, PhyParams};

/// Seeded instance with `n` devices around a cluster at `d = 6`, `r = 3`.
pub fn instance(n: usize, m: usize, seed: u64) -> (PhyParams, ChannelRealization) {
    instance_at(n, m, seed, 6.0, 3.0)
}

pub fn instance_at(n: usize, m: usize, seed: u64, d: f64, r: f64) -> (PhyParams, ChannelRealization) {
    let phy = PhyParams {
        antennas: m,
        ..PhyParams::default()
    };
    let point = SweepPoint {
        devices: n,
        distance_m: d,
        radius_m: r,
    };
    let (_, chan) = trial_instance(&point, &phy, seed, 0, ChStrategy::ClosestToCenter, 0).unwrap();
    (phy, chan)
}
