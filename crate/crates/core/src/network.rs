//! Network geometry, path loss and Rayleigh fading draws.
//!
//! The HAP sits at the origin. WDs are dropped uniformly over a disc of
//! radius `r` whose center lies `d` meters away on the positive x-axis.
//! After cluster-head selection the devices are relabeled so that the CH is
//! always index 0; the original placement index is kept for reporting.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::CVector;

/// Deterministic generator used everywhere: ChaCha with 8 rounds, seeded
/// from a 64-bit value.
pub type WpcnRng = ChaCha8Rng;

/// Distances below this are rejected as degenerate (1 cm).
pub const MIN_DISTANCE_M: f64 = 0.01;

const SPEED_OF_LIGHT: f64 = 3e8;

pub fn rng_from_seed(seed: u64) -> WpcnRng {
    WpcnRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Physical-layer parameters. The block length is normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyParams {
    /// HAP transmit power `P` in watts.
    pub tx_power_watts: f64,
    /// Energy harvesting efficiency `eta`.
    pub harvest_efficiency: f64,
    /// Receiver noise power `N0` in watts.
    pub noise_watts: f64,
    /// HAP antennas `M`.
    pub antennas: usize,
    pub antenna_gain: f64,
    pub pathloss_exponent: f64,
    pub carrier_hz: f64,
    /// Channel-estimation overhead `tau0` as a fraction of the block.
    pub ce_overhead: f64,
}

impl Default for PhyParams {
    fn default() -> Self {
        PhyParams {
            tx_power_watts: 3.0,
            harvest_efficiency: 0.51,
            noise_watts: 1e-10,
            antennas: 5,
            antenna_gain: 2.0,
            pathloss_exponent: 3.0,
            carrier_hz: 915e6,
            ce_overhead: 0.0,
        }
    }
}

impl PhyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.tx_power_watts > 0.0 && self.tx_power_watts.is_finite()) {
            return bad("tx_power_watts must be positive");
        }
        if !(self.harvest_efficiency > 0.0 && self.harvest_efficiency <= 1.0) {
            return bad("harvest_efficiency must lie in (0, 1]");
        }
        if !(self.noise_watts > 0.0 && self.noise_watts.is_finite()) {
            return bad("noise_watts must be positive");
        }
        if self.antennas == 0 {
            return bad("antennas must be at least 1");
        }
        if !(self.antenna_gain > 0.0 && self.antenna_gain.is_finite()) {
            return bad("antenna_gain must be positive");
        }
        if !(self.pathloss_exponent > 0.0 && self.pathloss_exponent.is_finite()) {
            return bad("pathloss_exponent must be positive");
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return bad("carrier_hz must be positive");
        }
        if !(0.0..1.0).contains(&self.ce_overhead) {
            return bad("ce_overhead must lie in [0, 1)");
        }
        Ok(())
    }

    /// Time left for energy and data after channel estimation.
    pub fn usable_time(&self) -> f64 {
        1.0 - self.ce_overhead
    }
}

/// A placed network with the cluster head at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub hap_position: Point,
    /// Device positions in internal order (CH first).
    pub wd_positions: Vec<Point>,
    /// `original_index[i]` is the placement index of internal device `i`.
    pub original_index: Vec<usize>,
    pub phy: PhyParams,
}

impl NetworkInstance {
    /// Builds an instance from positions in placement order and the
    /// placement index of the chosen cluster head.
    pub fn new(hap_position: Point, positions: &[Point], ch_index: usize, phy: PhyParams) -> Result<Self> {
        phy.validate()?;
        if positions.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a network needs at least 2 devices, got {}",
                positions.len()
            )));
        }
        if ch_index >= positions.len() {
            return Err(Error::InvalidParameter(format!(
                "cluster head index {ch_index} out of range for {} devices",
                positions.len()
            )));
        }
        if !hap_position.is_finite() || positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("positions must be finite".into()));
        }
        let mut original_index = Vec::with_capacity(positions.len());
        original_index.push(ch_index);
        original_index.extend((0..positions.len()).filter(|&i| i != ch_index));
        let wd_positions = original_index.iter().map(|&i| positions[i]).collect();
        Ok(NetworkInstance {
            hap_position,
            wd_positions,
            original_index,
            phy,
        })
    }

    pub fn n(&self) -> usize {
        self.wd_positions.len()
    }

    /// Placement index of the cluster head.
    pub fn ch_original_index(&self) -> usize {
        self.original_index[0]
    }

    pub fn hap_distance(&self, i: usize) -> f64 {
        self.wd_positions[i].distance(&self.hap_position)
    }

    /// Distance between cluster member `j >= 1` and the cluster head.
    pub fn intra_distance(&self, j: usize) -> f64 {
        self.wd_positions[j].distance(&self.wd_positions[0])
    }

    /// Average HAP channel gain per antenna for device `i`.
    pub fn hap_variance(&self, i: usize) -> Result<f64> {
        path_loss_gain(checked_distance(self.hap_distance(i), "HAP", i)?, &self.phy)
    }

    /// Average CM-to-CH channel gain for member `j >= 1`.
    pub fn intra_variance(&self, j: usize) -> Result<f64> {
        path_loss_gain(checked_distance(self.intra_distance(j), "cluster head", j)?, &self.phy)
    }
}

fn checked_distance(d: f64, what: &str, i: usize) -> Result<f64> {
    if d < MIN_DISTANCE_M {
        Err(Error::DegenerateGeometry(format!(
            "device {i} is {d:.3e} m from the {what} (minimum {MIN_DISTANCE_M} m)"
        )))
    } else {
        Ok(d)
    }
}

/// Drops `n` devices uniformly over the disc of radius `r` centered at
/// `(d, 0)`.
pub fn place_wds<R: Rng + ?Sized>(n: usize, d: f64, r: f64, rng: &mut R) -> Result<Vec<Point>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 devices, got {n}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {d}")));
    }
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let angle = 2.0 * PI * rng.random::<f64>();
            let rho = r * u.sqrt();
            Point::new(d + rho * angle.cos(), rho * angle.sin())
        })
        .collect())
}

/// Average channel gain `G_A (c / (4 pi d f_c))^alpha`.
pub fn path_loss_gain(distance: f64, phy: &PhyParams) -> Result<f64> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "distance must be positive, got {distance}"
        )));
    }
    let ratio = SPEED_OF_LIGHT / (4.0 * PI * distance * phy.carrier_hz);
    Ok(phy.antenna_gain * ratio.powf(phy.pathloss_exponent))
}

/// One fading realization for a placed network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `a_i`, one length-`M` vector per device (CH first).
    pub hap_channels: Vec<CVector>,
    /// `c_j` for members `j = 1..N-1`, stored at `j - 1`.
    pub intra_channels: Vec<Complex64>,
    /// `h_i = |a_i|^2`.
    pub hap_gains: Vec<f64>,
    /// `g_j = |c_j|^2`, stored at `j - 1`.
    pub intra_gains: Vec<f64>,
    pub rng_seed: Option<u64>,
}

impl ChannelRealization {
    /// Builds a realization from explicit coefficients, caching the gains.
    pub fn from_parts(hap_channels: Vec<CVector>, intra_channels: Vec<Complex64>) -> Result<Self> {
        let n = hap_channels.len();
        if n < 2 {
            return Err(Error::InvalidParameter("need at least 2 devices".into()));
        }
        let m = hap_channels[0].len();
        if m == 0 || hap_channels.iter().any(|a| a.len() != m) {
            return Err(Error::InvalidParameter(
                "HAP channel vectors must share a nonzero length".into(),
            ));
        }
        if intra_channels.len() != n - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} intra-cluster channels, got {}",
                n - 1,
                intra_channels.len()
            )));
        }
        let hap_gains = hap_channels.iter().map(|a| a.norm_squared()).collect();
        let intra_gains = intra_channels.iter().map(|c| c.norm_sqr()).collect();
        Ok(ChannelRealization {
            hap_channels,
            intra_channels,
            hap_gains,
            intra_gains,
            rng_seed: None,
        })
    }

    pub fn n(&self) -> usize {
        self.hap_channels.len()
    }

    pub fn antennas(&self) -> usize {
        self.hap_channels[0].len()
    }

    /// `g_j` for member `j >= 1`.
    pub fn intra_gain(&self, j: usize) -> f64 {
        self.intra_gains[j - 1]
    }

    pub fn is_all_zero(&self) -> bool {
        self.hap_gains.iter().all(|&h| h == 0.0) && self.intra_gains.iter().all(|&g| g == 0.0)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws `a_i ~ CN(0, sigma_i^2 I)` and `c_j ~ CN(0, delta_j^2)`.
///
/// Draw order: all antenna entries of `a_0`, `a_1`, ... then `c_1`, `c_2`, ...
pub fn draw_channels<R: Rng + ?Sized>(net: &NetworkInstance, rng: &mut R) -> Result<ChannelRealization> {
    net.phy.validate()?;
    let n = net.n();
    let m = net.phy.antennas;
    let hap_var = (0..n).map(|i| net.hap_variance(i)).collect::<Result<Vec<_>>>()?;
    let intra_var = (1..n).map(|j| net.intra_variance(j)).collect::<Result<Vec<_>>>()?;
    let hap_channels = hap_var
        .iter()
        .map(|&v| CVector::from_iterator(m, (0..m).map(|_| complex_gaussian(v, rng))))
        .collect();
    let intra_channels = intra_var.iter().map(|&v| complex_gaussian(v, rng)).collect();
    ChannelRealization::from_parts(hap_channels, intra_channels)
}

/// [`draw_channels`] with a fresh generator seeded from `seed`; the seed is
/// recorded on the realization.
pub fn draw_channels_seeded(net: &NetworkInstance, seed: u64) -> Result<ChannelRealization> {
    let mut rng = rng_from_seed(seed);
    let mut chan = draw_channels(net, &mut rng)?;
    chan.rng_seed = Some(seed);
    Ok(chan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChStrategy {
    ClosestToCenter,
    ClosestToHap,
    Random,
}

impl ChStrategy {
    pub const ALL: [ChStrategy; 3] = [
        ChStrategy::ClosestToCenter,
        ChStrategy::ClosestToHap,
        ChStrategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChStrategy::ClosestToCenter => "closest-to-center",
            ChStrategy::ClosestToHap => "closest-to-hap",
            ChStrategy::Random => "random",
        }
    }
}

impl std::fmt::Display for ChStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChStrategy::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown CH strategy `{s}`")))
    }
}

fn closest_to(positions: &[Point], target: Point) -> usize {
    // strict comparison keeps the lowest index on ties
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in positions.iter().enumerate() {
        let d = p.distance(&target);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Picks the cluster head among `positions` (placement order).
pub fn select_ch<R: Rng + ?Sized>(positions: &[Point], hap: Point, strategy: ChStrategy, rng: &mut R) -> Result<usize> {
    if positions.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 devices".into()));
    }
    Ok(match strategy {
        ChStrategy::ClosestToCenter => {
            let n = positions.len() as f64;
            let centroid = Point::new(
                positions.iter().map(|p| p.x).sum::<f64>() / n,
                positions.iter().map(|p| p.y).sum::<f64>() / n,
            );
            closest_to(positions, centroid)
        }
        ChStrategy::ClosestToHap => closest_to(positions, hap),
        ChStrategy::Random => rng.random_range(0..positions.len()),
    })
}
