//! Harvested energy and per-device throughput.
//!
//! Every rate has the perspective form `x log2(1 + w / x)` with `x` a time
//! share and `w` an SNR-scaled energy. Two parameterizations are provided:
//! the physical one in terms of `(tau, P3, Q)` and the convex one in terms of
//! `(tau, theta, z, W)` with `W = tau1 Q`, `z_i = tr(A_i W)` and
//! `theta_i = tau3_i P3_i / eta`. Rates are in bits per block per Hz.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{self, CMatrix, CVector};
use crate::network::{ChannelRealization, PhyParams};

/// Slack tolerated by [`evaluate`] on every constraint.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// `x log2(1 + w / x)`, extended by 0 at `x = 0`. Assumes nonnegative input.
#[inline]
pub(crate) fn persp(x: f64, w: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (w / x).ln_1p() / LN_2
    }
}

/// The perspective-log rate `x log2(1 + w / x)`.
pub fn perspective_rate(x: f64, w: f64) -> Result<f64> {
    if !(x >= 0.0 && w >= 0.0) || !x.is_finite() || !w.is_finite() {
        return Err(Error::Domain(format!(
            "perspective rate needs finite nonnegative arguments, got ({x}, {w})"
        )));
    }
    Ok(persp(x, w))
}

/// Partial derivatives `(d/dx, d/dw)` for `x > 0`.
#[inline]
pub fn perspective_gradient(x: f64, w: f64) -> [f64; 2] {
    let u = w / x;
    [(u.ln_1p() - u / (1.0 + u)) / LN_2, 1.0 / ((1.0 + u) * LN_2)]
}

/// Hessian in `(x, w)` for `x > 0`:
/// `1 / (ln2 (x + w)^2) [[-w^2 / x, w], [w, -x]]`.
#[inline]
pub fn perspective_hessian(x: f64, w: f64) -> [[f64; 2]; 2] {
    let s = 1.0 / (LN_2 * (x + w) * (x + w));
    [[-s * w * w / x, s * w], [s * w, -s * x]]
}

/// Energy harvested by a device during the first phase,
/// `eta tau1 tr(A_i Q) = eta tau1 a_i^H Q a_i`.
pub fn harvested_energy(tau1: f64, q: &CMatrix, a: &CVector, eta: f64) -> f64 {
    eta * tau1 * hermitian::quad_form(a, q).max(0.0)
}

/// Intra-cluster decoding rate at the CH, convex form `tau2 log2(1 + rho_bar z / tau2)`.
pub fn intra_rate(tau2: f64, z: f64, rho_bar: f64) -> f64 {
    persp(tau2, rho_bar * z)
}

/// Intra-cluster decoding rate from the member's transmit power
/// `P2 = E / tau2`: `tau2 log2(1 + g P2 / N0)`.
pub fn intra_rate_from_energy(tau2: f64, energy: f64, g: f64, noise: f64) -> f64 {
    if tau2 <= 0.0 {
        return 0.0;
    }
    let p2 = energy / tau2;
    tau2 * (g * p2 / noise).ln_1p() / LN_2
}

/// Rate the HAP extracts by overhearing a member, convex form.
pub fn overheard_rate(tau2: f64, z: f64, rho: f64) -> f64 {
    persp(tau2, rho * z)
}

/// Overheard rate with MRC gain `h_i` from the member's transmit power.
pub fn overheard_rate_from_energy(tau2: f64, energy: f64, h: f64, noise: f64) -> f64 {
    intra_rate_from_energy(tau2, energy, h, noise)
}

/// CH-to-HAP rates in convex form: returns `R_0` and `V3_i` for every slot
/// (index 0 is the CH's own message, so `out[0] == R_0`).
pub fn relay_rates(tau3: &[f64], theta: &[f64], rho0: f64) -> Vec<f64> {
    tau3.iter().zip(theta).map(|(&t, &th)| persp(t, rho0 * th)).collect()
}

/// CH-to-HAP rates from transmit powers: `tau3_i log2(1 + h0 P3_i / N0)`.
pub fn relay_rates_from_power(tau3: &[f64], p3: &[f64], h0: f64, noise: f64) -> Vec<f64> {
    tau3.iter()
        .zip(p3)
        .map(|(&t, &p)| {
            if t <= 0.0 {
                0.0
            } else {
                t * (h0 * p / noise).ln_1p() / LN_2
            }
        })
        .collect()
}

/// Joint-decoding rate of a member: `min(R2, V2 + V3)`.
pub fn cm_rate(r2: f64, v2: f64, v3: f64) -> f64 {
    r2.min(v2 + v3)
}

/// `rho_i = eta h_i / N0` and `rho_bar_j = eta g_j / N0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCoefficients {
    pub rho: Vec<f64>,
    /// Indexed by member `j - 1`.
    pub rho_bar: Vec<f64>,
}

impl RateCoefficients {
    pub fn new(chan: &ChannelRealization, phy: &PhyParams) -> Self {
        let k = phy.harvest_efficiency / phy.noise_watts;
        RateCoefficients {
            rho: chan.hap_gains.iter().map(|h| k * h).collect(),
            rho_bar: chan.intra_gains.iter().map(|g| k * g).collect(),
        }
    }
}

/// Physical operating point of the proposed protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub tau1: f64,
    /// Member-to-CH slots, indexed by member `j - 1`.
    pub tau2: Vec<f64>,
    /// CH-to-HAP slots; index 0 carries the CH's own message.
    pub tau3: Vec<f64>,
    /// CH transmit power per message, watts.
    pub p3: Vec<f64>,
    /// Energy beamforming covariance.
    pub q: CMatrix,
}

/// Operating point in the convex parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexVars {
    pub tau1: f64,
    pub tau2: Vec<f64>,
    pub tau3: Vec<f64>,
    /// `z_i = tr(A_i W)`.
    pub z: Vec<f64>,
    /// `theta_i = tau3_i P3_i / eta`.
    pub theta: Vec<f64>,
    /// `W = tau1 Q`.
    pub w: CMatrix,
    pub sbar: f64,
}

impl ConvexVars {
    /// Maps a physical allocation into the convex variables.
    pub fn from_allocation(alloc: &Allocation, chan: &ChannelRealization, phy: &PhyParams) -> Self {
        let w = &alloc.q * num_complex::Complex64::new(alloc.tau1, 0.0);
        let z = chan.hap_channels.iter().map(|a| hermitian::quad_form(a, &w)).collect();
        let theta = alloc
            .tau3
            .iter()
            .zip(&alloc.p3)
            .map(|(t, p)| t * p / phy.harvest_efficiency)
            .collect();
        ConvexVars {
            tau1: alloc.tau1,
            tau2: alloc.tau2.clone(),
            tau3: alloc.tau3.clone(),
            z,
            theta,
            w,
            sbar: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    /// Per-device throughput, CH first.
    pub rates: Vec<f64>,
    pub min_rate: f64,
    pub sum_rate: f64,
    /// `R2_j`, `V2_j`, `V3_j` per member (index `j - 1`); empty for schemes
    /// without cooperation.
    pub r2: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
}

impl RateReport {
    pub fn from_rates(rates: Vec<f64>) -> Self {
        let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let sum_rate = rates.iter().sum();
        RateReport {
            rates,
            min_rate,
            sum_rate,
            r2: Vec::new(),
            v2: Vec::new(),
            v3: Vec::new(),
        }
    }

    fn cooperative(r0: f64, r2: Vec<f64>, v2: Vec<f64>, v3: Vec<f64>) -> Self {
        let mut rates = Vec::with_capacity(r2.len() + 1);
        rates.push(r0);
        rates.extend((0..r2.len()).map(|j| cm_rate(r2[j], v2[j], v3[j])));
        RateReport {
            r2,
            v2,
            v3,
            ..RateReport::from_rates(rates)
        }
    }
}

fn check(constraint: &'static str, violation: f64) -> Result<()> {
    if violation > FEASIBILITY_SLACK || violation.is_nan() {
        Err(Error::InfeasibleAllocation { constraint, violation })
    } else {
        Ok(())
    }
}

fn check_dims(alloc: &Allocation, chan: &ChannelRealization) -> Result<()> {
    let n = chan.n();
    let m = chan.antennas();
    if alloc.tau2.len() != n - 1 || alloc.tau3.len() != n || alloc.p3.len() != n {
        return Err(Error::InvalidParameter(format!(
            "allocation sized for a different network (N = {n})"
        )));
    }
    if alloc.q.nrows() != m || alloc.q.ncols() != m {
        return Err(Error::InvalidParameter(format!("beamforming matrix must be {m} x {m}")));
    }
    Ok(())
}

/// Checks the time budget, the power constraint on `Q` and energy
/// causality at the CH, each with [`FEASIBILITY_SLACK`].
pub fn check_allocation(alloc: &Allocation, chan: &ChannelRealization, phy: &PhyParams) -> Result<()> {
    check_dims(alloc, chan)?;
    let most_negative = std::iter::once(alloc.tau1)
        .chain(alloc.tau2.iter().copied())
        .chain(alloc.tau3.iter().copied())
        .chain(alloc.p3.iter().copied())
        .fold(f64::INFINITY, f64::min);
    check("nonnegativity", -most_negative)?;
    let used = phy.ce_overhead + alloc.tau1 + alloc.tau2.iter().sum::<f64>() + alloc.tau3.iter().sum::<f64>();
    check("time budget", used - 1.0)?;
    let p = phy.tx_power_watts;
    check("hermitian Q", hermitian::hermitian_defect(&alloc.q) / p.max(1.0))?;
    check("trace(Q) <= P", hermitian::trace_re(&alloc.q) - p)?;
    check(
        "Q positive semidefinite",
        -hermitian::min_eigenvalue(&alloc.q) / p.max(1.0),
    )?;
    let spent: f64 = alloc.tau3.iter().zip(&alloc.p3).map(|(t, p)| t * p).sum();
    let harvested = harvested_energy(alloc.tau1, &alloc.q, &chan.hap_channels[0], phy.harvest_efficiency);
    // energies are tiny in joules, so the slack is taken relative to the budget
    let scale = harvested.max(spent);
    let violation = if scale > 0.0 { (spent - harvested) / scale } else { 0.0 };
    check("energy causality", violation)?;
    Ok(())
}

/// Per-device throughput of a physical allocation.
pub fn evaluate(alloc: &Allocation, chan: &ChannelRealization, phy: &PhyParams) -> Result<RateReport> {
    check_allocation(alloc, chan, phy)?;
    let n = chan.n();
    let n0 = phy.noise_watts;
    let eta = phy.harvest_efficiency;
    let tau2 = |j: usize| alloc.tau2[j - 1].max(0.0);
    let mut r2 = Vec::with_capacity(n - 1);
    let mut v2 = Vec::with_capacity(n - 1);
    for j in 1..n {
        let energy = harvested_energy(alloc.tau1.max(0.0), &alloc.q, &chan.hap_channels[j], eta);
        r2.push(intra_rate_from_energy(tau2(j), energy, chan.intra_gain(j), n0));
        v2.push(overheard_rate_from_energy(tau2(j), energy, chan.hap_gains[j], n0));
    }
    let tau3: Vec<f64> = alloc.tau3.iter().map(|t| t.max(0.0)).collect();
    let p3: Vec<f64> = alloc.p3.iter().map(|p| p.max(0.0)).collect();
    let relay = relay_rates_from_power(&tau3, &p3, chan.hap_gains[0], n0);
    Ok(RateReport::cooperative(relay[0], r2, v2, relay[1..].to_vec()))
}

/// Per-device throughput in the convex parameterization. Uses the stored
/// `z`; no feasibility check.
pub fn evaluate_convex(vars: &ConvexVars, coeffs: &RateCoefficients) -> RateReport {
    let n = vars.tau3.len();
    let r2 = (1..n)
        .map(|j| intra_rate(vars.tau2[j - 1], vars.z[j], coeffs.rho_bar[j - 1]))
        .collect();
    let v2 = (1..n)
        .map(|j| overheard_rate(vars.tau2[j - 1], vars.z[j], coeffs.rho[j]))
        .collect();
    let relay = relay_rates(&vars.tau3, &vars.theta, coeffs.rho[0]);
    RateReport::cooperative(relay[0], r2, v2, relay[1..].to_vec())
}
