//! Brute-force reference values for small instances.
//!
//! The oracle never touches the barrier solver. It grids the energy phase
//! length `tau1` and the energy beamformer, and for every grid point solves
//! the remaining time and power split exactly:
//!
//! * Cooperation. With `z` fixed, the CH relay phase behaves like a single
//!   link of length `T3 = sum tau3` and SNR-energy `c = rho_0 z_0`: any set of
//!   relay demands `d_i` is achievable iff `T3 log2(1 + c / T3) >= sum d_i`
//!   (split time and energy in proportion to the demands). Member `j` then
//!   needs `tau2_j >= tR_j(S)` to reach the CH and relays `(S - V2_j)+`.
//!   Trading relay time against `tau2_j` equalizes SNR per unit time, which
//!   gives `tau2_j = clip(b_j T3 / c, tR_j, tV_j)` with `b_j = rho_j z_j`.
//!   `T3` follows from the time budget and `S` is found by bisection.
//! * Independent transmission. `S` is feasible iff the slots needed by every
//!   device fit in the time left after energy transfer.
//!
//! For `M = 2` the beamformer is `Q = (P / 2)(I + n . sigma)` with `n` on the
//! unit sphere (polar and azimuth angles). Every achievable `z` is an affine
//! image of the Bloch ball and with at most three devices some direction
//! lowers no `z_i`, so moving to the sphere never hurts: rank one suffices.
//!
//! The search is a coarse grid followed by a pattern search: at each finer
//! scale a local grid is recentered on the incumbent until it stops moving.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hermitian::{self, CMatrix};
use crate::network::{ChannelRealization, PhyParams};
use crate::rates::{persp, Allocation, RateCoefficients};

pub const MAX_ORACLE_DEVICES: usize = 3;
pub const MAX_ORACLE_ANTENNAS: usize = 2;

/// Relative width at which the bisection on `S` stops.
const S_TOLERANCE: f64 = 1e-12;

/// Cap on recentering moves per refinement scale.
const MAX_RECENTER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    /// Coarse grid step as a fraction of each axis.
    pub resolution: f64,
    /// Local refinement passes around the incumbent.
    pub refine_rounds: usize,
    /// Step reduction per refinement pass.
    pub refine_shrink: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            resolution: 0.05,
            refine_rounds: 3,
            refine_shrink: 10.0,
            execution: Execution::default(),
        }
    }
}

impl OracleSettings {
    pub fn with_resolution(resolution: f64) -> Self {
        OracleSettings {
            resolution,
            ..Default::default()
        }
    }

    /// Grid step after the last refinement pass.
    pub fn final_resolution(&self) -> f64 {
        self.resolution / self.refine_shrink.powi(self.refine_rounds as i32)
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "oracle resolution must lie in (0, 0.5], got {}",
                self.resolution
            )));
        }
        if !(self.refine_shrink > 1.0 && self.refine_shrink.is_finite()) {
            return Err(Error::InvalidParameter("refine_shrink must exceed 1".into()));
        }
        Ok(())
    }

    fn divisions(&self) -> usize {
        ((1.0 / self.resolution).round() as usize).max(2)
    }
}

/// Best grid point found by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub sbar: f64,
    pub tau1: f64,
    pub q: CMatrix,
    /// Bloch angles of `Q` (zero for a single antenna).
    pub polar: f64,
    pub azimuth: f64,
    pub evaluations: usize,
}

/// Smallest `tau` with `tau log2(1 + w / tau) >= s`, if it is at most `limit`.
fn min_time(s: f64, w: f64, limit: f64) -> Option<f64> {
    if s <= 0.0 {
        return Some(0.0);
    }
    if !(w > 0.0) {
        return None;
    }
    // with u = w / tau the condition reads ln(1 + u) = k u
    let k = s * LN_2 / w;
    if k >= 1.0 {
        return None;
    }
    let h = |u: f64| u.ln_1p() - k * u;
    let mut u = 2.0 / k;
    while h(u) >= 0.0 {
        u *= 2.0;
    }
    // Newton from the right converges monotonically on this concave branch
    for _ in 0..100 {
        let step = h(u) / (1.0 / (1.0 + u) - k);
        let next = u - step;
        if !(next < u) || step.abs() <= 1e-15 * u {
            break;
        }
        u = next;
    }
    let tau = w / u;
    (tau <= limit).then_some(tau)
}

/// Largest `s` in `[0, hi]` accepted by the monotone predicate `feasible`.
fn bisect_max(hi: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    if !(hi > 0.0) {
        return 0.0;
    }
    if feasible(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > S_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Time and power split of the cooperative protocol for fixed harvests.
struct CoopInner {
    budget: f64,
    /// `rho_0 z_0`.
    c: f64,
    /// `rho_bar_j z_j` per member.
    wr: Vec<f64>,
    /// `rho_j z_j` per member.
    wv: Vec<f64>,
}

struct CoopSplit {
    tau2: Vec<f64>,
    t3: f64,
    demands: Vec<f64>,
}

impl CoopInner {
    fn new(coeffs: &RateCoefficients, z: &[f64], budget: f64) -> Self {
        let n = z.len();
        CoopInner {
            budget,
            c: coeffs.rho[0] * z[0],
            wr: (1..n).map(|j| coeffs.rho_bar[j - 1] * z[j]).collect(),
            wv: (1..n).map(|j| coeffs.rho[j] * z[j]).collect(),
        }
    }

    fn split(&self, s: f64) -> Option<CoopSplit> {
        let t = self.budget;
        let mut lower = Vec::with_capacity(self.wr.len());
        let mut upper = Vec::with_capacity(self.wr.len());
        for (&wr, &wv) in self.wr.iter().zip(&self.wv) {
            let tr = min_time(s, wr, t)?;
            let tv = min_time(s, wv, t).unwrap_or(t).max(tr);
            lower.push(tr);
            upper.push(tv);
        }
        let tau2_at = |t3: f64| -> Vec<f64> {
            self.wv
                .iter()
                .zip(lower.iter().zip(&upper))
                .map(|(&b, (&lo, &hi))| (b * t3 / self.c).min(hi).max(lo))
                .collect()
        };
        let used = |t3: f64| t3 + tau2_at(t3).iter().sum::<f64>();
        if used(0.0) > t {
            return None;
        }
        let (mut lo, mut hi) = (0.0, t);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if used(mid) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * t {
                break;
            }
        }
        let t3 = lo;
        let tau2 = tau2_at(t3);
        let mut demands = Vec::with_capacity(tau2.len() + 1);
        demands.push(s);
        demands.extend(
            tau2.iter()
                .zip(&self.wv)
                .map(|(&tau, &wv)| (s - persp(tau, wv)).max(0.0)),
        );
        let total: f64 = demands.iter().sum();
        (persp(t3, self.c) >= total).then_some(CoopSplit { tau2, t3, demands })
    }

    fn max_min(&self) -> f64 {
        if !(self.c > 0.0) || !(self.budget > 0.0) {
            return 0.0;
        }
        let t = self.budget;
        let hi = self.wr.iter().map(|&w| persp(t, w)).fold(persp(t, self.c), f64::min);
        bisect_max(hi, |s| self.split(s).is_some())
    }
}

fn harvests(chan: &ChannelRealization, tau1: f64, q: &CMatrix) -> Vec<f64> {
    chan.hap_channels
        .iter()
        .map(|a| tau1 * hermitian::quad_form(a, q).max(0.0))
        .collect()
}

/// Exact max-min rate of the cooperative protocol for a fixed energy phase
/// length and covariance.
pub fn coop_value(chan: &ChannelRealization, phy: &PhyParams, tau1: f64, q: &CMatrix) -> f64 {
    let coeffs = RateCoefficients::new(chan, phy);
    let z = harvests(chan, tau1, q);
    CoopInner::new(&coeffs, &z, phy.usable_time() - tau1).max_min()
}

/// Physical allocation attaining [`coop_value`] (up to bisection accuracy).
pub fn coop_allocation(chan: &ChannelRealization, phy: &PhyParams, tau1: f64, q: &CMatrix) -> Allocation {
    let n = chan.n();
    let coeffs = RateCoefficients::new(chan, phy);
    let z = harvests(chan, tau1, q);
    let inner = CoopInner::new(&coeffs, &z, phy.usable_time() - tau1);
    let s = inner.max_min();
    let zero = || Allocation {
        tau1,
        tau2: vec![0.0; n - 1],
        tau3: vec![0.0; n],
        p3: vec![0.0; n],
        q: q.clone(),
    };
    let Some(split) = (s > 0.0).then(|| inner.split(s)).flatten() else {
        return zero();
    };
    let total: f64 = split.demands.iter().sum();
    let tau3: Vec<f64> = split.demands.iter().map(|d| split.t3 * d / total).collect();
    let power = phy.harvest_efficiency * z[0] / split.t3;
    let p3 = tau3.iter().map(|&t| if t > 0.0 { power } else { 0.0 }).collect();
    Allocation {
        tau1,
        tau2: split.tau2,
        tau3,
        p3,
        q: q.clone(),
    }
}

/// Exact max-min rate of independent transmission for a fixed energy phase
/// length and covariance.
pub fn independent_value(chan: &ChannelRealization, phy: &PhyParams, tau1: f64, q: &CMatrix) -> f64 {
    let coeffs = RateCoefficients::new(chan, phy);
    let budget = phy.usable_time() - tau1;
    if !(budget > 0.0) {
        return 0.0;
    }
    let w: Vec<f64> = harvests(chan, tau1, q)
        .iter()
        .zip(&coeffs.rho)
        .map(|(z, r)| z * r)
        .collect();
    let hi = w.iter().map(|&wi| persp(budget, wi)).fold(f64::INFINITY, f64::min);
    bisect_max(hi, |s| {
        let mut used = 0.0;
        for &wi in &w {
            match min_time(s, wi, budget) {
                Some(t) => used += t,
                None => return false,
            }
        }
        used <= budget
    })
}

/// `(P / 2)(I + purity * n . sigma)` for the unit vector `n` with the given
/// polar and azimuth angles.
pub fn bloch_covariance(power: f64, polar: f64, azimuth: f64, purity: f64) -> CMatrix {
    let (nx, ny, nz) = (polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos());
    let h = 0.5 * power;
    let r = purity;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(h * (1.0 + r * nz), 0.0),
            Complex64::new(h * r * nx, -h * r * ny),
            Complex64::new(h * r * nx, h * r * ny),
            Complex64::new(h * (1.0 - r * nz), 0.0),
        ],
    )
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
    periodic: bool,
}

impl Axis {
    fn coarse(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as usize;
        let last = if self.periodic { count.saturating_sub(1) } else { count };
        (0..=last).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn local(&self, center: f64, step: f64, half: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * half + 1);
        for k in -(half as i64)..=half as i64 {
            let v = center + k as f64 * step;
            if self.periodic {
                out.push(v.rem_euclid(self.hi - self.lo) + self.lo);
            } else if v >= self.lo - 1e-15 && v <= self.hi + 1e-15 {
                out.push(v.clamp(self.lo, self.hi));
            }
        }
        out
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, values| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Coarse grid followed by recentered local grids at shrinking scales;
/// returns the best point, its value and the number of evaluations.
fn grid_search<F>(axes: &[Axis], settings: &OracleSettings, f: F) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let exec = settings.execution;
    let mut points = cartesian(&axes.iter().map(Axis::coarse).collect::<Vec<_>>());
    let mut evaluations = points.len();
    let (i, mut best) = exec
        .argmax(points.len(), |i| f(&points[i]))
        .expect("grid is never empty");
    let mut incumbent = points.swap_remove(i);

    let half = (settings.refine_shrink / 2.0).ceil() as usize;
    let mut scale = 1.0;
    for _ in 0..settings.refine_rounds {
        scale /= settings.refine_shrink;
        // recenter at this scale until the incumbent stops moving, so the
        // search can follow a ridge out of the coarse cell
        for _ in 0..MAX_RECENTER {
            let local: Vec<Vec<f64>> = axes
                .iter()
                .zip(&incumbent)
                .map(|(a, &c)| a.local(c, a.step * scale, half))
                .collect();
            let points = cartesian(&local);
            evaluations += points.len();
            // keep the incumbent unless strictly improved, so refinement
            // never lowers the estimate
            match exec.argmax(points.len(), |i| f(&points[i])) {
                Some((i, v)) if v > best => {
                    best = v;
                    incumbent = points[i].clone();
                }
                _ => break,
            }
        }
    }
    (incumbent, best, evaluations)
}

fn check_size(chan: &ChannelRealization) -> Result<()> {
    let (n, m) = (chan.n(), chan.antennas());
    if n > MAX_ORACLE_DEVICES || m > MAX_ORACLE_ANTENNAS {
        return Err(Error::InstanceTooLarge { n, m });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 devices".into()));
    }
    Ok(())
}

fn search(
    chan: &ChannelRealization,
    phy: &PhyParams,
    settings: &OracleSettings,
    value: fn(&ChannelRealization, &PhyParams, f64, &CMatrix) -> f64,
) -> Result<OracleResult> {
    check_size(chan)?;
    phy.validate()?;
    settings.validate()?;
    let k = settings.divisions();
    let t = phy.usable_time();
    let p = phy.tx_power_watts;
    let tau1_axis = Axis {
        lo: t / k as f64,
        hi: t,
        step: t / k as f64,
        periodic: false,
    };
    if chan.antennas() == 1 {
        let q = hermitian::identity_scaled(1, p);
        let (x, sbar, evaluations) = grid_search(&[tau1_axis], settings, |x| value(chan, phy, x[0], &q));
        return Ok(OracleResult {
            sbar,
            tau1: x[0],
            q,
            polar: 0.0,
            azimuth: 0.0,
            evaluations,
        });
    }
    let half = (k / 2).max(1);
    let axes = [
        tau1_axis,
        Axis {
            lo: 0.0,
            hi: PI,
            step: PI / half as f64,
            periodic: false,
        },
        Axis {
            lo: 0.0,
            hi: 2.0 * PI,
            step: 2.0 * PI / k as f64,
            periodic: true,
        },
    ];
    let (x, sbar, evaluations) = grid_search(&axes, settings, |x| {
        value(chan, phy, x[0], &bloch_covariance(p, x[1], x[2], 1.0))
    });
    Ok(OracleResult {
        sbar,
        tau1: x[0],
        q: bloch_covariance(p, x[1], x[2], 1.0),
        polar: x[1],
        azimuth: x[2],
        evaluations,
    })
}

/// Grid estimate of the max-min throughput with cooperation and optimized
/// beamforming.
pub fn grid_maxmin_coop(chan: &ChannelRealization, phy: &PhyParams, settings: &OracleSettings) -> Result<OracleResult> {
    search(chan, phy, settings, coop_value)
}

/// Grid estimate of the max-min throughput of independent transmission with
/// optimized beamforming.
pub fn grid_maxmin_independent(
    chan: &ChannelRealization,
    phy: &PhyParams,
    settings: &OracleSettings,
) -> Result<OracleResult> {
    search(chan, phy, settings, independent_value)
}

/// Hessian of `x log2(1 + y / x)`:
/// `1 / (ln 2 (x + y)^2) [[-y^2 / x, y], [y, -x]]`.
pub fn closed_form_hessian(x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("hessian needs x, y > 0, got ({x}, {y})")));
    }
    let k = 1.0 / (LN_2 * (x + y) * (x + y));
    Ok([[-k * y * y / x, k * y], [k * y, -k * x]])
}

/// Central-difference Hessian of `x log2(1 + y / x)`.
pub fn fd_hessian(x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("hessian needs x, y > 0, got ({x}, {y})")));
    }
    let f = |a: f64, b: f64| a * (b / a).ln_1p() / LN_2;
    let (hx, hy) = (1e-3 * x, 1e-3 * y);
    let fxx = (f(x + hx, y) - 2.0 * f(x, y) + f(x - hx, y)) / (hx * hx);
    let fyy = (f(x, y + hy) - 2.0 * f(x, y) + f(x, y - hy)) / (hy * hy);
    let fxy = (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) / (4.0 * hx * hy);
    Ok([[fxx, fxy], [fxy, fyy]])
}

/// Quadratic form `d' H d` of the closed-form Hessian.
pub fn hessian_quadratic_form(x: f64, y: f64, d: [f64; 2]) -> Result<f64> {
    let h = closed_form_hessian(x, y)?;
    Ok(d[0] * d[0] * h[0][0] + 2.0 * d[0] * d[1] * h[0][1] + d[1] * d[1] * h[1][1])
}

/// True when the negated closed-form Hessian is positive semidefinite
/// (eigenvalues at least `-1e-9`) and the closed form agrees with finite
/// differences to `1e-4` relative.
pub fn hessian_psd_check(x: f64, y: f64) -> Result<bool> {
    let h = closed_form_hessian(x, y)?;
    let fd = fd_hessian(x, y)?;
    let (a, b, c) = (-h[0][0], -h[0][1], -h[1][1]);
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let min_eig = mean - radius;
    let norm = |m: &[[f64; 2]; 2]| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let diff = [
        [h[0][0] - fd[0][0], h[0][1] - fd[0][1]],
        [h[1][0] - fd[1][0], h[1][1] - fd[1][1]],
    ];
    Ok(min_eig >= -1e-9 && norm(&diff) <= 1e-4 * norm(&h))
}
