//! Benchmark schemes sharing the channel model of the proposed protocol.
//!
//! * `cooperation-no-eb`: the cooperative protocol with the isotropic
//!   covariance `Q = (P / M) I`.
//! * `independent-eb`: harvest-then-transmit without clustering. Every device
//!   sends its own message directly to the HAP in a dedicated slot, spending
//!   all energy harvested in the optimized downlink phase.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{self, CMatrix};
use crate::network::{ChannelRealization, PhyParams};
use crate::rates::{persp, RateCoefficients, RateReport};
use crate::solver::barrier::{
    BarrierProgram, LinearConstraint, PerspectiveTerm, PsdBlock, RateConstraint, Termination,
};
use crate::solver::{
    check_inputs, energy_cap, kkt_residuals, solve_cooperative, solve_p3, Beamforming, OperatingPoint, SolveReport,
    SolveStatus, SolverDiagnostics, SolverSettings, ZERO_SLOT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    ProposedEbCooperation,
    CooperationNoEb,
    IndependentEb,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [
        SchemeId::ProposedEbCooperation,
        SchemeId::CooperationNoEb,
        SchemeId::IndependentEb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::ProposedEbCooperation => "proposed-eb-cooperation",
            SchemeId::CooperationNoEb => "cooperation-no-eb",
            SchemeId::IndependentEb => "independent-eb",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown scheme `{s}` (expected one of proposed-eb-cooperation, cooperation-no-eb, independent-eb)"
            ))
        })
    }
}

/// Operating point of the independent scheme in convex variables.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentVars {
    pub tau1: f64,
    /// One uplink slot per device, CH first.
    pub tau2: Vec<f64>,
    pub z: Vec<f64>,
    pub w: CMatrix,
    pub sbar: f64,
}

/// Physical operating point of the independent scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentAllocation {
    pub tau1: f64,
    pub tau2: Vec<f64>,
    pub q: CMatrix,
}

/// Per-device rates `tau2_i log2(1 + rho_i z_i / tau2_i)`.
pub fn independent_rates(v: &IndependentVars, chan: &ChannelRealization, phy: &PhyParams) -> Vec<f64> {
    let coeffs = RateCoefficients::new(chan, phy);
    v.tau2
        .iter()
        .zip(&v.z)
        .zip(&coeffs.rho)
        .map(|((&t, &z), &rho)| persp(t, rho * z.max(0.0)))
        .collect()
}

/// Rates of a physical independent allocation, checking the time budget,
/// the power constraint and positive semidefiniteness of `Q`.
pub fn evaluate_independent(
    alloc: &IndependentAllocation,
    chan: &ChannelRealization,
    phy: &PhyParams,
) -> Result<RateReport> {
    let n = chan.n();
    let m = chan.antennas();
    if alloc.tau2.len() != n || alloc.q.nrows() != m || alloc.q.ncols() != m {
        return Err(Error::InvalidParameter(format!(
            "allocation sized for a different network (N = {n}, M = {m})"
        )));
    }
    let slack = crate::rates::FEASIBILITY_SLACK;
    let check = |constraint: &'static str, violation: f64| {
        if violation > slack || violation.is_nan() {
            Err(Error::InfeasibleAllocation { constraint, violation })
        } else {
            Ok(())
        }
    };
    let min_slot = alloc.tau2.iter().copied().fold(alloc.tau1, f64::min);
    check("nonnegativity", -min_slot)?;
    check(
        "time budget",
        phy.ce_overhead + alloc.tau1 + alloc.tau2.iter().sum::<f64>() - 1.0,
    )?;
    check("power", hermitian::trace_re(&alloc.q) - phy.tx_power_watts)?;
    check("psd", -hermitian::min_eigenvalue(&alloc.q))?;
    let w = &alloc.q * Complex64::new(alloc.tau1, 0.0);
    let vars = IndependentVars {
        tau1: alloc.tau1,
        tau2: alloc.tau2.clone(),
        z: chan.hap_channels.iter().map(|a| hermitian::quad_form(a, &w)).collect(),
        w,
        sbar: 0.0,
    };
    Ok(RateReport::from_rates(independent_rates(&vars, chan, phy)))
}

/// Physical allocation from an optimal independent report.
pub fn recover_independent(report: &SolveReport) -> Result<IndependentAllocation> {
    if report.status != SolveStatus::Optimal {
        return Err(Error::InvalidParameter(format!(
            "primal recovery needs an optimal report, status is {:?}",
            report.status
        )));
    }
    let OperatingPoint::Independent(v) = &report.point else {
        return Err(Error::InvalidParameter("not an independent-scheme report".into()));
    };
    let m = v.w.nrows();
    if v.tau1 <= ZERO_SLOT {
        if report.sbar_star > 0.0 {
            return Err(Error::DegenerateSolution(format!(
                "energy phase length {:e} with positive max-min rate {:e}",
                v.tau1, report.sbar_star
            )));
        }
        return Ok(IndependentAllocation {
            tau1: 0.0,
            tau2: v.tau2.iter().map(|&t| if t > ZERO_SLOT { t } else { 0.0 }).collect(),
            q: CMatrix::zeros(m, m),
        });
    }
    Ok(IndependentAllocation {
        tau1: v.tau1,
        tau2: v.tau2.iter().map(|&t| if t > ZERO_SLOT { t } else { 0.0 }).collect(),
        q: &v.w * Complex64::new(1.0 / v.tau1, 0.0),
    })
}

/// Cooperation with the isotropic covariance `(P / M) I`.
pub fn solve_no_eb(chan: &ChannelRealization, phy: &PhyParams, settings: &SolverSettings) -> Result<SolveReport> {
    solve_cooperative(chan, phy, settings, Beamforming::Isotropic)
}

/// Max-min throughput of the independent scheme with optimized beamforming.
///
/// Layout: `tau1` at 0, `tau2_i` at `1 + i`, `S` at `N + 1`, then the
/// Hermitian parameters of `W`.
pub fn solve_independent(chan: &ChannelRealization, phy: &PhyParams, settings: &SolverSettings) -> Result<SolveReport> {
    check_inputs(chan, phy, settings)?;
    let n = chan.n();
    let m = chan.antennas();
    let coeffs = RateCoefficients::new(chan, phy);
    let s_idx = n + 1;
    let w_off = n + 2;
    let dim = w_off + hermitian::param_count(m);

    let mut linear: Vec<LinearConstraint> = (0..=n)
        .map(|k| LinearConstraint {
            coeffs: vec![(k, 1.0)],
            constant: 0.0,
        })
        .collect();
    linear.push(LinearConstraint {
        coeffs: (0..=n).map(|k| (k, -1.0)).collect(),
        constant: phy.usable_time(),
    });
    let mut power = vec![(0, phy.tx_power_watts)];
    power.extend(
        hermitian::trace_coeffs(m)
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .map(|(p, c)| (w_off + p, -c)),
    );
    linear.push(LinearConstraint {
        coeffs: power,
        constant: 0.0,
    });
    let rates = (0..n)
        .map(|i| RateConstraint {
            terms: vec![PerspectiveTerm {
                time: 1 + i,
                energy: hermitian::quad_form_coeffs(&chan.hap_channels[i])
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|(p, c)| (w_off + p, c * coeffs.rho[i]))
                    .collect(),
            }],
        })
        .collect();
    let program = BarrierProgram {
        n: dim,
        objective: s_idx,
        linear,
        rates,
        psd: Some(PsdBlock::new(w_off, m)),
    };

    let slot = phy.usable_time() / (n + 2) as f64;
    let mut x = DVector::from_element(dim, 0.0);
    for k in 0..=n {
        x[k] = slot;
    }
    let w0 = hermitian::identity_scaled(m, 0.5 * slot * phy.tx_power_watts / m as f64);
    x.as_mut_slice()[w_off..].copy_from_slice(&hermitian::to_params(&w0));
    let start_rate = program.rate_sums(&x).into_iter().fold(f64::INFINITY, f64::min);

    let finish = |x: &DVector<f64>, status: SolveStatus, diagnostics: SolverDiagnostics| {
        let w = hermitian::from_params(&x.as_slice()[w_off..], m);
        let mut vars = IndependentVars {
            tau1: x[0],
            tau2: (1..=n).map(|k| x[k]).collect(),
            z: chan.hap_channels.iter().map(|a| hermitian::quad_form(a, &w)).collect(),
            w,
            sbar: 0.0,
        };
        let rates = RateReport::from_rates(independent_rates(&vars, chan, phy));
        vars.sbar = rates.min_rate;
        let mut report = SolveReport {
            scheme: SchemeId::IndependentEb,
            status,
            sbar_star: rates.min_rate,
            rates,
            point: OperatingPoint::Independent(vars),
            diagnostics,
            residuals: Default::default(),
            phy: *phy,
        };
        report.residuals = kkt_residuals(&report, chan, phy);
        report
    };

    if !(start_rate > 0.0 && start_rate.is_finite()) {
        let status = if chan.is_all_zero() {
            SolveStatus::InfeasibleInput
        } else {
            SolveStatus::Optimal
        };
        return Ok(finish(
            &x,
            status,
            SolverDiagnostics {
                constraint_count: program.degree() as usize,
                ..Default::default()
            },
        ));
    }
    x[s_idx] = 0.5 * start_rate;
    let bound = (0..n)
        .map(|i| persp(phy.usable_time(), coeffs.rho[i] * energy_cap(chan, phy, i)))
        .fold(f64::INFINITY, f64::min);
    let outcome = program.solve(x, 1.0 / start_rate, Some(bound), settings);
    let status = match outcome.termination {
        Termination::Converged => SolveStatus::Optimal,
        Termination::IterationLimit => SolveStatus::MaxIterations,
    };
    let diagnostics = SolverDiagnostics {
        newton_iterations: outcome.newton_iterations,
        outer_iterations: outcome.outer_iterations,
        barrier_weight: outcome.barrier_weight,
        duality_gap_bound: program.degree() / outcome.barrier_weight * start_rate,
        newton_decrement: outcome.newton_decrement,
        stationarity: outcome.gradient_norm,
        constraint_count: program.degree() as usize,
    };
    Ok(finish(&outcome.x, status, diagnostics))
}

/// Dispatches to the solver for `scheme`.
pub fn solve_scheme(
    scheme: SchemeId,
    chan: &ChannelRealization,
    phy: &PhyParams,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    match scheme {
        SchemeId::ProposedEbCooperation => solve_p3(chan, phy, settings),
        SchemeId::CooperationNoEb => solve_no_eb(chan, phy, settings),
        SchemeId::IndependentEb => solve_independent(chan, phy, settings),
    }
}
