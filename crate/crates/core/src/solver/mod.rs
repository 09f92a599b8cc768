//! Max-min throughput of the proposed scheme.
//!
//! The joint beamforming, time and power design is solved in its convex
//! form: `W = tau1 Q`, `z_i = tr(A_i W)` and `theta_i = tau3_i P3_i / eta`
//! turn every rate into a perspective-log term, the max-min objective is
//! written in epigraph form, and the resulting program is handed to the
//! barrier method in [`barrier`]. The physical design is recovered as
//! `Q = W / tau1` and `P3_i = eta theta_i / tau3_i`.

pub(crate) mod barrier;
mod cooperative;

use serde::{Deserialize, Serialize};

use crate::baselines::{IndependentVars, SchemeId};
use crate::error::{Error, Result};
use crate::hermitian::{self, CMatrix};
use crate::network::{ChannelRealization, PhyParams};
use crate::rates::{Allocation, ConvexVars, RateReport};

pub(crate) use cooperative::{solve_cooperative, Beamforming};

/// Time shares or slots below this are treated as zero on recovery.
pub const ZERO_SLOT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Target for the duality-gap bound `degree / t`, relative to the
    /// max-min rate of the starting point.
    pub objective_tolerance: f64,
    /// Cap on Newton steps over all centering stages.
    pub max_newton_iterations: usize,
    /// Factor applied to the barrier weight after each centering stage.
    pub barrier_growth: f64,
    /// First barrier weight when the program has no bound on the objective.
    pub initial_barrier: f64,
    /// Reporting threshold for primal residuals.
    pub feasibility_slack: f64,
    pub backtrack_shrink: f64,
    pub sufficient_decrease: f64,
    /// Centering stops once half the squared Newton decrement drops below this.
    pub centering_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            objective_tolerance: 1e-7,
            max_newton_iterations: 200,
            barrier_growth: 10.0,
            initial_barrier: 1.0,
            feasibility_slack: 1e-8,
            backtrack_shrink: 0.5,
            sufficient_decrease: 0.01,
            centering_tolerance: 1e-9,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("objective_tolerance", self.objective_tolerance),
            ("initial_barrier", self.initial_barrier),
            ("feasibility_slack", self.feasibility_slack),
            ("centering_tolerance", self.centering_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.max_newton_iterations == 0 {
            return Err(Error::InvalidParameter("max_newton_iterations must be positive".into()));
        }
        if !(self.barrier_growth > 1.0) {
            return Err(Error::InvalidParameter("barrier_growth must exceed 1".into()));
        }
        if !(self.backtrack_shrink > 0.0 && self.backtrack_shrink < 1.0) {
            return Err(Error::InvalidParameter("backtrack_shrink must lie in (0, 1)".into()));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 0.5) {
            return Err(Error::InvalidParameter(
                "sufficient_decrease must lie in (0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    InfeasibleInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct SolverDiagnostics {
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    pub barrier_weight: f64,
    /// Bound on `S* - S` in rate units at termination.
    pub duality_gap_bound: f64,
    /// Squared Newton decrement of the last centering step.
    pub newton_decrement: f64,
    /// Norm of the centering-objective gradient at the returned iterate.
    pub stationarity: f64,
    pub constraint_count: usize,
}

/// Solution in the variables the solver works with.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatingPoint {
    Cooperative(ConvexVars),
    Independent(IndependentVars),
}

impl OperatingPoint {
    pub fn w(&self) -> &CMatrix {
        match self {
            OperatingPoint::Cooperative(v) => &v.w,
            OperatingPoint::Independent(v) => &v.w,
        }
    }

    pub fn tau1(&self) -> f64 {
        match self {
            OperatingPoint::Cooperative(v) => v.tau1,
            OperatingPoint::Independent(v) => v.tau1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub scheme: SchemeId,
    pub status: SolveStatus,
    /// Max-min throughput achieved by the returned operating point.
    pub sbar_star: f64,
    pub rates: RateReport,
    pub point: OperatingPoint,
    pub diagnostics: SolverDiagnostics,
    pub residuals: KktResiduals,
    /// Physical parameters the report was solved under.
    pub phy: PhyParams,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.sum_rate
    }
}

/// Bound on `z_i`: all usable time spent charging with full power steered
/// at device `i`.
pub(crate) fn energy_cap(chan: &ChannelRealization, phy: &PhyParams, i: usize) -> f64 {
    phy.usable_time() * phy.tx_power_watts * chan.hap_gains[i]
}

/// Shared preconditions of every scheme solver.
pub(crate) fn check_inputs(chan: &ChannelRealization, phy: &PhyParams, settings: &SolverSettings) -> Result<()> {
    if phy.ce_overhead >= 1.0 {
        return Err(Error::InfeasibleInput(format!(
            "channel estimation takes the whole block (tau0 = {})",
            phy.ce_overhead
        )));
    }
    phy.validate()?;
    settings.validate()?;
    if chan.n() < 2 {
        return Err(Error::InvalidParameter("need at least 2 devices".into()));
    }
    if chan.antennas() != phy.antennas {
        return Err(Error::InvalidParameter(format!(
            "channel has {} antennas but the parameters say {}",
            chan.antennas(),
            phy.antennas
        )));
    }
    Ok(())
}

/// Solves the proposed scheme: cooperation with optimized energy beamforming.
pub fn solve_p3(chan: &ChannelRealization, phy: &PhyParams, settings: &SolverSettings) -> Result<SolveReport> {
    solve_cooperative(chan, phy, settings, Beamforming::Optimized)
}

/// Physical allocation from an optimal cooperative report.
pub fn recover_primal(report: &SolveReport) -> Result<Allocation> {
    if report.status != SolveStatus::Optimal {
        return Err(Error::InvalidParameter(format!(
            "primal recovery needs an optimal report, status is {:?}",
            report.status
        )));
    }
    let OperatingPoint::Cooperative(vars) = &report.point else {
        return Err(Error::InvalidParameter(
            "primal recovery applies to cooperative schemes".into(),
        ));
    };
    let m = vars.w.nrows();
    let (tau1, q) = if vars.tau1 > ZERO_SLOT {
        (vars.tau1, &vars.w * num_complex::Complex64::new(1.0 / vars.tau1, 0.0))
    } else if report.sbar_star > 0.0 {
        return Err(Error::DegenerateSolution(format!(
            "energy phase length {:e} with positive max-min rate {:e}",
            vars.tau1, report.sbar_star
        )));
    } else {
        (0.0, CMatrix::zeros(m, m))
    };
    let snap = |t: f64| if t > ZERO_SLOT { t } else { 0.0 };
    let tau3: Vec<f64> = vars.tau3.iter().map(|&t| snap(t)).collect();
    let eta = report.phy.harvest_efficiency;
    let p3 = tau3
        .iter()
        .zip(&vars.theta)
        .map(|(&t, &th)| if t > 0.0 { eta * th / t } else { 0.0 })
        .collect();
    Ok(Allocation {
        tau1,
        tau2: vars.tau2.iter().map(|&t| snap(t)).collect(),
        tau3,
        p3,
        q,
    })
}

/// Signed primal residuals (`lhs - rhs`, nonpositive when satisfied) and the
/// stationarity residual of the last Newton system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct KktResiduals {
    pub time_budget: f64,
    pub energy_causality: f64,
    pub power: f64,
    /// Negative smallest eigenvalue of `W`.
    pub psd: f64,
    /// Largest `S - rate` over all rate constraints.
    pub rate: f64,
    /// Largest `|z_i - tr(A_i W)|`.
    pub z_consistency: f64,
    /// Negative smallest time share or energy variable.
    pub nonnegativity: f64,
    pub stationarity: f64,
}

impl KktResiduals {
    /// Largest constraint violation (zero when all constraints hold).
    pub fn max_primal(&self) -> f64 {
        [
            self.time_budget,
            self.energy_causality,
            self.power,
            self.psd,
            self.rate,
            self.z_consistency,
            self.nonnegativity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Recomputes the primal residuals of a report against its channel.
pub fn kkt_residuals(report: &SolveReport, chan: &ChannelRealization, phy: &PhyParams) -> KktResiduals {
    let point_residuals = |tau1: f64, slots: Vec<f64>, z: &[f64], w: &CMatrix, sbar: f64, rates: &[f64]| {
        let z_consistency = chan
            .hap_channels
            .iter()
            .zip(z)
            .map(|(a, &zi)| (zi - hermitian::quad_form(a, w)).abs())
            .fold(0.0, f64::max);
        let min_slot = slots.iter().copied().chain([tau1]).fold(f64::INFINITY, f64::min);
        KktResiduals {
            time_budget: phy.ce_overhead + tau1 + slots.iter().sum::<f64>() - 1.0,
            energy_causality: 0.0,
            power: hermitian::trace_re(w) - tau1 * phy.tx_power_watts,
            psd: -hermitian::min_eigenvalue(w),
            rate: rates.iter().map(|r| sbar - r).fold(f64::NEG_INFINITY, f64::max),
            z_consistency,
            nonnegativity: -min_slot,
            stationarity: report.diagnostics.stationarity,
        }
    };
    match &report.point {
        OperatingPoint::Cooperative(v) => {
            let coeffs = crate::rates::RateCoefficients::new(chan, phy);
            let rates = crate::rates::evaluate_convex(v, &coeffs);
            let slots = v.tau2.iter().chain(&v.tau3).copied().collect();
            let mut r = point_residuals(v.tau1, slots, &v.z, &v.w, v.sbar, &rates.rates);
            r.energy_causality = v.theta.iter().sum::<f64>() - v.z[0];
            let min_theta = v.theta.iter().copied().fold(f64::INFINITY, f64::min);
            r.nonnegativity = r.nonnegativity.max(-min_theta);
            r
        }
        OperatingPoint::Independent(v) => {
            let rates = crate::baselines::independent_rates(v, chan, phy);
            point_residuals(v.tau1, v.tau2.clone(), &v.z, &v.w, v.sbar, &rates)
        }
    }
}
