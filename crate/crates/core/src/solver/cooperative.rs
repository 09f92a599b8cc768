//! Barrier program for cooperation with or without energy beamforming.
//!
//! Variable layout (`N` devices, `M` antennas):
//!
//! | index            | variable                                  |
//! |------------------|-------------------------------------------|
//! | `0`              | `tau1`                                    |
//! | `j`, `1..N`      | `tau2_j`                                  |
//! | `N + i`          | `tau3_i`                                  |
//! | `2N + i`         | `phi_i = rho_0 theta_i` (SNR-energy units) |
//! | `3N`             | epigraph variable `S`                     |
//! | `3N + 1 ..`      | `M^2` Hermitian parameters of `W` (EB only) |
//!
//! Without beamforming `W = tau1 (P / M) I`, so every `z_i` is linear in
//! `tau1` and the matrix block disappears.

use nalgebra::DVector;

use super::barrier::{
    BarrierProgram, LinearConstraint, PerspectiveTerm, PsdBlock, RateConstraint, Sparse, Termination,
};
use super::{
    check_inputs, energy_cap, kkt_residuals, OperatingPoint, SolveReport, SolveStatus, SolverDiagnostics,
    SolverSettings,
};
use crate::baselines::SchemeId;
use crate::error::Result;
use crate::hermitian::{self, CMatrix};
use crate::network::{ChannelRealization, PhyParams};
use crate::rates::{evaluate_convex, persp, ConvexVars, RateCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Beamforming {
    Optimized,
    Isotropic,
}

struct Layout {
    n: usize,
    m: usize,
    beamforming: Beamforming,
}

impl Layout {
    fn tau1(&self) -> usize {
        0
    }
    fn tau2(&self, j: usize) -> usize {
        j
    }
    fn tau3(&self, i: usize) -> usize {
        self.n + i
    }
    fn phi(&self, i: usize) -> usize {
        2 * self.n + i
    }
    fn s(&self) -> usize {
        3 * self.n
    }
    fn w_offset(&self) -> usize {
        3 * self.n + 1
    }
    fn len(&self) -> usize {
        match self.beamforming {
            Beamforming::Optimized => self.w_offset() + hermitian::param_count(self.m),
            Beamforming::Isotropic => self.w_offset(),
        }
    }
}

/// Linear expression for `z_i`.
fn z_expr(layout: &Layout, chan: &ChannelRealization, phy: &PhyParams, i: usize) -> Sparse {
    match layout.beamforming {
        Beamforming::Optimized => hermitian::quad_form_coeffs(&chan.hap_channels[i])
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0.0)
            .map(|(p, c)| (layout.w_offset() + p, c))
            .collect(),
        Beamforming::Isotropic => vec![(layout.tau1(), phy.tx_power_watts * chan.hap_gains[i] / layout.m as f64)],
    }
}

fn scaled(expr: &Sparse, k: f64) -> Sparse {
    expr.iter().map(|&(i, c)| (i, c * k)).collect()
}

fn build(layout: &Layout, chan: &ChannelRealization, phy: &PhyParams, coeffs: &RateCoefficients) -> BarrierProgram {
    let n = layout.n;
    let mut linear = Vec::new();
    let positive = |idx: usize| LinearConstraint {
        coeffs: vec![(idx, 1.0)],
        constant: 0.0,
    };
    linear.push(positive(layout.tau1()));
    linear.extend((1..n).map(|j| positive(layout.tau2(j))));
    linear.extend((0..n).map(|i| positive(layout.tau3(i))));
    linear.extend((0..n).map(|i| positive(layout.phi(i))));

    let mut time: Sparse = vec![(layout.tau1(), -1.0)];
    time.extend((1..n).map(|j| (layout.tau2(j), -1.0)));
    time.extend((0..n).map(|i| (layout.tau3(i), -1.0)));
    linear.push(LinearConstraint {
        coeffs: time,
        constant: phy.usable_time(),
    });

    // sum theta <= z_0, scaled by rho_0
    let mut energy = scaled(&z_expr(layout, chan, phy, 0), coeffs.rho[0]);
    energy.extend((0..n).map(|i| (layout.phi(i), -1.0)));
    linear.push(LinearConstraint {
        coeffs: energy,
        constant: 0.0,
    });

    let mut psd = None;
    if layout.beamforming == Beamforming::Optimized {
        let mut power: Sparse = vec![(layout.tau1(), phy.tx_power_watts)];
        power.extend(
            hermitian::trace_coeffs(layout.m)
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c != 0.0)
                .map(|(p, c)| (layout.w_offset() + p, -c)),
        );
        linear.push(LinearConstraint {
            coeffs: power,
            constant: 0.0,
        });
        psd = Some(PsdBlock::new(layout.w_offset(), layout.m));
    }

    let mut rates = vec![RateConstraint {
        terms: vec![PerspectiveTerm {
            time: layout.tau3(0),
            energy: vec![(layout.phi(0), 1.0)],
        }],
    }];
    for j in 1..n {
        let z = z_expr(layout, chan, phy, j);
        rates.push(RateConstraint {
            terms: vec![
                PerspectiveTerm {
                    time: layout.tau2(j),
                    energy: scaled(&z, coeffs.rho[j]),
                },
                PerspectiveTerm {
                    time: layout.tau3(j),
                    energy: vec![(layout.phi(j), 1.0)],
                },
            ],
        });
        rates.push(RateConstraint {
            terms: vec![PerspectiveTerm {
                time: layout.tau2(j),
                energy: scaled(&z, coeffs.rho_bar[j - 1]),
            }],
        });
    }

    BarrierProgram {
        n: layout.len(),
        objective: layout.s(),
        linear,
        rates,
        psd,
    }
}

fn w_matrix(layout: &Layout, x: &DVector<f64>, phy: &PhyParams) -> CMatrix {
    match layout.beamforming {
        Beamforming::Optimized => {
            let start = layout.w_offset();
            hermitian::from_params(&x.as_slice()[start..start + hermitian::param_count(layout.m)], layout.m)
        }
        Beamforming::Isotropic => {
            hermitian::identity_scaled(layout.m, x[layout.tau1()] * phy.tx_power_watts / layout.m as f64)
        }
    }
}

/// Convex variables encoded by `x`; `theta` uses `theta_fallback` when the
/// CH channel is zero and `phi` carries no information.
fn extract(layout: &Layout, x: &DVector<f64>, chan: &ChannelRealization, phy: &PhyParams, rho0: f64) -> ConvexVars {
    let n = layout.n;
    let w = w_matrix(layout, x, phy);
    let z: Vec<f64> = chan.hap_channels.iter().map(|a| hermitian::quad_form(a, &w)).collect();
    let theta = (0..n)
        .map(|i| {
            if rho0 > 0.0 {
                x[layout.phi(i)] / rho0
            } else {
                z[0] / (2 * n) as f64
            }
        })
        .collect();
    ConvexVars {
        tau1: x[layout.tau1()],
        tau2: (1..n).map(|j| x[layout.tau2(j)]).collect(),
        tau3: (0..n).map(|i| x[layout.tau3(i)]).collect(),
        z,
        theta,
        w,
        sbar: x[layout.s()],
    }
}

fn starting_point(layout: &Layout, chan: &ChannelRealization, phy: &PhyParams, rho0: f64) -> DVector<f64> {
    let n = layout.n;
    let mut x = DVector::zeros(layout.len());
    // 2N slots share the usable time with a little left over so the time
    // budget is strictly inactive
    let slot = phy.usable_time() / (2 * n + 1) as f64;
    x[layout.tau1()] = slot;
    for j in 1..n {
        x[layout.tau2(j)] = slot;
    }
    for i in 0..n {
        x[layout.tau3(i)] = slot;
    }
    if layout.beamforming == Beamforming::Optimized {
        let w = hermitian::identity_scaled(layout.m, 0.5 * slot * phy.tx_power_watts / layout.m as f64);
        let params = hermitian::to_params(&w);
        x.as_mut_slice()[layout.w_offset()..].copy_from_slice(&params);
    }
    let w = w_matrix(layout, &x, phy);
    let z0 = hermitian::quad_form(&chan.hap_channels[0], &w);
    for i in 0..n {
        x[layout.phi(i)] = rho0 * z0 / (2 * n) as f64;
    }
    x
}

pub(crate) fn solve_cooperative(
    chan: &ChannelRealization,
    phy: &PhyParams,
    settings: &SolverSettings,
    beamforming: Beamforming,
) -> Result<SolveReport> {
    check_inputs(chan, phy, settings)?;
    let n = chan.n();
    let m = chan.antennas();
    let scheme = match beamforming {
        Beamforming::Optimized => SchemeId::ProposedEbCooperation,
        Beamforming::Isotropic => SchemeId::CooperationNoEb,
    };
    let layout = Layout { n, m, beamforming };
    let coeffs = RateCoefficients::new(chan, phy);
    let rho0 = coeffs.rho[0];
    let program = build(&layout, chan, phy, &coeffs);
    let mut x = starting_point(&layout, chan, phy, rho0);
    let start_rate = program.rate_sums(&x).into_iter().fold(f64::INFINITY, f64::min);

    let finish = |x: &DVector<f64>, status: SolveStatus, diagnostics: SolverDiagnostics| {
        let mut vars = extract(&layout, x, chan, phy, rho0);
        let rates = evaluate_convex(&vars, &coeffs);
        vars.sbar = rates.min_rate;
        let mut report = SolveReport {
            scheme,
            status,
            sbar_star: rates.min_rate,
            rates,
            point: OperatingPoint::Cooperative(vars),
            diagnostics,
            residuals: Default::default(),
            phy: *phy,
        };
        report.residuals = kkt_residuals(&report, chan, phy);
        report
    };

    if !(start_rate > 0.0 && start_rate.is_finite()) {
        // some device can never deliver a bit: the optimum is 0
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
    x[layout.s()] = 0.5 * start_rate;

    let t = phy.usable_time();
    let bound = (1..n)
        .map(|j| persp(t, coeffs.rho_bar[j - 1] * energy_cap(chan, phy, j)))
        .fold(persp(t, rho0 * energy_cap(chan, phy, 0)), f64::min);
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
