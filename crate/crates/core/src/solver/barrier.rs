//! Path-following log-barrier method for programs of the form
//!
//! ```text
//! maximize  s
//! subject to  a_k . x + b_k > 0                         (linear)
//!             sum_t persp(x[time_t], e_t . x) - s > 0    (rate)
//!             W(x) > 0                                   (Hermitian block)
//! ```
//!
//! where `persp(x, w) = x log2(1 + w / x)` and each energy `e_t . x` is
//! linear. The Hermitian block enters through `-log det W`, evaluated on the
//! real symmetric embedding of dimension `2M` (so the barrier is
//! `-1/2 log det X`).

use nalgebra::{DMatrix, DVector};

use super::SolverSettings;
use crate::hermitian;
use crate::rates::{persp, perspective_gradient, perspective_hessian};

/// Line searches that need a shorter step than this end the centering stage:
/// the remaining decrease is below what the slacks can resolve.
const MIN_STEP: f64 = 1e-10;

/// Squared Newton decrement below which the iterate is inside the region of
/// quadratic convergence, where full steps are always accepted in exact
/// arithmetic.
const ROUNDOFF_DECREMENT: f64 = 1e-4;

pub(crate) type Sparse = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub(crate) struct LinearConstraint {
    pub coeffs: Sparse,
    pub constant: f64,
}

impl LinearConstraint {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.constant + dot(&self.coeffs, x)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PerspectiveTerm {
    pub time: usize,
    pub energy: Sparse,
}

/// `sum(terms) - s > 0`.
#[derive(Debug, Clone)]
pub(crate) struct RateConstraint {
    pub terms: Vec<PerspectiveTerm>,
}

#[derive(Debug, Clone)]
pub(crate) struct PsdBlock {
    pub offset: usize,
    pub dim: usize,
    basis: Vec<Vec<(usize, usize, f64)>>,
}

impl PsdBlock {
    pub fn new(offset: usize, dim: usize) -> Self {
        PsdBlock {
            offset,
            dim,
            basis: hermitian::embedding_basis(dim),
        }
    }

    fn embedded(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(2 * self.dim, 2 * self.dim);
        for (p, entries) in self.basis.iter().enumerate() {
            let v = x[self.offset + p];
            for &(r, c, b) in entries {
                e[(r, c)] += b * v;
            }
        }
        e
    }
}

#[inline]
fn dot(coeffs: &Sparse, x: &DVector<f64>) -> f64 {
    coeffs.iter().map(|&(i, c)| c * x[i]).sum()
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierProgram {
    pub n: usize,
    /// Index of the epigraph variable `s`.
    pub objective: usize,
    pub linear: Vec<LinearConstraint>,
    pub rates: Vec<RateConstraint>,
    pub psd: Option<PsdBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Termination {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub x: DVector<f64>,
    pub termination: Termination,
    pub newton_iterations: usize,
    pub outer_iterations: usize,
    pub barrier_weight: f64,
    /// Last Newton decrement squared, in scaled objective units.
    pub newton_decrement: f64,
    pub gradient_norm: f64,
}

struct Eval {
    #[cfg_attr(not(test), allow(dead_code))]
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    /// Every constraint slack, in evaluation order.
    slacks: Vec<f64>,
    logdet: f64,
}

impl Eval {
    /// `f(other) - f(self)` at barrier weight `weight`, formed from slack
    /// ratios so it stays accurate when the values themselves are huge.
    fn change_to(&self, other: &Eval, ds: f64, weight: f64) -> f64 {
        let logs: f64 = self.slacks.iter().zip(&other.slacks).map(|(a, b)| (b / a).ln()).sum();
        -weight * ds - logs - 0.5 * (other.logdet - self.logdet)
    }
}

impl BarrierProgram {
    /// Barrier parameter (self-concordance degree bound) of the constraint set.
    pub fn degree(&self) -> f64 {
        (self.linear.len() + self.rates.len() + self.psd.as_ref().map_or(0, |p| p.dim)) as f64
    }

    pub fn rate_sum(&self, rc: &RateConstraint, x: &DVector<f64>) -> f64 {
        rc.terms
            .iter()
            .map(|t| persp(x[t.time].max(0.0), dot(&t.energy, x).max(0.0)))
            .sum()
    }

    /// Value of every rate sum (without subtracting `s`).
    pub fn rate_sums(&self, x: &DVector<f64>) -> Vec<f64> {
        self.rates.iter().map(|rc| self.rate_sum(rc, x)).collect()
    }

    pub fn is_strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.evaluate(x, 0.0, false).is_some()
    }

    /// `-weight * s - sum log(constraints)`; `None` outside the domain.
    fn evaluate(&self, x: &DVector<f64>, weight: f64, derivatives: bool) -> Option<Eval> {
        let n = self.n;
        let mut value = -weight * x[self.objective];
        let (mut grad, mut hess) = if derivatives {
            (DVector::zeros(n), DMatrix::zeros(n, n))
        } else {
            (DVector::zeros(0), DMatrix::zeros(0, 0))
        };
        if derivatives {
            grad[self.objective] -= weight;
        }
        let mut slacks = Vec::with_capacity(self.linear.len() + self.rates.len());
        let mut logdet = 0.0;

        for lc in &self.linear {
            let g = lc.value(x);
            if !(g > 0.0) {
                return None;
            }
            value -= g.ln();
            slacks.push(g);
            if derivatives {
                let inv = 1.0 / g;
                for &(i, a) in &lc.coeffs {
                    grad[i] -= a * inv;
                    for &(j, b) in &lc.coeffs {
                        hess[(i, j)] += a * b * inv * inv;
                    }
                }
            }
        }

        if let Some(block) = &self.psd {
            let chol = block.embedded(x).cholesky()?;
            let ld: f64 = 2.0
                * chol
                    .l_dirty()
                    .diagonal()
                    .iter()
                    .take(2 * block.dim)
                    .map(|v| v.ln())
                    .sum::<f64>();
            if !ld.is_finite() {
                return None;
            }
            value -= 0.5 * ld;
            logdet = ld;
            if derivatives {
                let inv = chol.inverse();
                for (p, ep) in block.basis.iter().enumerate() {
                    let gp: f64 = ep.iter().map(|&(a, b, v)| v * inv[(b, a)]).sum();
                    grad[block.offset + p] -= 0.5 * gp;
                    for (q, eq) in block.basis.iter().enumerate().skip(p) {
                        let mut h = 0.0;
                        for &(a, b, v) in ep {
                            for &(c, d, u) in eq {
                                h += v * u * inv[(b, c)] * inv[(d, a)];
                            }
                        }
                        hess[(block.offset + p, block.offset + q)] += 0.5 * h;
                        if q != p {
                            hess[(block.offset + q, block.offset + p)] += 0.5 * h;
                        }
                    }
                }
            }
        }

        let mut dg = DVector::zeros(if derivatives { n } else { 0 });
        for rc in &self.rates {
            let mut g = -x[self.objective];
            for term in &rc.terms {
                let tau = x[term.time];
                let w = dot(&term.energy, x);
                if !(tau > 0.0) || w < 0.0 {
                    return None;
                }
                g += persp(tau, w);
            }
            if !(g > 0.0) {
                return None;
            }
            value -= g.ln();
            slacks.push(g);
            if !derivatives {
                continue;
            }
            let inv = 1.0 / g;
            dg.fill(0.0);
            dg[self.objective] = -1.0;
            for term in &rc.terms {
                let tau = x[term.time];
                let w = dot(&term.energy, x);
                let [gx, gw] = perspective_gradient(tau, w);
                let [[hxx, hxw], [_, hww]] = perspective_hessian(tau, w);
                dg[term.time] += gx;
                for &(k, c) in &term.energy {
                    dg[k] += gw * c;
                }
                // -H_g / g contributions
                hess[(term.time, term.time)] -= hxx * inv;
                for &(k, c) in &term.energy {
                    hess[(term.time, k)] -= hxw * c * inv;
                    hess[(k, term.time)] -= hxw * c * inv;
                    for &(l, d) in &term.energy {
                        hess[(k, l)] -= hww * c * d * inv;
                    }
                }
            }
            grad.axpy(-inv, &dg, 1.0);
            hess.ger(inv * inv, &dg, &dg, 1.0);
        }

        Some(Eval {
            value,
            grad,
            hess,
            slacks,
            logdet,
        })
    }

    fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
        if let Some(chol) = hess.clone().cholesky() {
            return Some(chol.solve(&(-grad)));
        }
        let scale = hess.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut reg = 1e-12;
        while reg < 1.0 {
            let shifted = hess + DMatrix::identity(hess.nrows(), hess.ncols()) * (reg * scale);
            if let Some(chol) = shifted.cholesky() {
                return Some(chol.solve(&(-grad)));
            }
            reg *= 100.0;
        }
        None
    }

    /// Runs the barrier method from the strictly feasible `x0`. The
    /// objective is `scale * s`; the duality-gap bound `degree / t` is
    /// therefore measured in units of `1 / scale`. `upper_bound` is an
    /// optional bound on the optimal `s`.
    pub fn solve(
        &self,
        x0: DVector<f64>,
        scale: f64,
        upper_bound: Option<f64>,
        settings: &SolverSettings,
    ) -> BarrierOutcome {
        debug_assert!(self.is_strictly_feasible(&x0));
        let degree = self.degree();
        let mut x = x0;
        // with an upper bound on the objective the first stage starts at a
        // gap comparable to that bound
        let mut t = match upper_bound {
            Some(u) if u * scale > 1.0 => degree / (u * scale),
            _ => settings.initial_barrier,
        };
        let mut newton_iterations = 0;
        let mut outer_iterations = 0;
        let mut decrement = f64::INFINITY;
        let mut gradient_norm;

        loop {
            // centering
            loop {
                let Some(ev) = self.evaluate(&x, t * scale, true) else {
                    unreachable!("iterate left the barrier domain");
                };
                gradient_norm = ev.grad.norm();
                let Some(dx) = Self::newton_direction(&ev.hess, &ev.grad) else {
                    break;
                };
                let slope = ev.grad.dot(&dx);
                decrement = -slope;
                if decrement / 2.0 <= settings.centering_tolerance || !(slope < 0.0) {
                    break;
                }
                if newton_iterations >= settings.max_newton_iterations {
                    return BarrierOutcome {
                        x,
                        termination: Termination::IterationLimit,
                        newton_iterations,
                        outer_iterations,
                        barrier_weight: t,
                        newton_decrement: decrement,
                        gradient_norm,
                    };
                }
                newton_iterations += 1;

                let mut step = 1.0;
                let mut accepted = None;
                while step >= MIN_STEP {
                    let trial = &x + &dx * step;
                    if let Some(tv) = self.evaluate(&trial, t * scale, false) {
                        let change = ev.change_to(&tv, trial[self.objective] - x[self.objective], t * scale);
                        if change <= settings.sufficient_decrease * step * slope {
                            accepted = Some(trial);
                            break;
                        }
                    }
                    step *= settings.backtrack_shrink;
                }
                match accepted {
                    Some(next) => x = next,
                    // no progress possible at this precision
                    None => break,
                }
                // a damped step this close to the center means roundoff
                // dominates the slacks
                if step < 1.0 && decrement < ROUNDOFF_DECREMENT {
                    break;
                }
            }
            outer_iterations += 1;
            if degree / t < settings.objective_tolerance {
                break;
            }
            t *= settings.barrier_growth;
        }

        BarrierOutcome {
            x,
            termination: Termination::Converged,
            newton_iterations,
            outer_iterations,
            barrier_weight: t,
            newton_decrement: decrement,
            gradient_norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small program touching every constraint kind: variables
    /// `[tau_a, tau_b, e, s, w(4 params, M = 2)]`.
    fn toy() -> BarrierProgram {
        let a = hermitian::quad_form_coeffs(&hermitian::CVector::from_vec(vec![
            num_complex::Complex64::new(0.8, 0.3),
            num_complex::Complex64::new(-0.2, 0.5),
        ]));
        let w_energy: Sparse = a.iter().enumerate().map(|(p, &c)| (4 + p, 2.0 * c)).collect();
        let mut trace: Sparse = hermitian::trace_coeffs(2)
            .iter()
            .enumerate()
            .map(|(p, &c)| (4 + p, -c))
            .collect();
        trace.push((0, 3.0));
        BarrierProgram {
            n: 8,
            objective: 3,
            linear: vec![
                LinearConstraint {
                    coeffs: vec![(0, 1.0)],
                    constant: 0.0,
                },
                LinearConstraint {
                    coeffs: vec![(1, 1.0)],
                    constant: 0.0,
                },
                LinearConstraint {
                    coeffs: vec![(2, 1.0)],
                    constant: 0.0,
                },
                LinearConstraint {
                    coeffs: vec![(2, -1.0)],
                    constant: 1.0,
                },
                LinearConstraint {
                    coeffs: vec![(0, -1.0), (1, -1.0)],
                    constant: 1.0,
                },
                LinearConstraint {
                    coeffs: trace,
                    constant: 0.0,
                },
            ],
            rates: vec![
                RateConstraint {
                    terms: vec![PerspectiveTerm {
                        time: 1,
                        energy: w_energy.clone(),
                    }],
                },
                RateConstraint {
                    terms: vec![
                        PerspectiveTerm {
                            time: 1,
                            energy: vec![(2, 1.5)],
                        },
                        PerspectiveTerm {
                            time: 0,
                            energy: w_energy,
                        },
                    ],
                },
            ],
            psd: Some(PsdBlock::new(4, 2)),
        }
    }

    fn point() -> DVector<f64> {
        DVector::from_vec(vec![0.3, 0.4, 0.2, 0.05, 0.4, 0.35, 0.1, -0.05])
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let prog = toy();
        let x = point();
        let weight = 2.5;
        let ev = prog.evaluate(&x, weight, true).expect("toy point is interior");
        let h = 1e-6;
        for i in 0..prog.n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let vp = prog.evaluate(&xp, weight, true).unwrap();
            let vm = prog.evaluate(&xm, weight, true).unwrap();
            let fd = (vp.value - vm.value) / (2.0 * h);
            assert!(
                (fd - ev.grad[i]).abs() < 1e-6 * ev.grad[i].abs().max(1.0),
                "grad {i}: {fd} vs {}",
                ev.grad[i]
            );
            for j in 0..prog.n {
                let fd = (vp.grad[j] - vm.grad[j]) / (2.0 * h);
                let an = ev.hess[(i, j)];
                assert!(
                    (fd - an).abs() < 1e-5 * an.abs().max(1.0),
                    "hess ({i},{j}): {fd} vs {an}"
                );
            }
        }
    }

    #[test]
    fn infeasible_points_are_rejected() {
        let prog = toy();
        let mut x = point();
        x[0] = 0.7; // time budget exceeded
        assert!(!prog.is_strictly_feasible(&x));
        let mut x = point();
        x[4] = -0.1; // W not positive definite
        assert!(!prog.is_strictly_feasible(&x));
        let mut x = point();
        x[3] = 10.0; // s above every rate
        assert!(!prog.is_strictly_feasible(&x));
    }

    #[test]
    fn solve_reaches_tolerance_and_stays_feasible() {
        let prog = toy();
        let settings = SolverSettings::default();
        let out = prog.solve(point(), 1.0 / 0.05, None, &settings);
        assert_eq!(
            out.termination,
            Termination::Converged,
            "{} newton steps",
            out.newton_iterations
        );
        assert!(out.newton_iterations < 100);
        assert!(prog.is_strictly_feasible(&out.x));
        let sums = prog.rate_sums(&out.x);
        let s = out.x[3];
        assert!(sums.iter().all(|&r| r >= s));
        assert!(s > 0.05);
    }
}
