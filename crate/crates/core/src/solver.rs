//! Initial value problems `Δ^α u(n) = A u(n+2) + f(n, u(n))`, 1 < α ≤ 2.
//!
//! With a discrete α-resolvent family S for (A, α) in hand, the homogeneous
//! solution is
//!
//! ```text
//! u(n) = S(n)(I-A)u(0) - α S(n-1) u(0) + S(n-1)(I-A)u(1),    S(-1) := 0,
//! ```
//!
//! and forcing enters through the convolution tail
//! `Σ_{k=0}^{n-2} S(n-2-k) f(k, u(k))`. Because that sum only reaches
//! u(0..n-2), the nonlinear problem is solved exactly by one forward sweep
//! (`solve_nonlinear_direct`); Picard iteration on the weighted sequence
//! space is kept alongside it as a certified-contraction demonstrator, with
//! the empirical contraction ratio reported against the bound
//! `L · ‖S‖_∞ · H` from the declared Lipschitz constant and the weight's
//! admissibility constant H.
//!
//! An independent residual oracle measures
//! `max_n ‖Δ^α u(n) - A u(n+2) - f(n, u(n))‖` through the fractional
//! difference module, away from any solver's construction path.
//!
//! The module also carries the second-order reformulations that bring
//! `Δ²u = (B + 2γ) u(n+1)` and `Δ²u = B u(n) + g(n+1, ...)` into the
//! canonical shape, and the weighted space machinery (`h(n) = n·n!` and
//! friends) those existence bounds live on.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fracdiff::{self, VecSeq};
use crate::kernels::FracOrder;
use crate::linop::LinOperator;
use crate::math;
use crate::matrix::Matrix;
use crate::resolvent::ResolventFamily;
use crate::rng::XorShift;

/// Built-in weight families for the sequence spaces, plus custom tables.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    /// h(n) = n·n!, the factorial-number-system weight; h(0) = 0.
    NFactorial,
    /// h(n) = n!.
    Factorial,
    /// h(n) = r^n.
    Geometric(f64),
    /// An explicit table; entries from index 1 on must be positive.
    Custom(Vec<f64>),
}

/// A weight sequence h in the log domain together with its admissibility
/// data: the ratio sequence `r(n) = (1/h(n)) Σ_{k=0}^{n-2} h(k)`, the
/// constant `H = max_n r(n)`, and a finite-window admissibility verdict
/// (r decreasing on the back half of the window and r(N) < r(4)/10).
#[derive(Clone, Debug)]
pub struct WeightedSpace {
    log_h: Vec<f64>,
    ratios: Vec<f64>,
    admissibility_constant: f64,
    admissible: bool,
}

impl WeightedSpace {
    pub fn horizon(&self) -> usize {
        self.log_h.len() - 1
    }

    /// ln h(n); `-inf` marks a zero weight.
    pub fn log_weight(&self, n: usize) -> f64 {
        self.log_h[n]
    }

    pub fn is_zero_weight(&self, n: usize) -> bool {
        self.log_h[n] == f64::NEG_INFINITY
    }

    /// Indices with h(n) = 0; sequences must vanish there for the weighted
    /// norm to be finite.
    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.log_h.len()).filter(|&n| self.is_zero_weight(n)).collect()
    }

    /// The admissibility constant H over the window.
    pub fn admissibility_constant(&self) -> f64 {
        self.admissibility_constant
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

/// Builds the weighted space for a kind over 0..=horizon and evaluates the
/// admissibility data. The ratio sums are evaluated in the log domain, so
/// factorial-scale weights stay exact far beyond f64 overflow.
pub fn admissibility(kind: &WeightKind, horizon: usize) -> Result<WeightedSpace> {
    if horizon < 4 {
        return Err(Error::HorizonTooShort { needed: 4, got: horizon });
    }
    let mut log_h = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let nf = n as f64;
        let lh = match kind {
            WeightKind::NFactorial => {
                if n == 0 {
                    f64::NEG_INFINITY
                } else {
                    math::ln(nf) + math::lgamma(nf + 1.0)
                }
            }
            WeightKind::Factorial => math::lgamma(nf + 1.0),
            WeightKind::Geometric(r) => {
                if !(*r > 0.0) {
                    return Err(Error::Domain("geometric weight needs a positive ratio"));
                }
                nf * math::ln(*r)
            }
            WeightKind::Custom(h) => {
                if h.len() < horizon + 1 {
                    return Err(Error::HorizonTooShort { needed: horizon, got: h.len().saturating_sub(1) });
                }
                if n >= 1 && !(h[n] > 0.0) {
                    return Err(Error::Domain("custom weights must be positive from index 1"));
                }
                if h[n] < 0.0 {
                    return Err(Error::Domain("custom weights must be nonnegative"));
                }
                if h[n] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    math::ln(h[n])
                }
            }
        };
        log_h.push(lh);
    }
    let mut ratios = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        if log_h[n] == f64::NEG_INFINITY {
            ratios.push(0.0);
            continue;
        }
        let mut r = 0.0;
        for k in 0..n.saturating_sub(1) {
            if log_h[k] > f64::NEG_INFINITY {
                r += math::exp(log_h[k] - log_h[n]);
            }
        }
        ratios.push(r);
    }
    let admissibility_constant = ratios.iter().fold(0.0, |m: f64, &r| m.max(r));
    let mut decreasing = true;
    for n in horizon / 2..horizon {
        if ratios[n + 1] > ratios[n] * (1.0 + 1e-12) {
            decreasing = false;
            break;
        }
    }
    let admissible = decreasing && ratios[horizon] < ratios[4] / 10.0;
    Ok(WeightedSpace { log_h, ratios, admissibility_constant, admissible })
}

/// The weighted sup-norm `sup_n ‖u(n)‖ / h(n)`, evaluated in the log
/// domain. Indices with h(n) = 0 demand u(n) = 0; otherwise the norm is
/// infinite (returned as `f64::INFINITY`, a value rather than an error).
pub fn weighted_norm(u: &VecSeq, space: &WeightedSpace) -> f64 {
    let upto = u.horizon().min(space.horizon());
    let mut sup = 0.0f64;
    for n in 0..=upto {
        let norm = u.state_norm(n);
        if space.is_zero_weight(n) {
            if norm > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        if norm > 0.0 {
            sup = sup.max(math::exp(math::ln(norm) - space.log_weight(n)));
        }
    }
    sup
}

/// State-dependent forcing: a callback `(n, u(n)) -> vector` with declared
/// constants — the Lipschitz constant L, the sup of the bound envelope
/// M(n), and the slope C of the comparison function W(y) ≤ C·y. Hypothesis
/// checks evaluate these declarations; they are never inferred.
#[derive(Clone, Copy)]
pub struct StateDep<'a> {
    pub f: &'a dyn Fn(usize, &[f64]) -> Vec<f64>,
    pub lipschitz: f64,
    pub envelope_sup: f64,
    pub w_slope: f64,
}

impl<'a> core::fmt::Debug for StateDep<'a> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("StateDep")
            .field("lipschitz", &self.lipschitz)
            .field("envelope_sup", &self.envelope_sup)
            .field("w_slope", &self.w_slope)
            .finish()
    }
}

/// The forcing term of a problem.
#[derive(Clone, Copy, Debug, Default)]
pub enum Forcing<'a> {
    /// Homogeneous problem.
    #[default]
    None,
    /// A fixed sequence g(0..=N-2).
    Sequence(&'a VecSeq),
    /// State-dependent forcing f(n, u(n)).
    StateDependent(StateDep<'a>),
}

/// A fully specified initial value problem on 0..=horizon.
#[derive(Clone, Debug)]
pub struct ProblemSpec<'a> {
    pub order: FracOrder,
    pub operator: &'a LinOperator,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub forcing: Forcing<'a>,
    pub horizon: usize,
}

impl<'a> ProblemSpec<'a> {
    pub fn new(
        order: FracOrder,
        operator: &'a LinOperator,
        u0: Vec<f64>,
        u1: Vec<f64>,
        forcing: Forcing<'a>,
        horizon: usize,
    ) -> Result<Self> {
        if !(order.alpha() > 1.0 && order.alpha() <= 2.0) {
            return Err(Error::Domain("problems are posed for 1 < alpha <= 2"));
        }
        let d = operator.dim();
        if u0.len() != d {
            return Err(Error::DimMismatch { expected: d, got: u0.len() });
        }
        if u1.len() != d {
            return Err(Error::DimMismatch { expected: d, got: u1.len() });
        }
        if horizon < 2 {
            return Err(Error::HorizonTooShort { needed: 2, got: horizon });
        }
        if let Forcing::Sequence(g) = forcing {
            if g.dim() != d {
                return Err(Error::DimMismatch { expected: d, got: g.dim() });
            }
            if g.horizon() != horizon - 2 {
                return Err(Error::HorizonMismatch { expected: horizon - 2, got: g.horizon() });
            }
        }
        Ok(ProblemSpec { order, operator, u0, u1, forcing, horizon })
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    fn zero_initial(&self) -> bool {
        self.u0.iter().all(|&x| x == 0.0) && self.u1.iter().all(|&x| x == 0.0)
    }

    /// f(n, state) for whichever forcing is present.
    fn forcing_value(&self, n: usize, state: &[f64]) -> Result<Vec<f64>> {
        match &self.forcing {
            Forcing::None => Ok(vec![0.0; self.dim()]),
            Forcing::Sequence(g) => Ok(g.state(n).to_vec()),
            Forcing::StateDependent(sd) => {
                let v = (sd.f)(n, state);
                if v.len() != self.dim() {
                    return Err(Error::DimMismatch { expected: self.dim(), got: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite { context: "forcing callback", index: n });
                }
                Ok(v)
            }
        }
    }
}

fn check_family(p: &ProblemSpec, fam: &ResolventFamily) -> Result<()> {
    if fam.order().alpha() != p.order.alpha() {
        return Err(Error::FamilyMismatch("order differs between family and problem"));
    }
    if fam.dim() != p.dim() {
        return Err(Error::FamilyMismatch("dimension differs between family and problem"));
    }
    if fam.horizon() < p.horizon {
        return Err(Error::FamilyMismatch("family horizon shorter than the problem's"));
    }
    Ok(())
}

/// The homogeneous part `S(n)(I-A)u0 - α S(n-1)u0 + S(n-1)(I-A)u1` with the
/// zero-matrix convention at S(-1).
fn homogeneous_part(p: &ProblemSpec, fam: &ResolventFamily) -> Result<VecSeq> {
    let d = p.dim();
    let alpha = p.order.alpha();
    let w0: Vec<f64> = {
        let au = p.operator.apply(&p.u0)?;
        p.u0.iter().zip(au.iter()).map(|(u, a)| u - a).collect()
    };
    let w1: Vec<f64> = {
        let au = p.operator.apply(&p.u1)?;
        p.u1.iter().zip(au.iter()).map(|(u, a)| u - a).collect()
    };
    let mut out = VecSeq::zeros(d, p.horizon);
    for n in 0..=p.horizon {
        let mut state = fam.apply(n, &w0);
        if n >= 1 {
            let prev_u0 = fam.apply(n - 1, &p.u0);
            let prev_w1 = fam.apply(n - 1, &w1);
            for i in 0..d {
                state[i] += -alpha * prev_u0[i] + prev_w1[i];
            }
        }
        out.state_mut(n).copy_from_slice(&state);
    }
    Ok(out)
}

/// Solves the homogeneous problem `Δ^α u(n) = A u(n+2)` with the family's
/// propagator formula. The initial vectors are reproduced exactly up to the
/// solves hidden in S(0), S(1).
pub fn solve_homogeneous(p: &ProblemSpec, fam: &ResolventFamily) -> Result<VecSeq> {
    if !matches!(p.forcing, Forcing::None) {
        return Err(Error::Domain("homogeneous solver requires forcing: none"));
    }
    check_family(p, fam)?;
    homogeneous_part(p, fam)
}

/// Solves `Δ^α u(n) = A u(n+2) + g(n)` by adding the convolution tail
/// `Σ_{k=0}^{n-2} S(n-2-k) g(k)` to the homogeneous part.
pub fn solve_inhomogeneous(p: &ProblemSpec, fam: &ResolventFamily) -> Result<VecSeq> {
    let g = match p.forcing {
        Forcing::Sequence(g) => g,
        _ => return Err(Error::Domain("inhomogeneous solver requires a forcing sequence")),
    };
    check_family(p, fam)?;
    let mut out = homogeneous_part(p, fam)?;
    let d = p.dim();
    for n in 2..=p.horizon {
        let mut tail = vec![0.0; d];
        for k in 0..=n - 2 {
            let sg = fam.apply(n - 2 - k, g.state(k));
            for i in 0..d {
                tail[i] += sg[i];
            }
        }
        let state = out.state_mut(n);
        for i in 0..d {
            state[i] += tail[i];
        }
    }
    Ok(out)
}

/// Solves the state-dependent problem by the forward mild-solution sweep:
/// each u(n) only needs u(0..n-2), so the recursion
/// `u(n) = hom(n) + Σ_{k≤n-2} S(n-2-k) f(k, u(k))` is explicit and exact on
/// the window — no iteration involved. Nonzero initial vectors ride along
/// through the homogeneous part.
pub fn solve_nonlinear_direct(p: &ProblemSpec, fam: &ResolventFamily) -> Result<VecSeq> {
    let sd = match p.forcing {
        Forcing::StateDependent(sd) => sd,
        _ => return Err(Error::Domain("nonlinear solver requires state-dependent forcing")),
    };
    check_family(p, fam)?;
    let d = p.dim();
    let mut out = homogeneous_part(p, fam)?;
    let mut fvals: Vec<Vec<f64>> = Vec::with_capacity(p.horizon.saturating_sub(1));
    for n in 2..=p.horizon {
        // forcing at index n-2 becomes available exactly when needed
        let k_new = n - 2;
        let v = (sd.f)(k_new, out.state(k_new));
        if v.len() != d {
            return Err(Error::DimMismatch { expected: d, got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { context: "forcing callback", index: k_new });
        }
        fvals.push(v);
        let mut tail = vec![0.0; d];
        for (k, fv) in fvals.iter().enumerate() {
            let sg = fam.apply(n - 2 - k, fv);
            for i in 0..d {
                tail[i] += sg[i];
            }
        }
        let state = out.state_mut(n);
        for i in 0..d {
            state[i] += tail[i];
        }
    }
    Ok(out)
}

/// Diagnostics of a Picard run.
#[derive(Clone, Debug)]
pub struct PicardReport {
    pub solution: VecSeq,
    pub iterations: usize,
    /// max over steps of ‖u^{k+1}-u^k‖_h / ‖u^k-u^{k-1}‖_h.
    pub contraction_estimate: f64,
    pub converged: bool,
    pub final_step: f64,
}

/// Number of random pairs the declared Lipschitz constant is sampled on
/// before iterating.
pub const LIPSCHITZ_SPOT_SAMPLES: usize = 1000;

/// Samples the declared Lipschitz constant of a callback on random pairs at
/// several scales; a relative violation beyond 1e-9 aborts the run, which
/// catches inconsistent declarations early.
pub fn lipschitz_spot_check(
    f: &dyn Fn(usize, &[f64]) -> Vec<f64>,
    lipschitz: f64,
    dim: usize,
    index_range: usize,
    samples: usize,
    seed: u64,
) -> Result<()> {
    let mut rng = XorShift::new(seed);
    let scales = [0.1, 1.0, 10.0];
    for i in 0..samples {
        let scale = scales[i % scales.len()];
        let n = (rng.next_u64() % index_range.max(1) as u64) as usize;
        let x: Vec<f64> = (0..dim).map(|_| scale * rng.uniform(-1.0, 1.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| scale * rng.uniform(-1.0, 1.0)).collect();
        let fx = f(n, &x);
        let fy = f(n, &y);
        let df: f64 =
            math::sqrt(fx.iter().zip(fy.iter()).map(|(a, b)| math::powi(a - b, 2)).sum());
        let dx: f64 =
            math::sqrt(x.iter().zip(y.iter()).map(|(a, b)| math::powi(a - b, 2)).sum());
        if df > lipschitz * dx * (1.0 + 1e-9) + 1e-14 {
            return Err(Error::DeclarationViolated { context: "lipschitz constant", index: i });
        }
    }
    Ok(())
}

/// Picard iteration `u^{k+1} = G(u^k)` from u^0 = 0 in the weighted norm,
/// for the zero-initial-value nonlinear problem.
///
/// On a finite window the direct sweep is the exact fixed point, so this is
/// a certified-contraction demonstrator rather than the production path;
/// the returned estimate is the largest ratio of successive weighted step
/// norms. Iteration stops when the step drops below `tol`; exceeding
/// `max_iter` reports `converged: false` with the best iterate.
pub fn solve_nonlinear_picard(
    p: &ProblemSpec,
    fam: &ResolventFamily,
    space: &WeightedSpace,
    tol: f64,
    max_iter: usize,
) -> Result<PicardReport> {
    let sd = match p.forcing {
        Forcing::StateDependent(sd) => sd,
        _ => return Err(Error::Domain("picard solver requires state-dependent forcing")),
    };
    check_family(p, fam)?;
    if !p.zero_initial() {
        return Err(Error::Domain("picard iteration is posed for zero initial vectors"));
    }
    if space.horizon() < p.horizon {
        return Err(Error::HorizonTooShort { needed: p.horizon, got: space.horizon() });
    }
    if !space.is_admissible() {
        return Err(Error::Domain("picard iteration needs an admissible weight"));
    }
    lipschitz_spot_check(sd.f, sd.lipschitz, p.dim(), p.horizon.saturating_sub(1),
        LIPSCHITZ_SPOT_SAMPLES, 0x5eed_1e55)?;

    let d = p.dim();
    let mut current = VecSeq::zeros(d, p.horizon);
    let mut prev_step: Option<f64> = None;
    let mut contraction: f64 = 0.0;
    let mut final_step = f64::INFINITY;
    for iter in 1..=max_iter {
        // one application of G
        let mut next = VecSeq::zeros(d, p.horizon);
        for n in 2..=p.horizon {
            let mut tail = vec![0.0; d];
            for k in 0..=n - 2 {
                let fv = p.forcing_value(k, current.state(k))?;
                let sg = fam.apply(n - 2 - k, &fv);
                for i in 0..d {
                    tail[i] += sg[i];
                }
            }
            next.state_mut(n).copy_from_slice(&tail);
        }
        let mut diff = next.clone();
        for n in 0..=p.horizon {
            let c = current.state(n).to_vec();
            let s = diff.state_mut(n);
            for i in 0..d {
                s[i] -= c[i];
            }
        }
        let step = weighted_norm(&diff, space);
        if let Some(prev) = prev_step {
            if prev > 0.0 && step > 0.0 {
                contraction = contraction.max(step / prev);
            }
        }
        prev_step = Some(step);
        current = next;
        final_step = step;
        if step < tol {
            return Ok(PicardReport {
                solution: current,
                iterations: iter,
                contraction_estimate: contraction,
                converged: true,
                final_step: step,
            });
        }
    }
    Ok(PicardReport {
        solution: current,
        iterations: max_iter,
        contraction_estimate: contraction,
        converged: false,
        final_step,
    })
}

/// Residual oracle: `max_{n ≤ N-2} ‖Δ^α u(n) - A u(n+2) - f(n, u(n))‖`
/// scaled by max(1, sup_n ‖u(n)‖), with the fractional difference taken
/// through the calculus module — independent of every solver's path.
pub fn residual(u: &VecSeq, p: &ProblemSpec) -> Result<f64> {
    if p.horizon < 4 || u.horizon() < 4 {
        return Err(Error::HorizonTooShort { needed: 4, got: u.horizon().min(p.horizon) });
    }
    if u.dim() != p.dim() {
        return Err(Error::DimMismatch { expected: p.dim(), got: u.dim() });
    }
    let diff = fracdiff::rl_diff(p.order, u)?;
    let upto = p.horizon - 2;
    let scale = u.sup_norm().max(1.0);
    let mut worst = 0.0f64;
    for n in 0..=upto {
        let au = p.operator.apply(u.state(n + 2))?;
        let fv = p.forcing_value(n, u.state(n))?;
        let mut err = 0.0;
        for i in 0..p.dim() {
            err += math::powi(diff.state(n)[i] - au[i] - fv[i], 2);
        }
        worst = worst.max(math::sqrt(err) / scale);
    }
    Ok(worst)
}

/// Brings `Δ²u(n) = (B + 2γ) u(n+1)` into canonical shape: the returned
/// operator `T = I - 2(2(1+γ) + B)^{-1}` generates the equivalent problem
/// `Δ²u(n) = T u(n+2) + T u(n) + ...` (the `T u(n)` term rides in the
/// forcing slot). Materializes T densely through d resolvent solves.
pub fn reformulate_shifted(b: &LinOperator, gamma: f64) -> Result<LinOperator> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain("shift must be nonnegative"));
    }
    let d = b.dim();
    let shift = 2.0 * (1.0 + gamma);
    // 2(1+γ) + B = (-shift·I - B) negated; reuse the dense LU on the
    // materialization
    let mut m = b.materialize();
    for i in 0..d {
        m.set(i, i, m.get(i, i) + shift);
    }
    let inv = m.lu(-shift)?.inverse();
    let mut t = Matrix::identity(d);
    t.axpy(-2.0, &inv);
    Ok(LinOperator::Dense(t))
}

/// Brings `Δ²u(n) = B u(n) + g(n+1, u(n+1))` into canonical shape with
/// `T = I - (I - B)^{-1}`.
pub fn reformulate_delayed(b: &LinOperator) -> Result<LinOperator> {
    let d = b.dim();
    let inv = b.shifted_factor(1.0)?.inverse()?;
    let mut t = Matrix::identity(d);
    t.axpy(-1.0, &inv);
    Ok(LinOperator::Dense(t))
}

/// Evaluation of the existence-theorem hypotheses from declared data.
#[derive(Clone, Copy, Debug)]
pub struct HypothesisReport {
    pub family_sup_norm: f64,
    pub admissibility_constant: f64,
    /// L · ‖S‖_∞ · H; the Lipschitz route applies iff this is below one.
    pub contraction_product: f64,
    pub contraction_ok: bool,
    /// sup M(n) · C · ‖S‖_∞ · H, the boundedness product of the
    /// fixed-point-alternative route.
    pub growth_product: f64,
}

/// Reports the fixed-point hypothesis products for a declared forcing over
/// a family and weight; nothing is inferred from the callback itself beyond
/// what the declarations state.
pub fn hypothesis_report(
    sd: &StateDep,
    fam: &ResolventFamily,
    space: &WeightedSpace,
) -> HypothesisReport {
    let s = fam.sup_norm();
    let h = space.admissibility_constant();
    let contraction_product = sd.lipschitz * s * h;
    HypothesisReport {
        family_sup_norm: s,
        admissibility_constant: h,
        contraction_product,
        contraction_ok: contraction_product < 1.0,
        growth_product: sd.envelope_sup * sd.w_slope * s * h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::cesaro_kernel;
    use crate::resolvent::build_recurrence;
    use approx::assert_relative_eq;

    fn order(alpha: f64) -> FracOrder {
        FracOrder::solver_order(alpha).unwrap()
    }

    #[test]
    fn nfactorial_admissibility_constant() {
        let w = admissibility(&WeightKind::NFactorial, 30).unwrap();
        assert_relative_eq!(w.admissibility_constant(), 1.0 / 18.0, max_relative = 1e-14);
        // attained at n = 3
        let r = w.ratios();
        assert!(r.iter().enumerate().all(|(n, &v)| v <= r[3] || n == 3));
        assert!(w.is_admissible());
        assert_eq!(w.zero_set(), vec![0]);
    }

    #[test]
    fn nfactorial_partial_sums_exact_in_integers() {
        // Σ_{k=1}^n k·k! = (n+1)! - 1 in exact arithmetic for n ≤ 18
        let mut fact: u128 = 1; // k!
        let mut sum: u128 = 0;
        for k in 1..=18u128 {
            fact *= k;
            sum += k * fact;
            assert_eq!(sum, fact * (k + 1) - 1, "n = {k}");
        }
    }

    #[test]
    fn geometric_weight_is_not_admissible() {
        let w = admissibility(&WeightKind::Geometric(2.0), 40).unwrap();
        // ratio sequence tends to 1/2
        assert_relative_eq!(w.ratios()[40], 0.5, max_relative = 1e-9);
        assert!(!w.is_admissible());
    }

    #[test]
    fn factorial_weight_is_admissible() {
        let w = admissibility(&WeightKind::Factorial, 24).unwrap();
        assert!(w.is_admissible());
        // r(n) ~ 1/(n(n-1)) for the factorial weight
        assert_relative_eq!(w.ratios()[24], 1.0 / (24.0 * 23.0), max_relative = 1e-1);
        // integer cross-check of the ratio at small n: r(4) = (1+1+2)/24
        assert_relative_eq!(w.ratios()[4], 4.0 / 24.0, max_relative = 1e-13);
    }

    #[test]
    fn custom_weight_validation() {
        assert!(admissibility(&WeightKind::Custom(vec![0.0, 1.0, -2.0, 3.0, 4.0]), 4).is_err());
        let w = admissibility(&WeightKind::Custom(vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0]), 5);
        assert!(w.is_ok());
    }

    #[test]
    fn weighted_norm_basics() {
        let w = admissibility(&WeightKind::NFactorial, 10).unwrap();
        // u(n) = h(n) e1 has norm exactly 1
        let mut u = VecSeq::zeros(2, 10);
        for n in 1..=10usize {
            let h: f64 = (n as f64) * (1..=n).map(|k| k as f64).product::<f64>();
            u.state_mut(n)[0] = h;
        }
        assert_relative_eq!(weighted_norm(&u, &w), 1.0, max_relative = 1e-12);
        // zero sequence
        assert_eq!(weighted_norm(&VecSeq::zeros(2, 10), &w), 0.0);
        // nonzero value on the zero-weight index flags infinity
        let mut v = VecSeq::zeros(2, 10);
        v.state_mut(0)[1] = 1e-9;
        assert_eq!(weighted_norm(&v, &w), f64::INFINITY);
    }

    #[test]
    fn homogeneous_reproduces_initial_values() {
        let op = LinOperator::Diagonal { multipliers: vec![0.3, 0.6, -0.2], grid: None };
        let fam = build_recurrence(&op, order(1.5), 20).unwrap();
        let u0 = vec![1.0, -2.0, 0.5];
        let u1 = vec![0.3, 0.0, -1.0];
        let p = ProblemSpec::new(order(1.5), &op, u0.clone(), u1.clone(), Forcing::None, 20)
            .unwrap();
        let u = solve_homogeneous(&p, &fam).unwrap();
        let scale = 1.0 + 2.0 + 1.0;
        for i in 0..3 {
            assert!((u.state(0)[i] - u0[i]).abs() <= 1e-12 * scale);
            assert!((u.state(1)[i] - u1[i]).abs() <= 1e-12 * scale);
        }
        assert!(residual(&u, &p).unwrap() <= 1e-11);
    }

    #[test]
    fn homogeneous_zero_operator_kernel_form() {
        // A = 0: u(n) = k^α(n)u0 - α k^α(n-1)u0 + k^α(n-1)u1
        let op = LinOperator::zero(1);
        let alpha = 1.5;
        let fam = build_recurrence(&op, order(alpha), 18).unwrap();
        let p = ProblemSpec::new(order(alpha), &op, vec![2.0], vec![-1.0], Forcing::None, 18)
            .unwrap();
        let u = solve_homogeneous(&p, &fam).unwrap();
        let k = cesaro_kernel(alpha, 18).unwrap();
        for n in 1..=18 {
            let want = k[n] * 2.0 - alpha * k[n - 1] * 2.0 + k[n - 1] * (-1.0);
            assert_relative_eq!(u.state(n)[0], want, max_relative = 1e-11, epsilon = 1e-12);
        }
        assert!(residual(&u, &p).unwrap() <= 1e-11);
    }

    /// Closed form of the order-two family for a multiplication operator:
    /// S(n) = (1/(2√m)) [ (1-√m)^{-(n+1)} - (1+√m)^{-(n+1)} ].
    fn sine_family_closed(m: f64, n: i32) -> f64 {
        let s = m.sqrt();
        ((1.0 - s).powi(-(n + 1)) - (1.0 + s).powi(-(n + 1))) / (2.0 * s)
    }

    #[test]
    fn multiplication_operator_order_two_closed_form() {
        // grid multiplication operator with m(x) in (0,1); α = 2
        let d = 12;
        let mults: Vec<f64> = (1..=d).map(|i| 0.1 + 0.5 * i as f64 / d as f64).collect();
        let op = LinOperator::Diagonal { multipliers: mults.clone(), grid: None };
        let fam = build_recurrence(&op, order(2.0), 30).unwrap();
        // the family itself matches the closed form
        for n in 0..=30 {
            for (i, &m) in mults.iter().enumerate() {
                assert_relative_eq!(
                    fam.matrix(n).get(i, i),
                    sine_family_closed(m, n as i32),
                    max_relative = 1e-9
                );
            }
        }
        // and so does the homogeneous solution built on it
        let u0: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
        let u1: Vec<f64> = (0..d).map(|i| 0.5 - 0.05 * i as f64).collect();
        let p =
            ProblemSpec::new(order(2.0), &op, u0.clone(), u1.clone(), Forcing::None, 30).unwrap();
        let u = solve_homogeneous(&p, &fam).unwrap();
        for n in 0..=30i32 {
            for (i, &m) in mults.iter().enumerate() {
                let s_n = sine_family_closed(m, n);
                let s_prev = sine_family_closed(m, n - 1);
                let want = s_n * (1.0 - m) * u0[i] - 2.0 * s_prev * u0[i]
                    + s_prev * (1.0 - m) * u1[i];
                let scale = want.abs().max(1.0);
                assert!(
                    (u.state(n as usize)[i] - want).abs() <= 1e-9 * scale,
                    "n={n} i={i}"
                );
            }
        }
        assert!(residual(&u, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn inhomogeneous_reduces_and_shifts() {
        let op = LinOperator::Diagonal { multipliers: vec![0.25, -0.4], grid: None };
        let fam = build_recurrence(&op, order(1.7), 24).unwrap();
        // g ≡ 0 reduces to the homogeneous solution exactly
        let zero_g = VecSeq::zeros(2, 22);
        let p_zero = ProblemSpec::new(
            order(1.7),
            &op,
            vec![1.0, 2.0],
            vec![0.5, -0.5],
            Forcing::Sequence(&zero_g),
            24,
        )
        .unwrap();
        let hom_p = ProblemSpec::new(
            order(1.7),
            &op,
            vec![1.0, 2.0],
            vec![0.5, -0.5],
            Forcing::None,
            24,
        )
        .unwrap();
        assert_eq!(
            solve_inhomogeneous(&p_zero, &fam).unwrap(),
            solve_homogeneous(&hom_p, &fam).unwrap()
        );
        // zero ICs with δ0 ⊗ x forcing gives u(n) = S(n-2)x
        let x = [0.7, -1.3];
        let g = VecSeq::outer(&crate::kernels::ScalarSeq::delta0(22), &x);
        let p = ProblemSpec::new(
            order(1.7),
            &op,
            vec![0.0; 2],
            vec![0.0; 2],
            Forcing::Sequence(&g),
            24,
        )
        .unwrap();
        let u = solve_inhomogeneous(&p, &fam).unwrap();
        for n in 2..=24 {
            let want = fam.apply(n - 2, &x);
            for i in 0..2 {
                assert_relative_eq!(u.state(n)[i], want[i], max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inhomogeneous_random_residual() {
        let mut rng = XorShift::new(77);
        let mut m = Matrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m.set(i, j, 0.2 * rng.uniform(-1.0, 1.0));
            }
        }
        let op = LinOperator::Dense(m);
        let fam = build_recurrence(&op, order(1.5), 30).unwrap();
        let g = VecSeq::from_flat(4, rng.vector(4 * 29)).unwrap();
        let p = ProblemSpec::new(
            order(1.5),
            &op,
            rng.vector(4),
            rng.vector(4),
            Forcing::Sequence(&g),
            30,
        )
        .unwrap();
        let u = solve_inhomogeneous(&p, &fam).unwrap();
        assert!(residual(&u, &p).unwrap() <= 1e-9);
        // linearity: scaling g scales the zero-IC particular part exactly
        let mut g2 = g.clone();
        for n in 0..=g2.horizon() {
            for v in g2.state_mut(n) {
                *v *= 2.5;
            }
        }
        let zero_p = ProblemSpec::new(
            order(1.5),
            &op,
            vec![0.0; 4],
            vec![0.0; 4],
            Forcing::Sequence(&g),
            30,
        )
        .unwrap();
        let zero_p2 = ProblemSpec::new(
            order(1.5),
            &op,
            vec![0.0; 4],
            vec![0.0; 4],
            Forcing::Sequence(&g2),
            30,
        )
        .unwrap();
        let up = solve_inhomogeneous(&zero_p, &fam).unwrap();
        let up2 = solve_inhomogeneous(&zero_p2, &fam).unwrap();
        for n in 0..=30 {
            for i in 0..4 {
                assert_relative_eq!(
                    up2.state(n)[i],
                    2.5 * up.state(n)[i],
                    max_relative = 1e-12,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn nonlinear_direct_consistency() {
        let op = LinOperator::Diagonal { multipliers: vec![0.3, 0.1], grid: None };
        let fam = build_recurrence(&op, order(1.6), 26).unwrap();
        // f ≡ 0 gives the zero solution from zero ICs
        let zero_f = |_n: usize, _x: &[f64]| vec![0.0, 0.0];
        let p = ProblemSpec::new(
            order(1.6),
            &op,
            vec![0.0; 2],
            vec![0.0; 2],
            Forcing::StateDependent(StateDep {
                f: &zero_f,
                lipschitz: 0.0,
                envelope_sup: 0.0,
                w_slope: 1.0,
            }),
            26,
        )
        .unwrap();
        let u = solve_nonlinear_direct(&p, &fam).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        // state-independent f equals the inhomogeneous solver
        let mut rng = XorShift::new(3);
        let g = VecSeq::from_flat(2, rng.vector(2 * 25)).unwrap();
        let g_ref = &g;
        let state_indep = move |n: usize, _x: &[f64]| g_ref.state(n).to_vec();
        let p_nl = ProblemSpec::new(
            order(1.6),
            &op,
            vec![0.0; 2],
            vec![0.0; 2],
            Forcing::StateDependent(StateDep {
                f: &state_indep,
                lipschitz: 0.0,
                envelope_sup: 1.0,
                w_slope: 1.0,
            }),
            26,
        )
        .unwrap();
        let p_seq = ProblemSpec::new(
            order(1.6),
            &op,
            vec![0.0; 2],
            vec![0.0; 2],
            Forcing::Sequence(&g),
            26,
        )
        .unwrap();
        let a = solve_nonlinear_direct(&p_nl, &fam).unwrap();
        let b = solve_inhomogeneous(&p_seq, &fam).unwrap();
        for n in 0..=26 {
            for i in 0..2 {
                assert_relative_eq!(a.state(n)[i], b.state(n)[i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn nonlinear_direct_with_nonzero_initials_passes_oracle() {
        // the mild recursion stays exact with the homogeneous part riding
        // along; validated purely by the residual oracle
        let op = LinOperator::Diagonal { multipliers: vec![0.4, -0.3], grid: None };
        let fam = build_recurrence(&op, order(1.8), 24).unwrap();
        let f = |n: usize, x: &[f64]| -> Vec<f64> {
            let w = 1.0 / (1.0 + n as f64);
            x.iter().map(|v| w * v / (1.0 + v.abs())).collect()
        };
        let p = ProblemSpec::new(
            order(1.8),
            &op,
            vec![1.0, -0.5],
            vec![0.2, 0.8],
            Forcing::StateDependent(StateDep {
                f: &f,
                lipschitz: 1.0,
                envelope_sup: 1.0,
                w_slope: 1.0,
            }),
            24,
        )
        .unwrap();
        let u = solve_nonlinear_direct(&p, &fam).unwrap();
        assert!(residual(&u, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn picard_agrees_with_direct_sweep() {
        let op = LinOperator::Diagonal { multipliers: vec![0.2, 0.5], grid: None };
        let fam = build_recurrence(&op, order(1.5), 20).unwrap();
        let f = |n: usize, x: &[f64]| -> Vec<f64> {
            let w = (n as f64).sin() / (1.0 + (n as f64).powi(3));
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut v: Vec<f64> = x.iter().map(|v| w * v / (1.0 + norm)).collect();
            v[0] += 0.5 / (1.0 + n as f64 * n as f64);
            v
        };
        let sd = StateDep { f: &f, lipschitz: 2.0, envelope_sup: 1.0, w_slope: 1.0 };
        let p = ProblemSpec::new(
            order(1.5),
            &op,
            vec![0.0; 2],
            vec![0.0; 2],
            Forcing::StateDependent(sd),
            20,
        )
        .unwrap();
        let space = admissibility(&WeightKind::NFactorial, 20).unwrap();
        let direct = solve_nonlinear_direct(&p, &fam).unwrap();
        let report = solve_nonlinear_picard(&p, &fam, &space, 1e-14, 60).unwrap();
        assert!(report.converged);
        // weighted distance between the two solutions
        let mut diff = report.solution.clone();
        for n in 0..=20 {
            let d = direct.state(n).to_vec();
            let s = diff.state_mut(n);
            for i in 0..2 {
                s[i] -= d[i];
            }
        }
        assert!(weighted_norm(&diff, &space) <= 1e-10);
        // the empirical contraction never exceeds the declared product
        let hyp = hypothesis_report(&sd, &fam, &space);
        assert!(
            report.contraction_estimate <= hyp.contraction_product * (1.0 + 1e-6),
            "estimate {} vs product {}",
            report.contraction_estimate,
            hyp.contraction_product
        );
    }

    #[test]
    fn picard_trivial_and_gate_checks() {
        let op = LinOperator::Diagonal { multipliers: vec![0.2], grid: None };
        let fam = build_recurrence(&op, order(1.5), 20).unwrap();
        let zero_f = |_n: usize, _x: &[f64]| vec![0.0];
        let sd = StateDep { f: &zero_f, lipschitz: 0.0, envelope_sup: 0.0, w_slope: 1.0 };
        let space = admissibility(&WeightKind::NFactorial, 20).unwrap();
        let p = ProblemSpec::new(
            order(1.5),
            &op,
            vec![0.0],
            vec![0.0],
            Forcing::StateDependent(sd),
            12,
        )
        .unwrap();
        let report = solve_nonlinear_picard(&p, &fam, &space, 1e-12, 10).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.solution.sup_norm(), 0.0);
        // nonzero initial vectors are rejected on this path
        let p_bad = ProblemSpec::new(
            order(1.5),
            &op,
            vec![1.0],
            vec![0.0],
            Forcing::StateDependent(sd),
            12,
        )
        .unwrap();
        assert!(solve_nonlinear_picard(&p_bad, &fam, &space, 1e-12, 10).is_err());
        // a lying Lipschitz declaration is caught by the spot check
        let steep = |_n: usize, x: &[f64]| -> Vec<f64> { vec![10.0 * x[0]] };
        let sd_bad = StateDep { f: &steep, lipschitz: 0.1, envelope_sup: 1.0, w_slope: 1.0 };
        let p_lie = ProblemSpec::new(
            order(1.5),
            &op,
            vec![0.0],
            vec![0.0],
            Forcing::StateDependent(sd_bad),
            12,
        )
        .unwrap();
        assert!(matches!(
            solve_nonlinear_picard(&p_lie, &fam, &space, 1e-12, 10),
            Err(Error::DeclarationViolated { .. })
        ));
    }

    #[test]
    fn residual_detects_perturbations() {
        // a decaying solution keeps the scale at O(1), so a 1e-3 bump is
        // visible through the normalization
        let op = LinOperator::Diagonal { multipliers: vec![-0.3], grid: None };
        let fam = build_recurrence(&op, order(1.5), 16).unwrap();
        let p = ProblemSpec::new(order(1.5), &op, vec![1.0], vec![0.4], Forcing::None, 16)
            .unwrap();
        let mut u = solve_homogeneous(&p, &fam).unwrap();
        assert!(residual(&u, &p).unwrap() <= 1e-11);
        u.state_mut(7)[0] += 1e-3;
        assert!(residual(&u, &p).unwrap() > 1e-4);
    }

    #[test]
    fn shifted_reformulation_scalar_and_grid() {
        // scalar, γ = 0: T = b/(2+b)
        let b = 0.7;
        let t = reformulate_shifted(&LinOperator::scalar(b), 0.0).unwrap();
        assert_relative_eq!(t.materialize().get(0, 0), b / (2.0 + b), max_relative = 1e-13);
        // multiplication operator 2(1/(1+x) - (1+γ)) on a [π, 2π] grid
        // reformulates to multiplication by -x, independent of γ
        let gamma = 0.5;
        let d = 40;
        let (a, bb) = (core::f64::consts::PI, 2.0 * core::f64::consts::PI);
        let grid: Vec<f64> =
            (1..=d).map(|i| a + (bb - a) * i as f64 / (d as f64 + 1.0)).collect();
        let mults: Vec<f64> =
            grid.iter().map(|x| 2.0 * (1.0 / (1.0 + x) - (1.0 + gamma))).collect();
        let b_op = LinOperator::Diagonal { multipliers: mults, grid: Some(grid.clone()) };
        let t = reformulate_shifted(&b_op, gamma).unwrap();
        let tm = t.materialize();
        for (i, x) in grid.iter().enumerate() {
            for j in 0..d {
                let want = if i == j { -x } else { 0.0 };
                assert!(
                    (tm.get(i, j) - want).abs() <= 1e-10 * x.abs().max(1.0),
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn delayed_reformulation_scalar_cases() {
        let b = 0.4;
        let t = reformulate_delayed(&LinOperator::scalar(b)).unwrap();
        assert_relative_eq!(t.materialize().get(0, 0), -b / (1.0 - b), max_relative = 1e-13);
        let t0 = reformulate_delayed(&LinOperator::zero(3)).unwrap();
        assert_eq!(t0.materialize().max_abs(), 0.0);
    }

    #[test]
    fn delayed_reformulation_solution_satisfies_original() {
        // Δ²u = B u(n) + g(n+1): solve the reformulated canonical problem
        // and check the original equation directly
        let mults = vec![0.3, -0.5, 0.1];
        let b_op = LinOperator::Diagonal { multipliers: mults.clone(), grid: None };
        let t_op = reformulate_delayed(&b_op).unwrap();
        let horizon = 20;
        let mut rng = XorShift::new(15);
        let g_seq: Vec<f64> = rng.vector(3 * (horizon + 1));
        let g = VecSeq::from_flat(3, g_seq).unwrap();
        let g_ref = &g;
        let t_ref = &t_op;
        // canonical forcing: f(n, x) = -2T u(n+1) + (I-T) g(n+1) needs
        // u(n+1), which the mild recursion does not provide; instead solve
        // the delayed problem directly by second differences and compare
        // against the canonical residual identity T u(n+2) - 2T u(n+1) +
        // (I-T) g(n+1). Forward recursion on the original form:
        let mut u = VecSeq::zeros(3, horizon);
        for n in 0..=horizon - 2 {
            let bu = b_op.apply(u.state(n)).unwrap();
            let up1 = u.state(n + 1).to_vec();
            let un = u.state(n).to_vec();
            let state = u.state_mut(n + 2);
            for i in 0..3 {
                state[i] = 2.0 * up1[i] - un[i] + bu[i] + g.state(n + 1)[i];
            }
        }
        // canonical-form residual: Δ²u(n) - T u(n+2) + 2T u(n+1) - (I-T) g(n+1)
        let mut worst = 0.0f64;
        for n in 0..=horizon - 2 {
            let d2: Vec<f64> = (0..3)
                .map(|i| u.state(n + 2)[i] - 2.0 * u.state(n + 1)[i] + u.state(n)[i])
                .collect();
            let tu2 = t_ref.apply(u.state(n + 2)).unwrap();
            let tu1 = t_ref.apply(u.state(n + 1)).unwrap();
            let tg = t_ref.apply(g_ref.state(n + 1)).unwrap();
            for i in 0..3 {
                let r = d2[i] - tu2[i] + 2.0 * tu1[i] - (g.state(n + 1)[i] - tg[i]);
                worst = worst.max(r.abs());
            }
        }
        assert!(worst <= 1e-9 * u.sup_norm().max(1.0), "canonical residual {worst}");
    }

    #[test]
    fn hypothesis_report_products() {
        let op = LinOperator::scalar(0.2);
        let fam = build_recurrence(&op, order(1.5), 10).unwrap();
        let space = admissibility(&WeightKind::NFactorial, 10).unwrap();
        let f = |_n: usize, x: &[f64]| -> Vec<f64> { vec![0.01 * x[0]] };
        let sd = StateDep { f: &f, lipschitz: 0.01, envelope_sup: 1.0, w_slope: 0.5 };
        let rep = hypothesis_report(&sd, &fam, &space);
        assert_relative_eq!(
            rep.contraction_product,
            0.01 * fam.sup_norm() / 18.0,
            max_relative = 1e-12
        );
        assert!(rep.contraction_ok, "product {}", rep.contraction_product);
    }
}
