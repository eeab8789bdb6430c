//! Fractional sums and fractional differences of vector-valued sequences.
//!
//! For a sequence `u : {0..N} -> R^d` and order α > 0,
//!
//! * the fractional sum is the kernel convolution
//!   `Δ^{-α} u(n) = (k^α * u)(n)` on the same horizon;
//! * the Riemann–Liouville difference of order 1 < α < 2 is
//!   `Δ^α u(n) = Δ²(k^{2-α} * u)(n)`, consuming the two trailing indices;
//! * the Caputo difference swaps the order of the two steps,
//!   `(k^{2-α} * Δ²u)(n)`.
//!
//! Order α = 2 is dispatched to the exact binomial second difference in
//! both cases, avoiding the degenerate order-zero kernel. Every operation
//! acts componentwise and returns explicit shorter horizons rather than
//! padding.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{self, FracOrder, ScalarSeq};
use crate::math;

/// A finite sequence of states in R^d, indexed 0..=N, stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct VecSeq {
    dim: usize,
    data: Vec<f64>,
}

impl VecSeq {
    /// The zero sequence with `horizon + 1` states of dimension `dim`.
    pub fn zeros(dim: usize, horizon: usize) -> Self {
        VecSeq { dim, data: vec![0.0; dim * (horizon + 1)] }
    }

    /// Builds from flat data laid out state by state.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::DimMismatch { expected: dim.max(1), got: data.len() });
        }
        if let Some(i) = math::all_finite(&data) {
            return Err(Error::NonFinite { context: "state entry", index: i });
        }
        Ok(VecSeq { dim, data })
    }

    /// A dimension-one sequence from a scalar one.
    pub fn from_scalar(u: &ScalarSeq) -> Self {
        VecSeq { dim: 1, data: u.values().to_vec() }
    }

    /// The rank-one sequence n ↦ u(n)·x from a scalar profile and a fixed
    /// vector.
    pub fn outer(u: &ScalarSeq, x: &[f64]) -> Self {
        let mut data = Vec::with_capacity(u.values().len() * x.len());
        for &c in u.values() {
            data.extend(x.iter().map(|v| c * v));
        }
        VecSeq { dim: x.len(), data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.data.len() / self.dim - 1
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn state_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.dim..(n + 1) * self.dim]
    }

    /// Extracts component `c` as a scalar sequence.
    pub fn component(&self, c: usize) -> ScalarSeq {
        let vals: Vec<f64> = (0..=self.horizon()).map(|n| self.state(n)[c]).collect();
        ScalarSeq::new(vals).expect("finite by construction")
    }

    /// Collapses a dimension-one sequence back to scalars.
    pub fn to_scalar(&self) -> Result<ScalarSeq> {
        if self.dim != 1 {
            return Err(Error::DimMismatch { expected: 1, got: self.dim });
        }
        ScalarSeq::new(self.data.clone())
    }

    /// Euclidean norm of the state at n.
    pub fn state_norm(&self, n: usize) -> f64 {
        math::sqrt(self.state(n).iter().map(|x| x * x).sum())
    }

    /// Max over n of the Euclidean state norms.
    pub fn sup_norm(&self) -> f64 {
        (0..=self.horizon()).map(|n| self.state_norm(n)).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        math::all_finite(&self.data).is_none()
    }
}

/// Kernel convolution of a scalar weight against a vector sequence,
/// truncated to `out_horizon`.
fn weighted_conv(weights: &ScalarSeq, u: &VecSeq, out_horizon: usize) -> VecSeq {
    let d = u.dim();
    let mut out = VecSeq::zeros(d, out_horizon);
    for n in 0..=out_horizon {
        let acc = out.state_mut(n);
        for j in 0..=n {
            let w = weights[n - j];
            if w == 0.0 {
                continue;
            }
            let uj = &u.data[j * d..(j + 1) * d];
            for (a, v) in acc.iter_mut().zip(uj.iter()) {
                *a += w * v;
            }
        }
    }
    out
}

/// The α-th fractional sum `Δ^{-α} u(n) = Σ_{j≤n} k^α(n-j) u(j)` on the full
/// horizon, componentwise.
pub fn frac_sum(order: f64, u: &VecSeq) -> Result<VecSeq> {
    if !(order > 0.0) {
        return Err(Error::Domain("fractional sum order must be positive"));
    }
    let n = u.horizon();
    let k = kernels::cesaro_kernel(order, n)?;
    let out = weighted_conv(&k, u, n);
    if !out.is_finite() {
        return Err(Error::NonFinite { context: "fractional sum", index: 0 });
    }
    Ok(out)
}

/// m-th forward difference of a vector sequence, horizon N-m.
pub fn forward_diff_vec(u: &VecSeq, m: u32) -> Result<VecSeq> {
    if m == 0 {
        return Ok(u.clone());
    }
    let n = u.horizon();
    if n < m as usize {
        return Err(Error::HorizonTooShort { needed: m as usize, got: n });
    }
    let d = u.dim();
    let signs: Vec<f64> = (0..=m)
        .map(|j| {
            let c = math::binomial(m, j);
            if (m - j) % 2 == 0 { c } else { -c }
        })
        .collect();
    let mut out = VecSeq::zeros(d, n - m as usize);
    for i in 0..=(n - m as usize) {
        let acc = out.state_mut(i);
        for (j, s) in signs.iter().enumerate() {
            let uj = &u.data[(i + j) * d..(i + j + 1) * d];
            for (a, v) in acc.iter_mut().zip(uj.iter()) {
                *a += s * v;
            }
        }
    }
    Ok(out)
}

fn require_second_order(order: FracOrder) -> Result<()> {
    if !(order.alpha() > 1.0 && order.alpha() <= 2.0) {
        return Err(Error::Domain("fractional difference implemented for 1 < alpha <= 2"));
    }
    Ok(())
}

/// Riemann–Liouville fractional difference `Δ^α u = Δ²(k^{2-α} * u)`,
/// horizon N-2. Integer order α = 2 uses the binomial formula directly.
pub fn rl_diff(order: FracOrder, u: &VecSeq) -> Result<VecSeq> {
    require_second_order(order)?;
    if u.horizon() < 2 {
        return Err(Error::HorizonTooShort { needed: 2, got: u.horizon() });
    }
    if order.is_integer() {
        return forward_diff_vec(u, 2);
    }
    let summed = frac_sum(order.gap(), u)?;
    forward_diff_vec(&summed, 2)
}

/// Caputo fractional difference `(k^{2-α} * Δ²u)(n)`, horizon N-2. Integer
/// order α = 2 again reduces to the binomial formula.
pub fn caputo_diff(order: FracOrder, u: &VecSeq) -> Result<VecSeq> {
    require_second_order(order)?;
    if u.horizon() < 2 {
        return Err(Error::HorizonTooShort { needed: 2, got: u.horizon() });
    }
    let second = forward_diff_vec(u, 2)?;
    if order.is_integer() {
        return Ok(second);
    }
    frac_sum(order.gap(), &second)
}

/// The fractional difference of a convolution, evaluated through the
/// identity
///
/// ```text
/// Δ^α(u*v)(n) = (Δ^α u * v)(n) + (u(1) - α u(0)) v(n+1) + u(0) v(n+2)
/// ```
///
/// This is deliberately a second evaluation path: it exists so that callers
/// can cross-validate it against `rl_diff` applied to the convolution
/// itself.
pub fn rl_diff_of_conv(order: FracOrder, u: &ScalarSeq, v: &VecSeq) -> Result<VecSeq> {
    require_second_order(order)?;
    let n = u.horizon();
    if v.horizon() != n {
        return Err(Error::HorizonMismatch { expected: n, got: v.horizon() });
    }
    if n < 4 {
        return Err(Error::HorizonTooShort { needed: 4, got: n });
    }
    let du = rl_diff(order, &VecSeq::from_scalar(u))?.to_scalar()?;
    let d = v.dim();
    let out_h = n - 2;
    let mut out = weighted_conv(&du, v, out_h);
    let alpha = order.alpha();
    let c1 = u[1] - alpha * u[0];
    let c0 = u[0];
    for i in 0..=out_h {
        let v1 = v.state(i + 1).to_vec();
        let v2 = v.state(i + 2).to_vec();
        let acc = out.state_mut(i);
        for j in 0..d {
            acc[j] += c1 * v1[j] + c0 * v2[j];
        }
    }
    Ok(out)
}

/// Convenience wrappers for scalar sequences.
pub fn frac_sum_scalar(order: f64, u: &ScalarSeq) -> Result<ScalarSeq> {
    frac_sum(order, &VecSeq::from_scalar(u))?.to_scalar()
}

pub fn rl_diff_scalar(order: FracOrder, u: &ScalarSeq) -> Result<ScalarSeq> {
    rl_diff(order, &VecSeq::from_scalar(u))?.to_scalar()
}

pub fn caputo_diff_scalar(order: FracOrder, u: &ScalarSeq) -> Result<ScalarSeq> {
    caputo_diff(order, &VecSeq::from_scalar(u))?.to_scalar()
}
