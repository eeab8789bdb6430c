//! Scalar sequence calculus: Cesàro kernels, finite convolution, partial
//! Z-transforms, forward differences, and the Mittag-Leffler function.
//!
//! The Cesàro kernel
//!
//! ```text
//! k^β(n) = Γ(β + n) / (Γ(β) Γ(n + 1))
//! ```
//!
//! is the discrete analogue of the Riemann–Liouville kernel
//! `t^{β-1}/Γ(β)`; it satisfies the semigroup property
//! `k^α * k^β = k^{α+β}` under finite convolution and generates
//! `Σ k^α(n) z^n = (1 - z)^{-α}`. Everything downstream (fractional sums
//! and differences, resolvent families) is built from it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// A fractional order α > 0 together with its ceiling `m` and the gap
/// `m - α ∈ [0, 1)`. The solver stack fixes `1 < α ≤ 2`, i.e. `m = 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder {
    alpha: f64,
    ceiling: u32,
    gap: f64,
}

impl FracOrder {
    /// Any positive order. For integer α the ceiling equals α itself.
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain("fractional order must be positive and finite"));
        }
        let ceiling = math::ceil(alpha) as u32;
        Ok(FracOrder {
            alpha,
            ceiling,
            gap: ceiling as f64 - alpha,
        })
    }

    /// An order admissible for the second-order solver stack: 1 < α ≤ 2.
    pub fn solver_order(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::Domain("solver order must satisfy 1 < alpha <= 2"));
        }
        FracOrder::new(alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Smallest integer m ≥ α.
    pub fn ceiling(&self) -> u32 {
        self.ceiling
    }

    /// m - α, in [0, 1); zero exactly when α is an integer.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn is_integer(&self) -> bool {
        self.gap == 0.0
    }
}

/// A finite real sequence indexed 0..=N. All entries are finite; operations
/// that shrink the horizon return shorter sequences instead of padding.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSeq {
    values: Vec<f64>,
}

impl ScalarSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("a sequence needs at least one entry"));
        }
        if let Some(i) = math::all_finite(&values) {
            return Err(Error::NonFinite { context: "sequence entry", index: i });
        }
        Ok(ScalarSeq { values })
    }

    /// The constant sequence c, c, ..., c on 0..=horizon.
    pub fn constant(c: f64, horizon: usize) -> Self {
        ScalarSeq { values: vec![c; horizon + 1] }
    }

    /// The convolution identity (1, 0, 0, ...) on 0..=horizon.
    pub fn delta0(horizon: usize) -> Self {
        let mut values = vec![0.0; horizon + 1];
        values[0] = 1.0;
        ScalarSeq { values }
    }

    /// Largest index, i.e. `len - 1`.
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl core::ops::Index<usize> for ScalarSeq {
    type Output = f64;

    fn index(&self, n: usize) -> &f64 {
        &self.values[n]
    }
}

/// The Cesàro kernel k^β on 0..=horizon, for β in (-1, 0) ∪ (0, ∞).
///
/// Evaluated by the multiplicative recurrence
/// `k^β(0) = 1, k^β(n+1) = k^β(n) (β + n)/(n + 1)`, which is an exact
/// rearrangement of the Gamma quotient and avoids Gamma overflow for large
/// n. Negative β in (-1, 0) are admitted (the recurrence stays valid since
/// β + n > 0 from n = 1 on); those kernels appear as fractional differences
/// of positive-order kernels.
pub fn cesaro_kernel(beta: f64, horizon: usize) -> Result<ScalarSeq> {
    if !beta.is_finite() || beta == 0.0 || beta <= -1.0 {
        return Err(Error::Domain("kernel order must lie in (-1, 0) or (0, inf)"));
    }
    let mut values = Vec::with_capacity(horizon + 1);
    values.push(1.0);
    let mut k = 1.0;
    for n in 0..horizon {
        // multiply before dividing: keeps integer-order kernels exact
        k = k * (beta + n as f64) / (n as f64 + 1.0);
        values.push(k);
    }
    if let Some(i) = math::all_finite(&values) {
        return Err(Error::NonFinite { context: "cesaro kernel", index: i });
    }
    Ok(ScalarSeq { values })
}

/// Finite (Cauchy) convolution `(u * v)(n) = Σ_{j=0}^n u(n-j) v(j)` on the
/// shared horizon. Mismatched horizons are an error, not zero-padding.
pub fn conv(u: &ScalarSeq, v: &ScalarSeq) -> Result<ScalarSeq> {
    if u.horizon() != v.horizon() {
        return Err(Error::HorizonMismatch { expected: u.horizon(), got: v.horizon() });
    }
    let n = u.horizon();
    let mut out = vec![0.0; n + 1];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += u.values[i - j] * v.values[j];
        }
        *o = acc;
    }
    ScalarSeq::new(out)
}

/// Partial Z-transform `Σ_{j=0}^{J} z^{-j} u(j)`.
///
/// A verification functional only: it is evaluated where the underlying
/// series converges and is never used as an inversion device.
pub fn ztrans_partial(u: &ScalarSeq, z: Complex64, truncation: usize) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("z-transform is undefined at z = 0"));
    }
    if truncation > u.horizon() {
        return Err(Error::HorizonTooShort { needed: truncation, got: u.horizon() });
    }
    let w = Complex64::new(1.0, 0.0) / z;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=truncation {
        acc += pow * u.values[j];
        pow *= w;
    }
    Ok(acc)
}

/// m-th forward difference `Δ^m u(n) = Σ_j C(m,j) (-1)^{m-j} u(n+j)` on the
/// shrunk horizon 0..=N-m. `Δ^0` is the identity.
pub fn forward_diff(u: &ScalarSeq, m: u32) -> Result<ScalarSeq> {
    if m == 0 {
        return Ok(u.clone());
    }
    let n = u.horizon();
    if n < m as usize {
        return Err(Error::HorizonTooShort { needed: m as usize, got: n });
    }
    let signs: Vec<f64> = (0..=m)
        .map(|j| {
            let c = math::binomial(m, j);
            if (m - j) % 2 == 0 { c } else { -c }
        })
        .collect();
    let mut out = vec![0.0; n - m as usize + 1];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, s) in signs.iter().enumerate() {
            acc += s * u.values[i + j];
        }
        *o = acc;
    }
    ScalarSeq::new(out)
}

/// Largest |z| accepted by the Mittag-Leffler series here. Enough for every
/// subordination use in this crate, which only needs |λ| < 1 arguments.
pub const MITTAG_LEFFLER_MAX_ARG: f64 = 50.0;

const ML_TERM_CAP: usize = 10_000;

/// The two-parameter Mittag-Leffler function
/// `E_{a,b}(z) = Σ_k z^k / Γ(a k + b)` for real z with |z| ≤ 50.
///
/// Terms are formed in the log domain and summed until the next term drops
/// below `1e-17 (1 + |partial sum|)`. For strongly negative arguments the
/// alternating series loses digits to cancellation; see the tests for the
/// measured envelope.
pub fn mittag_leffler(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain("mittag-leffler parameters must be positive"));
    }
    if !z.is_finite() || z.abs() > MITTAG_LEFFLER_MAX_ARG {
        return Err(Error::Domain("mittag-leffler argument restricted to |z| <= 50"));
    }
    if z == 0.0 {
        return Ok(math::exp(-math::lgamma(b)));
    }
    let ln_abs_z = math::ln(z.abs());
    let mut sum = 0.0;
    for k in 0..ML_TERM_CAP {
        let mut term = math::exp(k as f64 * ln_abs_z - math::lgamma(a * k as f64 + b));
        if z < 0.0 && k % 2 == 1 {
            term = -term;
        }
        sum += term;
        if term.abs() < 1e-17 * (1.0 + sum.abs()) && k > 2 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence { context: "mittag-leffler series", limit: ML_TERM_CAP })
}
