//! Thin wrappers over `libm` so the crate body never depends on `std` float
//! methods, plus a couple of small numeric helpers.

#![allow(dead_code)]

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// ln Γ(x) for x > 0.
#[inline]
pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Γ(x) for x > 0, via the log to dodge intermediate overflow checks.
#[inline]
pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// x^n for integer n by repeated multiplication (n is small everywhere this
/// is used; keeps rounding behaviour obvious).
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    if n < 0 {
        return 1.0 / powi(x, -n);
    }
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Binomial coefficient C(m, j) as f64; exact for the small m used by the
/// integer difference operators.
pub(crate) fn binomial(m: u32, j: u32) -> f64 {
    if j > m {
        return 0.0;
    }
    let j = j.min(m - j);
    let mut acc = 1.0;
    for i in 0..j {
        acc = acc * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}

pub(crate) fn all_finite(xs: &[f64]) -> Option<usize> {
    xs.iter().position(|x| !x.is_finite())
}
