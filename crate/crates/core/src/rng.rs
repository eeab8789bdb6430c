//! Deterministic pseudo-random numbers for probe vectors and test data.
//!
//! Verification routines (Z-transform probes, Lipschitz spot checks) and the
//! self-test suite need reproducible "random" data without pulling an RNG
//! dependency into a `no_std` crate. This is the xorshift64* generator;
//! statistical quality is far beyond what probe vectors require.

/// xorshift64* stream.
#[derive(Clone, Debug)]
pub struct XorShift {
    state: u64,
}

impl XorShift {
    /// Creates a stream from a seed; a zero seed is remapped (the all-zero
    /// state is a fixed point of xorshift).
    pub fn new(seed: u64) -> Self {
        XorShift {
            state: if seed == 0 { 0x9e37_79b9_7f4a_7c15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// A vector with independent uniform [-1, 1) entries.
    pub fn vector(&mut self, dim: usize) -> alloc::vec::Vec<f64> {
        (0..dim).map(|_| self.uniform(-1.0, 1.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = XorShift::new(42);
        let mut b = XorShift::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut rng = XorShift::new(7);
        for _ in 0..1000 {
            let x = rng.uniform(-2.0, 3.0);
            assert!((-2.0..3.0).contains(&x));
        }
    }
}
