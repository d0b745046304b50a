//! Compensated (Kahan-Babuska-Neumaier) accumulation.
//!
//! Estimates here can be as small as ~1e-10 while individual terms span many
//! orders of magnitude, so plain `f64` summation loses the low bits that the
//! relative-error statistics depend on.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another accumulator into this one, preserving its residual.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.compensation += other.compensation;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// First and second moment accumulator for per-sample estimator values.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentAccumulator {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    count: u64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, z: f64) {
        self.sum.add(z);
        self.sum_sq.add(z * z);
        self.count += 1;
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean of z.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum.value() / self.count as f64
        }
    }

    /// Sample mean of z^2.
    pub fn second_moment(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum_sq.value() / self.count as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        let exact = 1e-16 * 1_000_000_f64;
        assert!((acc.value() - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e-8).collect();
        let mut whole = MomentAccumulator::new();
        for &x in &xs {
            whole.push(x);
        }
        let mut a = MomentAccumulator::new();
        let mut b = MomentAccumulator::new();
        for &x in &xs[..500] {
            a.push(x);
        }
        for &x in &xs[500..] {
            b.push(x);
        }
        a.merge(&b);
        assert_eq!(whole.count(), a.count());
        assert!((whole.mean() - a.mean()).abs() <= 1e-18);
    }
}
