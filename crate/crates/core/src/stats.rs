use serde::{Deserialize, Serialize};

/// Integer-valued sample accumulator. Sums are exact, so merging partial
/// results in any order gives identical statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub censored: u64,
}

impl Tally {
    pub fn push(&mut self, x: u64) {
        self.count += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.censored += other.censored;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        // numerator n*sum_sq - sum^2 is exact in integers
        let num = self.count as u128 * self.sum_sq - self.sum * self.sum;
        num as f64 / (n * (n - 1.0))
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}
