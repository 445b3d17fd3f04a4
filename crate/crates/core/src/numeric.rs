//! Compensated accumulation helpers shared by every kernel.
//!
//! All sums go through Neumaier's variant of Kahan summation and visit their
//! inputs in index order, so results depend only on the input values.

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Arithmetic mean; NaN for an empty input.
pub fn mean(values: &[f64]) -> f64 {
    sum(values.iter().copied()) / values.len() as f64
}

/// Two-pass mean and variance with divisor `len - ddof`.
pub fn mean_var(values: &[f64], ddof: usize) -> (f64, f64) {
    let m = mean(values);
    let ss = sum(values.iter().map(|&x| (x - m) * (x - m)));
    (m, ss / (values.len() - ddof) as f64)
}

/// Linear-interpolation quantile on sorted data (R's type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Interquartile range with type-7 quartiles.
pub fn iqr(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut values = vec![1e16];
        values.extend(std::iter::repeat(1.0).take(1000));
        values.push(-1e16);
        assert_eq!(sum(values.iter().copied()), 1000.0);
    }

    #[test]
    fn type7_quartiles() {
        // R: quantile(c(1,2,3,4), c(.25,.75)) -> 1.75 3.25
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_eq!(quantile_sorted(&s, 0.75), 3.25);
        assert_eq!(iqr(&[4.0, 1.0, 3.0, 2.0]), 1.5);
        assert_eq!(iqr(&[7.0]), 0.0);
    }

    #[test]
    fn two_point_variance() {
        assert_eq!(mean_var(&[1.0, 3.0], 1), (2.0, 2.0));
    }
}
