use super::real::Real;

/// Neumaier-compensated running sum that also tracks Σ|term| for a
/// forward error estimate.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<T: Real> {
    sum: T,
    comp: T,
    magnitude: f64,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero(), magnitude: 0.0 }
    }

    /// Adds `term`; `term_magnitude` bounds |term| including the error
    /// already carried by the term's inputs.
    #[inline]
    pub fn add(&mut self, term: T, term_magnitude: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
        self.magnitude += term_magnitude;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }

    /// Σ of the supplied term magnitudes.
    #[inline]
    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

/// Plain Kahan–Neumaier sum over f64 values.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::<f64>::new();
    for v in values {
        acc.add(v, v.abs());
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = vals.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(neumaier_sum(vals), 2.0);
    }

    #[test]
    fn magnitude_accumulates_absolute_terms() {
        let mut s = CompensatedSum::<f64>::new();
        s.add(3.0, 3.0);
        s.add(-5.0, 5.0);
        assert_eq!(s.value(), -2.0);
        assert_eq!(s.magnitude(), 8.0);
    }
}
