use super::real::Real;

/// Pascal triangle up to a fixed row, stored in the evaluation scalar so that
/// rows beyond 2^53 stay exact in the double-double path.
#[derive(Clone, Debug)]
pub struct BinomialTable<T: Real> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> BinomialTable<T> {
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![T::one()]);
        for n in 1..=max_n {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(T::one());
            for k in 1..n {
                row.push(prev[k - 1] + prev[k]);
            }
            row.push(T::one());
            rows.push(row);
        }
        Self { rows }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> T {
        self.rows[n][k]
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }
}

/// ln(n!) by direct summation; exact enough for the orders used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Multinomial coefficient a! / (b! c! d! (a-b-c-d)!).
pub fn multinomial3(a: usize, b: usize, c: usize, d: usize) -> f64 {
    assert!(b + c + d <= a);
    (ln_factorial(a) - ln_factorial(b) - ln_factorial(c) - ln_factorial(d) - ln_factorial(a - b - c - d)).exp().round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::DoubleDouble;

    #[test]
    fn pascal_rows() {
        let t = BinomialTable::<f64>::new(10);
        assert_eq!(t.get(10, 3), 120.0);
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(7, 7), 1.0);
    }

    #[test]
    fn wide_rows_exact_in_double_double() {
        let t = BinomialTable::<DoubleDouble>::new(70);
        // C(70,35) = 112186277816662845432
        let v = t.get(70, 35);
        let exact_hi = 112186277816662845432f64;
        assert!((v.to_f64() - exact_hi).abs() / exact_hi < 1e-15);
        // row sums are powers of two
        let mut s = DoubleDouble::zero();
        for k in 0..=70 {
            s += t.get(70, k);
        }
        assert_eq!(s.hi, 2f64.powi(70));
        assert_eq!(s.lo, 0.0);
    }

    #[test]
    fn multinomial_small() {
        assert_eq!(multinomial3(4, 1, 1, 1), 24.0);
        assert_eq!(multinomial3(5, 2, 0, 1), 30.0);
    }
}
