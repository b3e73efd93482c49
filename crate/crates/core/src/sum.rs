//! Exactly rounded floating-point summation.
//!
//! Every integral in the crate goes through [`fsum`], so results do not depend
//! on the order in which cells are visited (or on how work is split across
//! threads).

/// Correctly rounded sum of `values` (Shewchuk's partials algorithm).
pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::with_capacity(16);
    let mut special = 0.0;
    for mut x in values {
        if !x.is_finite() {
            special += x;
            continue;
        }
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if special != 0.0 || special.is_nan() {
        return special;
    }
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // round-half-even correction
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Running prefix sums where each prefix is itself exactly rounded.
pub fn prefix_fsum(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0.0);
    let mut acc = Accumulator::default();
    for &v in values {
        acc.add(v);
        out.push(acc.value());
    }
    out
}

/// Incremental version of [`fsum`].
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    partials: Vec<f64>,
}

impl Accumulator {
    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn value(&self) -> f64 {
        fsum(self.partials.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_exactly() {
        assert_eq!(fsum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(fsum([0.1; 10]), 1.0);
    }

    #[test]
    fn order_independent() {
        let v: Vec<f64> = (1..2000).map(|i| 1.0 / (i as f64).powf(1.3)).collect();
        let mut r = v.clone();
        r.reverse();
        assert_eq!(fsum(v.iter().copied()), fsum(r));
    }

    #[test]
    fn prefix_matches_fsum() {
        let v = [3.0, 1e-17, -2.5, 0.1];
        let p = prefix_fsum(&v);
        assert_eq!(p[4], fsum(v));
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn infinities_propagate() {
        assert_eq!(fsum([1.0, f64::INFINITY]), f64::INFINITY);
        assert_eq!(fsum(std::iter::empty()), 0.0);
    }
}
