use std::cmp::Ordering;

/// Error-free `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Exact sum of finite `f64` values kept as a non-overlapping expansion
/// (components in increasing magnitude).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    parts: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if x == 0.0 {
            return;
        }
        let mut q = x;
        let mut w = 0;
        for i in 0..self.parts.len() {
            let (s, e) = two_sum(q, self.parts[i]);
            if e != 0.0 {
                self.parts[w] = e;
                w += 1;
            }
            q = s;
        }
        self.parts.truncate(w);
        if q != 0.0 {
            self.parts.push(q);
        }
    }

    pub fn add_sum(&mut self, other: &Self) {
        for &p in &other.parts {
            self.add(p);
        }
    }

    pub fn sub_sum(&mut self, other: &Self) {
        for &p in &other.parts {
            self.add(-p);
        }
    }

    /// Nearest-ish `f64`; carries the exact sign.
    pub fn value(&self) -> f64 {
        self.parts.iter().sum()
    }

    pub fn signum(&self) -> Ordering {
        match self.parts.last() {
            None => Ordering::Equal,
            Some(&v) if v > 0.0 => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// Exact comparison of two sums.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        let mut d = self.clone();
        d.sub_sum(other);
        d.signum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catastrophic_cancellation_is_exact() {
        let mut s = ExactSum::new();
        for x in [1e100, 1.0, -1e100, 1e-30] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0 + 1e-30);
        assert_eq!(s.signum(), Ordering::Greater);
        let mut z = ExactSum::new();
        z.add(0.1);
        z.add(-0.1);
        assert_eq!(z.signum(), Ordering::Equal);
    }

    proptest! {
        #[test]
        fn split_sums_compare_equal(xs in prop::collection::vec(0.0f64..1e3, 1..200), mask in prop::collection::vec(any::<bool>(), 200)) {
            let mut all = ExactSum::new();
            let mut a = ExactSum::new();
            let mut b = ExactSum::new();
            for (i, &x) in xs.iter().enumerate() {
                all.add(x);
                if mask[i] { a.add(x) } else { b.add(x) }
            }
            a.add_sum(&b);
            prop_assert_eq!(a.cmp_exact(&all), Ordering::Equal);
        }
    }
}
