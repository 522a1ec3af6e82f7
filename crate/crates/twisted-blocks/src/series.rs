//! Laurent polynomials and truncated power series over Q in one variable.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::linalg::{q, Q};

/// Finite Laurent polynomial `sum c_k t^k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Laurent(pub BTreeMap<i64, Q>);

impl Laurent {
    pub fn monomial(k: i64, c: Q) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(k, c);
        }
        Laurent(m)
    }

    pub fn coeff(&self, k: i64) -> Q {
        self.0.get(&k).cloned().unwrap_or_else(Q::zero)
    }

    fn push(&mut self, k: i64, c: Q) {
        let e = self.0.entry(k).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (k, c) in &o.0 {
            out.push(*k, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Laurent {
        let mut out = Laurent::default();
        for (k, x) in &self.0 {
            out.push(*k, x * c);
        }
        out
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut out = Laurent::default();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                out.push(a + b, x * y);
            }
        }
        out
    }

    pub fn shift(&self, k: i64) -> Laurent {
        Laurent(self.0.iter().map(|(a, c)| (a + k, c.clone())).collect())
    }

    /// `t d/dt`
    pub fn euler(&self) -> Laurent {
        let mut out = Laurent::default();
        for (k, c) in &self.0 {
            out.push(*k, c * q(*k));
        }
        out
    }

    /// Coefficient of `t^{-1}`.
    pub fn residue(&self) -> Q {
        self.coeff(-1)
    }
}

/// Power series `sum_{k < n} c_k t^k` truncated at order `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    pub c: Vec<Q>,
}

impl PowerSeries {
    pub fn zero(n: usize) -> Self {
        PowerSeries { c: vec![Q::zero(); n] }
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    pub fn from_laurent(p: &Laurent, n: usize) -> Self {
        let mut s = Self::zero(n);
        for (k, c) in &p.0 {
            assert!(*k >= 0, "negative power in a power series");
            if (*k as usize) < n {
                s.c[*k as usize] = c.clone();
            }
        }
        s
    }

    pub fn add(&self, o: &PowerSeries) -> PowerSeries {
        PowerSeries { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, x: &Q) -> PowerSeries {
        PowerSeries { c: self.c.iter().map(|a| a * x).collect() }
    }

    pub fn mul(&self, o: &PowerSeries) -> PowerSeries {
        let n = self.order();
        let mut out = Self::zero(n);
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                out.c[i + j] += a * b;
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> PowerSeries {
        let mut out = Self::zero(self.order());
        out.c[0] = Q::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `self(g(t))` for `g` without constant term.
    pub fn compose(&self, g: &PowerSeries) -> PowerSeries {
        assert!(g.c[0].is_zero());
        let n = self.order();
        let mut out = Self::zero(n);
        let mut gp = Self::zero(n);
        gp.c[0] = Q::one();
        for a in &self.c {
            out = out.add(&gp.scale(a));
            gp = gp.mul(g);
        }
        out
    }

    pub fn derivative(&self) -> PowerSeries {
        let n = self.order();
        let mut out = Self::zero(n);
        for k in 1..n {
            out.c[k - 1] = &self.c[k] * q(k as i64);
        }
        out
    }

    /// Compositional inverse of a series `t + O(t^2)`.
    pub fn reversion(&self) -> PowerSeries {
        assert!(self.c[0].is_zero() && self.c[1].is_one(), "reversion needs t + O(t^2)");
        let n = self.order();
        // iterate g <- g - (f(g) - t)
        let mut g = Self::zero(n);
        g.c[1] = Q::one();
        for _ in 0..n {
            let fg = self.compose(&g);
            let mut diff = fg;
            diff.c[1] -= Q::one();
            g = g.add(&diff.scale(&-Q::one()));
        }
        g
    }
}

/// Generalized binomial coefficient `binom(n, j)` for integer `n`.
pub fn binom(n: i64, j: usize) -> Q {
    let mut r = Q::one();
    for i in 0..j as i64 {
        r = r * q(n - i) / q(i + 1);
    }
    r
}

/// Central cocycle `Res(t^{3m} A^3(t^{-1} f) t^{-1} g t^{-1} dt) / (12 m)` for vector fields
/// `f d/dt`, `g d/dt`, where `A = t^{-m}(m + t d/dt)`.
pub fn vector_field_cocycle(m: i64, f: &Laurent, g: &Laurent) -> Q {
    let a = |p: &Laurent| p.euler().add(&p.scale(&q(m))).shift(-m);
    let mut x = f.shift(-1);
    for _ in 0..3 {
        x = a(&x);
    }
    let prod = x.shift(3 * m).mul(&g.shift(-1)).shift(-1);
    prod.residue() / q(12 * m)
}

/// The vector field of `L_n`: `-(1/m) t^{mn+1} d/dt`.
pub fn virasoro_field(m: i64, n: i64) -> Laurent {
    Laurent::monomial(m * n + 1, -Q::one() / q(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qf;
    use proptest::prelude::*;

    #[test]
    fn cocycle_on_virasoro_fields() {
        for m in 1..4 {
            for n in -3..=3 {
                for k in -3..=3 {
                    let v = vector_field_cocycle(m, &virasoro_field(m, n), &virasoro_field(m, k));
                    let expect = if n + k == 0 { qf(n * n * n - n, 12) } else { Q::zero() };
                    assert_eq!(v, expect);
                }
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), q(10));
        assert_eq!(binom(-1, 3), q(-1));
        assert_eq!(binom(-2, 2), q(3));
        assert_eq!(binom(3, 4), q(0));
    }

    proptest! {
        #[test]
        fn reversion_is_inverse(a in -3i64..4, b in -3i64..4, m in 1usize..3) {
            let n = 9;
            let mut f = PowerSeries::zero(n);
            f.c[1] = Q::one();
            f.c[1 + m] = q(a);
            f.c[1 + 2 * m] = q(b);
            let g = f.reversion();
            let mut id = PowerSeries::zero(n);
            id.c[1] = Q::one();
            prop_assert_eq!(f.compose(&g), id.clone());
            prop_assert_eq!(g.compose(&f), id);
        }

        #[test]
        fn cocycle_is_antisymmetric(m in 1i64..4, a in -4i64..5, b in -4i64..5) {
            let f = Laurent::monomial(a, q(1)).add(&Laurent::monomial(a + m, q(2)));
            let g = Laurent::monomial(b, q(3));
            prop_assert_eq!(vector_field_cocycle(m, &f, &g), -vector_field_cocycle(m, &g, &f));
        }
    }
}
