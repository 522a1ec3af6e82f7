//! Elements of the cyclotomic field Q(zeta_n), stored modulo the n-th
//! cyclotomic polynomial.

use num_traits::{One, Zero};

use crate::linalg::{q, Q};

fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Remainder of `a` modulo a monic polynomial `m`.
fn poly_rem(a: &[Q], m: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = r.len() - dm;
        for (i, c) in m[..dm].iter().enumerate() {
            r[shift + i] -= &lead * c;
        }
    }
    r.resize(dm, Q::zero());
    r
}

fn poly_div_exact(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut qt = vec![Q::zero(); a.len() - db];
    for k in (0..qt.len()).rev() {
        let c = &r[k + db] / &lb;
        for (i, x) in b.iter().enumerate() {
            r[k + i] -= &c * x;
        }
        qt[k] = c;
    }
    assert!(r.iter().all(|x| x.is_zero()));
    qt
}

/// Coefficients of the n-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(n: usize) -> Vec<Q> {
    let mut p = vec![q(-1)];
    p.resize(n + 1, Q::zero());
    p[n] = q(1);
    for d in 1..n {
        if n.is_multiple_of(d) {
            let pd = cyclotomic_poly(d);
            p = poly_div_exact(&p, &pd);
        }
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cyc {
    pub n: usize,
    pub c: Vec<Q>,
}

impl Cyc {
    pub fn zero(n: usize) -> Self {
        let d = cyclotomic_poly(n).len() - 1;
        Cyc { n, c: vec![Q::zero(); d] }
    }

    pub fn from_q(n: usize, x: Q) -> Self {
        let mut z = Cyc::zero(n);
        z.c[0] = x;
        z
    }

    /// `zeta_n^k`
    pub fn zeta_pow(n: usize, k: i64) -> Self {
        let e = k.rem_euclid(n as i64) as usize;
        let mut a = vec![Q::zero(); e + 1];
        a[e] = Q::one();
        Cyc { n, c: poly_rem(&a, &cyclotomic_poly(n)) }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Cyc) -> Cyc {
        Cyc { n: self.n, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn mul(&self, o: &Cyc) -> Cyc {
        Cyc { n: self.n, c: poly_rem(&poly_mul(&self.c, &o.c), &cyclotomic_poly(self.n)) }
    }

    pub fn scale(&self, x: &Q) -> Cyc {
        Cyc { n: self.n, c: self.c.iter().map(|a| a * x).collect() }
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }
}

/// Sparse vector with cyclotomic coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycVec {
    pub n: usize,
    pub entries: std::collections::BTreeMap<usize, Cyc>,
}

impl CycVec {
    pub fn new(n: usize) -> Self {
        CycVec { n, entries: Default::default() }
    }

    pub fn add_term(&mut self, i: usize, c: &Cyc) {
        let n = self.n;
        let e = self.entries.entry(i).or_insert_with(|| Cyc::zero(n));
        *e = e.add(c);
        if e.is_zero() {
            self.entries.remove(&i);
        }
    }

    pub fn from_rational(n: usize, v: &crate::linalg::SVec) -> Self {
        let mut out = CycVec::new(n);
        for (i, x) in v.iter() {
            out.add_term(*i, &Cyc::from_q(n, x.clone()));
        }
        out
    }

    pub fn scale(&self, c: &Cyc) -> CycVec {
        let mut out = CycVec::new(self.n);
        for (i, x) in &self.entries {
            out.add_term(*i, &x.mul(c));
        }
        out
    }

    pub fn add(&self, o: &CycVec) -> CycVec {
        let mut out = self.clone();
        for (i, x) in &o.entries {
            out.add_term(*i, x);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Applies a rational linear map given on basis vectors.
    pub fn map_linear(&self, f: impl Fn(usize) -> crate::linalg::SVec) -> CycVec {
        let mut out = CycVec::new(self.n);
        for (i, x) in &self.entries {
            for (j, y) in f(*i).iter() {
                out.add_term(*j, &x.scale(y));
            }
        }
        out
    }

    /// Bilinear extension of a rational bilinear map on basis vectors.
    pub fn bilinear(&self, o: &CycVec, f: impl Fn(usize, usize) -> crate::linalg::SVec) -> CycVec {
        let mut out = CycVec::new(self.n);
        for (i, x) in &self.entries {
            for (j, y) in &o.entries {
                let xy = x.mul(y);
                for (k, z) in f(*i, *j).iter() {
                    out.add_term(*k, &xy.scale(z));
                }
            }
        }
        out
    }

    pub fn as_rational(&self) -> Option<crate::linalg::SVec> {
        let mut out = Vec::new();
        for (i, x) in &self.entries {
            out.push((*i, x.as_rational()?));
        }
        Some(crate::linalg::SVec(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![q(-1), q(1)]);
        assert_eq!(cyclotomic_poly(3), vec![q(1), q(1), q(1)]);
        assert_eq!(cyclotomic_poly(4), vec![q(1), q(0), q(1)]);
        assert_eq!(cyclotomic_poly(6), vec![q(1), q(-1), q(1)]);
    }

    #[test]
    fn zeta_has_order_n() {
        for n in 1..9 {
            let z = Cyc::zeta_pow(n, 1);
            let mut p = Cyc::from_q(n, q(1));
            for _ in 0..n {
                p = p.mul(&z);
            }
            assert_eq!(p, Cyc::from_q(n, q(1)));
            let mut s = Cyc::zero(n);
            for k in 0..n as i64 {
                s = s.add(&Cyc::zeta_pow(n, k));
            }
            if n > 1 {
                assert!(s.is_zero());
            }
        }
    }
}
