//! Exact rational linear algebra on sparse vectors.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p` or `p/q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(Q::new(a, b))
    } else {
        Some(Q::from_integer(s.parse().ok()?))
    }
}

pub fn q_to_i64(x: &Q) -> Option<i64> {
    if !x.is_integer() {
        return None;
    }
    i64::try_from(x.numer()).ok()
}

/// Sparse vector: strictly increasing indices, no zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SVec(pub Vec<(usize, Q)>);

impl SVec {
    pub fn zero() -> Self {
        SVec(Vec::new())
    }

    pub fn unit(i: usize) -> Self {
        SVec(vec![(i, Q::one())])
    }

    pub fn single(i: usize, c: Q) -> Self {
        if c.is_zero() {
            SVec::zero()
        } else {
            SVec(vec![(i, c)])
        }
    }

    pub fn from_map(m: BTreeMap<usize, Q>) -> Self {
        SVec(m.into_iter().filter(|(_, c)| !c.is_zero()).collect())
    }

    pub fn from_dense(v: &[Q]) -> Self {
        SVec(
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
        )
    }

    pub fn to_dense(&self, n: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); n];
        for (i, c) in &self.0 {
            out[*i] = c.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Q {
        match self.0.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(k) => self.0[k].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Q)> {
        self.0.iter()
    }

    pub fn scale(&self, c: &Q) -> SVec {
        if c.is_zero() {
            return SVec::zero();
        }
        SVec(self.0.iter().map(|(i, x)| (*i, x * c)).collect())
    }

    pub fn neg(&self) -> SVec {
        SVec(self.0.iter().map(|(i, x)| (*i, -x)).collect())
    }

    /// self + c * other
    pub fn axpy(&self, c: &Q, other: &SVec) -> SVec {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() || b < other.0.len() {
            let ia = self.0.get(a).map(|p| p.0).unwrap_or(usize::MAX);
            let ib = other.0.get(b).map(|p| p.0).unwrap_or(usize::MAX);
            if ia < ib {
                out.push(self.0[a].clone());
                a += 1;
            } else if ib < ia {
                out.push((ib, c * &other.0[b].1));
                b += 1;
            } else {
                let v = &self.0[a].1 + c * &other.0[b].1;
                if !v.is_zero() {
                    out.push((ia, v));
                }
                a += 1;
                b += 1;
            }
        }
        SVec(out)
    }

    pub fn add(&self, other: &SVec) -> SVec {
        self.axpy(&Q::one(), other)
    }

    pub fn sub(&self, other: &SVec) -> SVec {
        self.axpy(&-Q::one(), other)
    }

    pub fn dot(&self, other: &SVec) -> Q {
        let (mut a, mut b) = (0, 0);
        let mut s = Q::zero();
        while a < self.0.len() && b < other.0.len() {
            let (ia, ib) = (self.0[a].0, other.0[b].0);
            if ia < ib {
                a += 1;
            } else if ib < ia {
                b += 1;
            } else {
                s += &self.0[a].1 * &other.0[b].1;
                a += 1;
                b += 1;
            }
        }
        s
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|p| p.0)
    }
}

/// Accumulates a linear combination of sparse vectors.
#[derive(Default)]
pub struct Acc(BTreeMap<usize, Q>);

impl Acc {
    pub fn new() -> Self {
        Acc(BTreeMap::new())
    }

    pub fn add(&mut self, i: usize, c: &Q) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(i).or_insert_with(Q::zero);
        *e += c;
    }

    pub fn add_vec(&mut self, c: &Q, v: &SVec) {
        if c.is_zero() {
            return;
        }
        for (i, x) in &v.0 {
            self.add(*i, &(c * x));
        }
    }

    pub fn finish(self) -> SVec {
        SVec::from_map(self.0)
    }
}

/// Sparse matrix stored by columns: column j is the image of basis vector j.
#[derive(Clone, Debug, PartialEq)]
pub struct SMat {
    pub rows: usize,
    pub cols: Vec<SVec>,
}

impl SMat {
    pub fn zeros(rows: usize, ncols: usize) -> Self {
        SMat { rows, cols: vec![SVec::zero(); ncols] }
    }

    pub fn identity(n: usize) -> Self {
        SMat { rows: n, cols: (0..n).map(SVec::unit).collect() }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn apply(&self, v: &SVec) -> SVec {
        let mut acc = Acc::new();
        for (j, c) in &v.0 {
            acc.add_vec(c, &self.cols[*j]);
        }
        acc.finish()
    }

    /// self * other
    pub fn compose(&self, other: &SMat) -> SMat {
        assert_eq!(self.ncols(), other.rows, "dimension mismatch in compose");
        SMat { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn add(&self, other: &SMat) -> SMat {
        self.axpy(&Q::one(), other)
    }

    pub fn sub(&self, other: &SMat) -> SMat {
        self.axpy(&-Q::one(), other)
    }

    pub fn axpy(&self, c: &Q, other: &SMat) -> SMat {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.ncols(), other.ncols());
        SMat {
            rows: self.rows,
            cols: self.cols.iter().zip(&other.cols).map(|(a, b)| a.axpy(c, b)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> SMat {
        SMat { rows: self.rows, cols: self.cols.iter().map(|v| v.scale(c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    pub fn transpose(&self) -> SMat {
        let mut rows: Vec<Vec<(usize, Q)>> = vec![Vec::new(); self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, x) in &col.0 {
                rows[*i].push((j, x.clone()));
            }
        }
        SMat { rows: self.ncols(), cols: rows.into_iter().map(SVec).collect() }
    }

    pub fn entry(&self, i: usize, j: usize) -> Q {
        self.cols[j].get(i)
    }

    /// Returns `Some(c)` if the matrix is `c` times the identity.
    pub fn as_scalar(&self) -> Option<Q> {
        if self.rows != self.ncols() {
            return None;
        }
        let mut s: Option<Q> = None;
        for (j, col) in self.cols.iter().enumerate() {
            let d = col.get(j);
            if col.0.iter().any(|(i, x)| *i != j && !x.is_zero()) {
                return None;
            }
            match &s {
                None => s = Some(d),
                Some(v) if *v != d => return None,
                _ => {}
            }
        }
        Some(s.unwrap_or_else(Q::zero))
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut out = vec![vec![Q::zero(); self.ncols()]; self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, x) in &col.0 {
                out[*i][j] = x.clone();
            }
        }
        out
    }

    pub fn from_dense(m: &[Vec<Q>], ncols: usize) -> SMat {
        let rows = m.len();
        let cols = (0..ncols)
            .map(|j| SVec::from_dense(&m.iter().map(|r| r[j].clone()).collect::<Vec<_>>()))
            .collect();
        SMat { rows, cols }
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new();
        for c in &self.cols {
            e.insert(c.clone());
        }
        e.rank()
    }
}

/// Incremental row echelon form. Every stored row has its smallest index as
/// pivot with coefficient one. Optionally tracks each row as a combination of
/// caller-supplied labels.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<SVec>,
    combos: Vec<SVec>,
    pivot_row: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.pivot_row.keys().copied().collect();
        p.sort_unstable();
        p
    }

    /// Reduces `v` against the stored rows. Returns the residual and the
    /// combination of row labels that was subtracted.
    pub fn reduce_tracked(&self, v: &SVec) -> (SVec, SVec) {
        let mut cur: BTreeMap<usize, Q> = v.0.iter().cloned().collect();
        let mut used = Acc::new();
        let mut lo = 0usize;
        loop {
            let next = cur.range(lo..).find(|(i, _)| self.pivot_row.contains_key(i)).map(|(i, c)| (*i, c.clone()));
            let Some((col, c)) = next else { break };
            let r = self.pivot_row[&col];
            for (i, x) in &self.rows[r].0 {
                let e = cur.entry(*i).or_insert_with(Q::zero);
                *e -= &c * x;
                if e.is_zero() {
                    cur.remove(i);
                }
            }
            used.add_vec(&c, &self.combos[r]);
            lo = col + 1;
        }
        (SVec::from_map(cur), used.finish())
    }

    pub fn reduce(&self, v: &SVec) -> SVec {
        self.reduce_tracked(v).0
    }

    pub fn contains(&self, v: &SVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns true if it was independent of the stored rows.
    pub fn insert(&mut self, v: SVec) -> bool {
        self.insert_labeled(v, SVec::zero())
    }

    /// Inserts `v` carrying the label combination `label`.
    pub fn insert_labeled(&mut self, v: SVec, label: SVec) -> bool {
        let (res, used) = self.reduce_tracked(&v);
        if res.is_zero() {
            return false;
        }
        let combo = label.sub(&used);
        let (p, lead) = res.0[0].clone();
        let inv = lead.recip();
        self.pivot_row.insert(p, self.rows.len());
        self.rows.push(res.scale(&inv));
        self.combos.push(combo.scale(&inv));
        true
    }

    pub fn row_with_pivot(&self, p: usize) -> Option<&SVec> {
        self.pivot_row.get(&p).map(|&r| &self.rows[r])
    }

    /// If `v` lies in the span, returns its expression in the labels.
    pub fn express(&self, v: &SVec) -> Option<SVec> {
        let (res, used) = self.reduce_tracked(v);
        if res.is_zero() {
            Some(used)
        } else {
            None
        }
    }
}

/// Rank of a set of sparse vectors.
pub fn rank_of(vs: &[SVec]) -> usize {
    let mut e = Echelon::new();
    for v in vs {
        e.insert(v.clone());
    }
    e.rank()
}

/// Basis of the kernel of the map whose columns are `cols`.
pub fn kernel(cols: &[SVec]) -> Vec<SVec> {
    let mut e = Echelon::new();
    let mut out = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let (res, used) = e.reduce_tracked(c);
        if res.is_zero() {
            out.push(SVec::unit(j).sub(&used));
        } else {
            e.insert_labeled(c.clone(), SVec::unit(j));
        }
    }
    out
}

/// Inverse of a dense square matrix, or `None` if singular.
pub fn inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].recip();
        for j in 0..n {
            a[col][j] *= &p;
            inv[col][j] *= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

pub fn dense_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[t][j].is_zero() {
                    out[i][j] += &a[i][t] * &b[t][j];
                }
            }
        }
    }
    out
}

pub fn dense_transpose(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn dense_rank(a: &[Vec<Q>]) -> usize {
    let cols = dense_transpose(a);
    rank_of(&cols.iter().map(|c| SVec::from_dense(c)).collect::<Vec<_>>())
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let inv = inverse(a)?;
    Some(inv.iter().map(|r| r.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
}

pub fn gcd_q(a: &Q, b: &Q) -> Q {
    use num_integer::Integer;
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let n = a.numer().gcd(b.numer());
    let d = a.denom().lcm(b.denom());
    Q::new(n, d)
}
