//! Simple Lie algebras in a Chevalley basis.
//!
//! Simple roots follow Bourbaki numbering. The Cartan matrix entry
//! `cartan[i][j]` is `<alpha_i, alpha_j^vee>`, so `[h_i, e_j] = cartan[j][i] e_j`.
//!
//! Sign convention for structure constants: positive roots are ordered by
//! height, then lexicographically on simple-root coordinates. For each
//! non-simple positive root `xi`, the extra-special pair `(r, s)` has `r`
//! minimal with `xi - r` positive, and `N_{r,s} = +(p + 1)` where `p` is the
//! largest integer with `s - p r` a root. All other constants follow from
//! `N_{-a,-b} = -N_{a,b}` and the usual quadratic relations.
//!
//! Basis layout: indices `0..P` are `e_alpha` for positive roots, `P..2P` are
//! `f_alpha = e_{-alpha}`, and `2P..2P+rank` are the coroots `h_i`.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::linalg::{q, Acc, Q, SVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Series {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Series {
    pub fn parse(s: &str) -> Result<Series> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "A" => Series::A,
            "B" => Series::B,
            "C" => Series::C,
            "D" => Series::D,
            "E" => Series::E,
            "F" => Series::F,
            "G" => Series::G,
            other => return invalid(format!("unknown series '{other}': expected one of A-G")),
        })
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Checks that `(series, rank)` names a simple type.
pub fn validate_type(series: Series, rank: usize) -> Result<()> {
    let ok = match series {
        Series::A => rank >= 1,
        Series::B => rank >= 2,
        Series::C => rank >= 3,
        Series::D => rank >= 4,
        Series::E => (6..=8).contains(&rank),
        Series::F => rank == 4,
        Series::G => rank == 2,
    };
    if ok {
        Ok(())
    } else {
        let rule = match series {
            Series::A => "A_n requires n >= 1",
            Series::B => "B_n requires n >= 2",
            Series::C => "C_n requires n >= 3",
            Series::D => "D_n requires n >= 4",
            Series::E => "E_n requires n in {6, 7, 8}",
            Series::F => "F_n requires n = 4",
            Series::G => "G_n requires n = 2",
        };
        invalid(format!("invalid type {series}{rank}: {rule}"))
    }
}

/// Inner products `(alpha_i, alpha_j)` with long roots of length 2.
pub(crate) fn root_inner_products(series: Series, n: usize) -> Vec<Vec<Q>> {
    let mut b = vec![vec![Q::zero(); n]; n];
    let link = |b: &mut Vec<Vec<Q>>, i: usize, j: usize, v: Q| {
        b[i][j] = v.clone();
        b[j][i] = v;
    };
    match series {
        Series::A => {
            for i in 0..n {
                b[i][i] = q(2);
            }
            for i in 0..n.saturating_sub(1) {
                link(&mut b, i, i + 1, q(-1));
            }
        }
        Series::B => {
            for i in 0..n {
                b[i][i] = if i == n - 1 { q(1) } else { q(2) };
            }
            for i in 0..n - 1 {
                link(&mut b, i, i + 1, q(-1));
            }
        }
        Series::C => {
            let half = Q::new(1.into(), 2.into());
            for i in 0..n {
                b[i][i] = if i == n - 1 { q(2) } else { q(1) };
            }
            for i in 0..n - 1 {
                let v = if i == n - 2 { q(-1) } else { -half.clone() };
                link(&mut b, i, i + 1, v);
            }
        }
        Series::D => {
            for i in 0..n {
                b[i][i] = q(2);
            }
            for i in 0..n - 2 {
                link(&mut b, i, i + 1, q(-1));
            }
            link(&mut b, n - 3, n - 1, q(-1));
        }
        Series::E => {
            for i in 0..n {
                b[i][i] = q(2);
            }
            link(&mut b, 0, 2, q(-1));
            link(&mut b, 1, 3, q(-1));
            for i in 2..n - 1 {
                link(&mut b, i, i + 1, q(-1));
            }
        }
        Series::F => {
            let half = Q::new(1.into(), 2.into());
            b[0][0] = q(2);
            b[1][1] = q(2);
            b[2][2] = q(1);
            b[3][3] = q(1);
            link(&mut b, 0, 1, q(-1));
            link(&mut b, 1, 2, q(-1));
            link(&mut b, 2, 3, -half);
        }
        Series::G => {
            b[0][0] = Q::new(2.into(), 3.into());
            b[1][1] = q(2);
            link(&mut b, 0, 1, q(-1));
        }
    }
    b
}

/// Cartan matrix in Bourbaki convention.
pub fn cartan_matrix(series: Series, rank: usize) -> Result<Vec<Vec<i64>>> {
    validate_type(series, rank)?;
    let b = root_inner_products(series, rank);
    Ok(cartan_from_ip(&b))
}

fn cartan_from_ip(b: &[Vec<Q>]) -> Vec<Vec<i64>> {
    let n = b.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = q(2) * &b[i][j] / &b[j][j];
                    assert!(v.is_integer());
                    i64::try_from(v.numer()).unwrap()
                })
                .collect()
        })
        .collect()
}

/// Which kind of Chevalley basis vector an index names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// root vector for the signed root with this root index
    Root(usize),
    Cartan(usize),
}

#[derive(Clone, Debug)]
pub struct SimpleLieAlgebra {
    pub series: Series,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    /// `(alpha_i, alpha_j)`, long roots of length 2.
    pub ip: Vec<Vec<Q>>,
    /// Positive roots in simple-root coordinates, ordered by height then lexicographically.
    pub positive_roots: Vec<Vec<i64>>,
    pub dual_coxeter: i64,
    pub dimension: usize,
    lookup: HashMap<Vec<i64>, usize>,
    /// `N_{a,b}` for positive root indices `a < b` with `a + b` a root.
    npos: HashMap<(usize, usize), i64>,
}

/// Element of a simple Lie algebra as a sparse vector over the Chevalley basis.
pub type LieElement = SVec;

impl SimpleLieAlgebra {
    pub fn build(series: Series, rank: usize) -> Result<Self> {
        validate_type(series, rank)?;
        let ip = root_inner_products(series, rank);
        let cartan = cartan_from_ip(&ip);
        let positive_roots = positive_roots_by_strings(&cartan);
        let mut lookup = HashMap::new();
        let p = positive_roots.len();
        for (k, r) in positive_roots.iter().enumerate() {
            lookup.insert(r.clone(), k);
            lookup.insert(r.iter().map(|x| -x).collect(), p + k);
        }
        let mut alg = SimpleLieAlgebra {
            series,
            rank,
            cartan,
            ip,
            positive_roots,
            dual_coxeter: 0,
            dimension: rank + 2 * p,
            lookup,
            npos: HashMap::new(),
        };
        alg.dual_coxeter = alg.compute_dual_coxeter();
        alg.compute_structure_constants();
        Ok(alg)
    }

    pub fn num_positive(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.series, self.rank)
    }

    pub fn kind(&self, idx: usize) -> BasisKind {
        let p = self.num_positive();
        if idx < 2 * p {
            BasisKind::Root(idx)
        } else {
            BasisKind::Cartan(idx - 2 * p)
        }
    }

    pub fn e(&self, root_idx: usize) -> usize {
        root_idx
    }

    pub fn f(&self, pos_idx: usize) -> usize {
        self.num_positive() + pos_idx
    }

    pub fn h(&self, i: usize) -> usize {
        2 * self.num_positive() + i
    }

    /// Index of the simple root `alpha_i` among positive roots.
    pub fn simple_index(&self, i: usize) -> usize {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        self.lookup[&v]
    }

    /// Signed root coordinates for a root index in `0..2P`.
    pub fn root(&self, ridx: usize) -> Vec<i64> {
        let p = self.num_positive();
        if ridx < p {
            self.positive_roots[ridx].clone()
        } else {
            self.positive_roots[ridx - p].iter().map(|x| -x).collect()
        }
    }

    pub fn root_index(&self, r: &[i64]) -> Option<usize> {
        self.lookup.get(r).copied()
    }

    pub fn neg_index(&self, ridx: usize) -> usize {
        let p = self.num_positive();
        if ridx < p {
            ridx + p
        } else {
            ridx - p
        }
    }

    pub fn is_positive(&self, ridx: usize) -> bool {
        ridx < self.num_positive()
    }

    pub fn height(r: &[i64]) -> i64 {
        r.iter().sum()
    }

    /// `(a, b)` for roots in simple-root coordinates.
    pub fn inner(&self, a: &[i64], b: &[i64]) -> Q {
        let mut s = Q::zero();
        for i in 0..self.rank {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.rank {
                if b[j] != 0 {
                    s += &self.ip[i][j] * q(a[i] * b[j]);
                }
            }
        }
        s
    }

    /// `<beta, alpha_i^vee>`
    pub fn pair_coroot(&self, beta: &[i64], i: usize) -> i64 {
        (0..self.rank).map(|j| beta[j] * self.cartan[j][i]).sum()
    }

    pub fn highest_root(&self) -> Vec<i64> {
        self.positive_roots.last().unwrap().clone()
    }

    /// Coroot `alpha^vee` of a positive root in the basis of simple coroots.
    pub fn coroot_coeffs(&self, pos: &[i64]) -> Vec<i64> {
        let len = self.inner(pos, pos);
        (0..self.rank)
            .map(|j| {
                let v = q(pos[j]) * &self.ip[j][j] / &len;
                assert!(v.is_integer());
                i64::try_from(v.numer()).unwrap()
            })
            .collect()
    }

    fn compute_dual_coxeter(&self) -> i64 {
        let theta = self.highest_root();
        1 + self.coroot_coeffs(&theta).iter().sum::<i64>()
    }

    /// Largest `p` with `s - p r` a root.
    fn string_down(&self, r: &[i64], s: &[i64]) -> i64 {
        let mut p = 0;
        loop {
            let t: Vec<i64> = s.iter().zip(r).map(|(a, b)| a - (p + 1) * b).collect();
            if t.iter().all(|&x| x == 0) || self.lookup.get(&t).is_none() {
                return p;
            }
            p += 1;
        }
    }

    fn len_of(&self, ridx: usize) -> Q {
        let r = self.root(ridx);
        self.inner(&r, &r)
    }

    fn add_roots(&self, a: usize, b: usize) -> Option<usize> {
        let ra = self.root(a);
        let rb = self.root(b);
        let s: Vec<i64> = ra.iter().zip(&rb).map(|(x, y)| x + y).collect();
        if s.iter().all(|&x| x == 0) {
            return None;
        }
        self.lookup.get(&s).copied()
    }

    fn n_positive(&self, a: usize, b: usize) -> i64 {
        if a == b {
            return 0;
        }
        if a < b {
            *self.npos.get(&(a, b)).unwrap_or(&0)
        } else {
            -*self.npos.get(&(b, a)).unwrap_or(&0)
        }
    }

    /// `N_{a,b}` for signed root indices; zero if `a + b` is not a root.
    pub fn n(&self, a: usize, b: usize) -> i64 {
        let Some(g) = self.add_roots(a, b) else { return 0 };
        let pa = self.is_positive(a);
        let pb = self.is_positive(b);
        if pa && pb {
            return self.n_positive(a, b);
        }
        if !pa && !pb {
            return -self.n_positive(self.neg_index(a), self.neg_index(b));
        }
        let d = self.neg_index(g);
        let pd = self.is_positive(d);
        let ld = self.len_of(d);
        let v = if pd == pb {
            ld / self.len_of(a) * q(self.n(b, d))
        } else {
            ld / self.len_of(b) * q(self.n(d, a))
        };
        assert!(v.is_integer(), "non-integral structure constant");
        i64::try_from(v.numer()).unwrap()
    }

    fn compute_structure_constants(&mut self) {
        let p = self.num_positive();
        let mut by_height: Vec<usize> = (0..p).collect();
        by_height.sort_by_key(|&k| Self::height(&self.positive_roots[k]));
        for &xi in &by_height {
            let rx = self.positive_roots[xi].clone();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for a in 0..p {
                let diff: Vec<i64> = rx.iter().zip(&self.positive_roots[a]).map(|(x, y)| x - y).collect();
                if let Some(&b) = self.lookup.get(&diff) {
                    if b < p && a < b {
                        pairs.push((a, b));
                    }
                }
            }
            if pairs.is_empty() {
                continue;
            }
            let (r, s) = pairs[0];
            let rr = self.positive_roots[r].clone();
            let rs = self.positive_roots[s].clone();
            let nrs = self.string_down(&rr, &rs) + 1;
            self.npos.insert((r, s), nrs);
            let lxi = self.inner(&rx, &rx);
            for &(a, b) in &pairs[1..] {
                let na = self.neg_index(a);
                let nb = self.neg_index(b);
                let mut t = Q::zero();
                if let Some(sa) = self.add_roots(s, na) {
                    t += q(self.n(s, na) * self.n(r, nb)) / self.len_of(sa);
                }
                if let Some(ra) = self.add_roots(r, na) {
                    t += q(self.n(na, r) * self.n(s, nb)) / self.len_of(ra);
                }
                let v = &lxi / q(nrs) * t;
                assert!(v.is_integer(), "non-integral structure constant");
                self.npos.insert((a, b), i64::try_from(v.numer()).unwrap());
            }
        }
    }

    /// Bracket of two basis vectors.
    pub fn bracket_basis(&self, x: usize, y: usize) -> SVec {
        match (self.kind(x), self.kind(y)) {
            (BasisKind::Cartan(_), BasisKind::Cartan(_)) => SVec::zero(),
            (BasisKind::Cartan(i), BasisKind::Root(b)) => {
                let c = self.pair_coroot(&self.root(b), i);
                SVec::single(y, q(c))
            }
            (BasisKind::Root(_), BasisKind::Cartan(_)) => self.bracket_basis(y, x).neg(),
            (BasisKind::Root(a), BasisKind::Root(b)) => {
                if self.neg_index(a) == b {
                    let pos = if self.is_positive(a) { a } else { b };
                    let sign = if self.is_positive(a) { q(1) } else { q(-1) };
                    let co = self.coroot_coeffs(&self.positive_roots[pos]);
                    let mut acc = Acc::new();
                    for (j, c) in co.iter().enumerate() {
                        acc.add(self.h(j), &(&sign * q(*c)));
                    }
                    return acc.finish();
                }
                match self.add_roots(a, b) {
                    Some(g) => SVec::single(g, q(self.n(a, b))),
                    None => SVec::zero(),
                }
            }
        }
    }

    pub fn bracket(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let mut acc = Acc::new();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                let c = a * b;
                acc.add_vec(&c, &self.bracket_basis(*i, *j));
            }
        }
        acc.finish()
    }

    /// Normalized invariant form on basis vectors (`<theta, theta> = 2`).
    pub fn form_basis(&self, x: usize, y: usize) -> Q {
        match (self.kind(x), self.kind(y)) {
            (BasisKind::Cartan(i), BasisKind::Cartan(j)) => {
                q(4) * &self.ip[i][j] / (&self.ip[i][i] * &self.ip[j][j])
            }
            (BasisKind::Root(a), BasisKind::Root(b)) if self.neg_index(a) == b => q(2) / self.len_of(a),
            _ => Q::zero(),
        }
    }

    pub fn form(&self, x: &LieElement, y: &LieElement) -> Q {
        let mut s = Q::zero();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                let f = self.form_basis(*i, *j);
                if !f.is_zero() {
                    s += a * b * f;
                }
            }
        }
        s
    }

    /// Chevalley involution: `e_alpha -> -e_{-alpha}`, `h -> -h`.
    pub fn chevalley_involution(&self, x: &LieElement) -> LieElement {
        let mut acc = Acc::new();
        for (i, a) in x.iter() {
            match self.kind(*i) {
                BasisKind::Cartan(_) => acc.add(*i, &-a),
                BasisKind::Root(r) => acc.add(self.neg_index(r), &-a),
            }
        }
        acc.finish()
    }

    /// Weight of a basis vector in simple-root coordinates (zero for Cartan).
    pub fn basis_weight(&self, idx: usize) -> Vec<i64> {
        match self.kind(idx) {
            BasisKind::Root(r) => self.root(r),
            BasisKind::Cartan(_) => vec![0; self.rank],
        }
    }

    pub fn basis_label(&self, idx: usize) -> String {
        match self.kind(idx) {
            BasisKind::Cartan(i) => format!("h{}", i + 1),
            BasisKind::Root(r) => {
                let v = self.root(r);
                let s: Vec<String> = v.iter().map(|x| x.abs().to_string()).collect();
                if self.is_positive(r) {
                    format!("e[{}]", s.join(""))
                } else {
                    format!("f[{}]", s.join(""))
                }
            }
        }
    }

    /// Jacobiator of three basis vectors.
    pub fn jacobiator(&self, x: usize, y: usize, z: usize) -> SVec {
        let ex = SVec::unit(x);
        let ey = SVec::unit(y);
        let ez = SVec::unit(z);
        let a = self.bracket(&ex, &self.bracket(&ey, &ez));
        let b = self.bracket(&ey, &self.bracket(&ez, &ex));
        let c = self.bracket(&ez, &self.bracket(&ex, &ey));
        a.add(&b).add(&c)
    }

    /// Coordinates of a Cartan element `sum c_i h_i` as a sparse vector.
    pub fn cartan_element(&self, coeffs: &[Q]) -> LieElement {
        let mut acc = Acc::new();
        for (i, c) in coeffs.iter().enumerate() {
            acc.add(self.h(i), c);
        }
        acc.finish()
    }

    pub fn one() -> Q {
        Q::one()
    }
}

/// Positive roots via root strings: `beta + alpha_i` is a root iff `p - <beta, alpha_i^vee> > 0`.
fn positive_roots_by_strings(cartan: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = cartan.len();
    let mut all: Vec<Vec<i64>> = Vec::new();
    let mut set = std::collections::HashSet::new();
    let mut layer: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        })
        .collect();
    while !layer.is_empty() {
        layer.sort();
        layer.dedup();
        for r in &layer {
            set.insert(r.clone());
            all.push(r.clone());
        }
        let mut next = Vec::new();
        for b in &layer {
            for i in 0..n {
                let mut p = 0;
                loop {
                    let mut t = b.clone();
                    t[i] -= p + 1;
                    if set.contains(&t) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let pair: i64 = (0..n).map(|j| b[j] * cartan[j][i]).sum();
                if p - pair > 0 {
                    let mut t = b.clone();
                    t[i] += 1;
                    next.push(t);
                }
            }
        }
        layer = next;
    }
    all.sort_by(|a, b| SimpleLieAlgebra::height(a).cmp(&SimpleLieAlgebra::height(b)).then(a.cmp(b)));
    all
}
