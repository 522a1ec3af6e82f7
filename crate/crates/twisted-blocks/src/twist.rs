//! Finite-order automorphisms `sigma = tau * eps^{ad h}` of a simple Lie
//! algebra, their eigenspaces, twisted affine labels and level-c weight sets.
//!
//! Weights of `g^tau` are stored by their values on the coroots `H_i` of
//! `g^tau` (fundamental-weight coordinates). The element `h` is stored by its
//! labels `s_i = alpha_i(h)`. The form on `h^tau` is the restriction of the
//! normalized form of `g`.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::cyclo::{Cyc, CycVec};
use crate::error::{invalid, Result};
use crate::lie::{BasisKind, LieElement, Series, SimpleLieAlgebra};
use crate::linalg::{gcd_q, inverse, q, Acc, Q, SVec};

/// Weight of `g^tau` in fundamental-weight coordinates.
pub type Weight = Vec<Q>;

pub fn weight_from_ints(v: &[i64]) -> Weight {
    v.iter().map(|&x| q(x)).collect()
}

pub fn fmt_weight(w: &Weight) -> String {
    let parts: Vec<String> = w.iter().map(crate::linalg::fmt_q).collect();
    format!("({})", parts.join(","))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TauKind {
    Id,
    Flip,
    Triality,
}

impl TauKind {
    pub fn parse(s: &str) -> Result<TauKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "id" | "1" | "identity" => Ok(TauKind::Id),
            "flip" | "2" => Ok(TauKind::Flip),
            "triality" | "3" => Ok(TauKind::Triality),
            other => invalid(format!("unknown diagram automorphism '{other}': expected id, flip or triality")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TauKind::Id => "id",
            TauKind::Flip => "flip",
            TauKind::Triality => "triality",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagramAutomorphism {
    pub kind: TauKind,
    /// node permutation (0-based Bourbaki nodes)
    pub perm: Vec<usize>,
    pub order: usize,
    pub folded_series: Series,
    pub folded_rank: usize,
    /// `orbits[i]` lists the nodes of `g` folded onto node `i` of `g^tau`.
    pub orbits: Vec<Vec<usize>>,
    /// The node of `g^tau` whose lowering generator is doubled (type `(A_{2n}, 2)`).
    pub doubled: Option<usize>,
}

impl DiagramAutomorphism {
    pub fn new(g: &SimpleLieAlgebra, kind: TauKind) -> Result<Self> {
        let n = g.rank;
        let (perm, order, fs, fr, orbits, doubled): (Vec<usize>, usize, Series, usize, Vec<Vec<usize>>, Option<usize>) =
            match (kind, g.series) {
                (TauKind::Id, s) => ((0..n).collect(), 1, s, n, (0..n).map(|i| vec![i]).collect(), None),
                (TauKind::Flip, Series::A) if n >= 2 => {
                    let perm: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
                    if n % 2 == 1 {
                        let k = n.div_ceil(2);
                        let orbits = (0..k).map(|i| if i == k - 1 { vec![i] } else { vec![i, n - 1 - i] }).collect();
                        (perm, 2, Series::C, k, orbits, None)
                    } else {
                        let k = n / 2;
                        let orbits = (0..k).map(|i| vec![i, n - 1 - i]).collect();
                        (perm, 2, Series::B, k, orbits, Some(k - 1))
                    }
                }
                (TauKind::Flip, Series::D) => {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.swap(n - 2, n - 1);
                    let mut orbits: Vec<Vec<usize>> = (0..n - 2).map(|i| vec![i]).collect();
                    orbits.push(vec![n - 2, n - 1]);
                    (perm, 2, Series::B, n - 1, orbits, None)
                }
                (TauKind::Flip, Series::E) if n == 6 => {
                    let perm = vec![5, 1, 4, 3, 2, 0];
                    let orbits = vec![vec![1], vec![3], vec![2, 4], vec![0, 5]];
                    (perm, 2, Series::F, 4, orbits, None)
                }
                (TauKind::Triality, Series::D) if n == 4 => {
                    let perm = vec![2, 1, 3, 0];
                    let orbits = vec![vec![0, 2, 3], vec![1]];
                    (perm, 3, Series::G, 2, orbits, None)
                }
                _ => {
                    return invalid(format!(
                        "no diagram automorphism '{}' on {}: supported are flip on A_n (n>=2), D_n, E6 and triality on D4",
                        kind.name(),
                        g.name()
                    ))
                }
            };
        for i in 0..n {
            for j in 0..n {
                if g.cartan[perm[i]][perm[j]] != g.cartan[i][j] {
                    return invalid("node permutation does not preserve the Cartan matrix");
                }
            }
        }
        Ok(DiagramAutomorphism { kind, perm, order, folded_series: fs, folded_rank: fr, orbits, doubled })
    }

    pub fn folded_name(&self) -> String {
        format!("{}{}", self.folded_series, self.folded_rank)
    }
}

/// Expected Bourbaki Cartan matrix of the folded algebra (`B1` included).
fn folded_cartan_expected(series: Series, rank: usize) -> Vec<Vec<i64>> {
    if series == Series::B && rank == 1 {
        return vec![vec![2]];
    }
    if series == Series::C && rank == 2 {
        return vec![vec![2, -1], vec![-2, 2]];
    }
    if series == Series::C && rank == 1 {
        return vec![vec![2]];
    }
    if series == Series::B && rank >= 2 {
        return crate::lie::cartan_matrix(series, rank).unwrap();
    }
    crate::lie::cartan_matrix(series, rank).unwrap()
}

/// A `tau`-orbit of Chevalley basis vectors.
#[derive(Clone, Debug)]
pub struct BasisOrbit {
    /// `members[k] = tau^k(members[0])` up to the sign recorded in `signs`.
    pub members: Vec<usize>,
    /// `tau^k(e) = signs[k] * e_{members[k]}`
    pub signs: Vec<i64>,
    /// `tau^len(e) = closing_sign * e`
    pub closing_sign: i64,
    /// restricted weight in simple-root coordinates of `g^tau`
    pub weight: Vec<i64>,
    /// eigenvalue of `ad h`
    pub adh: i64,
}

#[derive(Clone, Debug)]
pub struct Automorphism {
    pub g: Arc<SimpleLieAlgebra>,
    pub tau: DiagramAutomorphism,
    /// `s_i = alpha_i(h)` for the nodes of `g^tau`
    pub h: Vec<i64>,
    pub m: usize,
    tau_images: Vec<SVec>,
    pub fold_of: Vec<usize>,
    /// `folded_cartan[i][j] = alpha_i(H_j)`
    pub folded_cartan: Vec<Vec<i64>>,
    pub coroots: Vec<LieElement>,
    pub x: Vec<LieElement>,
    pub y: Vec<LieElement>,
    /// Gram matrix `<H_i, H_j>` and its inverse.
    pub gram: Vec<Vec<Q>>,
    pub gram_inv: Vec<Vec<Q>>,
    pub theta0: Weight,
    pub theta0_root: Vec<i64>,
    pub orbits: Vec<BasisOrbit>,
    pub eigen_dims: Vec<usize>,
    /// Rational eigenbasis of each `g_j` (present when `r <= 2`).
    pub eigenbasis: Option<Vec<Vec<LieElement>>>,
    /// restricted weights of the eigenbasis vectors
    pub eigen_weights: Option<Vec<Vec<Vec<i64>>>>,
    pub x_o_cyc: CycVec,
    pub y_o_cyc: CycVec,
    pub x_o: Option<LieElement>,
    pub y_o: Option<LieElement>,
    /// `[x_o, y_o]` in the basis `H_i`
    pub xo_yo: Vec<Q>,
}

impl Automorphism {
    /// Builds `sigma = tau eps^{ad h}` of order dividing `m`.
    pub fn new(g: Arc<SimpleLieAlgebra>, tau_kind: TauKind, h: Vec<i64>, m: usize) -> Result<Self> {
        let tau = DiagramAutomorphism::new(&g, tau_kind)?;
        let r = tau.order;
        if m == 0 || !m.is_multiple_of(r) {
            return invalid(format!("order m = {m} must be a positive multiple of r = {r}"));
        }
        let k = tau.folded_rank;
        if h.len() != k {
            return invalid(format!("h must have {k} labels alpha_i(h), one per node of {}", tau.folded_name()));
        }
        if let Some(i) = h.iter().position(|&x| x < 0) {
            return invalid(format!("alpha_{}(h) = {} violates alpha_i(h) >= 0", i + 1, h[i]));
        }
        let mut fold_of = vec![0; g.rank];
        for (i, o) in tau.orbits.iter().enumerate() {
            for &a in o {
                fold_of[a] = i;
            }
        }
        let tau_images = tau_on_basis(&g, &tau.perm);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, o) in tau.orbits.iter().enumerate() {
            let mut xa = Acc::new();
            let mut ya = Acc::new();
            let yscale = if tau.doubled == Some(i) { q(2) } else { q(1) };
            for &a in o {
                let si = g.simple_index(a);
                xa.add(g.e(si), &q(1));
                ya.add(g.f(si), &yscale);
            }
            x.push(xa.finish());
            y.push(ya.finish());
        }
        let coroots: Vec<LieElement> = (0..k).map(|i| g.bracket(&x[i], &y[i])).collect();
        let mut folded_cartan = vec![vec![0i64; k]; k];
        for i in 0..k {
            for j in 0..k {
                let br = g.bracket(&coroots[j], &x[i]);
                let lead = x[i].0[0].0;
                let v = br.get(lead) / x[i].get(lead);
                assert_eq!(br, x[i].scale(&v), "generator is not a weight vector");
                folded_cartan[i][j] = crate::linalg::q_to_i64(&v).unwrap();
            }
        }
        if folded_cartan != folded_cartan_expected(tau.folded_series, tau.folded_rank) {
            return crate::error::inconsistent(format!("folded Cartan matrix does not match {}", tau.folded_name()));
        }
        let gram: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| g.form(&coroots[i], &coroots[j])).collect()).collect();
        let gram_inv = inverse(&gram).expect("form on h^tau is nondegenerate");
        let mut sigma = Automorphism {
            g,
            tau,
            h,
            m,
            tau_images,
            fold_of,
            folded_cartan,
            coroots,
            x,
            y,
            gram,
            gram_inv,
            theta0: Vec::new(),
            theta0_root: Vec::new(),
            orbits: Vec::new(),
            eigen_dims: Vec::new(),
            eigenbasis: None,
            eigen_weights: None,
            x_o_cyc: CycVec::new(1),
            y_o_cyc: CycVec::new(1),
            x_o: None,
            y_o: None,
            xo_yo: Vec::new(),
        };
        sigma.orbits = sigma.compute_orbits();
        sigma.compute_theta0_and_o();
        let t0h = sigma.root_eval_h(&sigma.theta0_root);
        let mr = (m / r) as i64;
        if t0h > mr {
            return invalid(format!("theta_0(h) = {t0h} violates theta_0(h) <= m/r = {mr}"));
        }
        sigma.compute_eigenspaces();
        Ok(sigma)
    }

    pub fn r(&self) -> usize {
        self.tau.order
    }

    pub fn rank(&self) -> usize {
        self.tau.folded_rank
    }

    pub fn describe(&self) -> String {
        format!("{} tau={} h={:?} m={}", self.g.name(), self.tau.kind.name(), self.h, self.m)
    }

    pub fn tau_basis(&self, idx: usize) -> &SVec {
        &self.tau_images[idx]
    }

    pub fn apply_tau(&self, x: &LieElement) -> LieElement {
        let mut acc = Acc::new();
        for (i, c) in x.iter() {
            acc.add_vec(c, &self.tau_images[*i]);
        }
        acc.finish()
    }

    /// Restricted weight of a basis vector in simple-root coordinates of `g^tau`.
    pub fn restricted_weight(&self, idx: usize) -> Vec<i64> {
        let w = self.g.basis_weight(idx);
        let mut c = vec![0; self.rank()];
        for (a, v) in w.iter().enumerate() {
            c[self.fold_of[a]] += v;
        }
        c
    }

    /// `beta(h)` for a restricted weight in simple-root coordinates.
    pub fn root_eval_h(&self, c: &[i64]) -> i64 {
        c.iter().zip(&self.h).map(|(a, b)| a * b).sum()
    }

    /// Fundamental coordinates of a restricted weight given in root coordinates.
    pub fn root_to_fund(&self, c: &[i64]) -> Weight {
        let k = self.rank();
        (0..k).map(|j| q((0..k).map(|i| c[i] * self.folded_cartan[i][j]).sum())).collect()
    }

    /// Root coordinates of a weight given in fundamental coordinates.
    pub fn fund_to_root(&self, w: &Weight) -> Vec<Q> {
        let k = self.rank();
        let nm: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| q(self.folded_cartan[i][j])).collect()).collect();
        let inv = inverse(&nm).unwrap();
        (0..k).map(|j| (0..k).map(|i| &w[i] * &inv[i][j]).sum()).collect()
    }

    /// Restricted form on weights: `(l, m)_tau`.
    pub fn weight_form(&self, a: &Weight, b: &Weight) -> Q {
        let k = self.rank();
        let mut s = Q::zero();
        for i in 0..k {
            for j in 0..k {
                s += &a[i] * &self.gram_inv[i][j] * &b[j];
            }
        }
        s
    }

    pub fn alpha_weight(&self, i: usize) -> Weight {
        self.folded_cartan[i].iter().map(|&x| q(x)).collect()
    }

    /// `<alpha_i, alpha_i>_tau`
    pub fn alpha_len(&self, i: usize) -> Q {
        let a = self.alpha_weight(i);
        self.weight_form(&a, &a)
    }

    /// `<theta_0, theta_0>_tau`
    pub fn theta0_len(&self) -> Q {
        self.weight_form(&self.theta0, &self.theta0)
    }

    /// Coordinates in the basis `H_i` of an element of `h^tau`.
    pub fn cartan_coords(&self, x: &LieElement) -> Option<Vec<Q>> {
        let k = self.rank();
        let rhs: Vec<Q> = (0..k).map(|i| self.g.form(&self.coroots[i], x)).collect();
        let c: Vec<Q> = (0..k).map(|i| (0..k).map(|j| &self.gram_inv[i][j] * &rhs[j]).sum()).collect();
        let mut acc = Acc::new();
        for (i, ci) in c.iter().enumerate() {
            acc.add_vec(ci, &self.coroots[i]);
        }
        if acc.finish() == *x {
            Some(c)
        } else {
            None
        }
    }

    /// Element of `h^tau` dual to a weight under the restricted form.
    pub fn weight_to_cartan(&self, w: &Weight) -> LieElement {
        let k = self.rank();
        let mut acc = Acc::new();
        for i in 0..k {
            let ci: Q = (0..k).map(|j| &self.gram_inv[i][j] * &w[j]).sum();
            acc.add_vec(&ci, &self.coroots[i]);
        }
        acc.finish()
    }

    /// `theta_0^vee` in the basis `H_i`.
    pub fn theta0_coroot(&self) -> Vec<Q> {
        let len = self.theta0_len();
        let k = self.rank();
        (0..k).map(|i| q(2) * (0..k).map(|j| &self.gram_inv[i][j] * &self.theta0[j]).sum::<Q>() / &len).collect()
    }

    /// Value of a weight on `sum_i c_i H_i`.
    pub fn weight_on(&self, w: &Weight, c: &[Q]) -> Q {
        w.iter().zip(c).map(|(a, b)| a * b).sum()
    }

    /// Element `h` of `h^tau` with `alpha_i(h) = s_i`.
    pub fn h_element(&self) -> LieElement {
        let k = self.rank();
        let nm: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| q(self.folded_cartan[i][j])).collect()).collect();
        let inv = inverse(&nm).unwrap();
        let mut acc = Acc::new();
        for j in 0..k {
            let wj: Q = (0..k).map(|i| &inv[j][i] * q(self.h[i])).sum();
            acc.add_vec(&wj, &self.coroots[j]);
        }
        acc.finish()
    }

    fn compute_orbits(&self) -> Vec<BasisOrbit> {
        let g = &self.g;
        let mut seen = vec![false; g.dimension];
        let mut out = Vec::new();
        for start in 0..g.dimension {
            if seen[start] {
                continue;
            }
            let mut members = vec![start];
            let mut signs = vec![1i64];
            let mut cur = start;
            let mut sign = 1i64;
            let closing;
            loop {
                let img = &self.tau_images[cur];
                assert_eq!(img.len(), 1, "tau must permute basis vectors up to sign");
                let (nxt, c) = img.0[0].clone();
                sign *= crate::linalg::q_to_i64(&c).unwrap();
                if nxt == start {
                    closing = sign;
                    break;
                }
                members.push(nxt);
                signs.push(sign);
                cur = nxt;
            }
            for &mb in &members {
                seen[mb] = true;
            }
            let weight = self.restricted_weight(start);
            let adh = self.root_eval_h(&weight);
            out.push(BasisOrbit { members, signs, closing_sign: closing, weight, adh });
        }
        out
    }

    /// Exponents `a` (eigenvalue `eps_r^a` of `tau`) carried by an orbit.
    pub fn orbit_tau_exponents(&self, o: &BasisOrbit) -> Vec<usize> {
        let r = self.r();
        let l = o.members.len();
        (0..r)
            .filter(|&a| {
                let e = (a * l) % r;
                if o.closing_sign == 1 {
                    e == 0
                } else {
                    2 * e == r
                }
            })
            .collect()
    }

    /// Residue `j` with `sigma = eps^j` on the component of an orbit with tau-exponent `a`.
    pub fn residue(&self, o: &BasisOrbit, a: usize) -> usize {
        let m = self.m as i64;
        let r = self.r() as i64;
        ((m / r) * a as i64 + o.adh).rem_euclid(m) as usize
    }

    /// The eigenvector `sum_k lambda^{-k} tau^k(e)` with `lambda = zeta_r^a`, over `Q(zeta_r)`.
    pub fn orbit_vector(&self, o: &BasisOrbit, a: usize) -> CycVec {
        let r = self.r();
        let mut v = CycVec::new(r);
        for (k, (&mb, &sg)) in o.members.iter().zip(&o.signs).enumerate() {
            let c = Cyc::zeta_pow(r, -((a * k) as i64)).scale(&q(sg));
            v.add_term(mb, &c);
        }
        v
    }

    fn compute_theta0_and_o(&mut self) {
        let r = self.r();
        let g = self.g.clone();
        let top = r - 1;
        let mut best: Option<(usize, i64)> = None;
        for (oi, o) in self.orbits.iter().enumerate() {
            if o.weight.iter().all(|&x| x == 0) {
                continue;
            }
            if !self.orbit_tau_exponents(o).contains(&top) {
                continue;
            }
            let ht: i64 = o.weight.iter().sum();
            if best.map(|(_, b)| ht > b).unwrap_or(true) {
                best = Some((oi, ht));
            }
        }
        let (oi, _) = best.expect("eigenspace eps_r^{-1} has a highest weight");
        let o = self.orbits[oi].clone();
        self.theta0_root = o.weight.clone();
        self.theta0 = self.root_to_fund(&o.weight);
        let y = self.orbit_vector(&o, top);
        let lam_conj = |k: usize| Cyc::zeta_pow(r, ((top * k) % r) as i64);
        let mut xv = CycVec::new(r);
        for (k, (&mb, &sg)) in o.members.iter().zip(&o.signs).enumerate() {
            let ridx = match g.kind(mb) {
                BasisKind::Root(ri) => ri,
                BasisKind::Cartan(_) => unreachable!(),
            };
            xv.add_term(g.neg_index(ridx), &lam_conj(k).scale(&q(sg)));
        }
        // xv = sum_k lambda^k tau^k(f_beta) up to the sign of tau on f; recompute exactly
        let xv = {
            let mut acc = CycVec::new(r);
            let first = g.neg_index(match g.kind(o.members[0]) {
                BasisKind::Root(ri) => ri,
                BasisKind::Cartan(_) => unreachable!(),
            });
            let mut cur = SVec::unit(first);
            for k in 0..o.members.len() {
                acc = acc.add(&CycVec::from_rational(r, &cur).scale(&lam_conj(k)));
                cur = self.apply_tau(&cur);
            }
            let _ = xv;
            acc
        };
        let br = xv.bilinear(&y, |i, j| g.bracket_basis(i, j));
        let br = br.as_rational().expect("[x_o, y_o] is rational");
        let coords = self.cartan_coords(&br).expect("[x_o, y_o] lies in h^tau");
        let t = self.weight_on(&self.theta0, &coords);
        let kappa = q(-2) / t;
        self.x_o_cyc = xv.scale(&Cyc::from_q(r, kappa.clone()));
        self.y_o_cyc = y;
        self.xo_yo = coords.iter().map(|c| c * &kappa).collect();
        self.x_o = self.x_o_cyc.as_rational();
        self.y_o = self.y_o_cyc.as_rational();
    }

    fn compute_eigenspaces(&mut self) {
        let m = self.m;
        let r = self.r();
        let mut dims = vec![0usize; m];
        let rational = r <= 2;
        let mut basis: Vec<Vec<LieElement>> = vec![Vec::new(); m];
        let mut weights: Vec<Vec<Vec<i64>>> = vec![Vec::new(); m];
        for o in &self.orbits {
            for a in self.orbit_tau_exponents(o) {
                let j = self.residue(o, a);
                dims[j] += 1;
                if rational {
                    let v = self.orbit_vector(o, a).as_rational().unwrap();
                    basis[j].push(v);
                    weights[j].push(o.weight.clone());
                }
            }
        }
        self.eigen_dims = dims;
        if rational {
            self.eigenbasis = Some(basis);
            self.eigen_weights = Some(weights);
        }
    }

    /// Applies `sigma` to a vector with coefficients in `Q(zeta_N)`, `N = lcm(m, r)`.
    pub fn apply_sigma_cyc(&self, v: &CycVec) -> CycVec {
        let n = v.n;
        let m = self.m as i64;
        let nn = n as i64;
        assert_eq!(nn % m, 0);
        let mut out = CycVec::new(n);
        for (i, c) in &v.entries {
            let k = self.root_eval_h(&self.restricted_weight(*i));
            let z = Cyc::zeta_pow(n, k * (nn / m));
            for (j, t) in self.tau_images[*i].iter() {
                out.add_term(*j, &c.mul(&z).scale(t));
            }
        }
        out
    }

    /// Lifts a vector over `Q(zeta_r)` to `Q(zeta_n)` for a multiple `n` of `r`.
    pub fn lift_cyc(&self, v: &CycVec, n: usize) -> CycVec {
        let r = v.n;
        assert_eq!(n % r, 0);
        let mut out = CycVec::new(n);
        for (i, c) in &v.entries {
            let mut z = Cyc::zero(n);
            for (k, a) in c.c.iter().enumerate() {
                z = z.add(&Cyc::zeta_pow(n, (k * (n / r)) as i64).scale(a));
            }
            out.add_term(*i, &z);
        }
        out
    }

    /// Affine labels for this automorphism.
    pub fn labels(&self) -> AffineLabels {
        let k = self.rank();
        let mut s: Vec<i64> = self.h.clone();
        s.push((self.m / self.r()) as i64 - self.root_eval_h(&self.theta0_root));
        let mut sbar: Vec<Q> = (0..k).map(|i| q(2 * s[i]) / self.alpha_len(i)).collect();
        sbar.push(q(2 * s[k]) / self.theta0_len());
        let mut g = Q::zero();
        for x in &sbar {
            g = gcd_q(&g, x);
        }
        AffineLabels { s, sbar, sbar_gcd: g }
    }

    /// `n_{lambda, i}` for `i` in `I(g^tau)` followed by `n_{lambda, o}`.
    pub fn n_coefficients(&self, lambda: &Weight, c: i64) -> Vec<Q> {
        let k = self.rank();
        let lab = self.labels();
        let m = q(self.m as i64);
        let mut out: Vec<Q> = (0..k).map(|i| &lambda[i] + q(2 * lab.s[i] * c) / (&m * self.alpha_len(i))).collect();
        out.push(self.weight_on(lambda, &self.xo_yo) + q(2 * lab.s[k] * c) / (&m * self.theta0_len()));
        out
    }

    pub fn in_dc(&self, lambda: &Weight, c: i64) -> bool {
        self.n_coefficients(lambda, c).iter().all(|x| x.is_integer() && !x.is_negative())
    }

    /// The set `D_c`, sorted lexicographically.
    pub fn enumerate_dc(&self, c: i64) -> Result<Vec<Weight>> {
        if c < 1 {
            return invalid(format!("level c = {c} must be >= 1"));
        }
        let k = self.rank();
        let zero = vec![Q::zero(); k];
        let shifts = self.n_coefficients(&zero, c);
        let avee: Vec<Q> = self.xo_yo.iter().map(|x| -x).collect();
        assert!(avee.iter().all(|a| a.is_positive()), "theta_0^vee has positive coefficients");
        let mut total = shifts[k].clone();
        for i in 0..k {
            total += &avee[i] * &shifts[i];
        }
        let bounds: Vec<i64> = (0..k).map(|i| (&total / &avee[i]).floor().to_integer().try_into().unwrap()).collect();
        let mut out = Vec::new();
        let mut ns = vec![0i64; k];
        loop {
            let lam: Weight = (0..k).map(|i| q(ns[i]) - &shifts[i]).collect();
            if self.in_dc(&lam, c) {
                out.push(lam);
            }
            let mut i = 0;
            loop {
                if i == k {
                    out.sort();
                    return Ok(out);
                }
                ns[i] += 1;
                if ns[i] <= bounds[i] {
                    break;
                }
                ns[i] = 0;
                i += 1;
            }
        }
    }

    /// `0 in D_c` iff `m` divides `sbar * c`.
    pub fn zero_in_dc(&self, c: i64) -> bool {
        let lab = self.labels();
        (lab.sbar_gcd * q(c) / q(self.m as i64)).is_integer()
    }

    /// Simple roots of `g^sigma` as (weight, coroot in the `H` basis).
    pub fn g0_simple_roots(&self) -> Vec<(Weight, Vec<Q>)> {
        let k = self.rank();
        let lab = self.labels();
        let mut out = Vec::new();
        for i in 0..k {
            if lab.s[i] == 0 {
                let mut co = vec![Q::zero(); k];
                co[i] = q(1);
                out.push((self.alpha_weight(i), co));
            }
        }
        if lab.s[k] == 0 {
            out.push((self.theta0.iter().map(|x| -x).collect(), self.xo_yo.clone()));
        }
        out
    }

    pub fn is_g0_dominant(&self, w: &Weight) -> bool {
        self.g0_simple_roots().iter().all(|(_, co)| {
            let v = self.weight_on(w, co);
            v.is_integer() && !v.is_negative()
        })
    }

    /// Highest weight of `V(mu)^*` as a `g^sigma`-module, `-w_0(mu)`.
    pub fn dual_weight(&self, mu: &Weight) -> Result<Weight> {
        if !self.is_g0_dominant(mu) {
            return invalid(format!("weight {} is not dominant for g^sigma", fmt_weight(mu)));
        }
        let roots = self.g0_simple_roots();
        let mut v: Weight = mu.iter().map(|x| -x).collect();
        loop {
            let mut moved = false;
            for (a, co) in &roots {
                let p = self.weight_on(&v, co);
                if p.is_negative() {
                    v = v.iter().zip(a).map(|(x, y)| x - &p * y).collect();
                    moved = true;
                }
            }
            if !moved {
                return Ok(v);
            }
        }
    }

    /// Splits `x` into components `(tau-exponent a, ad h eigenvalue k, component)`.
    pub fn decompose(&self, x: &LieElement) -> Vec<(usize, i64, LieElement)> {
        assert!(self.r() <= 2, "rational decomposition needs r <= 2");
        let mut parts: std::collections::BTreeMap<(usize, i64), Acc> = Default::default();
        let half = Q::new(1.into(), 2.into());
        for (i, c) in x.iter() {
            let kk = self.root_eval_h(&self.restricted_weight(*i));
            let t = self.tau_basis(*i);
            if self.r() == 1 {
                parts.entry((0, kk)).or_default().add(*i, c);
                continue;
            }
            // e = (e + tau e)/2 + (e - tau e)/2
            let e = SVec::unit(*i);
            let plus = e.add(t).scale(&half);
            let minus = e.sub(t).scale(&half);
            parts.entry((0, kk)).or_default().add_vec(c, &plus);
            parts.entry((1, kk)).or_default().add_vec(c, &minus);
        }
        parts
            .into_iter()
            .map(|((a, k), acc)| (a, k, acc.finish()))
            .filter(|(_, _, v)| !v.is_zero())
            .collect()
    }
}

/// `tau` on the Chevalley basis, determined by `tau(e_i) = e_{perm(i)}`.
fn tau_on_basis(g: &SimpleLieAlgebra, perm: &[usize]) -> Vec<SVec> {
    let p = g.num_positive();
    let n = g.rank;
    let mut img: Vec<Option<SVec>> = vec![None; g.dimension];
    for i in 0..n {
        img[g.h(i)] = Some(SVec::unit(g.h(perm[i])));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by_key(|&k| SimpleLieAlgebra::height(&g.positive_roots[k]));
    for &k in &order {
        let r = g.positive_roots[k].clone();
        let v = if SimpleLieAlgebra::height(&r) == 1 {
            let i = r.iter().position(|&x| x == 1).unwrap();
            SVec::unit(g.simple_index(perm[i]))
        } else {
            let (i, b) = (0..n)
                .find_map(|i| {
                    let mut t = r.clone();
                    t[i] -= 1;
                    g.root_index(&t).filter(|&b| b < p).map(|b| (i, b))
                })
                .unwrap();
            let si = g.simple_index(i);
            let nn = g.n(si, b);
            let ti = img[si].clone().unwrap();
            let tb = img[b].clone().unwrap();
            g.bracket(&ti, &tb).scale(&(Q::one() / q(nn)))
        };
        // tau(f) = -omega(tau(e))
        let fv = g.chevalley_involution(&v).neg();
        img[k] = Some(v);
        img[g.neg_index(k)] = Some(fv);
    }
    img.into_iter().map(|v| v.unwrap()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineLabels {
    /// `s_i` for `i` in `I(g^tau)` followed by `s_o`.
    pub s: Vec<i64>,
    pub sbar: Vec<Q>,
    pub sbar_gcd: Q,
}

/// Standard automorphisms used throughout the test corpus.
pub fn standard(series: Series, rank: usize, tau: TauKind, h: Vec<i64>, m: usize) -> Result<Automorphism> {
    let g = Arc::new(SimpleLieAlgebra::build(series, rank)?);
    Automorphism::new(g, tau, h, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qf;

    fn sl2() -> Automorphism {
        standard(Series::A, 1, TauKind::Id, vec![0], 1).unwrap()
    }

    fn a2_flip() -> Automorphism {
        standard(Series::A, 2, TauKind::Flip, vec![0], 2).unwrap()
    }

    fn d4_tri() -> Automorphism {
        standard(Series::D, 4, TauKind::Triality, vec![0, 0], 3).unwrap()
    }

    fn all_cases() -> Vec<Automorphism> {
        vec![
            sl2(),
            a2_flip(),
            standard(Series::A, 3, TauKind::Flip, vec![0, 0], 2).unwrap(),
            d4_tri(),
            standard(Series::A, 1, TauKind::Id, vec![1], 2).unwrap(),
            standard(Series::A, 1, TauKind::Id, vec![1], 3).unwrap(),
            standard(Series::A, 4, TauKind::Flip, vec![0, 0], 2).unwrap(),
            standard(Series::D, 4, TauKind::Flip, vec![0, 0, 0], 2).unwrap(),
            standard(Series::D, 5, TauKind::Flip, vec![0, 0, 0, 0], 2).unwrap(),
            standard(Series::E, 6, TauKind::Flip, vec![0, 0, 0, 0], 2).unwrap(),
            standard(Series::A, 5, TauKind::Flip, vec![0, 0, 0], 2).unwrap(),
            standard(Series::A, 6, TauKind::Flip, vec![0, 0, 0], 2).unwrap(),
            standard(Series::A, 2, TauKind::Id, vec![1, 0], 2).unwrap(),
            standard(Series::A, 2, TauKind::Flip, vec![1], 4).unwrap(),
        ]
    }

    #[test]
    fn eigenspace_dimensions() {
        assert_eq!(sl2().eigen_dims, vec![3]);
        assert_eq!(a2_flip().eigen_dims, vec![3, 5]);
        assert_eq!(d4_tri().eigen_dims, vec![14, 7, 7]);
        for s in all_cases() {
            assert_eq!(s.eigen_dims.iter().sum::<usize>(), s.g.dimension);
        }
    }

    #[test]
    fn tau_is_an_automorphism_of_order_r() {
        for s in all_cases() {
            let g = &s.g;
            for a in 0..g.dimension {
                for b in 0..g.dimension {
                    let lhs = s.apply_tau(&g.bracket_basis(a, b));
                    let rhs = g.bracket(s.tau_basis(a), s.tau_basis(b));
                    assert_eq!(lhs, rhs);
                }
                let mut v = SVec::unit(a);
                for _ in 0..s.r() {
                    v = s.apply_tau(&v);
                }
                assert_eq!(v, SVec::unit(a));
            }
        }
    }

    #[test]
    fn theta0_lengths_and_two_routes() {
        for s in all_cases() {
            let r = s.r();
            let expect = if s.g.series == Series::A && r == 2 && s.g.rank % 2 == 0 { q(2) } else { qf(2, r as i64) };
            assert_eq!(s.theta0_len(), expect, "{}", s.describe());
            // second route: highest short root of g^tau (doubled for A_2n)
            let mut roots: Vec<Vec<i64>> = Vec::new();
            for o in &s.orbits {
                if o.weight.iter().any(|&x| x != 0) && s.orbit_tau_exponents(o).contains(&0) {
                    roots.push(o.weight.clone());
                }
            }
            let lens: Vec<Q> = roots.iter().map(|w| s.weight_form(&s.root_to_fund(w), &s.root_to_fund(w))).collect();
            let minlen = lens.iter().min().unwrap().clone();
            let maxlen = lens.iter().max().unwrap().clone();
            let target = if r == 1 { maxlen } else { minlen };
            let best = roots
                .iter()
                .zip(&lens)
                .filter(|(_, l)| **l == target)
                .max_by_key(|(w, _)| w.iter().sum::<i64>())
                .unwrap()
                .0
                .clone();
            let factor = if s.tau.doubled.is_some() { 2 } else { 1 };
            let best: Vec<i64> = best.iter().map(|x| x * factor).collect();
            assert_eq!(best, s.theta0_root, "{}", s.describe());
            // [x_o, y_o] = -theta_0^vee
            let co: Vec<Q> = s.theta0_coroot().iter().map(|x| -x).collect();
            assert_eq!(co, s.xo_yo, "{}", s.describe());
        }
    }

    #[test]
    fn generators_are_sigma_eigenvectors() {
        for s in all_cases() {
            let n = num_integer::lcm(s.m, s.r());
            let lab = s.labels();
            let k = s.rank();
            let check = |v: &CycVec, e: i64| {
                let lhs = s.apply_sigma_cyc(v);
                let rhs = v.scale(&Cyc::zeta_pow(n, e * (n / s.m) as i64));
                assert_eq!(lhs, rhs, "{}", s.describe());
            };
            for i in 0..k {
                check(&CycVec::from_rational(n, &s.x[i]), lab.s[i]);
                check(&CycVec::from_rational(n, &s.y[i]), -lab.s[i]);
            }
            check(&s.lift_cyc(&s.x_o_cyc, n), lab.s[k]);
            check(&s.lift_cyc(&s.y_o_cyc, n), -lab.s[k]);
        }
    }

    #[test]
    fn diagram_automorphism_labels() {
        for s in all_cases() {
            if s.h.iter().all(|&x| x == 0) && s.m == s.r() {
                let lab = s.labels();
                let k = s.rank();
                assert!(lab.s[..k].iter().all(|&x| x == 0));
                assert_eq!(lab.s[k], 1);
            }
        }
        let lab = sl2().labels();
        assert_eq!(lab.sbar[1], q(1));
        assert_eq!(lab.sbar_gcd, q(1));
        assert_eq!(a2_flip().labels().sbar[1], q(1));
    }

    #[test]
    fn n_coefficient_examples() {
        let s = sl2();
        for c in 1..4 {
            for kk in 0..4 {
                let n = s.n_coefficients(&weight_from_ints(&[kk]), c);
                assert_eq!(n, vec![q(kk), q(c - kk)]);
            }
        }
        let a2 = a2_flip();
        assert_eq!(a2.n_coefficients(&weight_from_ints(&[0]), 1)[1], qf(1, 2));
        for s in all_cases() {
            let z = vec![Q::zero(); s.rank()];
            assert!(s.n_coefficients(&z, 0).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn dc_examples() {
        let s = sl2();
        assert_eq!(s.enumerate_dc(2).unwrap(), vec![weight_from_ints(&[0]), weight_from_ints(&[1]), weight_from_ints(&[2])]);
        let a2 = a2_flip();
        for c in [1, 3] {
            let d = a2.enumerate_dc(c).unwrap();
            let expect: Vec<Weight> = (0..=c).filter(|k| (c - k) % 2 == 0).map(|k| weight_from_ints(&[k])).collect();
            assert_eq!(d, expect);
            assert!(!a2.zero_in_dc(c));
        }
        assert!(a2.zero_in_dc(2));
        let a4 = standard(Series::A, 4, TauKind::Flip, vec![0, 0], 2).unwrap();
        assert_eq!(a4.enumerate_dc(1).unwrap(), vec![weight_from_ints(&[0, 1])]);
        assert!(sl2().enumerate_dc(0).is_err());
    }

    #[test]
    fn dual_weights() {
        let sl3 = standard(Series::A, 2, TauKind::Id, vec![0, 0], 1).unwrap();
        assert_eq!(sl3.dual_weight(&weight_from_ints(&[1, 0])).unwrap(), weight_from_ints(&[0, 1]));
        assert_eq!(sl2().dual_weight(&weight_from_ints(&[3])).unwrap(), weight_from_ints(&[3]));
        assert_eq!(sl3.dual_weight(&weight_from_ints(&[0, 0])).unwrap(), weight_from_ints(&[0, 0]));
        assert!(sl3.dual_weight(&weight_from_ints(&[-1, 0])).is_err());
        for s in all_cases() {
            for c in 1..4 {
                let d = s.enumerate_dc(c).unwrap();
                for mu in &d {
                    let dm = s.dual_weight(mu).unwrap();
                    assert_eq!(&s.dual_weight(&dm).unwrap(), mu);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_h() {
        assert!(standard(Series::A, 1, TauKind::Id, vec![-1], 2).unwrap_err().to_string().contains(">= 0"));
        assert!(standard(Series::A, 1, TauKind::Id, vec![3], 2).unwrap_err().to_string().contains("m/r"));
        assert!(standard(Series::A, 2, TauKind::Flip, vec![0], 3).is_err());
        assert!(standard(Series::B, 3, TauKind::Flip, vec![0, 0, 0], 2).is_err());
    }

    #[test]
    fn restriction_of_simple_roots() {
        for s in all_cases() {
            for a in 0..s.g.rank {
                let si = s.g.simple_index(a);
                for j in 0..s.rank() {
                    let br = s.g.bracket(&s.coroots[j], &SVec::unit(si));
                    let v = br.get(si);
                    assert_eq!(v, q(s.folded_cartan[s.fold_of[a]][j]));
                }
            }
        }
    }

    #[test]
    fn g0_closed_under_bracket() {
        for s in all_cases() {
            let Some(b) = &s.eigenbasis else { continue };
            let m = s.m;
            for i in 0..m {
                for j in 0..m {
                    let mut e = crate::linalg::Echelon::new();
                    for v in &b[(i + j) % m] {
                        e.insert(v.clone());
                    }
                    for x in &b[i] {
                        for y in &b[j] {
                            assert!(e.contains(&s.g.bracket(x, y)));
                        }
                    }
                }
            }
        }
    }
}
