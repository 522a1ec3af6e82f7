//! The twisted loop algebra `L(g, sigma)` with its central extension, in a
//! mode basis `b[t^a]` where `b` runs over a fixed eigenbasis of `g_{a mod m}`.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::lie::LieElement;
use crate::linalg::{q, Acc, Echelon, Q, SVec};
use crate::twist::{Automorphism, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub deg: i64,
    pub idx: usize,
}

impl Mode {
    pub fn new(deg: i64, idx: usize) -> Self {
        Mode { deg, idx }
    }
}

/// Element of the central extension: combination of modes of one degree plus `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeVec {
    pub deg: i64,
    pub v: SVec,
    pub central: Q,
}

impl ModeVec {
    pub fn is_zero(&self) -> bool {
        self.v.is_zero() && self.central.is_zero()
    }
}

#[derive(Debug)]
pub struct LoopAlgebra {
    pub sigma: Arc<Automorphism>,
    pub m: usize,
    pub basis: Vec<Vec<LieElement>>,
    pub root_weights: Vec<Vec<Vec<i64>>>,
    pub weights: Vec<Vec<Weight>>,
    ech: Vec<Echelon>,
    brk: Vec<Vec<Vec<Vec<SVec>>>>,
    form: Vec<Vec<Vec<Q>>>,
    omega: Vec<Vec<SVec>>,
    /// torus parameters `t_i` and `q` of the contravariant anti-involution
    pub torus_t: Vec<Q>,
    pub torus_q: Q,
}

/// Exact rational `k`-th root, if it exists.
pub fn rational_root(x: &Q, k: u32) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().nth_root(k);
    let d = x.denom().nth_root(k);
    let r = Q::new(n, d);
    if num_traits::pow(r.clone(), k as usize) == *x {
        Some(r)
    } else {
        None
    }
}

impl LoopAlgebra {
    pub fn new(sigma: Arc<Automorphism>) -> Result<Self> {
        let Some(basis) = sigma.eigenbasis.clone() else {
            return invalid("mode computations need a rational eigenbasis (diagram automorphism of order at most 2)");
        };
        let m = sigma.m;
        let g = sigma.g.clone();
        let root_weights = sigma.eigen_weights.clone().unwrap();
        let weights: Vec<Vec<Weight>> =
            root_weights.iter().map(|ws| ws.iter().map(|w| sigma.root_to_fund(w)).collect()).collect();
        let mut ech = Vec::new();
        for b in &basis {
            let mut e = Echelon::new();
            for (p, v) in b.iter().enumerate() {
                assert!(e.insert_labeled(v.clone(), SVec::unit(p)));
            }
            ech.push(e);
        }
        let express = |ech: &Vec<Echelon>, j: usize, v: &SVec| -> SVec {
            ech[j].express(v).expect("element lies in the eigenspace")
        };
        let mut brk = vec![vec![Vec::new(); m]; m];
        for i in 0..m {
            for j in 0..m {
                let k = (i + j) % m;
                brk[i][j] = basis[i]
                    .iter()
                    .map(|x| basis[j].iter().map(|y| express(&ech, k, &g.bracket(x, y))).collect())
                    .collect();
            }
        }
        let form: Vec<Vec<Vec<Q>>> = (0..m)
            .map(|i| {
                let j = (m - i) % m;
                basis[i].iter().map(|x| basis[j].iter().map(|y| g.form(x, y)).collect()).collect()
            })
            .collect();
        let omega: Vec<Vec<SVec>> = (0..m)
            .map(|i| {
                let j = (m - i) % m;
                basis[i].iter().map(|x| express(&ech, j, &g.chevalley_involution(x))).collect()
            })
            .collect();
        let mut alg = LoopAlgebra {
            sigma,
            m,
            basis,
            root_weights,
            weights,
            ech,
            brk,
            form,
            omega,
            torus_t: Vec::new(),
            torus_q: Q::one(),
        };
        alg.compute_torus()?;
        Ok(alg)
    }

    pub fn residue(&self, deg: i64) -> usize {
        deg.rem_euclid(self.m as i64) as usize
    }

    pub fn dim_at(&self, deg: i64) -> usize {
        self.basis[self.residue(deg)].len()
    }

    pub fn modes_of_degree(&self, deg: i64) -> impl Iterator<Item = Mode> {
        (0..self.dim_at(deg)).map(move |i| Mode::new(deg, i))
    }

    /// Coordinates of `x` in the eigenbasis of `g_{deg mod m}`.
    pub fn express(&self, deg: i64, x: &LieElement) -> Option<SVec> {
        self.ech[self.residue(deg)].express(x)
    }

    pub fn element(&self, mode: Mode) -> &LieElement {
        &self.basis[self.residue(mode.deg)][mode.idx]
    }

    pub fn weight(&self, mode: Mode) -> &Weight {
        &self.weights[self.residue(mode.deg)][mode.idx]
    }

    /// `<b_{i,p}, b_{-i,q}>`
    pub fn form_modes(&self, x: Mode, y: Mode) -> Q {
        if self.residue(x.deg + y.deg) != 0 {
            return Q::zero();
        }
        self.form[self.residue(x.deg)][x.idx][y.idx].clone()
    }

    /// `[x[t^a], y[t^b]] = [x,y][t^{a+b}] + (a/m) delta_{a+b,0} <x,y> C`
    pub fn bracket(&self, x: Mode, y: Mode) -> ModeVec {
        let i = self.residue(x.deg);
        let j = self.residue(y.deg);
        let v = self.brk[i][j][x.idx][y.idx].clone();
        let central = if x.deg + y.deg == 0 {
            q(x.deg) / q(self.m as i64) * &self.form[i][x.idx][y.idx]
        } else {
            Q::zero()
        };
        ModeVec { deg: x.deg + y.deg, v, central }
    }

    pub fn bracket_vec(&self, x: &ModeVec, y: &ModeVec) -> ModeVec {
        let mut acc = Acc::new();
        let mut central = Q::zero();
        for (p, a) in x.v.iter() {
            for (r, b) in y.v.iter() {
                let br = self.bracket(Mode::new(x.deg, *p), Mode::new(y.deg, *r));
                let ab = a * b;
                acc.add_vec(&ab, &br.v);
                central += &ab * &br.central;
            }
        }
        ModeVec { deg: x.deg + y.deg, v: acc.finish(), central }
    }

    /// `omega(x)[t^{-a}]` without the torus factor.
    pub fn omega_mode(&self, x: Mode) -> ModeVec {
        ModeVec { deg: -x.deg, v: self.omega[self.residue(x.deg)][x.idx].clone(), central: Q::zero() }
    }

    fn torus_factor(&self, deg: i64, w: &[i64]) -> Q {
        let mut f = num_traits::pow::Pow::pow(&self.torus_q, &num_bigint::BigInt::from(deg));
        for (t, c) in self.torus_t.iter().zip(w) {
            f *= num_traits::pow::Pow::pow(t, &num_bigint::BigInt::from(*c));
        }
        f
    }

    /// The anti-involution used by the contravariant form:
    /// `varpi(x[t^n]) = T(omega(x))[t^{-n}]`, `varpi(C) = -C`.
    pub fn varpi(&self, x: Mode) -> ModeVec {
        let om = self.omega_mode(x);
        let w: Vec<i64> = self.root_weights[self.residue(x.deg)][x.idx].iter().map(|c| -c).collect();
        let f = self.torus_factor(-x.deg, &w);
        ModeVec { deg: om.deg, v: om.v.scale(&f), central: Q::zero() }
    }

    pub fn varpi_vec(&self, x: &ModeVec) -> ModeVec {
        let mut acc = Acc::new();
        for (p, a) in x.v.iter() {
            acc.add_vec(a, &self.varpi(Mode::new(x.deg, *p)).v);
        }
        ModeVec { deg: -x.deg, v: acc.finish(), central: -x.central.clone() }
    }

    /// Generators `x_i[t^{s_i}]`, `y_i[t^{-s_i}]` for `i` in `I(g^tau)` then `o`.
    pub fn node_generators(&self) -> Vec<(ModeVec, ModeVec)> {
        let s = &self.sigma;
        let lab = s.labels();
        let k = s.rank();
        let mut out = Vec::new();
        for i in 0..=k {
            let (xe, ye) = if i < k {
                (s.x[i].clone(), s.y[i].clone())
            } else {
                (s.x_o.clone().unwrap(), s.y_o.clone().unwrap())
            };
            let si = lab.s[i];
            let xv = ModeVec { deg: si, v: self.express(si, &xe).unwrap(), central: Q::zero() };
            let yv = ModeVec { deg: -si, v: self.express(-si, &ye).unwrap(), central: Q::zero() };
            out.push((xv, yv));
        }
        out
    }

    fn compute_torus(&mut self) -> Result<()> {
        let s = self.sigma.clone();
        let g = &s.g;
        let lab = s.labels();
        let k = s.rank();
        let mut gamma = Vec::new();
        for i in 0..=k {
            let (xe, ye) = if i < k {
                (s.x[i].clone(), s.y[i].clone())
            } else {
                (s.x_o.clone().unwrap(), s.y_o.clone().unwrap())
            };
            let w = g.chevalley_involution(&xe);
            let lead = ye.0[0].0;
            let gm = -(w.get(lead) / ye.get(lead));
            assert_eq!(w, ye.scale(&-gm.clone()), "omega(x_i) is proportional to y_i");
            gamma.push(gm);
        }
        let mut prod = gamma[k].clone();
        for i in 0..k {
            prod *= num_traits::pow(gamma[i].clone(), s.theta0_root[i] as usize);
        }
        let mr = (s.m / s.r()) as u32;
        let Some(qq) = rational_root(&prod, mr) else {
            return invalid(format!("torus parameter q with q^{mr} = {} is not rational", crate::linalg::fmt_q(&prod)));
        };
        self.torus_t = (0..k)
            .map(|i| &gamma[i] * num_traits::pow::Pow::pow(&qq, &num_bigint::BigInt::from(-lab.s[i])))
            .collect();
        self.torus_q = qq;
        Ok(())
    }

    /// Image of `x[t^a]` in the loop algebra of `tau` (parameter `s = t^{m/r}`):
    /// components `(A, x_A)` meaning `x_A[s^A]` and a central coefficient.
    pub fn realization_map(&self, deg: i64, x: &LieElement) -> (Vec<(i64, LieElement)>, Q) {
        let s = &self.sigma;
        let mr = (s.m / s.r()) as i64;
        let mut out = Vec::new();
        for (_a, kk, comp) in s.decompose(x) {
            let diff = deg - kk;
            assert_eq!(diff.rem_euclid(mr), 0, "component lies in the wrong eigenspace");
            out.push((diff / mr, comp));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1 .0.cmp(&b.1 .0)));
        let central = if deg == 0 {
            -s.g.form(&s.h_element(), x) / q(s.m as i64)
        } else {
            Q::zero()
        };
        (out, central)
    }
}
