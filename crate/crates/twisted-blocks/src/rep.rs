//! Integrable highest-weight modules: the finite-dimensional `g_0`-module
//! `V(lambda)` and the graded module `H(lambda)` truncated at a depth.
//!
//! Each layer of `H(lambda)` is built as the span of `Y u` (negative mode `Y`,
//! `u` in a lower layer) modulo vectors killed by every positive mode. A vector
//! is represented by its images under all positive modes, which lie in layers
//! already constructed.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{invalid, window, Result};
use crate::linalg::{q, Acc, Echelon, Q, SMat, SVec};
use crate::loops::{LoopAlgebra, Mode, ModeVec};
use crate::twist::{fmt_weight, Weight};

/// Irreducible finite-dimensional `g_0`-module with highest weight `lambda`.
#[derive(Clone, Debug)]
pub struct FiniteModule {
    pub dim: usize,
    pub weights: Vec<Weight>,
    pub depth: Vec<usize>,
    /// basis vector `k > 0` equals `lowering[j] * basis[i]` for `origin[k] = Some((j, i))`
    pub origin: Vec<Option<(usize, usize)>>,
    pub lowering: Vec<SVec>,
    pub raising: Vec<SVec>,
    /// action of each eigenbasis element of `g_0`
    pub action: Vec<SMat>,
}

const MAX_DEPTH: usize = 400;

impl FiniteModule {
    pub fn new(alg: &LoopAlgebra, lambda: &Weight) -> Result<Self> {
        let s = &alg.sigma;
        if lambda.len() != s.rank() {
            return invalid(format!("weight {} has the wrong number of coordinates", fmt_weight(lambda)));
        }
        if !s.is_g0_dominant(lambda) {
            return invalid(format!("weight {} is not dominant integral for g^sigma", fmt_weight(lambda)));
        }
        let lab = s.labels();
        let gens = alg.node_generators();
        let mut raising = Vec::new();
        let mut lowering = Vec::new();
        let mut coroots: Vec<Vec<Q>> = Vec::new();
        for (i, (x, y)) in gens.iter().enumerate() {
            if lab.s[i] == 0 {
                raising.push(x.v.clone());
                lowering.push(y.v.clone());
                let h = s.g.bracket(&to_lie(alg, 0, &x.v), &to_lie(alg, 0, &y.v));
                coroots.push(s.cartan_coords(&h).expect("coroot lies in h^tau"));
            }
        }
        let nj = lowering.len();
        for i in 0..nj {
            for j in 0..nj {
                let br = alg.bracket_vec(&mv0(&raising[i]), &mv0(&lowering[j]));
                let h = to_lie(alg, 0, &br.v);
                if i == j {
                    assert_eq!(s.cartan_coords(&h).as_ref(), Some(&coroots[i]));
                } else {
                    assert!(h.is_zero(), "raising and lowering generators of distinct nodes commute");
                }
            }
        }
        let lowering_wt: Vec<Weight> = lowering.iter().map(|y| element_weight(alg, y)).collect();
        let mut weights = vec![lambda.clone()];
        let mut depth = vec![0usize];
        let mut origin: Vec<Option<(usize, usize)>> = vec![None];
        // f_cols[j][u], e_cols[i][u] in global indices
        let mut f_cols: Vec<Vec<SVec>> = vec![Vec::new(); nj];
        let mut e_cols: Vec<Vec<SVec>> = vec![vec![SVec::zero()]; nj];
        let mut prev: Vec<usize> = vec![0];
        let mut t = 0;
        while !prev.is_empty() {
            t += 1;
            if t > MAX_DEPTH {
                return window("finite-dimensional module exceeds the depth limit");
            }
            let stride = weights.len();
            let mut ech = Echelon::new();
            let mut new: Vec<usize> = Vec::new();
            let mut phis: Vec<SVec> = Vec::new();
            let mut cand_vecs: Vec<(usize, usize, SVec)> = Vec::new();
            for j in 0..nj {
                for &u in &prev {
                    // E_i F_j u = F_j E_i u + delta_ij <lambda_u, H_j> u
                    let mut acc = Acc::new();
                    for i in 0..nj {
                        let eu = &e_cols[i][u];
                        let mut blk = Acc::new();
                        for (w, c) in eu.iter() {
                            blk.add_vec(c, &f_cols[j][*w]);
                        }
                        if i == j {
                            let val = s.weight_on(&weights[u], &coroots[j]);
                            blk.add(u, &val);
                        }
                        for (w, c) in blk.finish().iter() {
                            acc.add(i * stride + w, c);
                        }
                    }
                    let phi = acc.finish();
                    let idx = weights.len() + new.len();
                    if ech.insert_labeled(phi.clone(), SVec::unit(idx)) {
                        new.push(idx);
                        phis.push(phi);
                        cand_vecs.push((j, u, SVec::unit(idx)));
                        origin.push(Some((j, u)));
                        depth.push(t);
                    } else {
                        let e = ech.express(&phi).unwrap();
                        cand_vecs.push((j, u, e));
                    }
                }
            }
            for (j, u, v) in cand_vecs {
                if f_cols[j].len() <= u {
                    f_cols[j].resize(u + 1, SVec::zero());
                }
                f_cols[j][u] = v;
            }
            for (k, &idx) in new.iter().enumerate() {
                let (j, u) = origin[idx].unwrap();
                let w: Weight = weights[u].iter().zip(&lowering_wt[j]).map(|(a, b)| a + b).collect();
                weights.push(w);
                let phi = &phis[k];
                for i in 0..nj {
                    let mut col = Vec::new();
                    for (p, c) in phi.iter() {
                        if *p / stride == i {
                            col.push((*p % stride, c.clone()));
                        }
                    }
                    e_cols[i].push(SVec(col));
                }
            }
            prev = new;
        }
        let dim = weights.len();
        for fc in f_cols.iter_mut() {
            fc.resize(dim, SVec::zero());
        }
        let mut mats: Vec<SMat> = Vec::new();
        let mut ech = Echelon::new();
        let mut queue = Vec::new();
        let mut gen_ids = Vec::new();
        let push = |elem: SVec, mat: SMat, mats: &mut Vec<SMat>, ech: &mut Echelon| -> Option<usize> {
            let k = mats.len();
            if ech.insert_labeled(elem, SVec::unit(k)) {
                mats.push(mat);
                Some(k)
            } else {
                None
            }
        };
        for i in 0..nj {
            let me = SMat { rows: dim, cols: e_cols[i].clone() };
            let mf = SMat { rows: dim, cols: f_cols[i].clone() };
            if let Some(k) = push(raising[i].clone(), me, &mut mats, &mut ech) {
                gen_ids.push((raising[i].clone(), k));
                queue.push((raising[i].clone(), k));
            }
            if let Some(k) = push(lowering[i].clone(), mf, &mut mats, &mut ech) {
                gen_ids.push((lowering[i].clone(), k));
                queue.push((lowering[i].clone(), k));
            }
        }
        for i in 0..s.rank() {
            let el = alg.express(0, &s.coroots[i]).expect("h^tau lies in g_0");
            let cols = (0..dim).map(|u| SVec::single(u, weights[u][i].clone())).collect();
            if let Some(k) = push(el.clone(), SMat { rows: dim, cols }, &mut mats, &mut ech) {
                queue.push((el, k));
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let (el, k) = queue[head].clone();
            head += 1;
            for (gel, gk) in gen_ids.clone() {
                let br = alg.bracket_vec(&mv0(&gel), &mv0(&el)).v;
                if br.is_zero() {
                    continue;
                }
                let mat = mats[gk].compose(&mats[k]).sub(&mats[k].compose(&mats[gk]));
                if let Some(nk) = push(br.clone(), mat, &mut mats, &mut ech) {
                    queue.push((br, nk));
                }
            }
        }
        let d0 = alg.dim_at(0);
        assert_eq!(ech.rank(), d0, "generators span g_0");
        let action = (0..d0)
            .map(|p| {
                let combo = ech.express(&SVec::unit(p)).unwrap();
                let mut m = SMat::zeros(dim, dim);
                for (k, c) in combo.iter() {
                    m = m.axpy(c, &mats[*k]);
                }
                m
            })
            .collect();
        Ok(FiniteModule { dim, weights, depth, origin, lowering, raising, action })
    }

    /// Contravariant form with `b(v_+, v_+) = 1`.
    pub fn gram(&self, alg: &LoopAlgebra) -> Vec<Vec<Q>> {
        let n0 = self.dim;
        let mut g0 = vec![vec![Q::zero(); n0]; n0];
        g0[0][0] = Q::one();
        for b in 1..n0 {
            let (j, parent) = self.origin[b].unwrap();
            let vf = alg.varpi_vec(&mv0(&self.lowering[j]));
            for w in 0..n0 {
                let img = self.act_vec(&vf.v, &SVec::unit(w));
                g0[b][w] = -row_dot(&g0[parent], &img);
            }
        }
        g0
    }

    pub fn act_vec(&self, x: &SVec, v: &SVec) -> SVec {
        let mut acc = Acc::new();
        for (p, c) in x.iter() {
            acc.add_vec(c, &self.action[*p].apply(v));
        }
        acc.finish()
    }
}

pub(crate) fn mv0(v: &SVec) -> ModeVec {
    ModeVec { deg: 0, v: v.clone(), central: Q::zero() }
}

pub(crate) fn to_lie(alg: &LoopAlgebra, deg: i64, v: &SVec) -> SVec {
    let mut acc = Acc::new();
    for (p, c) in v.iter() {
        acc.add_vec(c, &alg.basis[alg.residue(deg)][*p]);
    }
    acc.finish()
}

/// Weight of a homogeneous element given in eigenbasis coordinates.
fn element_weight(alg: &LoopAlgebra, v: &SVec) -> Weight {
    let (p, _) = v.0[0];
    let w = alg.weights[0][p].clone();
    for (p2, _) in v.iter() {
        assert_eq!(alg.weights[0][*p2], w, "generator is not a weight vector");
    }
    w
}

/// Graded module on which modes act layer by layer.
pub trait ModeModule {
    fn level(&self) -> &Q;
    fn layer_dim(&self, d: usize) -> usize;
    fn act_mode(&self, mode: Mode, d: usize, v: &SVec) -> Result<SVec>;

    fn act_modevec(&self, x: &ModeVec, d: usize, v: &SVec) -> Result<SVec> {
        let mut acc = Acc::new();
        for (p, c) in x.v.iter() {
            acc.add_vec(c, &self.act_mode(Mode::new(x.deg, *p), d, v)?);
        }
        if !x.central.is_zero() {
            acc.add_vec(&(&x.central * self.level()), v);
        }
        Ok(acc.finish())
    }
}

impl ModeModule for HighestWeightModule {
    fn level(&self) -> &Q {
        &self.level
    }

    fn layer_dim(&self, d: usize) -> usize {
        self.dim(d)
    }

    fn act_mode(&self, mode: Mode, d: usize, v: &SVec) -> Result<SVec> {
        self.act(mode, d, v)
    }
}

/// Truncation of the integrable module `H(lambda)` at level `c`.
#[derive(Clone, Debug)]
pub struct HighestWeightModule {
    pub alg: Arc<LoopAlgebra>,
    pub lambda: Weight,
    pub level: Q,
    pub d_max: usize,
    pub top: FiniteModule,
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<Weight>>,
    /// for layers `d >= 1`: basis vector `b` equals `Y u` for `origin[d][b] = (Y, u)`
    pub origin: Vec<Vec<(Mode, usize)>>,
    action: HashMap<(Mode, usize), SMat>,
    gram: Vec<Vec<Vec<Q>>>,
}

impl HighestWeightModule {
    pub fn new(alg: Arc<LoopAlgebra>, lambda: &Weight, c: i64, d_max: usize) -> Result<Self> {
        let s = alg.sigma.clone();
        if c < 1 {
            return invalid(format!("level c = {c} must be >= 1"));
        }
        if lambda.len() != s.rank() || !s.in_dc(lambda, c) {
            return invalid(format!("weight {} is not in D_{c} for {}", fmt_weight(lambda), s.describe()));
        }
        let top = FiniteModule::new(&alg, lambda)?;
        let mut module = HighestWeightModule {
            alg,
            lambda: lambda.clone(),
            level: q(c),
            d_max,
            dims: vec![top.dim],
            weights: vec![top.weights.clone()],
            origin: vec![Vec::new()],
            top,
            action: HashMap::new(),
            gram: Vec::new(),
        };
        for d in 1..=d_max {
            module.build_layer(d);
        }
        module.build_gram();
        Ok(module)
    }

    pub fn dim(&self, d: usize) -> usize {
        self.dims.get(d).copied().unwrap_or(0)
    }

    /// Applies a mode to a vector of layer `d`.
    pub fn act(&self, mode: Mode, d: usize, v: &SVec) -> Result<SVec> {
        let target = d as i64 - mode.deg;
        if target < 0 || v.is_zero() {
            return Ok(SVec::zero());
        }
        if target as usize > self.d_max || d > self.d_max {
            return window(format!(
                "mode of degree {} on layer {d} leaves the truncation d <= {}",
                mode.deg, self.d_max
            ));
        }
        if mode.deg == 0 && d == 0 {
            return Ok(self.top.action[mode.idx].apply(v));
        }
        match self.action.get(&(mode, d)) {
            Some(m) => Ok(m.apply(v)),
            None => Ok(SVec::zero()),
        }
    }

    pub fn act_vec(&self, x: &ModeVec, d: usize, v: &SVec) -> Result<SVec> {
        let mut acc = Acc::new();
        for (p, c) in x.v.iter() {
            acc.add_vec(c, &self.act(Mode::new(x.deg, *p), d, v)?);
        }
        if !x.central.is_zero() {
            acc.add_vec(&(&x.central * &self.level), v);
        }
        Ok(acc.finish())
    }

    /// Matrix of a mode from layer `d` to layer `d - deg`.
    pub fn mode_matrix(&self, mode: Mode, d: usize) -> Result<SMat> {
        let target = d as i64 - mode.deg;
        let rows = if target < 0 { 0 } else { self.dim(target as usize) };
        let cols = (0..self.dim(d)).map(|b| self.act(mode, d, &SVec::unit(b))).collect::<Result<Vec<_>>>()?;
        Ok(SMat { rows, cols })
    }

    fn build_layer(&mut self, d: usize) {
        let alg = self.alg.clone();
        // offsets of positive-mode blocks in the stacked image
        let mut blocks: Vec<(Mode, usize)> = Vec::new();
        let mut off = 0usize;
        for j in 1..=d {
            for x in alg.modes_of_degree(j as i64) {
                blocks.push((x, off));
                off += self.dim(d - j);
            }
        }
        let mut ech = Echelon::new();
        let mut basis: Vec<(Mode, usize)> = Vec::new();
        let mut phis: Vec<SVec> = Vec::new();
        let mut cand_cols: Vec<(Mode, usize, SVec)> = Vec::new();
        for k in 1..=d {
            for y in alg.modes_of_degree(-(k as i64)) {
                for u in 0..self.dim(d - k) {
                    let uv = SVec::unit(u);
                    let mut acc = Acc::new();
                    for &(x, o) in &blocks {
                        let j = x.deg as usize;
                        // X Y u = Y (X u) + [X, Y] u
                        let mut img = Acc::new();
                        if j + k <= d {
                            let xu = self.act(x, d - k, &uv).unwrap();
                            img.add_vec(&Q::one(), &self.act(y, d - k - j, &xu).unwrap());
                        }
                        let br = alg.bracket(x, y);
                        img.add_vec(&Q::one(), &self.act_vec(&br, d - k, &uv).unwrap());
                        for (i, c) in img.finish().iter() {
                            acc.add(o + i, c);
                        }
                    }
                    let phi = acc.finish();
                    let idx = basis.len();
                    if ech.insert_labeled(phi.clone(), SVec::unit(idx)) {
                        basis.push((y, u));
                        phis.push(phi);
                        cand_cols.push((y, u, SVec::unit(idx)));
                    } else {
                        cand_cols.push((y, u, ech.express(&phi).unwrap()));
                    }
                }
            }
        }
        let n = basis.len();
        let mut neg: HashMap<Mode, Vec<SVec>> = HashMap::new();
        for (y, u, col) in cand_cols {
            let e = neg.entry(y).or_insert_with(|| vec![SVec::zero(); self.dim(d - (-y.deg) as usize)]);
            e[u] = col;
        }
        for (y, cols) in neg {
            self.action.insert((y, d - (-y.deg) as usize), SMat { rows: n, cols });
        }
        for &(x, o) in &blocks {
            let rows = self.dim(d - x.deg as usize);
            let cols = phis
                .iter()
                .map(|phi| SVec(phi.iter().filter(|(i, _)| *i >= o && *i < o + rows).map(|(i, c)| (i - o, c.clone())).collect()))
                .collect();
            self.action.insert((x, d), SMat { rows, cols });
        }
        let weights: Vec<Weight> = basis
            .iter()
            .map(|(y, u)| {
                let wy = alg.weight(*y);
                let wu = &self.weights[d - (-y.deg) as usize][*u];
                wy.iter().zip(wu).map(|(a, b)| a + b).collect()
            })
            .collect();
        self.dims.push(n);
        self.weights.push(weights);
        self.origin.push(basis.clone());
        // zero modes: Z Y u = Y (Z u) + [Z, Y] u
        for z in alg.modes_of_degree(0) {
            let cols = basis
                .iter()
                .map(|&(y, u)| {
                    let k = (-y.deg) as usize;
                    let uv = SVec::unit(u);
                    let zu = self.act(z, d - k, &uv).unwrap();
                    let mut acc = Acc::new();
                    acc.add_vec(&Q::one(), &self.act(y, d - k, &zu).unwrap());
                    let br = alg.bracket(z, y);
                    acc.add_vec(&Q::one(), &self.act_vec(&br, d - k, &uv).unwrap());
                    acc.finish()
                })
                .collect();
            self.action.insert((z, d), SMat { rows: n, cols });
        }
    }

    fn build_gram(&mut self) {
        let alg = self.alg.clone();
        self.gram = vec![self.top.gram(&alg)];
        for d in 1..=self.d_max {
            let n = self.dim(d);
            let mut g = vec![vec![Q::zero(); n]; n];
            for b in 0..n {
                let (y, u) = self.origin[d][b];
                let k = (-y.deg) as usize;
                let vy = alg.varpi(y);
                for w in 0..n {
                    let img = self.act_vec(&vy, d, &SVec::unit(w)).unwrap();
                    g[b][w] = -row_dot(&self.gram[d - k][u], &img);
                }
            }
            self.gram.push(g);
        }
    }

    /// Gram matrix of the contravariant form on layer `d`, normalized by `b(v_+, v_+) = 1`.
    pub fn gram(&self, d: usize) -> &Vec<Vec<Q>> {
        &self.gram[d]
    }

    /// Vectors of layer 0 of a given weight.
    pub fn top_weight_vectors(&self, w: &Weight) -> Vec<usize> {
        (0..self.top.dim).filter(|&i| &self.top.weights[i] == w).collect()
    }

    /// Eigenvalue of `[x_i[t^{s_i}], y_i[t^{-s_i}]]` on `v_+`.
    pub fn node_eigenvalues(&self) -> Vec<Q> {
        self.alg
            .node_generators()
            .iter()
            .map(|(x, y)| {
                let br = self.alg.bracket_vec(x, y);
                let v = self.act_vec(&br, 0, &SVec::unit(0)).unwrap();
                v.get(0)
            })
            .collect()
    }
}

pub(crate) fn row_dot(row: &[Q], v: &SVec) -> Q {
    let mut s = Q::zero();
    for (i, c) in v.iter() {
        s += &row[*i] * c;
    }
    s
}
