//! Generalized Verma modules `M(lambda) = U(L_-) (x) V(lambda)` in a PBW basis,
//! the submodule `K` generated by the integrability vectors, the contravariant
//! form, and the sl2 identities used to test them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{invalid, window, Result};
use crate::linalg::{dense_rank, q, q_to_i64, Acc, Echelon, Q, SVec};
use crate::loops::{LoopAlgebra, Mode};
use crate::rep::{row_dot, FiniteModule, ModeModule};
use crate::twist::{fmt_weight, Weight};

pub type Monomial = Vec<Mode>;

#[derive(Debug)]
pub struct VermaModule {
    pub alg: Arc<LoopAlgebra>,
    pub lambda: Weight,
    pub level: Q,
    pub d_max: usize,
    pub top: FiniteModule,
    pub monomials: Vec<Vec<Monomial>>,
    index: Vec<HashMap<Monomial, usize>>,
    memo: RefCell<HashMap<(Mode, usize, usize), SVec>>,
}

fn gen_monomials(alg: &LoopAlgebra, d: usize, min: Option<Mode>, cur: &mut Monomial, out: &mut Vec<Monomial>) {
    if d == 0 {
        out.push(cur.clone());
        return;
    }
    for k in 1..=d {
        for y in alg.modes_of_degree(-(k as i64)) {
            if let Some(mn) = min {
                if y < mn {
                    continue;
                }
            }
            cur.push(y);
            gen_monomials(alg, d - k, Some(y), cur, out);
            cur.pop();
        }
    }
}

impl VermaModule {
    pub fn new(alg: Arc<LoopAlgebra>, lambda: &Weight, c: i64, d_max: usize) -> Result<Self> {
        let top = FiniteModule::new(&alg, lambda)?;
        let mut monomials = Vec::new();
        let mut index = Vec::new();
        for d in 0..=d_max {
            let mut out = Vec::new();
            gen_monomials(&alg, d, None, &mut Vec::new(), &mut out);
            out.sort();
            index.push(out.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect());
            monomials.push(out);
        }
        Ok(VermaModule {
            alg,
            lambda: lambda.clone(),
            level: q(c),
            d_max,
            top,
            monomials,
            index,
            memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn dim(&self, d: usize) -> usize {
        self.monomials.get(d).map(|m| m.len() * self.top.dim).unwrap_or(0)
    }

    /// For a basis vector `Y rest (x) v` of layer `d`: the leading mode `Y` and the index of
    /// `rest (x) v` in layer `d + deg Y`.
    pub fn split_first(&self, d: usize, b: usize) -> Option<(Mode, usize)> {
        let (mono, v) = self.decode(d, b);
        let (&y, rest) = mono.split_first()?;
        let d1 = (d as i64 + y.deg) as usize;
        Some((y, self.encode(d1, &rest.to_vec(), v)))
    }

    /// Weight of a basis vector.
    pub fn basis_weight(&self, d: usize, b: usize) -> Weight {
        let (mono, v) = self.decode(d, b);
        let mut w = self.top.weights[v].clone();
        for y in mono {
            for (a, c) in w.iter_mut().zip(self.alg.weight(*y)) {
                *a += c;
            }
        }
        w
    }

    fn encode(&self, d: usize, mono: &Monomial, v: usize) -> usize {
        self.index[d][mono] * self.top.dim + v
    }

    fn decode(&self, d: usize, b: usize) -> (&Monomial, usize) {
        (&self.monomials[d][b / self.top.dim], b % self.top.dim)
    }

    fn act_basis(&self, x: Mode, d: usize, b: usize) -> Result<SVec> {
        let target = d as i64 - x.deg;
        if target < 0 {
            return Ok(SVec::zero());
        }
        if target as usize > self.d_max {
            return window(format!("mode of degree {} on layer {d} leaves the truncation d <= {}", x.deg, self.d_max));
        }
        if let Some(v) = self.memo.borrow().get(&(x, d, b)) {
            return Ok(v.clone());
        }
        let (mono, v) = self.decode(d, b);
        let mono = mono.clone();
        let res = if mono.is_empty() {
            if x.deg > 0 {
                SVec::zero()
            } else if x.deg == 0 {
                self.top.action[x.idx].apply(&SVec::unit(v))
            } else {
                SVec::unit(self.encode(target as usize, &vec![x], v))
            }
        } else if x.deg < 0 && x <= mono[0] {
            let mut m = vec![x];
            m.extend_from_slice(&mono);
            SVec::unit(self.encode(target as usize, &m, v))
        } else {
            // X Y rest = Y (X rest) + [X, Y] rest
            let y = mono[0];
            let d1 = (d as i64 + y.deg) as usize;
            let rest = SVec::unit(self.encode(d1, &mono[1..].to_vec(), v));
            let xr = self.act_mode(x, d1, &rest)?;
            let mut acc = Acc::new();
            acc.add_vec(&Q::one(), &self.act_mode(y, (d1 as i64 - x.deg) as usize, &xr)?);
            acc.add_vec(&Q::one(), &self.act_modevec(&self.alg.bracket(x, y), d1, &rest)?);
            acc.finish()
        };
        self.memo.borrow_mut().insert((x, d, b), res.clone());
        Ok(res)
    }

    /// Generators `y_i[t^{-s_i}]^{n_i + 1} v_+` for nodes with `s_i > 0`, with their layers.
    pub fn kernel_generators(&self) -> Result<Vec<(usize, SVec)>> {
        let s = &self.alg.sigma;
        let lab = s.labels();
        let c = q_to_i64(&self.level).unwrap();
        let ns = s.n_coefficients(&self.lambda, c);
        let gens = self.alg.node_generators();
        let mut out = Vec::new();
        for i in 0..ns.len() {
            if lab.s[i] == 0 {
                continue;
            }
            let Some(n) = q_to_i64(&ns[i]).filter(|n| *n >= 0) else {
                return invalid(format!("weight {} is not in D_{c}", fmt_weight(&self.lambda)));
            };
            let depth = (lab.s[i] * (n + 1)) as usize;
            if depth > self.d_max {
                continue;
            }
            let y = &gens[i].1;
            let mut v = SVec::unit(0);
            let mut d = 0usize;
            for _ in 0..=n {
                v = self.act_modevec(y, d, &v)?;
                d += lab.s[i] as usize;
            }
            out.push((d, v));
        }
        Ok(out)
    }

    /// Bases of the layers of `K`, the submodule generated by the kernel generators.
    pub fn kernel(&self) -> Result<Vec<Vec<SVec>>> {
        let gens = self.kernel_generators()?;
        for (d, v) in &gens {
            for j in 1..=*d {
                for x in self.alg.modes_of_degree(j as i64) {
                    if !self.act_mode(x, *d, v)?.is_zero() {
                        return crate::error::inconsistent("kernel generator is not singular");
                    }
                }
            }
        }
        let mut layers: Vec<Vec<SVec>> = Vec::new();
        for d in 0..=self.d_max {
            let mut ech = Echelon::new();
            let mut basis: Vec<SVec> = Vec::new();
            let mut queue: Vec<SVec> = Vec::new();
            let add = |v: SVec, ech: &mut Echelon, basis: &mut Vec<SVec>, queue: &mut Vec<SVec>| {
                if ech.insert(v.clone()) {
                    basis.push(v.clone());
                    queue.push(v);
                }
            };
            for (gd, v) in &gens {
                if *gd == d {
                    add(v.clone(), &mut ech, &mut basis, &mut queue);
                }
            }
            for k in 1..=d {
                for y in self.alg.modes_of_degree(-(k as i64)) {
                    for u in &layers[d - k] {
                        add(self.act_mode(y, d - k, u)?, &mut ech, &mut basis, &mut queue);
                    }
                }
            }
            while let Some(v) = queue.pop() {
                for z in self.alg.modes_of_degree(0) {
                    add(self.act_mode(z, d, &v)?, &mut ech, &mut basis, &mut queue);
                }
            }
            layers.push(basis);
        }
        Ok(layers)
    }

    /// Gram matrices of the contravariant form on layers `0..=d_max`.
    pub fn gram(&self) -> Result<Vec<Vec<Vec<Q>>>> {
        let mut out = vec![self.top.gram(&self.alg)];
        for d in 1..=self.d_max {
            let n = self.dim(d);
            let mut g = vec![vec![Q::zero(); n]; n];
            for b in 0..n {
                let (mono, v) = self.decode(d, b);
                let y = mono[0];
                let d1 = (d as i64 + y.deg) as usize;
                let rest = self.encode(d1, &mono[1..].to_vec(), v);
                let vy = self.alg.varpi(y);
                for w in 0..n {
                    let img = self.act_modevec(&vy, d, &SVec::unit(w))?;
                    g[b][w] = -row_dot(&out[d1][rest], &img);
                }
            }
            out.push(g);
        }
        Ok(out)
    }
}

impl ModeModule for VermaModule {
    fn level(&self) -> &Q {
        &self.level
    }

    fn layer_dim(&self, d: usize) -> usize {
        self.dim(d)
    }

    fn act_mode(&self, mode: Mode, d: usize, v: &SVec) -> Result<SVec> {
        let mut acc = Acc::new();
        for (b, c) in v.iter() {
            acc.add_vec(c, &self.act_basis(mode, d, *b)?);
        }
        Ok(acc.finish())
    }
}

/// Number of PBW monomials of each degree, `prod_k (1 - q^k)^{-dim g_{-k}}`, by
/// direct power-series multiplication.
pub fn pbw_series(alg: &LoopAlgebra, d_max: usize) -> Vec<u64> {
    let mut series = vec![0u64; d_max + 1];
    series[0] = 1;
    for k in 1..=d_max {
        for _ in 0..alg.dim_at(-(k as i64)) {
            for n in k..=d_max {
                series[n] += series[n - k];
            }
        }
    }
    series
}

/// Result of checking `y^p v = alpha x^q y^{p+q} v` on a highest-weight vector.
#[derive(Clone, Debug, PartialEq)]
pub struct KacCheck {
    pub node: usize,
    pub p: usize,
    pub q: usize,
    pub n: Q,
    pub alpha_formula: Q,
    pub alpha_vectors: Option<Q>,
}

impl KacCheck {
    pub fn holds(&self) -> bool {
        self.alpha_vectors.as_ref() == Some(&self.alpha_formula)
    }
}

/// Checks the sl2 identity for the triple at affine node `node` on `v_+`.
pub fn kac_identity<M: ModeModule>(module: &M, alg: &LoopAlgebra, node: usize, p: usize, qq: usize) -> Result<KacCheck> {
    let gens = alg.node_generators();
    let (x, y) = &gens[node];
    let s = y.deg.unsigned_abs() as usize;
    let h = alg.bracket_vec(x, y);
    let v0 = SVec::unit(0);
    let n = module.act_modevec(&h, 0, &v0)?.get(0);
    let mut prod = Q::one();
    for j in p..p + qq {
        prod *= q(j as i64 + 1) * (&n - q(j as i64));
    }
    if prod.is_zero() {
        return invalid("identity needs alpha != 0: the product vanishes");
    }
    let alpha_formula = Q::one() / &prod;
    let pow = |k: usize| -> Result<SVec> {
        let mut v = v0.clone();
        for i in 0..k {
            v = module.act_modevec(y, i * s, &v)?;
        }
        Ok(v)
    };
    let yp = pow(p)?;
    let mut w = pow(p + qq)?;
    let mut d = (p + qq) * s;
    for _ in 0..qq {
        w = module.act_modevec(x, d, &w)?;
        d -= s;
    }
    // w should be prod * yp
    let alpha_vectors = if yp.is_zero() || w.is_zero() {
        None
    } else {
        let (i, c) = &yp.0[0];
        let r = c / w.get(*i);
        if w.scale(&r) == yp {
            Some(r)
        } else {
            None
        }
    };
    Ok(KacCheck { node, p, q: qq, n, alpha_formula, alpha_vectors })
}

/// Dimension of the radical of each layer's contravariant form.
pub fn radical_dims(gram: &[Vec<Vec<Q>>]) -> Vec<usize> {
    gram.iter().map(|g| g.len() - dense_rank(g)).collect()
}

/// Checks that each vector of `K` pairs to zero with the whole layer.
pub fn kernel_in_radical(gram: &[Vec<Vec<Q>>], kernel: &[Vec<SVec>]) -> bool {
    kernel.iter().enumerate().all(|(d, ks)| {
        ks.iter().all(|k| (0..gram[d].len()).all(|w| {
            let col: Vec<Q> = gram[d].iter().map(|r| r[w].clone()).collect();
            row_dot(&col, k).is_zero()
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Series;
    use crate::rep::HighestWeightModule;
    use crate::twist::{standard, weight_from_ints, TauKind};

    fn alg(series: Series, n: usize, t: TauKind, h: Vec<i64>, m: usize) -> Arc<LoopAlgebra> {
        Arc::new(LoopAlgebra::new(Arc::new(standard(series, n, t, h, m).unwrap())).unwrap())
    }

    #[test]
    fn pbw_dimensions() {
        let sl2 = alg(Series::A, 1, TauKind::Id, vec![0], 1);
        let m = VermaModule::new(sl2.clone(), &weight_from_ints(&[0]), 1, 5).unwrap();
        let dims: Vec<usize> = (0..=5).map(|d| m.dim(d)).collect();
        assert_eq!(dims, vec![1, 3, 9, 22, 51, 108]);
        let a2 = alg(Series::A, 2, TauKind::Flip, vec![0], 2);
        let m = VermaModule::new(a2.clone(), &weight_from_ints(&[1]), 1, 4).unwrap();
        let s = pbw_series(&a2, 4);
        for d in 0..=4 {
            assert_eq!(m.dim(d) as u64, s[d] * 2);
        }
    }

    #[test]
    fn verma_mod_kernel_matches_direct_construction() {
        for (a, lam, c, d) in [
            (alg(Series::A, 1, TauKind::Id, vec![0], 1), vec![0], 1, 4),
            (alg(Series::A, 1, TauKind::Id, vec![0], 1), vec![1], 2, 3),
            (alg(Series::A, 2, TauKind::Flip, vec![0], 2), vec![1], 1, 3),
            (alg(Series::A, 1, TauKind::Id, vec![1], 2), vec![0], 2, 3),
        ] {
            let lam = weight_from_ints(&lam);
            let m = VermaModule::new(a.clone(), &lam, c, d).unwrap();
            let k = m.kernel().unwrap();
            let h = HighestWeightModule::new(a.clone(), &lam, c, d).unwrap();
            for i in 0..=d {
                assert_eq!(m.dim(i) - k[i].len(), h.dim(i), "layer {i}");
            }
            let g = m.gram().unwrap();
            assert_eq!(radical_dims(&g), k.iter().map(|l| l.len()).collect::<Vec<_>>());
            assert!(kernel_in_radical(&g, &k));
        }
    }

    #[test]
    fn kac_identities() {
        let a = alg(Series::A, 1, TauKind::Id, vec![0], 1);
        let m = VermaModule::new(a.clone(), &weight_from_ints(&[1]), 2, 4).unwrap();
        let h = HighestWeightModule::new(a.clone(), &weight_from_ints(&[1]), 2, 4).unwrap();
        for (node, cases) in [(0, vec![(0, 1)]), (1, vec![(0, 1), (2, 1), (2, 2), (3, 1)])] {
            for (p, qq) in cases {
                let c1 = kac_identity(&m, &a, node, p, qq).unwrap();
                assert!(c1.holds(), "{c1:?}");
                if let Ok(c2) = kac_identity(&h, &a, node, p, qq) {
                    if c2.alpha_vectors.is_some() {
                        assert!(c2.holds());
                    }
                }
            }
        }
        assert!(kac_identity(&m, &a, 0, 1, 1).is_err());
    }

    #[test]
    fn straightening_respects_brackets() {
        let a = alg(Series::A, 2, TauKind::Flip, vec![0], 2);
        let m = VermaModule::new(a.clone(), &weight_from_ints(&[0]), 2, 4).unwrap();
        let ms: Vec<Mode> = (-1..=1).flat_map(|d| a.modes_of_degree(d).collect::<Vec<_>>()).collect();
        for d in 1..=2usize {
            for b in 0..m.dim(d) {
                let v = SVec::unit(b);
                for &x in &ms {
                    for &y in &ms {
                        let dy = (d as i64 - y.deg) as usize;
                        let dx = (d as i64 - x.deg) as usize;
                        let xy = m.act_mode(x, dy, &m.act_mode(y, d, &v).unwrap()).unwrap();
                        let yx = m.act_mode(y, dx, &m.act_mode(x, d, &v).unwrap()).unwrap();
                        let br = m.act_modevec(&a.bracket(x, y), d, &v).unwrap();
                        assert_eq!(xy.sub(&yx), br);
                    }
                }
            }
        }
    }
}
