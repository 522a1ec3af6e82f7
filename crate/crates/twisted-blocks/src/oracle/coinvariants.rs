//! Brute-force coinvariants on the projective line for `Gamma` trivial or `Z/2`
//! acting by `z -> -z`.
//!
//! An extra free point `p` carries the vacuum representation of the untwisted
//! algebra; every marked point carries only its finite-dimensional module, on
//! which a function acts through its value. Functions have poles only on the
//! orbit of `p`. The vacuum representation is the PBW module `M` generated by
//! `|0>` modulo the submodule `K` generated by `e_theta[t^{-1}]^{c+1}|0>`.
//! Vectors of `M (x) W` are rewritten into `W` by trading each creation mode at
//! `p` for the remaining terms of a global function with the same polar part.
//! The coinvariants are `W_0` modulo `g_0 W` and the images of `K (x) W`; layer
//! `d` of the output uses the layers of `K` up to depth `d`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::lie::{LieElement, Series};
use crate::linalg::{q, Acc, Echelon, Q, SVec};
use crate::loops::{LoopAlgebra, Mode};
use crate::rep::{FiniteModule, ModeModule};
use crate::verma::VermaModule;
use crate::series::binom;
use crate::twist::{fmt_weight, standard, Automorphism, TauKind, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Point {
    /// fixed point `z = 0` (only for `Z/2`)
    Zero,
    /// `z = infinity`; fixed for `Z/2`
    Infinity,
    /// a point `z = a` with trivial stabilizer
    Free(i64),
}

/// Marked point with its highest weight. Fixed points take `g_0`-weights in the
/// coordinates of `sigma`; free points take untwisted weights of `g`.
#[derive(Clone, Debug)]
pub struct Marking {
    pub point: Point,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinvariantRun {
    /// coinvariant dimension with relations of total depth at most `d`, for `d = 0..`
    pub dims: Vec<usize>,
    pub stabilized: bool,
}

impl CoinvariantRun {
    pub fn value(&self) -> Option<usize> {
        if self.stabilized {
            self.dims.last().copied()
        } else {
            None
        }
    }
}

struct Generator {
    x: LieElement,
    parity: usize,
    weight: Weight,
}

pub struct Coinvariants {
    untw: Arc<LoopAlgebra>,
    tw: Arc<LoopAlgebra>,
    gamma: usize,
    level: i64,
    points: Vec<Point>,
    modules: Vec<FiniteModule>,
    strides: Vec<usize>,
    w_dim: usize,
    by_weight: HashMap<Weight, Vec<usize>>,
    zero_weight: Weight,
    p: i64,
    gens: Vec<Generator>,
    vacuum: Rc<Vacuum>,
    rho: HashMap<(usize, usize, usize), SVec>,
}

/// The vacuum side for a given `(g, c)`: the PBW module and the layers of `K`.
struct Vacuum {
    untw: Arc<LoopAlgebra>,
    module: VermaModule,
    null: Vec<Vec<SVec>>,
}

thread_local! {
    static VACUA: RefCell<HashMap<(Series, usize, i64), Rc<Vacuum>>> = RefCell::new(HashMap::new());
}

fn vacuum(series: Series, rank: usize, level: i64) -> Result<Rc<Vacuum>> {
    if let Some(v) = VACUA.with(|m| m.borrow().get(&(series, rank, level)).cloned()) {
        return Ok(v);
    }
    let untw_sigma = standard(series, rank, TauKind::Id, vec![0; rank], 1)?;
    let untw = Arc::new(LoopAlgebra::new(Arc::new(untw_sigma))?);
    let module = VermaModule::new(untw.clone(), &vec![Q::zero(); rank], level, level as usize + 2)?;
    let null = null_layers(&untw, &module)?;
    let v = Rc::new(Vacuum { untw, module, null });
    VACUA.with(|m| m.borrow_mut().insert((series, rank, level), v.clone()));
    Ok(v)
}

/// Spanning sets of the layers of `K`: `U(g) N` at depth `c + 1` and
/// `g[t^{-1}] U(g) N` at depth `c + 2`, where `N = e_theta[t^{-1}]^{c+1}|0>`.
fn null_layers(untw: &LoopAlgebra, v: &VermaModule) -> Result<Vec<Vec<SVec>>> {
    let gens = v.kernel_generators()?;
    let mut layers = vec![Vec::new(); v.d_max + 1];
    let Some((d0, n)) = gens.into_iter().next() else {
        return Ok(layers);
    };
    let mut ech = Echelon::new();
    let mut queue = vec![n];
    let mut basis = Vec::new();
    while let Some(x) = queue.pop() {
        if !ech.insert(x.clone()) {
            continue;
        }
        for z in untw.modes_of_degree(0) {
            queue.push(v.act_mode(z, d0, &x)?);
        }
        basis.push(x);
    }
    if d0 < v.d_max {
        for y in untw.modes_of_degree(-1) {
            for x in &basis {
                layers[d0 + 1].push(v.act_mode(y, d0, x)?);
            }
        }
    }
    layers[d0] = basis;
    Ok(layers)
}

/// Fixed-point weight `sigma` and the untwisted algebra for a `Gamma` of order `m`.
pub fn algebras(sigma: Arc<Automorphism>) -> Result<(Arc<LoopAlgebra>, Arc<LoopAlgebra>)> {
    let g = &sigma.g;
    let untw_sigma = standard(g.series, g.rank, TauKind::Id, vec![0; g.rank], 1)?;
    let untw = Arc::new(LoopAlgebra::new(Arc::new(untw_sigma))?);
    let tw = if sigma.m == 1 { untw.clone() } else { Arc::new(LoopAlgebra::new(sigma)?) };
    Ok((untw, tw))
}

impl Coinvariants {
    /// `sigma` of order 1 (trivial `Gamma`) or 2. The vacuum side is truncated at depth `c + 2`.
    pub fn new(sigma: Arc<Automorphism>, level: i64, markings: &[Marking]) -> Result<Self> {
        if level < 1 {
            return invalid(format!("level c = {level} must be >= 1"));
        }
        let gamma = sigma.m;
        if gamma > 2 {
            return invalid(format!("brute-force coinvariants support Gamma of order 1 or 2, not {gamma}"));
        }
        if gamma == 1 && sigma.r() != 1 {
            return invalid("trivial Gamma needs the identity automorphism");
        }
        let vac = vacuum(sigma.g.series, sigma.g.rank, level)?;
        let untw = vac.untw.clone();
        let tw = if sigma.m == 1 { untw.clone() } else { Arc::new(LoopAlgebra::new(sigma.clone())?) };
        let mut seen: Vec<Point> = Vec::new();
        let mut max_a = 0;
        for mk in markings {
            let clash = seen.iter().any(|s| match (s, &mk.point) {
                (Point::Free(a), Point::Free(b)) => a == b || (gamma == 2 && a == &-b),
                (x, y) => x == y,
            });
            if clash {
                return invalid("marked points must lie in distinct orbits");
            }
            match mk.point {
                Point::Zero if gamma == 1 => return invalid("z = 0 is only a fixed point for Z/2; use Free(0)"),
                Point::Free(0) if gamma == 2 => return invalid("z = 0 is fixed by Z/2; use Zero"),
                Point::Free(a) => max_a = max_a.max(a.abs()),
                _ => {}
            }
            seen.push(mk.point);
        }
        let restrict = |w: &Weight| -> Weight {
            let g = &sigma.g;
            sigma
                .coroots
                .iter()
                .map(|h| (0..g.rank).map(|a| h.get(g.h(a)) * &w[a]).sum())
                .collect()
        };
        let mut modules = Vec::new();
        let mut local_weights = Vec::new();
        for mk in markings {
            let fixed = gamma == 2 && matches!(mk.point, Point::Zero | Point::Infinity);
            if fixed {
                let m = FiniteModule::new(&tw, &mk.weight)?;
                local_weights.push(m.weights.clone());
                modules.push(m);
            } else {
                let m = FiniteModule::new(&untw, &mk.weight)?;
                local_weights.push(m.weights.iter().map(&restrict).collect());
                modules.push(m);
            }
        }
        let mut strides = vec![1usize; markings.len()];
        for i in (0..markings.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * modules[i + 1].dim;
        }
        let w_dim: usize = modules.iter().map(|m| m.dim).product();
        let k = sigma.rank();
        let zero_weight: Weight = vec![Q::zero(); k];
        let mut by_weight: HashMap<Weight, Vec<usize>> = HashMap::new();
        for idx in 0..w_dim {
            let mut w = zero_weight.clone();
            for (i, s) in strides.iter().enumerate() {
                let comp = (idx / s) % modules[i].dim;
                for (a, b) in w.iter_mut().zip(&local_weights[i][comp]) {
                    *a += b;
                }
            }
            by_weight.entry(w).or_default().push(idx);
        }
        let mut gens = Vec::new();
        for j in 0..gamma {
            for (p, x) in tw.basis[j].iter().enumerate() {
                gens.push(Generator { x: x.clone(), parity: j, weight: tw.weights[j][p].clone() });
            }
        }
        Ok(Coinvariants {
            untw,
            tw,
            gamma,
            level,
            points: markings.iter().map(|m| m.point).collect(),
            modules,
            strides,
            w_dim,
            by_weight,
            zero_weight,
            p: max_a + 1,
            gens,
            vacuum: vac,
            rho: HashMap::new(),
        })
    }

    pub fn w_dim(&self) -> usize {
        self.w_dim
    }

    pub fn invariant_dim(&self) -> usize {
        self.by_weight.get(&self.zero_weight).map_or(0, |v| v.len())
    }

    fn restrict(&self, w: &Weight) -> Weight {
        let s = &self.tw.sigma;
        let g = &s.g;
        s.coroots.iter().map(|h| (0..g.rank).map(|a| h.get(g.h(a)) * &w[a]).sum()).collect()
    }

    /// Splits `x` into components of parity `0` and `1` under `sigma`.
    fn split(&self, x: &LieElement) -> Vec<(usize, LieElement)> {
        if self.gamma == 1 {
            return vec![(0, x.clone())];
        }
        let s = &self.tw.sigma;
        let step = (s.m / s.r()) as i64;
        let mut parts: [Acc; 2] = [Acc::new(), Acc::new()];
        for (a, kk, v) in s.decompose(x) {
            let j = (step * a as i64 + kk).rem_euclid(2) as usize;
            for (i, c) in v.iter() {
                parts[j].add(*i, c);
            }
        }
        let [a, b] = parts;
        let mut out = Vec::new();
        for (j, acc) in [(0, a), (1, b)] {
            let v = acc.finish();
            if !v.is_zero() {
                out.push((j, v));
            }
        }
        out
    }

    /// Value of the basis function of pole order `k` and parity `j` at a point.
    fn value(&self, k: usize, parity: usize, pt: Point) -> Q {
        if k == 0 {
            return Q::one();
        }
        let p = q(self.p);
        let ki = k as i32;
        let eps = if parity == 0 { Q::one() } else { -Q::one() };
        let sgn = if k.is_multiple_of(2) { Q::one() } else { -Q::one() };
        let pw = |x: Q| -> Q { num_traits::pow::Pow::pow(x, -ki) };
        match pt {
            Point::Infinity => Q::zero(),
            Point::Free(a) => {
                let a = q(a);
                if self.gamma == 1 {
                    pw(&a - &p)
                } else {
                    pw(&a - &p) + eps * sgn * pw(a + p)
                }
            }
            Point::Zero => pw(-p.clone()) + eps * sgn * pw(p),
        }
    }

    /// Taylor coefficients at `p` (in `t = z - p`) of the function minus its pole `t^{-k}`.
    fn regular_part(&self, k: usize, parity: usize, n: usize) -> Vec<Q> {
        if self.gamma == 1 || k == 0 {
            return Vec::new();
        }
        let eps = if parity == 0 { Q::one() } else { -Q::one() };
        let sgn = if k.is_multiple_of(2) { Q::one() } else { -Q::one() };
        let two_p = q(2 * self.p);
        (0..=n)
            .map(|i| {
                let pw: Q = num_traits::pow::Pow::pow(two_p.clone(), -((k + i) as i32));
                &eps * &sgn * binom(-(k as i64), i) * pw
            })
            .collect()
    }

    /// Action on `W` of `x (x) f` for the basis function `f` of pole order `k`.
    fn act_w(&self, x: &LieElement, k: usize, parity: usize, w: usize) -> SVec {
        let mut acc = Acc::new();
        for (i, pt) in self.points.iter().enumerate() {
            let val = self.value(k, parity, *pt);
            if val.is_zero() {
                continue;
            }
            let fixed = self.gamma == 2 && matches!(pt, Point::Zero | Point::Infinity);
            let coords = if fixed { self.tw.express(0, x) } else { self.untw.express(0, x) }
                .expect("function value lies in the algebra acting at the point");
            let m = &self.modules[i];
            let s = self.strides[i];
            let comp = (w / s) % m.dim;
            let base = w - comp * s;
            for (c, a) in m.act_vec(&coords, &SVec::unit(comp)).iter() {
                acc.add(base + c * s, &(a * &val));
            }
        }
        acc.finish()
    }

    /// `x[t^n] v` on the vacuum module for `x` in `g`.
    fn act_vacuum(&self, x: &LieElement, n: i64, d: usize, v: &SVec) -> Result<SVec> {
        let coords = self.untw.express(0, x).expect("element of g");
        let mut acc = Acc::new();
        for (p, c) in coords.iter() {
            acc.add_vec(c, &self.vacuum.module.act_mode(Mode::new(n, *p), d, v)?);
        }
        Ok(acc.finish())
    }

    /// Image in `W` of `b (x) w` for a basis vector `b` of layer `d` of the vacuum module.
    fn reduce(&mut self, d: usize, b: usize, w: usize) -> Result<SVec> {
        if d == 0 {
            return Ok(SVec::unit(w));
        }
        if let Some(v) = self.rho.get(&(d, b, w)) {
            return Ok(v.clone());
        }
        let (y, u) = self.vacuum.module.split_first(d, b).expect("layer d > 0 vectors have a leading mode");
        let k = (-y.deg) as usize;
        let yel = self.untw.basis[0][y.idx].clone();
        let mut acc = Acc::new();
        for (j, yj) in self.split(&yel) {
            let reg = self.regular_part(k, j, d - k);
            for (i, c) in reg.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let img = self.act_vacuum(&yj, i as i64, d - k, &SVec::unit(u))?;
                for (bp, cb) in img.iter() {
                    let r = self.reduce(d - k - i, *bp, w)?;
                    acc.add_vec(&-(c * cb), &r);
                }
            }
            let aw = self.act_w(&yj, k, j, w);
            for (wp, cw) in aw.iter() {
                let r = self.reduce(d - k, u, *wp)?;
                acc.add_vec(&-cw.clone(), &r);
            }
        }
        let v = acc.finish();
        self.rho.insert((d, b, w), v.clone());
        Ok(v)
    }

    /// Coinvariant dimensions using the layers of `K` up to depth `d`, for `d = 0..=c+2`.
    /// `K` starts at depth `c + 1`; the run counts as stabilized when the values at
    /// depths `c + 1` and `c + 2` agree.
    pub fn run(&mut self) -> Result<CoinvariantRun> {
        let w0_dim = self.invariant_dim();
        let mut ech = Echelon::new();
        for gi in 0..self.gens.len() {
            if self.gens[gi].parity != 0 {
                continue;
            }
            let (x, xw) = (self.gens[gi].x.clone(), self.gens[gi].weight.clone());
            let target: Weight = xw.iter().map(|a| -a).collect();
            for &w in self.by_weight.get(&target).map(|v| v.as_slice()).unwrap_or(&[]) {
                ech.insert(self.act_w(&x, 0, 0, w));
            }
        }
        let vac = self.vacuum.clone();
        let kernel = &vac.null;
        let mut dims = Vec::new();
        for (d, layer) in kernel.iter().enumerate() {
            for v in layer {
                let (b0, _) = v.0[0];
                let wt = self.restrict(&self.vacuum.module.basis_weight(d, b0));
                let target: Weight = wt.iter().map(|a| -a).collect();
                let ws = self.by_weight.get(&target).cloned().unwrap_or_default();
                for w in ws {
                    let mut acc = Acc::new();
                    for (b, c) in v.iter() {
                        let r = self.reduce(d, *b, w)?;
                        acc.add_vec(c, &r);
                    }
                    ech.insert(acc.finish());
                }
            }
            dims.push(w0_dim - ech.rank());
        }
        let c = self.level as usize;
        let stabilized = dims[c + 1] == dims[c + 2];
        Ok(CoinvariantRun { dims, stabilized })
    }
}

/// Convenience wrapper for `sl_n`-type algebras with trivial `Gamma`.
pub fn untwisted(series: Series, rank: usize, level: i64, weights: &[Weight]) -> Result<CoinvariantRun> {
    let sigma = Arc::new(standard(series, rank, TauKind::Id, vec![0; rank], 1)?);
    let markings: Vec<Marking> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| Marking { point: Point::Free(i as i64 + 1), weight: w.clone() })
        .collect();
    Coinvariants::new(sigma, level, &markings)?.run()
}

pub fn describe_markings(ms: &[Marking]) -> String {
    ms.iter().map(|m| format!("{:?}:{}", m.point, fmt_weight(&m.weight))).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::WeightSystem;
    use crate::twist::weight_from_ints;

    #[test]
    fn sl2_three_points_match_fusion() {
        let ws = WeightSystem::new(crate::lie::SimpleLieAlgebra::build(Series::A, 1).unwrap());
        for c in 1..=2i64 {
            for a in 0..=c {
                for b in 0..=c {
                    for n in 0..=c {
                        let wts = [weight_from_ints(&[a]), weight_from_ints(&[b]), weight_from_ints(&[n])];
                        let run = untwisted(Series::A, 1, c, &wts).unwrap();
                        let expect = ws.verlinde(c, 0, &[vec![a], vec![b], vec![n]]).unwrap();
                        assert_eq!(run.value(), Some(expect as usize), "c={c} {a} {b} {n}: {:?}", run.dims);
                    }
                }
            }
        }
    }

    #[test]
    fn z2_four_orbits_factorize() {
        let sigma = Arc::new(standard(Series::A, 2, TauKind::Flip, vec![0], 2).unwrap());
        let c = 2;
        let dc = sigma.enumerate_dc(c).unwrap();
        let tri = |a: &Weight, b: &Weight, n: &Weight| -> usize {
            let ms = [
                Marking { point: Point::Zero, weight: a.clone() },
                Marking { point: Point::Infinity, weight: b.clone() },
                Marking { point: Point::Free(2), weight: n.clone() },
            ];
            Coinvariants::new(sigma.clone(), c, &ms).unwrap().run().unwrap().value().unwrap()
        };
        let (l0, li) = (&dc[1], &dc[0]);
        let (na, nb) = (weight_from_ints(&[1, 0]), weight_from_ints(&[1, 0]));
        let ms = [
            Marking { point: Point::Zero, weight: l0.clone() },
            Marking { point: Point::Infinity, weight: li.clone() },
            Marking { point: Point::Free(2), weight: na.clone() },
            Marking { point: Point::Free(3), weight: nb.clone() },
        ];
        let direct = Coinvariants::new(sigma.clone(), c, &ms).unwrap().run().unwrap();
        let ramified: usize = dc.iter().map(|mu| tri(l0, mu, &na) * tri(&sigma.dual_weight(mu).unwrap(), li, &nb)).sum();
        assert_eq!(direct.value(), Some(ramified));
        assert_eq!(ramified, 1);
    }

    #[test]
    fn inner_involution_regression() {
        let sigma = Arc::new(standard(Series::A, 1, TauKind::Id, vec![1], 2).unwrap());
        let zero = weight_from_ints(&[0]);
        let ms = [
            Marking { point: Point::Zero, weight: zero.clone() },
            Marking { point: Point::Infinity, weight: zero },
        ];
        let run = Coinvariants::new(sigma, 2, &ms).unwrap().run().unwrap();
        assert_eq!(run.dims, vec![1, 1, 1, 1, 1]);
        assert_eq!(run.value(), Some(1));
    }

    #[test]
    fn single_vacuum_point() {
        let run = untwisted(Series::A, 1, 1, &[weight_from_ints(&[0])]).unwrap();
        assert_eq!(run.value(), Some(1));
    }

    #[test]
    fn moebius_repositioning() {
        let sigma = Arc::new(standard(Series::A, 1, TauKind::Id, vec![0], 1).unwrap());
        let w = [weight_from_ints(&[1]), weight_from_ints(&[1]), weight_from_ints(&[2])];
        let mut values = Vec::new();
        for pts in [[1, 2, 3], [-4, 1, 7], [2, -3, 5]] {
            let ms: Vec<Marking> = pts.iter().zip(&w).map(|(a, w)| Marking { point: Point::Free(*a), weight: w.clone() }).collect();
            values.push(Coinvariants::new(sigma.clone(), 2, &ms).unwrap().run().unwrap());
        }
        assert!(values.iter().all(|v| v == &values[0]), "{values:?}");
        assert_eq!(values[0].value(), Some(1));
    }

    #[test]
    fn dims_nonincreasing() {
        let sigma = Arc::new(standard(Series::A, 2, TauKind::Flip, vec![0], 2).unwrap());
        let dc = sigma.enumerate_dc(2).unwrap();
        let ms = [
            Marking { point: Point::Zero, weight: dc[dc.len() - 1].clone() },
            Marking { point: Point::Infinity, weight: dc[dc.len() - 1].clone() },
            Marking { point: Point::Free(2), weight: weight_from_ints(&[1, 1]) },
        ];
        let run = Coinvariants::new(sigma, 2, &ms).unwrap().run().unwrap();
        assert!(run.dims.windows(2).all(|p| p[0] >= p[1]), "{:?}", run.dims);
        assert!(run.stabilized);
    }

    #[test]
    fn propagation_round_trip() {
        let sigma = Arc::new(standard(Series::A, 2, TauKind::Flip, vec![0], 2).unwrap());
        let dc = sigma.enumerate_dc(2).unwrap();
        let base = vec![
            Marking { point: Point::Zero, weight: dc[0].clone() },
            Marking { point: Point::Infinity, weight: dc[0].clone() },
            Marking { point: Point::Free(2), weight: weight_from_ints(&[1, 1]) },
        ];
        let mut with_zero = base.clone();
        with_zero.push(Marking { point: Point::Free(3), weight: weight_from_ints(&[0, 0]) });
        let a = Coinvariants::new(sigma.clone(), 2, &base).unwrap().run().unwrap();
        let b = Coinvariants::new(sigma, 2, &with_zero).unwrap().run().unwrap();
        assert_eq!(a.value(), b.value());
    }
}
