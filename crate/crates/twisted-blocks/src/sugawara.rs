//! Sugawara operators on truncated highest-weight modules.
//!
//! `L_k` corresponds to the vector field `-(1/m) t^{mk+1} d/dt`. Two constructions
//! are provided: a weighted sum over pairs of modes, and the usual normal-ordered
//! quadratic Casimir sum. Modes may be taken with respect to the coordinate `t`
//! or to `t' = (1 + a t^m) t`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{window, Result};
use crate::linalg::{inverse, q, Q, SVec};
use crate::loops::Mode;
use crate::rep::HighestWeightModule;
use crate::series::{binom, Laurent, PowerSeries};

/// Vector spread over several layers.
pub type GVec = BTreeMap<usize, SVec>;

pub fn gv_single(d: usize, v: SVec) -> GVec {
    let mut g = GVec::new();
    if !v.is_zero() {
        g.insert(d, v);
    }
    g
}

pub fn gv_axpy(out: &mut GVec, c: &Q, v: &GVec) {
    for (d, x) in v {
        let e = out.entry(*d).or_insert_with(SVec::zero);
        *e = e.axpy(c, x);
        if e.is_zero() {
            out.remove(d);
        }
    }
}

pub fn gv_sub(a: &GVec, b: &GVec) -> GVec {
    let mut out = a.clone();
    gv_axpy(&mut out, &-Q::one(), b);
    out
}

pub fn gv_scale(a: &GVec, c: &Q) -> GVec {
    let mut out = GVec::new();
    gv_axpy(&mut out, c, a);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coordinate {
    T,
    /// `t' = (1 + a t^m) t`
    Shifted(Q),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// `L_k = (2 kappa / (m k)) sum_{n>0} n sum_a (u_a[mk-n] u^a[n] - u_a[-n] u^a[n+mk])`
    Weighted,
    /// `L_k = kappa sum_j :u_a[j] u^a[mk-j]:`
    NormalOrdered,
}

pub struct Sugawara<'a> {
    pub module: &'a HighestWeightModule,
    pub kappa: Q,
    /// dual basis: `dual[j][p]` pairs to one with basis vector `p` of `g_j`
    dual: Vec<Vec<SVec>>,
    pub vacuum_constant: Q,
}

impl<'a> Sugawara<'a> {
    pub fn new(module: &'a HighestWeightModule) -> Self {
        let alg = &module.alg;
        let g = &alg.sigma.g;
        let m = alg.m;
        let kappa = Q::one() / (q(2) * (&module.level + q(g.dual_coxeter)));
        let mut dual = Vec::new();
        for j in 0..m {
            let nj = alg.basis[j].len();
            let f: Vec<Vec<Q>> = (0..nj)
                .map(|p| (0..nj).map(|r| alg.form_modes(Mode::new(j as i64, p), Mode::new(-(j as i64), r))).collect())
                .collect();
            let inv = inverse(&f).expect("form pairs g_j with g_{-j}");
            dual.push((0..nj).map(|p| SVec::from_dense(&(0..nj).map(|r| inv[r][p].clone()).collect::<Vec<_>>())).collect());
        }
        let mm = m as i64;
        let s: i64 = (0..mm).map(|n| n * (mm - n) * alg.basis[n as usize].len() as i64).sum();
        let vacuum_constant = &module.level * q(s) / q(2 * mm * mm);
        Sugawara { module, kappa, dual, vacuum_constant }
    }

    pub fn m(&self) -> i64 {
        self.module.alg.m as i64
    }

    /// Virasoro central charge `dim g * c / (c + h^vee)`.
    pub fn central_charge(&self) -> Q {
        let g = &self.module.alg.sigma.g;
        q(g.dimension as i64) * &self.module.level / (&self.module.level + q(g.dual_coxeter))
    }

    fn act_t(&self, mode: Mode, v: &GVec) -> Result<GVec> {
        let mut out = GVec::new();
        for (d, x) in v {
            let target = *d as i64 - mode.deg;
            if target < 0 {
                continue;
            }
            let y = self.module.act(mode, *d, x)?;
            gv_axpy(&mut out, &Q::one(), &gv_single(target as usize, y));
        }
        Ok(out)
    }

    /// Mode `b_p[u^n]` in the given coordinate applied to a graded vector.
    pub fn act_mode(&self, coord: &Coordinate, deg: i64, idx: usize, v: &GVec) -> Result<GVec> {
        match coord {
            Coordinate::T => self.act_t(Mode::new(deg, idx), v),
            Coordinate::Shifted(a) => {
                let m = self.m();
                let top = v.keys().next_back().copied().unwrap_or(0) as i64;
                let mut out = GVec::new();
                let mut j = 0usize;
                let mut apow = Q::one();
                while deg + m * j as i64 <= top {
                    let c = binom(deg, j) * &apow;
                    if !c.is_zero() {
                        let r = self.act_t(Mode::new(deg + m * j as i64, idx), v)?;
                        gv_axpy(&mut out, &c, &r);
                    }
                    j += 1;
                    apow *= a;
                }
                Ok(out)
            }
        }
    }

    /// `sum_a u_a[l] u^a[r] v` with `u_a` a basis of `g_l` and `u^a` its dual in `g_r`.
    fn pair(&self, coord: &Coordinate, l: i64, r: i64, v: &GVec) -> Result<GVec> {
        let alg = &self.module.alg;
        let res = alg.residue(l);
        let mut out = GVec::new();
        for p in 0..alg.basis[res].len() {
            let mut inner = GVec::new();
            for (qi, c) in self.dual[res][p].iter() {
                let w = self.act_mode(coord, r, *qi, v)?;
                gv_axpy(&mut inner, c, &w);
            }
            if inner.is_empty() {
                continue;
            }
            let w = self.act_mode(coord, l, p, &inner)?;
            gv_axpy(&mut out, &Q::one(), &w);
        }
        Ok(out)
    }

    /// `L_k v` for a graded vector.
    pub fn l(&self, route: Route, coord: &Coordinate, k: i64, v: &GVec) -> Result<GVec> {
        let m = self.m();
        let top = v.keys().next_back().copied().unwrap_or(0) as i64;
        let d_max = self.module.d_max as i64;
        if top - m * k > d_max {
            return window(format!("L_{k} on layer {top} leaves the truncation d <= {d_max}"));
        }
        let mut out = GVec::new();
        if k == 0 || route == Route::NormalOrdered {
            let mk = m * k;
            for j in (mk - top)..=top {
                let (lo, hi) = if j <= mk - j { (j, mk - j) } else { (mk - j, j) };
                if hi > top {
                    continue;
                }
                let w = self.pair(coord, lo, hi, v)?;
                gv_axpy(&mut out, &self.kappa, &w);
            }
            if k == 0 {
                gv_axpy(&mut out, &(&self.kappa * &self.vacuum_constant), v);
            }
            return Ok(out);
        }
        let pref = q(2) * &self.kappa / q(m * k);
        let nmax = top.max(top - m * k);
        for n in 1..=nmax {
            let c = &pref * q(n);
            if n <= top {
                let w = self.pair(coord, m * k - n, n, v)?;
                gv_axpy(&mut out, &c, &w);
            }
            if n + m * k <= top {
                let w = self.pair(coord, -n, n + m * k, v)?;
                gv_axpy(&mut out, &-c, &w);
            }
        }
        Ok(out)
    }

    /// `L_theta = sum_k (-m a_k) L_k` for `theta = sum_k a_k u^{mk+1} d/du`.
    pub fn l_theta(&self, coord: &Coordinate, theta: &[(i64, Q)], v: &GVec) -> Result<GVec> {
        let mut out = GVec::new();
        for (k, a) in theta {
            let w = self.l(Route::Weighted, coord, *k, v)?;
            gv_axpy(&mut out, &(-q(self.m()) * a), &w);
        }
        Ok(out)
    }
}

/// Rewrites `t^{mk+1} d/dt` in the coordinate `t' = (1 + a t^m) t`, as pairs
/// `(j, a'_j)` meaning `a'_j t'^{mj+1} d/dt'`, up to `t'`-order `n`.
pub fn reexpress_field(m: usize, a: &Q, k: usize, n: usize) -> Vec<(i64, Q)> {
    // t' as a series in t, and its inverse
    let mut tp = PowerSeries::zero(n + 1);
    tp.c[1] = Q::one();
    if m < n {
        tp.c[1 + m] = a.clone();
    }
    let t_of_tp = tp.reversion();
    // theta(t') = (dt'/dt) t^{mk+1}, then substitute t = t(t')
    let coeff = tp.derivative().mul(&PowerSeries::from_laurent(&Laurent::monomial((m * k + 1) as i64, Q::one()), n + 1));
    let in_tp = coeff.compose(&t_of_tp);
    let mut out = Vec::new();
    for (e, c) in in_tp.c.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        assert_eq!((e as i64 - 1).rem_euclid(m as i64), 0, "field keeps its twist");
        out.push(((e as i64 - 1) / m as i64, c.clone()));
    }
    out
}

/// Applies an operator layer by layer to a whole basis and collects columns.
pub fn basis_vectors(h: &HighestWeightModule, d: usize) -> Vec<GVec> {
    (0..h.dim(d)).map(|b| gv_single(d, SVec::unit(b))).collect()
}

/// Returns `Some(s)` when `diff(v_b) = s v_b` for every basis vector listed.
pub fn common_scalar(vs: &[(GVec, GVec)]) -> Option<Q> {
    let mut s: Option<Q> = None;
    for (v, img) in vs {
        let (d, x) = v.iter().next().unwrap();
        let (_, c) = x.0[0].clone();
        let val = img.get(d).map(|y| y.get(x.0[0].0)).unwrap_or_else(Q::zero) / c;
        let expect = gv_scale(v, &val);
        if *img != expect {
            return None;
        }
        match &s {
            None => s = Some(val),
            Some(t) if *t != val => return None,
            _ => {}
        }
    }
    Some(s.unwrap_or_else(Q::zero))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

/// Checks `[L_n, L_k] - (n-k) L_{n+k} = delta_{n,-k} (n^3-n)/12 * c_vir` on every basis
/// vector whose intermediate layers stay inside the truncation.
pub fn check_virasoro(h: &HighestWeightModule, range: i64) -> Result<CheckReport> {
    let s = Sugawara::new(h);
    let m = s.m();
    let dm = h.d_max as i64;
    let mut rep = CheckReport::default();
    let coord = Coordinate::T;
    for n in -range..=range {
        for k in -range..=range {
            let expect = crate::series::vector_field_cocycle(
                m,
                &crate::series::virasoro_field(m, n),
                &crate::series::virasoro_field(m, k),
            ) * s.central_charge();
            for d in 0..=h.d_max {
                let di = d as i64;
                if [di - m * k, di - m * n, di - m * (n + k)].iter().any(|x| *x > dm) {
                    rep.skipped += h.dim(d);
                    continue;
                }
                for v in basis_vectors(h, d) {
                    let a = s.l(Route::Weighted, &coord, n, &s.l(Route::Weighted, &coord, k, &v)?)?;
                    let b = s.l(Route::Weighted, &coord, k, &s.l(Route::Weighted, &coord, n, &v)?)?;
                    let c = s.l(Route::Weighted, &coord, n + k, &v)?;
                    let defect = gv_sub(&gv_sub(&a, &b), &gv_scale(&c, &q(n - k)));
                    rep.checked += 1;
                    if defect != gv_scale(&v, &expect) {
                        rep.failures.push(format!("[L_{n}, L_{k}] on layer {d}"));
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Scalar by which `[L_n, L_k] - (n-k) L_{n+k}` acts on one layer, or `None` if it is not scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerDefect {
    pub degree: usize,
    pub scalar: Option<Q>,
}

/// Smallest truncation for which layer 0 stays inside the window for `(n, k)`.
pub fn required_d_max(m: i64, n: i64, k: i64) -> usize {
    [0, -m * k, -m * n, -m * (n + k)].into_iter().max().unwrap_or(0) as usize
}

/// Virasoro defect on every layer whose intermediate vectors stay inside the truncation.
pub fn virasoro_defect(h: &HighestWeightModule, n: i64, k: i64) -> Result<Vec<LayerDefect>> {
    let s = Sugawara::new(h);
    let m = s.m();
    let need = required_d_max(m, n, k);
    if need > h.d_max {
        return window(format!("required d_max {need} for (n, k) = ({n}, {k}), have {}", h.d_max));
    }
    let dm = h.d_max as i64;
    let coord = Coordinate::T;
    let mut out = Vec::new();
    for d in 0..=h.d_max {
        let di = d as i64;
        if [di - m * k, di - m * n, di - m * (n + k)].iter().any(|x| *x > dm) {
            continue;
        }
        let mut pairs = Vec::new();
        for v in basis_vectors(h, d) {
            let a = s.l(Route::Weighted, &coord, n, &s.l(Route::Weighted, &coord, k, &v)?)?;
            let b = s.l(Route::Weighted, &coord, k, &s.l(Route::Weighted, &coord, n, &v)?)?;
            let c = s.l(Route::Weighted, &coord, n + k, &v)?;
            pairs.push((v, gv_sub(&gv_sub(&a, &b), &gv_scale(&c, &q(n - k)))));
        }
        out.push(LayerDefect { degree: d, scalar: common_scalar(&pairs) });
    }
    Ok(out)
}

/// Checks `[L_k, x[t^a]] = -(a/m) x[t^{a+mk}]` on every basis vector inside the truncation.
pub fn check_mode_commutation(h: &HighestWeightModule, krange: i64, arange: i64) -> Result<CheckReport> {
    let s = Sugawara::new(h);
    let m = s.m();
    let dm = h.d_max as i64;
    let alg = &h.alg;
    let coord = Coordinate::T;
    let mut rep = CheckReport::default();
    for k in -krange..=krange {
        for a in -arange..=arange {
            for idx in 0..alg.dim_at(a) {
                let x = Mode::new(a, idx);
                let xs = Mode::new(a + m * k, idx);
                for d in 0..=h.d_max {
                    let di = d as i64;
                    if [di - a, di - m * k, di - a - m * k].iter().any(|t| *t > dm) {
                        rep.skipped += h.dim(d);
                        continue;
                    }
                    for v in basis_vectors(h, d) {
                        let lx = s.l(Route::Weighted, &coord, k, &s.act_mode(&coord, a, idx, &v)?)?;
                        let xl = s.act_mode(&coord, a, idx, &s.l(Route::Weighted, &coord, k, &v)?)?;
                        let rhs = s.act_mode(&coord, xs.deg, xs.idx, &v)?;
                        rep.checked += 1;
                        if gv_sub(&lx, &xl) != gv_scale(&rhs, &(-q(x.deg) / q(m))) {
                            rep.failures.push(format!("[L_{k}, mode {a}/{idx}] on layer {d}"));
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Compares `L_theta` for `theta = t^{mk+1} d/dt` computed in the coordinates `t` and
/// `t' = (1 + a t^m) t` on layers `0..=h.d_max`. Returns the scalar difference, or
/// `None` if the difference is not a scalar.
pub fn parameter_change_difference(h: &HighestWeightModule, a: &Q, k: usize) -> Result<Option<Q>> {
    let s = Sugawara::new(h);
    let m = s.m() as usize;
    let n = h.d_max + m * k + 2;
    let theta_t = vec![(k as i64, Q::one())];
    let theta_tp = reexpress_field(m, a, k, n);
    let coord = Coordinate::Shifted(a.clone());
    let mut pairs = Vec::new();
    for d in 0..=h.d_max {
        for v in basis_vectors(h, d) {
            let x = s.l_theta(&Coordinate::T, &theta_t, &v)?;
            let y = s.l_theta(&coord, &theta_tp, &v)?;
            pairs.push((v, gv_sub(&x, &y)));
        }
    }
    Ok(common_scalar(&pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Series;
    use crate::loops::LoopAlgebra;
    use crate::linalg::qf;
    use crate::series::{vector_field_cocycle, virasoro_field};
    use crate::twist::{standard, weight_from_ints, TauKind};
    use std::sync::Arc;

    fn module(series: Series, n: usize, t: TauKind, h: Vec<i64>, m: usize, lam: &[i64], c: i64, d: usize) -> HighestWeightModule {
        let alg = Arc::new(LoopAlgebra::new(Arc::new(standard(series, n, t, h, m).unwrap())).unwrap());
        HighestWeightModule::new(alg, &weight_from_ints(lam), c, d).unwrap()
    }

    #[test]
    fn l0_is_the_grading() {
        for h in [
            module(Series::A, 1, TauKind::Id, vec![0], 1, &[1], 2, 3),
            module(Series::A, 2, TauKind::Flip, vec![0], 2, &[1], 1, 3),
            module(Series::A, 1, TauKind::Id, vec![1], 2, &[0], 2, 3),
        ] {
            let s = Sugawara::new(&h);
            let mut top = None;
            for d in 0..=h.d_max {
                let vs: Vec<(GVec, GVec)> = basis_vectors(&h, d)
                    .into_iter()
                    .map(|v| {
                        let w = s.l(Route::Weighted, &Coordinate::T, 0, &v).unwrap();
                        (v, w)
                    })
                    .collect();
                let e = common_scalar(&vs).expect("L_0 is scalar on each layer");
                let t = top.get_or_insert(e.clone()).clone();
                assert_eq!(e, t + qf(d as i64, s.m()));
            }
        }
    }

    #[test]
    fn vacuum_energy_of_twisted_vacuum() {
        let h = module(Series::A, 2, TauKind::Flip, vec![0], 2, &[0], 2, 0);
        let s = Sugawara::new(&h);
        let w = s.l(Route::Weighted, &Coordinate::T, 0, &gv_single(0, SVec::unit(0))).unwrap();
        // only the twist contributes: c/(c+3) * dim g_1 / 16 with dim g_1 = 5
        assert_eq!(w[&0].get(0), qf(1, 10) * q(2) * q(5) / q(8));
    }

    #[test]
    fn routes_agree() {
        let h = module(Series::A, 2, TauKind::Flip, vec![0], 2, &[0], 2, 4);
        let s = Sugawara::new(&h);
        for k in [-2i64, -1, 1, 2] {
            for d in 0..=h.d_max {
                if d as i64 - 2 * k > h.d_max as i64 {
                    continue;
                }
                for v in basis_vectors(&h, d) {
                    let a = s.l(Route::Weighted, &Coordinate::T, k, &v).unwrap();
                    let b = s.l(Route::NormalOrdered, &Coordinate::T, k, &v).unwrap();
                    assert_eq!(a, b, "k = {k}, layer {d}");
                }
            }
        }
    }

    #[test]
    fn defect_per_layer() {
        let h = module(Series::A, 1, TauKind::Id, vec![0], 1, &[0], 1, 4);
        let rows = virasoro_defect(&h, 2, -2).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.scalar == Some(qf(1, 2))));
        assert!(virasoro_defect(&h, 1, -1).unwrap().iter().all(|r| r.scalar == Some(Q::zero())));
        assert_eq!(required_d_max(1, -3, -2), 5);
        assert!(matches!(virasoro_defect(&h, -3, -2), Err(crate::Error::Window(_))));
    }

    #[test]
    fn cocycle_predicts_virasoro_defect() {
        let h = module(Series::A, 1, TauKind::Id, vec![0], 1, &[0], 1, 4);
        let s = Sugawara::new(&h);
        for n in -2i64..=2 {
            for k in -2i64..=2 {
                let expect = vector_field_cocycle(1, &virasoro_field(1, n), &virasoro_field(1, k)) * s.central_charge();
                for d in 0..=4usize {
                    let di = d as i64;
                    if [di - k, di - n, di - n - k].iter().any(|x| *x > 4) {
                        continue;
                    }
                    for v in basis_vectors(&h, d) {
                        let a = s.l(Route::Weighted, &Coordinate::T, n, &s.l(Route::Weighted, &Coordinate::T, k, &v).unwrap()).unwrap();
                        let b = s.l(Route::Weighted, &Coordinate::T, k, &s.l(Route::Weighted, &Coordinate::T, n, &v).unwrap()).unwrap();
                        let c = s.l(Route::Weighted, &Coordinate::T, n + k, &v).unwrap();
                        let defect = gv_sub(&gv_sub(&a, &b), &gv_scale(&c, &q(n - k)));
                        assert_eq!(defect, gv_scale(&v, &expect), "n={n} k={k} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn twisted_virasoro_and_commutation() {
        let h = module(Series::A, 2, TauKind::Flip, vec![0], 2, &[0], 2, 4);
        let r = check_virasoro(&h, 2).unwrap();
        assert!(r.ok(), "{:?}", r.failures);
        let r = check_mode_commutation(&h, 1, 2).unwrap();
        assert!(r.ok(), "{:?}", r.failures);
        let h = module(Series::A, 1, TauKind::Id, vec![1], 2, &[0], 2, 4);
        assert!(check_virasoro(&h, 2).unwrap().ok());
    }

    #[test]
    fn parameter_change_is_scalar() {
        for h in [
            module(Series::A, 1, TauKind::Id, vec![0], 1, &[0], 1, 3),
            module(Series::A, 2, TauKind::Flip, vec![0], 2, &[1], 1, 3),
        ] {
            for k in 0..2 {
                let s = parameter_change_difference(&h, &q(2), k).unwrap();
                assert!(s.is_some(), "k = {k}");
                if k > 0 {
                    assert_eq!(s, Some(Q::zero()));
                }
            }
        }
    }

    #[test]
    fn field_reexpression() {
        // t d/dt in t' = t + a t^2 (m = 1): t d/dt = (t' + a t^2) d/dt'
        let f = reexpress_field(1, &q(1), 0, 5);
        assert_eq!(f[0], (0, q(1)));
        assert_eq!(f[1], (1, q(1)));
        let g = reexpress_field(2, &q(3), 1, 7);
        assert_eq!(g[0], (1, q(1)));
    }
}
