//! Canonical gluing elements `Delta = sum_d Delta_d` in `H(mu) (x) H''(mu)`, where
//! `H''` is `H(mu)` with modes acting through the anti-involution `varpi`.

use num_traits::{One, Zero};

use crate::error::{inconsistent, Result};
use crate::linalg::{dense_mul, dense_transpose, inverse, Echelon, Q, SMat, SVec};
use crate::loops::Mode;
use crate::rep::HighestWeightModule;
use crate::sugawara::CheckReport;
use crate::twist::Weight;

pub type Dense = Vec<Vec<Q>>;

/// `Delta_d = G_d^{-1}` from the contravariant Gram matrices.
pub fn canonical_from_gram(h: &HighestWeightModule) -> Result<Vec<Dense>> {
    (0..=h.d_max)
        .map(|d| match inverse(h.gram(d)) {
            Some(m) => Ok(m),
            None => inconsistent(format!("contravariant form is degenerate on layer {d}")),
        })
        .collect()
}

/// Matrix of `varpi(X)` acting on layer `d`.
pub fn varpi_matrix(h: &HighestWeightModule, x: Mode, d: usize) -> Result<SMat> {
    let vx = h.alg.varpi(x);
    let target = d as i64 + x.deg;
    let rows = if target < 0 { 0 } else { h.dim(target as usize) };
    let cols = (0..h.dim(d)).map(|b| h.act_vec(&vx, d, &SVec::unit(b))).collect::<Result<Vec<_>>>()?;
    Ok(SMat { rows, cols })
}

/// Solves `(X (x) 1) Delta_d = -(1 (x) varpi(X)) Delta_{d-n}` for all positive modes, starting
/// from `Delta_0` fixed by `g_0`-invariance and the coefficient of `v_+ (x) v_+`.
pub fn canonical_by_recursion(h: &HighestWeightModule) -> Result<Vec<Dense>> {
    let n0 = h.dim(0);
    // Delta_0: M Z^T-invariance, solved as a linear system on n0*n0 unknowns
    let mut rows: Vec<SVec> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    for z in h.alg.modes_of_degree(0) {
        let zm = h.mode_matrix(z, 0)?.to_dense();
        let vm = varpi_matrix(h, z, 0)?.to_dense();
        // (Z M + M V^T)_{ij} = 0
        for i in 0..n0 {
            for j in 0..n0 {
                let mut acc = std::collections::BTreeMap::new();
                for k in 0..n0 {
                    *acc.entry(k * n0 + j).or_insert_with(Q::zero) += &zm[i][k];
                    *acc.entry(i * n0 + k).or_insert_with(Q::zero) += &vm[j][k];
                }
                let v = SVec::from_map(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect());
                if !v.is_zero() {
                    rows.push(v);
                    rhs.push(Q::zero());
                }
            }
        }
    }
    rows.push(SVec::unit(0));
    rhs.push(Q::one());
    let m0 = solve_sparse(&rows, &rhs, n0 * n0)?;
    let mut out = vec![(0..n0).map(|i| m0[i * n0..(i + 1) * n0].to_vec()).collect::<Dense>()];
    for d in 1..=h.d_max {
        let nd = h.dim(d);
        // X M = -M_{d-n} V^T for each positive X of degree n; the columns of M share
        // the coefficient matrix formed by stacking the X
        let mut a_rows: Vec<Vec<Q>> = Vec::new();
        let mut b_rows: Vec<Vec<Q>> = Vec::new();
        for n in 1..=d {
            for x in h.alg.modes_of_degree(n as i64) {
                let xm = h.mode_matrix(x, d)?.to_dense();
                let vm = varpi_matrix(h, x, d - n)?.to_dense();
                let r = dense_mul(&out[d - n], &dense_transpose(&vm));
                for i in 0..h.dim(d - n) {
                    a_rows.push(xm[i].clone());
                    b_rows.push(r[i].iter().map(|t| -t).collect());
                }
            }
        }
        let mut ech = Echelon::new();
        let mut chosen = Vec::new();
        for (i, row) in a_rows.iter().enumerate() {
            if chosen.len() == nd {
                break;
            }
            if ech.insert(SVec::from_dense(row)) {
                chosen.push(i);
            }
        }
        if chosen.len() != nd {
            return inconsistent(format!("gluing recursion does not determine Delta_{d}"));
        }
        let square: Dense = chosen.iter().map(|&i| a_rows[i].clone()).collect();
        let inv = inverse(&square).expect("independent rows");
        let rhs: Dense = chosen.iter().map(|&i| b_rows[i].clone()).collect();
        let m = dense_mul(&inv, &rhs);
        if dense_mul(&a_rows, &m) != b_rows {
            return inconsistent(format!("gluing recursion has no solution on layer {d}"));
        }
        out.push(m);
    }
    Ok(out)
}

/// Solves a sparse linear system with a unique solution.
fn solve_sparse(rows: &[SVec], rhs: &[Q], n: usize) -> Result<Vec<Q>> {
    let mut ech = Echelon::new();
    // augment with the right-hand side in column n
    let mut consistent = true;
    for (r, b) in rows.iter().zip(rhs) {
        let mut v = r.0.clone();
        if !b.is_zero() {
            v.push((n, b.clone()));
        }
        let v = SVec(v);
        let red = ech.reduce(&v);
        if !red.is_zero() && red.0[0].0 == n {
            consistent = false;
        }
        ech.insert(v);
    }
    if !consistent {
        return inconsistent("linear system is inconsistent");
    }
    let piv = ech.pivots();
    if piv.len() != n || piv.iter().any(|&p| p >= n) {
        return inconsistent("linear system does not determine a unique solution");
    }
    // back substitution, row `i` reads `x_i + sum_{j>i} r_j x_j = r_n`
    let mut x = vec![Q::zero(); n];
    for i in (0..n).rev() {
        let row = ech.row_with_pivot(i).unwrap();
        let mut val = row.get(n);
        for (j, c) in row.iter() {
            if *j > i && *j < n {
                val -= c * &x[*j];
            }
        }
        x[i] = val;
    }
    Ok(x)
}

/// Checks `(X (x) 1) Delta_{d+n} + (1 (x) varpi(X)) Delta_d = 0` for all modes of degree
/// `|n| <= nmax` and layers `d <= dmax`.
pub fn check_gluing(h: &HighestWeightModule, delta: &[Dense], nmax: i64, dmax: usize) -> Result<CheckReport> {
    let mut rep = CheckReport::default();
    for n in -nmax..=nmax {
        for x in h.alg.modes_of_degree(n) {
            for d in 0..=dmax {
                let e = d as i64 + n;
                if e < 0 {
                    // Delta_{d+n} = 0 and varpi(X) maps layer d below zero
                    rep.checked += 1;
                    continue;
                }
                let e = e as usize;
                if e > h.d_max || d > h.d_max {
                    rep.skipped += 1;
                    continue;
                }
                let xm = h.mode_matrix(x, e)?.to_dense();
                let vm = varpi_matrix(h, x, d)?.to_dense();
                let a = dense_mul(&xm, &delta[e]);
                let b = dense_mul(&delta[d], &dense_transpose(&vm));
                rep.checked += 1;
                let ok = a.iter().zip(&b).all(|(r, s)| r.iter().zip(s).all(|(u, v)| (u + v).is_zero()));
                if !ok {
                    rep.failures.push(format!("mode ({n}, {}) on layer {d}", x.idx));
                }
            }
        }
    }
    Ok(rep)
}

/// `Delta_0` composed with the identification `H''_0 = V(mu)^*` given by the form.
pub fn delta0_as_endomorphism(h: &HighestWeightModule, delta: &[Dense]) -> Dense {
    dense_mul(&delta[0], h.gram(0))
}

pub fn is_identity(m: &Dense) -> bool {
    m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() }))
}

/// Highest weights of `H''_0` with respect to `g^sigma` acting through `varpi`.
pub fn dual_top_weights(h: &HighestWeightModule) -> Result<Vec<Weight>> {
    let alg = &h.alg;
    let lab = alg.sigma.labels();
    let gens = alg.node_generators();
    let n0 = h.dim(0);
    let mut conds: Vec<SMat> = Vec::new();
    for (i, (x, _)) in gens.iter().enumerate() {
        if lab.s[i] == 0 {
            let vx = alg.varpi_vec(x);
            let cols = (0..n0).map(|b| h.act_vec(&vx, 0, &SVec::unit(b))).collect::<Result<Vec<_>>>()?;
            conds.push(SMat { rows: n0, cols });
        }
    }
    let mut out = Vec::new();
    for b in 0..n0 {
        let v = SVec::unit(b);
        if conds.iter().all(|c| c.apply(&v).is_zero()) {
            // H acts through varpi(H) = -H on weight vectors
            let w: Weight = h.top.weights[b].iter().map(|x| -x).collect();
            out.push(w);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Series;
    use crate::loops::LoopAlgebra;
    use crate::twist::{standard, TauKind};
    use std::sync::Arc;

    fn alg(series: Series, n: usize, t: TauKind, h: Vec<i64>, m: usize) -> Arc<LoopAlgebra> {
        Arc::new(LoopAlgebra::new(Arc::new(standard(series, n, t, h, m).unwrap())).unwrap())
    }

    #[test]
    fn gluing_identity_and_routes() {
        for (a, c) in [(alg(Series::A, 1, TauKind::Id, vec![0], 1), 1), (alg(Series::A, 2, TauKind::Flip, vec![0], 2), 2)] {
            for mu in a.sigma.enumerate_dc(c).unwrap() {
                let h = HighestWeightModule::new(a.clone(), &mu, c, 4).unwrap();
                let d1 = canonical_from_gram(&h).unwrap();
                let d2 = canonical_by_recursion(&h).unwrap();
                assert_eq!(d1, d2);
                let r = check_gluing(&h, &d1, 2, 2).unwrap();
                assert!(r.ok(), "{:?}", r.failures);
                assert!(is_identity(&delta0_as_endomorphism(&h, &d1)));
                assert_eq!(dual_top_weights(&h).unwrap(), vec![a.sigma.dual_weight(&mu).unwrap()]);
            }
        }
    }

    #[test]
    fn sl3_dual_top_weight() {
        let a = alg(Series::A, 2, TauKind::Id, vec![0, 0], 1);
        let mu = crate::twist::weight_from_ints(&[1, 0]);
        let h = HighestWeightModule::new(a.clone(), &mu, 1, 1).unwrap();
        assert_eq!(dual_top_weights(&h).unwrap(), vec![crate::twist::weight_from_ints(&[0, 1])]);
        let d = canonical_from_gram(&h).unwrap();
        let r = check_gluing(&h, &d, 1, 0).unwrap();
        assert!(r.ok());
    }
}
