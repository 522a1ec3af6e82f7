//! Untwisted fusion rules (Kac-Walton) and Verlinde numbers by degeneration.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_traits::Zero;

use crate::error::{invalid, Result};
use crate::linalg::{q, Q};
use crate::lie::SimpleLieAlgebra;

pub type IntWeight = Vec<i64>;

/// Weight data of a simple Lie algebra in fundamental coordinates.
pub struct WeightSystem {
    pub g: SimpleLieAlgebra,
    /// `alpha_i` in fundamental coordinates (row `i` of the Cartan matrix)
    simple: Vec<IntWeight>,
    /// positive roots in fundamental coordinates
    positive: Vec<IntWeight>,
    theta: IntWeight,
    /// comarks `a_i^vee`
    comarks: Vec<i64>,
    /// `(omega_i, omega_j)` with long roots of length 2
    fund_ip: Vec<Vec<Q>>,
    fusion_cache: Mutex<HashMap<(i64, IntWeight, IntWeight), BTreeMap<IntWeight, i64>>>,
}

impl WeightSystem {
    pub fn new(g: SimpleLieAlgebra) -> Self {
        let n = g.rank;
        let to_fund = |r: &[i64]| -> IntWeight { (0..n).map(|i| g.pair_coroot(r, i)).collect() };
        let simple = (0..n).map(|i| (0..n).map(|j| g.cartan[i][j]).collect()).collect();
        let positive = g.positive_roots.iter().map(|r| to_fund(r)).collect();
        let theta_root = g.highest_root();
        let theta = to_fund(&theta_root);
        let comarks = g.coroot_coeffs(&theta_root);
        // omega_i = sum_j (A^{-1})_{ij} alpha_j, (omega_i, alpha_j) = delta_ij (alpha_j, alpha_j)/2
        let a: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| q(g.cartan[i][j])).collect()).collect();
        let ainv = crate::linalg::inverse(&a).expect("Cartan matrix is invertible");
        // omega_i = sum_j M_ij alpha_j where sum_j M_ij A_jk = delta_ik
        let fund_ip = (0..n)
            .map(|i| (0..n).map(|j| &ainv[i][j] * &g.ip[j][j] / q(2)).collect())
            .collect();
        WeightSystem { g, simple, positive, theta, comarks, fund_ip, fusion_cache: Mutex::new(HashMap::new()) }
    }

    pub fn rank(&self) -> usize {
        self.g.rank
    }

    pub fn ip(&self, a: &[i64], b: &[i64]) -> Q {
        let mut s = Q::zero();
        for i in 0..a.len() {
            if a[i] == 0 {
                continue;
            }
            for j in 0..b.len() {
                if b[j] != 0 {
                    s += &self.fund_ip[i][j] * q(a[i] * b[j]);
                }
            }
        }
        s
    }

    /// `(lambda, theta)`, the level of a dominant weight.
    pub fn level_of(&self, w: &[i64]) -> i64 {
        w.iter().zip(&self.comarks).map(|(a, b)| a * b).sum()
    }

    /// Dominant integral weights of level at most `c`.
    pub fn alcove(&self, c: i64) -> Vec<IntWeight> {
        let n = self.rank();
        let mut out = Vec::new();
        let mut cur = vec![0i64; n];
        fn rec(comarks: &[i64], c: i64, i: usize, used: i64, cur: &mut IntWeight, out: &mut Vec<IntWeight>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            let mut k = 0;
            while used + k * comarks[i] <= c {
                cur[i] = k;
                rec(comarks, c, i + 1, used + k * comarks[i], cur, out);
                k += 1;
            }
            cur[i] = 0;
        }
        rec(&self.comarks, c, 0, 0, &mut cur, &mut out);
        out.sort();
        out
    }

    /// `-w_0(lambda)`
    pub fn dual(&self, w: &[i64]) -> IntWeight {
        let mut v: IntWeight = w.iter().map(|x| -x).collect();
        // reflect into the dominant chamber
        while let Some(i) = v.iter().position(|&x| x < 0) {
            let k = v[i];
            for j in 0..v.len() {
                v[j] -= k * self.simple[i][j];
            }
        }
        v
    }

    /// Weight multiplicities of `V(lambda)` by Freudenthal's formula.
    pub fn multiplicities(&self, lambda: &[i64]) -> BTreeMap<IntWeight, i64> {
        let n = self.rank();
        let rho = vec![1i64; n];
        let shift = |w: &[i64]| -> IntWeight { w.iter().zip(&rho).map(|(a, b)| a + b).collect() };
        let lr = shift(lambda);
        let norm_l = self.ip(&lr, &lr);
        let mut mult: BTreeMap<IntWeight, i64> = BTreeMap::new();
        mult.insert(lambda.to_vec(), 1);
        let mut layer = vec![lambda.to_vec()];
        while !layer.is_empty() {
            let mut cands: Vec<IntWeight> = Vec::new();
            for mu in &layer {
                for a in &self.simple {
                    let nu: IntWeight = mu.iter().zip(a).map(|(x, y)| x - y).collect();
                    if !mult.contains_key(&nu) && !cands.contains(&nu) {
                        cands.push(nu);
                    }
                }
            }
            let mut next = Vec::new();
            for mu in cands {
                let mr = shift(&mu);
                let denom = &norm_l - self.ip(&mr, &mr);
                if denom.is_zero() {
                    continue;
                }
                let mut num = Q::zero();
                for a in &self.positive {
                    let mut k = 1;
                    loop {
                        let w: IntWeight = mu.iter().zip(a).map(|(x, y)| x + k * y).collect();
                        match mult.get(&w) {
                            Some(m) if *m > 0 => num += q(*m) * self.ip(&w, a),
                            _ => {
                                // strings through a weight of V are unbroken above it
                                if k > 1 || !mult.contains_key(&w) {
                                    break;
                                }
                            }
                        }
                        k += 1;
                    }
                }
                let m = q(2) * num / denom;
                assert!(m.is_integer(), "Freudenthal multiplicity is not an integer");
                let m = crate::linalg::q_to_i64(&m).unwrap();
                if m > 0 {
                    mult.insert(mu.clone(), m);
                    next.push(mu);
                }
            }
            layer = next;
        }
        mult
    }

    pub fn dimension(&self, lambda: &[i64]) -> i64 {
        self.multiplicities(lambda).values().sum()
    }

    /// Moves `v + rho` into the open fundamental alcove at level `k + h^vee` by affine
    /// reflections. Returns the sign and the result, or `None` on a wall.
    fn alcove_reflect(&self, v: &[i64], kk: i64) -> Option<(i64, IntWeight)> {
        let mut v = v.to_vec();
        let mut sign = 1;
        loop {
            if v.contains(&0) {
                return None;
            }
            if let Some(i) = v.iter().position(|&x| x < 0) {
                let k = v[i];
                for j in 0..v.len() {
                    v[j] -= k * self.simple[i][j];
                }
                sign = -sign;
                continue;
            }
            let lev = self.level_of(&v);
            if lev == kk {
                return None;
            }
            if lev > kk {
                let k = lev - kk;
                for j in 0..v.len() {
                    v[j] -= k * self.theta[j];
                }
                sign = -sign;
                continue;
            }
            return Some((sign, v));
        }
    }

    /// Fusion product `V(lambda) x V(mu)` at level `c` as a map `nu -> N_{lambda mu}^nu`.
    pub fn fusion(&self, c: i64, lambda: &[i64], mu: &[i64]) -> BTreeMap<IntWeight, i64> {
        let key = (c, lambda.to_vec(), mu.to_vec());
        if let Some(v) = self.fusion_cache.lock().unwrap().get(&key) {
            return v.clone();
        }
        let kk = c + self.g.dual_coxeter;
        let mut out: BTreeMap<IntWeight, i64> = BTreeMap::new();
        for (w, m) in self.multiplicities(lambda) {
            let v: IntWeight = w.iter().zip(mu).map(|(a, b)| a + b + 1).collect();
            if let Some((s, r)) = self.alcove_reflect(&v, kk) {
                let nu: IntWeight = r.iter().map(|x| x - 1).collect();
                *out.entry(nu).or_insert(0) += s * m;
            }
        }
        out.retain(|_, v| *v != 0);
        assert!(out.values().all(|&v| v > 0), "negative fusion coefficient");
        self.fusion_cache.lock().unwrap().insert(key, out.clone());
        out
    }

    pub fn fusion_coefficient(&self, c: i64, lambda: &[i64], mu: &[i64], nu: &[i64]) -> i64 {
        self.fusion(c, lambda, mu).get(nu).copied().unwrap_or(0)
    }

    /// Dimension of untwisted conformal blocks of genus `genus` with the given weights.
    pub fn verlinde(&self, c: i64, genus: usize, weights: &[IntWeight]) -> Result<u128> {
        for w in weights {
            if w.len() != self.rank() || w.iter().any(|&x| x < 0) || self.level_of(w) > c {
                return invalid(format!("weight {w:?} is not dominant of level at most {c}"));
            }
        }
        Ok(self.verlinde_rec(c, genus, weights.to_vec()))
    }

    fn verlinde_rec(&self, c: i64, genus: usize, ws: Vec<IntWeight>) -> u128 {
        if genus > 0 {
            let mut total = 0;
            for mu in self.alcove(c) {
                let mut w = ws.clone();
                w.push(self.dual(&mu));
                w.push(mu);
                total += self.verlinde_rec(c, genus - 1, w);
            }
            return total;
        }
        let zero = vec![0i64; self.rank()];
        match ws.len() {
            0 => 1,
            1 => u128::from(ws[0] == zero),
            2 => u128::from(ws[0] == self.dual(&ws[1])),
            3 => self.fusion_coefficient(c, &ws[0], &ws[1], &self.dual(&ws[2])) as u128,
            _ => {
                let mut total = 0;
                for (nu, n) in self.fusion(c, &ws[0], &ws[1]) {
                    let mut w = vec![nu];
                    w.extend_from_slice(&ws[2..]);
                    total += n as u128 * self.verlinde_rec(c, 0, w);
                }
                total
            }
        }
    }
}

/// Closed form for `sl_2`: `N_{a b}^{n} = 1` iff `|a-b| <= n <= min(a+b, 2c-a-b)` with `a+b+n` even.
pub fn sl2_fusion_closed_form(c: i64, a: i64, b: i64, n: i64) -> i64 {
    let ok = (a - b).abs() <= n && n <= (a + b).min(2 * c - a - b) && (a + b + n) % 2 == 0;
    i64::from(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Series;

    fn ws(s: Series, n: usize) -> WeightSystem {
        WeightSystem::new(SimpleLieAlgebra::build(s, n).unwrap())
    }

    #[test]
    fn dimensions_by_freudenthal() {
        let a2 = ws(Series::A, 2);
        assert_eq!(a2.dimension(&[1, 1]), 8);
        assert_eq!(a2.dimension(&[2, 0]), 6);
        assert_eq!(a2.dimension(&[2, 2]), 27);
        assert_eq!(a2.multiplicities(&[1, 1])[&vec![0, 0]], 2);
        let b2 = ws(Series::B, 2);
        assert_eq!(b2.dimension(&[1, 0]), 5);
        assert_eq!(b2.dimension(&[0, 1]), 4);
        let g2 = ws(Series::G, 2);
        assert_eq!(g2.dimension(&[1, 0]) + g2.dimension(&[0, 1]), 21);
    }

    #[test]
    fn sl2_fusion_matches_closed_form() {
        let a1 = ws(Series::A, 1);
        for c in 1..6 {
            for a in 0..=c {
                for b in 0..=c {
                    for n in 0..=c {
                        assert_eq!(a1.fusion_coefficient(c, &[a], &[b], &[n]), sl2_fusion_closed_form(c, a, b, n));
                    }
                }
            }
        }
    }

    #[test]
    fn sl2_verlinde_values() {
        let a1 = ws(Series::A, 1);
        // genus g, no points: sum_j (S_0j)^{2-2g}; level 1 gives 2^g
        for g in 0..4 {
            assert_eq!(a1.verlinde(1, g, &[]).unwrap(), 1u128 << g);
        }
        assert_eq!(a1.verlinde(1, 0, &[vec![1], vec![1], vec![1], vec![1]]).unwrap(), 1);
        assert_eq!(a1.verlinde(2, 0, &[vec![1], vec![1], vec![1], vec![1]]).unwrap(), 2);
        // level 2, genus 2: 10
        assert_eq!(a1.verlinde(2, 2, &[]).unwrap(), 10);
    }

    #[test]
    fn sl3_level1_is_abelian() {
        let a2 = ws(Series::A, 2);
        assert_eq!(a2.alcove(1).len(), 3);
        assert_eq!(a2.dual(&[1, 0]), vec![0, 1]);
        assert_eq!(a2.fusion(1, &[1, 0], &[1, 0]), BTreeMap::from([(vec![0, 1], 1)]));
        assert_eq!(a2.verlinde(1, 2, &[]).unwrap(), 9);
    }

    #[test]
    fn fusion_is_commutative_and_associative() {
        let a2 = ws(Series::A, 2);
        let c = 3;
        let al = a2.alcove(c);
        for x in &al {
            for y in &al {
                assert_eq!(a2.fusion(c, x, y), a2.fusion(c, y, x));
                for z in &al {
                    let mut left: BTreeMap<IntWeight, i64> = BTreeMap::new();
                    for (u, n) in a2.fusion(c, x, y) {
                        for (v, k) in a2.fusion(c, &u, z) {
                            *left.entry(v).or_default() += n * k;
                        }
                    }
                    let mut right: BTreeMap<IntWeight, i64> = BTreeMap::new();
                    for (u, n) in a2.fusion(c, y, z) {
                        for (v, k) in a2.fusion(c, x, &u) {
                            *right.entry(v).or_default() += n * k;
                        }
                    }
                    assert_eq!(left, right);
                }
            }
        }
    }
}
