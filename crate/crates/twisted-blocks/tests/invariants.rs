use std::sync::Arc;

use num_traits::{One, Zero};
use proptest::prelude::*;
use serde_json::json;

use twisted_blocks::curve::{self, BlockProblem, FusionTable, Local};
use twisted_blocks::gluing;
use twisted_blocks::lie::{Series, SimpleLieAlgebra};
use twisted_blocks::linalg::{dense_transpose, q, qf, Q, SVec};
use twisted_blocks::loops::LoopAlgebra;
use twisted_blocks::oracle::WeightSystem;
use twisted_blocks::rep::HighestWeightModule;
use twisted_blocks::series::{binom, Laurent};
use twisted_blocks::twist::{standard, TauKind};
use twisted_blocks::verma::VermaModule;

// ---------------------------------------------------------------- residues

/// `sum c / (z - p)^k + sum d_n z^n`
#[derive(Clone, Debug)]
struct Rational {
    poles: Vec<(Q, i64, Q)>,
    poly: Vec<(i64, Q)>,
}

#[derive(Clone, Copy, Debug)]
enum At<'a> {
    Finite(&'a Q),
    Infinity,
}

fn pow(x: &Q, k: i64) -> Q {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        Q::one() / num_traits::pow(x.clone(), (-k) as usize)
    }
}

/// Expansion in the local coordinate `z - a` (or `1/z` at infinity), exponents below `order`.
fn expand(f: &Rational, at: At, order: i64) -> Laurent {
    let mut out = Laurent::default();
    for (p, k, c) in &f.poles {
        match at {
            At::Finite(a) if a == p => out = out.add(&Laurent::monomial(-k, c.clone())),
            At::Finite(a) => {
                let d = a - p;
                for j in 0..order.max(0) {
                    let coef = binom(-k, j as usize) * pow(&d, -k - j) * c;
                    out = out.add(&Laurent::monomial(j, coef));
                }
            }
            At::Infinity => {
                for j in 0..order.max(0) {
                    if k + j >= order {
                        break;
                    }
                    let coef = binom(k + j - 1, j as usize) * pow(p, j) * c;
                    out = out.add(&Laurent::monomial(k + j, coef));
                }
            }
        }
    }
    for (n, c) in &f.poly {
        match at {
            At::Finite(a) => {
                for j in 0..=*n {
                    out = out.add(&Laurent::monomial(j, binom(*n, j as usize) * pow(a, n - j) * c));
                }
            }
            At::Infinity => out = out.add(&Laurent::monomial(-n, c.clone())),
        }
    }
    out
}

fn residue_of_df_g(f: &Rational, g: &Rational, at: At) -> Q {
    let df = expand(f, at, 16).euler().shift(-1);
    df.mul(&expand(g, at, 16)).residue()
}

fn rational(points: &[Q]) -> impl Strategy<Value = Rational> {
    let pts = points.to_vec();
    let n = pts.len();
    (
        proptest::collection::vec((0..n, 1i64..4, -5i64..6), 0..4),
        proptest::collection::vec((0i64..3, -5i64..6), 0..3),
    )
        .prop_map(move |(poles, poly)| Rational {
            poles: poles.into_iter().map(|(i, k, c)| (pts[i].clone(), k, q(c))).collect(),
            poly: poly.into_iter().map(|(n, c)| (n, q(c))).collect(),
        })
}

fn orbit_points() -> Vec<Q> {
    // Z/2 orbits {0}, {a, -a}, {b, -b} on the line, infinity handled separately
    vec![q(0), qf(3, 2), qf(-3, 2), q(5), q(-5)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residues_of_pairing_sum_to_zero(
        fs in proptest::collection::vec(rational(&orbit_points()), 1..3),
        gs in proptest::collection::vec(rational(&orbit_points()), 1..3),
        xs in proptest::collection::vec(0usize..8, 2),
        ys in proptest::collection::vec(0usize..8, 2),
    ) {
        let g = SimpleLieAlgebra::build(Series::A, 2).unwrap();
        let pts = orbit_points();
        let mut total = Q::zero();
        let mut ats: Vec<At> = pts.iter().map(At::Finite).collect();
        ats.push(At::Infinity);
        for (i, f) in fs.iter().enumerate() {
            for (j, h) in gs.iter().enumerate() {
                let pairing = g.form_basis(xs[i % 2], ys[j % 2]);
                if pairing.is_zero() {
                    continue;
                }
                for at in &ats {
                    total += &pairing * residue_of_df_g(f, h, *at);
                }
            }
        }
        prop_assert!(total.is_zero(), "residue sum {total}");
    }
}

#[test]
fn residue_expansion_sanity() {
    // d(1/z) * z = -dz/z: residue -1 at 0 and +1 at infinity
    let f = Rational { poles: vec![(q(0), 1, q(1))], poly: vec![] };
    let g = Rational { poles: vec![], poly: vec![(1, q(1))] };
    assert_eq!(residue_of_df_g(&f, &g, At::Finite(&q(0))), q(-1));
    assert_eq!(residue_of_df_g(&f, &g, At::Infinity), q(1));
    assert_eq!(residue_of_df_g(&f, &g, At::Finite(&q(2))), q(0));
}

// ---------------------------------------------------------------- modules

fn loop_alg(series: Series, rank: usize, tau: TauKind, h: Vec<i64>, m: usize) -> Arc<LoopAlgebra> {
    Arc::new(LoopAlgebra::new(Arc::new(standard(series, rank, tau, h, m).unwrap())).unwrap())
}

fn cases() -> Vec<(Arc<LoopAlgebra>, i64)> {
    vec![
        (loop_alg(Series::A, 1, TauKind::Id, vec![0], 1), 2),
        (loop_alg(Series::A, 1, TauKind::Id, vec![1], 2), 2),
        (loop_alg(Series::A, 2, TauKind::Flip, vec![0], 2), 2),
        (loop_alg(Series::A, 2, TauKind::Id, vec![0, 0], 1), 1),
    ]
}

#[test]
fn node_lowering_operators_are_locally_nilpotent() {
    for (alg, c) in cases() {
        let s = alg.sigma.clone();
        let lab = s.labels();
        let gens = alg.node_generators();
        for mu in s.enumerate_dc(c).unwrap() {
            let h = HighestWeightModule::new(alg.clone(), &mu, c, 4).unwrap();
            let ns = s.n_coefficients(&mu, c);
            for (i, (_, y)) in gens.iter().enumerate() {
                let n: usize = ns[i].to_integer().try_into().unwrap();
                let step = lab.s[i] as usize;
                let mut v = SVec::unit(0);
                let mut d = 0;
                for j in 0..=n {
                    if d + step > h.d_max {
                        break;
                    }
                    v = h.act_vec(y, d, &v).unwrap();
                    d += step;
                    assert_eq!(v.is_zero(), j == n, "{} mu={mu:?} node {i} power {}", s.describe(), j + 1);
                }
            }
        }
    }
}

#[test]
fn kernel_misses_degree_zero() {
    for (alg, c) in cases() {
        for mu in alg.sigma.enumerate_dc(c).unwrap() {
            let v = VermaModule::new(alg.clone(), &mu, c, 4).unwrap();
            let k = v.kernel().unwrap();
            assert!(k[0].is_empty(), "{} mu={mu:?}", alg.sigma.describe());
        }
    }
}

#[test]
fn gluing_tensor_is_symmetric() {
    for (alg, c) in cases() {
        for mu in alg.sigma.enumerate_dc(c).unwrap() {
            let h = HighestWeightModule::new(alg.clone(), &mu, c, 3).unwrap();
            let delta = gluing::canonical_by_recursion(&h).unwrap();
            for (d, m) in delta.iter().enumerate() {
                assert_eq!(&dense_transpose(m), m, "{} mu={mu:?} layer {d}", alg.sigma.describe());
                assert_eq!(m.len(), h.dim(d));
            }
        }
    }
}

// ---------------------------------------------------------------- curves

/// Chain of `weights.len()` components, one marking each, with `loops` self-nodes on the
/// end components (whose markings then carry weight 0).
fn chain(rank: usize, level: i64, weights: &[Vec<i64>], loops: usize) -> (BlockProblem, Vec<Vec<i64>>) {
    let n = weights.len();
    let mut ws = weights.to_vec();
    let mut nodes = Vec::new();
    for i in 1..n {
        nodes.push(json!({"endpoints": [i - 1, i], "stab_order": 1}));
    }
    let ends = if n == 1 { vec![0] } else { vec![0, n - 1] };
    for &e in ends.iter().take(loops) {
        nodes.push(json!({"endpoints": [e, e], "stab_order": 1}));
        if n > 1 {
            ws[e] = vec![0; rank];
        }
    }
    let components: Vec<_> =
        ws.iter().map(|w| json!({"genus": 0, "markings": [{"stab_order": 1, "weight": w}]})).collect();
    let v = json!({
        "algebra": {"series": "A", "rank": rank},
        "level": level,
        "group": {"order": 1},
        "components": components,
        "nodes": nodes,
    });
    (BlockProblem::from_json(&v.to_string()).unwrap(), ws)
}

fn weights_strategy() -> impl Strategy<Value = (usize, i64, Vec<Vec<i64>>, usize)> {
    (1usize..=2, 1i64..=3, 1usize..=4).prop_flat_map(|(rank, level, n)| {
        let w = proptest::collection::vec(0..=level, rank).prop_filter("level", move |w| w.iter().sum::<i64>() <= level);
        let max_loops: usize = if n == 1 { 1 } else { 2 };
        (Just(rank), Just(level), proptest::collection::vec(w, n), 0usize..=max_loops)
    })
}

fn verlinde_filled(p: &BlockProblem, tree: &curve::FactorizationTree) -> FusionTable {
    let mut t = FusionTable::default();
    curve::fill_verlinde(p, tree, &mut t).unwrap();
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chains_match_verlinde_in_every_order((rank, level, weights, loops) in weights_strategy()) {
        let (p, ws) = chain(rank, level, &weights, loops);
        let tree = curve::reduce_to_trinions(&p).unwrap();
        let table = verlinde_filled(&p, &tree);
        let value = tree.evaluate(&table).unwrap();
        let oracle = WeightSystem::new(SimpleLieAlgebra::build(Series::A, rank).unwrap());
        prop_assert_eq!(value, oracle.verlinde(level, loops, &ws).unwrap());

        let mut ids: Vec<usize> = p.nodes.iter().map(|n| n.id).collect();
        ids.reverse();
        let rev = curve::reduce_in_order(&p, &ids).unwrap();
        let t2 = verlinde_filled(&p, &rev);
        prop_assert_eq!(rev.evaluate(&t2).unwrap(), value);

        let q2 = p.propagate(0, Local::free(rank)).unwrap();
        let tree2 = curve::reduce_to_trinions(&q2).unwrap();
        let t3 = verlinde_filled(&q2, &tree2);
        prop_assert_eq!(tree2.evaluate(&t3).unwrap(), value);
        let back = q2.unpropagate(0, q2.components[0].markings.len() - 1).unwrap();
        prop_assert_eq!(curve::dimension(&back, &verlinde_filled(&back, &curve::reduce_to_trinions(&back).unwrap())).unwrap(), value);
    }
}

#[test]
fn gram_delta_identity_at_top() {
    let alg = loop_alg(Series::A, 2, TauKind::Flip, vec![0], 2);
    for mu in alg.sigma.enumerate_dc(2).unwrap() {
        let h = HighestWeightModule::new(alg.clone(), &mu, 2, 1).unwrap();
        let d = gluing::canonical_from_gram(&h).unwrap();
        let e = gluing::delta0_as_endomorphism(&h, &d);
        assert!(gluing::is_identity(&e));
        assert!(e.iter().all(|r| r.iter().all(|x| x.is_zero() || x.is_one())));
    }
}
