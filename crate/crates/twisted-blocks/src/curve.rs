//! Dual-graph model of pointed nodal covers with a cyclic group `Gamma = Z/N`,
//! and the reduction of block dimensions to trinion values.
//!
//! JSON curve description:
//!
//! ```json
//! {
//!   "algebra": {"series": "A", "rank": 2},
//!   "level": 2,
//!   "group": {"order": 2},
//!   "phi": [{"tau": "id", "h": [0, 0], "m": 1}, {"tau": "flip", "h": [0], "m": 2}],
//!   "components": [{"genus": 0, "markings": [{"stab_order": 2, "char_exponent": 1, "weight": [0]}]}],
//!   "nodes": [{"endpoints": [0, 1], "stab_order": 2, "char_exponent": 1}]
//! }
//! ```
//!
//! `phi[k]` is the automorphism attached to `gamma^k` for a fixed generator `gamma`.
//! An orbit with stabilizer order `e` and character exponent `chi` has the element
//! `gamma^{N/e}` acting on its tangent line by `exp(2 pi i chi / e)`; its local
//! automorphism is `phi[(N/e) chi^{-1}]` rewritten with `m = e`. A node's second
//! branch carries `-chi` unless `char_exponent_other` is given. Weights are in
//! fundamental coordinates of the local `g^tau`; free orbits use `g` itself.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::lie::{Series, SimpleLieAlgebra};
use crate::linalg::{fmt_q, parse_q, q, q_to_i64, Q};
use crate::oracle::coinvariants::{Coinvariants, Marking as OracleMarking, Point};
use crate::oracle::WeightSystem;
use crate::twist::{fmt_weight, standard, Automorphism, TauKind, Weight};

// ---------------------------------------------------------------- raw schema

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawAlgebra {
    pub series: String,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawGroup {
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Descriptor {
    pub tau: String,
    pub h: Vec<i64>,
    pub m: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawMarking {
    pub stab_order: usize,
    #[serde(default)]
    pub char_exponent: i64,
    pub weight: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawComponent {
    pub genus: usize,
    #[serde(default)]
    pub markings: Vec<RawMarking>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawNode {
    pub endpoints: [usize; 2],
    pub stab_order: usize,
    #[serde(default)]
    pub char_exponent: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_exponent_other: Option<i64>,
    #[serde(default)]
    pub exchanges_branches: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawCurve {
    pub algebra: RawAlgebra,
    pub level: i64,
    pub group: RawGroup,
    #[serde(default)]
    pub phi: Vec<Descriptor>,
    pub components: Vec<RawComponent>,
    #[serde(default)]
    pub nodes: Vec<RawNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_genus: Option<i64>,
}

/// Parses a weight given as an array of integers or `"p/q"` strings.
pub fn weight_from_json(v: &Value) -> Result<Weight> {
    let Some(arr) = v.as_array() else {
        return invalid(format!("weight must be an array, got {v}"));
    };
    arr.iter()
        .map(|x| match x {
            Value::Number(n) => n.as_i64().map(q).ok_or_else(|| Error::Invalid(format!("weight entry {n} is not an integer"))),
            Value::String(s) => parse_q(s).ok_or_else(|| Error::Invalid(format!("weight entry '{s}' is not a rational"))),
            other => Err(Error::Invalid(format!("weight entry {other} is not a number"))),
        })
        .collect()
}

pub fn weight_to_json(w: &Weight) -> Value {
    Value::Array(
        w.iter()
            .map(|x| match q_to_i64(x) {
                Some(i) => Value::from(i),
                None => Value::from(fmt_q(x)),
            })
            .collect(),
    )
}

// ---------------------------------------------------------------- validated model

/// Local data of an orbit: stabilizer order, character exponent, automorphism with `m = e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Local {
    pub e: usize,
    pub chi: i64,
    pub phi: Descriptor,
}

impl Local {
    pub fn free(rank: usize) -> Local {
        Local { e: 1, chi: 0, phi: Descriptor { tau: "id".into(), h: vec![0; rank], m: 1 } }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedOrbit {
    pub local: Local,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub genus: usize,
    pub markings: Vec<MarkedOrbit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeOrbit {
    pub id: usize,
    pub ends: [usize; 2],
    /// local data on the branches `q'` (at `ends[0]`) and `q''` (at `ends[1]`)
    pub branches: [Local; 2],
}

/// Builds and caches local automorphisms.
#[derive(Debug)]
pub struct Locals {
    pub series: Series,
    pub rank: usize,
    cache: Mutex<HashMap<Descriptor, Arc<Automorphism>>>,
    weights: Mutex<HashMap<(Descriptor, i64), Arc<Vec<(Weight, Weight)>>>>,
}

impl Locals {
    pub fn new(series: Series, rank: usize) -> Self {
        Locals { series, rank, cache: Mutex::new(HashMap::new()), weights: Mutex::new(HashMap::new()) }
    }

    pub fn get(&self, d: &Descriptor) -> Result<Arc<Automorphism>> {
        if let Some(a) = self.cache.lock().unwrap().get(d) {
            return Ok(a.clone());
        }
        let a = Arc::new(standard(self.series, self.rank, TauKind::parse(&d.tau)?, d.h.clone(), d.m)?);
        self.cache.lock().unwrap().insert(d.clone(), a.clone());
        Ok(a)
    }

    /// Pairs `(mu, mu*)` for `mu` in `D_c`, sorted by `mu`.
    pub fn dc_pairs(&self, d: &Descriptor, level: i64) -> Result<Arc<Vec<(Weight, Weight)>>> {
        let key = (d.clone(), level);
        if let Some(v) = self.weights.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let s = self.get(d)?;
        let pairs = s.enumerate_dc(level)?.into_iter().map(|mu| Ok((s.dual_weight(&mu)?, mu))).collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(Weight, Weight)> = pairs.into_iter().map(|(dual, mu)| (mu, dual)).collect();
        let v = Arc::new(pairs);
        self.weights.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

/// A validated pointed nodal cover together with a level and weights.
#[derive(Clone, Debug)]
pub struct BlockProblem {
    pub locals: Arc<Locals>,
    pub level: i64,
    pub order: usize,
    pub phi: Vec<Descriptor>,
    pub components: Vec<Component>,
    pub nodes: Vec<NodeOrbit>,
    /// arithmetic genus of the cover from Riemann-Hurwitz
    pub cover_genus: i64,
}

fn inverse_mod(a: i64, e: i64) -> Option<i64> {
    let g = a.extended_gcd(&e);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(e))
}

impl BlockProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCurve = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("curve JSON: {e}")))?;
        Self::validate(&raw)
    }

    /// Checks every invariant of the description, naming the first one violated.
    pub fn validate(raw: &RawCurve) -> Result<Self> {
        let series = Series::parse(&raw.algebra.series)?;
        let rank = raw.algebra.rank;
        crate::lie::validate_type(series, rank)?;
        let n = raw.group.order;
        if n == 0 {
            return invalid("group: order must be positive");
        }
        if raw.level < 1 {
            return invalid(format!("level: c = {} must be >= 1", raw.level));
        }
        let locals = Arc::new(Locals::new(series, rank));
        let mut phi = raw.phi.clone();
        if phi.is_empty() && n == 1 {
            phi.push(Local::free(rank).phi);
        }
        if phi.len() != n {
            return invalid(format!("phi: expected {n} descriptors (one per group element), got {}", phi.len()));
        }
        for (k, d) in phi.iter().enumerate() {
            locals.get(d).map_err(|e| Error::Invalid(format!("phi[{k}]: {e}")))?;
        }
        let id = &phi[0];
        if TauKind::parse(&id.tau)? != TauKind::Id || id.h.iter().any(|x| x % id.m as i64 != 0) {
            return invalid("phi: phi[0] must be the identity automorphism");
        }
        let local = |e: usize, chi: i64, what: &str| -> Result<Local> {
            if e == 0 || !n.is_multiple_of(e) {
                return invalid(format!("{what}: stabilizer order {e} does not divide |Gamma| = {n}"));
            }
            if e == 1 {
                return Ok(Local::free(rank));
            }
            let Some(inv) = inverse_mod(chi, e as i64) else {
                return invalid(format!("{what}: primitive character: exponent {chi} is not a unit mod {e}"));
            };
            let k = ((n / e) as i64 * inv).rem_euclid(n as i64) as usize;
            let d = &phi[k];
            if !e.is_multiple_of(d.m) {
                return invalid(format!("{what}: phi[{k}] has m = {} which does not divide the stabilizer order {e}", d.m));
            }
            let scale = (e / d.m) as i64;
            let loc = Local { e, chi: chi.rem_euclid(e as i64), phi: Descriptor { tau: d.tau.clone(), h: d.h.iter().map(|x| x * scale).collect(), m: e } };
            locals.get(&loc.phi).map_err(|err| Error::Invalid(format!("{what}: {err}")))?;
            Ok(loc)
        };
        let mut components = Vec::new();
        for (ci, rc) in raw.components.iter().enumerate() {
            if rc.markings.is_empty() {
                return invalid(format!("marked orbit condition: component {ci} carries no marked orbit"));
            }
            let mut ms = Vec::new();
            for (mi, rm) in rc.markings.iter().enumerate() {
                let what = format!("component {ci} marking {mi}");
                let loc = local(rm.stab_order, rm.char_exponent, &what)?;
                let w = weight_from_json(&rm.weight)?;
                ms.push(MarkedOrbit { local: loc, weight: w });
            }
            components.push(Component { genus: rc.genus, markings: ms });
        }
        let mut nodes = Vec::new();
        for (ni, rn) in raw.nodes.iter().enumerate() {
            let what = format!("node {ni}");
            if rn.exchanges_branches {
                return invalid(format!("{what}: branch exchange: stabilizers exchanging the two branches are not supported"));
            }
            for &c in &rn.endpoints {
                if c >= components.len() {
                    return invalid(format!("{what}: endpoint {c} is not a component"));
                }
            }
            let e = rn.stab_order as i64;
            let other = rn.char_exponent_other.unwrap_or(-rn.char_exponent);
            if e > 0 && (rn.char_exponent + other).rem_euclid(e) != 0 {
                return invalid(format!(
                    "{what}: stability determinant: branch characters {} and {} are not mutually inverse mod {e}",
                    rn.char_exponent, other
                ));
            }
            let b0 = local(rn.stab_order, rn.char_exponent, &what)?;
            let b1 = local(rn.stab_order, other, &what)?;
            nodes.push(NodeOrbit { id: ni, ends: rn.endpoints, branches: [b0, b1] });
        }
        let mut p = BlockProblem { locals, level: raw.level, order: n, phi, components, nodes, cover_genus: 0 };
        if p.components.is_empty() {
            return invalid("marked orbit condition: the curve has no components");
        }
        if p.connected_parts().len() != 1 {
            return invalid("connectedness: the dual graph is not connected");
        }
        p.check_monodromy()?;
        p.check_weights()?;
        p.cover_genus = p.riemann_hurwitz()?;
        if let Some(g) = raw.cover_genus {
            if g != p.cover_genus {
                return invalid(format!("Riemann-Hurwitz: declared cover genus {g} but the orbit data give {}", p.cover_genus));
            }
        }
        Ok(p)
    }

    pub fn to_raw(&self) -> RawCurve {
        let mk = |m: &MarkedOrbit| RawMarking { stab_order: m.local.e, char_exponent: m.local.chi, weight: weight_to_json(&m.weight) };
        RawCurve {
            algebra: RawAlgebra { series: self.locals.series.to_string(), rank: self.locals.rank },
            level: self.level,
            group: RawGroup { order: self.order },
            phi: self.phi.clone(),
            components: self
                .components
                .iter()
                .map(|c| RawComponent { genus: c.genus, markings: c.markings.iter().map(mk).collect() })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| RawNode {
                    endpoints: n.ends,
                    stab_order: n.branches[0].e,
                    char_exponent: n.branches[0].chi,
                    char_exponent_other: Some(n.branches[1].chi),
                    exchanges_branches: false,
                })
                .collect(),
            cover_genus: Some(self.cover_genus),
        }
    }

    pub fn sigma(&self, l: &Local) -> Result<Arc<Automorphism>> {
        self.locals.get(&l.phi)
    }

    /// Group element `(N/e) chi^{-1}` of an orbit.
    fn monodromy(&self, l: &Local) -> i64 {
        if l.e == 1 {
            return 0;
        }
        let inv = inverse_mod(l.chi, l.e as i64).unwrap();
        (self.order / l.e) as i64 * inv
    }

    /// The local monodromies around the special orbits of each component multiply to 1.
    fn check_monodromy(&self) -> Result<()> {
        let n = self.order as i64;
        for (ci, c) in self.components.iter().enumerate() {
            let mut s: i64 = c.markings.iter().map(|m| self.monodromy(&m.local)).sum();
            for nd in &self.nodes {
                for b in 0..2 {
                    if nd.ends[b] == ci {
                        s += self.monodromy(&nd.branches[b]);
                    }
                }
            }
            if s.rem_euclid(n) != 0 {
                return invalid(format!("monodromy: local monodromies on component {ci} do not multiply to the identity"));
            }
        }
        Ok(())
    }

    fn check_weights(&self) -> Result<()> {
        for (ci, c) in self.components.iter().enumerate() {
            for (mi, m) in c.markings.iter().enumerate() {
                let s = self.sigma(&m.local)?;
                if m.weight.len() != s.rank() || !s.in_dc(&m.weight, self.level) {
                    return invalid(format!(
                        "weights: component {ci} marking {mi}: {} is not in D_{} for {}",
                        fmt_weight(&m.weight),
                        self.level,
                        s.describe()
                    ));
                }
            }
        }
        Ok(())
    }

    /// Genus of the quotient: component genera plus the first Betti number of the dual graph.
    pub fn quotient_genus(&self) -> i64 {
        let g: i64 = self.components.iter().map(|c| c.genus as i64).sum();
        g + self.nodes.len() as i64 - self.components.len() as i64 + self.connected_parts().len() as i64
    }

    /// `2g - 2 = |Gamma|(2 gbar - 2) + sum (|Gamma|/e)(e - 1)` over ramified marked orbits.
    fn riemann_hurwitz(&self) -> Result<i64> {
        let n = self.order as i64;
        let mut rhs = n * (2 * self.quotient_genus() - 2);
        for c in &self.components {
            for m in &c.markings {
                let e = m.local.e as i64;
                rhs += (n / e) * (e - 1);
            }
        }
        if rhs.rem_euclid(2) != 0 {
            return invalid("Riemann-Hurwitz: 2g - 2 is odd for the given orbit data");
        }
        Ok(rhs / 2 + 1)
    }

    /// Components grouped into connected pieces of the dual graph.
    pub fn connected_parts(&self) -> Vec<Vec<usize>> {
        let k = self.components.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for nd in &self.nodes {
            let (a, b) = (find(&mut parent, nd.ends[0]), find(&mut parent, nd.ends[1]));
            parent[a] = b;
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in 0..k {
            let r = find(&mut parent, c);
            groups.entry(r).or_default().push(c);
        }
        groups.into_values().collect()
    }

    /// A node is separating when removing it disconnects its endpoints.
    pub fn is_separating(&self, id: usize) -> bool {
        let nd = self.nodes.iter().find(|n| n.id == id).expect("node id");
        if nd.ends[0] == nd.ends[1] {
            return false;
        }
        let mut seen = BTreeSet::from([nd.ends[0]]);
        let mut stack = vec![nd.ends[0]];
        while let Some(c) = stack.pop() {
            for other in self.nodes.iter().filter(|n| n.id != id) {
                for b in 0..2 {
                    if other.ends[b] == c && seen.insert(other.ends[1 - b]) {
                        stack.push(other.ends[1 - b]);
                    }
                }
            }
        }
        !seen.contains(&nd.ends[1])
    }

    /// Replaces a node by two marked orbits `q'` (weight `mu*`) and `q''` (weight `mu`).
    pub fn normalize_at_node(&self, id: usize, mu: &Weight) -> Result<BlockProblem> {
        let Some(nd) = self.nodes.iter().find(|n| n.id == id) else {
            return invalid(format!("no node with id {id}"));
        };
        let pairs = self.locals.dc_pairs(&nd.branches[1].phi, self.level)?;
        let Some((_, dual)) = pairs.iter().find(|(m, _)| m == mu) else {
            return invalid(format!("weight {} is not in D_{} at q''", fmt_weight(mu), self.level));
        };
        self.cut(id, mu, dual)
    }

    fn cut(&self, id: usize, mu: &Weight, dual: &Weight) -> Result<BlockProblem> {
        let pos = self.nodes.iter().position(|n| n.id == id).expect("node id");
        let nd = self.nodes[pos].clone();
        let dual_ok = self.locals.dc_pairs(&nd.branches[0].phi, self.level)?.iter().any(|(m, _)| m == dual);
        if !dual_ok {
            return crate::error::inconsistent(format!("dual weight {} is not in D_{} at q'", fmt_weight(dual), self.level));
        }
        let dual = dual.clone();
        let mut p = self.clone();
        p.nodes.remove(pos);
        p.components[nd.ends[0]].markings.push(MarkedOrbit { local: nd.branches[0].clone(), weight: dual });
        p.components[nd.ends[1]].markings.push(MarkedOrbit { local: nd.branches[1].clone(), weight: mu.clone() });
        Ok(p)
    }

    /// Children of the factorization at a node: one per `mu` in `D_c` at `q''`, sorted.
    pub fn factorize(&self, id: usize) -> Result<Vec<(Weight, BlockProblem)>> {
        let Some(nd) = self.nodes.iter().find(|n| n.id == id) else {
            return invalid(format!("no node with id {id}"));
        };
        let pairs = self.locals.dc_pairs(&nd.branches[1].phi, self.level)?;
        pairs.iter().map(|(mu, dual)| Ok((mu.clone(), self.cut(id, mu, dual)?))).collect()
    }

    /// Adds a weight-0 marked orbit with the given local data to a component.
    pub fn propagate(&self, component: usize, local: Local) -> Result<BlockProblem> {
        if component >= self.components.len() {
            return invalid(format!("no component {component}"));
        }
        let s = self.sigma(&local)?;
        if !s.zero_in_dc(self.level) {
            let lab = s.labels();
            return invalid(format!(
                "propagation: 0 is not in D_{} for {}: m = {} does not divide sbar c = {}",
                self.level,
                s.describe(),
                s.m,
                fmt_q(&(lab.sbar_gcd * q(self.level)))
            ));
        }
        let mut p = self.clone();
        let zero = vec![Q::zero(); s.rank()];
        p.components[component].markings.push(MarkedOrbit { local, weight: zero });
        p.check_monodromy()?;
        p.cover_genus = p.riemann_hurwitz()?;
        Ok(p)
    }

    /// Removes a weight-0 marked orbit with trivial stabilizer, keeping at least one marking.
    pub fn unpropagate(&self, component: usize, marking: usize) -> Result<BlockProblem> {
        let c = &self.components[component];
        let m = &c.markings[marking];
        if m.local.e != 1 || m.weight.iter().any(|x| !x.is_zero()) {
            return invalid("only weight-0 orbits with trivial stabilizer can be removed");
        }
        if c.markings.len() == 1 {
            return invalid("marked orbit condition: cannot remove the last marked orbit");
        }
        let mut p = self.clone();
        p.components[component].markings.remove(marking);
        Ok(p)
    }

    /// The sub-problem on a set of components (with the nodes among them).
    pub fn restrict_to(&self, part: &[usize]) -> BlockProblem {
        let index = |c: usize| part.iter().position(|&x| x == c);
        let mut p = self.clone();
        p.components = part.iter().map(|&c| self.components[c].clone()).collect();
        p.nodes = self
            .nodes
            .iter()
            .filter_map(|n| Some(NodeOrbit { ends: [index(n.ends[0])?, index(n.ends[1])?], ..n.clone() }))
            .collect();
        p
    }

    /// Node chosen by the default move order: non-separating first, then separating, lowest id.
    pub fn default_next_node(&self) -> Option<usize> {
        let mut ids: Vec<usize> = self.nodes.iter().map(|n| n.id).collect();
        ids.sort();
        ids.iter().copied().find(|&i| !self.is_separating(i)).or_else(|| ids.first().copied())
    }
}

// ---------------------------------------------------------------- trinions and tables

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leg {
    pub local: Descriptor,
    pub weight: Weight,
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]m{}:{}", self.local.tau, self.local.h.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","), self.local.m, fmt_weight(&self.weight))
    }
}

/// Trinion signature with legs sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrinionKey(pub Vec<Leg>);

impl fmt::Display for TrinionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" | "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    User,
    Oracle,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawLeg {
    tau: String,
    h: Vec<i64>,
    m: usize,
    weight: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawEntry {
    legs: Vec<RawLeg>,
    value: u64,
    #[serde(default = "user")]
    provenance: Provenance,
}

fn user() -> Provenance {
    Provenance::User
}

#[derive(Clone, Debug, Default)]
pub struct FusionTable {
    pub entries: BTreeMap<TrinionKey, (u64, Provenance)>,
}

impl FusionTable {
    pub fn get(&self, k: &TrinionKey) -> Option<u64> {
        self.entries.get(k).map(|e| e.0)
    }

    pub fn insert(&mut self, k: TrinionKey, v: u64, p: Provenance) {
        self.entries.insert(k, (v, p));
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<RawEntry> = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("fusion table JSON: {e}")))?;
        let mut t = FusionTable::default();
        for (i, e) in raw.into_iter().enumerate() {
            if e.legs.len() != 3 {
                return invalid(format!("fusion entry {i}: a trinion has 3 legs, got {}", e.legs.len()));
            }
            let mut legs = Vec::new();
            for l in e.legs {
                legs.push(Leg { local: Descriptor { tau: l.tau, h: l.h, m: l.m }, weight: weight_from_json(&l.weight)? });
            }
            legs.sort();
            let key = TrinionKey(legs);
            if let Some((old, _)) = t.entries.get(&key) {
                if *old != e.value {
                    return invalid(format!("fusion entry {i}: conflicting values for {key}"));
                }
            }
            t.insert(key, e.value, e.provenance);
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<RawEntry> = self
            .entries
            .iter()
            .map(|(k, (v, p))| RawEntry {
                legs: k
                    .0
                    .iter()
                    .map(|l| RawLeg { tau: l.local.tau.clone(), h: l.local.h.clone(), m: l.local.m, weight: weight_to_json(&l.weight) })
                    .collect(),
                value: *v,
                provenance: *p,
            })
            .collect();
        serde_json::to_string_pretty(&raw).unwrap()
    }
}

// ---------------------------------------------------------------- factorization trees

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Pad { component: usize },
    Unpropagate { component: usize },
}

#[derive(Clone, Debug)]
pub enum FactorizationTree {
    /// a smooth genus-0 component reduced to three legs
    Leaf { component: usize, moves: Vec<Move>, key: TrinionKey },
    /// factorization at a node: children indexed by `mu` with co-leg `mu*`
    Node { id: usize, separating: bool, children: Vec<(Weight, Weight, FactorizationTree)> },
    /// disjoint union of connected pieces
    Product(Vec<FactorizationTree>),
}

impl FactorizationTree {
    pub fn leaves(&self, out: &mut Vec<TrinionKey>) {
        match self {
            FactorizationTree::Leaf { key, .. } => out.push(key.clone()),
            FactorizationTree::Node { children, .. } => children.iter().for_each(|c| c.2.leaves(out)),
            FactorizationTree::Product(ts) => ts.iter().for_each(|t| t.leaves(out)),
        }
    }

    pub fn leaf_count(&self) -> usize {
        let mut v = Vec::new();
        self.leaves(&mut v);
        v.len()
    }

    /// Sum over branches of products of leaf values.
    pub fn evaluate(&self, table: &FusionTable) -> Result<u128> {
        let mut missing = BTreeSet::new();
        let v = self.eval_inner(table, &mut missing);
        if !missing.is_empty() {
            let list: Vec<String> = missing.iter().map(|k: &TrinionKey| k.to_string()).collect();
            return Err(Error::Missing(format!("fusion table lacks {} trinion(s): {}", list.len(), list.join("; "))));
        }
        Ok(v)
    }

    fn eval_inner(&self, table: &FusionTable, missing: &mut BTreeSet<TrinionKey>) -> u128 {
        match self {
            FactorizationTree::Leaf { key, .. } => match table.get(key) {
                Some(v) => v as u128,
                None => {
                    missing.insert(key.clone());
                    0
                }
            },
            FactorizationTree::Node { children, .. } => children.iter().map(|c| c.2.eval_inner(table, missing)).sum(),
            FactorizationTree::Product(ts) => {
                let mut p = 1u128;
                for t in ts {
                    p *= t.eval_inner(table, missing);
                }
                p
            }
        }
    }

    /// Line-oriented move records.
    pub fn log(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.log_inner("", &mut out);
        out
    }

    fn log_inner(&self, path: &str, out: &mut Vec<String>) {
        match self {
            FactorizationTree::Leaf { component, moves, key } => {
                for m in moves {
                    match m {
                        Move::Pad { component } => out.push(format!("{path}propagate component={component} weight=0")),
                        Move::Unpropagate { component } => out.push(format!("{path}unpropagate component={component} weight=0")),
                    }
                }
                out.push(format!("{path}leaf component={component} legs={key}"));
            }
            FactorizationTree::Node { id, separating, children } => {
                let kind = if *separating { "separating" } else { "non-separating" };
                for (mu, dual, t) in children {
                    let p = format!("{path}node={id}:mu={}/", fmt_weight(mu));
                    out.push(format!("{path}factor node={id} kind={kind} mu={} dual={}", fmt_weight(mu), fmt_weight(dual)));
                    t.log_inner(&p, out);
                }
            }
            FactorizationTree::Product(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    t.log_inner(&format!("{path}part={i}/"), out);
                }
            }
        }
    }
}

/// Reduces a smooth genus-0 component to a trinion key, padding with weight-0 free orbits
/// or removing them.
fn leaf(p: &BlockProblem, ci: usize) -> Result<FactorizationTree> {
    let c = &p.components[ci];
    if c.genus > 0 {
        return invalid(format!("irreducible: component {ci} has genus {} and no declared degeneration", c.genus));
    }
    let mut ms = c.markings.clone();
    let mut moves = Vec::new();
    while ms.len() > 3 {
        let Some(pos) = ms.iter().position(|m| m.local.e == 1 && m.weight.iter().all(|x| x.is_zero())) else {
            return invalid(format!(
                "irreducible: component {ci} has {} marked orbits and no declared degeneration",
                ms.len()
            ));
        };
        ms.remove(pos);
        moves.push(Move::Unpropagate { component: ci });
    }
    while ms.len() < 3 {
        let local = Local::free(p.locals.rank);
        let s = p.sigma(&local)?;
        ms.push(MarkedOrbit { local, weight: vec![Q::zero(); s.rank()] });
        moves.push(Move::Pad { component: ci });
    }
    let mut legs: Vec<Leg> = ms.into_iter().map(|m| Leg { local: m.local.phi, weight: m.weight }).collect();
    legs.sort();
    Ok(FactorizationTree::Leaf { component: ci, moves, key: TrinionKey(legs) })
}

/// Reduction with a node-choice rule.
pub fn reduce_with(p: &BlockProblem, next: &dyn Fn(&BlockProblem) -> Option<usize>) -> Result<FactorizationTree> {
    let parts = p.connected_parts();
    if parts.len() > 1 {
        let subtrees = parts.iter().map(|part| reduce_with(&p.restrict_to(part), next)).collect::<Result<Vec<_>>>()?;
        return Ok(FactorizationTree::Product(subtrees));
    }
    if let Some(id) = next(p) {
        let separating = p.is_separating(id);
        let nd = p.nodes.iter().find(|n| n.id == id).unwrap().clone();
        let pairs = p.locals.dc_pairs(&nd.branches[1].phi, p.level)?;
        let mut children = Vec::new();
        for (mu, dual) in pairs.iter() {
            let child = p.cut(id, mu, dual)?;
            children.push((mu.clone(), dual.clone(), reduce_with(&child, next)?));
        }
        return Ok(FactorizationTree::Node { id, separating, children });
    }
    let parts: Vec<FactorizationTree> = (0..p.components.len()).map(|ci| leaf(p, ci)).collect::<Result<_>>()?;
    if parts.len() == 1 {
        Ok(parts.into_iter().next().unwrap())
    } else {
        Ok(FactorizationTree::Product(parts))
    }
}

/// Reduction with the default move order.
pub fn reduce_to_trinions(p: &BlockProblem) -> Result<FactorizationTree> {
    reduce_with(p, &|q: &BlockProblem| q.default_next_node())
}

/// Reduction that cuts nodes in the given priority order.
pub fn reduce_in_order(p: &BlockProblem, order: &[usize]) -> Result<FactorizationTree> {
    reduce_with(p, &|q: &BlockProblem| order.iter().copied().find(|id| q.nodes.iter().any(|n| n.id == *id)))
}

pub fn dimension(p: &BlockProblem, table: &FusionTable) -> Result<u128> {
    reduce_to_trinions(p)?.evaluate(table)
}

// ---------------------------------------------------------------- filling tables

fn is_free(l: &Leg) -> bool {
    l.local.m == 1
}

/// Fills untwisted leaves (all legs with trivial stabilizer) from the Verlinde oracle.
pub fn fill_verlinde(p: &BlockProblem, tree: &FactorizationTree, table: &mut FusionTable) -> Result<usize> {
    let mut leaves = Vec::new();
    tree.leaves(&mut leaves);
    let g = SimpleLieAlgebra::build(p.locals.series, p.locals.rank)?;
    let ws = WeightSystem::new(g);
    let mut filled = 0;
    for k in leaves {
        if table.get(&k).is_some() || !k.0.iter().all(is_free) {
            continue;
        }
        let weights: Vec<Vec<i64>> = k
            .0
            .iter()
            .map(|l| l.weight.iter().map(|x| q_to_i64(x).ok_or_else(|| Error::Invalid("non-integral weight".into()))).collect())
            .collect::<Result<_>>()?;
        let v = ws.verlinde(p.level, 0, &weights)?;
        table.insert(k, v as u64, Provenance::Oracle);
        filled += 1;
    }
    Ok(filled)
}

/// Outcome of filling one leaf by brute force.
#[derive(Clone, Debug)]
pub struct OracleFill {
    pub key: TrinionKey,
    pub dims: Vec<usize>,
    pub stabilized: bool,
}

/// Fills missing leaves by brute-force coinvariants on the projective line (cyclic
/// `Gamma` of order at most 2). Non-stabilized runs are reported and left unfilled.
pub fn fill_bruteforce(p: &BlockProblem, tree: &FactorizationTree, table: &mut FusionTable) -> Result<Vec<OracleFill>> {
    let mut leaves = Vec::new();
    tree.leaves(&mut leaves);
    leaves.sort();
    leaves.dedup();
    let mut out = Vec::new();
    for k in leaves {
        if table.get(&k).is_some() {
            continue;
        }
        let fixed: Vec<&Leg> = k.0.iter().filter(|l| !is_free(l)).collect();
        let sigma = if fixed.is_empty() {
            p.locals.get(&Local::free(p.locals.rank).phi)?
        } else {
            if fixed.len() != 2 || fixed[0].local != fixed[1].local || fixed[0].local.m != 2 {
                return Err(Error::Missing(format!("no brute-force model for trinion {k}")));
            }
            p.locals.get(&fixed[0].local)?
        };
        let mut ms = Vec::new();
        let mut fixed_seen = 0;
        let mut next_free = 2;
        for l in &k.0 {
            let point = if is_free(l) {
                next_free += 1;
                Point::Free(next_free - 1)
            } else {
                fixed_seen += 1;
                if fixed_seen == 1 {
                    Point::Zero
                } else {
                    Point::Infinity
                }
            };
            ms.push(OracleMarking { point, weight: l.weight.clone() });
        }
        let run = Coinvariants::new(sigma, p.level, &ms)?.run()?;
        if let Some(v) = run.value() {
            table.insert(k.clone(), v as u64, Provenance::Oracle);
        }
        out.push(OracleFill { key: k, dims: run.dims, stabilized: run.stabilized });
    }
    Ok(out)
}

/// Direct brute-force value for a genus-0 curve without nodes (cyclic `Gamma` of order
/// at most 2, at most two ramified orbits placed at `0` and `infinity`).
pub fn bruteforce_smooth(p: &BlockProblem) -> Result<crate::oracle::coinvariants::CoinvariantRun> {
    smooth_coinvariants(p)?.run()
}

/// The brute-force solver for a smooth genus-0 problem, before running it.
pub fn smooth_coinvariants(p: &BlockProblem) -> Result<Coinvariants> {
    if p.components.len() != 1 || !p.nodes.is_empty() || p.components[0].genus != 0 {
        return invalid("brute force needs a smooth genus-0 quotient");
    }
    let ms = &p.components[0].markings;
    let fixed: Vec<&MarkedOrbit> = ms.iter().filter(|m| m.local.e > 1).collect();
    let sigma = match fixed.len() {
        0 => p.locals.get(&Local::free(p.locals.rank).phi)?,
        2 if fixed[0].local.phi == fixed[1].local.phi && fixed[0].local.e == 2 => p.sigma(&fixed[0].local)?,
        _ => return invalid("brute force supports Gamma of order at most 2 with two ramified orbits"),
    };
    let mut out = Vec::new();
    let mut fixed_seen = 0;
    let mut next_free = 2;
    for m in ms {
        let point = if m.local.e == 1 {
            next_free += 1;
            Point::Free(next_free - 1)
        } else {
            fixed_seen += 1;
            if fixed_seen == 1 {
                Point::Zero
            } else {
                Point::Infinity
            }
        };
        out.push(OracleMarking { point, weight: m.weight.clone() });
    }
    Coinvariants::new(sigma, p.level, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl2_curve(components: &str, nodes: &str, level: i64) -> String {
        format!(
            r#"{{"algebra":{{"series":"A","rank":1}},"level":{level},"group":{{"order":1}},"components":{components},"nodes":{nodes}}}"#
        )
    }

    fn verlinde_table(p: &BlockProblem) -> (FactorizationTree, FusionTable) {
        let tree = reduce_to_trinions(p).unwrap();
        let mut t = FusionTable::default();
        fill_verlinde(p, &tree, &mut t).unwrap();
        (tree, t)
    }

    #[test]
    fn smooth_trinions() {
        for (w, expect) in [("[1],[1],[0]", 1), ("[1],[1],[1]", 0), ("[0],[0],[0]", 1)] {
            let ws: Vec<&str> = w.split("],").collect();
            let ms: Vec<String> = ws
                .iter()
                .map(|x| format!(r#"{{"stab_order":1,"weight":{}]}}"#, x.trim_end_matches(']')))
                .collect();
            let text = sl2_curve(&format!(r#"[{{"genus":0,"markings":[{}]}}]"#, ms.join(",")), "[]", 1);
            let p = BlockProblem::from_json(&text).unwrap();
            let (tree, t) = verlinde_table(&p);
            assert_eq!(tree.leaf_count(), 1);
            assert_eq!(tree.evaluate(&t).unwrap(), expect);
        }
    }

    #[test]
    fn four_points_one_degeneration() {
        let m = r#"{"stab_order":1,"weight":[1]}"#;
        let text = sl2_curve(
            &format!(r#"[{{"genus":0,"markings":[{m},{m}]}},{{"genus":0,"markings":[{m},{m}]}}]"#),
            r#"[{"endpoints":[0,1],"stab_order":1}]"#,
            1,
        );
        let p = BlockProblem::from_json(&text).unwrap();
        let (tree, t) = verlinde_table(&p);
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(tree.evaluate(&t).unwrap(), 1);
        let p2 = BlockProblem::from_json(&text.replace(r#""level":1"#, r#""level":2"#)).unwrap();
        let (tree, t) = verlinde_table(&p2);
        assert_eq!(tree.evaluate(&t).unwrap(), 2);
    }

    #[test]
    fn nodal_genus_one() {
        let text = sl2_curve(
            r#"[{"genus":0,"markings":[{"stab_order":1,"weight":[0]}]}]"#,
            r#"[{"endpoints":[0,0],"stab_order":1}]"#,
            1,
        );
        let p = BlockProblem::from_json(&text).unwrap();
        assert_eq!(p.quotient_genus(), 1);
        assert_eq!(p.cover_genus, 1);
        let (tree, t) = verlinde_table(&p);
        assert_eq!(tree.evaluate(&t).unwrap(), 2);
        let mut legs = Vec::new();
        tree.leaves(&mut legs);
        assert_eq!(legs.len(), 2);
    }

    #[test]
    fn validation_errors() {
        let empty = sl2_curve(r#"[{"genus":0,"markings":[]}]"#, "[]", 1);
        let e = BlockProblem::from_json(&empty).unwrap_err();
        assert!(e.to_string().contains("marked orbit condition"));
        let z2 = |nodes: &str| {
            format!(
                r#"{{"algebra":{{"series":"A","rank":1}},"level":2,"group":{{"order":2}},
                "phi":[{{"tau":"id","h":[0],"m":1}},{{"tau":"id","h":[1],"m":2}}],
                "components":[{{"genus":0,"markings":[{{"stab_order":2,"char_exponent":1,"weight":[0]}}]}},
                              {{"genus":0,"markings":[{{"stab_order":2,"char_exponent":1,"weight":[0]}}]}}],
                "nodes":{nodes}}}"#
            )
        };
        let ok = BlockProblem::from_json(&z2(r#"[{"endpoints":[0,1],"stab_order":2,"char_exponent":1}]"#)).unwrap();
        assert_eq!(ok.nodes.len(), 1);
        let bad = BlockProblem::from_json(&z2(r#"[{"endpoints":[0,1],"stab_order":3,"char_exponent":1,"char_exponent_other":1}]"#));
        assert!(bad.unwrap_err().to_string().contains("stability determinant"));
        let exch = BlockProblem::from_json(&z2(r#"[{"endpoints":[0,1],"stab_order":2,"char_exponent":1,"exchanges_branches":true}]"#));
        assert!(exch.unwrap_err().to_string().contains("branch exchange"));
    }

    #[test]
    fn elliptic_double_cover() {
        let m = r#"{"stab_order":2,"char_exponent":1,"weight":[0]}"#;
        let text = format!(
            r#"{{"algebra":{{"series":"A","rank":1}},"level":2,"group":{{"order":2}},
            "phi":[{{"tau":"id","h":[0],"m":1}},{{"tau":"id","h":[1],"m":2}}],
            "components":[{{"genus":0,"markings":[{m},{m},{m},{m}]}}],"cover_genus":1}}"#
        );
        let p = BlockProblem::from_json(&text).unwrap();
        assert_eq!(p.cover_genus, 1);
    }

    #[test]
    fn propagation_is_gated() {
        let text = r#"{"algebra":{"series":"A","rank":2},"level":1,"group":{"order":2},
            "phi":[{"tau":"id","h":[0,0],"m":1},{"tau":"flip","h":[0],"m":2}],
            "components":[{"genus":0,"markings":[{"stab_order":1,"weight":[0,0]}]}]}"#;
        let p = BlockProblem::from_json(text).unwrap();
        let twisted = Local { e: 2, chi: 1, phi: Descriptor { tau: "flip".into(), h: vec![0], m: 2 } };
        let e = p.propagate(0, twisted).unwrap_err();
        assert!(e.to_string().contains("does not divide"), "{e}");
        assert!(p.propagate(0, Local::free(2)).is_ok());
    }

    #[test]
    fn table_round_trip() {
        let m = r#"{"stab_order":1,"weight":[1]}"#;
        let text = sl2_curve(&format!(r#"[{{"genus":0,"markings":[{m},{m},{m},{m}]}}]"#), "[]", 1);
        let p = BlockProblem::from_json(&text).unwrap();
        assert!(reduce_to_trinions(&p).unwrap_err().to_string().contains("irreducible"));
        let text = sl2_curve(r#"[{"genus":0,"markings":[{"stab_order":1,"weight":[1]},{"stab_order":1,"weight":[1]}]}]"#, "[]", 1);
        let p = BlockProblem::from_json(&text).unwrap();
        let (tree, t) = verlinde_table(&p);
        let t2 = FusionTable::from_json(&t.to_json()).unwrap();
        assert_eq!(tree.evaluate(&t2).unwrap(), 1);
        assert!(tree.evaluate(&FusionTable::default()).is_err());
    }
}
