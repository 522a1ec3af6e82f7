//! `twb`: batch front end for the twisted-blocks toolkit.
//!
//! Every table starts with `#` manifest lines. Exit codes: 0 success, 2 invalid input,
//! 3 truncation window or memory cap, 4 missing fusion data.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twisted_blocks::curve::{self, BlockProblem, FusionTable};
use twisted_blocks::gluing;
use twisted_blocks::lie::Series;
use twisted_blocks::linalg::{fmt_q, parse_q, Q};
use twisted_blocks::loops::LoopAlgebra;
use twisted_blocks::rep::HighestWeightModule;
use twisted_blocks::sugawara;
use twisted_blocks::twist::{fmt_weight, standard, Automorphism, DiagramAutomorphism, TauKind, Weight};
use twisted_blocks::{Error, Result};

/// Environment variable capping the dimension of the finite tensor factor in `oracle`.
const MEMORY_CAP_VAR: &str = "TWB_MAX_STATES";

#[derive(Parser)]
#[command(name = "twb", version, about = "Exact computations for twisted affine algebras and twisted conformal blocks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Twist {
    /// Cartan series of g (A..G)
    series: String,
    /// rank of g
    rank: usize,
    /// diagram automorphism: id, flip or triality
    #[arg(long, default_value = "id")]
    tau: String,
    /// labels alpha_i(h) on the nodes of g^tau, comma separated; zeros if omitted
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Option<Vec<i64>>,
    /// order m of sigma
    #[arg(long, default_value_t = 1)]
    m: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// List D_c with the coefficients n_{lambda,i}
    Dc {
        #[command(flatten)]
        twist: Twist,
        #[arg(long, visible_alias = "level")]
        c: i64,
    },
    /// Per-layer scalar of [L_n, L_k] - (n-k) L_{n+k} on a truncated H(lambda)
    Virasoro {
        #[command(flatten)]
        twist: Twist,
        /// highest weight in fundamental coordinates of g^sigma
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<String>>,
        #[arg(long, visible_alias = "level")]
        c: i64,
        #[arg(long)]
        d_max: usize,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Canonical gluing tensor by two routes and the annihilation identity
    GluingCheck {
        #[command(flatten)]
        twist: Twist,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu: Option<Vec<String>>,
        #[arg(long, visible_alias = "level")]
        c: i64,
        #[arg(long, default_value_t = 6)]
        d_max: usize,
        /// modes x[t^n] with |n| up to this bound
        #[arg(long, default_value_t = 3)]
        n_max: i64,
        /// layers d up to this bound
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Reduction log of a curve down to trinions
    Factorize {
        curve: PathBuf,
        /// node ids to cut first, comma separated
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
    },
    /// Block dimension from a fusion table, or with oracle-filled trinions
    Dim {
        curve: PathBuf,
        #[arg(long)]
        fusion: Option<PathBuf>,
        /// fill missing trinions by the Verlinde and brute-force oracles
        #[arg(long)]
        oracle: bool,
        /// write the completed fusion table here
        #[arg(long)]
        write_fusion: Option<PathBuf>,
        /// also evaluate under this many random node orders
        #[arg(long, default_value_t = 0)]
        check_orders: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Brute-force coinvariants of a smooth genus-0 curve
    Oracle { curve: PathBuf },
}

struct Report {
    header: Vec<(String, String)>,
    body: String,
}

impl Report {
    fn new(sub: &str, inputs: &[&PathBuf], params: String) -> Self {
        let inputs: Vec<String> = inputs.iter().map(|p| p.display().to_string()).collect();
        Report {
            header: vec![
                ("subcommand".into(), sub.into()),
                ("inputs".into(), if inputs.is_empty() { "-".into() } else { inputs.join(",") }),
                ("params".into(), params),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
                ("exact_arithmetic".into(), "true".into()),
            ],
            body: String::new(),
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.body.push_str(s.as_ref());
        self.body.push('\n');
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out + &self.body
    }
}

fn automorphism(t: &Twist) -> Result<Arc<Automorphism>> {
    let series = Series::parse(&t.series)?;
    let kind = TauKind::parse(&t.tau)?;
    let h = match &t.h {
        Some(h) => h.clone(),
        None => {
            let g = twisted_blocks::lie::SimpleLieAlgebra::build(series, t.rank)?;
            vec![0; DiagramAutomorphism::new(&g, kind)?.folded_rank]
        }
    };
    Ok(Arc::new(standard(series, t.rank, kind, h, t.m)?))
}

fn twist_params(t: &Twist, s: &Automorphism) -> String {
    format!("algebra={}{} tau={} h={:?} m={}", t.series, t.rank, t.tau, s.h, t.m)
}

fn weight_arg(w: &Option<Vec<String>>, rank: usize) -> Result<Weight> {
    let Some(w) = w else { return Ok(vec![Q::from_integer(0.into()); rank]) };
    if w.len() != rank {
        return Err(Error::Invalid(format!("weight needs {rank} coordinates, got {}", w.len())));
    }
    w.iter().map(|s| parse_q(s).ok_or_else(|| Error::Invalid(format!("not a rational number: {s}")))).collect()
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn cmd_dc(twist: &Twist, c: i64) -> Result<Report> {
    let s = automorphism(twist)?;
    let mut r = Report::new("dc", &[], format!("{} c={c}", twist_params(twist, &s)));
    let dc = s.enumerate_dc(c)?;
    r.line(format!("zero_in_dc {}", s.zero_in_dc(c)));
    r.line(format!("count {}", dc.len()));
    for w in &dc {
        let ns: Vec<String> = s.n_coefficients(w, c).iter().map(fmt_q).collect();
        r.line(format!("weight {} n {}", fmt_weight(w), ns.join(" ")));
    }
    Ok(r)
}

fn cmd_virasoro(twist: &Twist, lambda: &Option<Vec<String>>, c: i64, d_max: usize, n: i64, k: i64) -> Result<Report> {
    let s = automorphism(twist)?;
    let lam = weight_arg(lambda, s.rank())?;
    let need = sugawara::required_d_max(s.m as i64, n, k);
    if need > d_max {
        return Err(Error::Window(format!("required d_max {need} for (n, k) = ({n}, {k}), have {d_max}")));
    }
    let alg = Arc::new(LoopAlgebra::new(s.clone())?);
    let h = HighestWeightModule::new(alg, &lam, c, d_max)?;
    let mut r = Report::new(
        "virasoro",
        &[],
        format!("{} lambda={} c={c} d_max={d_max} n={n} k={k}", twist_params(twist, &s), fmt_weight(&lam)),
    );
    r.line(format!("central_charge {}", fmt_q(&sugawara::Sugawara::new(&h).central_charge())));
    for row in sugawara::virasoro_defect(&h, n, k)? {
        match row.scalar {
            Some(x) => r.line(format!("degree {} scalar {}", row.degree, fmt_q(&x))),
            None => r.line(format!("degree {} scalar none", row.degree)),
        }
    }
    Ok(r)
}

fn cmd_gluing(twist: &Twist, mu: &Option<Vec<String>>, c: i64, d_max: usize, n_max: i64, degree: usize) -> Result<Report> {
    let s = automorphism(twist)?;
    let mu = weight_arg(mu, s.rank())?;
    if degree + n_max as usize > d_max {
        return Err(Error::Window(format!("required d_max {} for degree {degree} and n_max {n_max}", degree + n_max as usize)));
    }
    let alg = Arc::new(LoopAlgebra::new(s.clone())?);
    let h = HighestWeightModule::new(alg, &mu, c, d_max)?;
    let mut r = Report::new(
        "gluing-check",
        &[],
        format!("{} mu={} c={c} d_max={d_max} n_max={n_max} degree={degree}", twist_params(twist, &s), fmt_weight(&mu)),
    );
    let d1 = gluing::canonical_from_gram(&h)?;
    let d2 = gluing::canonical_by_recursion(&h)?;
    let rep = gluing::check_gluing(&h, &d1, n_max, degree)?;
    let dims: Vec<String> = (0..=h.d_max).map(|d| h.dim(d).to_string()).collect();
    r.line(format!("dims {}", dims.join(" ")));
    r.line(format!("routes_agree {}", d1 == d2));
    r.line(format!("delta0_identity {}", gluing::is_identity(&gluing::delta0_as_endomorphism(&h, &d1))));
    let top: Vec<String> = gluing::dual_top_weights(&h)?.iter().map(fmt_weight).collect();
    r.line(format!("dual_top_weight {} expected {}", top.join(" "), fmt_weight(&s.dual_weight(&mu)?)));
    r.line(format!("checked {} skipped {} failures {}", rep.checked, rep.skipped, rep.failures.len()));
    for f in &rep.failures {
        r.line(format!("failure {f}"));
    }
    if d1 != d2 || !rep.failures.is_empty() {
        return Err(Error::Consistency(r.render()));
    }
    Ok(r)
}

fn cmd_factorize(path: &PathBuf, order: &Option<Vec<usize>>) -> Result<Report> {
    let p = BlockProblem::from_json(&read(path)?)?;
    let tree = match order {
        Some(o) => curve::reduce_in_order(&p, o)?,
        None => curve::reduce_to_trinions(&p)?,
    };
    let mut r = Report::new("factorize", &[path], format!("order={order:?}"));
    r.line(format!("quotient_genus {}", p.quotient_genus()));
    for l in tree.log() {
        r.line(l);
    }
    r.line(format!("leaves {}", tree.leaf_count()));
    Ok(r)
}

fn cmd_dim(
    path: &PathBuf,
    fusion: &Option<PathBuf>,
    oracle: bool,
    write_fusion: &Option<PathBuf>,
    check_orders: usize,
    seed: u64,
) -> Result<Report> {
    let p = BlockProblem::from_json(&read(path)?)?;
    let mut inputs = vec![path];
    let mut table = match fusion {
        Some(f) => {
            inputs.push(f);
            FusionTable::from_json(&read(f)?)?
        }
        None => FusionTable::default(),
    };
    let mut r = Report::new(
        "dim",
        &inputs,
        format!("oracle={oracle} level={} check_orders={check_orders} seed={seed}", p.level),
    );
    let tree = curve::reduce_to_trinions(&p)?;
    for l in tree.log() {
        r.line(l);
    }
    if oracle {
        let n = curve::fill_verlinde(&p, &tree, &mut table)?;
        r.line(format!("oracle verlinde filled {n}"));
        for f in curve::fill_bruteforce(&p, &tree, &mut table)? {
            let dims: Vec<String> = f.dims.iter().map(|d| d.to_string()).collect();
            r.line(format!("oracle bruteforce {} dims {} stabilized {}", f.key, dims.join(" "), f.stabilized));
        }
    }
    if let Some(out) = write_fusion {
        std::fs::write(out, table.to_json()).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", out.display())))?;
    }
    let value = tree.evaluate(&table)?;
    r.line(format!("dimension {value}"));
    if check_orders > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<usize> = p.nodes.iter().map(|n| n.id).collect();
        for i in 0..check_orders {
            ids.shuffle(&mut rng);
            let v = curve::reduce_in_order(&p, &ids)?.evaluate(&table)?;
            r.line(format!("order {i} {ids:?} dimension {v}"));
            if v != value {
                return Err(Error::Consistency(format!("order {ids:?} gives {v}, default order gives {value}")));
            }
        }
    }
    Ok(r)
}

fn memory_cap() -> Result<Option<usize>> {
    match std::env::var(MEMORY_CAP_VAR) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Invalid(format!("{MEMORY_CAP_VAR} must be a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn cmd_oracle(path: &PathBuf) -> Result<Report> {
    let p = BlockProblem::from_json(&read(path)?)?;
    let cap = memory_cap()?;
    let mut co = curve::smooth_coinvariants(&p)?;
    let mut r = Report::new("oracle", &[path], format!("level={} cap={}", p.level, cap.map_or("none".into(), |c| c.to_string())));
    if let Some(cap) = cap {
        if co.w_dim() > cap {
            return Err(Error::Window(format!("finite factor has dimension {} above {MEMORY_CAP_VAR}={cap}", co.w_dim())));
        }
    }
    r.line(format!("finite_dim {} invariant_dim {}", co.w_dim(), co.invariant_dim()));
    let run = co.run()?;
    for (d, v) in run.dims.iter().enumerate() {
        r.line(format!("depth {d} dim {v}"));
    }
    r.line(format!("stabilized {}", run.stabilized));
    match run.value() {
        Some(v) => r.line(format!("value {v}")),
        None => r.line("value none"),
    }
    Ok(r)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) | Error::Consistency(_) => 2,
        Error::Window(_) => 3,
        Error::Missing(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.cmd {
        Cmd::Dc { twist, c } => cmd_dc(twist, *c),
        Cmd::Virasoro { twist, lambda, c, d_max, n, k } => cmd_virasoro(twist, lambda, *c, *d_max, *n, *k),
        Cmd::GluingCheck { twist, mu, c, d_max, n_max, degree } => cmd_gluing(twist, mu, *c, *d_max, *n_max, *degree),
        Cmd::Factorize { curve, order } => cmd_factorize(curve, order),
        Cmd::Dim { curve, fusion, oracle, write_fusion, check_orders, seed } => {
            cmd_dim(curve, fusion, *oracle, write_fusion, *check_orders, *seed)
        }
        Cmd::Oracle { curve } => cmd_oracle(curve),
    };
    match out {
        Ok(r) => {
            print!("{}", r.render());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
