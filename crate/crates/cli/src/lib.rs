//! Command-line front end for `cachekit`: argument parsing, file formats and
//! report emission.

pub mod json;

use std::path::{Path, PathBuf};
use std::time::Instant;

use cachekit::caching::{
    man_load, simulate_roundtrip, tradeoff_curve, yma_load, CachingInstance, DemandVector, Scheme,
};
use cachekit::converse::{general_lp_bound, theorem3_bound, GeneralInstance, LoadMode, LpBoundOptions, OrderSet};
use cachekit::icmap::{build_digraph, caching_to_ic, max_acyclic_bound, ICInstance, DEFAULT_VERTEX_CAP};
use cachekit::icschemes::{
    bruteforce_linear_capacity, composite_symmetric_rate, message_set, novel_feasibility, CompositeAssignment,
    DEFAULT_MAX_LPS,
};
use cachekit::caching::man_placement;
use cachekit::scalar::{format_rational, int, parse_rational, rat};
use cachekit::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::json::{one_based, rational};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("schema: {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("resource cap: {0}")]
    Cap(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } => 2,
            CliError::Cap(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<cachekit::Error> for CliError {
    fn from(e: cachekit::Error) -> Self {
        match e {
            cachekit::Error::Size { .. } => CliError::Cap(e.to_string()),
            cachekit::Error::Decode(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cachekit", version, about = "Coded caching and index coding bounds in exact arithmetic")]
pub struct Cli {
    /// Add wall-clock milliseconds to the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Memory-load corners and envelope samples.
    Tradeoff(TradeoffArgs),
    /// Bit-level placement, delivery and decoding.
    Simulate(SimulateArgs),
    /// Converse bound at one memory value.
    Bound(BoundArgs),
    /// Index coding tools on a JSON instance.
    #[command(subcommand)]
    Ic(IcCommand),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TradeoffScheme {
    Man,
    Yma,
    Bound,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SchemeArg {
    Man,
    Yma,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Worst,
    Average,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrdersArg {
    Strict,
    Leaders,
}

#[derive(Args, Debug)]
pub struct TradeoffArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long, value_enum, default_value = "yma")]
    pub scheme: TradeoffScheme,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Envelope samples per unit of memory (JSON only).
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long)]
    pub t: usize,
    /// Comma-separated 1-based file indices, one per user.
    #[arg(long, value_delimiter = ',')]
    pub demand: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "yma")]
    pub scheme: SchemeArg,
    /// File size B in bits; defaults to binom(K, t).
    #[arg(long)]
    pub bits: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Memory per user, e.g. 1/2.
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Heterogeneous instance for the LP bound.
    #[arg(long)]
    pub general: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value = "strict")]
    pub orders: OrdersArg,
}

#[derive(Subcommand, Debug)]
pub enum IcCommand {
    /// Largest symmetric rate of composite coding, time-sharing between decode-set selections.
    Composite {
        #[arg(long)]
        instance: PathBuf,
        /// LP cap; overrides CACHEKIT_MAX_LPS.
        #[arg(long)]
        max_lps: Option<u64>,
    },
    /// Rank certificate of a linear spec.
    Novel {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Exhaustive search over scalar binary linear codes.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_tx: usize,
    },
    /// Side-information digraph and its largest acyclic set.
    Graph {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        cap: usize,
    },
    /// Index coding instance of a MAN placement and demand.
    Reduce {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, value_delimiter = ',')]
        demand: Vec<usize>,
    },
}

/// Report text ready for stdout.
pub struct Output {
    pub text: String,
}

/// Runs one parsed command. `argv` is echoed into JSON reports.
pub fn run(cli: &Cli, argv: &[String]) -> Result<Output, CliError> {
    let start = Instant::now();
    let (params, results) = match &cli.command {
        Command::Tradeoff(a) => {
            if let Format::Csv = a.format {
                return tradeoff_csv(a).map(|text| Output { text });
            }
            tradeoff(a)?
        }
        Command::Simulate(a) => simulate(a)?,
        Command::Bound(a) => bound(a)?,
        Command::Ic(IcCommand::Reduce { n, k, t, demand }) => {
            let inst = CachingInstance::with_min_bits(*n, *k, *t)?;
            let d = DemandVector::from_one_based(demand, *n)?;
            let r = caching_to_ic(&man_placement(&inst)?, &d)?;
            return Ok(Output {
                text: pretty(&json::instance_to_json(&r.ic)),
            });
        }
        Command::Ic(c) => ic(c)?,
    };
    let mut report = json!({
        "command": argv.join(" "),
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": params,
        "results": results,
    });
    if cli.timing {
        report["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(Output { text: pretty(&report) })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn need_positive(n: usize, k: usize) -> Result<(), CliError> {
    if n == 0 || k == 0 {
        return Err(CliError::Usage("--N and --K must be at least 1".into()));
    }
    Ok(())
}

/// `(tN/K, load)` for `t = 0..=K`.
fn tradeoff_points(n: usize, k: usize, scheme: TradeoffScheme) -> Result<Vec<(Rational, Rational)>, CliError> {
    (0..=k)
        .map(|t| {
            let m = rat((t * n) as i64, k as i64);
            let load = match scheme {
                TradeoffScheme::Man => man_load(k, t),
                TradeoffScheme::Yma => yma_load(n, k, t),
                TradeoffScheme::Bound => theorem3_bound(n, k, &m)?,
            };
            Ok((m, load))
        })
        .collect()
}

fn tradeoff_corners(a: &TradeoffArgs) -> Result<Vec<(Rational, Rational)>, CliError> {
    need_positive(a.n, a.k)?;
    let points = tradeoff_points(a.n, a.k, a.scheme)?;
    Ok(match a.scheme {
        TradeoffScheme::Bound => points,
        TradeoffScheme::Man => tradeoff_curve(a.n, a.k, Scheme::Man).corners().to_vec(),
        TradeoffScheme::Yma => tradeoff_curve(a.n, a.k, Scheme::Yma).corners().to_vec(),
    })
}

fn scheme_name(s: TradeoffScheme) -> &'static str {
    match s {
        TradeoffScheme::Man => "man",
        TradeoffScheme::Yma => "yma",
        TradeoffScheme::Bound => "bound",
    }
}

fn tradeoff(a: &TradeoffArgs) -> Result<(Value, Value), CliError> {
    let corners = tradeoff_corners(a)?;
    let curve = cachekit::envelope::lower_convex_envelope(&corners)?;
    let steps = a.n * a.samples.max(1);
    let samples: Vec<Value> = (0..=steps)
        .map(|s| {
            let m = rat((s * a.n) as i64, steps as i64);
            let load = curve.evaluate(&m).expect("sample inside the memory range");
            json!({ "memory": rational(&m), "load": rational(&load) })
        })
        .collect();
    Ok((
        json!({ "N": a.n, "K": a.k, "scheme": scheme_name(a.scheme) }),
        json!({
            "corners": corners.iter().map(|(m, r)| json!({ "memory": rational(m), "load": rational(r) })).collect::<Vec<_>>(),
            "samples": samples,
        }),
    ))
}

pub const CSV_HEADER: &str = "memory_num,memory_den,load_num,load_den,load_decimal";

fn tradeoff_csv(a: &TradeoffArgs) -> Result<String, CliError> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (m, r) in tradeoff_corners(a)? {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.numer(),
            m.denom(),
            r.numer(),
            r.denom(),
            cachekit::scalar::to_f64(&r)
        ));
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<(Value, Value), CliError> {
    need_positive(a.n, a.k)?;
    if a.demand.len() != a.k {
        return Err(CliError::Usage(format!("--demand needs {} entries, got {}", a.k, a.demand.len())));
    }
    if let Some(&f) = a.demand.iter().find(|&&f| f == 0 || f > a.n) {
        return Err(CliError::Usage(format!("demand entry {f} outside 1..={}", a.n)));
    }
    if a.t > a.k {
        return Err(CliError::Usage(format!("--t must lie in 0..={}", a.k)));
    }
    let inst = match a.bits {
        Some(b) => CachingInstance::new(a.n, a.k, b, a.t)?,
        None => CachingInstance::with_min_bits(a.n, a.k, a.t)?,
    };
    let d = DemandVector::from_one_based(&a.demand, a.n)?;
    let scheme = match a.scheme {
        SchemeArg::Man => Scheme::Man,
        SchemeArg::Yma => Scheme::Yma,
    };
    let out = simulate_roundtrip(&inst, &d, a.seed, scheme)?;
    if !out.success {
        return Err(CliError::Internal(format!(
            "users {:?} did not recover their files",
            out.users.iter().filter(|u| !u.recovered).map(|u| u.user + 1).collect::<Vec<_>>()
        )));
    }
    let sub = inst.subfile_bits();
    let load = Rational::new((out.transmitted_bits as i64).into(), (inst.file_bits as i64).into());
    Ok((
        json!({
            "N": a.n, "K": a.k, "t": a.t,
            "demand": a.demand,
            "seed": a.seed,
            "scheme": match a.scheme { SchemeArg::Man => "man", SchemeArg::Yma => "yma" },
            "file_bits": inst.file_bits,
            "memory": rational(&inst.memory()),
        }),
        json!({
            "success": out.success,
            "transmissions": out.transmissions,
            "transmitted_bits": out.transmitted_bits,
            "payload_units": if sub == 0 { 0 } else { out.transmitted_bits / sub },
            "load": rational(&load),
            "users": out.users.iter().map(|u| json!({
                "user": u.user + 1,
                "recovered": u.recovered,
                "cached_bits": u.cached_bits,
                "rebuilt_payloads": u.rebuilt_payloads,
            })).collect::<Vec<_>>(),
        }),
    ))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: "$".into(),
        msg: format!("{}: {e}", path.display()),
    })
}

fn parse_general(v: &Value, mode: LoadMode) -> Result<GeneralInstance, CliError> {
    let root = v.as_object().ok_or_else(|| CliError::Schema {
        path: "$".into(),
        msg: "expected an object".into(),
    })?;
    if let Some(k) = root.keys().find(|k| !["cache_sizes", "file_lengths", "popularity"].contains(&k.as_str())) {
        return Err(CliError::Schema {
            path: format!("$.{k}"),
            msg: "unknown field".into(),
        });
    }
    let list = |key: &str| -> Result<Option<Vec<Rational>>, CliError> {
        let Some(v) = root.get(key) else { return Ok(None) };
        let items = v.as_array().ok_or_else(|| CliError::Schema {
            path: format!("$.{key}"),
            msg: "expected an array".into(),
        })?;
        items
            .iter()
            .enumerate()
            .map(|(i, x)| json::parse_exact(x, &format!("$.{key}[{i}]")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    };
    let missing = |key: &str| CliError::Schema {
        path: format!("$.{key}"),
        msg: "missing field".into(),
    };
    let caches = list("cache_sizes")?.ok_or_else(|| missing("cache_sizes"))?;
    let files = list("file_lengths")?.ok_or_else(|| missing("file_lengths"))?;
    GeneralInstance::new(caches, files, mode, list("popularity")?).map_err(|e| CliError::Schema {
        path: "$".into(),
        msg: e.to_string(),
    })
}

fn bound(a: &BoundArgs) -> Result<(Value, Value), CliError> {
    let mode = match a.mode {
        Some(ModeArg::Average) => LoadMode::Average,
        _ => LoadMode::Worst,
    };
    let orders = match a.orders {
        OrdersArg::Strict => OrderSet::Strict,
        OrdersArg::Leaders => OrderSet::Leaders,
    };
    let opts = LpBoundOptions {
        orders,
        ..Default::default()
    };
    let mode_name = match mode {
        LoadMode::Worst => "worst",
        LoadMode::Average => "average",
    };
    if let Some(path) = &a.general {
        let g = parse_general(&read_json(path)?, mode)?;
        let lp = general_lp_bound(&g, opts)?;
        return Ok((
            json!({ "general": path.display().to_string(), "mode": mode_name, "users": g.users(), "files": g.files() }),
            json!({ "lp_bound": rational(&lp.value), "acyclic_rows": lp.acyclic_rows }),
        ));
    }
    let (Some(n), Some(k), Some(m)) = (a.n, a.k, a.m.as_deref()) else {
        return Err(CliError::Usage("give --N, --K and --M, or --general".into()));
    };
    need_positive(n, k)?;
    let m = parse_rational(m).map_err(|e| CliError::Usage(e.to_string()))?;
    if m < int(0) || m > int(n as i64) {
        return Err(CliError::Usage(format!("--M must lie in [0, {n}]")));
    }
    let t3 = theorem3_bound(n, k, &m)?;
    let mut results = json!({ "bound": rational(&t3), "theorem3_bound": rational(&t3) });
    if a.mode.is_some() {
        let g = GeneralInstance::symmetric(n, k, m.clone(), mode)?;
        let lp = general_lp_bound(&g, opts)?;
        results["bound"] = rational(&lp.value);
        results["lp_bound"] = rational(&lp.value);
        results["acyclic_rows"] = json!(lp.acyclic_rows);
    }
    Ok((
        json!({ "N": n, "K": k, "M": format_rational(&m), "mode": a.mode.map(|_| mode_name) }),
        results,
    ))
}

fn max_lps(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match std::env::var("CACHEKIT_MAX_LPS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("CACHEKIT_MAX_LPS={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_MAX_LPS),
    }
}

fn load_instance(path: &Path) -> Result<ICInstance, CliError> {
    json::parse_instance(&read_json(path)?)
}

fn ic(c: &IcCommand) -> Result<(Value, Value), CliError> {
    match c {
        IcCommand::Composite { instance, max_lps: flag } => {
            let ic = load_instance(instance)?;
            let cap = max_lps(*flag)?;
            let r = composite_symmetric_rate(&ic, cap)?;
            let assignment = |ca: &CompositeAssignment| {
                json!({
                    "decode_sets": ca.decode_sets.iter().map(|&s| one_based(s)).collect::<Vec<_>>(),
                    "composite_rates": ca.rates.iter().map(|(&p, s)| json!({
                        "subset": one_based(p),
                        "rate": rational(s),
                    })).collect::<Vec<_>>(),
                })
            };
            Ok((
                json!({ "instance": instance.display().to_string(), "max_lps": cap }),
                json!({
                    "rate": rational(&r.rate),
                    "time_sharing": r.components.iter().map(|c| {
                        let mut v = assignment(&c.assignment);
                        v["weight"] = rational(&c.weight);
                        v["message_rates"] = json!(c.rates.iter().map(rational).collect::<Vec<_>>());
                        v
                    }).collect::<Vec<_>>(),
                    "single_selection": {
                        "rate": rational(&r.single.rate),
                        "assignment": assignment(&r.single.assignment),
                        "selections": r.single.selections.to_string(),
                    },
                    "rounds": r.rounds,
                    "lps_solved": r.lps_solved,
                    "met_converse": r.met_converse,
                }),
            ))
        }
        IcCommand::Novel { instance, spec } => {
            let ic = load_instance(instance)?;
            let sf = json::parse_spec(&read_json(spec)?)?;
            if sf.spec.message_count() != ic.message_count() {
                return Err(CliError::Schema {
                    path: "$.messages".into(),
                    msg: format!("spec has {} messages, instance has {}", sf.spec.message_count(), ic.message_count()),
                });
            }
            let decode_sets = sf
                .decode_sets
                .unwrap_or_else(|| ic.users().iter().map(|u| message_set(u.demand.iter().copied())).collect());
            let cert = novel_feasibility(&ic, &sf.spec, &decode_sets)?;
            let rate = match (cert.is_feasible(), cert.oneshot_rate(&ic, &sf.spec)) {
                (true, Some(r)) => Some(r),
                _ => None,
            };
            Ok((
                json!({ "instance": instance.display().to_string(), "spec": spec.display().to_string() }),
                json!({
                    "feasible": cert.is_feasible(),
                    "rate": rate.as_ref().map(rational),
                    "kappa_rate": cert.rate.as_ref().map(rational),
                    "budgets": cert.budgets,
                    "channel_bits": cert.channel_bits,
                    "decode_sets": decode_sets.iter().map(|&s| one_based(s)).collect::<Vec<_>>(),
                    "binding": cert.binding.iter().map(|&i| constraint(&cert.constraints[i])).collect::<Vec<_>>(),
                    "violations": cert.violations.iter().map(|&i| constraint(&cert.constraints[i])).collect::<Vec<_>>(),
                }),
            ))
        }
        IcCommand::Oracle { instance, max_tx } => {
            let ic = load_instance(instance)?;
            let r = bruteforce_linear_capacity(&ic, *max_tx)?;
            Ok((
                json!({ "instance": instance.display().to_string(), "max_tx": max_tx }),
                json!({ "rate": rational(&r) }),
            ))
        }
        IcCommand::Graph { instance, cap } => {
            let ic = load_instance(instance)?;
            let g = build_digraph(&ic);
            let (value, set) = max_acyclic_bound(&g, *cap)?;
            let edges: Vec<Value> = (0..g.vertex_count())
                .flat_map(|a| g.successors(a).iter().map(move |&b| (a, b)))
                .map(|(a, b)| json!([g.vertex(a).label, g.vertex(b).label]))
                .collect();
            Ok((
                json!({ "instance": instance.display().to_string(), "cap": cap }),
                json!({
                    "vertices": g.vertices().iter().map(|v| v.label.clone()).collect::<Vec<_>>(),
                    "edges": edges,
                    "max_acyclic_set": set.labels(&g),
                    "acyclic_bound": rational(&value),
                    "rate_bound": ic.lengths().iter().all(|l| l == &int(1)).then(|| rational(&(int(1) / &value))),
                }),
            ))
        }
        IcCommand::Reduce { .. } => unreachable!("handled in run"),
    }
}

fn constraint(c: &cachekit::icschemes::KappaConstraint) -> Value {
    json!({
        "user": c.user + 1,
        "set": one_based(c.set),
        "kappa": c.kappa,
        "message_bits": c.message_bits,
    })
}
