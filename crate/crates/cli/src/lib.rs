//! The `hofa` command line: reads JSON inputs, runs one operation, writes a JSON or CSV report.
//!
//! Exit status is 0 on success, 1 on malformed input or a failed precondition, 2 when a size
//! guard refuses the computation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use hofa_core::abelian::GroupElem;
use hofa_core::cube::{cube_system, hk_seminorm, type_leq, CubeCache, DEFAULT_CUBE_GUARD};
use hofa_core::error::Error;
use hofa_core::filtered::{is_pure_up_to, purity_witness, split_section, SplitOutcome, DEFAULT_WITNESS_SEARCH};
use hofa_core::gowers::{gowers_norm, phase_gowers_exact, ComplexFunction, DEFAULT_GUARD_CELLS};
use hofa_core::inverse::{correlation_search, inverse_report, SearchOptions, SearchReport, Strategy};
use hofa_core::io::{self, AnyCocycle};
use hofa_core::phase_poly::{degree, poly_group_basis};
use hofa_core::systems::{coboundary_solve, exactness_check, minimal_reduce, Cocycle, ExactnessReport, GammaSystem};
use hofa_core::target::Target;
use hofa_core::towers::{
    boundary_average, facts_report, hamming_example, poly_translation_group, rotation_spec, structure_check,
    tower_validate, translational_repr, PolyTower, TowerSpec,
};

type Res<T> = Result<T, Error>;

#[derive(Parser, Debug)]
#[command(name = "hofa", version, about = "Exact finite-scale higher-order Fourier analysis")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cell limit for enumerations.
    #[arg(long = "guard-cells", global = true, default_value_t = DEFAULT_GUARD_CELLS)]
    guard_cells: u128,
    /// Report path; stdout when absent.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Gowers norm ||f||_{U^d}.
    Gowers {
        #[arg(long = "fn")]
        func: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Degree of a torus-valued function.
    Polydeg {
        #[arg(long = "fn")]
        func: PathBuf,
        #[arg(long, default_value_t = 8)]
        max: usize,
    },
    /// Basis of the polynomials of degree <= k with values in (1/M)Z/Z.
    Polyenum {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        modulus: Option<i64>,
    },
    /// Coboundary, degree and type of a cocycle; reduction and exactness for group values.
    Cocycle {
        #[arg(long)]
        cocycle: PathBuf,
        /// Largest type tested.
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Cube system X^[k] with its measure; CSV gives one row per support tuple.
    Cube {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        k: usize,
        /// Also report ||f||_{U^k} on the cube for this function.
        #[arg(long = "fn")]
        func: Option<PathBuf>,
    },
    /// Built-in models.
    Example {
        #[command(subcommand)]
        which: ExampleCmd,
    },
    /// Filtered groups: splitting, purity, relation witnesses.
    Filtered {
        #[command(subcommand)]
        which: FilteredCmd,
    },
    /// Best correlation of f with a phase polynomial of degree <= k.
    Correlate(CorrelateArgs),
}

#[derive(Subcommand, Debug)]
enum ExampleCmd {
    /// Hamming weight model on (Z/2)^N.
    Hamming {
        #[arg(long)]
        k: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value_t = HammingReport::Boundary)]
        report: HammingReport,
        /// Shift tuples for the cosine comparison.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Height-one rotation tower on Z/m.
    Rotation {
        #[arg(long)]
        m: i64,
    },
    /// Validates a polynomial tower given as JSON.
    Tower {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long)]
        exactness: Option<usize>,
        /// Also build G(X) and check its axioms.
        #[arg(long)]
        group: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum HammingReport {
    Boundary,
    Facts,
    Structure,
}

#[derive(Subcommand, Debug)]
enum FilteredCmd {
    Split {
        #[arg(long)]
        embedding: PathBuf,
    },
    Pure {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Solves a relation system inside the subgroup for a given family of the ambient group.
    Check {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        relations: PathBuf,
        #[arg(long)]
        family: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    #[arg(long = "fn")]
    func: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "exhaustive")]
    strategy: Strategy,
    #[arg(long)]
    modulus: Option<i64>,
    /// Also report whether ||f||_{U^{k+1}} >= delta.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
}

/// A report and, for CSV output, its rows.
struct Output {
    json: Value,
    csv: Option<Vec<Vec<String>>>,
}

impl From<Value> for Output {
    fn from(json: Value) -> Self {
        Output { json, csv: None }
    }
}

/// Runs the CLI on `args` (including the program name) with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::Precondition(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    let out = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if e.is_guard() { 2 } else { 1 };
        }
    };
    let text = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string(&normalize(out.json)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(out.csv.unwrap_or_else(|| {
            let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
            rows.extend(io::flatten(&normalize(out.json)).into_iter().map(|(k, v)| vec![k, v]));
            rows
        })),
    };
    let written = match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn to_csv(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Rewrites every non-integer number with twelve decimals.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => io::float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, normalize(x))).collect()),
        other => other,
    }
}

fn read(path: &Path) -> Res<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    io::parse_json(&text).map_err(|e| Error::Parse(format!("{}: {}", path.display(), strip(e))))
}

fn strip(e: Error) -> String {
    match e {
        Error::Parse(m) => m,
        other => other.to_string(),
    }
}

fn load<T>(path: &Path, f: impl FnOnce(&Value, &str) -> Res<T>) -> Res<T> {
    let v = read(path)?;
    f(&v, "$").map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn has_torus_values(v: &Value) -> bool {
    v.get("values").and_then(Value::as_array).and_then(|a| a.first()).is_some_and(Value::is_string)
}

fn ser<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn dispatch(cli: &Cli) -> Res<Output> {
    let guard = cli.guard_cells;
    match &cli.cmd {
        Cmd::Gowers { func, d } => gowers(func, *d, guard).map(Output::from),
        Cmd::Polydeg { func, max } => {
            let f = load(func, io::torus_function_from_json)?;
            let deg = degree(&f, *max);
            Ok(json!({"points": f.domain().len(), "max": max, "degree": deg}).into())
        }
        Cmd::Polyenum { system, k, modulus } => {
            let sys = Arc::new(load(system, io::system_from_json)?);
            let b = poly_group_basis(&sys, *k, *modulus, guard)?;
            let basis: Vec<Value> = b.basis.iter().map(|p| json!(p.values())).collect();
            Ok(json!({
                "k": b.k,
                "modulus": b.modulus,
                "rank": b.basis.len(),
                "orders": b.orders,
                "span_size": b.span_size().to_string(),
                "basis": basis,
            })
            .into())
        }
        Cmd::Cocycle { cocycle, d } => cocycle_report(cocycle, *d, guard).map(Output::from),
        Cmd::Cube { system, k, func } => cube(system, *k, func.as_deref(), guard),
        Cmd::Example { which } => example(which, cli.seed, guard).map(Output::from),
        Cmd::Filtered { which } => filtered(which, guard).map(Output::from),
        Cmd::Correlate(a) => correlate(a, cli.seed, guard).map(Output::from),
    }
}

fn gowers(func: &Path, d: usize, guard: u128) -> Res<Value> {
    let v = read(func)?;
    let loc = |e: Error| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", func.display())),
        other => other,
    };
    let mut rep = io::report();
    rep.insert("d".into(), json!(d));
    if has_torus_values(&v) {
        let p = io::torus_function_from_json(&v, "$").map_err(loc)?;
        let pg = phase_gowers_exact(&p, d, guard)?;
        rep.insert("input".into(), json!("phase"));
        rep.insert("norm".into(), json!(pg.value.max(0.0).powf(1.0 / (1u64 << d) as f64)));
        rep.insert("power".into(), json!(pg.value));
        if let Some(x) = &pg.exact {
            rep.insert("power_exact".into(), io::ratio(x));
        }
    } else {
        let f = io::complex_function_from_json(&v, "$").map_err(loc)?;
        let n = gowers_norm(&f, d, guard)?;
        rep.insert("input".into(), json!("complex"));
        rep.insert("norm".into(), json!(n));
        rep.insert("power".into(), json!(n.powi(1 << d)));
    }
    Ok(Value::Object(rep))
}

fn exactness_json(r: &ExactnessReport) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|c| json!({"character": c.character.as_elem().coeffs, "min_type": c.min_type, "min_degree": c.min_degree}))
        .collect();
    json!({
        "d_max": r.d_max,
        "exact": r.exact,
        "type_chain": r.type_chain.iter().map(io::subgroup_json).collect::<Vec<_>>(),
        "degree_chain": r.degree_chain.iter().map(io::subgroup_json).collect::<Vec<_>>(),
        "characters": rows,
    })
}

fn cocycle_common<T: Target>(rho: &Cocycle<T>, d: usize, guard: u128, rep: &mut Map<String, Value>) -> Res<()>
where
    T::Elem: serde::Serialize,
{
    let sys = rho.system();
    rep.insert("points".into(), json!(sys.len()));
    rep.insert("transitive".into(), json!(sys.is_transitive()));
    let transfer = coboundary_solve(rho);
    rep.insert("coboundary".into(), json!(transfer.is_some()));
    if let Some(f) = transfer {
        rep.insert("transfer".into(), ser(&f.values()));
    }
    let deg = (0..=d + 1).find(|&k| rho.degree_at_most(k as i64));
    rep.insert("degree".into(), json!(deg));
    let mut cache = CubeCache::new(sys.clone(), guard.min(DEFAULT_CUBE_GUARD));
    let mut min_type = None;
    for k in 0..=d {
        if type_leq(rho, k, &mut cache)? {
            min_type = Some(k);
            break;
        }
    }
    rep.insert("min_type".into(), json!(min_type));
    rep.insert("type_checked_up_to".into(), json!(d));
    Ok(())
}

fn cocycle_report(path: &Path, d: usize, guard: u128) -> Res<Value> {
    let c = load(path, io::cocycle_from_json)?;
    let mut rep = io::report();
    match &c {
        AnyCocycle::Torus(rho) => {
            rep.insert("target".into(), json!("torus"));
            cocycle_common(rho, d, guard, &mut rep)?;
        }
        AnyCocycle::Group(rho) => {
            rep.insert("target".into(), io::group_json(rho.target()));
            cocycle_common(rho, d, guard, &mut rep)?;
            if rho.system().is_transitive() {
                let m = minimal_reduce(rho, 1 << 12)?;
                rep.insert(
                    "minimal_subgroup".into(),
                    json!({"generators": io::subgroup_json(&m.subgroup), "order": m.subgroup.order()}),
                );
            }
            rep.insert("exactness".into(), exactness_json(&exactness_check(rho, d, guard.min(DEFAULT_CUBE_GUARD))?));
        }
    }
    Ok(Value::Object(rep))
}

fn cube(system: &Path, k: usize, func: Option<&Path>, guard: u128) -> Res<Output> {
    let sys = Arc::new(load(system, io::system_from_json)?);
    let cube = cube_system(&sys, k, guard.min(DEFAULT_CUBE_GUARD))?;
    let width = 1usize << k;
    let mut header: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    let mut rows = vec![header];
    let mut tuples = Vec::with_capacity(cube.len());
    for (i, w) in cube.weights().iter().enumerate() {
        let t = cube.tuple(i);
        let mut row: Vec<String> = t.iter().map(u32::to_string).collect();
        row.push(format!("{}/{}", w.numer(), w.denom()));
        rows.push(row);
        tuples.push(json!({"tuple": t, "weight": format!("{}/{}", w.numer(), w.denom())}));
    }
    let mut rep = io::report();
    rep.insert("k".into(), json!(k));
    rep.insert("points".into(), json!(sys.len()));
    rep.insert("support".into(), json!(cube.len()));
    if let Some(fp) = func {
        let f = load(fp, io::complex_function_from_json)?;
        if f.domain().as_ref() != sys.as_ref() {
            return Err(Error::Precondition("function domain differs from the cube base".into()));
        }
        let mut cache = CubeCache::new(sys.clone(), guard.min(DEFAULT_CUBE_GUARD));
        rep.insert("seminorm".into(), json!(hk_seminorm(&f, k, &mut cache)?));
    }
    rep.insert("tuples".into(), Value::Array(tuples));
    Ok(Output {
        json: Value::Object(rep),
        csv: Some(rows),
    })
}

fn group_report(tower: &PolyTower, guard: u128) -> Res<Value> {
    let tg = poly_translation_group(tower, guard)?;
    let axioms = tg.check_axioms(guard)?;
    let repr = translational_repr(&tg)?;
    Ok(json!({
        "ok": axioms.ok() && repr.ok(),
        "axioms": ser(&axioms),
        "translational": {
            "ok": repr.ok(),
            "group_order": tg.order(),
            "stabilizer_order": repr.stabilizer.len(),
            "points": repr.points,
            "index_matches": repr.index_matches,
            "transitive": repr.transitive,
            "homomorphism": repr.homomorphism,
            "matches_action": repr.matches_action,
        },
    }))
}

fn tower_levels(spec: &TowerSpec, exactness: Option<usize>, guard: u128) -> Res<Value> {
    let rep = tower_validate(spec, exactness, guard)?;
    let levels: Vec<Value> = rep
        .levels
        .iter()
        .map(|l| {
            json!({
                "degree": l.degree,
                "degree_ok": l.degree_ok,
                "weighted_ok": l.weighted_ok,
                "weights_match": l.weights_match,
                "exactness": l.exactness.as_ref().map(exactness_json),
            })
        })
        .collect();
    Ok(json!({"valid": rep.valid, "levels": levels}))
}

fn example(which: &ExampleCmd, seed: u64, guard: u128) -> Res<Value> {
    match which {
        ExampleCmd::Hamming { k, n, report, samples } => match report {
            HammingReport::Boundary => {
                let b = boundary_average(*k, *n, guard)?;
                let mut v = ser(&b);
                let obj = v.as_object_mut().expect("object");
                obj.insert("value_float".into(), json!(*b.value.numer() as f64 / *b.value.denom() as f64));
                Ok(v)
            }
            HammingReport::Facts => Ok(ser(&facts_report(*k, *n, *samples, seed, guard)?)),
            HammingReport::Structure => {
                let tower = hamming_example(*k, *n)?;
                let mut v = group_report(&tower, guard)?;
                let tg = poly_translation_group(&tower, guard)?;
                let rows = (0..=*k)
                    .map(|d| structure_check(&tg, d, 1 << *k, guard).map(|s| ser(&s)))
                    .collect::<Res<Vec<_>>>()?;
                v.as_object_mut().expect("object").insert("structure".into(), Value::Array(rows));
                Ok(v)
            }
        },
        ExampleCmd::Rotation { m } => {
            let spec = rotation_spec(*m)?;
            let tower = PolyTower::new(&spec)?;
            group_report(&tower, guard)
        }
        ExampleCmd::Tower { tower, exactness, group } => {
            let spec = load(tower, io::tower_from_json)?;
            let mut v = tower_levels(&spec, *exactness, guard)?;
            if *group {
                let t = PolyTower::new(&spec)?;
                v.as_object_mut().expect("object").insert("group".into(), group_report(&t, guard)?);
            }
            Ok(v)
        }
    }
}

fn section_json(out: &SplitOutcome) -> Value {
    match out.section() {
        Some(s) => json!({"split": true, "section": io::elems_json(s.hom().images())}),
        None => json!({"split": false, "reason": out.label()}),
    }
}

fn filtered(which: &FilteredCmd, guard: u128) -> Res<Value> {
    match which {
        FilteredCmd::Split { embedding } => {
            let e = load(embedding, io::embedding_from_json)?;
            let out = split_section(&e, guard)?;
            let mut v = section_json(&out);
            v.as_object_mut().expect("object").insert("degree".into(), json!(e.degree()));
            Ok(v)
        }
        FilteredCmd::Pure { embedding, n } => {
            let e = load(embedding, io::embedding_from_json)?;
            let r = is_pure_up_to(&e, *n, guard)?;
            Ok(json!({
                "n": r.n,
                "families": r.families.to_string(),
                "pure": r.pure,
                "counterexample": r.counterexample.as_deref().map(io::elems_json),
                "max_relations": r.max_relations,
            }))
        }
        FilteredCmd::Check { embedding, relations, family } => {
            let e = load(embedding, io::embedding_from_json)?;
            let r = load(relations, io::relations_from_json)?;
            let bg = e.amb().group().clone();
            let fam = load(family, |v, loc| {
                let arr = v.as_array().ok_or_else(|| Error::Parse(format!("{loc}: expected an array of elements")))?;
                arr.iter().enumerate().map(|(i, x)| io::elem_from_json(x, &bg, &format!("{loc}[{i}]"))).collect::<Res<Vec<GroupElem>>>()
            })?;
            let w = purity_witness(&e, &r, &fam, DEFAULT_WITNESS_SEARCH.max(guard))?;
            Ok(json!({"solvable": w.is_some(), "witness": w.as_deref().map(io::elems_json)}))
        }
    }
}

fn search_json(r: &SearchReport) -> Value {
    json!({
        "k": r.k,
        "strategy": r.strategy.to_string(),
        "modulus": r.modulus,
        "norm": r.norm,
        "correlation": r.correlation,
        "lower_bound": r.lower_bound,
        "search_size": r.search_size.to_string(),
        "maximizers": r.maximizers.to_string(),
        "coords": r.coords,
        "polynomial": r.polynomial.values(),
        "optima": r.optima,
    })
}

fn correlate(a: &CorrelateArgs, seed: u64, guard: u128) -> Res<Value> {
    let v = read(&a.func)?;
    let f = if has_torus_values(&v) {
        ComplexFunction::phase(&io::torus_function_from_json(&v, "$")?)
    } else {
        io::complex_function_from_json(&v, "$")?
    };
    let opts = SearchOptions {
        strategy: a.strategy,
        modulus: a.modulus,
        seed,
        samples: a.samples,
        restarts: a.restarts,
        guard,
    };
    match a.delta {
        Some(delta) => {
            let r = inverse_report(&f, delta, a.k, &opts)?;
            let mut v = search_json(&r.search);
            let obj = v.as_object_mut().expect("object");
            obj.insert("delta".into(), json!(r.delta));
            obj.insert("above_delta".into(), json!(r.above_delta));
            Ok(v)
        }
        None => Ok(search_json(&correlation_search(&f, a.k, &opts)?)),
    }
}

/// A translation system as input JSON, for examples and tests.
pub fn translation_json(moduli: &[i64]) -> Value {
    let g = hofa_core::abelian::FinAbGroup::new(moduli.to_vec()).expect("valid moduli");
    io::system_json(&GammaSystem::translation(&g))
}
