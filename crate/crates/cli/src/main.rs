use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use detk3::cayley::{parse_tritensor, verify_composite, AutomorphismChain, Tritensor, TritensorFile, BUNDLED_TRITENSOR};
use detk3::certifier::certify_picard;
use detk3::counting::{count_table, enumerate_surface_points, with_pool, CountConfig, RootMethod};
use detk3::dynamics::{base_point_free_triple, degree18_solve, find_periodic_points, orbit_partition, verify_degree18, Degree18Config};
use detk3::lattice::{
    decompose_triple_class, discriminant_group, eta_even_pow, is_ample, lefschetz_number, min_complement_degree, GramForm, NSClass,
};
use detk3::{Error, Gf};

/// Largest field a point count may use without `--long-run`.
const STANDARD_COUNT_FIELD: u64 = 1 << 8;
const LONG_RUN_COUNT_FIELD: u64 = 1 << 16;

#[derive(Parser, Debug)]
#[command(name = "detk3", version, about = "Point counts, Picard certificates and automorphism dynamics for a determinantal quartic K3 surface")]
struct Cli {
    /// Tritensor JSON file; the bundled example when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Worker threads (at least 1); all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Lift the standard size limits.
    #[arg(long, global = true)]
    long_run: bool,
    /// Seed for sampled points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Queries on the Néron–Severi lattice `Z[η]`.
    Lattice {
        #[command(subcommand)]
        query: LatticeQuery,
    },
    /// Point counts of `det M0 = 0` over `F_{p^n}`, `n = 1..max-ext`.
    Count {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long = "max-ext", default_value_t = 8)]
        max_ext: u32,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Counts, traces, characteristic polynomial and Picard certificate.
    Certify {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long = "max-ext", default_value_t = 10)]
        max_ext: u32,
    },
    /// The cofactor matrices, the first cofactor column and chain checks.
    Automorphism {
        #[arg(long, default_value_t = 17)]
        p: u32,
        /// Run the consistency checks over `F_p`.
        #[arg(long)]
        check: bool,
    },
    /// Points with `g^period(x) = x` on `S(F_{p^t})`.
    Periodic {
        #[arg(long, default_value_t = 17)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long, default_value_t = 2)]
        period: u32,
    },
    /// Degree-18 quadruples representing `g`, solved over `F_p`.
    Reduce18 {
        #[arg(long, default_value_t = 17)]
        p: u32,
        /// Extension degrees of the sample fields.
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        extensions: Vec<u32>,
        #[arg(long = "batch", default_value_t = 48)]
        batch_points: usize,
        #[arg(long = "sample-budget", default_value_t = 4000)]
        sample_budget: usize,
        /// Also search for a base-point-free triple over `F_p` and `F_{p^2}`.
        #[arg(long)]
        base_points: bool,
    },
}

#[derive(Subcommand, Debug)]
enum LatticeQuery {
    /// Lefschetz number of `g^n`.
    Lefschetz {
        #[arg(long)]
        n: i64,
    },
    /// `η^{2k}`.
    EtaPow {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Smallest `d` with `d·D0 − target` ample.
    MinDegree {
        #[arg(long, value_parser = parse_class, allow_hyphen_values = true)]
        target: (i64, i64),
    },
    Ample {
        #[arg(long, value_parser = parse_class, allow_hyphen_values = true)]
        class: (i64, i64),
    },
    /// The two square-4 classes summing to `3 η^{2n}`.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Invariant factors of the discriminant group of a Gram form.
    Discriminant {
        /// `m00,m01,m10,m11`; the lattice form `(4,2),(2,−4)` by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gram: Option<Vec<i64>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Direct,
    Gcd,
}

fn parse_class(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b but got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Why a command stopped.
enum Failure {
    Usage(String),
    Contract(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Contract(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Contract(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_) | Error::FieldTooLarge { .. } => Failure::Budget(e.to_string()),
            Error::InvalidArgument(_) | Error::Parse(_) | Error::NotPrime(_) => Failure::Usage(e.to_string()),
            _ => Failure::Contract(e.to_string()),
        }
    }
}

/// A report plus whether it met its own success condition.
struct Outcome {
    report: Value,
    ok: bool,
}

fn class_text(x: &NSClass) -> String {
    use std::fmt::Write;
    let zero = 0.into();
    let mut s = String::new();
    if x.a != zero || x.b == zero {
        write!(s, "{}", x.a).unwrap();
    }
    if x.b != zero {
        let b = if x.b == 1.into() { String::new() } else if x.b == (-1).into() { "-".into() } else { x.b.to_string() };
        if x.a != zero && x.b > zero {
            s.push('+');
        }
        write!(s, "{b}η").unwrap();
    }
    s
}

fn class_json(x: &NSClass) -> Value {
    json!({ "a": x.a.to_string(), "b": x.b.to_string(), "text": class_text(x) })
}

fn load(input: &Option<PathBuf>) -> Result<TritensorFile, Failure> {
    let text = match input {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?,
        None => BUNDLED_TRITENSOR.to_string(),
    };
    Ok(parse_tritensor(&text)?)
}

fn over_prime(file: &TritensorFile, p: u32) -> Result<Tritensor<Gf>, Failure> {
    if let Some(declared) = file.prime {
        if declared != p {
            return Err(Failure::Usage(format!("the input is defined over F_{declared}, not F_{p}")));
        }
    }
    Ok(file.over_prime(p)?)
}

fn check_count_budget(p: u32, n: u32, long_run: bool) -> Result<(), Failure> {
    let limit = if long_run { LONG_RUN_COUNT_FIELD } else { STANDARD_COUNT_FIELD };
    let q = (p as u64).checked_pow(n).unwrap_or(u64::MAX);
    if q > limit {
        let hint = if long_run { "" } else { "; pass --long-run to raise the limit" };
        return Err(Failure::Budget(format!("F_{p}^{n} has {q} elements, over the limit {limit}{hint}")));
    }
    Ok(())
}

fn lattice(query: &LatticeQuery) -> Result<Outcome, Failure> {
    let report = match query {
        LatticeQuery::Lefschetz { n } => json!({ "query": "lefschetz", "n": n, "value": lefschetz_number(*n)?.to_string() }),
        LatticeQuery::EtaPow { k } => json!({ "query": "eta-pow", "k": k, "class": class_json(&eta_even_pow(*k)) }),
        LatticeQuery::MinDegree { target } => {
            let t = NSClass::new(target.0, target.1);
            json!({ "query": "min-degree", "target": class_json(&t), "degree": min_complement_degree(&t)? })
        }
        LatticeQuery::Ample { class } => {
            let c = NSClass::new(class.0, class.1);
            json!({ "query": "ample", "class": class_json(&c), "ample": is_ample(&c), "square": c.square().to_string() })
        }
        LatticeQuery::Decompose { n } => {
            let (u, v) = decompose_triple_class(*n);
            json!({ "query": "decompose", "n": n, "classes": [class_json(&u), class_json(&v)] })
        }
        LatticeQuery::Discriminant { gram } => {
            let g = match gram.as_deref() {
                None => GramForm::ns(),
                Some(&[a, b, c, d]) => GramForm::new(a, b, c, d)?,
                Some(_) => return Err(Failure::Usage("--gram takes four integers".into())),
            };
            let inv: Vec<String> = discriminant_group(&g)?.iter().map(|c| c.to_string()).collect();
            json!({ "query": "discriminant", "gram_det": g.det().to_string(), "invariant_factors": inv })
        }
    };
    Ok(Outcome { report, ok: true })
}

fn count(cli: &Cli, p: u32, max_ext: u32, method: Method) -> Result<Outcome, Failure> {
    check_count_budget(p, max_ext, cli.long_run)?;
    let t = over_prime(&load(&cli.input)?, p)?;
    let method = match method {
        Method::Direct => RootMethod::Direct,
        Method::Gcd => RootMethod::Gcd,
    };
    let cfg = CountConfig { method, threads: cli.threads, timings: false };
    let table = count_table(&t.matrix(0).det(), max_ext, &cfg)?;
    let entries: Vec<Value> = table.entries.iter().map(|e| json!({ "n": e.n, "q": e.q, "count": e.count })).collect();
    Ok(Outcome { report: json!({ "p": p, "counts": entries }), ok: true })
}

fn certify(cli: &Cli, p: u32, max_ext: u32) -> Result<Outcome, Failure> {
    check_count_budget(p, max_ext, cli.long_run)?;
    let t = over_prime(&load(&cli.input)?, p)?;
    let cfg = CountConfig { threads: cli.threads, ..CountConfig::default() };
    let table = count_table(&t.matrix(0).det(), max_ext, &cfg)?;
    let cert = certify_picard(&table, &GramForm::hyperplane_curve())?;
    let mut report = cert.report();
    report["p"] = json!(p);
    report["max_ext"] = json!(max_ext);
    Ok(Outcome { report, ok: cert.rank().is_some() })
}

fn matrix_text(t: &Tritensor<detk3::algebra::Integers>, n: usize) -> Vec<Vec<String>> {
    let m = t.matrix(n);
    (0..4).map(|r| (0..4).map(|c| m.get(r, c).to_pretty()).collect()).collect()
}

fn automorphism(cli: &Cli, p: u32, check: bool) -> Result<Outcome, Failure> {
    let file = load(&cli.input)?;
    let z = &file.tensor;
    let column: Vec<String> = z.matrix(0).adjugate().column(0).iter().map(|g| g.to_pretty()).collect();
    let mut report = json!({
        "m0": matrix_text(z, 0),
        "m1": matrix_text(z, 1),
        "m2": matrix_text(z, 2),
        "first_cofactor_column": column,
    });
    if !check {
        return Ok(Outcome { report, ok: true });
    }
    let bilinear = z.bilinear_consistency_check().is_ok();
    let t = over_prime(&file, p)?;
    let chain = AutomorphismChain::new(&t)?;
    let pts = enumerate_surface_points(&t.matrix(0).det(), t.ring())?;
    let mut images = Vec::with_capacity(pts.len());
    let mut round_trip = true;
    let mut symbolic_agrees = true;
    for x in &pts {
        let y = chain.apply(x)?;
        round_trip &= chain.apply_inverse(&y)? == *x && chain.apply(&chain.apply_inverse(x)?)? == *x;
        symbolic_agrees &= chain.apply_symbolic(x)? == y;
        images.push(y);
    }
    images.sort();
    let mut sorted = pts.clone();
    sorted.sort();
    let bijective = images == sorted;
    let (_, comp) = verify_composite(&t)?;
    let ok = bilinear && bijective && round_trip && symbolic_agrees && comp.divisible;
    report["checks"] = json!({
        "p": p,
        "bilinear_consistent": bilinear,
        "surface_points": pts.len(),
        "bijective": bijective,
        "inverse_round_trip": round_trip,
        "symbolic_agrees_with_staged": symbolic_agrees,
        "composite_degree": comp.composite_degree,
        "composite_divisible": comp.divisible,
        "quotient_degree": comp.quotient_degree,
        "all_passed": ok,
    });
    Ok(Outcome { report, ok })
}

fn periodic(cli: &Cli, p: u32, t_deg: u32, period: u32) -> Result<Outcome, Failure> {
    let t = over_prime(&load(&cli.input)?, p)?;
    let field = Gf::new(p, t_deg)?;
    let mut reports = Vec::new();
    for d in (1..=t_deg).filter(|d| t_deg.is_multiple_of(*d)) {
        reports.push(find_periodic_points(&t, d, period)?);
    }
    let top = reports.last().expect("t divides itself");
    let points: Vec<Value> = top
        .points
        .iter()
        .map(|x| json!({ "coords": x.coords.iter().map(|&c| field.format_elem(c)).collect::<Vec<_>>(), "degree": x.degree }))
        .collect();
    let partition = orbit_partition(&reports);
    let report = json!({
        "p": p,
        "t": t_deg,
        "period": period,
        "surface_points": top.surface_points,
        "count": top.fixed_count,
        "new_points": top.new_points,
        "fixed_points_of_g": top.fixed_points_of_g,
        "undefined": top.undefined,
        "inverse_verified": top.inverse_verified,
        "lefschetz_bound": top.lefschetz_bound,
        "within_lefschetz_bound": top.fixed_count <= top.lefschetz_bound,
        "points": points,
        "orbit_partition": partition.orbits,
        "tested_degrees": partition.tested_degrees,
    });
    let ok = top.inverse_verified && top.undefined == 0;
    Ok(Outcome { report, ok })
}

fn reduce18(cli: &Cli, p: u32, extensions: &[u32], batch_points: usize, sample_budget: usize, base_points: bool) -> Result<Outcome, Failure> {
    let t = over_prime(&load(&cli.input)?, p)?;
    let cfg = Degree18Config { extensions: extensions.to_vec(), batch_points, sample_budget, seed: cli.seed };
    let result = degree18_solve(&t, &cfg)?;
    let verified = verify_degree18(&result, &t)?;
    let mut report = serde_json::to_value(&result).expect("plain data");
    report["extensions"] = json!(extensions);
    report["verified"] = json!(verified);
    report["consistent"] = json!(result.consistent());
    let mut ok = verified && result.consistent();
    if base_points {
        let bp = base_point_free_triple(&result, &t, 2)?;
        ok &= bp.triple.is_some();
        report["base_points"] = serde_json::to_value(&bp).expect("plain data");
    }
    Ok(Outcome { report, ok })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if cli.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let job = || match &cli.command {
        Command::Lattice { query } => lattice(query),
        Command::Count { p, max_ext, method } => count(cli, *p, *max_ext, *method),
        Command::Certify { p, max_ext } => certify(cli, *p, *max_ext),
        Command::Automorphism { p, check } => automorphism(cli, *p, *check),
        Command::Periodic { p, t, period } => periodic(cli, *p, *t, *period),
        Command::Reduce18 { p, extensions, batch_points, sample_budget, base_points } => {
            reduce18(cli, *p, extensions, *batch_points, *sample_budget, *base_points)
        }
    };
    with_pool(cli.threads, job)?
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("detk3: {}", f.message());
            return ExitCode::from(f.code());
        }
    };
    let text = serde_json::to_string_pretty(&outcome.report).expect("serializable report") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("detk3: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
