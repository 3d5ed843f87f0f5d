//! The `gapcheck` command line.
//!
//! Every subcommand writes one report (CSV rows, or JSON with the rows and
//! a summary object) and prints one `PASS`/`FAIL` line per asserted check on
//! stderr. Exit status: 0 when every check passes, 2 when one fails, 1 on a
//! usage or configuration error.
//!
//! Options may also come from a `--config` file of `key = value` lines
//! (`#` starts a comment); keys are the long flag names and flags given on
//! the command line take precedence.
//!
//! CSV columns per subcommand:
//!
//! | command | columns |
//! |---------|---------|
//! | `constants` | quantity, value |
//! | `forms` | sample, trilinear, ordered_triples, product, amgm, cubic_bound |
//! | `curvature` | x1..x4, scalar, lambda_max_plus, lambda_max_minus, decomposition_residual |
//! | `poincare` | trial, gradient_integral, weight_integral, ratio |
//! | `gauge` | x1..x4, f_norm, expected_norm, minus_over_norm, ym_residual, kato_ratio |
//! | `gap` | rho, f_plus_norm, threshold, margin |
//! | `lemma3` | x1..x4, lhs, rhs, tol |
//! | `all` | suite, check, passed |

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::{invalid, Error, Result};
use crate::forms::{search_trilinear_ratio, trilinear_chain_report, trilinear_ratio, SelfDualForm};
use crate::gap::{
    classify, evaluate_gap, lemma3_check, side_norm, GapBoundSpec, Lemma3Outcome, Theorem,
};
use crate::gauge::{
    bpst_field, bpst_norm, charge, charge_monte_carlo, dual_norms, kato_ratio, ym_residual,
    GaugeField, InstantonParams, KatoSample,
};
use crate::geometry::{catalog, curvature_at, weyl_operator_spectrum, Point, Side, SpaceName};
use crate::lie::{commutator_constant, gap_constant, AlgebraMetric, Convention};
use crate::weights::{
    ak_weight_for, bgg_sinh_weight, carron_weight, chm_weight, cutoff, verify_poincare,
    CutoffFamily, RadialWeight, WeightKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::UnknownName {
                kind: "format",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    Zero,
    Bpst,
}

impl FromStr for Connection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(Connection::Zero),
            "bpst" => Ok(Connection::Bpst),
            _ => Err(Error::UnknownName {
                kind: "connection",
                name: s.to_string(),
            }),
        }
    }
}

/// `x1,x2,x3,x4`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Center(pub Point);

impl FromStr for Center {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid(format!("center {s:?}: {e}")))?;
        let arr: Point = parts
            .try_into()
            .map_err(|_| invalid(format!("center needs four coordinates, got {s:?}")))?;
        Ok(Center(arr))
    }
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// so(n) constants a_G and c
    Constants,
    /// trilinear chain on random self-dual forms
    Forms,
    /// curvature invariants at random chart points
    Curvature,
    /// weighted Poincare ratios for cutoff families
    Poincare,
    /// instanton norms, residuals, charge and Kato ratio
    Gauge,
    /// gap threshold verdict for a connection
    Gap,
    /// finite-difference check of the |F+|^p inequality
    Lemma3,
    /// every suite with default settings
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Forms => "forms",
            Command::Curvature => "curvature",
            Command::Poincare => "poincare",
            Command::Gauge => "gauge",
            Command::Gap => "gap",
            Command::Lemma3 => "lemma3",
            Command::All => "all",
        }
    }
}

fn parse_with<T: FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "gapcheck", version, about = "Numerical checks for Yang-Mills gap thresholds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

/// Flags shared by every subcommand; all optional.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct Options {
    #[arg(long, global = true, value_parser = parse_with::<SpaceName>)]
    pub space: Option<SpaceName>,
    #[arg(long, global = true, value_parser = parse_with::<Theorem>)]
    pub theorem: Option<Theorem>,
    #[arg(long, global = true, value_parser = parse_with::<WeightKind>)]
    pub weight: Option<WeightKind>,
    /// linear, log or unit; all three when absent
    #[arg(long, global = true, value_parser = parse_with::<CutoffFamily>)]
    pub cutoff: Option<CutoffFamily>,
    /// cutoff radius; 2, 10 and 100 when absent
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// T4 coefficient of q; for the bgg weight, the curvature bound
    #[arg(long, global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, value_parser = parse_with::<Convention>)]
    pub convention: Option<Convention>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_parser = parse_with::<Connection>)]
    pub connection: Option<Connection>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, value_parser = parse_with::<Center>, allow_hyphen_values = true)]
    pub center: Option<Center>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_parser = parse_with::<Format>)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Reads a `key = value` file.
pub fn read_config(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("config line {}: expected key = value", k + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn fill<T>(slot: &mut Option<T>, cfg: &mut HashMap<String, String>, key: &str) -> Result<()>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    if let Some(v) = cfg.remove(key) {
        if slot.is_none() {
            *slot = Some(
                v.parse::<T>()
                    .map_err(|e| invalid(format!("config key {key}: {e}")))?,
            );
        }
    }
    Ok(())
}

impl Options {
    /// Fills unset options from config-file entries; unknown keys are errors.
    pub fn merge_config(&mut self, mut cfg: HashMap<String, String>) -> Result<()> {
        fill(&mut self.space, &mut cfg, "space")?;
        fill(&mut self.theorem, &mut cfg, "theorem")?;
        fill(&mut self.weight, &mut cfg, "weight")?;
        fill(&mut self.cutoff, &mut cfg, "cutoff")?;
        fill(&mut self.r, &mut cfg, "r")?;
        fill(&mut self.p, &mut cfg, "p")?;
        fill(&mut self.b, &mut cfg, "b")?;
        fill(&mut self.alpha, &mut cfg, "alpha")?;
        fill(&mut self.convention, &mut cfg, "convention")?;
        fill(&mut self.n, &mut cfg, "n")?;
        fill(&mut self.connection, &mut cfg, "connection")?;
        fill(&mut self.lambda, &mut cfg, "lambda")?;
        fill(&mut self.center, &mut cfg, "center")?;
        fill(&mut self.seed, &mut cfg, "seed")?;
        fill(&mut self.samples, &mut cfg, "samples")?;
        fill(&mut self.format, &mut cfg, "format")?;
        fill(&mut self.out, &mut cfg, "out")?;
        if let Some(key) = cfg.keys().min() {
            return Err(invalid(format!("unknown config key {key:?}")));
        }
        Ok(())
    }

    fn metric(&self) -> Result<AlgebraMetric> {
        AlgebraMetric::new(self.alpha.unwrap_or(0.5), self.convention.unwrap_or_default())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(1))
    }

    fn instanton(&self) -> Result<InstantonParams> {
        InstantonParams::new(
            self.center.map_or([0.0; 4], |c| c.0),
            self.lambda.unwrap_or(1.0),
        )
    }

    fn connection(&self) -> Result<GaugeField> {
        Ok(match self.connection.unwrap_or(Connection::Bpst) {
            Connection::Zero => GaugeField::zero(4),
            Connection::Bpst => bpst_field(self.instanton()?),
        })
    }
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// Twelve significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn num(v: f64) -> Value {
    match fmt_float(v).parse::<f64>() {
        Ok(r) if r.is_finite() => json!(r),
        _ => json!(fmt_float(v)),
    }
}

/// Outcome of one asserted invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// A rendered subcommand result.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(command: Command, columns: &[&str]) -> Self {
        Self {
            command: command.name().to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    obj.insert(c.clone(), v.json());
                }
                Value::Object(obj)
            })
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
            .collect();
        let doc = json!({
            "command": self.command,
            "columns": self.columns,
            "rows": rows,
            "summary": Value::Object(self.summary.clone()),
            "checks": checks,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn point_cells(x: &Point) -> Vec<Cell> {
    x.iter().map(|v| Cell::Num(*v)).collect()
}

fn samples_or(opts: &Options, default: usize) -> Result<usize> {
    match opts.samples {
        Some(0) => Err(invalid("--samples must be positive")),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn run_constants(opts: &Options) -> Result<Report> {
    let n = opts.n.unwrap_or(4);
    let metric = opts.metric()?;
    let a_g = gap_constant(n, &metric)?;
    let c = commutator_constant(n, &metric)?;
    let standard = gap_constant(n, &AlgebraMetric::standard(metric.alpha())?)?;
    let tensor = gap_constant(n, &AlgebraMetric::new(metric.alpha(), Convention::Tensor)?)?;
    let mut rep = Report::new(Command::Constants, &["quantity", "value"]);
    for (k, v) in [
        ("n", n as f64),
        ("alpha", metric.alpha()),
        ("a_G", a_g),
        ("c", c),
        ("4/a_G", 4.0 / a_g),
        ("standard_over_tensor", standard / tensor),
    ] {
        rep.rows.push(vec![Cell::Text(k.into()), Cell::Num(v)]);
    }
    let ratio = standard / tensor;
    rep.checks.push(check(
        "convention ratio",
        (ratio - std::f64::consts::SQRT_2).abs() < 1e-12,
        format!("a_G standard/tensor = {}", fmt_float(ratio)),
    ));
    rep.summary.insert("a_G".into(), num(a_g));
    rep.summary.insert("c".into(), num(c));
    Ok(rep)
}

fn run_forms(opts: &Options) -> Result<Report> {
    let n = opts.n.unwrap_or(4);
    let metric = opts.metric()?;
    let a_g = gap_constant(n, &metric)?;
    let count = samples_or(opts, 1000)?;
    let mut rng = opts.rng();
    let mut rep = Report::new(
        Command::Forms,
        &["sample", "trilinear", "ordered_triples", "product", "amgm", "cubic_bound"],
    );
    let mut failures = 0usize;
    for k in 0..count {
        let f = SelfDualForm::random(n, &mut rng);
        match trilinear_chain_report(&f, &metric) {
            Ok(c) => {
                let mut row = vec![Cell::Int(k as i64)];
                row.extend(c.links().iter().map(|v| Cell::Num(*v)));
                rep.rows.push(row);
            }
            Err(Error::InvariantViolation(_)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    rep.checks.push(check(
        "chain monotone",
        failures == 0,
        format!("{failures} of {count} random forms break the chain"),
    ));
    if n >= 4 {
        let eq = trilinear_ratio(&SelfDualForm::su2_equality(1.0), &metric) / a_g;
        rep.checks.push(check(
            "equality configuration",
            (eq - 1.0).abs() < 1e-10,
            format!("ratio/a_G = {}", fmt_float(eq)),
        ));
        let (best, _) = search_trilinear_ratio(n, &metric, 4, 1500, &mut rng);
        rep.checks.push(check(
            "search supremum",
            best >= 0.999 * a_g && best <= a_g * (1.0 + 1e-10),
            format!("best/a_G = {}", fmt_float(best / a_g)),
        ));
        rep.summary.insert("search_best_over_a_G".into(), num(best / a_g));
    }
    Ok(rep)
}

/// Curvature invariants `(R, lambda_max(W+), lambda_max(W-))` of the catalog.
pub fn expected_invariants(space: SpaceName) -> (f64, f64, f64) {
    match space {
        SpaceName::R4 => (0.0, 0.0, 0.0),
        SpaceName::S4 => (12.0, 0.0, 0.0),
        SpaceName::S3xR => (6.0, 0.0, 0.0),
        SpaceName::CP2 => (24.0, 4.0, 0.0),
        SpaceName::H4 => (-12.0, 0.0, 0.0),
        SpaceName::CH2 => (-24.0, 2.0, 0.0),
    }
}

fn run_curvature(opts: &Options) -> Result<Report> {
    let spaces: Vec<SpaceName> = match opts.space {
        Some(s) => vec![s],
        None => SpaceName::ALL.to_vec(),
    };
    let count = samples_or(opts, 100)?;
    let mut rng = opts.rng();
    let mut rep = Report::new(
        Command::Curvature,
        &[
            "space",
            "x1",
            "x2",
            "x3",
            "x4",
            "scalar",
            "lambda_max_plus",
            "lambda_max_minus",
            "decomposition_residual",
        ],
    );
    for name in spaces {
        let space = catalog(name);
        let (r0, lp0, lm0) = expected_invariants(name);
        let mut worst: f64 = 0.0;
        let mut worst_residual: f64 = 0.0;
        for _ in 0..count {
            let x = space.sample_point(&mut rng);
            let c = curvature_at(&space, &x)?;
            worst = worst
                .max((c.scalar - r0).abs())
                .max((c.lambda_max_plus - lp0).abs())
                .max((c.lambda_max_minus - lm0).abs());
            worst_residual = worst_residual.max(c.decomposition_residual);
            let mut row = vec![Cell::Text(name.to_string())];
            row.extend(point_cells(&x));
            row.extend([
                Cell::Num(c.scalar),
                Cell::Num(c.lambda_max_plus),
                Cell::Num(c.lambda_max_minus),
                Cell::Num(c.decomposition_residual),
            ]);
            rep.rows.push(row);
        }
        rep.checks.push(check(
            format!("{name} invariants"),
            worst < 1e-5,
            format!("max deviation {}", fmt_float(worst)),
        ));
        rep.checks.push(check(
            format!("{name} decomposition"),
            worst_residual < 1e-6,
            format!("max residual {}", fmt_float(worst_residual)),
        ));
        if name == SpaceName::CP2 {
            let x = space.sample_point(&mut rng);
            let e = weyl_operator_spectrum(&curvature_at(&space, &x)?, Side::Plus);
            let ok = (e[2] - 4.0).abs() < 1e-4 && (e[0] + 2.0).abs() < 1e-4 && (e[1] + 2.0).abs() < 1e-4;
            rep.checks.push(check(
                "CP2 W+ spectrum",
                ok,
                format!("({}, {}, {})", fmt_float(e[2]), fmt_float(e[1]), fmt_float(e[0])),
            ));
        }
    }
    Ok(rep)
}

fn default_weight(space: SpaceName) -> WeightKind {
    match space {
        SpaceName::H4 => WeightKind::Bgg,
        SpaceName::CH2 => WeightKind::Chm,
        _ => WeightKind::Carron,
    }
}

fn build_weight(kind: WeightKind, space: SpaceName, opts: &Options) -> Result<RadialWeight> {
    match kind {
        WeightKind::Carron => Ok(carron_weight()),
        WeightKind::Bgg => bgg_sinh_weight(opts.b.unwrap_or(1.0)),
        WeightKind::Ak => ak_weight_for(&catalog(space)),
        WeightKind::Chm => chm_weight(2),
    }
}

fn run_poincare(opts: &Options) -> Result<Report> {
    let name = opts.space.unwrap_or(SpaceName::R4);
    let space = catalog(name);
    let kind = opts.weight.unwrap_or(default_weight(name));
    let weight = build_weight(kind, name, opts)?;
    let families = match opts.cutoff {
        Some(f) => vec![f],
        None => vec![
            CutoffFamily::LinearCutoff,
            CutoffFamily::LogCutoff,
            CutoffFamily::UnitCutoff,
        ],
    };
    let radii = match opts.r {
        Some(r) => vec![r],
        None => vec![2.0, 10.0, 100.0],
    };
    let mut tests = Vec::new();
    for f in &families {
        for r in &radii {
            tests.push(cutoff(*f, *r)?);
        }
    }
    let rep_p = verify_poincare(&space, &weight, &tests)?;
    let mut rep = Report::new(
        Command::Poincare,
        &["trial", "gradient_integral", "weight_integral", "ratio"],
    );
    for t in &rep_p.trials {
        rep.rows.push(vec![
            Cell::Text(t.label.clone()),
            Cell::Num(t.gradient_integral),
            Cell::Num(t.weight_integral),
            Cell::Num(t.ratio),
        ]);
    }
    rep.summary.insert("space".into(), json!(name.to_string()));
    rep.summary.insert("weight".into(), json!(weight.name()));
    rep.summary.insert("min_ratio".into(), num(rep_p.min_ratio));
    rep.checks.push(check(
        "poincare ratio",
        rep_p.passed,
        format!("min ratio {}", fmt_float(rep_p.min_ratio)),
    ));
    Ok(rep)
}

/// Point with `lo < |x - y| / lambda < hi`.
fn annulus_point(rng: &mut ChaCha8Rng, params: &InstantonParams, lo: f64, hi: f64) -> Point {
    loop {
        let v: Point = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            let r = rng.random_range(lo..hi) * params.scale();
            let y = params.center();
            return std::array::from_fn(|i| y[i] + r * v[i] / n);
        }
    }
}

fn run_gauge(opts: &Options) -> Result<Report> {
    let metric = opts.metric()?;
    let params = opts.instanton()?;
    let field = opts.connection()?;
    let is_bpst = opts.connection.unwrap_or(Connection::Bpst) == Connection::Bpst;
    let count = samples_or(opts, 50)?;
    let mut rng = opts.rng();
    let mut rep = Report::new(
        Command::Gauge,
        &[
            "x1",
            "x2",
            "x3",
            "x4",
            "f_norm",
            "expected_norm",
            "minus_over_norm",
            "ym_residual",
            "kato_ratio",
        ],
    );
    let (mut norm_err, mut minus_ratio, mut ym, mut kato_min) = (0.0_f64, 0.0_f64, 0.0_f64, f64::INFINITY);
    for _ in 0..count {
        let x = annulus_point(&mut rng, &params, 0.1, 3.0);
        let (p, m) = dual_norms(&field, &x, &metric)?;
        let f = p.hypot(m);
        let expected = if is_bpst { bpst_norm(&params, &x) } else { 0.0 };
        let res = ym_residual(&field, &x, &metric)?;
        let kato = match kato_ratio(&field, &x, &metric)? {
            KatoSample::Ratio(r) => {
                kato_min = kato_min.min(r);
                Cell::Num(r)
            }
            KatoSample::Undefined => Cell::Text("undefined".into()),
        };
        let rel = if expected > 0.0 { (f - expected).abs() / expected } else { f };
        norm_err = norm_err.max(rel);
        let mr = if f > 0.0 { m / f } else { 0.0 };
        minus_ratio = minus_ratio.max(mr);
        ym = ym.max(res);
        let mut row = point_cells(&x);
        row.extend([Cell::Num(f), Cell::Num(expected), Cell::Num(mr), Cell::Num(res), kato]);
        rep.rows.push(row);
    }
    let default_metric = metric.alpha() == 0.5 && metric.convention() == Convention::Standard;
    if default_metric {
        rep.checks.push(check(
            "norm formula",
            norm_err < 1e-8,
            format!("max relative error {}", fmt_float(norm_err)),
        ));
    }
    rep.checks.push(check(
        "self-duality",
        minus_ratio < 1e-10,
        format!("max |F-|/|F| {}", fmt_float(minus_ratio)),
    ));
    rep.checks.push(check(
        "yang-mills residual",
        ym < 1e-4,
        format!("max residual {}", fmt_float(ym)),
    ));
    if kato_min.is_finite() {
        rep.checks.push(check(
            "refined kato",
            kato_min >= 1.5 - 1e-3,
            format!("min ratio {}", fmt_float(kato_min)),
        ));
    }
    let k = charge(&field)?;
    let mc = charge_monte_carlo(&field, 20_000, &mut rng)?;
    let target = if is_bpst { 1.0 } else { 0.0 };
    rep.checks.push(check(
        "charge",
        (k - target).abs() < 1e-3,
        format!("radial charge {}", fmt_float(k)),
    ));
    rep.checks.push(check(
        "monte-carlo charge",
        (mc.value - target).abs() <= 0.05 * target.max(1.0),
        format!("{} +- {}", fmt_float(mc.value), fmt_float(mc.std_error)),
    ));
    rep.summary.insert("charge".into(), num(k));
    rep.summary.insert("charge_monte_carlo".into(), num(mc.value));
    rep.summary.insert("charge_monte_carlo_std_error".into(), num(mc.std_error));
    Ok(rep)
}

fn gap_spec(opts: &Options) -> Result<GapBoundSpec> {
    let name = opts.space.unwrap_or(SpaceName::S4);
    let theorem = opts.theorem.unwrap_or(Theorem::T5);
    let mut spec = GapBoundSpec::for_theorem(theorem, catalog(name))?;
    if let Some(kind) = opts.weight {
        spec.weight = Some(build_weight(kind, name, opts)?);
    }
    if let Some(p) = opts.p {
        spec.p = p;
    }
    if theorem == Theorem::T4 {
        if let Some(b) = opts.b {
            spec.b = b;
        }
    } else if matches!(theorem, Theorem::T11 | Theorem::C12) && opts.weight.is_none() {
        spec.weight = Some(bgg_sinh_weight(opts.b.unwrap_or(1.0))?);
    }
    if let Some(n) = opts.n {
        spec.n = n;
    }
    spec.metric = opts.metric()?;
    spec.validate()?;
    Ok(spec)
}

fn run_gap(opts: &Options) -> Result<Report> {
    let spec = gap_spec(opts)?;
    let field = opts.connection()?;
    let count = samples_or(opts, 50)?;
    let mut rng = opts.rng();
    let points: Vec<Point> = (0..count).map(|_| spec.space.sample_point(&mut rng)).collect();
    let norm_fn = side_norm(&field, &spec);
    let report = evaluate_gap(&norm_fn, &spec, &points)?;
    let side = match spec.side {
        Side::Plus => "f_plus_norm",
        Side::Minus => "f_minus_norm",
    };
    let mut rep = Report::new(Command::Gap, &["rho", side, "threshold", "margin"]);
    for s in &report.samples {
        rep.rows.push(vec![
            Cell::Num(s.rho),
            Cell::Num(s.field_norm),
            Cell::Num(s.threshold),
            Cell::Num(s.margin),
        ]);
    }
    let witness = |w: &Option<crate::gap::GapSample>| match w {
        Some(s) => json!({"rho": num(s.rho), "field_norm": num(s.field_norm),
                          "threshold": num(s.threshold), "margin": num(s.margin)}),
        None => Value::Null,
    };
    rep.summary.insert("theorem".into(), json!(spec.theorem.to_string()));
    rep.summary.insert("space".into(), json!(spec.space.name().to_string()));
    rep.summary.insert("verdict".into(), json!(report.verdict.to_string()));
    rep.summary.insert(
        "witnesses".into(),
        json!({"strictness": witness(&report.strictness_witness),
               "violation": witness(&report.violation_witness)}),
    );
    rep.summary.insert(
        "tolerances".into(),
        json!({"equality_rel": num(report.tolerances.equality_rel),
               "violation_abs": num(report.tolerances.violation_abs)}),
    );
    let (again, _, _) = classify(&report.samples, &report.tolerances);
    rep.checks.push(check(
        "verdict recomputable",
        again == report.verdict,
        format!("verdict {}", report.verdict),
    ));
    Ok(rep)
}

fn run_lemma3(opts: &Options) -> Result<Report> {
    let name = opts.space.unwrap_or(SpaceName::S4);
    let space = catalog(name);
    let metric = opts.metric()?;
    let p = opts.p.unwrap_or(0.5);
    let params = opts.instanton()?;
    let field = opts.connection()?;
    let count = samples_or(opts, 50)?;
    let mut rng = opts.rng();
    let mut rep = Report::new(Command::Lemma3, &["x1", "x2", "x3", "x4", "lhs", "rhs", "tol"]);
    let mut failures = 0usize;
    let mut evaluated = 0usize;
    for _ in 0..count {
        let x = if name == SpaceName::R4 {
            annulus_point(&mut rng, &params, 0.2, 2.0)
        } else {
            space.sample_point(&mut rng)
        };
        let mut row = point_cells(&x);
        match lemma3_check(&field, &space, p, &x, &metric)? {
            Lemma3Outcome::Evaluated(s) => {
                evaluated += 1;
                if !s.holds() {
                    failures += 1;
                }
                row.extend([Cell::Num(s.lhs), Cell::Num(s.rhs), Cell::Num(s.tol)]);
            }
            Lemma3Outcome::Skipped => {
                row.extend((0..3).map(|_| Cell::Text("skipped".into())));
            }
        }
        rep.rows.push(row);
    }
    rep.checks.push(check(
        "lemma3 inequality",
        failures == 0,
        format!("{failures} of {evaluated} evaluated points fail"),
    ));
    Ok(rep)
}

fn run_all(opts: &Options) -> Result<Report> {
    let base = Options {
        seed: opts.seed,
        ..Options::default()
    };
    let mut rep = Report::new(Command::All, &["suite", "check", "passed"]);
    let mut runs: Vec<(Command, Options)> = vec![
        (Command::Constants, base.clone()),
        (Command::Forms, base.clone()),
        (Command::Curvature, base.clone()),
        (Command::Gauge, base.clone()),
        (Command::Lemma3, base.clone()),
        (Command::Lemma3, Options { space: Some(SpaceName::R4), ..base.clone() }),
        (Command::Gap, base.clone()),
    ];
    for (space, weight) in [
        (SpaceName::R4, WeightKind::Carron),
        (SpaceName::H4, WeightKind::Bgg),
        (SpaceName::CH2, WeightKind::Chm),
    ] {
        runs.push((
            Command::Poincare,
            Options {
                space: Some(space),
                weight: Some(weight),
                ..base.clone()
            },
        ));
    }
    for (cmd, o) in runs {
        let sub = execute(cmd, &o)?;
        for c in sub.checks {
            rep.rows.push(vec![
                Cell::Text(cmd.name().into()),
                Cell::Text(c.name.clone()),
                Cell::Bool(c.passed),
            ]);
            rep.checks.push(Check {
                name: format!("{} {}", cmd.name(), c.name),
                ..c
            });
        }
    }
    Ok(rep)
}

/// Runs one subcommand with merged options.
pub fn execute(command: Command, opts: &Options) -> Result<Report> {
    match command {
        Command::Constants => run_constants(opts),
        Command::Forms => run_forms(opts),
        Command::Curvature => run_curvature(opts),
        Command::Poincare => run_poincare(opts),
        Command::Gauge => run_gauge(opts),
        Command::Gap => run_gap(opts),
        Command::Lemma3 => run_lemma3(opts),
        Command::All => run_all(opts),
    }
}

fn emit(report: &Report, opts: &Options) -> std::io::Result<()> {
    let text = report.render(opts.format.unwrap_or(Format::Csv));
    match &opts.out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut opts = cli.options;
    if let Some(path) = opts.config.clone() {
        let merged = fs::read_to_string(&path)
            .map_err(|e| invalid(format!("config {}: {e}", path.display())))
            .and_then(|text| read_config(&text))
            .and_then(|cfg| opts.merge_config(cfg));
        if let Err(e) = merged {
            eprintln!("error: {e}");
            return 1;
        }
    }
    let report = match execute(cli.command, &opts) {
        Ok(r) => r,
        Err(e @ (Error::InvalidParameter(_) | Error::UnknownName { .. } | Error::OutsideDomain(_))) => {
            eprintln!("error: {e}");
            return 1;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = emit(&report, &opts) {
        eprintln!("error: writing report: {e}");
        return 1;
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed() {
        0
    } else {
        2
    }
}
