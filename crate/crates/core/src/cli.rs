//! Front end of the `mqds` executable: spectra, eigenfunction grids, the
//! verification suite and quadrature-oracle comparisons.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{QGFunction, VarSpace};
use crate::error::Error;
use crate::models::{eigenfunction, hamiltonian, spectrum, ModelId, Quanta, Sign};
use crate::star::{quadrature_star_oracle, star, StarConfig};
use crate::verification::{run_selected, CheckId, VerifyConfig};

/// Process exit codes.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const ORACLE: i32 = 4;
}

/// Largest number of grid points accepted by `eigenfunction`.
pub const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Parser, Debug)]
#[command(name = "mqds", version, about = "Moyal star products and resonant-state Wigner functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct GlobalOpts {
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Per-check tolerances, `name=value,...`.
    #[arg(long, global = true)]
    pub tolerance: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModelArg {
    #[value(alias = "oscillator", alias = "ho")]
    HarmonicOscillator,
    #[value(alias = "toy")]
    DampedToy,
    #[value(alias = "dho")]
    DampedHo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    #[value(name = "W", alias = "w")]
    W,
    #[value(name = "F", alias = "f")]
    F,
    #[value(name = "G", alias = "g")]
    G,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    #[value(alias = "+")]
    Plus,
    #[value(alias = "-")]
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues of a family, one row per index.
    Spectrum(SpectrumArgs),
    /// A family member evaluated on a phase-space grid.
    Eigenfunction(EigenfunctionArgs),
    /// Run verification checks and write the JSON report.
    Verify(VerifyArgs),
    /// Closed-form star product against the quadrature oracle.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 0)]
    pub max_n: usize,
    /// Second index range (damped oscillator only).
    #[arg(long, default_value_t = 0)]
    pub max_m: usize,
    /// Damped-oscillator family; the one-dimensional models have one family each.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
}

#[derive(Args, Debug)]
pub struct EigenfunctionArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Grid axis `name=min:max:points`, e.g. `x=-3:3:65`; repeatable.
    /// Unlisted variables are fixed at 0.
    #[arg(long = "axis", value_parser = parse_axis)]
    pub axes: Vec<Axis>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all` or check names (space- or comma-separated).
    #[arg(default_value = "all")]
    pub suite: Vec<String>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Left factor: `x`, `p`, `x1`..`p2`, `H`, `W<n>`, `F+<n>`, `F-<n>`,
    /// `F+<n>,<m>`, `G<n>,<m>` (or `G00`), or `@file.json`.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    /// Model for `H` and for the phase-space dimension of the named families.
    #[arg(long, value_enum, default_value_t = ModelArg::HarmonicOscillator)]
    pub model: ModelArg,
    /// Evaluation point, comma-separated coordinates; repeatable. Defaults to the origin.
    #[arg(long = "point", value_parser = parse_point, allow_hyphen_values = true)]
    pub points: Vec<Vec<f64>>,
    #[arg(long, default_value_t = StarConfig::default().oracle_grid_halfwidth)]
    pub halfwidth: f64,
    #[arg(long, default_value_t = StarConfig::default().oracle_points_per_axis)]
    pub points_per_axis: usize,
}

/// One grid axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

fn parse_axis(text: &str) -> Result<Axis, String> {
    let (name, range) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=min:max:points, got {text:?}"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected min:max:points, got {range:?}"));
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| format!("bad min in {text:?}"))?;
    let max: f64 = parts[1].trim().parse().map_err(|_| format!("bad max in {text:?}"))?;
    let points: usize = parts[2].trim().parse().map_err(|_| format!("bad point count in {text:?}"))?;
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(format!("axis {name}: need finite min < max"));
    }
    if points < 2 {
        return Err(format!("axis {name}: need at least 2 points"));
    }
    Ok(Axis {
        name: name.trim().to_string(),
        min,
        max,
        points,
    })
}

fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad coordinate {v:?}")))
        .collect()
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Oracle(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit_code::USAGE,
            CliError::Io(_) => exit_code::IO,
            CliError::Oracle(_) => exit_code::ORACLE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Oracle(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleNotConverged(_) => CliError::Oracle(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit_code::USAGE } else { exit_code::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            e.code()
        }
    }
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> CliResult<i32> {
    let g = &cli.global;
    for (name, v) in [("hbar", g.hbar), ("omega", g.omega), ("gamma", g.gamma)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
        }
    }
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(g, a),
        Command::Eigenfunction(a) => cmd_eigenfunction(g, a),
        Command::Verify(a) => cmd_verify(g, a),
        Command::Oracle(a) => cmd_oracle(g, a),
    }
}

fn model_of(g: &GlobalOpts, m: ModelArg) -> CliResult<ModelId> {
    Ok(match m {
        ModelArg::HarmonicOscillator => ModelId::harmonic_oscillator(g.omega)?,
        ModelArg::DampedToy => ModelId::damped_toy(g.gamma)?,
        ModelArg::DampedHo => ModelId::damped_ho(g.omega, g.gamma)?,
    })
}

/// Resolves the family flag against the model.
fn family_of(model: &ModelId, family: Option<FamilyArg>) -> CliResult<FamilyArg> {
    let want = match model {
        ModelId::HarmonicOscillator { .. } => FamilyArg::W,
        ModelId::DampedToy { .. } => FamilyArg::F,
        ModelId::DampedHo { .. } => return match family {
            None | Some(FamilyArg::F) => Ok(FamilyArg::F),
            Some(FamilyArg::G) => Ok(FamilyArg::G),
            Some(FamilyArg::W) => Err(CliError::Usage("damped_ho has families F and G".into())),
        },
    };
    match family {
        Some(f) if f != want => Err(CliError::Usage(format!(
            "{} has only the {want:?} family",
            model.name()
        ))),
        _ => Ok(want),
    }
}

fn labels(model: &ModelId, family: FamilyArg, n: usize, m: usize, sign: Sign) -> (Quanta, Option<Sign>) {
    match (model, family) {
        (ModelId::HarmonicOscillator { .. }, _) => (Quanta::Single { n }, None),
        (ModelId::DampedToy { .. }, _) => (Quanta::Single { n }, Some(sign)),
        (ModelId::DampedHo { .. }, FamilyArg::G) => (Quanta::G { n, m }, None),
        (ModelId::DampedHo { .. }, _) => (Quanta::F { n, m }, Some(sign)),
    }
}

fn metadata(g: &GlobalOpts, model: &ModelId) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("model".into(), json!(model.name()));
    m.insert("hbar".into(), json!(g.hbar));
    m.insert("omega".into(), json!(g.omega));
    m.insert("gamma".into(), json!(g.gamma));
    m
}

fn open_output(g: &GlobalOpts) -> CliResult<Box<dyn Write>> {
    Ok(match &g.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(g: &GlobalOpts, value: &Value) -> CliResult<()> {
    let mut w = open_output(g)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_spectrum(g: &GlobalOpts, a: &SpectrumArgs) -> CliResult<i32> {
    let model = model_of(g, a.model)?;
    let family = family_of(&model, a.family)?;
    let sign = Sign::from(a.sign);
    let two_index = model.dof() == 2;
    let max_m = if two_index { a.max_m } else { 0 };
    let mut rows = Vec::new();
    for n in 0..=a.max_n {
        for m in 0..=max_m {
            let (quanta, s) = labels(&model, family, n, m, sign);
            let e = spectrum(&model, g.hbar, quanta, s)?.eigenvalue;
            rows.push((n, m, e));
        }
    }
    match g.format {
        Format::Csv => {
            let mut w = open_output(g)?;
            writeln!(w, "{}", if two_index { "n,m,re,im" } else { "n,re,im" })?;
            for (n, m, e) in rows {
                if two_index {
                    writeln!(w, "{n},{m},{},{}", fmt_num(e.re), fmt_num(e.im))?;
                } else {
                    writeln!(w, "{n},{},{}", fmt_num(e.re), fmt_num(e.im))?;
                }
            }
            w.flush()?;
        }
        Format::Json => {
            let mut meta = metadata(g, &model);
            meta.insert("family".into(), json!(format!("{family:?}")));
            if family == FamilyArg::F {
                meta.insert("sign".into(), json!(sign.symbol()));
            }
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(n, m, e)| {
                    if two_index {
                        json!({"n": n, "m": m, "re": e.re, "im": e.im})
                    } else {
                        json!({"n": n, "re": e.re, "im": e.im})
                    }
                })
                .collect();
            write_json(g, &json!({"metadata": meta, "rows": rows}))?;
        }
    }
    Ok(exit_code::SUCCESS)
}

/// Plain decimal in a readable range, scientific notation outside it.
/// Both forms round-trip exactly.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        // no signed zeros in the output
        "0".to_string()
    } else if !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn variable_names(dof: usize) -> Vec<String> {
    if dof == 1 {
        vec!["x".into(), "p".into()]
    } else {
        let mut v: Vec<String> = (1..=dof).map(|k| format!("x{k}")).collect();
        v.extend((1..=dof).map(|k| format!("p{k}")));
        v
    }
}

fn axis_values(a: &Axis) -> Vec<f64> {
    let step = (a.max - a.min) / (a.points - 1) as f64;
    (0..a.points)
        .map(|i| if i + 1 == a.points { a.max } else { a.min + step * i as f64 })
        .collect()
}

fn cmd_eigenfunction(g: &GlobalOpts, a: &EigenfunctionArgs) -> CliResult<i32> {
    let model = model_of(g, a.model)?;
    let family = family_of(&model, a.family)?;
    let space = VarSpace::new(model.dof(), g.hbar)?;
    let names = variable_names(space.dof());
    let axes: Vec<Axis> = if a.axes.is_empty() {
        let x = names[0].clone();
        let p = names[space.dof()].clone();
        vec![
            Axis { name: x, min: -3.0, max: 3.0, points: 65 },
            Axis { name: p, min: -3.0, max: 3.0, points: 65 },
        ]
    } else {
        a.axes.clone()
    };
    let mut slots = Vec::new();
    for ax in &axes {
        let slot = names
            .iter()
            .position(|n| *n == ax.name)
            .ok_or_else(|| CliError::Usage(format!("unknown axis {:?}; variables are {}", ax.name, names.join(","))))?;
        if slots.contains(&slot) {
            return Err(CliError::Usage(format!("axis {} given twice", ax.name)));
        }
        slots.push(slot);
    }
    let total = axes
        .iter()
        .try_fold(1usize, |acc, ax| acc.checked_mul(ax.points))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| CliError::Usage(format!("grid exceeds {MAX_GRID_POINTS} points")))?;

    let sign = Sign::from(a.sign);
    let (quanta, s) = labels(&model, family, a.n, a.m, sign);
    let f = eigenfunction(&model, space, quanta, s)?;
    log::info!("evaluating {} on {total} points", model.name());

    let values: Vec<Vec<f64>> = axes.iter().map(axis_values).collect();
    let mut idx = vec![0usize; axes.len()];
    let mut z = vec![0.0; space.dim()];
    let mut w = open_output(g)?;
    let mut dump: Vec<Value> = Vec::new();
    if g.format == Format::Csv {
        writeln!(w, "{},re,im", names.join(","))?;
    }
    for _ in 0..total {
        for (k, &slot) in slots.iter().enumerate() {
            z[slot] = values[k][idx[k]];
        }
        let v = f.evaluate_real(&z)?;
        match g.format {
            Format::Csv => {
                let coords: Vec<String> = z.iter().map(|&c| fmt_num(c)).collect();
                writeln!(w, "{},{},{}", coords.join(","), fmt_num(v.re), fmt_num(v.im))?;
            }
            Format::Json => dump.push(json!([v.re, v.im])),
        }
        // row-major: the last axis varies fastest
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].points {
                break;
            }
            idx[k] = 0;
        }
    }
    if g.format == Format::Json {
        let mut meta = metadata(g, &model);
        meta.insert("family".into(), json!(format!("{family:?}")));
        meta.insert("indices".into(), serde_json::to_value(quanta).unwrap_or(Value::Null));
        meta.insert("sign".into(), json!(s.map(Sign::symbol)));
        let spec: Vec<Value> = axes
            .iter()
            .map(|ax| json!({"name": ax.name, "min": ax.min, "max": ax.max, "points": ax.points}))
            .collect();
        serde_json::to_writer_pretty(&mut w, &json!({"spec": {"axes": spec}, "values": dump, "metadata": meta}))
            .map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(exit_code::SUCCESS)
}

fn cmd_verify(g: &GlobalOpts, a: &VerifyArgs) -> CliResult<i32> {
    let mut ids: Vec<CheckId> = Vec::new();
    for item in a.suite.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            ids.extend(CheckId::ALL);
        } else {
            ids.push(item.parse()?);
        }
    }
    if ids.is_empty() {
        return Err(CliError::Usage("no checks selected".into()));
    }
    let cfg = VerifyConfig {
        hbar: g.hbar,
        omega: g.omega,
        gamma: g.gamma,
        seed: g.seed,
        overrides: match &g.tolerance {
            Some(t) => VerifyConfig::parse_overrides(t)?,
            None => Default::default(),
        },
        ..VerifyConfig::default()
    };
    cfg.validate()?;
    let report = run_selected(&cfg, &ids);
    for e in report.failures() {
        log::error!(
            "FAIL {} {} residual {:e} tolerance {:e}{}",
            e.name,
            serde_json::to_string(&e.params).unwrap_or_default(),
            e.residual,
            e.tolerance,
            e.diagnostic.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    log::info!("{} passed, {} failed", report.summary.passed, report.summary.failed);
    let value = serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write_json(g, &value)?;
    Ok(if report.all_passed() {
        exit_code::SUCCESS
    } else {
        exit_code::VERIFY_FAILED
    })
}

/// Splits `"G12"`, `"G1,2"`, `"W10"` into indices; two indices expected
/// when `pair` is set.
fn indices(rest: &str, pair: bool) -> Option<(usize, usize)> {
    let rest = rest.trim_start_matches(['_', ':']);
    if rest.is_empty() {
        return None;
    }
    if pair {
        if let Some((n, m)) = rest.split_once(',') {
            return Some((n.trim().parse().ok()?, m.trim().parse().ok()?));
        }
        let digits: Vec<u32> = rest.chars().map(|c| c.to_digit(10)).collect::<Option<_>>()?;
        if digits.len() != 2 {
            return None;
        }
        Some((digits[0] as usize, digits[1] as usize))
    } else {
        Some((rest.parse().ok()?, 0))
    }
}

/// Resolves a function spec of the `oracle` command.
pub fn resolve_function(spec: &str, g: &GlobalOpts, model: &ModelId) -> CliResult<QGFunction> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        return Ok(QGFunction::from_json(&text)?);
    }
    let space = VarSpace::new(model.dof(), g.hbar)?;
    let names = variable_names(model.dof());
    if let Some(i) = names.iter().position(|n| n == spec) {
        return Ok(QGFunction::coordinate(space, i));
    }
    if spec == "H" {
        return Ok(hamiltonian(model, space)?);
    }
    let bad = || CliError::Usage(format!("unknown function {spec:?}"));
    let (quanta, sign, need) = if let Some(rest) = spec.strip_prefix('W') {
        let (n, _) = indices(rest, false).ok_or_else(bad)?;
        (Quanta::Single { n }, None, ModelArg::HarmonicOscillator)
    } else if let Some(rest) = spec.strip_prefix('G') {
        let (n, m) = indices(rest, true).ok_or_else(bad)?;
        (Quanta::G { n, m }, None, ModelArg::DampedHo)
    } else if let Some(rest) = spec.strip_prefix("F+").or_else(|| spec.strip_prefix("F-")) {
        let s = if spec.starts_with("F+") { Sign::Plus } else { Sign::Minus };
        if model.dof() == 2 {
            let (n, m) = indices(rest, true).ok_or_else(bad)?;
            (Quanta::F { n, m }, Some(s), ModelArg::DampedHo)
        } else {
            let (n, _) = indices(rest, false).ok_or_else(bad)?;
            (Quanta::Single { n }, Some(s), ModelArg::DampedToy)
        }
    } else {
        return Err(bad());
    };
    let owner = model_of(g, need)?;
    let space = VarSpace::new(owner.dof(), g.hbar)?;
    Ok(eigenfunction(&owner, space, quanta, sign)?)
}

fn cmd_oracle(g: &GlobalOpts, a: &OracleArgs) -> CliResult<i32> {
    let model = model_of(g, a.model)?;
    let f = resolve_function(&a.f, g, &model)?;
    let gg = resolve_function(&a.g, g, &model)?;
    if f.space() != gg.space() {
        return Err(CliError::Usage("f and g live on different phase spaces".into()));
    }
    let space = f.space();
    let cfg = StarConfig {
        oracle_grid_halfwidth: a.halfwidth,
        oracle_points_per_axis: a.points_per_axis,
        ..StarConfig::default()
    };
    cfg.validate()?;
    let points = if a.points.is_empty() {
        vec![vec![0.0; space.dim()]]
    } else {
        a.points.clone()
    };
    let closed = star(&f, &gg)?;
    let mut rows = Vec::new();
    for z in &points {
        if z.len() != space.dim() {
            return Err(CliError::Usage(format!(
                "point {z:?} has {} coordinates, expected {}",
                z.len(),
                space.dim()
            )));
        }
        let c = closed.evaluate_real(z)?;
        let q = quadrature_star_oracle(&f, &gg, z, &cfg)?;
        let abs = (c - q).norm();
        // undefined where the closed form vanishes
        let rel = (c.norm() > 0.0).then(|| abs / c.norm());
        rows.push((z.clone(), c, q, abs, rel));
    }
    match g.format {
        Format::Csv => {
            let mut w = open_output(g)?;
            writeln!(
                w,
                "{},closed_re,closed_im,oracle_re,oracle_im,abs_err,rel_err",
                variable_names(space.dof()).join(",")
            )?;
            for (z, c, q, abs, rel) in rows {
                let mut cells: Vec<String> = z.iter().map(|&v| fmt_num(v)).collect();
                cells.extend([c.re, c.im, q.re, q.im, abs].map(fmt_num));
                cells.push(rel.map(fmt_num).unwrap_or_default());
                writeln!(w, "{}", cells.join(","))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut meta = serde_json::Map::new();
            meta.insert("f".into(), json!(a.f));
            meta.insert("g".into(), json!(a.g));
            meta.insert("model".into(), json!(model.name()));
            meta.insert("hbar".into(), json!(g.hbar));
            meta.insert("omega".into(), json!(g.omega));
            meta.insert("gamma".into(), json!(g.gamma));
            meta.insert("oracle".into(), serde_json::to_value(cfg).unwrap_or(Value::Null));
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(z, c, q, abs, rel)| {
                    json!({"point": z, "closed": [c.re, c.im], "oracle": [q.re, q.im], "abs_err": abs, "rel_err": rel})
                })
                .collect();
            write_json(g, &json!({"metadata": meta, "rows": rows}))?;
        }
    }
    Ok(exit_code::SUCCESS)
}

