//! Acceptance gate: one line per criterion, each run at its stated tolerance
//! and time budget.
//!
//! One entry is known to be unattainable (see [`KNOWN_UNATTAINABLE`]). Its
//! criterion prints FAIL, and so does the full-suite criterion, since
//! `verify all` then exits 1. The test itself fails on any other failure,
//! and also if a known failure changes character or starts passing.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use mqds::verification::{run_selected, CheckEntry, CheckId, VerificationReport, VerifyConfig};
use serde_json::Value;

/// `(check, family)` entries that cannot meet their criterion.
///
/// The real-part resolution of identity converges only algebraically for
/// any real test function: its partial sums are moments of a Hermitian
/// operator kernel, and the generating function then has its singularities
/// on the unit circle. The residuals decrease monotonically, but the
/// final/initial ratio stays near 0.5 rather than reaching 1e-3.
const KNOWN_UNATTAINABLE: &[(CheckId, &str)] = &[(CheckId::IdentityResolution, "ReF+")];

fn is_known(e: &CheckEntry) -> bool {
    KNOWN_UNATTAINABLE
        .iter()
        .any(|(name, family)| e.name == *name && e.params.get("family").and_then(Value::as_str) == Some(family))
}

struct Outcome {
    passed: bool,
    /// Failure fully explained by [`KNOWN_UNATTAINABLE`].
    known: bool,
    detail: String,
}

struct Gate {
    outcomes: Vec<(usize, &'static str, Outcome)>,
}

impl Gate {
    fn record(&mut self, id: usize, title: &'static str, o: Outcome) {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        let mut out = std::io::stdout().lock();
        // written past the harness capture so the lines always show
        let _ = writeln!(out, "criterion {id} {title}: {verdict} ({})", o.detail);
        self.outcomes.push((id, title, o));
    }
}

fn cfg() -> VerifyConfig {
    VerifyConfig::default()
}

fn timed_run(ids: &[CheckId]) -> (VerificationReport, Duration) {
    let start = Instant::now();
    let r = run_selected(&cfg(), ids);
    (r, start.elapsed())
}

fn max_residual<'a>(entries: impl IntoIterator<Item = &'a CheckEntry>) -> f64 {
    entries.into_iter().map(|e| e.residual).fold(0.0, f64::max)
}

/// Verdict over `entries` with each tolerance capped at `stated` and a time budget.
fn judge<'a>(
    entries: impl IntoIterator<Item = &'a CheckEntry>,
    stated: impl Fn(&CheckEntry) -> f64,
    elapsed: Duration,
    budget: Option<Duration>,
) -> Outcome {
    let entries: Vec<&CheckEntry> = entries.into_iter().collect();
    let mut problems = Vec::new();
    let mut known = 0;
    for e in &entries {
        let limit = stated(e);
        if e.tolerance > limit {
            problems.push(format!("{} runs at {:e}, looser than {:e}", e.name, e.tolerance, limit));
        }
        if !(e.passed && e.residual <= limit) {
            if is_known(e) {
                known += 1;
            } else {
                problems.push(format!(
                    "{} {} residual {:e}",
                    e.name,
                    serde_json::to_string(&e.params).unwrap_or_default(),
                    e.residual
                ));
            }
        }
    }
    if let Some(b) = budget {
        if elapsed > b {
            problems.push(format!("took {:.2} s, budget {} s", elapsed.as_secs_f64(), b.as_secs()));
        }
    }
    let mut detail = format!(
        "{} entries, max residual {:.2e}, {:.2} s",
        entries.len(),
        max_residual(entries.iter().copied().filter(|e| !is_known(e))),
        elapsed.as_secs_f64()
    );
    if known > 0 {
        detail.push_str(&format!("; {known} known-unattainable entr{}", if known == 1 { "y" } else { "ies" }));
    }
    if !problems.is_empty() {
        detail.push_str("; ");
        detail.push_str(&problems.join("; "));
    }
    Outcome {
        passed: problems.is_empty() && known == 0,
        known: problems.is_empty() && known > 0,
        detail,
    }
}

fn param<'a>(e: &'a CheckEntry, key: &str) -> Option<&'a Value> {
    e.params.get(key)
}

fn is_structure(e: &CheckEntry) -> bool {
    param(e, "identity").is_some()
}

fn is_ccr(e: &CheckEntry) -> bool {
    param(e, "identity").and_then(Value::as_str) == Some("ccr")
}

fn is_oracle_sample(e: &CheckEntry) -> bool {
    e.name == CheckId::StarOrthogonality && param(e, "x").is_some()
}

fn eigen_equations(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::EigenResidual]);
    let entries: Vec<&CheckEntry> = r.checks.iter().filter(|e| !is_structure(e)).collect();
    let mut o = judge(entries.iter().copied(), |_| 1e-10, t, Some(Duration::from_secs(10)));
    // 9 oscillator + 18 toy + 50 F±_nm + 25 G_nm
    if entries.len() != 9 + 18 + 50 + 25 {
        o.passed = false;
        o.detail.push_str(&format!("; expected 102 entries, got {}", entries.len()));
    }
    g.record(1, "eigen-equations", o);
}

fn star_orthogonality(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::StarOrthogonality]);
    let samples = r.checks.iter().filter(|e| is_oracle_sample(e)).count();
    let mut o = judge(
        &r.checks,
        |e| if is_oracle_sample(e) { 1e-6 } else { 1e-9 },
        t,
        Some(Duration::from_secs(30)),
    );
    if samples != 10 {
        o.passed = false;
        o.detail.push_str(&format!("; expected 10 oracle samples, got {samples}"));
    }
    o.detail.push_str(&format!("; {samples} oracle samples"));
    g.record(2, "star-orthogonality", o);
}

fn marginals_and_normalization(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::MarginalDelta, CheckId::Normalization]);
    let mut o = judge(&r.checks, |_| 1e-8, t, Some(Duration::from_secs(10)));
    let thin = r
        .checks
        .iter()
        .filter(|e| e.name == CheckId::MarginalDelta)
        .any(|e| param(e, "tests").and_then(Value::as_u64) != Some(9));
    if thin {
        o.passed = false;
        o.detail.push_str("; a marginal entry does not use 9 test functions");
    }
    g.record(3, "marginals and normalization", o);
}

fn resolution_of_identity(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::IdentityResolution]);
    let mut o = judge(&r.checks, |_| 1e-3, t, Some(Duration::from_secs(10)));
    for e in r.checks.iter().filter(|e| is_known(e)) {
        // the documented failure: monotone decrease, ratio far above 1e-3
        let seq: Vec<f64> = param(e, "residuals_even_n_from_2")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default();
        let monotone = seq.len() == 6 && seq.windows(2).all(|w| w[1] < w[0]);
        if !monotone || e.diagnostic.is_some() || e.passed {
            o.known = false;
            o.detail.push_str(&format!("; {} no longer fails as documented", e.params["family"].as_str().unwrap_or("?")));
        } else {
            o.detail.push_str(&format!(
                "; {} decreases monotonically but final/initial = {:.3} > 1e-3",
                e.params["family"].as_str().unwrap_or("?"), e.residual
            ));
        }
    }
    if r.checks.iter().all(|e| !is_known(e)) {
        o.detail.push_str("; known-unattainable entry missing from the suite");
        o.known = false;
        o.passed = false;
    }
    g.record(4, "resolution of identity", o);
}

fn time_evolution(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::EvolutionMatch]);
    let o = judge(
        &r.checks,
        |e| match param(e, "identity").and_then(Value::as_str) {
            Some("classical_transport") => 1e-9,
            Some("moyal_equals_i_hbar_poisson") => 1e-12,
            _ => 1e-10,
        },
        t,
        Some(Duration::from_secs(10)),
    );
    g.record(5, "time evolution", o);
}

fn complex_scaling(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::ComplexScalingMatch]);
    let o = judge(&r.checks, |_| 1e-10, t, None);
    g.record(6, "complex scaling", o);
}

fn pair_transform(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::PairTransformMatch]);
    let o = judge(&r.checks, |_| 1e-10, t, None);
    g.record(7, "resonant-pair transform", o);
}

fn structural_invariants(g: &mut Gate) {
    let (r, t) = timed_run(&[CheckId::EigenResidual, CheckId::KoopmanZeroMode, CheckId::ConjugationSymmetry]);
    let entries: Vec<&CheckEntry> = r
        .checks
        .iter()
        .filter(|e| e.name != CheckId::EigenResidual || is_ccr(e))
        .collect();
    let ccr = entries.iter().filter(|e| is_ccr(e)).count();
    // the dho eigenvalue-conjugation entry compares against a computed spectrum
    let o = judge(
        entries.iter().copied(),
        |e| if param(e, "identity").and_then(Value::as_str) == Some("F-_nm eigenvalue is conj E_nm") { 1e-10 } else { 1e-12 },
        t,
        None,
    );
    let mut o = o;
    o.detail.push_str(&format!("; {ccr} commutator entries"));
    if ccr == 0 {
        o.passed = false;
    }
    g.record(8, "structural invariants", o);
}

/// Checks the report layout: `{"checks": [{name, params, residual,
/// tolerance, passed, ...}], "summary": {passed, failed}}`.
fn validate_schema(v: &Value) -> Result<(), String> {
    let checks = v.get("checks").and_then(Value::as_array).ok_or("missing checks array")?;
    let names: Vec<&str> = CheckId::ALL.iter().map(|c| c.name()).collect();
    let mut passed = 0;
    for (i, c) in checks.iter().enumerate() {
        let name = c.get("name").and_then(Value::as_str).ok_or(format!("check {i}: name"))?;
        if !names.contains(&name) {
            return Err(format!("check {i}: unknown name {name}"));
        }
        c.get("params").and_then(Value::as_object).ok_or(format!("check {i}: params"))?;
        c.get("residual").and_then(Value::as_f64).ok_or(format!("check {i}: residual"))?;
        c.get("tolerance").and_then(Value::as_f64).ok_or(format!("check {i}: tolerance"))?;
        if c.get("passed").and_then(Value::as_bool).ok_or(format!("check {i}: passed"))? {
            passed += 1;
        }
    }
    let s = v.get("summary").ok_or("missing summary")?;
    let sp = s.get("passed").and_then(Value::as_u64).ok_or("summary.passed")?;
    let sf = s.get("failed").and_then(Value::as_u64).ok_or("summary.failed")?;
    if sp != passed || sf != checks.len() as u64 - passed {
        return Err("summary counts disagree with the entries".into());
    }
    Ok(())
}

fn full_suite(g: &mut Gate) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_mqds"))
        .args(["verify", "all"])
        .env_remove("MQDS_LOG")
        .output()
        .expect("mqds runs");
    let elapsed = start.elapsed();
    let code = out.status.code();
    let shown = code.map_or("signal".to_string(), |c| c.to_string());
    let mut problems = Vec::new();
    let mut known = false;
    match serde_json::from_slice::<Value>(&out.stdout) {
        Err(e) => problems.push(format!("report is not JSON: {e}")),
        Ok(v) => match validate_schema(&v) {
            Err(e) => problems.push(format!("schema: {e}")),
            Ok(()) => {
                let report: VerificationReport = serde_json::from_value(v).expect("report deserializes");
                let failures: Vec<&CheckEntry> = report.failures().collect();
                let unknown: Vec<&&CheckEntry> = failures.iter().filter(|e| !is_known(e)).collect();
                if !unknown.is_empty() {
                    problems.push(format!("{} unexpected failures", unknown.len()));
                }
                known = unknown.is_empty() && !failures.is_empty();
                if code != Some(if failures.is_empty() { 0 } else { 1 }) {
                    problems.push(format!("exit code {code:?} does not match the report"));
                }
            }
        },
    }
    if elapsed > Duration::from_secs(60) {
        problems.push(format!("took {:.2} s", elapsed.as_secs_f64()));
    }
    let mut detail = format!("exit {shown}, schema valid, {:.2} s", elapsed.as_secs_f64());
    if !problems.is_empty() {
        detail = format!("exit {shown}, {:.2} s; {}", elapsed.as_secs_f64(), problems.join("; "));
    } else if known {
        detail.push_str("; exit 1 comes only from the known-unattainable entry");
    }
    g.record(
        9,
        "full verify run",
        Outcome {
            passed: code == Some(0) && problems.is_empty(),
            known: problems.is_empty() && known,
            detail,
        },
    );
}

#[test]
fn acceptance_criteria() {
    let mut g = Gate { outcomes: Vec::new() };
    eigen_equations(&mut g);
    star_orthogonality(&mut g);
    marginals_and_normalization(&mut g);
    resolution_of_identity(&mut g);
    time_evolution(&mut g);
    complex_scaling(&mut g);
    pair_transform(&mut g);
    structural_invariants(&mut g);
    full_suite(&mut g);

    let passed = g.outcomes.iter().filter(|(_, _, o)| o.passed).count();
    let _ = writeln!(std::io::stdout().lock(), "acceptance: {passed}/{} criteria pass", g.outcomes.len());
    let unexplained: Vec<String> = g
        .outcomes
        .iter()
        .filter(|(_, _, o)| !o.passed && !o.known)
        .map(|(id, title, o)| format!("criterion {id} {title}: {}", o.detail))
        .collect();
    assert!(unexplained.is_empty(), "unexplained failures:\n{}", unexplained.join("\n"));
}
