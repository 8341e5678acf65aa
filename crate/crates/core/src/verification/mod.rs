//! Named, machine-runnable checks of every identity the library claims,
//! collected into a serializable [`VerificationReport`].

mod checks;
mod oracles;
mod report;

use std::collections::BTreeMap;

pub use checks::{
    check_classical_limit, check_complex_scaling, check_conjugation, check_eigen, check_evolution,
    check_identity_resolution, check_koopman, check_marginals, check_normalization, check_oracle_samples,
    check_pair_transform, check_star_orthogonality, check_structure, eigen_residual, isotropic_gaussian, kernel_gaussian, marginal_tests,
    relative_distance, Family,
};
pub use oracles::{closed_form_taylor, random_gaussian, random_polynomial};
pub use report::{CheckEntry, CheckId, Summary, VerificationReport, FAILED_RESIDUAL};

use crate::algebra::VarSpace;
use crate::error::{Error, Result};
use crate::models::{ModelId, Quanta, Sign};
use crate::star::StarConfig;

/// Parameters shared by every check.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub hbar: f64,
    pub omega: f64,
    pub gamma: f64,
    /// Seed for all randomized instances.
    pub seed: u64,
    /// Per-check tolerance replacing every default of that check.
    pub overrides: BTreeMap<CheckId, f64>,
    pub oracle: StarConfig,
    /// Width `δ` of the `e^{−δ(x²+p²)}` factor applied to resonant oracle samples.
    pub oracle_damping: f64,
    pub oracle_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            hbar: 1.0,
            omega: 1.0,
            gamma: 1.0,
            seed: 0,
            overrides: BTreeMap::new(),
            oracle: StarConfig::default(),
            oracle_damping: 0.5,
            oracle_samples: 10,
        }
    }
}

/// Default tolerance of each check.
pub fn default_tolerance(id: CheckId) -> f64 {
    match id {
        CheckId::EigenResidual => 1e-10,
        CheckId::StarOrthogonality => 1e-9,
        CheckId::MarginalDelta | CheckId::Normalization => 1e-8,
        CheckId::IdentityResolution => 1e-3,
        CheckId::EvolutionMatch => 1e-10,
        CheckId::ComplexScalingMatch => 1e-10,
        CheckId::KoopmanZeroMode => 1e-12,
        CheckId::ConjugationSymmetry => 1e-12,
        CheckId::PairTransformMatch => 1e-10,
        CheckId::ClassicalLimit => 1e-12,
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("omega", self.omega), ("gamma", self.gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (id, v) in &self.overrides {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance for {id} must be positive, got {v}")));
            }
        }
        self.oracle.validate()
    }

    /// Tolerance for the main entries of `id`.
    pub fn tolerance(&self, id: CheckId) -> f64 {
        self.tolerance_or(id, default_tolerance(id))
    }

    /// Override for `id` if present, else `default` (sub-checks with their own default).
    pub fn tolerance_or(&self, id: CheckId, default: f64) -> f64 {
        self.overrides.get(&id).copied().unwrap_or(default)
    }

    /// Parses `name=value,name=value`.
    pub fn parse_overrides(text: &str) -> Result<BTreeMap<CheckId, f64>> {
        let mut out = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected name=value, got {item:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad tolerance value in {item:?}")))?;
            out.insert(k.parse()?, v);
        }
        Ok(out)
    }
}

/// Runs every check in the registry.
pub fn run_all(cfg: &VerifyConfig) -> VerificationReport {
    run_selected(cfg, &CheckId::ALL)
}

/// Runs the selected checks; entries come back in registry order.
///
/// Checks run on separate threads; each is deterministic for a fixed seed.
pub fn run_selected(cfg: &VerifyConfig, ids: &[CheckId]) -> VerificationReport {
    if let Err(e) = cfg.validate() {
        let entries = ids
            .iter()
            .map(|&id| CheckEntry::failed(id, BTreeMap::new(), cfg.tolerance(id), e.to_string()))
            .collect();
        return VerificationReport::from_entries(entries);
    }
    let mut wanted: Vec<CheckId> = ids.to_vec();
    wanted.sort();
    wanted.dedup();
    let mut jobs: Vec<(CheckId, Job<'_>)> = Vec::new();
    for id in wanted {
        for job in jobs_for(cfg, id) {
            jobs.push((id, job));
        }
    }
    let results: Vec<(CheckId, VerificationReport)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(id, job)| (id, s.spawn(job)))
            .collect();
        handles
            .into_iter()
            .map(|(id, h)| {
                let report = h.join().unwrap_or_else(|_| {
                    VerificationReport::from_entries(vec![CheckEntry::failed(
                        id,
                        BTreeMap::new(),
                        cfg.tolerance(id),
                        "check panicked".into(),
                    )])
                });
                (id, report)
            })
            .collect()
    });
    let mut out = VerificationReport::default();
    for (_, r) in results {
        out.merge(r);
    }
    out
}

type Job<'a> = Box<dyn FnOnce() -> VerificationReport + Send + 'a>;

fn jobs_for(cfg: &VerifyConfig, id: CheckId) -> Vec<Job<'_>> {
    let osc = ModelId::HarmonicOscillator { omega: cfg.omega };
    let toy = ModelId::DampedToy { gamma: cfg.gamma };
    let dho = ModelId::DampedHo {
        omega: cfg.omega,
        gamma: cfg.gamma,
    };
    match id {
        CheckId::EigenResidual => vec![
            Box::new(move || check_eigen(cfg, &osc, Family::W, 8)),
            Box::new(move || check_eigen(cfg, &toy, Family::F, 8)),
            Box::new(move || check_eigen(cfg, &dho, Family::F, 4)),
            Box::new(move || check_eigen(cfg, &dho, Family::G, 4)),
            Box::new(move || check_structure(cfg)),
        ],
        CheckId::StarOrthogonality => vec![
            Box::new(move || check_star_orthogonality(cfg, &osc, Family::W, 6)),
            Box::new(move || check_star_orthogonality(cfg, &toy, Family::F, 6)),
            Box::new(move || check_star_orthogonality(cfg, &dho, Family::F, 2)),
            Box::new(move || check_oracle_samples(cfg, cfg.oracle_samples)),
        ],
        CheckId::MarginalDelta => vec![Box::new(move || {
            let mut r = VerificationReport::default();
            for n in [0, 1, 3] {
                for s in [Sign::Plus, Sign::Minus] {
                    r.merge(check_marginals(cfg, &toy, Quanta::Single { n }, s));
                }
            }
            for (n, m) in [(0, 0), (1, 1), (1, 2)] {
                r.merge(check_marginals(cfg, &dho, Quanta::F { n, m }, Sign::Plus));
            }
            r
        })],
        CheckId::Normalization => vec![Box::new(move || {
            let mut r = check_normalization(cfg, &osc, Family::W, 8);
            r.merge(check_normalization(cfg, &toy, Family::F, 8));
            r.merge(check_normalization(cfg, &dho, Family::F, 2));
            r
        })],
        CheckId::IdentityResolution => vec![Box::new(move || {
            let mut r = VerificationReport::default();
            let sp = match VarSpace::new(1, cfg.hbar) {
                Ok(sp) => sp,
                Err(_) => return r,
            };
            // The W₀-shaped test is orthogonal to every Wₙ with n > 0, so the
            // oscillator family is paired with a wider Gaussian.
            let wide = isotropic_gaussian(sp, 2.0);
            r.merge(check_identity_resolution(cfg, "W", 12, &wide, "exp(-(x^2+p^2)/(2 hbar))"));
            // Resonant sums converge geometrically only for tests whose
            // operator kernel decays faster on the ket side.
            let skew = kernel_gaussian(sp, 0.1, 1.0);
            let label = "symbol of kernel exp(-(x^2/10 + y^2)/hbar)";
            r.merge(check_identity_resolution(cfg, "F+", 12, &skew, label));
            let label = "symbol of kernel exp(-(x^2 + y^2/10)/hbar)";
            r.merge(check_identity_resolution(cfg, "F-", 12, &skew.conjugate(), label));
            // Real tests have Hermitian kernels; the real-part sum then
            // converges only algebraically.
            let shaped = isotropic_gaussian(sp, 1.0);
            r.merge(check_identity_resolution(cfg, "ReF+", 12, &shaped, "exp(-(x^2+p^2)/hbar)"));
            r
        })],
        CheckId::EvolutionMatch => vec![
            Box::new(move || check_evolution(cfg, &osc, 8)),
            Box::new(move || check_evolution(cfg, &toy, 8)),
        ],
        CheckId::ComplexScalingMatch => vec![Box::new(move || check_complex_scaling(cfg, 6, 6))],
        CheckId::KoopmanZeroMode => vec![Box::new(move || check_koopman(cfg))],
        CheckId::ConjugationSymmetry => vec![Box::new(move || check_conjugation(cfg, 12))],
        CheckId::PairTransformMatch => vec![Box::new(move || check_pair_transform(cfg))],
        CheckId::ClassicalLimit => vec![Box::new(move || check_classical_limit(cfg, &[1.0, 0.1, 0.01]))],
    }
}
