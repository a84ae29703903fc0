//! End-to-end verification: sample `Phi in P_m(beta)`, build `f` from it,
//! evaluate the class operator on `g = f^{-1}`, accept the sample when that
//! inverse-side series passes the P_m(beta) tests, and grade the accepted
//! samples against the closed-form bounds.
//!
//! Bi-univalence of the constructed `f` is not certified. The bounds are
//! consequences of the two P_m(beta) conditions alone, which is exactly
//! what acceptance checks; membership at finitely many radii can only
//! refute, so acceptance is a heuristic and all diagnostics are kept on the
//! record for re-grading.
//!
//! Each trial draws an atomic measure `mu` and a dilation radius `rho` in
//! `[0, 1)` and uses `Phi(z) = (1 - beta) p_mu(rho z) + beta`. Dilation keeps
//! `Phi` in P_m(beta). Without it `p_mu` has poles on the unit circle and
//! negative real part just outside it, and since `f^{-1}` never maps the
//! disk into itself (Schwarz's lemma) the inverse side would fail for every
//! nontrivial sample.
//!
//! Every trial is seeded by `(seed, trial index)` through a dedicated
//! ChaCha stream, so batches are reproducible under any scheduling.

mod exec;
pub mod io;
mod regression;
mod search;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_for, BoundReport};
use crate::classes::{
    coefficient_bound_check, membership_default, phi_from_measure, sample_measure, AtomicMeasure,
    CheckResult, ClassSpec, MembershipDiagnostics,
};
use crate::error::{Error, Result};
use crate::operators::{
    check_construction_alpha, construct_f_from_p_br, construct_f_from_p_bv, inverse_side_series,
    kernel_pair, ExtractedCoefficients,
};
use crate::series::{TruncatedSeries, DEFAULT_ORDER};

pub use exec::{map_indexed, Exec};
pub use regression::{
    round_trip_deviation, run_identity_regression, verify_inverse, InverseReport, RegressionReport,
    INVERSE_CLOSED_FORM_TOL, INVERSE_ROUND_TRIP_TOL, REGRESSION_TOL,
};
pub use search::{tightness_search, tightness_search_with, SearchResult, Target, RATIO_TOL};

/// Atoms per sampled measure are drawn uniformly from `1..=MAX_ATOMS`.
pub const MAX_ATOMS: usize = 6;
/// Accepted samples must satisfy every bound with at least this margin.
pub const MARGIN_TOL: f64 = 1e-9;

/// RNG for trial `trial` of a batch seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// The measure and dilation radius used by trial `trial` of a batch seeded
/// with `seed`.
pub fn draw_sample(m: f64, seed: u64, trial: u64) -> (AtomicMeasure, f64) {
    let mut rng = trial_rng(seed, trial);
    let n_atoms = rng.random_range(1..=MAX_ATOMS);
    let mu = sample_measure(&mut rng, m, n_atoms);
    let dilation = rng.random::<f64>();
    (mu, dilation)
}

/// `bound - |value|` for each bounded quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub a2: f64,
    pub a3: Option<f64>,
    pub combo: Option<f64>,
}

impl Margins {
    pub fn grade(x: &ExtractedCoefficients, bounds: &BoundReport) -> Self {
        Self {
            a2: bounds.a2_bound - x.a2.norm(),
            a3: bounds.a3_bound.map(|b| b - x.a3.norm()),
            combo: bounds.combo_bound.map(|b| b - x.combo.norm()),
        }
    }

    pub fn min(&self) -> f64 {
        [Some(self.a2), self.a3, self.combo]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn violated(&self) -> bool {
        !(self.min() >= -MARGIN_TOL)
    }
}

/// Coefficient and quadrature diagnostics for one side of a class condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideDiagnostics {
    pub coefficients: CheckResult,
    pub membership: MembershipDiagnostics,
}

impl SideDiagnostics {
    fn of(series: &TruncatedSeries, spec: &ClassSpec) -> Self {
        Self {
            coefficients: coefficient_bound_check(series, spec),
            membership: membership_default(series, spec),
        }
    }

    pub fn pass(&self) -> bool {
        self.coefficients.pass && self.membership.pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub trial: u64,
    pub measure: Option<AtomicMeasure>,
    /// `Phi(z) = p_mu(dilation * z)` shifted by beta.
    pub dilation: f64,
    pub spec: ClassSpec,
    pub extracted: Option<ExtractedCoefficients>,
    pub accepted: bool,
    /// The sampled `Phi` (`p` in the forward condition).
    pub p_side: SideDiagnostics,
    /// The operator on `g = f^{-1}` (`q` in the inverse condition).
    pub q_side: Option<SideDiagnostics>,
    pub margins: Option<Margins>,
    pub violation: bool,
    pub truncated_at: Option<usize>,
    pub error: Option<String>,
}

impl SampleRecord {
    /// Replaces `a_3` and regrades; used to exercise violation detection.
    pub fn corrupt_a3(&mut self, delta: Complex64, bounds: &BoundReport) {
        if let Some(x) = self.extracted {
            let x = ExtractedCoefficients::new(x.a2, x.a3 + delta, x.p1, x.p2, x.q2);
            let margins = Margins::grade(&x, bounds);
            self.extracted = Some(x);
            self.violation = self.accepted && margins.violated();
            self.margins = Some(margins);
        }
    }
}

/// A class together with its bounds, ready to grade samples.
#[derive(Clone, Debug)]
pub struct Verifier {
    spec: ClassSpec,
    bounds: BoundReport,
    order: usize,
}

impl Verifier {
    pub fn new(spec: ClassSpec) -> Result<Self> {
        spec.validate()?;
        let (k2, k3) = kernel_pair(&spec.kernel)?;
        if let Some(alpha) = spec.alpha {
            check_construction_alpha(alpha)?;
        }
        let bounds = bound_for(spec.m, spec.beta, spec.alpha, k2, k3)?;
        Ok(Self {
            spec,
            bounds,
            order: DEFAULT_ORDER,
        })
    }

    /// Truncation order of the sampled `Phi`.
    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order.max(2);
        self
    }

    pub fn spec(&self) -> &ClassSpec {
        &self.spec
    }

    pub fn bounds(&self) -> &BoundReport {
        &self.bounds
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Runs trial `trial` of the batch seeded with `seed`.
    pub fn trial(&self, seed: u64, trial: u64) -> SampleRecord {
        let (mu, dilation) = draw_sample(self.spec.m, seed, trial);
        self.evaluate_measure(mu, dilation, seed, trial)
    }

    /// Grades `Phi(z) = (1 - beta) p_mu(dilation * z) + beta`.
    pub fn evaluate_measure(
        &self,
        mu: AtomicMeasure,
        dilation: f64,
        seed: u64,
        trial: u64,
    ) -> SampleRecord {
        let phi = phi_from_measure(&mu, self.spec.beta, self.order).dilate(dilation);
        let mut record = self.evaluate(&phi, Some(mu), seed, trial);
        record.dilation = dilation;
        record
    }

    /// Builds `f` from `phi`, evaluates the inverse side and grades it.
    pub fn evaluate(
        &self,
        phi: &TruncatedSeries,
        measure: Option<AtomicMeasure>,
        seed: u64,
        trial: u64,
    ) -> SampleRecord {
        let mut record = SampleRecord {
            seed,
            trial,
            measure,
            dilation: 1.0,
            spec: self.spec.clone(),
            extracted: None,
            accepted: false,
            p_side: SideDiagnostics::of(phi, &self.spec),
            q_side: None,
            margins: None,
            violation: false,
            truncated_at: None,
            error: None,
        };
        match self.inverse_side(phi) {
            Ok((f_coeffs, q, truncated_at)) => {
                let (a2, a3) = f_coeffs;
                let x = ExtractedCoefficients::new(
                    a2,
                    a3,
                    phi.coeffs()[1],
                    phi.coeffs()[2],
                    q.get(2).unwrap_or_default(),
                );
                let q_side = SideDiagnostics::of(&q, &self.spec);
                let margins = Margins::grade(&x, &self.bounds);
                record.accepted = q_side.pass();
                record.violation = record.accepted && margins.violated();
                record.extracted = Some(x);
                record.q_side = Some(q_side);
                record.margins = Some(margins);
                record.truncated_at = truncated_at;
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        record
    }

    #[allow(clippy::type_complexity)]
    fn inverse_side(
        &self,
        phi: &TruncatedSeries,
    ) -> Result<((Complex64, Complex64), TruncatedSeries, Option<usize>)> {
        let k = &self.spec.kernel;
        match self.spec.alpha {
            None => {
                let built = construct_f_from_p_br(phi, k)?;
                let q = inverse_side_series(&built.f, k, None)?;
                let a = (coeff(&built.f, 2), coeff(&built.f, 3));
                Ok((a, q, built.truncated_at))
            }
            Some(alpha) => {
                // The cubic z + a2 z^2 + a3 z^3 taken as an exact polynomial.
                let cubic = construct_f_from_p_bv(phi, k, alpha)?;
                let f = cubic.zero_pad(self.order.max(3));
                let q = inverse_side_series(&f, k, Some(alpha))?;
                Ok(((coeff(&cubic, 2), coeff(&cubic, 3)), q, None))
            }
        }
    }

    /// Trials `0..n` in index order.
    pub fn run(&self, n: u64, seed: u64, exec: Exec) -> Vec<SampleRecord> {
        map_indexed(n, exec, |i| self.trial(seed, i))
    }
}

fn coeff(f: &crate::series::NormalizedFunction, n: usize) -> Complex64 {
    f.coeff(n).unwrap_or_default()
}

/// Batch for the ratio class (`spec.alpha` must be `None`).
pub fn sample_br(spec: &ClassSpec, n: u64, seed: u64) -> Result<Vec<SampleRecord>> {
    sample_br_with(spec, n, seed, Exec::default())
}

pub fn sample_br_with(spec: &ClassSpec, n: u64, seed: u64, exec: Exec) -> Result<Vec<SampleRecord>> {
    if spec.alpha.is_some() {
        return Err(Error::ParamOutOfRange(
            "ratio-class sampling takes no alpha".into(),
        ));
    }
    Ok(Verifier::new(spec.clone())?.run(n, seed, exec))
}

/// Batch for the alpha-operator class (`spec.alpha` must be set).
pub fn sample_bv(spec: &ClassSpec, n: u64, seed: u64) -> Result<Vec<SampleRecord>> {
    sample_bv_with(spec, n, seed, Exec::default())
}

pub fn sample_bv_with(spec: &ClassSpec, n: u64, seed: u64, exec: Exec) -> Result<Vec<SampleRecord>> {
    if spec.alpha.is_none() {
        return Err(Error::ParamOutOfRange(
            "alpha-class sampling needs alpha".into(),
        ));
    }
    Ok(Verifier::new(spec.clone())?.run(n, seed, exec))
}

/// Order-insensitive aggregate of a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub trials: u64,
    pub accepted: u64,
    pub violations: u64,
    pub errors: u64,
    pub truncated: u64,
    pub min_margin_a2: Option<f64>,
    pub min_margin_a3: Option<f64>,
    pub min_margin_combo: Option<f64>,
    pub max_abs_a2: Option<f64>,
    pub max_abs_a3: Option<f64>,
    pub max_abs_combo: Option<f64>,
}

fn fold_opt(acc: Option<f64>, x: Option<f64>, pick: fn(f64, f64) -> f64) -> Option<f64> {
    match (acc, x) {
        (Some(a), Some(b)) => Some(pick(a, b)),
        (a, b) => a.or(b),
    }
}

impl BatchSummary {
    pub fn empty() -> Self {
        Self {
            trials: 0,
            accepted: 0,
            violations: 0,
            errors: 0,
            truncated: 0,
            min_margin_a2: None,
            min_margin_a3: None,
            min_margin_combo: None,
            max_abs_a2: None,
            max_abs_a3: None,
            max_abs_combo: None,
        }
    }

    pub fn of(records: &[SampleRecord]) -> Self {
        records.iter().fold(Self::empty(), Self::push)
    }

    pub fn push(mut self, r: &SampleRecord) -> Self {
        self.trials += 1;
        self.errors += u64::from(r.error.is_some());
        self.truncated += u64::from(r.truncated_at.is_some());
        self.violations += u64::from(r.violation);
        if !r.accepted {
            return self;
        }
        self.accepted += 1;
        if let (Some(m), Some(x)) = (r.margins, r.extracted) {
            self.min_margin_a2 = fold_opt(self.min_margin_a2, Some(m.a2), f64::min);
            self.min_margin_a3 = fold_opt(self.min_margin_a3, m.a3, f64::min);
            self.min_margin_combo = fold_opt(self.min_margin_combo, m.combo, f64::min);
            self.max_abs_a2 = fold_opt(self.max_abs_a2, Some(x.a2.norm()), f64::max);
            self.max_abs_a3 = fold_opt(self.max_abs_a3, Some(x.a3.norm()), f64::max);
            if m.combo.is_some() {
                self.max_abs_combo = fold_opt(self.max_abs_combo, Some(x.combo.norm()), f64::max);
            }
        }
        self
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            accepted: self.accepted + other.accepted,
            violations: self.violations + other.violations,
            errors: self.errors + other.errors,
            truncated: self.truncated + other.truncated,
            min_margin_a2: fold_opt(self.min_margin_a2, other.min_margin_a2, f64::min),
            min_margin_a3: fold_opt(self.min_margin_a3, other.min_margin_a3, f64::min),
            min_margin_combo: fold_opt(self.min_margin_combo, other.min_margin_combo, f64::min),
            max_abs_a2: fold_opt(self.max_abs_a2, other.max_abs_a2, f64::max),
            max_abs_a3: fold_opt(self.max_abs_a3, other.max_abs_a3, f64::max),
            max_abs_combo: fold_opt(self.max_abs_combo, other.max_abs_combo, f64::max),
        }
    }
}
