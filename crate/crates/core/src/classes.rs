//! Generators and membership checks for the Carathéodory class P, the
//! bounded-boundary-rotation classes P_m and their shifts P_m(beta).
//!
//! A member of P_m is represented by a finite signed measure
//! `mu = sum_j w_j delta(t_j)` with `sum w_j = 1` and `sum |w_j| <= m/2`:
//!
//! ```text
//! p(z) = sum_j w_j (1 - z e^{i t_j}) / (1 + z e^{i t_j})
//! ```
//!
//! Every such `p` has `p(0) = 1` and `|p_n| <= 2 sum |w_j| <= m`. For `m = 2`
//! the weights are nonnegative and `p` lies in P.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{NormalizedFunction, TruncatedSeries};

/// Slack allowed on `sum w_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Slack on Lemma-type coefficient checks `|h_n| <= m(1-beta)`.
pub const COEFF_TOL: f64 = 1e-9;
pub const DEFAULT_RADII: [f64; 3] = [0.5, 0.8, 0.95];
pub const DEFAULT_N_THETA: usize = 4096;
pub const MIN_N_THETA: usize = 256;
/// Quadrature tolerance as a fraction of `m pi`.
pub const QUADRATURE_REL_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Checks the normalization `sum w = 1`; angles are reduced mod 2 pi.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let measure = Self {
            atoms: atoms
                .into_iter()
                .map(|a| Atom {
                    t: a.t.rem_euclid(TAU),
                    w: a.w,
                })
                .collect(),
        };
        measure.validate()?;
        Ok(measure)
    }

    pub fn single(t: f64) -> Self {
        Self {
            atoms: vec![Atom {
                t: t.rem_euclid(TAU),
                w: 1.0,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if self.atoms.iter().any(|a| !a.t.is_finite() || !a.w.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite atom".into()));
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    /// Additionally checks `sum |w| <= m/2`.
    pub fn validate_for(&self, m: f64) -> Result<()> {
        self.validate()?;
        let tv = self.total_variation();
        if tv > m / 2.0 + WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total variation {tv} exceeds m/2 = {}",
                m / 2.0
            )));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.abs()).sum()
    }
}

/// Class parameters: `m`, `beta`, optional `alpha` (present for the
/// alpha-operator classes), and the convolution kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub m: f64,
    pub beta: f64,
    pub alpha: Option<Complex64>,
    pub kernel: NormalizedFunction,
}

impl ClassSpec {
    pub fn new(
        m: f64,
        beta: f64,
        alpha: Option<Complex64>,
        kernel: NormalizedFunction,
    ) -> Result<Self> {
        let spec = Self {
            m,
            beta,
            alpha,
            kernel,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ratio(m: f64, beta: f64, kernel: NormalizedFunction) -> Result<Self> {
        Self::new(m, beta, None, kernel)
    }

    pub fn operator(m: f64, beta: f64, alpha: Complex64, kernel: NormalizedFunction) -> Result<Self> {
        Self::new(m, beta, Some(alpha), kernel)
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(self.m, self.beta)?;
        if let Some(alpha) = self.alpha {
            if !alpha.is_finite() {
                return Err(Error::ParamOutOfRange(format!("alpha = {alpha}")));
            }
            if alpha == Complex64::new(-1.0, 0.0) {
                return Err(Error::ExcludedAlpha {
                    alpha,
                    reason: "alpha = -1 is excluded",
                });
            }
        }
        Ok(())
    }

    /// `m (1 - beta)`, the common coefficient bound.
    pub fn coefficient_limit(&self) -> f64 {
        self.m * (1.0 - self.beta)
    }

    pub fn k2(&self) -> Complex64 {
        self.kernel.coeff(2).unwrap_or_default()
    }

    pub fn k3(&self) -> Complex64 {
        self.kernel.coeff(3).unwrap_or_default()
    }
}

pub(crate) fn validate_params(m: f64, beta: f64) -> Result<()> {
    if !(m.is_finite() && m >= 2.0) {
        return Err(Error::ParamOutOfRange(format!("m = {m}, need m >= 2")));
    }
    if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
        return Err(Error::ParamOutOfRange(format!(
            "beta = {beta}, need 0 <= beta < 1"
        )));
    }
    Ok(())
}

/// Series of `(1 - z e^{it}) / (1 + z e^{it}) = 1 + sum 2 (-1)^n e^{int} z^n`.
pub fn kernel_series(t: f64, order: usize) -> TruncatedSeries {
    let coeffs = (0..=order)
        .map(|n| {
            if n == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
                Complex64::from_polar(sign, n as f64 * t)
            }
        })
        .collect();
    TruncatedSeries::new(coeffs).expect("finite kernel")
}

/// `p(z) = sum_j w_j kernel_series(t_j)`.
pub fn pm_from_measure(mu: &AtomicMeasure, order: usize) -> Result<TruncatedSeries> {
    mu.validate()?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
    coeffs[0] = Complex64::new(mu.total_mass(), 0.0);
    for atom in &mu.atoms {
        for (n, c) in coeffs.iter_mut().enumerate().skip(1) {
            let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
            *c += Complex64::from_polar(sign * atom.w, n as f64 * atom.t);
        }
    }
    TruncatedSeries::new(coeffs)
}

/// `(m/4 + 1/2) p1 - (m/4 - 1/2) p2` for Carathéodory `p1`, `p2`.
pub fn pm_from_pair(p1: &TruncatedSeries, p2: &TruncatedSeries, m: f64) -> Result<TruncatedSeries> {
    if !(m.is_finite() && m >= 2.0) {
        return Err(Error::ParamOutOfRange(format!("m = {m}, need m >= 2")));
    }
    for p in [p1, p2] {
        let c0 = p.coeffs()[0];
        if (c0 - 1.0).norm() > WEIGHT_SUM_TOL {
            return Err(Error::BadConstantTerm(c0));
        }
    }
    let order = p1.order().min(p2.order());
    let plus = Complex64::new(m / 4.0 + 0.5, 0.0);
    let minus = Complex64::new(m / 4.0 - 0.5, 0.0);
    let a = p1.truncate(order).scale(plus);
    let b = p2.truncate(order).scale(minus);
    Ok(&a - &b)
}

/// `Phi = (1 - beta) p + beta`, so `h_n = (1 - beta) p_n` for `n >= 1`.
pub fn shift_beta(p: &TruncatedSeries, beta: f64) -> TruncatedSeries {
    let coeffs = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            if n == 0 {
                c * (1.0 - beta) + beta
            } else {
                c * (1.0 - beta)
            }
        })
        .collect();
    TruncatedSeries::new(coeffs).expect("finite shift")
}

/// Draws a measure with `n_atoms` atoms admissible for `m`.
///
/// Angles are uniform on `[0, 2 pi)` and raw weights uniform on `[-1, 1]`.
/// The raw weights are shifted to sum to one, then contracted toward the
/// uniform positive measure on the same atoms until `sum |w| <= m/2`.
pub fn sample_measure<R: Rng + ?Sized>(rng: &mut R, m: f64, n_atoms: usize) -> AtomicMeasure {
    let n_atoms = n_atoms.max(1);
    let angles: Vec<f64> = (0..n_atoms).map(|_| rng.random_range(0.0..TAU)).collect();
    let raw: Vec<f64> = (0..n_atoms).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mean = raw.iter().sum::<f64>() / n_atoms as f64;
    let spread: Vec<f64> = raw.iter().map(|u| u - mean).collect();
    let weights = contract_weights(&spread, m);
    AtomicMeasure {
        atoms: angles
            .into_iter()
            .zip(weights)
            .map(|(t, w)| Atom { t, w })
            .collect(),
    }
}

/// Returns `1/n + lambda * spread` for the largest `lambda` in `[0, 1]` whose
/// total variation stays within `m/2`. `spread` must sum to zero.
pub(crate) fn contract_weights(spread: &[f64], m: f64) -> Vec<f64> {
    let base = 1.0 / spread.len() as f64;
    let weights = |lambda: f64| -> Vec<f64> { spread.iter().map(|d| base + lambda * d).collect() };
    // sum |w| = 1 + 2 * (negative mass) when sum w = 1.
    let budget = (m / 2.0 - 1.0) / 2.0;
    let negative_mass = |w: &[f64]| -> f64 { w.iter().filter(|&&x| x < 0.0).map(|x| -x).sum() };
    let full = weights(1.0);
    if negative_mass(&full) <= budget {
        return full;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if negative_mass(&weights(mid)) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    weights(lo)
}

/// Deterministic sample of `Phi in P_m(beta)` from an `n_atoms` measure.
pub fn random_pm_beta(
    spec: &ClassSpec,
    seed: u64,
    n_atoms: usize,
    order: usize,
) -> (AtomicMeasure, TruncatedSeries) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = sample_measure(&mut rng, spec.m, n_atoms);
    let phi = phi_from_measure(&mu, spec.beta, order);
    (mu, phi)
}

pub(crate) fn phi_from_measure(mu: &AtomicMeasure, beta: f64, order: usize) -> TruncatedSeries {
    let p = pm_from_measure(mu, order).expect("sampled measure is normalized");
    shift_beta(&p, beta)
}

/// Outcome of the coefficient test `|h_n| <= m (1 - beta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    pub first_violation: Option<usize>,
    pub max_modulus: f64,
    pub limit: f64,
}

pub fn coefficient_bound_check(phi: &TruncatedSeries, spec: &ClassSpec) -> CheckResult {
    coefficient_bound_check_with(phi, spec.coefficient_limit())
}

pub(crate) fn coefficient_bound_check_with(phi: &TruncatedSeries, limit: f64) -> CheckResult {
    let moduli = phi.coeffs().iter().skip(1).map(|c| c.norm());
    let first_violation = moduli
        .clone()
        .position(|x| !(x <= limit + COEFF_TOL))
        .map(|i| i + 1);
    CheckResult {
        pass: first_violation.is_none(),
        first_violation,
        max_modulus: moduli.fold(0.0, f64::max),
        limit,
    }
}

/// One radius of the membership quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusCheck {
    pub radius: f64,
    /// Trapezoid value of `int_0^{2 pi} |(Re P - beta)/(1 - beta)| d theta`.
    pub integral: f64,
    /// `m pi`.
    pub limit: f64,
    pub quadrature_tol: f64,
    /// Bound on the contribution of the discarded tail, estimated from the
    /// largest retained coefficient in the upper half of the series.
    pub tail_allowance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipDiagnostics {
    pub n_theta: usize,
    pub checks: Vec<RadiusCheck>,
    pub pass: bool,
    pub max_integral: f64,
    pub max_radius: f64,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Values of `p` at `r e^{2 pi i j / n}` for `j = 0..n`, via an inverse DFT of
/// the scaled coefficients (folded mod `n`, which is exact at these nodes).
pub fn values_on_circle(p: &TruncatedSeries, r: f64, n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut rn = 1.0;
    for (k, c) in p.coeffs().iter().enumerate() {
        buf[k % n] += c * rn;
        rn *= r;
    }
    let fft = PLANNER.with(|pl| pl.borrow_mut().plan_fft(n, FftDirection::Inverse));
    fft.process(&mut buf);
    buf
}

/// Necessary-condition check of P_m(beta) membership at finitely many radii.
///
/// A pass means "not refuted at the tested radii".
pub fn membership_quadrature(
    p: &TruncatedSeries,
    spec: &ClassSpec,
    radii: &[f64],
    n_theta: usize,
) -> Result<MembershipDiagnostics> {
    membership_with(p, spec.m, spec.beta, radii, n_theta)
}

pub fn membership_default(p: &TruncatedSeries, spec: &ClassSpec) -> MembershipDiagnostics {
    membership_with(p, spec.m, spec.beta, &DEFAULT_RADII, DEFAULT_N_THETA)
        .expect("default quadrature parameters are valid")
}

pub(crate) fn membership_with(
    p: &TruncatedSeries,
    m: f64,
    beta: f64,
    radii: &[f64],
    n_theta: usize,
) -> Result<MembershipDiagnostics> {
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::RadiusOutOfRange(r));
    }
    if n_theta < MIN_N_THETA {
        return Err(Error::TooFewNodes(n_theta));
    }
    let order = p.order();
    let growth = if order == 0 {
        0.0
    } else {
        p.max_modulus_from(order / 2 + 1)
    };
    let limit = m * PI;
    let quadrature_tol = QUADRATURE_REL_TOL * limit;
    let scale = 1.0 / (1.0 - beta);
    let h = TAU / n_theta as f64;

    let checks: Vec<RadiusCheck> = radii
        .iter()
        .map(|&r| {
            let integral = values_on_circle(p, r, n_theta)
                .iter()
                .map(|v| (v.re - beta).abs())
                .sum::<f64>()
                * h
                * scale;
            let tail_allowance = TAU * growth * r.powi(order as i32 + 1) / (1.0 - r) * scale;
            RadiusCheck {
                radius: r,
                integral,
                limit,
                quadrature_tol,
                tail_allowance,
                pass: integral <= limit + quadrature_tol + tail_allowance,
            }
        })
        .collect();
    let (max_integral, max_radius) = checks
        .iter()
        .map(|c| (c.integral, c.radius))
        .fold((f64::NEG_INFINITY, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(MembershipDiagnostics {
        n_theta,
        pass: checks.iter().all(|c| c.pass),
        checks,
        max_integral,
        max_radius,
    })
}
