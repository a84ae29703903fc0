//! Closed-form coefficient bounds for the ratio class (`alpha` absent) and the
//! alpha-operator class, with the argmin of every `min{...}` recorded.
//!
//! Writing `M = m (1 - beta)` and `D = 2(1+2a) k_3 - (1+3a) k_2^2`:
//!
//! ```text
//! ratio:  |a_2| <= min{ sqrt(M/|k_3|), M/|k_2| }
//!         |a_3| <= M/|k_3|,   |2 a_2^2 - a_3| <= M/|k_3|
//!
//! alpha:  |a_2| <= min{ sqrt(M/|D|), M/(|1+a| |k_2|) }
//!         |a_3| <= min{ M/|D| + M/(2|1+2a||k_3|),
//!                       M/(2|1+2a||k_3|) (1 + M |1+3a| / |1+a|^2),
//!                       M/(2|1+2a||k_3|) (1 + M |4(1+2a) k_3 - (1+3a) k_2^2| / (|k_2|^2 |1+a|^2)) }
//! ```

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::validate_params;
use crate::error::{Error, Result};

/// Which candidate expression realised a minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Square-root bound from the `a_2^2` identity.
    Quadratic,
    /// Bound from `p_1` alone.
    Linear,
    /// The single `|a_3|` bound of the ratio class.
    Direct,
    /// `a_3` written through `p_2 + q_2` and `p_2 - q_2`.
    Combined,
    /// `a_3` written through `p_1`, `p_2`.
    ForwardSide,
    /// `a_3` written through `p_1`, `q_2`.
    InverseSide,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Quadratic => "quadratic",
            Branch::Linear => "linear",
            Branch::Direct => "direct",
            Branch::Combined => "combined",
            Branch::ForwardSide => "forward_side",
            Branch::InverseSide => "inverse_side",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub m: f64,
    pub beta: f64,
    pub alpha: Option<Complex64>,
    pub k2: Complex64,
    pub k3: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub a2_bound: f64,
    /// `None` when the `a_3` hypotheses fail (alpha = -1/2).
    pub a3_bound: Option<f64>,
    /// `|2 a_2^2 - a_3|`, ratio class only.
    pub combo_bound: Option<f64>,
    pub a2_candidates: Vec<(Branch, f64)>,
    pub a3_candidates: Vec<(Branch, f64)>,
    pub active_branch_a2: Branch,
    pub active_branch_a3: Option<Branch>,
    pub inputs: BoundInputs,
}

/// First minimum wins ties.
fn argmin(candidates: &[(Branch, f64)]) -> (Branch, f64) {
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        if c.1 < best.1 {
            best = c;
        }
    }
    best
}

fn check_kernel(k2: Complex64, k3: Complex64) -> Result<()> {
    if !(k2.is_finite() && k3.is_finite()) {
        return Err(Error::ParamOutOfRange("non-finite kernel coefficient".into()));
    }
    if k2 == Complex64::default() {
        return Err(Error::KernelCoefficientZero { index: 2 });
    }
    if k3 == Complex64::default() {
        return Err(Error::KernelCoefficientZero { index: 3 });
    }
    Ok(())
}

/// Bounds for the ratio class.
pub fn bound_br(m: f64, beta: f64, k2: Complex64, k3: Complex64) -> Result<BoundReport> {
    validate_params(m, beta)?;
    check_kernel(k2, k3)?;
    let big_m = m * (1.0 - beta);
    let a2_candidates = vec![
        (Branch::Quadratic, (big_m / k3.norm()).sqrt()),
        (Branch::Linear, big_m / k2.norm()),
    ];
    let a3 = big_m / k3.norm();
    let a3_candidates = vec![(Branch::Direct, a3)];
    let (active_a2, a2_bound) = argmin(&a2_candidates);
    Ok(BoundReport {
        a2_bound,
        a3_bound: Some(a3),
        combo_bound: Some(a3),
        a2_candidates,
        a3_candidates,
        active_branch_a2: active_a2,
        active_branch_a3: Some(Branch::Direct),
        inputs: BoundInputs {
            m,
            beta,
            alpha: None,
            k2,
            k3,
        },
    })
}

/// Piecewise form for `m = 2` with the Koebe kernel (`k_2 = 2`, `k_3 = 3`):
/// `|a_2| <= sqrt(2(1-beta)/3)` up to `beta = 1/3`, `1 - beta` beyond.
pub fn bound_br_koebe_piecewise(m: f64, beta: f64) -> Result<BoundReport> {
    if m != 2.0 {
        return Err(Error::ParamOutOfRange(format!(
            "the piecewise Koebe form is stated for m = 2, got {m}"
        )));
    }
    validate_params(m, beta)?;
    let quadratic = (2.0 * (1.0 - beta) / 3.0).sqrt();
    let linear = 1.0 - beta;
    let (active, a2_bound) = if beta <= 1.0 / 3.0 {
        (Branch::Quadratic, quadratic)
    } else {
        (Branch::Linear, linear)
    };
    let a3 = 2.0 * (1.0 - beta) / 3.0;
    Ok(BoundReport {
        a2_bound,
        a3_bound: Some(a3),
        combo_bound: Some(a3),
        a2_candidates: vec![(Branch::Quadratic, quadratic), (Branch::Linear, linear)],
        a3_candidates: vec![(Branch::Direct, a3)],
        active_branch_a2: active,
        active_branch_a3: Some(Branch::Direct),
        inputs: BoundInputs {
            m,
            beta,
            alpha: None,
            k2: Complex64::new(2.0, 0.0),
            k3: Complex64::new(3.0, 0.0),
        },
    })
}

/// Bounds for the alpha-operator class.
pub fn bound_bv(
    m: f64,
    beta: f64,
    alpha: Complex64,
    k2: Complex64,
    k3: Complex64,
) -> Result<BoundReport> {
    validate_params(m, beta)?;
    if !alpha.is_finite() {
        return Err(Error::ParamOutOfRange(format!("alpha = {alpha}")));
    }
    check_kernel(k2, k3)?;
    let s1 = 1.0 + alpha;
    let s2 = 1.0 + 2.0 * alpha;
    let s3 = 1.0 + 3.0 * alpha;
    if s1 == Complex64::default() {
        return Err(Error::ExcludedAlpha {
            alpha,
            reason: "alpha = -1 is excluded",
        });
    }
    let denom = (2.0 * s2 * k3 - s3 * k2 * k2).norm();
    if denom == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let big_m = m * (1.0 - beta);
    let a2_candidates = vec![
        (Branch::Quadratic, (big_m / denom).sqrt()),
        (Branch::Linear, big_m / (s1.norm() * k2.norm())),
    ];
    let (active_a2, a2_bound) = argmin(&a2_candidates);

    let a3_candidates = if s2 == Complex64::default() {
        Vec::new()
    } else {
        let base = big_m / (2.0 * s2.norm() * k3.norm());
        let s1_sq = s1.norm_sqr();
        vec![
            (Branch::Combined, big_m / denom + base),
            (Branch::ForwardSide, base * (1.0 + big_m * s3.norm() / s1_sq)),
            (
                Branch::InverseSide,
                base * (1.0
                    + big_m * (4.0 * s2 * k3 - s3 * k2 * k2).norm() / (k2.norm_sqr() * s1_sq)),
            ),
        ]
    };
    let (active_a3, a3_bound) = if a3_candidates.is_empty() {
        (None, None)
    } else {
        let (b, v) = argmin(&a3_candidates);
        (Some(b), Some(v))
    };
    Ok(BoundReport {
        a2_bound,
        a3_bound,
        combo_bound: None,
        a2_candidates,
        a3_candidates,
        active_branch_a2: active_a2,
        active_branch_a3: active_a3,
        inputs: BoundInputs {
            m,
            beta,
            alpha: Some(alpha),
            k2,
            k3,
        },
    })
}

/// Bounds for a class given `alpha` or not.
pub fn bound_for(m: f64, beta: f64, alpha: Option<Complex64>, k2: Complex64, k3: Complex64) -> Result<BoundReport> {
    match alpha {
        None => bound_br(m, beta, k2, k3),
        Some(alpha) => bound_bv(m, beta, alpha, k2, k3),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub kernel: String,
    pub a2: f64,
    pub a3: f64,
    pub combo: f64,
}

/// Fixed bounds at `beta = 0` for the Koebe kernel `(sqrt(m/3), m/3, m/3)` and
/// the half-plane kernel `(sqrt(m), m, m)`.
pub fn bound_examples_fixture(m: f64) -> Vec<ExampleRow> {
    vec![
        ExampleRow {
            kernel: "koebe".into(),
            a2: (m / 3.0).sqrt(),
            a3: m / 3.0,
            combo: m / 3.0,
        },
        ExampleRow {
            kernel: "halfplane".into(),
            a2: m.sqrt(),
            a3: m,
            combo: m,
        },
    ]
}

/// `re+imi` with full precision.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[derive(Debug, Serialize)]
struct CsvRow {
    m: f64,
    beta: f64,
    alpha_re: Option<f64>,
    alpha_im: Option<f64>,
    k2: String,
    k3: String,
    a2_bound: f64,
    a3_bound: Option<f64>,
    combo_bound: Option<f64>,
    branches: String,
}

impl BoundReport {
    fn csv_row(&self) -> CsvRow {
        let a3 = self.active_branch_a3.map_or("none", Branch::label);
        CsvRow {
            m: self.inputs.m,
            beta: self.inputs.beta,
            alpha_re: self.inputs.alpha.map(|a| a.re),
            alpha_im: self.inputs.alpha.map(|a| a.im),
            k2: format_complex(self.inputs.k2),
            k3: format_complex(self.inputs.k3),
            a2_bound: self.a2_bound,
            a3_bound: self.a3_bound,
            combo_bound: self.combo_bound,
            branches: format!("{}/{}", self.active_branch_a2.label(), a3),
        }
    }
}

/// Writes reports as CSV with columns
/// `m,beta,alpha_re,alpha_im,k2,k3,a2_bound,a3_bound,combo_bound,branches`.
pub fn write_csv<W: Write>(reports: &[BoundReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if reports.is_empty() {
        w.write_record([
            "m", "beta", "alpha_re", "alpha_im", "k2", "k3", "a2_bound", "a3_bound", "combo_bound",
            "branches",
        ])?;
    }
    for r in reports {
        w.serialize(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
