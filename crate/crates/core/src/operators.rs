//! Class-defining functionals and the coefficient equations they induce.
//!
//! For `f` and a kernel `k` in A, with `F = f * k`:
//!
//! ```text
//! ratio operator:  F(z) / z
//! alpha operator:  (1 - alpha) z F'(z) / F(z) + alpha (1 + z F''(z) / F'(z))
//! ```
//!
//! Both sides of a class condition are evaluated, `f` and its inverse
//! `g = f^{-1}`. The constructions below invert these maps at low order,
//! producing `f` from a prescribed P_m(beta) function `p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{NormalizedFunction, TruncatedSeries};

/// Constructions refuse alpha this close to -1 or -1/2.
pub const EXCLUDED_ALPHA_RADIUS: f64 = 1e-6;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `a_2`, `a_3` of `f` and the `p_1`, `p_2`, `q_2` they are tied to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractedCoefficients {
    pub a2: Complex64,
    pub a3: Complex64,
    /// Always `2 a2^2 - a3`.
    pub combo: Complex64,
    pub p1: Complex64,
    pub p2: Complex64,
    pub q2: Complex64,
}

impl ExtractedCoefficients {
    pub fn new(a2: Complex64, a3: Complex64, p1: Complex64, p2: Complex64, q2: Complex64) -> Self {
        Self {
            a2,
            a3,
            combo: 2.0 * a2 * a2 - a3,
            p1,
            p2,
            q2,
        }
    }
}

/// `(f * k)(z) / z`; coefficient `n` is `a_{n+1} k_{n+1}`.
pub fn r_operator(f: &NormalizedFunction, k: &NormalizedFunction) -> TruncatedSeries {
    f.series().hadamard(k.series()).shift_down()
}

/// The alpha-combination of the two logarithmic derivatives of `f * k`.
pub fn v_operator(
    f: &NormalizedFunction,
    k: &NormalizedFunction,
    alpha: Complex64,
) -> Result<TruncatedSeries> {
    let conv = f.series().hadamard(k.series());
    if conv.get(1).unwrap_or_default() == Complex64::default() {
        return Err(Error::DegenerateConvolution);
    }
    let d1 = conv.derivative();
    let d2 = d1.derivative();
    let starlike = d1.shift_up().checked_div(&conv)?;
    let convex = &TruncatedSeries::one(0) + &d2.shift_up().checked_div(&d1)?;
    Ok(&starlike.scale(ONE - alpha) + &convex.scale(alpha))
}

/// Closed-form `z` and `z^2` coefficients of [`v_operator`].
pub fn v_expansion_closed_form(
    a2: Complex64,
    a3: Complex64,
    k2: Complex64,
    k3: Complex64,
    alpha: Complex64,
) -> (Complex64, Complex64) {
    let c1 = (1.0 + alpha) * a2 * k2;
    let c2 = 2.0 * (1.0 + 2.0 * alpha) * a3 * k3 - (1.0 + 3.0 * alpha) * a2 * a2 * k2 * k2;
    (c1, c2)
}

/// The operator applied to `g = f^{-1}`: ratio operator when `alpha` is
/// `None`, alpha operator otherwise.
pub fn inverse_side_series(
    f: &NormalizedFunction,
    k: &NormalizedFunction,
    alpha: Option<Complex64>,
) -> Result<TruncatedSeries> {
    let g = NormalizedFunction::new(f.revert())?;
    match alpha {
        None => Ok(r_operator(&g, k)),
        Some(alpha) => v_operator(&g, k, alpha),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioConstruction {
    pub f: NormalizedFunction,
    /// Index of the first vanishing kernel coefficient that cut `f` short.
    pub truncated_at: Option<usize>,
}

/// Solves `r_operator(f, k) = p` for `f`: `a_n = p_{n-1} / k_n`.
///
/// A vanishing `k_n` with `n >= 4` stops the construction at order `n - 1`
/// and is reported in `truncated_at`; `k_2 = 0` or `k_3 = 0` is an error.
pub fn construct_f_from_p_br(
    p: &TruncatedSeries,
    k: &NormalizedFunction,
) -> Result<RatioConstruction> {
    check_unit_constant(p)?;
    let order = (p.order() + 1).min(k.order());
    let mut coeffs = vec![Complex64::default(), ONE];
    let mut truncated_at = None;
    for n in 2..=order {
        let kn = k.coeff(n).expect("within kernel order");
        if kn == Complex64::default() {
            if n <= 3 {
                return Err(Error::KernelCoefficientZero { index: n });
            }
            truncated_at = Some(n);
            break;
        }
        coeffs.push(p.coeffs()[n - 1] / kn);
    }
    let f = NormalizedFunction::new(TruncatedSeries::new(coeffs)?)?;
    Ok(RatioConstruction { f, truncated_at })
}

/// Solves the alpha-operator condition for `a_2`, `a_3` given `p_1`, `p_2`:
///
/// ```text
/// a_2 = p_1 / ((1 + alpha) k_2)
/// a_3 = [p_2 + (1 + 3 alpha) p_1^2 / (1 + alpha)^2] / (2 (1 + 2 alpha) k_3)
/// ```
///
/// The result is the cubic `z + a_2 z^2 + a_3 z^3` (order 3).
pub fn construct_f_from_p_bv(
    p: &TruncatedSeries,
    k: &NormalizedFunction,
    alpha: Complex64,
) -> Result<NormalizedFunction> {
    check_construction_alpha(alpha)?;
    check_unit_constant(p)?;
    let (k2, k3) = kernel_pair(k)?;
    let (p1, p2) = match (p.get(1), p.get(2)) {
        (Some(p1), Some(p2)) => (p1, p2),
        _ => {
            return Err(Error::ParamOutOfRange(format!(
                "p needs order >= 2, got {}",
                p.order()
            )))
        }
    };
    let a2 = p1 / ((1.0 + alpha) * k2);
    let a3 = (p2 + (1.0 + 3.0 * alpha) / ((1.0 + alpha) * (1.0 + alpha)) * p1 * p1)
        / (2.0 * (1.0 + 2.0 * alpha) * k3);
    NormalizedFunction::from_tail(&[a2, a3])
}

pub(crate) fn check_construction_alpha(alpha: Complex64) -> Result<()> {
    if (alpha + 1.0).norm() < EXCLUDED_ALPHA_RADIUS {
        return Err(Error::ExcludedAlpha {
            alpha,
            reason: "alpha must stay away from -1",
        });
    }
    if (alpha + 0.5).norm() < EXCLUDED_ALPHA_RADIUS {
        return Err(Error::ExcludedAlpha {
            alpha,
            reason: "alpha must stay away from -1/2",
        });
    }
    Ok(())
}

fn check_unit_constant(p: &TruncatedSeries) -> Result<()> {
    let c0 = p.coeffs()[0];
    if (c0 - ONE).norm() > 1e-12 {
        return Err(Error::BadConstantTerm(c0));
    }
    Ok(())
}

/// `(k_2, k_3)`, both nonzero.
pub(crate) fn kernel_pair(k: &NormalizedFunction) -> Result<(Complex64, Complex64)> {
    let k2 = k.coeff(2).unwrap_or_default();
    if k2 == Complex64::default() {
        return Err(Error::KernelCoefficientZero { index: 2 });
    }
    let k3 = k.coeff(3).unwrap_or_default();
    if k3 == Complex64::default() {
        return Err(Error::KernelCoefficientZero { index: 3 });
    }
    Ok((k2, k3))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub expected: Complex64,
    pub derived: Complex64,
    /// `|derived - expected| / max(1, |expected|)`.
    pub deviation: f64,
}

impl IdentityCheck {
    pub fn new(name: &str, expected: Complex64, derived: Complex64) -> Self {
        Self {
            name: name.to_owned(),
            expected,
            derived,
            deviation: relative_gap(expected, derived),
        }
    }
}

pub(crate) fn relative_gap(expected: Complex64, derived: Complex64) -> f64 {
    let gap = (derived - expected).norm();
    if gap.is_nan() {
        f64::INFINITY
    } else {
        gap / expected.norm().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    /// `|2(1+2 alpha) k_3 - (1+3 alpha) k_2^2|`
    pub denominator: f64,
    pub one_plus_alpha: f64,
    pub one_plus_two_alpha: f64,
    /// Reciprocal of the smallest divisor used in the back-substitutions.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub p1: Complex64,
    pub p2: Complex64,
    pub q2: Complex64,
    pub checks: Vec<IdentityCheck>,
    pub max_deviation: f64,
    pub conditioning: Conditioning,
}

/// Computes `p_1`, `p_2`, `q_2` forward from `a_2`, `a_3`, then recovers
/// `a_2`, `a_2^2` and three independent expressions for `a_3` from them.
pub fn identity_suite(
    a2: Complex64,
    a3: Complex64,
    k2: Complex64,
    k3: Complex64,
    alpha: Complex64,
) -> Result<IdentityReport> {
    let zero = Complex64::default();
    if k2 == zero || k3 == zero {
        return Err(Error::HypothesisViolated("k2 and k3 must be nonzero"));
    }
    let s1 = 1.0 + alpha;
    let s2 = 1.0 + 2.0 * alpha;
    let s3 = 1.0 + 3.0 * alpha;
    if s1 == zero {
        return Err(Error::HypothesisViolated("alpha = -1"));
    }
    if s2 == zero {
        return Err(Error::HypothesisViolated("alpha = -1/2"));
    }
    let denom = 2.0 * s2 * k3 - s3 * k2 * k2;
    if denom == zero {
        return Err(Error::HypothesisViolated(
            "2(1+2 alpha) k3 - (1+3 alpha) k2^2 = 0",
        ));
    }

    let p1 = s1 * a2 * k2;
    let p2 = 2.0 * s2 * a3 * k3 - s3 * a2 * a2 * k2 * k2;
    let q2 = (4.0 * s2 * k3 - s3 * k2 * k2) * a2 * a2 - 2.0 * s2 * a3 * k3;

    let a2_linear = p1 / (s1 * k2);
    let a2_sq = (p2 + q2) / (2.0 * denom);
    let a3_combined = a2_sq + (p2 - q2) / (4.0 * s2 * k3);
    let a3_forward = (p2 + s3 / (s1 * s1) * p1 * p1) / (2.0 * s2 * k3);
    let a3_inverse = (-q2 + (4.0 * s2 * k3 - s3 * k2 * k2) / (k2 * k2 * s1 * s1) * p1 * p1)
        / (2.0 * s2 * k3);

    let checks = vec![
        IdentityCheck::new("a2 from p1", a2, a2_linear),
        IdentityCheck::new("a2^2 from p2 + q2", a2 * a2, a2_sq),
        IdentityCheck::new("a3 from p2 +/- q2", a3, a3_combined),
        IdentityCheck::new("a3 from p1, p2", a3, a3_forward),
        IdentityCheck::new("a3 from p1, q2", a3, a3_inverse),
    ];
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let smallest = [
        (2.0 * denom).norm(),
        (4.0 * s2 * k3).norm(),
        (s1 * k2).norm(),
        (s1 * s1 * k2 * k2).norm(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Ok(IdentityReport {
        p1,
        p2,
        q2,
        checks,
        max_deviation,
        conditioning: Conditioning {
            denominator: denom.norm(),
            one_plus_alpha: s1.norm(),
            one_plus_two_alpha: s2.norm(),
            estimate: 1.0 / smallest,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    fn real_fn(tail: &[f64]) -> NormalizedFunction {
        NormalizedFunction::from_tail(&tail.iter().map(|&x| r(x)).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn ratio_operator_examples() {
        let f = real_fn(&[0.3, -0.2, 0.1]);
        let p = r_operator(&f, &kernels::halfplane(4));
        assert_eq!(p.coeffs(), &[r(1.0), r(0.3), r(-0.2), r(0.1)]);
        let koebe = kernels::koebe(4);
        let p = r_operator(&koebe, &koebe);
        assert_eq!(p.coeffs(), &[r(1.0), r(4.0), r(9.0), r(16.0)]);
    }

    #[test]
    fn alpha_operator_on_koebe_squared() {
        let k = kernels::koebe(3);
        let v = v_operator(&k, &k, r(0.0)).unwrap();
        assert_eq!(v.order(), 2);
        assert!(close(v.coeffs()[0], r(1.0), 1e-14));
        assert!(close(v.coeffs()[1], r(4.0), 1e-14));
        assert!(close(v.coeffs()[2], r(2.0), 1e-14));
    }

    #[test]
    fn alpha_operator_on_identity_is_one() {
        let alpha = c(0.3, -1.2);
        let v = v_operator(&NormalizedFunction::identity(6), &kernels::koebe(6), alpha).unwrap();
        for (n, x) in v.coeffs().iter().enumerate() {
            let want = if n == 0 { 1.0 } else { 0.0 };
            assert!(close(*x, r(want), 1e-14));
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            v_expansion_closed_form(r(2.0), r(3.0), r(2.0), r(3.0), r(0.0)),
            (r(4.0), r(2.0))
        );
        assert_eq!(
            v_expansion_closed_form(r(0.0), r(0.0), r(2.0), r(3.0), c(0.5, 0.5)),
            (r(0.0), r(0.0))
        );
        let (c1, c2) = v_expansion_closed_form(r(1.0), r(1.0), r(1.0), r(1.0), r(1.0));
        assert_eq!((c1, c2), (r(2.0), r(2.0)));
        let f = real_fn(&[1.0, 1.0]);
        let v = v_operator(&f, &f, r(1.0)).unwrap();
        assert!(close(v.coeffs()[1], c1, 1e-13));
        assert!(close(v.coeffs()[2], c2, 1e-13));
    }

    #[test]
    fn inverse_side_examples() {
        let k = kernels::koebe(6);
        let q = inverse_side_series(&NormalizedFunction::identity(6), &k, None).unwrap();
        assert_eq!(q, TruncatedSeries::one(5));
        let (a2, a3) = (c(0.4, 0.1), c(-0.3, 0.2));
        let f = NormalizedFunction::from_tail(&[a2, a3, r(0.05)]).unwrap();
        let q = inverse_side_series(&f, &k, None).unwrap();
        assert!(close(q.coeffs()[1], -a2 * 2.0, 1e-14));
        assert!(close(q.coeffs()[2], 3.0 * (2.0 * a2 * a2 - a3), 1e-14));

        let alpha = c(0.5, 0.5);
        let (k2, k3) = (r(2.0), r(3.0));
        let q = inverse_side_series(&f, &k, Some(alpha)).unwrap();
        let s2 = 1.0 + 2.0 * alpha;
        let s3 = 1.0 + 3.0 * alpha;
        let want = (4.0 * s2 * k3 - s3 * k2 * k2) * a2 * a2 - 2.0 * s2 * a3 * k3;
        assert!(close(q.coeffs()[1], -(1.0 + alpha) * a2 * k2, 1e-13));
        assert!(close(q.coeffs()[2], want, 1e-13));
    }

    #[test]
    fn ratio_construction_examples() {
        let k = kernels::koebe(6);
        let built = construct_f_from_p_br(&TruncatedSeries::one(5), &k).unwrap();
        assert_eq!(built.f, NormalizedFunction::identity(6));
        let p = TruncatedSeries::from_real(&[1.0, 2.0, 2.0]).unwrap();
        let built = construct_f_from_p_br(&p, &k).unwrap();
        assert_eq!(built.f.coeff(2), Some(r(1.0)));
        assert!(close(built.f.coeff(3).unwrap(), r(2.0 / 3.0), 1e-15));
        let back = r_operator(&built.f, &k);
        for (x, y) in back.coeffs().iter().zip(p.coeffs()) {
            assert!(close(*x, *y, 1e-15));
        }
    }

    #[test]
    fn ratio_construction_truncates_at_vanishing_kernel_coefficient() {
        let k = NormalizedFunction::from_tail(&[r(1.0), r(2.0), r(0.0), r(1.0)]).unwrap();
        let p = TruncatedSeries::from_real(&[1.0, 0.1, 0.2, 0.3, 0.4]).unwrap();
        let built = construct_f_from_p_br(&p, &k).unwrap();
        assert_eq!(built.truncated_at, Some(4));
        assert_eq!(built.f.order(), 3);
        let k = NormalizedFunction::from_tail(&[r(1.0), r(0.0)]).unwrap();
        assert_eq!(
            construct_f_from_p_br(&p, &k),
            Err(Error::KernelCoefficientZero { index: 3 })
        );
    }

    #[test]
    fn alpha_construction_examples() {
        let k = kernels::koebe(3);
        let f = construct_f_from_p_bv(&TruncatedSeries::one(4), &k, c(0.2, 0.1)).unwrap();
        assert_eq!(f, NormalizedFunction::identity(3));
        let p = TruncatedSeries::from_real(&[1.0, 2.0, 2.0]).unwrap();
        let f = construct_f_from_p_bv(&p, &k, r(0.0)).unwrap();
        assert!(close(f.coeff(2).unwrap(), r(1.0), 1e-15));
        assert!(close(f.coeff(3).unwrap(), r(1.0), 1e-15));
        let v = v_operator(&f, &k, r(0.0)).unwrap();
        assert!(close(v.coeffs()[1], r(2.0), 1e-14));
        assert!(close(v.coeffs()[2], r(2.0), 1e-14));
    }

    #[test]
    fn alpha_construction_rejects_excluded_alpha() {
        let k = kernels::koebe(3);
        let p = TruncatedSeries::one(3);
        for alpha in [r(-1.0), r(-0.5), c(-0.5, 1e-7)] {
            assert!(matches!(
                construct_f_from_p_bv(&p, &k, alpha),
                Err(Error::ExcludedAlpha { .. })
            ));
        }
    }

    #[test]
    fn identity_suite_zero_input() {
        let rep = identity_suite(r(0.0), r(0.0), r(2.0), r(3.0), r(1.0)).unwrap();
        assert_eq!((rep.p1, rep.p2, rep.q2), (r(0.0), r(0.0), r(0.0)));
        assert_eq!(rep.max_deviation, 0.0);
    }

    #[test]
    fn identity_suite_hypotheses() {
        assert!(identity_suite(r(1.0), r(1.0), r(2.0), r(3.0), r(-1.0)).is_err());
        assert!(identity_suite(r(1.0), r(1.0), r(2.0), r(3.0), r(-0.5)).is_err());
        // alpha = 0, 2 k3 = k2^2.
        assert!(identity_suite(r(1.0), r(1.0), r(2.0), r(2.0), r(0.0)).is_err());
        assert!(identity_suite(r(1.0), r(1.0), r(0.0), r(2.0), r(0.0)).is_err());
    }

    #[test]
    fn identity_suite_conditioning_near_minus_half() {
        let far = identity_suite(c(0.7, 0.2), c(-0.4, 0.9), r(2.0), r(3.0), r(0.3)).unwrap();
        let near = identity_suite(c(0.7, 0.2), c(-0.4, 0.9), r(2.0), r(3.0), r(-0.4999)).unwrap();
        assert!(near.max_deviation < 1e-9, "{near:?}");
        assert!(near.conditioning.estimate > 100.0 * far.conditioning.estimate);
        assert!(near.conditioning.one_plus_two_alpha < 1e-3);
    }
}
