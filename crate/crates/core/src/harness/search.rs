//! Tightness probe: hill climbing over measure atoms with random restarts.
//!
//! The objective is `|a_2|`, `|a_3|` or `|2 a_2^2 - a_3|` over accepted samples
//! only. Each step either restarts from a fresh sampler draw (probability
//! [`RESTART_PROBABILITY`]) or perturbs a single coordinate of the current
//! point (one angle, one weight, or the dilation radius) and projects it
//! back onto `sum w = 1`, `sum |w| <= m/2`, `0 <= rho < 1`. The first
//! evaluation is trial 0 of the batch with the same seed, and restart `r`
//! reuses trial `r`.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{draw_sample, trial_rng, SampleRecord, Verifier};
use crate::classes::{contract_weights, Atom, AtomicMeasure, ClassSpec};
use crate::error::{Error, Result};

pub const ANGLE_STEP: f64 = 0.3;
pub const WEIGHT_STEP: f64 = 0.1;
pub const DILATION_STEP: f64 = 0.1;
pub const RESTART_PROBABILITY: f64 = 0.2;
/// A search ratio above `1 + RATIO_TOL` is a bound violation.
pub const RATIO_TOL: f64 = 1e-9;

/// Stream reserved for the search moves; trials use streams `0..`.
const SEARCH_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    A2,
    A3,
    Combo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub target: Target,
    pub best_value: f64,
    pub bound: f64,
    /// `best_value / bound`; reported, never asserted to reach 1.
    pub ratio: f64,
    pub witness: Option<SampleRecord>,
    pub evaluations: u64,
    pub accepted_evaluations: u64,
    pub restarts: u64,
    /// `false` when no evaluation was accepted.
    pub found: bool,
}

impl SearchResult {
    pub fn exceeds_bound(&self) -> bool {
        self.ratio > 1.0 + RATIO_TOL
    }
}

pub fn tightness_search(spec: &ClassSpec, target: Target, budget: u64, seed: u64) -> Result<SearchResult> {
    tightness_search_with(&Verifier::new(spec.clone())?, target, budget, seed)
}

pub fn tightness_search_with(
    verifier: &Verifier,
    target: Target,
    budget: u64,
    seed: u64,
) -> Result<SearchResult> {
    let bounds = verifier.bounds();
    let bound = match target {
        Target::A2 => Some(bounds.a2_bound),
        Target::A3 => bounds.a3_bound,
        Target::Combo => bounds.combo_bound,
    }
    .ok_or_else(|| Error::ParamOutOfRange(format!("no bound on {target:?} for this class")))?;
    let m = verifier.spec().m;
    let objective = |r: &SampleRecord| -> Option<f64> {
        let x = r.extracted.as_ref().filter(|_| r.accepted)?;
        Some(match target {
            Target::A2 => x.a2.norm(),
            Target::A3 => x.a3.norm(),
            Target::Combo => x.combo.norm(),
        })
    };

    let mut rng = trial_rng(seed, SEARCH_STREAM);
    let mut restarts = 0u64;
    let mut current = draw_sample(m, seed, 0);
    let mut current_score = f64::NEG_INFINITY;
    let mut best: Option<(f64, SampleRecord)> = None;
    let mut accepted_evaluations = 0;

    for eval in 0..budget {
        let (candidate, restart) = if eval == 0 {
            (current.clone(), true)
        } else if rng.random::<f64>() < RESTART_PROBABILITY {
            restarts += 1;
            (draw_sample(m, seed, restarts), true)
        } else {
            (perturb(&current, m, &mut rng), false)
        };
        let trial = if restart { restarts } else { eval };
        let record = verifier.evaluate_measure(candidate.0.clone(), candidate.1, seed, trial);
        let score = objective(&record);
        let score_value = score.unwrap_or(f64::NEG_INFINITY);
        if restart || score_value >= current_score {
            current = candidate;
            current_score = score_value;
        }
        if let Some(value) = score {
            accepted_evaluations += 1;
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, record));
            }
        }
    }

    let (best_value, witness) = match best {
        Some((v, r)) => (v, Some(r)),
        None => (0.0, None),
    };
    Ok(SearchResult {
        target,
        best_value,
        bound,
        ratio: best_value / bound,
        found: witness.is_some(),
        witness,
        evaluations: budget,
        accepted_evaluations,
        restarts,
    })
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    Normal::new(0.0, sigma).expect("valid sigma").sample(rng)
}

/// Moves one angle, one weight or the dilation, then projects back onto the
/// constraints.
pub(crate) fn perturb<R: Rng + ?Sized>(
    (mu, dilation): &(AtomicMeasure, f64),
    m: f64,
    rng: &mut R,
) -> (AtomicMeasure, f64) {
    let mut atoms = mu.atoms.clone();
    let j = rng.random_range(0..atoms.len());
    let mut dilation = *dilation;
    match rng.random_range(0..3) {
        0 => atoms[j].t = (atoms[j].t + gaussian(rng, ANGLE_STEP)).rem_euclid(TAU),
        1 => atoms[j].w += gaussian(rng, WEIGHT_STEP),
        _ => {
            // Reflect into [0, 1).
            let d = (dilation + gaussian(rng, DILATION_STEP)).abs();
            dilation = if d >= 1.0 { (2.0 - d).clamp(0.0, 1.0 - f64::EPSILON) } else { d };
        }
    }
    (project(atoms, m), dilation)
}

/// Restores `sum w = 1` by a uniform shift, then contracts toward the
/// uniform measure until `sum |w| <= m/2`.
fn project(atoms: Vec<Atom>, m: f64) -> AtomicMeasure {
    let n = atoms.len() as f64;
    let shift = (1.0 - atoms.iter().map(|a| a.w).sum::<f64>()) / n;
    let spread: Vec<f64> = atoms.iter().map(|a| a.w + shift - 1.0 / n).collect();
    let weights = contract_weights(&spread, m);
    AtomicMeasure {
        atoms: atoms
            .into_iter()
            .zip(weights)
            .map(|(a, w)| Atom { t: a.t, w })
            .collect(),
    }
}
