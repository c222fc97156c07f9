//! Post-hoc check of the separation/regularity condition for a trained model.
//!
//! For user-chosen radii `delta` and `epsilon` the report compares
//! `L*delta + sqrt(d)*epsilon + A_delta` against half the empirical margin
//! `gamma`, where `gamma` is the smallest embedded distance between
//! different-class training pairs, `A_delta` the largest embedded distance
//! among same-class pairs within ambient distance `2*delta`, and `L` the
//! certified Lipschitz bound of the interpolator. A nonnegative slack means
//! the condition holds on the training data.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

/// The condition quantities and their slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    /// Smallest embedded distance over different-class training pairs.
    pub gamma: f64,
    /// Largest embedded distance over same-class pairs with ambient distance
    /// at most `2*delta`; zero when no such pair exists.
    pub a_delta: f64,
    /// Certified Lipschitz bound of the interpolator.
    pub lipschitz: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// `lipschitz*delta + sqrt(d)*epsilon + a_delta`
    pub lhs: f64,
    /// `gamma/2 - lhs`; the condition holds iff this is nonnegative.
    pub slack: f64,
    pub satisfied: bool,
    /// True when no same-class pair fell within `2*delta`, making `a_delta`
    /// vacuously zero.
    pub vacuous_spread: bool,
}

/// Scan all training pairs of a model and report the condition slack.
pub fn diagnose(model: &EmbeddingModel, delta: f64, epsilon: f64) -> Result<DiagnosticsReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if model.num_classes() < 2 {
        return Err(Error::InvalidDataset(
            "diagnostics need at least two classes".into(),
        ));
    }

    let anchors = model.anchors();
    let embedding = model.embedding();
    let labels = model.labels();
    let n = model.num_anchors();

    let mut gamma = f64::INFINITY;
    let mut a_delta = 0.0f64;
    let mut spread_pairs = 0usize;
    let threshold = 2.0 * delta;
    for i in 0..n {
        for j in (i + 1)..n {
            let embedded = (embedding.row(i) - embedding.row(j)).norm();
            if labels[i] != labels[j] {
                if embedded < gamma {
                    gamma = embedded;
                }
            } else {
                let ambient = (anchors.row(i) - anchors.row(j)).norm();
                if ambient <= threshold {
                    spread_pairs += 1;
                    if embedded > a_delta {
                        a_delta = embedded;
                    }
                }
            }
        }
    }

    let lipschitz = model.lipschitz_bound();
    let d = model.embed_dim() as f64;
    let lhs = lipschitz * delta + d.sqrt() * epsilon + a_delta;
    let slack = gamma / 2.0 - lhs;
    Ok(DiagnosticsReport {
        gamma,
        a_delta,
        lipschitz,
        delta,
        epsilon,
        lhs,
        slack,
        satisfied: slack >= 0.0,
        vacuous_spread: spread_pairs == 0,
    })
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "separation/regularity condition at delta = {}, epsilon = {}", self.delta, self.epsilon)?;
        writeln!(f, "  margin gamma          : {}", self.gamma)?;
        writeln!(f, "  spread A_delta        : {}{}", self.a_delta, if self.vacuous_spread { "  (no same-class pair within 2*delta; vacuous)" } else { "" })?;
        writeln!(f, "  Lipschitz bound L     : {}", self.lipschitz)?;
        writeln!(f, "  L*delta + sqrt(d)*eps + A_delta = {}", self.lhs)?;
        writeln!(f, "  gamma / 2             : {}", self.gamma / 2.0)?;
        writeln!(f, "  slack                 : {}", self.slack)?;
        write!(f, "  condition satisfied   : {}", if self.satisfied { "yes" } else { "no" })
    }
}
