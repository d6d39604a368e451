//! Softmax and sigmoid.

use crate::error::{Error, Result};

/// Numerically stable softmax: shifts by the maximum before exponentiating,
/// so arbitrarily large inputs cannot overflow.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::argument("softmax of empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::argument("softmax input must be finite"));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Logistic sigmoid `1 / (1 + e^{-s})`, evaluated in whichever branch keeps
/// the exponent non-positive.
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}
