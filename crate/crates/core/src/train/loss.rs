//! Contrastive and ranking losses over precomputed scores, with analytic
//! gradients. Encoder backprop is out of scope: these operate on score
//! values only, for trainers that own the model side.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One positive score and its K >= 1 negative scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub positive: f64,
    pub negatives: Vec<f64>,
}

impl ScoreRow {
    pub fn new(positive: f64, negatives: Vec<f64>) -> Result<Self> {
        if negatives.is_empty() {
            return Err(Error::InvalidArgument("score row needs at least one negative".into()));
        }
        if !positive.is_finite() || negatives.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("non-finite score".into()));
        }
        Ok(ScoreRow { positive, negatives })
    }
}

/// Loss value plus gradients with respect to every input score.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub loss: f64,
    pub grad_positive: f64,
    pub grad_negatives: Vec<f64>,
}

/// Which functional form the contrastive loss takes.
///
/// `LogLoss` is the standard (and default) negative log-softmax. The
/// `NegProbability` variant is the same expression without the logarithm,
/// i.e. the negated softmax probability itself; it is exposed only for
/// side-by-side comparison and is not a useful training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoNceForm {
    #[default]
    LogLoss,
    NegProbability,
}

/// InfoNCE over one score row.
///
/// `loss = -log( exp(s+/t) / (exp(s+/t) + sum_i exp(s_i/t)) )`, computed with
/// a max shift so large scores cannot overflow. Gradients are with respect
/// to the raw scores.
pub fn infonce(row: &ScoreRow, temperature: f64) -> Result<LossResult> {
    infonce_with_form(row, temperature, InfoNceForm::LogLoss)
}

pub fn infonce_with_form(row: &ScoreRow, temperature: f64, form: InfoNceForm) -> Result<LossResult> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    if row.negatives.is_empty() {
        return Err(Error::InvalidArgument("score row needs at least one negative".into()));
    }

    let t = temperature;
    let logits: Vec<f64> = std::iter::once(row.positive / t)
        .chain(row.negatives.iter().map(|s| s / t))
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / denom).collect();
    let p_pos = probs[0];

    match form {
        InfoNceForm::LogLoss => {
            // d loss / d s+ = (p+ - 1) / t ; d loss / d s_i = p_i / t
            Ok(LossResult {
                loss: -p_pos.ln(),
                grad_positive: (p_pos - 1.0) / t,
                grad_negatives: probs[1..].iter().map(|p| p / t).collect(),
            })
        }
        InfoNceForm::NegProbability => {
            // loss = -p+ ; d loss / d s+ = -p+(1 - p+) / t ;
            // d loss / d s_i = p+ p_i / t
            Ok(LossResult {
                loss: -p_pos,
                grad_positive: -p_pos * (1.0 - p_pos) / t,
                grad_negatives: probs[1..].iter().map(|p| p_pos * p / t).collect(),
            })
        }
    }
}

/// Margin ranking loss: `max(0, -y (o1 - o2) + margin)`.
///
/// `y` must be +1 or -1. The subgradient is 0 in the flat region and at the
/// kink, and (-y, +y) on the active side.
pub fn margin_ranking(o1: f64, o2: f64, y: i32, margin: f64) -> Result<MarginResult> {
    if y != 1 && y != -1 {
        return Err(Error::InvalidArgument(format!("y must be +1 or -1, got {y}")));
    }
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "margin must be finite and non-negative, got {margin}"
        )));
    }
    if !o1.is_finite() || !o2.is_finite() {
        return Err(Error::InvalidArgument("non-finite score".into()));
    }
    let yf = f64::from(y);
    let raw = -yf * (o1 - o2) + margin;
    if raw > 0.0 {
        Ok(MarginResult {
            loss: raw,
            grad_o1: -yf,
            grad_o2: yf,
        })
    } else {
        Ok(MarginResult {
            loss: 0.0,
            grad_o1: 0.0,
            grad_o2: 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginResult {
    pub loss: f64,
    pub grad_o1: f64,
    pub grad_o2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_way_softmax_is_ln2() {
        let row = ScoreRow::new(1.0, vec![1.0]).unwrap();
        let r = infonce(&row, 1.0).unwrap();
        assert!((r.loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn dominant_positive_drives_loss_to_zero() {
        let row = ScoreRow::new(50.0, vec![0.0, -3.0]).unwrap();
        let r = infonce(&row, 1.0).unwrap();
        assert!(r.loss < 1e-20, "loss {}", r.loss);
    }

    #[test]
    fn max_shift_survives_huge_scores() {
        let row = ScoreRow::new(4000.0, vec![3999.0]).unwrap();
        let r = infonce(&row, 1.0).unwrap();
        assert!(r.loss.is_finite());
        assert!(r.grad_positive.is_finite());
    }

    #[test]
    fn invalid_temperature_is_error() {
        let row = ScoreRow::new(1.0, vec![0.0]).unwrap();
        assert!(infonce(&row, 0.0).is_err());
        assert!(infonce(&row, -1.0).is_err());
    }

    #[test]
    fn shift_invariance() {
        let row = ScoreRow::new(0.3, vec![-0.4, 1.2, 0.9]).unwrap();
        let shifted = ScoreRow::new(0.3 + 5.0, vec![-0.4 + 5.0, 1.2 + 5.0, 0.9 + 5.0]).unwrap();
        let a = infonce(&row, 0.7).unwrap();
        let b = infonce(&shifted, 0.7).unwrap();
        assert!((a.loss - b.loss).abs() < 1e-9);
    }

    #[test]
    fn loss_decreases_as_positive_grows() {
        let mut last = f64::INFINITY;
        for s in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            let row = ScoreRow::new(s, vec![0.2, 0.4]).unwrap();
            let loss = infonce(&row, 1.0).unwrap().loss;
            assert!(loss < last);
            last = loss;
        }
    }

    #[test]
    fn printed_form_is_negative_probability() {
        let row = ScoreRow::new(1.0, vec![1.0]).unwrap();
        let r = infonce_with_form(&row, 1.0, InfoNceForm::NegProbability).unwrap();
        assert!((r.loss - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn margin_examples_from_definition() {
        let r = margin_ranking(0.9, 0.2, 1, 0.5).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!((r.grad_o1, r.grad_o2), (0.0, 0.0));

        let r = margin_ranking(0.2, 0.9, 1, 0.5).unwrap();
        assert!((r.loss - 1.2).abs() < 1e-12);
        assert_eq!((r.grad_o1, r.grad_o2), (-1.0, 1.0));
    }

    #[test]
    fn margin_role_antisymmetry() {
        for (o1, o2, y, m) in [(0.3, 0.8, 1, 0.25), (1.5, -0.5, -1, 1.0), (0.0, 0.0, 1, 0.0)] {
            let a = margin_ranking(o1, o2, y, m).unwrap();
            let b = margin_ranking(o2, o1, -y, m).unwrap();
            assert_eq!(a.loss, b.loss);
            assert_eq!(a.grad_o1, b.grad_o2);
            assert_eq!(a.grad_o2, b.grad_o1);
        }
    }

    #[test]
    fn margin_rejects_bad_y() {
        assert!(margin_ranking(0.1, 0.2, 0, 0.5).is_err());
        assert!(margin_ranking(0.1, 0.2, 2, 0.5).is_err());
    }

    #[test]
    fn subgradient_zero_at_kink() {
        // -y(o1-o2) + margin == 0 exactly
        let r = margin_ranking(0.5, 0.0, 1, 0.5).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!((r.grad_o1, r.grad_o2), (0.0, 0.0));
    }
}
