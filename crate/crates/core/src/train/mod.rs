//! Training-support primitives: loss math over score inputs and adaptive
//! negative sampling. No optimizer and no parameter updates live here.

mod loss;
mod negatives;

pub use loss::{
    infonce, infonce_with_form, margin_ranking, InfoNceForm, LossResult, MarginResult, ScoreRow,
};
pub use negatives::{mine_negatives, refresh_schedule, MiningOutcome, NegativePool};
