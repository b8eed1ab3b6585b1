//! Token-level late-interaction scoring.

mod bags;
mod maxsim;
mod passages;

pub use bags::{load_bags, save_bags, QuantizedBag, TokenBag};
pub use maxsim::{maxsim, score_corpus_maxsim, PassageAgg};
pub use passages::assemble_passages;
