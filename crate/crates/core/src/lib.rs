pub mod cli;
pub mod env;
pub mod eval;
pub mod learner;
pub mod nn;
pub mod par;
pub mod search;
