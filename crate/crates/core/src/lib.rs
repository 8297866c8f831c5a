pub mod baselines;
pub mod designer;
pub mod error;
pub mod filter;
pub mod harness;
pub mod io;
pub mod optim;
pub mod slise;
pub mod weights;
