pub mod body;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod nn;
pub mod objective;
pub mod optim;
pub mod scene;
pub mod synth;
pub mod visibility;

pub use error::{Error, Result, Stage};
