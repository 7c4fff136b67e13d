pub mod error;
pub mod experiment;
pub mod linalg;
pub mod process;
pub mod quantum;
pub mod random;
pub mod selftest;
pub mod tomography;
pub mod tso;

pub use error::{Error, Result, Stage};
