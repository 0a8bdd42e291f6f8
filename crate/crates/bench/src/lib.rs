//! Benchmark harness, example programs and oracle scripts for `fpp`.

pub mod bench;
pub mod examples;
pub mod fit;
pub mod scripts;

pub use bench::{emit_csv, run_bench, Bench, BenchRow, BenchSpec, BenchTable, Container, Impl, Sample};
pub use examples::run_examples;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
