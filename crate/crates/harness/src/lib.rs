//! Corpus generation, the codec quantization study and metric reports on top
//! of `cadseq-core`.

pub mod corpus;
pub mod format;
pub mod fuzz;
pub mod gradcheck;
pub mod pipeline;
pub mod quant;
pub mod report;
pub mod resolve;
