pub mod green;
pub mod simulate;
pub mod soliton;
pub mod spectrum;
pub mod sweep;
pub mod thresholds;
pub mod titchmarsh;
