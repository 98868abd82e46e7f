pub mod dataset;
pub mod delta;
pub mod experiment;
pub mod family;
pub mod mixing;
