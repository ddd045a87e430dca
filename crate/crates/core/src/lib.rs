pub mod aiger;
pub mod bmc;
pub mod cli;
pub mod constraints;
pub mod fraig;
pub mod sat;
pub mod sim;
pub mod simplify;
pub mod stats;
pub mod testgen;
pub mod unroll;
