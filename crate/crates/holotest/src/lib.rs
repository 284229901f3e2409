pub mod cli;
pub mod harness;
pub mod load;
pub mod specio;
