pub mod certify;
pub mod cli;
pub mod engine;
pub mod gadgets;
pub mod reduction;
pub mod solve;
