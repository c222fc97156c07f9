pub mod benchmark;
pub mod classify;
pub mod cv;
pub mod diagnose;
pub mod embed;
pub mod train;

mod common;
