pub mod check;
pub mod compare;
pub mod diagnose;
pub mod filter;
pub mod forecast;
pub mod simulate;
