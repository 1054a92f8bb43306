pub mod adversary;
pub mod harness;
pub mod ots;
pub mod params;
pub mod primitives;
pub mod qkd;
pub mod qpke;
pub mod qsim;
