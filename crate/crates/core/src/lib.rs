pub mod affine;
pub mod cli;
pub mod code;
pub mod decoder;
pub mod deval;
pub mod ets;
pub mod gf2;
pub mod girth;
pub mod latdist;
pub mod search;
pub mod simulator;
