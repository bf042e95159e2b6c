pub mod context;
pub mod dsl;
pub mod formula;
pub mod game;
pub mod satcore;
pub mod symmetry;
pub mod synth;
