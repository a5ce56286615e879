pub mod cli;
pub mod cluster_sim;
pub mod coop_repair;
pub mod cutbound;
pub mod flowsim;
pub mod galois;
pub mod matrix;
pub mod mscr;
