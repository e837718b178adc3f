pub mod automata;
pub mod cli;
pub mod dynamics;
pub mod measures;
pub mod network;
pub mod problems;
pub mod reduction;
