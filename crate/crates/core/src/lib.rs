pub mod attack;
pub mod geometry;
pub mod rootfind;
pub mod retreat;
pub mod scenario_io;
pub mod search;
pub mod sim;
pub mod cli;
