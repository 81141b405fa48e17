pub mod error;
pub mod extension;
pub mod generate;
pub mod group;
pub mod instance;
pub mod rational;
pub mod sets;
pub mod order;
pub mod cli;
pub mod construct;
pub mod report;
pub mod samples;
pub mod verify;
