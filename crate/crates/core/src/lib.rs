pub mod qcore;
pub mod scenario;
pub mod interpret;
pub mod checks;
pub mod cli;
