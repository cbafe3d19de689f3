//! One runner per subcommand. Each fills the report and returns the exit
//! code to use when a check fails.

pub mod curvature;
pub mod expand;
pub mod koiso;
pub mod schauder;
pub mod solve;
pub mod weights;
