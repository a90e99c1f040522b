pub mod error;
pub mod families;
pub mod jet;
pub mod oracle;
pub mod spray;
pub mod bryant;
pub mod chernweil;
pub mod curvature;
pub mod report;
pub mod sampling;
pub mod suite;

pub use error::{Error, Result};
