pub mod environment;
pub mod estimation;
pub mod instance;
pub mod lp;
pub mod numeric;
pub mod policy;
pub mod gaps;
pub mod metrics;
pub mod harness;
