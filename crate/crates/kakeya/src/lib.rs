//! Exact-rational toolkit for achievement sets of positive series.
//!
//! The crate classifies achievement sets (interval union vs. empty
//! interior) via Kakeya-type tail conditions, represents targets as
//! series of reciprocal rising products with diverging factor counts,
//! and bounds the measure of the values reachable with increasing
//! factor counts. All arithmetic is exact; every asymptotic quantity is
//! replaced by a certified rational enclosure.

pub mod achievement;
pub mod exec;
pub mod construct;
pub mod cover;
pub mod error;
pub mod families;
pub mod interval;
pub mod rational;
pub mod series;
pub mod stages;

pub use interval::RatInterval;
pub use rational::Rat;
