//! Basketball team-efficiency analytics: four factors, exact possession
//! counting, offensive/defensive/net ratings, multiplicative rating
//! decomposition, and gradient-based sensitivity analysis.
//!
//! The central result wired through this crate: a team's offensive rating
//! (points per possession) is a closed-form function of its four factors and
//! shooting percentages,
//!
//! ```text
//! ORTG = (1 - TOV%) * (FTr + 2*eFG%) / (1 - ORB%*(1 - FG%) + mu*FTr/FT%)
//! ```
//!
//! which matches the box-score bookkeeping `PTS / (FGA + TOV - ORB + mu*FTA)`
//! to machine precision on any internally consistent line. The [`sim`]
//! module provides a seeded possession simulator that serves as an
//! independent oracle for that identity and for the free-throw parameter
//! estimators in [`possession`].

pub mod decompose;
pub mod error;
pub mod factors;
pub mod ingest;
pub mod possession;
pub mod ratings;
pub mod sensitivity;
pub mod sim;

pub use error::{Error, Result};
