//! Multiplicative decomposition of the offensive rating.
//!
//!   ORTG = xPOSS * xSHOT * xEFF        with
//!   xPOSS = 1 / (1 - ORB%*(1 - FG%) + mu*FTr/FT%)   extra possessions
//!   xSHOT = 1 - TOV%                                ball security
//!   xEFF  = 2*eFG% + FTr                            points per shot attempt
//!
//! Folding the first two gives the two-component form ORTG = xVOL * xEFF,
//! where xVOL = xPOSS * xSHOT is the expected number of shot attempts per
//! possession. Because the decomposition is an exact product, scaling any
//! single component by k scales the rating by exactly k.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::TeamProfile;
use crate::ratings;

/// The multiplicative components of a rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrtgMultipliers {
    /// Extra-possessions multiplier, > 0.
    pub xposs: f64,
    /// Probability a possession produces a shot attempt.
    pub xshot: f64,
    /// Expected points per shot attempt.
    pub xeff: f64,
    /// Expected shot attempts per possession: xposs * xshot.
    pub xvol: f64,
}

impl OrtgMultipliers {
    /// The rating the components multiply out to.
    pub fn ortg(&self) -> f64 {
        self.xposs * self.xshot * self.xeff
    }
}

/// One of the three primitive components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Xposs,
    Xshot,
    Xeff,
}

impl std::str::FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xposs" => Ok(Component::Xposs),
            "xshot" => Ok(Component::Xshot),
            "xeff" => Ok(Component::Xeff),
            other => Err(Error::UnknownComponent {
                name: other.to_string(),
            }),
        }
    }
}

/// Splits a profile's rating into its multiplicative components.
pub fn multipliers(profile: &TeamProfile) -> Result<OrtgMultipliers> {
    let xposs = 1.0 / ratings::denominator(profile, profile.mu)?;
    let xshot = 1.0 - profile.factors.tov_pct;
    let xeff = 2.0 * profile.factors.efg + profile.factors.ftr;
    Ok(OrtgMultipliers {
        xposs,
        xshot,
        xeff,
        xvol: xposs * xshot,
    })
}

/// Rating after scaling one component by `k`. Exactly `k` times the original
/// rating, by the product structure.
pub fn scale_experiment(m: &OrtgMultipliers, which: Component, k: f64) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("scale factor must be positive, got {k}"),
        });
    }
    let (xposs, xshot, xeff) = match which {
        Component::Xposs => (m.xposs * k, m.xshot, m.xeff),
        Component::Xshot => (m.xposs, m.xshot * k, m.xeff),
        Component::Xeff => (m.xposs, m.xshot, m.xeff * k),
    };
    Ok(xposs * xshot * xeff)
}
