//! Offensive, defensive, and net ratings in points per possession.
//!
//! Two routes to the same number:
//!
//!   box route:    ORTG = PTS / (FGA + TOV - ORB + mu*FTA)
//!   closed form:  ORTG = (1 - TOV%) * (FTr + 2*eFG%)
//!                        / (1 - ORB%*(1 - FG%) + mu*FTr/FT%)
//!
//! For a profile built from the same line with the approximate rebounding
//! rate, the two agree to machine precision; that identity is the primary
//! correctness oracle of this crate. The epsilon-corrected variant replaces
//! `mu` with `mu*(1 - eps)` in the denominator to account for offensive
//! rebounds of missed final free throws.
//!
//! Everything here is per single possession; multiply by 100 for the
//! conventional presentation (see [`per_100`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::TeamProfile;
use crate::ingest::BoxScoreLine;

/// Historical NBA share of possession-ending free throws (seasons around
/// 2003-06).
pub const MU_HISTORICAL: f64 = 0.44;
/// Share estimated from NBA 2022-23 play-by-play data.
pub const MU_2022_23: f64 = 0.42;

/// Denominators at or below this raise [`Error::DegenerateDenominator`]
/// instead of producing huge ratings.
const DENOM_GUARD: f64 = 1e-9;

/// Offensive/defensive/net rating triple, points per possession.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratings {
    pub ortg: f64,
    pub drtg: f64,
    pub net: f64,
}

impl Ratings {
    fn new(ortg: f64, drtg: f64) -> Self {
        Ratings { ortg, drtg, net: ortg - drtg }
    }
}

/// Points per 100 possessions.
pub fn per_100(rating: f64) -> f64 {
    100.0 * rating
}

/// Possession estimate from box-score totals: FGA + TOV - ORB + mu*FTA.
pub fn estimate_possessions(line: &BoxScoreLine, mu: f64) -> Result<f64> {
    let poss = line.fga as f64 + line.tov as f64 - line.orb as f64 + mu * line.fta as f64;
    if poss <= 0.0 {
        return Err(Error::NegativePossessions);
    }
    Ok(poss)
}

/// Offensive rating from box-score totals.
pub fn ortg_box(line: &BoxScoreLine, mu: f64) -> Result<f64> {
    Ok(line.pts as f64 / estimate_possessions(line, mu)?)
}

/// Defensive rating: the offensive rating of the opponents' aggregates.
pub fn drtg_box(opp_line: &BoxScoreLine, mu: f64) -> Result<f64> {
    ortg_box(opp_line, mu)
}

/// Full rating triple from a team's and its opponents' aggregates.
pub fn net_box(line: &BoxScoreLine, opp_line: &BoxScoreLine, mu: f64) -> Result<Ratings> {
    Ok(Ratings::new(ortg_box(line, mu)?, drtg_box(opp_line, mu)?))
}

/// The free-throw term mu*FTr/FT% of the closed-form denominator. FTr = 0
/// forces the term to 0, resolving the 0/0 for teams with no free throws.
pub(crate) fn ft_term(profile: &TeamProfile, mu: f64) -> f64 {
    if profile.factors.ftr == 0.0 {
        0.0
    } else {
        mu * profile.factors.ftr / profile.shooting.ft_pct
    }
}

/// Closed-form denominator 1 - ORB%*(1 - FG%) + mu_eff*FTr/FT%, guarded.
pub(crate) fn denominator(profile: &TeamProfile, mu_eff: f64) -> Result<f64> {
    let f = &profile.factors;
    let denom = 1.0 - f.orb_pct * (1.0 - profile.shooting.fg_pct) + ft_term(profile, mu_eff);
    if !denom.is_finite() || denom <= DENOM_GUARD {
        return Err(Error::DegenerateDenominator);
    }
    Ok(denom)
}

/// Offensive rating as a function of the four factors and shooting
/// percentages.
pub fn ortg_factors(profile: &TeamProfile) -> Result<f64> {
    ortg_factors_eps(profile, 0.0)
}

/// Epsilon-corrected closed form: mu becomes mu*(1 - eps) in the
/// denominator, discounting possession-ending free throws that the offense
/// rebounded.
pub fn ortg_factors_eps(profile: &TeamProfile, epsilon: f64) -> Result<f64> {
    let f = &profile.factors;
    let denom = denominator(profile, profile.mu * (1.0 - epsilon))?;
    Ok((1.0 - f.tov_pct) * (f.ftr + 2.0 * f.efg) / denom)
}

/// Defensive rating: the closed form evaluated on the opponents' profile.
pub fn drtg_factors(opp_profile: &TeamProfile) -> Result<f64> {
    ortg_factors(opp_profile)
}

/// Full rating triple from the closed form.
pub fn net_factors(profile: &TeamProfile, opp_profile: &TeamProfile) -> Result<Ratings> {
    Ok(Ratings::new(ortg_factors(profile)?, drtg_factors(opp_profile)?))
}
