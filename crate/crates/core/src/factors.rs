//! The four factors and shooting percentages of a box-score line.
//!
//! Definitions:
//!   eFG%  = (FGM + 0.5*3PM) / FGA
//!   FTr   = FTM / FGA
//!   ORB%  = ORB / (ORB + opp DRB)          (exact, needs opponent boards)
//!         ~ ORB / (FGA - FGM)              (approximation used downstream)
//!   TOV%  = TOV / (FGA + TOV - ORB + mu*FTA)
//!
//! The rescaled TOV% shares its denominator with the possession estimate, so
//! the closed-form rating comes out in the same units. The traditional
//! variant (without `- ORB`) is provided along with the exact conversion
//! between the two.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::BoxScoreLine;

/// The four factors of offensive performance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourFactors {
    pub efg: f64,
    pub ftr: f64,
    pub orb_pct: f64,
    pub tov_pct: f64,
}

/// Plain shooting percentages, used as fixed parameters of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingPct {
    pub fg_pct: f64,
    pub ft_pct: f64,
}

/// Full input of the closed-form rating equation: four factors, shooting
/// percentages, and the possession-ending free-throw share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TeamProfile {
    pub factors: FourFactors,
    pub shooting: ShootingPct,
    pub mu: f64,
}

impl TeamProfile {
    pub fn new(efg: f64, ftr: f64, orb_pct: f64, tov_pct: f64, fg_pct: f64, ft_pct: f64, mu: f64) -> Self {
        TeamProfile {
            factors: FourFactors { efg, ftr, orb_pct, tov_pct },
            shooting: ShootingPct { fg_pct, ft_pct },
            mu,
        }
    }
}

/// Effective field goal percentage: (FGM + 0.5*3PM) / FGA.
pub fn efg(line: &BoxScoreLine) -> Result<f64> {
    if line.fga == 0 {
        return Err(Error::DivisionByZero { what: "efg" });
    }
    Ok((line.fgm as f64 + 0.5 * line.tpm as f64) / line.fga as f64)
}

/// Free throw rate: FTM / FGA.
pub fn ftr(line: &BoxScoreLine) -> Result<f64> {
    if line.fga == 0 {
        return Err(Error::DivisionByZero { what: "ftr" });
    }
    Ok(line.ftm as f64 / line.fga as f64)
}

/// Field goal percentage: FGM / FGA.
pub fn fg_pct(line: &BoxScoreLine) -> Result<f64> {
    if line.fga == 0 {
        return Err(Error::DivisionByZero { what: "fg_pct" });
    }
    Ok(line.fgm as f64 / line.fga as f64)
}

/// Free throw percentage: FTM / FTA. A team that never went to the line has
/// ft_pct 0 by definition (FTr is then also 0 and the rating term vanishes).
pub fn ft_pct(line: &BoxScoreLine) -> f64 {
    if line.fta == 0 {
        0.0
    } else {
        line.ftm as f64 / line.fta as f64
    }
}

/// Exact offensive rebounding rate: ORB / (ORB + opponent DRB).
pub fn orb_pct_exact(line: &BoxScoreLine) -> Result<f64> {
    let opp_drb = line.opp_drb.ok_or(Error::MissingOpponentRebounds)?;
    if line.orb + opp_drb == 0 {
        return Err(Error::DivisionByZero { what: "orb_pct_exact" });
    }
    Ok(line.orb as f64 / (line.orb + opp_drb) as f64)
}

/// Approximate offensive rebounding rate: ORB / (FGA - FGM). Ignores boards
/// of missed final free throws; this is the variant the closed-form rating
/// consumes.
pub fn orb_pct_approx(line: &BoxScoreLine) -> Result<f64> {
    if line.fga <= line.fgm {
        return Err(Error::DivisionByZero { what: "orb_pct_approx" });
    }
    Ok(line.orb as f64 / (line.fga - line.fgm) as f64)
}

fn possession_denominator(line: &BoxScoreLine, mu: f64, with_orb: bool) -> Result<f64> {
    let orb = if with_orb { line.orb as f64 } else { 0.0 };
    let denom = line.fga as f64 + line.tov as f64 - orb + mu * line.fta as f64;
    if denom <= 0.0 {
        return Err(Error::NegativePossessions);
    }
    Ok(denom)
}

/// Turnover rate as the share of possessions lost: TOV / (FGA + TOV - ORB + mu*FTA).
pub fn tov_pct(line: &BoxScoreLine, mu: f64) -> Result<f64> {
    Ok(line.tov as f64 / possession_denominator(line, mu, true)?)
}

/// Traditional turnover rate: TOV / (FGA + TOV + mu*FTA), offensive rebounds
/// not credited back.
pub fn tov_pct_trad(line: &BoxScoreLine, mu: f64) -> Result<f64> {
    Ok(line.tov as f64 / possession_denominator(line, mu, false)?)
}

/// Rescales a traditional turnover rate onto the possession-share scale.
pub fn convert_tov(trad: f64, line: &BoxScoreLine, mu: f64) -> Result<f64> {
    let with_orb = possession_denominator(line, mu, true)?;
    let without_orb = possession_denominator(line, mu, false)?;
    Ok(trad * without_orb / with_orb)
}

/// Builds the full closed-form input from a box-score line. Uses the
/// approximate rebounding rate, matching what the rating equation expects.
pub fn team_profile(line: &BoxScoreLine, mu: f64) -> Result<TeamProfile> {
    Ok(TeamProfile {
        factors: FourFactors {
            efg: efg(line)?,
            ftr: ftr(line)?,
            orb_pct: orb_pct_approx(line)?,
            tov_pct: tov_pct(line, mu)?,
        },
        shooting: ShootingPct {
            fg_pct: fg_pct(line)?,
            ft_pct: ft_pct(line),
        },
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line(fga: u32, fgm: u32, tpa: u32, tpm: u32, fta: u32, ftm: u32, orb: u32, tov: u32) -> BoxScoreLine {
        BoxScoreLine {
            team_id: "T".to_string(),
            season: "2022-23".to_string(),
            fga,
            fgm,
            tpa,
            tpm,
            fta,
            ftm,
            orb,
            drb: 0,
            tov,
            pts: ftm + 2 * fgm + tpm,
            opp_drb: None,
        }
    }

    #[test]
    fn efg_direct_arithmetic() {
        let l = line(10, 4, 3, 2, 0, 0, 0, 0);
        assert_eq!(efg(&l).unwrap(), 0.5);
    }

    #[test]
    fn efg_all_threes_made_is_upper_bound() {
        let l = line(10, 10, 10, 10, 0, 0, 0, 0);
        assert_eq!(efg(&l).unwrap(), 1.5);
    }

    #[test]
    fn efg_matches_published_chi97_ratio() {
        // Season-total ratios rounded to the published 0.511.
        let l = line(10000, 4605, 2800, 1010, 0, 0, 0, 0);
        assert!((efg(&l).unwrap() - 0.511).abs() < 1e-12);
    }

    #[test]
    fn efg_zero_attempts_errors() {
        let l = line(0, 0, 0, 0, 0, 0, 0, 0);
        assert!(matches!(efg(&l), Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn ftr_zero_makes_is_zero() {
        let l = line(10, 4, 0, 0, 5, 0, 0, 0);
        assert_eq!(ftr(&l).unwrap(), 0.0);
    }

    #[test]
    fn ftr_matches_published_uta97_ratio() {
        let l = line(10000, 5000, 0, 0, 3500, 2990, 0, 0);
        assert!((ftr(&l).unwrap() - 0.299).abs() < 1e-12);
    }

    #[test]
    fn shooting_pcts_match_published_sac23_ratios() {
        let l = line(10000, 4940, 0, 0, 1000, 790, 0, 0);
        assert!((fg_pct(&l).unwrap() - 0.494).abs() < 1e-12);
        assert!((ft_pct(&l) - 0.790).abs() < 1e-12);
    }

    #[test]
    fn ft_pct_without_attempts_is_zero() {
        let l = line(10, 4, 0, 0, 0, 0, 0, 0);
        assert_eq!(ft_pct(&l), 0.0);
    }

    #[test]
    fn orb_pct_exact_direct_ratio() {
        let mut l = line(100, 40, 0, 0, 0, 0, 30, 0);
        l.opp_drb = Some(70);
        assert_eq!(orb_pct_exact(&l).unwrap(), 0.30);
        l.orb = 0;
        assert_eq!(orb_pct_exact(&l).unwrap(), 0.0);
        l.orb = 70;
        assert_eq!(orb_pct_exact(&l).unwrap(), 0.5);
    }

    #[test]
    fn orb_pct_exact_requires_opponent_boards() {
        let l = line(100, 40, 0, 0, 0, 0, 30, 0);
        assert!(matches!(orb_pct_exact(&l), Err(Error::MissingOpponentRebounds)));
    }

    #[test]
    fn orb_pct_approx_direct_ratio() {
        let l = line(80, 40, 0, 0, 0, 0, 12, 0);
        assert_eq!(orb_pct_approx(&l).unwrap(), 0.30);
        let l0 = line(80, 40, 0, 0, 0, 0, 0, 0);
        assert_eq!(orb_pct_approx(&l0).unwrap(), 0.0);
    }

    #[test]
    fn orb_pct_approx_matches_published_chi97_ratio() {
        let l = line(10000, 5000, 0, 0, 0, 0, 1905, 0);
        assert!((orb_pct_approx(&l).unwrap() - 0.381).abs() < 1e-12);
    }

    #[test]
    fn orb_pct_approx_with_no_misses_errors() {
        let l = line(40, 40, 0, 0, 0, 0, 0, 0);
        assert!(matches!(orb_pct_approx(&l), Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn tov_variants_agree_without_offensive_boards() {
        let l = line(80, 40, 0, 0, 20, 16, 0, 12);
        let mu = 0.42;
        assert_eq!(tov_pct(&l, mu).unwrap(), tov_pct_trad(&l, mu).unwrap());
    }

    #[test]
    fn tov_zero_is_zero_under_both() {
        let l = line(80, 40, 0, 0, 20, 16, 10, 0);
        assert_eq!(tov_pct(&l, 0.42).unwrap(), 0.0);
        assert_eq!(tov_pct_trad(&l, 0.42).unwrap(), 0.0);
    }

    #[test]
    fn negative_possessions_rejected() {
        let l = line(10, 5, 0, 0, 0, 0, 30, 0);
        assert!(matches!(tov_pct(&l, 0.0), Err(Error::NegativePossessions)));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_line() -> impl Strategy<Value = BoxScoreLine> {
            (
                200u32..8000,                          // fga
                0.30f64..0.60,                         // fg share
                0.0f64..0.45,                          // three-attempt share
                0.20f64..0.45,                         // three make rate
                0u32..2500,                            // fta
                0.60f64..0.95,                         // ft make rate
                0.0f64..0.9,                           // orb share of misses
                1u32..1500,                            // tov
            )
                .prop_map(|(fga, fg_share, tpa_share, tp_rate, fta, ft_rate, orb_share, tov)| {
                    let fgm = (fga as f64 * fg_share) as u32;
                    let tpa = (fga as f64 * tpa_share) as u32;
                    let tpm = ((tpa as f64 * tp_rate) as u32).min(fgm);
                    let ftm = if fta == 0 { 0 } else { ((fta as f64 * ft_rate) as u32).max(1) };
                    let orb = ((fga - fgm) as f64 * orb_share) as u32;
                    line(fga, fgm, tpa, tpm, fta, ftm, orb, tov)
                })
        }

        proptest! {
            #[test]
            fn efg_dominates_fg_pct(l in arb_line()) {
                let e = efg(&l).unwrap();
                let f = fg_pct(&l).unwrap();
                prop_assert!(e >= f);
                if l.tpm == 0 {
                    prop_assert_eq!(e, f);
                } else {
                    prop_assert!(e > f);
                }
            }

            #[test]
            fn factors_are_scale_invariant(l in arb_line(), k in 2u32..7) {
                let scaled = BoxScoreLine {
                    fga: l.fga * k,
                    fgm: l.fgm * k,
                    tpa: l.tpa * k,
                    tpm: l.tpm * k,
                    fta: l.fta * k,
                    ftm: l.ftm * k,
                    orb: l.orb * k,
                    drb: l.drb * k,
                    tov: l.tov * k,
                    pts: l.pts * k,
                    ..l.clone()
                };
                prop_assert!((efg(&l).unwrap() - efg(&scaled).unwrap()).abs() < 1e-12);
                prop_assert!((ftr(&l).unwrap() - ftr(&scaled).unwrap()).abs() < 1e-12);
                if l.fga > l.fgm {
                    prop_assert!((orb_pct_approx(&l).unwrap() - orb_pct_approx(&scaled).unwrap()).abs() < 1e-12);
                }
                prop_assert!((tov_pct(&l, 0.42).unwrap() - tov_pct(&scaled, 0.42).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn convert_tov_matches_rescaled_definition(l in arb_line(), mu in 0.0f64..1.0) {
                let trad = tov_pct_trad(&l, mu).unwrap();
                let rescaled = convert_tov(trad, &l, mu).unwrap();
                prop_assert!((rescaled - tov_pct(&l, mu).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn approx_orb_recovers_raw_boards(l in arb_line()) {
                // orb_pct_approx * (fga - fgm) = orb exactly when no
                // free-throw boards are folded in (true by construction).
                if l.fga > l.fgm {
                    let rate = orb_pct_approx(&l).unwrap();
                    prop_assert!((rate * (l.fga - l.fgm) as f64 - l.orb as f64).abs() < 1e-9);
                }
            }
        }
    }
}
