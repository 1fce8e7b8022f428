//! Analytic gradients of the closed-form rating, finite-difference
//! verification, and importance weights for the four factors.
//!
//! With D = 1 - ORB%*(1 - FG%) + mu*FTr/FT%, the partials of ORTG are
//!
//!   d/d(eFG%) =  2*(1 - TOV%) / D
//!   d/d(FTr)  =  (1 - TOV%)*(1 - ORB%*(1 - FG%) - 2*mu*eFG%/FT%) / D^2
//!   d/d(ORB%) =  (1 - TOV%)*(1 - FG%)*(FTr + 2*eFG%) / D^2
//!   d/d(TOV%) = -(FTr + 2*eFG%) / D
//!
//! FG% and FT% are held fixed: the gradient asks what happens when a factor
//! moves on its own. Defensive gradients are the same expressions on the
//! opponent profile, and the net-rating blocks are the offensive gradient
//! and the negated defensive gradient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::{FourFactors, ShootingPct, TeamProfile};
use crate::ratings::{denominator, ortg_factors};

/// Partial derivatives of a rating with respect to the four factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gradient4 {
    pub d_efg: f64,
    pub d_ftr: f64,
    pub d_orb: f64,
    pub d_tov: f64,
}

impl Gradient4 {
    pub fn as_array(&self) -> [f64; 4] {
        [self.d_efg, self.d_ftr, self.d_orb, self.d_tov]
    }

    pub fn negated(&self) -> Gradient4 {
        Gradient4 {
            d_efg: -self.d_efg,
            d_ftr: -self.d_ftr,
            d_orb: -self.d_orb,
            d_tov: -self.d_tov,
        }
    }
}

/// Normalized importance weights per factor, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorWeights {
    pub efg: f64,
    pub ftr: f64,
    pub orb_pct: f64,
    pub tov_pct: f64,
}

impl FactorWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.efg, self.ftr, self.orb_pct, self.tov_pct]
    }
}

/// Mean, population standard deviation, and range of one factor over a
/// season of teams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-factor season statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeasonDistribution {
    pub efg: FactorStats,
    pub ftr: FactorStats,
    pub orb_pct: FactorStats,
    pub tov_pct: FactorStats,
}

impl SeasonDistribution {
    pub fn stds(&self) -> [f64; 4] {
        [self.efg.std, self.ftr.std, self.orb_pct.std, self.tov_pct.std]
    }
}

/// Analytic gradient of the offensive rating at a profile.
pub fn ortg_gradient(profile: &TeamProfile) -> Result<Gradient4> {
    let f = &profile.factors;
    let s = &profile.shooting;
    let d = denominator(profile, profile.mu)?;
    let d2 = d * d;
    let shot_value = f.ftr + 2.0 * f.efg;
    let keep = 1.0 - f.tov_pct;

    let ft_coupling = if profile.mu == 0.0 {
        0.0
    } else {
        2.0 * profile.mu * f.efg / s.ft_pct
    };
    let g = Gradient4 {
        d_efg: 2.0 * keep / d,
        d_ftr: keep * (1.0 - f.orb_pct * (1.0 - s.fg_pct) - ft_coupling) / d2,
        d_orb: keep * (1.0 - s.fg_pct) * shot_value / d2,
        d_tov: -shot_value / d,
    };
    if g.as_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(g)
}

/// Defensive gradient: the offensive formulas on the opponent profile.
pub fn drtg_gradient(opp_profile: &TeamProfile) -> Result<Gradient4> {
    ortg_gradient(opp_profile)
}

/// Net-rating gradient blocks: (with respect to own factors, with respect to
/// opponent factors). The defensive block is the negated defensive gradient.
pub fn net_gradients(profile: &TeamProfile, opp_profile: &TeamProfile) -> Result<(Gradient4, Gradient4)> {
    Ok((ortg_gradient(profile)?, drtg_gradient(opp_profile)?.negated()))
}

/// Valid open domain per factor, in gradient order.
const FACTOR_BOUNDS: [(&str, f64, f64); 4] = [
    ("efg", 0.0, 1.5),
    ("ftr", 0.0, f64::INFINITY),
    ("orb_pct", 0.0, 1.0),
    ("tov_pct", 0.0, 1.0),
];

fn with_factor(profile: &TeamProfile, i: usize, value: f64) -> TeamProfile {
    let mut p = *profile;
    match i {
        0 => p.factors.efg = value,
        1 => p.factors.ftr = value,
        2 => p.factors.orb_pct = value,
        _ => p.factors.tov_pct = value,
    }
    p
}

fn factor_value(profile: &TeamProfile, i: usize) -> f64 {
    match i {
        0 => profile.factors.efg,
        1 => profile.factors.ftr,
        2 => profile.factors.orb_pct,
        _ => profile.factors.tov_pct,
    }
}

/// Central-difference gradient with step `h`, holding FG%/FT% fixed. The
/// verification oracle for [`ortg_gradient`].
pub fn finite_diff_gradient(profile: &TeamProfile, h: f64) -> Result<Gradient4> {
    if h <= 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("step must be positive, got {h}"),
        });
    }
    let mut parts = [0.0; 4];
    for i in 0..4 {
        let x = factor_value(profile, i);
        let (name, lo, hi) = FACTOR_BOUNDS[i];
        if x - h < lo || x + h > hi {
            return Err(Error::DomainExit {
                factor: name,
                value: if x - h < lo { x - h } else { x + h },
            });
        }
        let up = ortg_factors(&with_factor(profile, i, x + h))?;
        let down = ortg_factors(&with_factor(profile, i, x - h))?;
        parts[i] = (up - down) / (2.0 * h);
    }
    Ok(Gradient4 {
        d_efg: parts[0],
        d_ftr: parts[1],
        d_orb: parts[2],
        d_tov: parts[3],
    })
}

/// Absolute derivatives rescaled to sum to one.
pub fn normalized_derivatives(g: &Gradient4) -> Result<FactorWeights> {
    weights_of(g.as_array())
}

/// Element-wise |derivative| * std, rescaled to sum to one. Equal stds reduce
/// this to [`normalized_derivatives`].
pub fn weighted_sensitivities(g: &Gradient4, dist: &SeasonDistribution) -> Result<FactorWeights> {
    let stds = dist.stds();
    let mut products = g.as_array();
    for (p, s) in products.iter_mut().zip(stds) {
        *p *= s;
    }
    weights_of(products)
}

fn weights_of(values: [f64; 4]) -> Result<FactorWeights> {
    let mags = values.map(f64::abs);
    let total: f64 = mags.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroGradient);
    }
    Ok(FactorWeights {
        efg: mags[0] / total,
        ftr: mags[1] / total,
        orb_pct: mags[2] / total,
        tov_pct: mags[3] / total,
    })
}

/// Component-wise mean profile of a season plus per-factor distribution
/// statistics (population standard deviation).
pub fn season_reference(profiles: &[TeamProfile]) -> Result<(TeamProfile, SeasonDistribution)> {
    if profiles.is_empty() {
        return Err(Error::EmptyScope { what: "team profiles" });
    }
    let n = profiles.len() as f64;
    let mean = |f: &dyn Fn(&TeamProfile) -> f64| profiles.iter().map(f).sum::<f64>() / n;

    let stats = |f: &dyn Fn(&TeamProfile) -> f64| {
        let m = mean(f);
        let var = profiles.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>() / n;
        FactorStats {
            mean: m,
            std: var.sqrt(),
            min: profiles.iter().map(f).fold(f64::INFINITY, f64::min),
            max: profiles.iter().map(f).fold(f64::NEG_INFINITY, f64::max),
        }
    };

    let reference = TeamProfile {
        factors: FourFactors {
            efg: mean(&|p: &TeamProfile| p.factors.efg),
            ftr: mean(&|p: &TeamProfile| p.factors.ftr),
            orb_pct: mean(&|p: &TeamProfile| p.factors.orb_pct),
            tov_pct: mean(&|p: &TeamProfile| p.factors.tov_pct),
        },
        shooting: ShootingPct {
            fg_pct: mean(&|p: &TeamProfile| p.shooting.fg_pct),
            ft_pct: mean(&|p: &TeamProfile| p.shooting.ft_pct),
        },
        mu: mean(&|p: &TeamProfile| p.mu),
    };
    let dist = SeasonDistribution {
        efg: stats(&|p: &TeamProfile| p.factors.efg),
        ftr: stats(&|p: &TeamProfile| p.factors.ftr),
        orb_pct: stats(&|p: &TeamProfile| p.factors.orb_pct),
        tov_pct: stats(&|p: &TeamProfile| p.factors.tov_pct),
    };
    Ok((reference, dist))
}

/// The eFG% at which the FTr and ORB% partials cross, other inputs held at
/// the reference. Closed form of a linear equation in eFG%:
///
///   e* = (1 - (1 - FG%)*(ORB% + FTr)) / (2*(mu/FT% + 1 - FG%))
pub fn crossover_efg(reference: &TeamProfile) -> Result<f64> {
    let f = &reference.factors;
    let s = &reference.shooting;
    let miss = 1.0 - s.fg_pct;
    let ft_slope = if reference.mu == 0.0 { 0.0 } else { reference.mu / s.ft_pct };
    let numer = 1.0 - miss * (f.orb_pct + f.ftr);
    let denom = 2.0 * (ft_slope + miss);
    let root = numer / denom;
    if !root.is_finite() || root <= 0.0 || root >= 1.5 {
        return Err(Error::NoCrossover);
    }
    Ok(root)
}
