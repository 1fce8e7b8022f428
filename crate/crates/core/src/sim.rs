//! Seeded possession simulator used as an independent oracle.
//!
//! The generator walks the possession grammar directly: a possession either
//! ends in a turnover or runs attempt stages (field goal or free-throw trip)
//! until the ball is dead, with offensive rebounds re-entering the stage
//! loop. It emits a real event stream plus the matching box-score aggregate,
//! so the possession counter, the free-throw classifier, the mu estimator,
//! and both rating routes are all exercised by one run.
//!
//! Determinism: ChaCha8 with a 64-bit seed; replicate `k` of a run uses
//! stream `k` of the same seed. Identical (seed, stream) pairs produce
//! bit-identical output on every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factors::{team_profile, TeamProfile};
use crate::ingest::{BoxScoreLine, EventKind, GameLog, PbpEvent};
use crate::possession::{count_possessions, estimate_ft_reb_params, FtParams};
use crate::ratings::{ortg_factors, ortg_factors_eps};

/// Generator parameters. All probabilities are per-event; the derived
/// expectation of every factor has a closed form (see
/// [`GenParams::expected_profile`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Per-possession turnover probability.
    pub p_tov: f64,
    /// Share of field goal attempts that are threes.
    pub p_three: f64,
    /// Make probability of a two-point attempt.
    pub p2: f64,
    /// Make probability of a three-point attempt.
    pub p3: f64,
    /// Probability an attempt stage is a free-throw trip.
    pub p_ftrip: f64,
    /// Set-kind distribution of a trip: [and-one, two shots, three shots].
    pub set_dist: [f64; 3],
    /// Free-throw make probability.
    pub p_ft: f64,
    /// Offensive-rebound probability on a missed field goal.
    pub p_orb_fg: f64,
    /// Offensive-rebound probability on a missed final free throw.
    pub p_orb_ft: f64,
    pub seed: u64,
    pub n_possessions: u64,
}

impl GenParams {
    /// Parameters calibrated so the expected factors land on the NBA 2022-23
    /// league averages (eFG .545, FTr .208, ORB% .268, TOV% .138, FG% .475,
    /// FT% .782) with an expected mu of exactly 0.42.
    pub fn nba_2022_23_like(seed: u64, n_possessions: u64) -> GenParams {
        GenParams {
            p_tov: 0.138,
            p_three: 0.39,
            p2: 0.539378,
            p3: 0.345039,
            p_ftrip: 0.119629,
            set_dist: [0.16, 0.68, 0.16],
            p_ft: 0.782,
            p_orb_fg: 0.264469,
            p_orb_ft: 0.076,
            seed,
            n_possessions,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("p_tov", self.p_tov),
            ("p_three", self.p_three),
            ("p2", self.p2),
            ("p3", self.p3),
            ("p_ftrip", self.p_ftrip),
            ("set_dist[0]", self.set_dist[0]),
            ("set_dist[1]", self.set_dist[1]),
            ("set_dist[2]", self.set_dist[2]),
            ("p_ft", self.p_ft),
            ("p_orb_fg", self.p_orb_fg),
            ("p_orb_ft", self.p_orb_ft),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams {
                    reason: format!("{name} = {p} is not a probability"),
                });
            }
        }
        let sum: f64 = self.set_dist.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams {
                reason: format!("set_dist sums to {sum}, expected 1"),
            });
        }
        if self.n_possessions == 0 || self.n_possessions > u32::MAX as u64 {
            return Err(Error::InvalidParams {
                reason: format!("n_possessions = {} out of range", self.n_possessions),
            });
        }
        if self.reentry_rate() >= 1.0 - 1e-9 {
            return Err(Error::InvalidParams {
                reason: "offensive-rebound loop does not terminate".to_string(),
            });
        }
        Ok(())
    }

    /// Probability that an attempt stage re-enters the loop via an offensive
    /// rebound.
    fn reentry_rate(&self) -> f64 {
        let f = self.p_ftrip;
        let fg_make = self.p_three * self.p3 + (1.0 - self.p_three) * self.p2;
        let live_sets = self.set_dist[1] + self.set_dist[2];
        (1.0 - f) * (1.0 - fg_make) * self.p_orb_fg
            + f * live_sets * (1.0 - self.p_ft) * self.p_orb_ft
    }

    /// Analytic share of free throws that are possession-ending.
    pub fn expected_mu(&self) -> f64 {
        let [s1, s2, s3] = self.set_dist;
        let fta = s1 + 2.0 * s2 + 3.0 * s3;
        if fta == 0.0 {
            0.0
        } else {
            (s2 + s3) / fta
        }
    }

    /// Closed-form expected team profile implied by the parameters.
    pub fn expected_profile(&self) -> Result<TeamProfile> {
        let f = self.p_ftrip;
        let [s1, s2, s3] = self.set_dist;
        let fg_make = self.p_three * self.p3 + (1.0 - self.p_three) * self.p2;
        let stages = (1.0 - self.p_tov) / (1.0 - self.reentry_rate());

        let fga = stages * ((1.0 - f) + f * s1);
        let fgm = stages * ((1.0 - f) * fg_make + f * s1);
        let tpm = stages * self.p_three * ((1.0 - f) * self.p3 + f * s1);
        let fta = stages * f * (s1 + 2.0 * s2 + 3.0 * s3);
        let ftm = fta * self.p_ft;
        let orb = stages * self.reentry_rate();

        if fga <= 0.0 || fga <= fgm {
            return Err(Error::DivisionByZero {
                what: "expected factors",
            });
        }
        Ok(TeamProfile::new(
            (fgm + 0.5 * tpm) / fga,
            ftm / fga,
            orb / (fga - fgm),
            self.p_tov,
            fgm / fga,
            if fta > 0.0 { self.p_ft } else { 0.0 },
            self.expected_mu(),
        ))
    }
}

/// One simulated run: the event stream and its box-score aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub log: GameLog,
    pub line: BoxScoreLine,
}

enum SetKind {
    AndOne,
    Live(u8),
}

struct Tape {
    events: Vec<PbpEvent>,
    game_id: String,
    team: String,
    opp: String,
    clock: u32,
    fga: u32,
    fgm: u32,
    tpa: u32,
    tpm: u32,
    fta: u32,
    ftm: u32,
    orb: u32,
    opp_drb: u32,
    tov: u32,
    pts: u32,
}

impl Tape {
    fn push(&mut self, team_is_offense: bool, kind: EventKind) {
        let team_id = if team_is_offense {
            self.team.clone()
        } else {
            self.opp.clone()
        };
        self.events.push(PbpEvent {
            game_id: self.game_id.clone(),
            period: 1,
            clock_s: self.clock,
            team_id,
            kind,
        });
    }

    fn field_goal(&mut self, made: bool, three: bool) {
        self.push(true, EventKind::FieldGoal { made, three });
        self.fga += 1;
        if three {
            self.tpa += 1;
        }
        if made {
            self.fgm += 1;
            self.pts += 2;
            if three {
                self.tpm += 1;
                self.pts += 1;
            }
        }
    }

    fn free_throw(&mut self, made: bool, index: u8, size: u8, and_one: bool) {
        self.push(
            true,
            EventKind::FreeThrow {
                made,
                index_in_set: index,
                set_size: size,
                and_one,
                technical: false,
            },
        );
        self.fta += 1;
        if made {
            self.ftm += 1;
            self.pts += 1;
        }
    }

    fn offensive_board(&mut self, phantom: bool) {
        self.push(
            true,
            EventKind::Rebound {
                offensive: true,
                team_rebound: phantom,
            },
        );
        if !phantom {
            self.orb += 1;
        }
    }

    fn defensive_board(&mut self) {
        self.push(
            false,
            EventKind::Rebound {
                offensive: false,
                team_rebound: false,
            },
        );
        self.opp_drb += 1;
    }
}

/// Simulates with default identities (`game_id` "sim", team "SIM" vs "OPP").
pub fn simulate(params: &GenParams) -> Result<SimOutput> {
    simulate_with(params, 0, "sim", "SIM", "OPP", "sim")
}

/// Simulates one run on RNG stream `stream` of the seed, with explicit ids.
pub fn simulate_with(
    params: &GenParams,
    stream: u64,
    game_id: &str,
    team_id: &str,
    opp_id: &str,
    season: &str,
) -> Result<SimOutput> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stream);

    let n = params.n_possessions;
    let mut tape = Tape {
        events: Vec::with_capacity(n as usize * 2),
        game_id: game_id.to_string(),
        team: team_id.to_string(),
        opp: opp_id.to_string(),
        clock: 0,
        fga: 0,
        fgm: 0,
        tpa: 0,
        tpm: 0,
        fta: 0,
        ftm: 0,
        orb: 0,
        opp_drb: 0,
        tov: 0,
        pts: 0,
    };

    for i in 0..n {
        tape.clock = (n - i) as u32;
        run_possession(params, &mut rng, &mut tape);
    }
    tape.clock = 0;
    tape.events.push(PbpEvent {
        game_id: game_id.to_string(),
        period: 1,
        clock_s: 0,
        team_id: String::new(),
        kind: EventKind::PeriodEnd,
    });

    let line = BoxScoreLine {
        team_id: team_id.to_string(),
        season: season.to_string(),
        fga: tape.fga,
        fgm: tape.fgm,
        tpa: tape.tpa,
        tpm: tape.tpm,
        fta: tape.fta,
        ftm: tape.ftm,
        orb: tape.orb,
        drb: 0,
        tov: tape.tov,
        pts: tape.pts,
        opp_drb: Some(tape.opp_drb),
    };
    debug_assert_eq!(line.pts, line.ftm + 2 * line.fgm + line.tpm);

    let log = GameLog {
        game_id: game_id.to_string(),
        home_team: team_id.to_string(),
        away_team: opp_id.to_string(),
        events: tape.events,
    };
    Ok(SimOutput { log, line })
}

fn pick_set(params: &GenParams, rng: &mut ChaCha8Rng) -> SetKind {
    let roll: f64 = rng.random();
    if roll < params.set_dist[0] {
        SetKind::AndOne
    } else if roll < params.set_dist[0] + params.set_dist[1] {
        SetKind::Live(2)
    } else {
        SetKind::Live(3)
    }
}

fn run_possession(params: &GenParams, rng: &mut ChaCha8Rng, tape: &mut Tape) {
    if rng.random_bool(params.p_tov) {
        tape.push(true, EventKind::Turnover);
        tape.tov += 1;
        return;
    }
    loop {
        if rng.random_bool(params.p_ftrip) {
            match pick_set(params, rng) {
                SetKind::AndOne => {
                    // The fouled shot goes in; the bonus free throw resolves
                    // the possession either way.
                    let three = rng.random_bool(params.p_three);
                    tape.field_goal(true, three);
                    let made = rng.random_bool(params.p_ft);
                    tape.free_throw(made, 1, 1, true);
                    if !made {
                        tape.defensive_board();
                    }
                    return;
                }
                SetKind::Live(size) => {
                    for index in 1..size {
                        let made = rng.random_bool(params.p_ft);
                        tape.free_throw(made, index, size, false);
                        if !made {
                            // Phantom team board keeps the set alive.
                            tape.offensive_board(true);
                        }
                    }
                    let made = rng.random_bool(params.p_ft);
                    tape.free_throw(made, size, size, false);
                    if made {
                        return;
                    }
                    if rng.random_bool(params.p_orb_ft) {
                        tape.offensive_board(false);
                        continue;
                    }
                    tape.defensive_board();
                    return;
                }
            }
        } else {
            let three = rng.random_bool(params.p_three);
            let make_p = if three { params.p3 } else { params.p2 };
            let made = rng.random_bool(make_p);
            tape.field_goal(made, three);
            if made {
                return;
            }
            if rng.random_bool(params.p_orb_fg) {
                tape.offensive_board(false);
                continue;
            }
            tape.defensive_board();
            return;
        }
    }
}

/// Outcome of the epsilon-identity check on one simulated stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsIdentityReport {
    /// Free-throw parameters measured from the stream.
    pub measured: FtParams,
    /// Points per exactly-counted possession.
    pub ortg_exact: f64,
    /// Closed form with the field-goal-only rebounding rate, epsilon = 0.
    pub ortg_base: f64,
    /// Closed form with the measured epsilon correction.
    pub ortg_corrected: f64,
    pub residual_base: f64,
    pub residual_corrected: f64,
}

/// Simulates a stream and checks that the epsilon-corrected closed form
/// recovers the exact rating when final free throws get rebounded.
///
/// The profile uses the field-goal-only rebounding rate (free-throw boards
/// removed from the numerator), which is what the epsilon correction is for.
pub fn verify_eps_identity(params: &GenParams) -> Result<EpsIdentityReport> {
    let out = simulate(params)?;
    let tally = count_possessions(&out.log)?;
    if tally.ft_final_missed == 0 {
        return Err(Error::EmptyScope {
            what: "missed final free throws",
        });
    }
    let measured = estimate_ft_reb_params(std::slice::from_ref(&out.log))?;

    let exact_poss = tally.possessions_for(&out.line.team_id) as f64;
    let ortg_exact = out.line.pts as f64 / exact_poss;

    let mut profile = team_profile(&out.line, measured.mu)?;
    let fg_only_orb = out.line.orb - tally.ft_final_missed_orb as u32;
    profile.factors.orb_pct = fg_only_orb as f64 / (out.line.fga - out.line.fgm) as f64;

    let ortg_base = ortg_factors(&profile)?;
    let ortg_corrected = ortg_factors_eps(&profile, measured.epsilon)?;
    Ok(EpsIdentityReport {
        measured,
        ortg_exact,
        ortg_base,
        ortg_corrected,
        residual_base: (ortg_base - ortg_exact).abs(),
        residual_corrected: (ortg_corrected - ortg_exact).abs(),
    })
}
