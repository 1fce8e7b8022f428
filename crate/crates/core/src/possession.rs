//! Exact possession counting from event streams, free-throw classification,
//! and estimation of the free-throw parameters mu, alpha, beta, epsilon.
//!
//! A possession ends at: a made field goal (unless an and-one free throw
//! follows, in which case the free throw resolves it), a defensive rebound of
//! a miss, a turnover, a made final free throw of a live set, or the end of a
//! period while the possession is live. An offensive rebound of a missed
//! final free throw continues the possession, which is what the epsilon
//! correction accounts for.
//!
//! Free throws are possession-ending exactly when they are the last of a live
//! set: `index_in_set == set_size`, not an and-one, not a technical. The
//! share of such attempts among all free throws is mu. Among possession-ending
//! attempts, beta is the make rate, alpha the offensive-rebound rate of the
//! misses, and `epsilon = alpha * (1 - beta)` the per-attempt rate at which
//! the offense keeps the ball after a missed final free throw.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{EventKind, GameLog, PbpEvent};

/// Free-throw possession parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FtParams {
    /// Share of free throws that are possession-ending.
    pub mu: f64,
    /// Offensive-rebound probability on a missed possession-ending free throw.
    pub alpha: f64,
    /// Make probability of possession-ending free throws.
    pub beta: f64,
    /// `alpha * (1 - beta)`: offensive-rebound rate per possession-ending
    /// free throw attempt.
    pub epsilon: f64,
}

impl FtParams {
    pub fn new(mu: f64, alpha: f64, beta: f64) -> Self {
        FtParams {
            mu,
            alpha,
            beta,
            epsilon: alpha * (1.0 - beta),
        }
    }
}

/// Possession counts and free-throw bookkeeping for one or more games.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PossessionTally {
    /// Completed possessions per team.
    pub possessions: BTreeMap<String, u64>,
    pub ft_total: u64,
    pub ft_possession_ending: u64,
    /// Free-throw sets started, keyed by set size.
    pub ft_set_histogram: BTreeMap<u8, u64>,
    /// Missed possession-ending free throws.
    pub ft_final_missed: u64,
    /// Missed possession-ending free throws rebounded by the offense.
    pub ft_final_missed_orb: u64,
}

impl PossessionTally {
    pub fn possessions_for(&self, team_id: &str) -> u64 {
        self.possessions.get(team_id).copied().unwrap_or(0)
    }

    /// Component-wise addition; merging per-game tallies in any order gives
    /// the same season tally.
    pub fn merge(&mut self, other: &PossessionTally) {
        for (team, n) in &other.possessions {
            *self.possessions.entry(team.clone()).or_insert(0) += n;
        }
        self.ft_total += other.ft_total;
        self.ft_possession_ending += other.ft_possession_ending;
        for (size, n) in &other.ft_set_histogram {
            *self.ft_set_histogram.entry(*size).or_insert(0) += n;
        }
        self.ft_final_missed += other.ft_final_missed;
        self.ft_final_missed_orb += other.ft_final_missed_orb;
    }
}

/// True iff the free throw can be rebounded live if missed: last of its set,
/// not an and-one, not a technical.
pub fn classify_free_throw(event: &PbpEvent) -> Result<bool> {
    match &event.kind {
        EventKind::FreeThrow {
            index_in_set,
            set_size,
            and_one,
            technical,
            ..
        } => Ok(index_in_set == set_size && !and_one && !technical),
        other => Err(Error::WrongEventKind { got: other.label() }),
    }
}

/// What kind of miss the next rebound would resolve.
enum PendingMiss {
    FieldGoal,
    /// Final free throw of a set, and-one finals included: both can be
    /// rebounded live.
    FinalFreeThrow,
    /// Mid-set miss: only an offensive (phantom team) rebound may follow.
    MidSetFreeThrow,
}

/// Counts possessions exactly by replaying the event stream of one game.
pub fn count_possessions(log: &GameLog) -> Result<PossessionTally> {
    let mut tally = PossessionTally::default();
    // Team whose possession is open, i.e. has taken an offensive action that
    // has not yet resolved. A defensive rebound hands the ball over but the
    // new possession opens only on the rebounder's first action, so an
    // event-less buzzer possession is never credited.
    let mut open: Option<String> = None;
    let mut awaiting: Option<PendingMiss> = None;

    let inconsistent = |detail: &str| Error::InconsistentStream {
        game_id: log.game_id.clone(),
        detail: detail.to_string(),
    };

    let close = |open: &mut Option<String>, tally: &mut PossessionTally| {
        if let Some(team) = open.take() {
            *tally.possessions.entry(team).or_insert(0) += 1;
        }
    };

    for (i, event) in log.events.iter().enumerate() {
        let next = log.events.get(i + 1);
        match &event.kind {
            EventKind::FieldGoal { made, .. } => {
                awaiting = None;
                if open.as_deref() != Some(&event.team_id) {
                    open = Some(event.team_id.clone());
                }
                if *made {
                    let and_one_follows = matches!(
                        next.map(|n| (&n.kind, &n.team_id)),
                        Some((EventKind::FreeThrow { and_one: true, .. }, team))
                            if *team == event.team_id
                    );
                    if !and_one_follows {
                        close(&mut open, &mut tally);
                    }
                } else {
                    awaiting = Some(PendingMiss::FieldGoal);
                }
            }
            EventKind::FreeThrow {
                made,
                index_in_set,
                set_size,
                technical,
                ..
            } => {
                tally.ft_total += 1;
                if *index_in_set == 1 {
                    *tally.ft_set_histogram.entry(*set_size).or_insert(0) += 1;
                }
                if *technical {
                    // Dead-ball attempt: no rebound, no possession change.
                    continue;
                }
                awaiting = None;
                if open.as_deref() != Some(&event.team_id) {
                    open = Some(event.team_id.clone());
                }
                let live = classify_free_throw(event)?;
                if live {
                    tally.ft_possession_ending += 1;
                }
                if *made {
                    if index_in_set == set_size {
                        close(&mut open, &mut tally);
                    }
                } else if index_in_set == set_size {
                    if live {
                        tally.ft_final_missed += 1;
                    }
                    awaiting = Some(PendingMiss::FinalFreeThrow);
                } else {
                    awaiting = Some(PendingMiss::MidSetFreeThrow);
                }
            }
            EventKind::Turnover => {
                awaiting = None;
                if open.as_deref() != Some(&event.team_id) {
                    open = Some(event.team_id.clone());
                }
                close(&mut open, &mut tally);
            }
            EventKind::Rebound { offensive, .. } => match awaiting.take() {
                None => {
                    return Err(inconsistent(
                        "rebound with no preceding miss (e.g. after a made field goal)",
                    ))
                }
                Some(PendingMiss::MidSetFreeThrow) => {
                    if !*offensive {
                        return Err(inconsistent(
                            "defensive rebound inside an unfinished free-throw set",
                        ));
                    }
                    // Phantom (or real) offensive board: the set continues.
                }
                Some(PendingMiss::FieldGoal) | Some(PendingMiss::FinalFreeThrow) => {
                    if !*offensive {
                        close(&mut open, &mut tally);
                    }
                    // Offensive board: possession continues with the offense.
                }
            },
            EventKind::PeriodEnd => {
                awaiting = None;
                close(&mut open, &mut tally);
            }
        }
        // Track offensive boards of missed possession-ending free throws for
        // the alpha estimate. Done here so the `awaiting` take() above stays
        // simple.
        if let EventKind::Rebound { offensive: true, .. } = &event.kind {
            if let Some(prev) = i.checked_sub(1).and_then(|j| log.events.get(j)) {
                if matches!(
                    &prev.kind,
                    EventKind::FreeThrow { made: false, index_in_set, set_size, and_one: false, technical: false }
                        if index_in_set == set_size
                ) {
                    tally.ft_final_missed_orb += 1;
                }
            }
        }
    }

    Ok(tally)
}

fn ft_counts(events: &[PbpEvent]) -> Result<(u64, u64)> {
    let mut total = 0;
    let mut ending = 0;
    for e in events {
        if matches!(e.kind, EventKind::FreeThrow { .. }) {
            total += 1;
            if classify_free_throw(e)? {
                ending += 1;
            }
        }
    }
    Ok((total, ending))
}

/// League-wide mu over all games: possession-ending free throws / all free
/// throws.
pub fn estimate_mu(logs: &[GameLog]) -> Result<f64> {
    let mut total = 0;
    let mut ending = 0;
    for log in logs {
        let (t, e) = ft_counts(&log.events)?;
        total += t;
        ending += e;
    }
    if total == 0 {
        return Err(Error::EmptyScope { what: "free throws" });
    }
    Ok(ending as f64 / total as f64)
}

/// Per-team mu; teams with no free throws in scope are absent from the map.
pub fn estimate_mu_by_team(logs: &[GameLog]) -> Result<BTreeMap<String, f64>> {
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for log in logs {
        for e in &log.events {
            if matches!(e.kind, EventKind::FreeThrow { .. }) {
                let entry = counts.entry(e.team_id.clone()).or_insert((0, 0));
                entry.0 += 1;
                if classify_free_throw(e)? {
                    entry.1 += 1;
                }
            }
        }
    }
    if counts.values().all(|(t, _)| *t == 0) || counts.is_empty() {
        return Err(Error::EmptyScope { what: "free throws" });
    }
    Ok(counts
        .into_iter()
        .map(|(team, (t, e))| (team, e as f64 / t as f64))
        .collect())
}

/// Estimates all free-throw parameters from play-by-play:
/// `beta` = made finals / finals, `alpha` = offensive boards of missed finals
/// / missed finals, `epsilon = alpha * (1 - beta)`.
pub fn estimate_ft_reb_params(logs: &[GameLog]) -> Result<FtParams> {
    let mut tally = PossessionTally::default();
    for log in logs {
        tally.merge(&count_possessions(log)?);
    }
    if tally.ft_possession_ending == 0 {
        return Err(Error::EmptyScope {
            what: "possession-ending free throws",
        });
    }
    let finals = tally.ft_possession_ending as f64;
    let made = (tally.ft_possession_ending - tally.ft_final_missed) as f64;
    let beta = made / finals;
    let alpha = if tally.ft_final_missed == 0 {
        0.0
    } else {
        tally.ft_final_missed_orb as f64 / tally.ft_final_missed as f64
    };
    let mu = tally.ft_possession_ending as f64 / tally.ft_total as f64;
    Ok(FtParams::new(mu, alpha, beta))
}
