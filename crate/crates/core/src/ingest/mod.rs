//! Parsing, validation, and normalization of box-score and play-by-play CSV
//! input into domain records.
//!
//! Two fixed CSV schemas are supported (see [`boxscore::BOX_HEADER`] and
//! [`pbp::PBP_HEADER`]). Parsing is deterministic and fails fast: the first
//! row violating a documented invariant is rejected with the rule named.

mod boxscore;
mod pbp;

pub use boxscore::{parse_box_scores, write_box_scores, BoxScoreLine, BOX_HEADER};
pub use pbp::{parse_pbp, write_pbp, EventKind, GameLog, PbpEvent, PBP_HEADER};

/// Tallies one box-score line per team from a game's event stream.
///
/// Team rebounds (the phantom boards that stitch free-throw sets together in
/// NBA-style data) are excluded from the ORB/DRB columns by default,
/// matching the box-score convention; pass `include_team_rebounds` to count
/// them. `opp_drb` is filled from the other team's defensive boards.
pub fn aggregate_box_lines(
    log: &GameLog,
    season: &str,
    include_team_rebounds: bool,
) -> Vec<BoxScoreLine> {
    let mut teams: Vec<&str> = Vec::new();
    for team in [&log.home_team, &log.away_team] {
        if !team.is_empty() {
            teams.push(team);
        }
    }

    let mut lines: Vec<BoxScoreLine> = teams
        .iter()
        .map(|team| BoxScoreLine {
            team_id: team.to_string(),
            season: season.to_string(),
            fga: 0,
            fgm: 0,
            tpa: 0,
            tpm: 0,
            fta: 0,
            ftm: 0,
            orb: 0,
            drb: 0,
            tov: 0,
            pts: 0,
            opp_drb: None,
        })
        .collect();

    for event in &log.events {
        let Some(line) = lines.iter_mut().find(|l| l.team_id == event.team_id) else {
            continue;
        };
        match &event.kind {
            EventKind::FieldGoal { made, three } => {
                line.fga += 1;
                if *three {
                    line.tpa += 1;
                }
                if *made {
                    line.fgm += 1;
                    line.pts += 2;
                    if *three {
                        line.tpm += 1;
                        line.pts += 1;
                    }
                }
            }
            EventKind::FreeThrow { made, .. } => {
                line.fta += 1;
                if *made {
                    line.ftm += 1;
                    line.pts += 1;
                }
            }
            EventKind::Turnover => line.tov += 1,
            EventKind::Rebound {
                offensive,
                team_rebound,
            } => {
                if !*team_rebound || include_team_rebounds {
                    if *offensive {
                        line.orb += 1;
                    } else {
                        line.drb += 1;
                    }
                }
            }
            EventKind::PeriodEnd => {}
        }
    }

    if lines.len() == 2 {
        let (a, b) = (lines[0].drb, lines[1].drb);
        lines[0].opp_drb = Some(b);
        lines[1].opp_drb = Some(a);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(team: &str, kind: EventKind) -> PbpEvent {
        PbpEvent {
            game_id: "g".to_string(),
            period: 1,
            clock_s: 0,
            team_id: team.to_string(),
            kind,
        }
    }

    #[test]
    fn aggregates_per_team_with_team_rebound_flag() {
        let log = GameLog {
            game_id: "g".to_string(),
            home_team: "A".to_string(),
            away_team: "B".to_string(),
            events: vec![
                ev("A", EventKind::FreeThrow { made: false, index_in_set: 1, set_size: 2, and_one: false, technical: false }),
                ev("A", EventKind::Rebound { offensive: true, team_rebound: true }),
                ev("A", EventKind::FreeThrow { made: true, index_in_set: 2, set_size: 2, and_one: false, technical: false }),
                ev("B", EventKind::FieldGoal { made: false, three: true }),
                ev("A", EventKind::Rebound { offensive: false, team_rebound: false }),
                ev("A", EventKind::FieldGoal { made: true, three: false }),
                ev("", EventKind::PeriodEnd),
            ],
        };
        let lines = aggregate_box_lines(&log, "test", false);
        let a = lines.iter().find(|l| l.team_id == "A").unwrap();
        let b = lines.iter().find(|l| l.team_id == "B").unwrap();
        assert_eq!((a.fta, a.ftm, a.fga, a.fgm, a.pts), (2, 1, 1, 1, 3));
        assert_eq!(a.orb, 0, "phantom team board excluded by default");
        assert_eq!(a.drb, 1);
        assert_eq!((b.fga, b.tpa, b.fgm), (1, 1, 0));
        assert_eq!(b.opp_drb, Some(1));
        assert_eq!(a.pts, a.ftm + 2 * a.fgm + a.tpm);

        let with_team = aggregate_box_lines(&log, "test", true);
        let a = with_team.iter().find(|l| l.team_id == "A").unwrap();
        assert_eq!(a.orb, 1, "flag folds team boards back in");
    }
}
