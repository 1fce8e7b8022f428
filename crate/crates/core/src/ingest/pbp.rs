//! Play-by-play CSV ingestion.
//!
//! Schema: `game_id,period,clock_s,team_id,kind,made,three,index_in_set,set_size,and_one,technical,offensive,team_rebound`
//! with `kind` one of `fg`, `ft`, `tov`, `reb`, `period_end`. Columns that do
//! not apply to a kind stay empty; booleans are encoded `0`/`1`. `period_end`
//! rows carry an empty `team_id`.
//!
//! Rows may interleave game ids; events are grouped per game preserving row
//! order, and each game must be ordered by (period ascending, clock
//! descending). No `period_end` event is ever synthesized.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Exact play-by-play CSV header, in column order.
pub const PBP_HEADER: &str =
    "game_id,period,clock_s,team_id,kind,made,three,index_in_set,set_size,and_one,technical,offensive,team_rebound";

/// What happened on one play-by-play row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EventKind {
    FieldGoal {
        made: bool,
        three: bool,
    },
    FreeThrow {
        made: bool,
        /// 1-based position within the free-throw set.
        index_in_set: u8,
        set_size: u8,
        and_one: bool,
        technical: bool,
    },
    Turnover,
    Rebound {
        offensive: bool,
        /// Phantom team rebounds connect consecutive free throws in NBA data;
        /// they are excluded from player rebound tallies by default.
        team_rebound: bool,
    },
    PeriodEnd,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::FieldGoal { .. } => "fg",
            EventKind::FreeThrow { .. } => "ft",
            EventKind::Turnover => "tov",
            EventKind::Rebound { .. } => "reb",
            EventKind::PeriodEnd => "period_end",
        }
    }
}

/// One play-by-play event with its game context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PbpEvent {
    pub game_id: String,
    pub period: u32,
    /// Seconds remaining in the period.
    pub clock_s: u32,
    /// Empty for `period_end` events, which belong to no team.
    pub team_id: String,
    pub kind: EventKind,
}

/// All events of one game, ordered, with the two participating teams.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameLog {
    pub game_id: String,
    pub home_team: String,
    pub away_team: String,
    pub events: Vec<PbpEvent>,
}

impl GameLog {
    /// The other team of the game.
    pub fn opponent_of(&self, team_id: &str) -> &str {
        if team_id == self.home_team {
            &self.away_team
        } else {
            &self.home_team
        }
    }
}

fn parse_bool(field: &str, line: u64, column: &str) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::MalformedRow {
            line,
            column: column.to_string(),
        }),
    }
}

fn parse_int<T: std::str::FromStr>(field: &str, line: u64, column: &str) -> Result<T> {
    field.parse::<T>().map_err(|_| Error::MalformedRow {
        line,
        column: column.to_string(),
    })
}

const COLUMNS: [&str; 13] = [
    "game_id",
    "period",
    "clock_s",
    "team_id",
    "kind",
    "made",
    "three",
    "index_in_set",
    "set_size",
    "and_one",
    "technical",
    "offensive",
    "team_rebound",
];

/// Parses play-by-play CSV into one [`GameLog`] per game id.
///
/// Logs come back ordered by first appearance of the game id. Within a game,
/// home is the first team to appear on a row and away the second.
pub fn parse_pbp<R: Read>(source: R) -> Result<Vec<GameLog>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != COLUMNS {
        return Err(Error::HeaderMismatch {
            expected: PBP_HEADER.to_string(),
            found: found.join(","),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut games: BTreeMap<String, Vec<PbpEvent>> = BTreeMap::new();
    // (period, clock) of the previous event per game, for ordering checks.
    let mut cursor: BTreeMap<String, (u32, u32)> = BTreeMap::new();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");

        let game_id = field(0).to_string();
        let period: u32 = parse_int(field(1), line, "period")?;
        if period == 0 {
            return Err(Error::MalformedRow {
                line,
                column: "period".to_string(),
            });
        }
        let clock_s: u32 = parse_int(field(2), line, "clock_s")?;
        let team_id = field(3).to_string();

        let kind = match field(4) {
            "fg" => EventKind::FieldGoal {
                made: parse_bool(field(5), line, "made")?,
                three: parse_bool(field(6), line, "three")?,
            },
            "ft" => {
                let made = parse_bool(field(5), line, "made")?;
                let index_in_set: u8 = parse_int(field(7), line, "index_in_set")?;
                let set_size: u8 = parse_int(field(8), line, "set_size")?;
                let and_one = parse_bool(field(9), line, "and_one")?;
                let technical = parse_bool(field(10), line, "technical")?;
                if index_in_set == 0 || set_size == 0 {
                    return Err(Error::MalformedRow {
                        line,
                        column: "index_in_set".to_string(),
                    });
                }
                if index_in_set > set_size {
                    return Err(Error::DanglingFreeThrow {
                        line,
                        index: index_in_set,
                        set_size,
                    });
                }
                if and_one && set_size != 1 {
                    return Err(Error::InvariantViolation {
                        line,
                        rule: "and_one implies set_size = 1".to_string(),
                    });
                }
                EventKind::FreeThrow {
                    made,
                    index_in_set,
                    set_size,
                    and_one,
                    technical,
                }
            }
            "tov" => EventKind::Turnover,
            "reb" => EventKind::Rebound {
                offensive: parse_bool(field(11), line, "offensive")?,
                team_rebound: parse_bool(field(12), line, "team_rebound")?,
            },
            "period_end" => EventKind::PeriodEnd,
            other => {
                return Err(Error::UnknownEventKind {
                    line,
                    kind: other.to_string(),
                })
            }
        };

        if team_id.is_empty() && kind != EventKind::PeriodEnd {
            return Err(Error::MalformedRow {
                line,
                column: "team_id".to_string(),
            });
        }

        if let Some(&(last_period, last_clock)) = cursor.get(&game_id) {
            let regressed = period < last_period;
            let clock_rose = period == last_period && clock_s > last_clock;
            if regressed || clock_rose {
                return Err(Error::OrderingViolation {
                    game_id,
                    period,
                    line,
                });
            }
        }
        cursor.insert(game_id.clone(), (period, clock_s));

        if !games.contains_key(&game_id) {
            order.push(game_id.clone());
        }
        games.entry(game_id.clone()).or_default().push(PbpEvent {
            game_id,
            period,
            clock_s,
            team_id,
            kind,
        });
    }

    let mut logs = Vec::with_capacity(order.len());
    for game_id in order {
        let events = games.remove(&game_id).unwrap();
        logs.push(build_log(game_id, events)?);
    }
    Ok(logs)
}

fn build_log(game_id: String, events: Vec<PbpEvent>) -> Result<GameLog> {
    let mut home = String::new();
    let mut away = String::new();
    for e in &events {
        if e.team_id.is_empty() {
            continue;
        }
        if home.is_empty() {
            home = e.team_id.clone();
        } else if e.team_id != home && away.is_empty() {
            away = e.team_id.clone();
        } else if e.team_id != home && e.team_id != away {
            return Err(Error::UnknownTeam {
                game_id,
                team_id: e.team_id.clone(),
            });
        }
    }

    // Every period present must close with an explicit period_end row.
    for (i, e) in events.iter().enumerate() {
        let period_closes = match events.get(i + 1) {
            Some(next) => next.period != e.period,
            None => true,
        };
        if period_closes && e.kind != EventKind::PeriodEnd {
            return Err(Error::MissingPeriodEnd {
                game_id,
                period: e.period,
            });
        }
    }

    Ok(GameLog {
        game_id,
        home_team: home,
        away_team: away,
        events,
    })
}

/// Writes game logs in the exact ingest schema; `parse_pbp` round-trips the
/// output byte for byte.
pub fn write_pbp<W: Write>(out: &mut W, logs: &[GameLog]) -> Result<()> {
    writeln!(out, "{PBP_HEADER}")?;
    for log in logs {
        for e in &log.events {
            let b = |v: bool| if v { "1" } else { "0" };
            let (made, three, idx, size, and1, tech, off, team_reb) = match &e.kind {
                EventKind::FieldGoal { made, three } => (
                    b(*made).to_string(),
                    b(*three).to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ),
                EventKind::FreeThrow {
                    made,
                    index_in_set,
                    set_size,
                    and_one,
                    technical,
                } => (
                    b(*made).to_string(),
                    String::new(),
                    index_in_set.to_string(),
                    set_size.to_string(),
                    b(*and_one).to_string(),
                    b(*technical).to_string(),
                    String::new(),
                    String::new(),
                ),
                EventKind::Turnover => Default::default(),
                EventKind::Rebound {
                    offensive,
                    team_rebound,
                } => (
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    b(*offensive).to_string(),
                    b(*team_rebound).to_string(),
                ),
                EventKind::PeriodEnd => Default::default(),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                e.game_id,
                e.period,
                e.clock_s,
                e.team_id,
                e.kind.label(),
                made,
                three,
                idx,
                size,
                and1,
                tech,
                off,
                team_reb
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(
        game: &str,
        period: u32,
        clock: u32,
        team: &str,
        kind: &str,
        rest: [&str; 8],
    ) -> String {
        format!(
            "{game},{period},{clock},{team},{kind},{},{},{},{},{},{},{},{}",
            rest[0], rest[1], rest[2], rest[3], rest[4], rest[5], rest[6], rest[7]
        )
    }

    const EMPTY: [&str; 8] = ["", "", "", "", "", "", "", ""];

    fn minimal_game() -> String {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 700, "A", "fg", ["0", "0", "", "", "", "", "", ""]));
        s.push('\n');
        s.push_str(&row("g1", 1, 698, "B", "reb", ["", "", "", "", "", "", "0", "0"]));
        s.push('\n');
        s.push_str(&row("g1", 1, 650, "B", "fg", ["1", "0", "", "", "", "", "", ""]));
        s.push('\n');
        s.push_str(&row("g1", 1, 0, "", "period_end", EMPTY));
        s.push('\n');
        s
    }

    #[test]
    fn parses_minimal_game() {
        let logs = parse_pbp(minimal_game().as_bytes()).unwrap();
        assert_eq!(logs.len(), 1);
        let log = &logs[0];
        assert_eq!(log.events.len(), 4);
        assert_eq!(log.home_team, "A");
        assert_eq!(log.away_team, "B");
        assert_eq!(log.events[3].kind, EventKind::PeriodEnd);
    }

    #[test]
    fn rejects_dangling_free_throw() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 500, "A", "ft", ["1", "", "3", "2", "0", "0", "", ""]));
        s.push('\n');
        match parse_pbp(s.as_bytes()) {
            Err(Error::DanglingFreeThrow { index: 3, set_size: 2, .. }) => {}
            other => panic!("expected DanglingFreeThrow, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_event_kind() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 500, "A", "jumpball", EMPTY));
        s.push('\n');
        match parse_pbp(s.as_bytes()) {
            Err(Error::UnknownEventKind { kind, .. }) => assert_eq!(kind, "jumpball"),
            other => panic!("expected UnknownEventKind, got {other:?}"),
        }
    }

    #[test]
    fn rejects_clock_increase_within_period() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 500, "A", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 1, 501, "B", "tov", EMPTY));
        s.push('\n');
        match parse_pbp(s.as_bytes()) {
            Err(Error::OrderingViolation { period: 1, .. }) => {}
            other => panic!("expected OrderingViolation, got {other:?}"),
        }
    }

    #[test]
    fn groups_interleaved_games() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 700, "A", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g2", 1, 690, "C", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 1, 600, "B", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g2", 1, 580, "D", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 1, 0, "", "period_end", EMPTY));
        s.push('\n');
        s.push_str(&row("g2", 1, 0, "", "period_end", EMPTY));
        s.push('\n');
        let logs = parse_pbp(s.as_bytes()).unwrap();
        assert_eq!(logs.len(), 2);
        assert_eq!(logs[0].game_id, "g1");
        assert_eq!(logs[0].events.len(), 3);
        assert_eq!(logs[1].game_id, "g2");
        assert_eq!(logs[1].events.len(), 3);
        assert!(logs[1].events.windows(2).all(|w| w[0].clock_s >= w[1].clock_s));
    }

    #[test]
    fn rejects_missing_period_end() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 700, "A", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 2, 700, "B", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 2, 0, "", "period_end", EMPTY));
        s.push('\n');
        match parse_pbp(s.as_bytes()) {
            Err(Error::MissingPeriodEnd { period: 1, .. }) => {}
            other => panic!("expected MissingPeriodEnd, got {other:?}"),
        }
    }

    #[test]
    fn rejects_third_team() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 700, "A", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 1, 650, "B", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 1, 600, "C", "tov", EMPTY));
        s.push('\n');
        s.push_str(&row("g1", 1, 0, "", "period_end", EMPTY));
        s.push('\n');
        match parse_pbp(s.as_bytes()) {
            Err(Error::UnknownTeam { team_id, .. }) => assert_eq!(team_id, "C"),
            other => panic!("expected UnknownTeam, got {other:?}"),
        }
    }

    #[test]
    fn rejects_and_one_with_larger_set() {
        let mut s = format!("{PBP_HEADER}\n");
        s.push_str(&row("g1", 1, 500, "A", "ft", ["1", "", "1", "2", "1", "0", "", ""]));
        s.push('\n');
        match parse_pbp(s.as_bytes()) {
            Err(Error::InvariantViolation { rule, .. }) => {
                assert!(rule.contains("and_one"));
            }
            other => panic!("expected InvariantViolation, got {other:?}"),
        }
    }

    #[test]
    fn write_then_parse_round_trips() {
        let text = minimal_game();
        let logs = parse_pbp(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_pbp(&mut buf, &logs).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), text);
        assert_eq!(parse_pbp(&buf[..]).unwrap(), logs);
    }
}
