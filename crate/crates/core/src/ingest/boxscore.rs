//! Box-score CSV ingestion.
//!
//! Schema (exact, ordered): `team_id,season,fga,fgm,tpa,tpm,fta,ftm,orb,drb,tov,pts,opp_drb`
//! where `opp_drb` may be left empty. All counts are validated against the
//! consistency rules below before a line is accepted; `pts` in particular
//! must equal `ftm + 2*fgm + tpm`.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Exact box-score CSV header, in column order.
pub const BOX_HEADER: &str = "team_id,season,fga,fgm,tpa,tpm,fta,ftm,orb,drb,tov,pts,opp_drb";

/// One team's aggregate counting statistics for a game or season slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxScoreLine {
    pub team_id: String,
    pub season: String,
    pub fga: u32,
    pub fgm: u32,
    /// Three-point attempts.
    pub tpa: u32,
    /// Three-point makes.
    pub tpm: u32,
    pub fta: u32,
    pub ftm: u32,
    pub orb: u32,
    pub drb: u32,
    pub tov: u32,
    pub pts: u32,
    /// Opponents' defensive rebounds; required only for the exact
    /// rebounding rate.
    pub opp_drb: Option<u32>,
}

impl BoxScoreLine {
    /// Checks every count invariant, reporting the first violated rule.
    pub fn validate(&self, line: u64) -> Result<()> {
        let rule = |ok: bool, rule: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvariantViolation {
                    line,
                    rule: rule.to_string(),
                })
            }
        };
        rule(self.fgm <= self.fga, "fgm <= fga")?;
        rule(self.tpa <= self.fga, "tpa <= fga")?;
        rule(self.tpm <= self.tpa, "tpm <= tpa")?;
        rule(self.tpm <= self.fgm, "tpm <= fgm")?;
        rule(self.ftm <= self.fta, "ftm <= fta")?;
        rule(
            self.pts == self.ftm + 2 * self.fgm + self.tpm,
            "pts = ftm + 2*fgm + tpm",
        )?;
        Ok(())
    }
}

fn parse_count(field: &str, line: u64, column: &str) -> Result<u32> {
    field.parse::<u32>().map_err(|_| Error::MalformedRow {
        line,
        column: column.to_string(),
    })
}

const COLUMNS: [&str; 13] = [
    "team_id", "season", "fga", "fgm", "tpa", "tpm", "fta", "ftm", "orb", "drb", "tov", "pts",
    "opp_drb",
];

/// Parses box-score CSV from `source`, validating every line.
///
/// Rows come back in input order. The first malformed or inconsistent row
/// aborts the parse with an error naming the line and rule.
pub fn parse_box_scores<R: Read>(source: R) -> Result<Vec<BoxScoreLine>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != COLUMNS {
        return Err(Error::HeaderMismatch {
            expected: BOX_HEADER.to_string(),
            found: found.join(","),
        });
    }

    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(lines.len() as u64 + 2);
        let field = |i: usize| record.get(i).unwrap_or("");

        let opp_drb = match field(12) {
            "" => None,
            s => Some(parse_count(s, line, "opp_drb")?),
        };
        let parsed = BoxScoreLine {
            team_id: field(0).to_string(),
            season: field(1).to_string(),
            fga: parse_count(field(2), line, "fga")?,
            fgm: parse_count(field(3), line, "fgm")?,
            tpa: parse_count(field(4), line, "tpa")?,
            tpm: parse_count(field(5), line, "tpm")?,
            fta: parse_count(field(6), line, "fta")?,
            ftm: parse_count(field(7), line, "ftm")?,
            orb: parse_count(field(8), line, "orb")?,
            drb: parse_count(field(9), line, "drb")?,
            tov: parse_count(field(10), line, "tov")?,
            pts: parse_count(field(11), line, "pts")?,
            opp_drb,
        };
        parsed.validate(line)?;
        lines.push(parsed);
    }
    Ok(lines)
}

/// Writes lines in the exact ingest schema; `parse_box_scores` round-trips
/// the output byte for byte.
pub fn write_box_scores<W: Write>(out: &mut W, lines: &[BoxScoreLine]) -> Result<()> {
    writeln!(out, "{BOX_HEADER}")?;
    for l in lines {
        let opp = l.opp_drb.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            l.team_id, l.season, l.fga, l.fgm, l.tpa, l.tpm, l.fta, l.ftm, l.orb, l.drb, l.tov,
            l.pts, opp
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<BoxScoreLine>> {
        parse_box_scores(s.as_bytes())
    }

    #[test]
    fn accepts_consistent_row() {
        let csv = format!("{BOX_HEADER}\nCHI,1996-97,10,4,3,2,6,5,3,30,8,15,40\n");
        let lines = parse(&csv).unwrap();
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert_eq!(l.team_id, "CHI");
        assert_eq!(l.pts, l.ftm + 2 * l.fgm + l.tpm);
        assert_eq!(l.opp_drb, Some(40));
    }

    #[test]
    fn empty_opp_drb_is_none() {
        let csv = format!("{BOX_HEADER}\nBOS,2022-23,10,4,3,2,6,5,3,30,8,15,\n");
        let lines = parse(&csv).unwrap();
        assert_eq!(lines[0].opp_drb, None);
    }

    #[test]
    fn rejects_points_identity_violation() {
        let csv = format!("{BOX_HEADER}\nCHI,1996-97,10,4,3,2,6,5,3,30,8,16,\n");
        match parse(&csv) {
            Err(Error::InvariantViolation { line, rule }) => {
                assert_eq!(line, 2);
                assert!(rule.contains("pts"), "rule names the points identity: {rule}");
            }
            other => panic!("expected InvariantViolation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_tpm_above_fgm() {
        // tpm=5 > fgm=4
        let csv = format!("{BOX_HEADER}\nNYK,2022-23,10,4,6,5,0,0,0,30,8,13,\n");
        match parse(&csv) {
            Err(Error::InvariantViolation { rule, .. }) => assert_eq!(rule, "tpm <= fgm"),
            other => panic!("expected InvariantViolation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_header() {
        let csv = "team,season,fga,fgm,tpa,tpm,fta,ftm,orb,drb,tov,pts,opp_drb\n";
        match parse(csv) {
            Err(Error::HeaderMismatch { .. }) => {}
            other => panic!("expected HeaderMismatch, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_integer_count_with_position() {
        let csv = format!(
            "{BOX_HEADER}\nCHI,1996-97,10,4,3,2,6,5,3,30,8,15,\nUTA,1996-97,10,x,3,2,6,5,3,30,8,15,\n"
        );
        match parse(&csv) {
            Err(Error::MalformedRow { line, column }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "fgm");
            }
            other => panic!("expected MalformedRow, got {other:?}"),
        }
    }

    #[test]
    fn preserves_input_order() {
        let csv = format!(
            "{BOX_HEADER}\nB,2022-23,10,4,3,2,6,5,3,30,8,15,\nA,2022-23,10,4,3,2,6,5,3,30,8,15,\n"
        );
        let lines = parse(&csv).unwrap();
        assert_eq!(lines[0].team_id, "B");
        assert_eq!(lines[1].team_id, "A");
    }

    #[test]
    fn write_then_parse_round_trips() {
        let csv = format!(
            "{BOX_HEADER}\nCHI,1996-97,10,4,3,2,6,5,3,30,8,15,40\nBOS,2022-23,12,6,4,1,0,0,2,28,9,13,\n"
        );
        let lines = parse(&csv).unwrap();
        let mut buf = Vec::new();
        write_box_scores(&mut buf, &lines).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), csv);
        assert_eq!(parse_box_scores(&buf[..]).unwrap(), lines);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_valid_line() -> impl Strategy<Value = BoxScoreLine> {
            (
                "[A-Z]{2,4}",
                1990u32..2030,
                0u32..9000,
                0.0f64..1.0,
                0.0f64..1.0,
                0.0f64..1.0,
                0u32..3000,
                0.0f64..1.0,
                (0u32..1500, 0u32..4000, 0u32..2000),
                proptest::option::of(0u32..4000),
            )
                .prop_map(
                    |(team, year, fga, fg_share, tpa_share, tp_share, fta, ft_share, (orb, drb, tov), opp_drb)| {
                        let fgm = (fga as f64 * fg_share) as u32;
                        let tpa = (fga as f64 * tpa_share) as u32;
                        let tpm = ((tpa as f64 * tp_share) as u32).min(fgm);
                        let ftm = (fta as f64 * ft_share) as u32;
                        BoxScoreLine {
                            team_id: team,
                            season: format!("{}-{}", year, (year + 1) % 100),
                            fga,
                            fgm,
                            tpa,
                            tpm,
                            fta,
                            ftm,
                            orb,
                            drb,
                            tov,
                            pts: ftm + 2 * fgm + tpm,
                            opp_drb,
                        }
                    },
                )
        }

        proptest! {
            #[test]
            fn serialize_then_parse_is_identity(lines in proptest::collection::vec(arb_valid_line(), 1..20)) {
                let mut buf = Vec::new();
                write_box_scores(&mut buf, &lines).unwrap();
                let parsed = parse_box_scores(&buf[..]).unwrap();
                prop_assert_eq!(parsed, lines);
            }
        }
    }
}
