//! Report assembly and CSV/JSON serialization.
//!
//! Every numeric cell is rounded to six decimal places before serialization,
//! in both formats, so repeated runs over the same inputs are byte-identical
//! and CSV output re-ingests to the same values.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::{json, Map, Value};

use fourfactors::decompose::multipliers;
use fourfactors::factors::team_profile;
use fourfactors::ingest::BoxScoreLine;
use fourfactors::ratings::{estimate_possessions, ortg_box, ortg_factors, per_100};
use fourfactors::sensitivity::{
    normalized_derivatives, ortg_gradient, season_reference, weighted_sensitivities,
};
use fourfactors::Result;

/// Synthetic team id of the per-season reference row.
pub const LEAGUE_ROW_ID: &str = "LEAGUE";

/// How the mu in use was chosen, recorded in report metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuProvenance {
    Flag,
    EstimatedFromPbp,
    ConfigDefault,
    BuiltinDefault,
}

impl MuProvenance {
    pub fn label(&self) -> &'static str {
        match self {
            MuProvenance::Flag => "flag",
            MuProvenance::EstimatedFromPbp => "estimated",
            MuProvenance::ConfigDefault => "config",
            MuProvenance::BuiltinDefault => "default",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub mu: f64,
    pub mu_source: MuProvenance,
    pub per100: bool,
    pub version: &'static str,
}

/// One fully-computed row: factors, shooting, ratings, multipliers,
/// gradients, and importance weights.
#[derive(Debug, Clone)]
pub struct TeamRecord {
    pub team_id: String,
    pub season: String,
    pub efg: f64,
    pub ftr: f64,
    pub orb_pct: f64,
    pub tov_pct: f64,
    pub fg_pct: f64,
    pub ft_pct: f64,
    pub poss: f64,
    pub ortg_box: f64,
    pub ortg: f64,
    pub xposs: f64,
    pub xshot: f64,
    pub xeff: f64,
    pub xvol: f64,
    pub d_efg: f64,
    pub d_ftr: f64,
    pub d_orb: f64,
    pub d_tov: f64,
    pub nd_efg: f64,
    pub nd_ftr: f64,
    pub nd_orb: f64,
    pub nd_tov: f64,
    pub ws_efg: f64,
    pub ws_ftr: f64,
    pub ws_orb: f64,
    pub ws_tov: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub meta: ReportMeta,
    pub rows: Vec<TeamRecord>,
}

fn r6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Builds the full report: one row per input line plus one league reference
/// row per season, league row derived from the season's team rows.
pub fn build_report(lines: &[BoxScoreLine], mu: f64, meta: ReportMeta) -> Result<Report> {
    // Group by season, preserving first-appearance order.
    let mut season_order: Vec<String> = Vec::new();
    let mut by_season: BTreeMap<String, Vec<&BoxScoreLine>> = BTreeMap::new();
    for line in lines {
        if !by_season.contains_key(&line.season) {
            season_order.push(line.season.clone());
        }
        by_season.entry(line.season.clone()).or_default().push(line);
    }

    let mut rows = Vec::new();
    for season in season_order {
        let season_lines = &by_season[&season];
        let profiles = season_lines
            .iter()
            .map(|l| team_profile(l, mu))
            .collect::<Result<Vec<_>>>()?;
        let (reference, dist) = season_reference(&profiles)?;

        for (line, profile) in season_lines.iter().zip(&profiles) {
            let g = ortg_gradient(profile)?;
            let nd = normalized_derivatives(&g)?;
            let ws = weighted_or_fallback(&g, &dist, nd)?;
            let m = multipliers(profile)?;
            let rating = ortg_factors(profile)?;
            let boxed = ortg_box(line, mu)?;
            let scale = if meta.per100 { per_100(1.0) } else { 1.0 };
            rows.push(TeamRecord {
                team_id: line.team_id.clone(),
                season: season.clone(),
                efg: r6(profile.factors.efg),
                ftr: r6(profile.factors.ftr),
                orb_pct: r6(profile.factors.orb_pct),
                tov_pct: r6(profile.factors.tov_pct),
                fg_pct: r6(profile.shooting.fg_pct),
                ft_pct: r6(profile.shooting.ft_pct),
                poss: r6(estimate_possessions(line, mu)?),
                ortg_box: r6(boxed * scale),
                ortg: r6(rating * scale),
                xposs: r6(m.xposs),
                xshot: r6(m.xshot),
                xeff: r6(m.xeff),
                xvol: r6(m.xvol),
                d_efg: r6(g.d_efg),
                d_ftr: r6(g.d_ftr),
                d_orb: r6(g.d_orb),
                d_tov: r6(g.d_tov),
                nd_efg: r6(nd.efg),
                nd_ftr: r6(nd.ftr),
                nd_orb: r6(nd.orb_pct),
                nd_tov: r6(nd.tov_pct),
                ws_efg: r6(ws.efg),
                ws_ftr: r6(ws.ftr),
                ws_orb: r6(ws.orb_pct),
                ws_tov: r6(ws.tov_pct),
            });
        }

        // League reference row: mean profile of the season's teams, box
        // columns from the summed aggregates.
        let aggregate = sum_lines(season_lines, &season);
        let g = ortg_gradient(&reference)?;
        let nd = normalized_derivatives(&g)?;
        let ws = weighted_or_fallback(&g, &dist, nd)?;
        let m = multipliers(&reference)?;
        let rating = ortg_factors(&reference)?;
        let scale = if meta.per100 { per_100(1.0) } else { 1.0 };
        rows.push(TeamRecord {
            team_id: LEAGUE_ROW_ID.to_string(),
            season: season.clone(),
            efg: r6(reference.factors.efg),
            ftr: r6(reference.factors.ftr),
            orb_pct: r6(reference.factors.orb_pct),
            tov_pct: r6(reference.factors.tov_pct),
            fg_pct: r6(reference.shooting.fg_pct),
            ft_pct: r6(reference.shooting.ft_pct),
            poss: r6(estimate_possessions(&aggregate, mu)?),
            ortg_box: r6(ortg_box(&aggregate, mu)? * scale),
            ortg: r6(rating * scale),
            xposs: r6(m.xposs),
            xshot: r6(m.xshot),
            xeff: r6(m.xeff),
            xvol: r6(m.xvol),
            d_efg: r6(g.d_efg),
            d_ftr: r6(g.d_ftr),
            d_orb: r6(g.d_orb),
            d_tov: r6(g.d_tov),
            nd_efg: r6(nd.efg),
            nd_ftr: r6(nd.ftr),
            nd_orb: r6(nd.orb_pct),
            nd_tov: r6(nd.tov_pct),
            ws_efg: r6(ws.efg),
            ws_ftr: r6(ws.ftr),
            ws_orb: r6(ws.orb_pct),
            ws_tov: r6(ws.tov_pct),
        });
    }

    Ok(Report { meta, rows })
}

/// Seasons with a single team (or otherwise zero cross-team variation) have
/// no defined std weighting; the equal-stds limit, the plain normalized
/// derivatives, stands in.
fn weighted_or_fallback(
    g: &fourfactors::sensitivity::Gradient4,
    dist: &fourfactors::sensitivity::SeasonDistribution,
    fallback: fourfactors::sensitivity::FactorWeights,
) -> Result<fourfactors::sensitivity::FactorWeights> {
    match weighted_sensitivities(g, dist) {
        Ok(w) => Ok(w),
        Err(fourfactors::Error::ZeroGradient) => Ok(fallback),
        Err(e) => Err(e),
    }
}

fn sum_lines(lines: &[&BoxScoreLine], season: &str) -> BoxScoreLine {
    let mut total = BoxScoreLine {
        team_id: LEAGUE_ROW_ID.to_string(),
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
    };
    for l in lines {
        total.fga += l.fga;
        total.fgm += l.fgm;
        total.tpa += l.tpa;
        total.tpm += l.tpm;
        total.fta += l.fta;
        total.ftm += l.ftm;
        total.orb += l.orb;
        total.drb += l.drb;
        total.tov += l.tov;
        total.pts += l.pts;
    }
    total
}

/// Column views: every subcommand serializes a subset of the full record.
pub type Column = (&'static str, fn(&TeamRecord) -> Value);

fn text(v: &str) -> Value {
    Value::String(v.to_string())
}

fn num(x: f64) -> Value {
    json!(x)
}

pub const FACTOR_COLUMNS: &[Column] = &[
    ("team_id", |r| text(&r.team_id)),
    ("season", |r| text(&r.season)),
    ("efg", |r| num(r.efg)),
    ("ftr", |r| num(r.ftr)),
    ("orb_pct", |r| num(r.orb_pct)),
    ("tov_pct", |r| num(r.tov_pct)),
    ("fg_pct", |r| num(r.fg_pct)),
    ("ft_pct", |r| num(r.ft_pct)),
];

pub const RATING_COLUMNS: &[Column] = &[
    ("team_id", |r| text(&r.team_id)),
    ("season", |r| text(&r.season)),
    ("poss", |r| num(r.poss)),
    ("ortg_box", |r| num(r.ortg_box)),
    ("ortg", |r| num(r.ortg)),
];

pub const DECOMPOSE_COLUMNS: &[Column] = &[
    ("team_id", |r| text(&r.team_id)),
    ("season", |r| text(&r.season)),
    ("xposs", |r| num(r.xposs)),
    ("xshot", |r| num(r.xshot)),
    ("xeff", |r| num(r.xeff)),
    ("xvol", |r| num(r.xvol)),
    ("ortg", |r| num(r.ortg)),
];

pub const SENSITIVITY_COLUMNS: &[Column] = &[
    ("team_id", |r| text(&r.team_id)),
    ("season", |r| text(&r.season)),
    ("d_efg", |r| num(r.d_efg)),
    ("d_ftr", |r| num(r.d_ftr)),
    ("d_orb", |r| num(r.d_orb)),
    ("d_tov", |r| num(r.d_tov)),
    ("nd_efg", |r| num(r.nd_efg)),
    ("nd_ftr", |r| num(r.nd_ftr)),
    ("nd_orb", |r| num(r.nd_orb)),
    ("nd_tov", |r| num(r.nd_tov)),
    ("ws_efg", |r| num(r.ws_efg)),
    ("ws_ftr", |r| num(r.ws_ftr)),
    ("ws_orb", |r| num(r.ws_orb)),
    ("ws_tov", |r| num(r.ws_tov)),
];

pub const REPORT_COLUMNS: &[Column] = &[
    ("team_id", |r| text(&r.team_id)),
    ("season", |r| text(&r.season)),
    ("efg", |r| num(r.efg)),
    ("ftr", |r| num(r.ftr)),
    ("orb_pct", |r| num(r.orb_pct)),
    ("tov_pct", |r| num(r.tov_pct)),
    ("fg_pct", |r| num(r.fg_pct)),
    ("ft_pct", |r| num(r.ft_pct)),
    ("poss", |r| num(r.poss)),
    ("ortg_box", |r| num(r.ortg_box)),
    ("ortg", |r| num(r.ortg)),
    ("xposs", |r| num(r.xposs)),
    ("xshot", |r| num(r.xshot)),
    ("xeff", |r| num(r.xeff)),
    ("xvol", |r| num(r.xvol)),
    ("d_efg", |r| num(r.d_efg)),
    ("d_ftr", |r| num(r.d_ftr)),
    ("d_orb", |r| num(r.d_orb)),
    ("d_tov", |r| num(r.d_tov)),
    ("nd_efg", |r| num(r.nd_efg)),
    ("nd_ftr", |r| num(r.nd_ftr)),
    ("nd_orb", |r| num(r.nd_orb)),
    ("nd_tov", |r| num(r.nd_tov)),
    ("ws_efg", |r| num(r.ws_efg)),
    ("ws_ftr", |r| num(r.ws_ftr)),
    ("ws_orb", |r| num(r.ws_orb)),
    ("ws_tov", |r| num(r.ws_tov)),
];

fn cell_to_csv(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => format!("{:.6}", n.as_f64().unwrap_or(0.0)),
        other => other.to_string(),
    }
}

/// CSV with `#` metadata comment lines on top.
pub fn write_csv<W: Write>(
    out: &mut W,
    report: &Report,
    columns: &[Column],
) -> std::io::Result<()> {
    writeln!(out, "# fourfactors v{}", report.meta.version)?;
    writeln!(
        out,
        "# mu={:.6} mu_source={} per100={}",
        report.meta.mu,
        report.meta.mu_source.label(),
        report.meta.per100
    )?;
    let header: Vec<&str> = columns.iter().map(|(name, _)| *name).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in &report.rows {
        let cells: Vec<String> = columns.iter().map(|(_, f)| cell_to_csv(&f(row))).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Pretty JSON: `{"metadata": ..., "rows": [...]}` with the same rounding.
pub fn write_json<W: Write>(
    out: &mut W,
    report: &Report,
    columns: &[Column],
) -> std::io::Result<()> {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, f) in columns {
                obj.insert(name.to_string(), f(row));
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "metadata": {
            "version": report.meta.version,
            "mu": report.meta.mu,
            "mu_source": report.meta.mu_source.label(),
            "per100": report.meta.per100,
        },
        "rows": rows,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)
}
