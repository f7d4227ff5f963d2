//! Per-class and total summaries of campaign results, rendered as a table,
//! JSON or CSV.
//!
//! All ratios are kept exact and rounded only when rendered.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::MutantResult;
use crate::frontend::ast::MethodRef;
use crate::interp::CostMode;
use crate::mutantgen::MutantRecord;
use crate::selection::Strategy;

pub type Rational = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("no results for the full test suite; run `--strategy full` first")]
    MissingBaseline,
    #[error("{strategy} results do not cover mutant `{mutant}`")]
    MissingResult { strategy: Strategy, mutant: String },
    #[error("{strategy} results name unknown mutant `{mutant}`")]
    UnknownMutant { strategy: Strategy, mutant: String },
    #[error("{strategy} kills a focal mutant of {group} that the full suite does not")]
    NotMonotone { strategy: Strategy, group: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!(
                "unknown format `{other}` (expected table, json or csv)"
            )),
        }
    }
}

mod ratio_text {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn to_text(r: &Rational) -> String {
        format!("{}/{}", r.numer(), r.denom())
    }

    pub fn from_text(s: &str) -> Result<Rational, String> {
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| format!("`{s}` is not n/d"))?;
        let n: u64 = n.parse().map_err(|_| format!("bad numerator in `{s}`"))?;
        let d: u64 = d.parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if d == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Rational::new(n, d))
    }

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&to_text(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| from_text(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// One (class, technique) line. `class` is `None` for the total over all classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub class: Option<String>,
    pub technique: Strategy,
    pub mutants: u64,
    pub killed: u64,
    /// Mutants located in methods that are focal for at least one test.
    pub focal_mutants: u64,
    pub focal_killed: u64,
    pub false_negatives: u64,
    pub tests_considered: u64,
    #[serde(with = "ratio_text")]
    pub avg_tests_considered: Option<Rational>,
    pub run_time_steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_time_wall_micros: Option<u64>,
    #[serde(with = "ratio_text")]
    pub speed_up: Option<Rational>,
    #[serde(with = "ratio_text")]
    pub mutation_score: Option<Rational>,
    #[serde(with = "ratio_text")]
    pub quality_vs_full: Option<Rational>,
    #[serde(with = "ratio_text")]
    pub quality_vs_all: Option<Rational>,
    #[serde(with = "ratio_text")]
    pub focal_coverage: Option<Rational>,
}

impl ReportRow {
    pub fn class_label(&self) -> &str {
        self.class.as_deref().unwrap_or("Total")
    }

    fn run_time(&self, mode: CostMode) -> Option<u64> {
        match mode {
            CostMode::Steps => Some(self.run_time_steps),
            CostMode::Wall => self.run_time_wall_micros,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub cost_mode: CostMode,
    pub rows: Vec<ReportRow>,
    /// Measured wall time per row, shown next to step counts in tables.
    /// Never persisted under the step cost model.
    #[serde(skip)]
    pub measured_wall_micros: BTreeMap<(Option<String>, Strategy), u64>,
}

impl CampaignReport {
    pub fn row(&self, class: Option<&str>, technique: Strategy) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.class.as_deref() == class && r.technique == technique)
    }

    pub fn total(&self, technique: Strategy) -> Option<&ReportRow> {
        self.row(None, technique)
    }
}

pub struct ReportInput<'a> {
    pub mutants: &'a [MutantRecord],
    pub results: &'a BTreeMap<Strategy, Vec<MutantResult>>,
    /// Methods that are focal for at least one test.
    pub focal_methods: &'a BTreeSet<MethodRef>,
    pub cost_mode: CostMode,
}

fn ratio(n: u64, d: u64) -> Option<Rational> {
    (d != 0).then(|| Rational::new(n, d))
}

#[derive(Default, Clone, Copy)]
struct Tally {
    mutants: u64,
    killed: u64,
    focal_mutants: u64,
    focal_killed: u64,
    considered: u64,
    steps: u64,
    wall: Option<u64>,
}

fn tally<'a>(
    members: impl Iterator<Item = (&'a MutantRecord, &'a MutantResult)>,
    focal: &BTreeSet<MethodRef>,
) -> Tally {
    let mut t = Tally {
        wall: Some(0),
        ..Tally::default()
    };
    for (m, r) in members {
        let in_focal = focal.contains(&m.method_ref());
        let killed = r.status.is_killed();
        t.mutants += 1;
        t.killed += killed as u64;
        t.focal_mutants += in_focal as u64;
        t.focal_killed += (in_focal && killed) as u64;
        t.considered += r.tests_considered as u64;
        t.steps += r.cost_steps;
        t.wall = t.wall.zip(r.wall_micros).map(|(a, b)| a + b);
    }
    t
}

/// Aggregates results into per-class rows followed by total rows.
///
/// Classes appear in the order of their first mutant; techniques in
/// full, class, focal order, limited to those with results.
pub fn compute_report(input: &ReportInput<'_>) -> Result<CampaignReport, ReportError> {
    if !input.results.contains_key(&Strategy::Full) {
        return Err(ReportError::MissingBaseline);
    }
    let known: BTreeSet<&str> = input.mutants.iter().map(|m| m.id.as_str()).collect();
    let mut by_id: BTreeMap<Strategy, BTreeMap<&str, &MutantResult>> = BTreeMap::new();
    for (&strategy, results) in input.results {
        let map: BTreeMap<&str, &MutantResult> =
            results.iter().map(|r| (r.mutant.as_str(), r)).collect();
        if let Some(extra) = map.keys().find(|id| !known.contains(*id)) {
            return Err(ReportError::UnknownMutant {
                strategy,
                mutant: extra.to_string(),
            });
        }
        if let Some(m) = input
            .mutants
            .iter()
            .find(|m| !map.contains_key(m.id.as_str()))
        {
            return Err(ReportError::MissingResult {
                strategy,
                mutant: m.id.clone(),
            });
        }
        by_id.insert(strategy, map);
    }

    let mut classes: Vec<&str> = Vec::new();
    for m in input.mutants {
        if !classes.contains(&m.class.as_str()) {
            classes.push(&m.class);
        }
    }
    let groups = classes
        .iter()
        .map(|c| Some(c.to_string()))
        .chain((!classes.is_empty()).then_some(None));

    let wall_mode = input.cost_mode == CostMode::Wall;
    let mut rows = Vec::new();
    for group in groups {
        let members: Vec<&MutantRecord> = input
            .mutants
            .iter()
            .filter(|m| group.as_deref().is_none_or(|c| m.class == c))
            .collect();
        let tallies: BTreeMap<Strategy, Tally> = by_id
            .iter()
            .map(|(&s, map)| {
                let t = tally(
                    members.iter().map(|m| (*m, map[m.id.as_str()])),
                    input.focal_methods,
                );
                (s, t)
            })
            .collect();
        let full = tallies[&Strategy::Full];
        let full_time = if wall_mode {
            full.wall
        } else {
            Some(full.steps)
        };
        for (&strategy, t) in &tallies {
            let false_negatives =
                full.focal_killed
                    .checked_sub(t.focal_killed)
                    .ok_or_else(|| ReportError::NotMonotone {
                        strategy,
                        group: group.clone().unwrap_or_else(|| "the total".into()),
                    })?;
            let time = if wall_mode { t.wall } else { Some(t.steps) };
            let speed_up = match (strategy, full_time, time) {
                (Strategy::Full, _, _) => None,
                (_, Some(f), Some(s)) => ratio(f, s),
                _ => None,
            };
            rows.push(ReportRow {
                class: group.clone(),
                technique: strategy,
                mutants: t.mutants,
                killed: t.killed,
                focal_mutants: t.focal_mutants,
                focal_killed: t.focal_killed,
                false_negatives,
                tests_considered: t.considered,
                avg_tests_considered: ratio(t.considered, t.mutants),
                run_time_steps: t.steps,
                run_time_wall_micros: if wall_mode { t.wall } else { None },
                speed_up,
                mutation_score: ratio(t.killed, t.mutants),
                quality_vs_full: ratio(t.focal_killed, full.focal_killed),
                quality_vs_all: ratio(t.focal_killed, t.focal_mutants),
                focal_coverage: ratio(t.focal_mutants, t.mutants),
            });
        }
    }
    Ok(CampaignReport {
        cost_mode: input.cost_mode,
        rows,
        measured_wall_micros: BTreeMap::new(),
    })
}

/// Decimal rendering with half-up rounding, computed exactly.
pub fn format_decimal(r: Rational, places: u32) -> String {
    let scale = 10u128.pow(places);
    let n = *r.numer() as u128 * scale;
    let d = *r.denom() as u128;
    let scaled = (2 * n + d) / (2 * d);
    if places == 0 {
        return scaled.to_string();
    }
    let int = scaled / scale;
    let frac = scaled % scale;
    format!("{int}.{frac:0width$}", width = places as usize)
}

pub const NOT_AVAILABLE: &str = "N.A.";

pub fn format_speed_up(r: Option<Rational>) -> String {
    r.map_or_else(
        || NOT_AVAILABLE.into(),
        |r| format!("{}x", format_decimal(r, 1)),
    )
}

pub fn format_percent(r: Option<Rational>) -> String {
    r.map_or_else(
        || NOT_AVAILABLE.into(),
        |r| format!("{}%", format_decimal(r * Rational::from_integer(100), 0)),
    )
}

fn format_seconds(micros: u64) -> String {
    format!("{} s", format_decimal(Rational::new(micros, 1_000_000), 3))
}

fn run_time_cell(report: &CampaignReport, row: &ReportRow) -> String {
    match report.cost_mode {
        CostMode::Wall => row
            .run_time_wall_micros
            .map_or_else(|| NOT_AVAILABLE.into(), format_seconds),
        CostMode::Steps => {
            let measured = report
                .measured_wall_micros
                .get(&(row.class.clone(), row.technique));
            match measured {
                Some(&w) => format!("{} steps ({})", row.run_time_steps, format_seconds(w)),
                None => format!("{} steps", row.run_time_steps),
            }
        }
    }
}

fn layout(out: &mut String, header: &[&str], body: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    out.push_str(&line(header.to_vec()));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for row in body {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
}

pub fn render_table(report: &CampaignReport) -> String {
    let header = [
        "Class",
        "Technique",
        "Focal Mutants Detected",
        "False Negatives",
        "AVG Tests Considered",
        "Run Time",
        "Speed-up",
    ];
    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.class_label().to_string(),
                r.technique.technique().to_string(),
                format!("{} / {}", r.focal_killed, r.focal_mutants),
                r.false_negatives.to_string(),
                r.avg_tests_considered
                    .map_or_else(|| NOT_AVAILABLE.into(), |a| format_decimal(a, 1)),
                run_time_cell(report, r),
                format_speed_up(r.speed_up),
            ]
        })
        .collect();
    let mut out = String::new();
    layout(&mut out, &header, &body);

    out.push('\n');
    let header = [
        "Technique",
        "Mutation Score",
        "Quality vs Full",
        "Quality vs All Focal",
        "Focal Coverage",
    ];
    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .filter(|r| r.class.is_none())
        .map(|r| {
            vec![
                r.technique.technique().to_string(),
                format_percent(r.mutation_score),
                format_percent(r.quality_vs_full),
                format_percent(r.quality_vs_all),
                format_percent(r.focal_coverage),
            ]
        })
        .collect();
    layout(&mut out, &header, &body);
    out
}

pub fn render_json(report: &CampaignReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<CampaignReport, serde_json::Error> {
    serde_json::from_str(text)
}

const CSV_HEADER: &str =
    "class,technique,mutants,killed,focal_mutants,focal_killed,false_negatives,\
tests_considered,avg_tests_considered,run_time_steps,run_time_wall_micros,speed_up,\
mutation_score,quality_vs_full,quality_vs_all,focal_coverage";

pub fn render_csv(report: &CampaignReport) -> String {
    let exact = |r: &Option<Rational>| r.as_ref().map_or(String::new(), ratio_text::to_text);
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.class_label(),
            r.technique,
            r.mutants,
            r.killed,
            r.focal_mutants,
            r.focal_killed,
            r.false_negatives,
            r.tests_considered,
            exact(&r.avg_tests_considered),
            r.run_time_steps,
            r.run_time_wall_micros
                .map_or(String::new(), |w| w.to_string()),
            exact(&r.speed_up),
            exact(&r.mutation_score),
            exact(&r.quality_vs_full),
            exact(&r.quality_vs_all),
            exact(&r.focal_coverage),
        );
    }
    out
}

pub fn render(report: &CampaignReport, format: Format) -> String {
    match format {
        Format::Table => render_table(report),
        Format::Json => render_json(report),
        Format::Csv => render_csv(report),
    }
}

/// Speed-up of `strategy` over the full suite, in the report's cost unit.
pub fn speed_up(report: &CampaignReport, strategy: Strategy) -> Option<Rational> {
    let full = report.total(Strategy::Full)?.run_time(report.cost_mode)?;
    let s = report.total(strategy)?.run_time(report.cost_mode)?;
    ratio(full, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Status;
    use crate::frontend::ast::TestId;
    use crate::mutantgen::Operator;
    use std::time::Duration;

    #[test]
    fn decimals_round_half_up() {
        assert_eq!(format_decimal(Rational::new(6287, 10), 1), "628.7");
        assert_eq!(format_decimal(Rational::new(3113238, 3082), 1), "1010.1");
        assert_eq!(format_decimal(Rational::new(1, 20), 1), "0.1");
        assert_eq!(format_decimal(Rational::new(1, 40), 1), "0.0");
        assert_eq!(format_decimal(Rational::new(7, 2), 0), "4");
        assert_eq!(format_decimal(Rational::new(3, 1), 2), "3.00");
    }

    #[test]
    fn speed_up_and_percent_text() {
        assert_eq!(format_speed_up(Some(Rational::new(6287, 10))), "628.7x");
        assert_eq!(
            format_speed_up(Some(Rational::new(3113238, 3082))),
            "1010.1x"
        );
        assert_eq!(format_speed_up(None), "N.A.");
        assert_eq!(format_percent(Some(Rational::new(35, 44))), "80%");
        assert_eq!(format_percent(Some(Rational::new(1, 2))), "50%");
        assert_eq!(format_percent(None), "N.A.");
    }

    fn record(id: &str, class: &str, method: &str) -> MutantRecord {
        MutantRecord {
            id: id.into(),
            operator: Operator::Aor,
            class: class.into(),
            method: method.into(),
            file: format!("src/{class}.mini"),
            line: 1,
            column: 1,
            original: String::new(),
            mutated: String::new(),
        }
    }

    fn result(
        id: &str,
        strategy: Strategy,
        killed: bool,
        considered: usize,
        steps: u64,
    ) -> MutantResult {
        let status = if killed {
            Status::Killed {
                killed_by: TestId("T.t".into()),
                position: 1,
                reason: crate::engine::KillReason::AssertionFailure,
            }
        } else if considered == 0 {
            Status::NotCovered
        } else {
            Status::Survived
        };
        MutantResult {
            mutant: id.into(),
            strategy,
            tests_executed: if killed { 1 } else { considered },
            status,
            tests_considered: considered,
            cost_steps: steps,
            wall_micros: None,
            wall_time: Duration::ZERO,
        }
    }

    fn sample() -> CampaignReport {
        let mutants = vec![
            record("a", "A", "f"),
            record("b", "A", "g"),
            record("c", "B", "f"),
        ];
        let results = BTreeMap::from([
            (
                Strategy::Full,
                vec![
                    result("a", Strategy::Full, true, 3, 100),
                    result("b", Strategy::Full, true, 3, 200),
                    result("c", Strategy::Full, false, 3, 300),
                ],
            ),
            (
                Strategy::Focal,
                vec![
                    result("a", Strategy::Focal, true, 1, 10),
                    result("b", Strategy::Focal, false, 0, 0),
                    result("c", Strategy::Focal, false, 1, 50),
                ],
            ),
        ]);
        let focal = BTreeSet::from([MethodRef::new("A", "f"), MethodRef::new("B", "f")]);
        compute_report(&ReportInput {
            mutants: &mutants,
            results: &results,
            focal_methods: &focal,
            cost_mode: CostMode::Steps,
        })
        .unwrap()
    }

    #[test]
    fn rows_and_metrics() {
        let r = sample();
        let labels: Vec<(&str, Strategy)> = r
            .rows
            .iter()
            .map(|r| (r.class_label(), r.technique))
            .collect();
        assert_eq!(
            labels,
            vec![
                ("A", Strategy::Full),
                ("A", Strategy::Focal),
                ("B", Strategy::Full),
                ("B", Strategy::Focal),
                ("Total", Strategy::Full),
                ("Total", Strategy::Focal),
            ]
        );
        let total = r.total(Strategy::Focal).unwrap();
        assert_eq!(total.focal_mutants, 2);
        assert_eq!(total.focal_killed, 1);
        assert_eq!(total.false_negatives, 0);
        assert_eq!(total.speed_up, Some(Rational::new(600, 60)));
        assert_eq!(total.avg_tests_considered, Some(Rational::new(2, 3)));
        assert_eq!(r.total(Strategy::Full).unwrap().speed_up, None);
        assert_eq!(
            speed_up(&r, Strategy::Focal),
            Some(Rational::from_integer(10))
        );
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let text = render_json(&r);
        let back = parse_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(render_json(&back), text);
    }

    #[test]
    fn table_shape() {
        let table = render_table(&sample());
        let first = table.lines().next().unwrap();
        assert!(first.starts_with("| Class"));
        assert!(first.contains("Speed-up"));
        assert!(table.contains("10.0x"));
        assert!(table.contains("N.A."));
    }

    #[test]
    fn empty_campaign_renders_headers_only() {
        let results = BTreeMap::from([(Strategy::Full, vec![])]);
        let focal = BTreeSet::new();
        let r = compute_report(&ReportInput {
            mutants: &[],
            results: &results,
            focal_methods: &focal,
            cost_mode: CostMode::Steps,
        })
        .unwrap();
        assert!(r.rows.is_empty());
        let table = render_table(&r);
        assert_eq!(table.lines().filter(|l| l.starts_with("| ")).count(), 2);
        assert_eq!(render_csv(&r).lines().count(), 1);
    }

    #[test]
    fn self_comparison() {
        let mutants = vec![record("a", "A", "f")];
        let full = vec![result("a", Strategy::Full, true, 2, 40)];
        let mut same = full.clone();
        same[0].strategy = Strategy::Class;
        let results = BTreeMap::from([(Strategy::Full, full), (Strategy::Class, same)]);
        let focal = BTreeSet::from([MethodRef::new("A", "f")]);
        let r = compute_report(&ReportInput {
            mutants: &mutants,
            results: &results,
            focal_methods: &focal,
            cost_mode: CostMode::Steps,
        })
        .unwrap();
        let row = r.total(Strategy::Class).unwrap();
        assert_eq!(format_speed_up(row.speed_up), "1.0x");
        assert_eq!(row.false_negatives, 0);
        assert_eq!(row.quality_vs_full, Some(Rational::from_integer(1)));
    }

    #[test]
    fn missing_baseline() {
        let results = BTreeMap::new();
        let focal = BTreeSet::new();
        let err = compute_report(&ReportInput {
            mutants: &[],
            results: &results,
            focal_methods: &focal,
            cost_mode: CostMode::Steps,
        })
        .unwrap_err();
        assert_eq!(err, ReportError::MissingBaseline);
    }
}
