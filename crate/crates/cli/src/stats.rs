//! Statistics and report files.
//!
//! The stats file is a two-line CSV (header plus one record) with a stable
//! column set; the patches file lists one serialized patch per line in
//! emission order. Both are deterministic for a fixed bundle and flags,
//! except for the wall-clock column.

use std::io::Write;
use std::path::Path;

use imprepair::engine::RepairSession;
use imprepair::space::Patch;

pub const STATS_HEADER: &str = "bundle,strategy,mode,candidates_total,candidates_explored,\
test_executions,plausible,first_cost,classes_failing_test,wall_ms";

/// One run's worth of counters, shaped for the stats CSV.
#[derive(Debug, Clone)]
pub struct StatsReport {
    pub bundle: String,
    pub strategy: String,
    pub mode: String,
    pub candidates_total: usize,
    pub candidates_explored: usize,
    pub test_executions: u64,
    pub plausible: usize,
    pub first_cost: Option<f64>,
    /// Classes registered for the first originally-failing test.
    pub classes_failing_test: u64,
    pub wall_ms: u128,
    pub exploration_speed: f64,
}

impl StatsReport {
    pub fn from_session(bundle: &str, session: &RepairSession) -> StatsReport {
        let first_failing = session
            .test_order
            .iter()
            .find(|t| session.originally_failing.contains(&t.name))
            .map(|t| t.name.clone())
            .unwrap_or_default();
        let classes_failing_test = session
            .stats
            .per_test
            .get(&first_failing)
            .map(|s| s.classes_registered)
            .unwrap_or(0);
        StatsReport {
            bundle: bundle.to_string(),
            strategy: session.strategy.to_string(),
            mode: session.mode.to_string(),
            candidates_total: session.stats.candidates_total,
            candidates_explored: session.stats.candidates_explored,
            test_executions: session.stats.test_executions,
            plausible: session.stats.plausible_count,
            first_cost: session.stats.first_repair_cost.map(|c| c.into_inner()),
            classes_failing_test,
            wall_ms: session.stats.wall.as_millis(),
            exploration_speed: session.stats.exploration_speed(),
        }
    }

    pub fn to_csv(&self) -> String {
        let first_cost =
            self.first_cost.map(|c| c.to_string()).unwrap_or_default();
        format!(
            "{}\n{},{},{},{},{},{},{},{},{},{}\n",
            STATS_HEADER,
            self.bundle,
            self.strategy,
            self.mode,
            self.candidates_total,
            self.candidates_explored,
            self.test_executions,
            self.plausible,
            first_cost,
            self.classes_failing_test,
            self.wall_ms,
        )
    }
}

fn write_file(path: &Path, content: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())
}

/// Writes the stats CSV.
pub fn emit_stats(report: &StatsReport, path: &Path) -> std::io::Result<()> {
    write_file(path, &report.to_csv())
}

/// Writes the patches file: one serialized patch per line, emission order.
pub fn emit_patches(patches: &[Patch], path: &Path) -> std::io::Result<()> {
    let mut out = String::new();
    for p in patches {
        out.push_str(&p.serialize());
        out.push('\n');
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape_is_stable() {
        let report = StatsReport {
            bundle: "demo".into(),
            strategy: "partition".into(),
            mode: "first".into(),
            candidates_total: 5,
            candidates_explored: 3,
            test_executions: 2,
            plausible: 1,
            first_cost: Some(0.3),
            classes_failing_test: 2,
            wall_ms: 7,
            exploration_speed: 1.5,
        };
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(STATS_HEADER));
        assert_eq!(lines.next(), Some("demo,partition,first,5,3,2,1,0.3,2,7"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn missing_first_cost_is_an_empty_field() {
        let report = StatsReport {
            bundle: "demo".into(),
            strategy: "naive".into(),
            mode: "full".into(),
            candidates_total: 0,
            candidates_explored: 0,
            test_executions: 0,
            plausible: 0,
            first_cost: None,
            classes_failing_test: 0,
            wall_ms: 0,
            exploration_speed: 0.0,
        };
        assert!(report.to_csv().contains("full,0,0,0,0,,0,0"));
    }
}
