//! Defect bundles: a directory with the buggy program, its tests, and
//! optional configuration.
//!
//! Layout:
//!
//! ```text
//! <bundle>/
//!   program.imp   # the buggy program, concrete syntax
//!   tests.txt     # blocks: `test <name>` / `in v=n v=n ...` / `assert <expr>`
//!   config.txt    # optional `key = value` lines, `#` comments
//!   costs.txt     # optional, named by `cost_table`: `<cost> <patch>` lines
//! ```
//!
//! Config keys: `schemas`, `locations`, `max_expr_nodes`, `constants`,
//! `fuel`, `space_cap`, `expressions`, `cost_table`. Unknown keys are
//! rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use imprepair::lang::{parse_expr, parse_program, run_test, Expr, Program, State, Test, Ty, Verdict};
use imprepair::space::{cost_value, CostFn, Patch, SchemaConfig, SynthConfig};
use imprepair::LocationId;

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("missing {0} in bundle directory")]
    MissingFile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
    #[error("test `{test}` leaves variable `{var}` unbound")]
    UnboundVariable { test: String, var: String },
    #[error("duplicate test name `{0}`")]
    DuplicateTest(String),
    #[error("no failing test: the program passes the whole suite")]
    NoFailingTest,
}

/// A loaded, validated defect bundle.
#[derive(Debug, Clone)]
pub struct DefectBundle {
    pub name: String,
    pub program: Program,
    pub tests: Vec<Test>,
    pub schemas: SchemaConfig,
    pub synth: SynthConfig,
    pub fuel: u64,
    pub cost_fn: CostFn,
}

fn read(path: &Path) -> Result<String, BundleError> {
    std::fs::read_to_string(path)
        .map_err(|source| BundleError::Io { path: path.to_path_buf(), source })
}

fn malformed(path: &Path, msg: impl Into<String>) -> BundleError {
    BundleError::Malformed { path: path.to_path_buf(), msg: msg.into() }
}

fn parse_tests(path: &Path, text: &str) -> Result<Vec<Test>, BundleError> {
    let mut tests: Vec<Test> = Vec::new();
    let mut name: Option<String> = None;
    let mut input = State::new();
    let mut assertion: Option<Expr> = None;

    let mut finish = |name: &mut Option<String>,
                      input: &mut State,
                      assertion: &mut Option<Expr>|
     -> Result<(), BundleError> {
        if let Some(n) = name.take() {
            let a = assertion
                .take()
                .ok_or_else(|| malformed(path, format!("test `{n}` has no assert line")))?;
            tests.push(Test::new(n, std::mem::take(input), a));
        }
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| malformed(path, format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("test ") {
            finish(&mut name, &mut input, &mut assertion)?;
            name = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("in ") {
            if name.is_none() {
                return Err(at("`in` line outside a test block".into()));
            }
            for binding in rest.split_whitespace() {
                let (var, value) = binding
                    .split_once('=')
                    .ok_or_else(|| at(format!("bad binding `{binding}`")))?;
                let value: i64 =
                    value.parse().map_err(|_| at(format!("bad integer `{value}`")))?;
                if input.contains(var) {
                    return Err(at(format!("variable `{var}` bound twice")));
                }
                input.set(var.to_string(), value);
            }
        } else if let Some(rest) = line.strip_prefix("assert ") {
            if name.is_none() {
                return Err(at("`assert` line outside a test block".into()));
            }
            if assertion.is_some() {
                return Err(at("second assert in one test".into()));
            }
            let e = parse_expr(rest).map_err(|e| at(e.to_string()))?;
            if e.ty() != Ok(Ty::Bool) {
                return Err(at(format!("assertion `{rest}` is not boolean")));
            }
            assertion = Some(e);
        } else {
            return Err(at(format!("unrecognized line `{line}`")));
        }
    }
    finish(&mut name, &mut input, &mut assertion)?;
    if tests.is_empty() {
        return Err(malformed(path, "no tests defined"));
    }
    Ok(tests)
}

#[derive(Debug, Default)]
struct RawConfig {
    entries: BTreeMap<String, String>,
}

fn parse_config(path: &Path, text: &str) -> Result<RawConfig, BundleError> {
    let mut cfg = RawConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            malformed(path, format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let known = [
            "schemas",
            "locations",
            "max_expr_nodes",
            "constants",
            "fuel",
            "space_cap",
            "expressions",
            "cost_table",
        ];
        if !known.contains(&key.as_str()) {
            return Err(malformed(path, format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if cfg.entries.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(malformed(path, format!("line {}: key `{key}` set twice", lineno + 1)));
        }
    }
    Ok(cfg)
}

fn parse_cost_table(path: &Path, text: &str) -> Result<CostFn, BundleError> {
    let mut table = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| malformed(path, format!("line {}: {msg}", lineno + 1));
        let (cost, patch) =
            line.split_once(' ').ok_or_else(|| at("expected `<cost> <patch>`".into()))?;
        let cost: f64 = cost.parse().map_err(|_| at(format!("bad cost `{cost}`")))?;
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(at(format!("cost must be a non-negative number, got {cost}")));
        }
        // parse and re-serialize so table keys are canonical regardless of
        // how the author parenthesized the expression
        let patch: Patch = patch.trim().parse().map_err(|e| at(format!("{e}")))?;
        table.insert(patch.serialize(), cost_value(cost));
    }
    Ok(CostFn::Table(table))
}

/// Loads and validates a bundle directory.
pub fn load_bundle(dir: &Path) -> Result<DefectBundle, BundleError> {
    let program_path = dir.join("program.imp");
    let tests_path = dir.join("tests.txt");
    if !program_path.exists() {
        return Err(BundleError::MissingFile(program_path));
    }
    if !tests_path.exists() {
        return Err(BundleError::MissingFile(tests_path));
    }

    let program = parse_program(&read(&program_path)?)
        .map_err(|e| malformed(&program_path, e.to_string()))?;
    let tests = parse_tests(&tests_path, &read(&tests_path)?)?;

    let mut seen = BTreeSet::new();
    for t in &tests {
        if !seen.insert(t.name.clone()) {
            return Err(BundleError::DuplicateTest(t.name.clone()));
        }
    }

    let config_path = dir.join("config.txt");
    let raw = if config_path.exists() {
        parse_config(&config_path, &read(&config_path)?)?
    } else {
        RawConfig::default()
    };

    let mut schemas = SchemaConfig::default();
    if let Some(list) = raw.entries.get("schemas") {
        schemas.expression = false;
        schemas.refinement = false;
        schemas.guard = false;
        schemas.assignment = false;
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "expression" => schemas.expression = true,
                "refinement" => schemas.refinement = true,
                "guard" => schemas.guard = true,
                "assignment" => schemas.assignment = true,
                other => {
                    return Err(malformed(&config_path, format!("unknown schema `{other}`")))
                }
            }
        }
    }
    if let Some(list) = raw.entries.get("locations") {
        let mut locs = BTreeSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let id: u32 = item
                .parse()
                .map_err(|_| malformed(&config_path, format!("bad location `{item}`")))?;
            locs.insert(LocationId(id));
        }
        schemas.locations = Some(locs);
    }

    let mut synth = SynthConfig::default();
    if let Some(v) = raw.entries.get("max_expr_nodes") {
        synth.max_nodes = v
            .parse()
            .map_err(|_| malformed(&config_path, format!("bad max_expr_nodes `{v}`")))?;
    }
    if let Some(v) = raw.entries.get("constants") {
        synth.constants = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| malformed(&config_path, format!("bad constants `{v}`")))?;
    }
    if let Some(v) = raw.entries.get("space_cap") {
        synth.cap =
            v.parse().map_err(|_| malformed(&config_path, format!("bad space_cap `{v}`")))?;
    }
    if let Some(v) = raw.entries.get("expressions") {
        let mut exprs = Vec::new();
        for item in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let e = parse_expr(item)
                .map_err(|e| malformed(&config_path, format!("expression `{item}`: {e}")))?;
            exprs.push(e);
        }
        synth.explicit = Some(exprs);
    }

    let fuel = match raw.entries.get("fuel") {
        Some(v) => {
            v.parse().map_err(|_| malformed(&config_path, format!("bad fuel `{v}`")))?
        }
        None => DEFAULT_FUEL,
    };

    let cost_fn = match raw.entries.get("cost_table") {
        Some(file) => {
            let table_path = dir.join(file);
            if !table_path.exists() {
                return Err(BundleError::MissingFile(table_path));
            }
            parse_cost_table(&table_path, &read(&table_path)?)?
        }
        None => CostFn::AstDistance,
    };

    // visible variables: everything bound by any test input plus everything
    // assigned in the program (the language has no scopes)
    let mut vars = program.assigned_vars();
    for t in &tests {
        vars.extend(t.input.iter().map(|(k, _)| k.to_string()));
    }
    synth.vars = vars;

    // every variable the program or an assertion reads must be bound by
    // every test input, so unbound-variable faults are a load-time error
    let mut needed = program.all_vars();
    for t in &tests {
        needed.extend(t.assertion.vars());
    }
    for t in &tests {
        for var in &needed {
            if !t.input.contains(var) {
                return Err(BundleError::UnboundVariable {
                    test: t.name.clone(),
                    var: var.clone(),
                });
            }
        }
    }

    if tests.iter().all(|t| run_test(&program, t, fuel) == Verdict::Pass) {
        return Err(BundleError::NoFailingTest);
    }

    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bundle".to_string());
    Ok(DefectBundle { name, program, tests, schemas, synth, fuel, cost_fn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_bundle(dir: &Path, files: &[(&str, &str)]) {
        for (name, content) in files {
            fs::write(dir.join(name), content).unwrap();
        }
    }

    #[test]
    fn minimal_bundle_loads() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(
            dir.path(),
            &[
                ("program.imp", "x := y + 1"),
                ("tests.txt", "test t\n  in x=0 y=1\n  assert x = 3\n"),
            ],
        );
        let bundle = load_bundle(dir.path()).unwrap();
        assert_eq!(bundle.tests.len(), 1);
        assert_eq!(bundle.fuel, DEFAULT_FUEL);
        assert!(bundle.synth.vars.contains("x") && bundle.synth.vars.contains("y"));
    }

    #[test]
    fn passing_suite_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(
            dir.path(),
            &[
                ("program.imp", "x := y + 1"),
                ("tests.txt", "test t\n  in x=0 y=1\n  assert x = 2\n"),
            ],
        );
        assert!(matches!(load_bundle(dir.path()), Err(BundleError::NoFailingTest)));
    }

    #[test]
    fn unbound_variable_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(
            dir.path(),
            &[
                ("program.imp", "x := y + 1"),
                ("tests.txt", "test t\n  in x=0 y=1\n  assert z = 0\n"),
            ],
        );
        assert!(matches!(
            load_bundle(dir.path()),
            Err(BundleError::UnboundVariable { var, .. }) if var == "z"
        ));
    }

    #[test]
    fn unknown_config_keys_fail_fast() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(
            dir.path(),
            &[
                ("program.imp", "x := y + 1"),
                ("tests.txt", "test t\n  in x=0 y=1\n  assert x = 3\n"),
                ("config.txt", "max_nodes = 3\n"),
            ],
        );
        assert!(matches!(load_bundle(dir.path()), Err(BundleError::Malformed { .. })));
    }

    #[test]
    fn missing_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_bundle(dir.path()), Err(BundleError::MissingFile(_))));
    }

    #[test]
    fn cost_table_keys_are_canonicalized() {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(
            dir.path(),
            &[
                ("program.imp", "if i > 1 then x := 1 else skip fi"),
                ("tests.txt", "test t\n  in i=0 x=0\n  assert x = 1\n"),
                ("config.txt", "cost_table = costs.txt\n"),
                // author wrote redundant parentheses; the key still matches
                ("costs.txt", "0.5 REPLACE 0 WITH ((i mod 2) = 1)\n"),
            ],
        );
        let bundle = load_bundle(dir.path()).unwrap();
        let CostFn::Table(table) = &bundle.cost_fn else { panic!() };
        assert!(table.contains_key("REPLACE 0 WITH i mod 2 = 1"));
    }
}
