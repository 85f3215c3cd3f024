//! Experiment runner: reproducible command-line experiments over the
//! nucdim library with JSON reports and CSV tables.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::Path;
use std::time::Instant;

use nucdim::Exec;

use config::{ExperimentConfig, Params};
use experiments::{find, ExperimentInfo, CATALOG, MODULES};
use report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad id, key, value or path: exit 2.
    #[error("usage: {0}")]
    Usage(String),
    /// The library rejected the configured instance: exit 2.
    #[error("run failed: {0}")]
    Run(String),
}

impl From<nucdim::Error> for CliError {
    fn from(e: nucdim::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub timing: bool,
    pub sequential: bool,
}

/// The report plus the CSV text, if the experiment has one.
#[derive(Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub csv: Option<String>,
}

pub fn run(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput, CliError> {
    let id = config.id.as_deref().ok_or_else(|| CliError::Usage("no experiment id (set `id`)".into()))?;
    let info = find(id).ok_or_else(|| {
        let ids: Vec<&str> = CATALOG.iter().map(|e| e.id).collect();
        CliError::Usage(format!("unknown experiment id `{id}` (known: {})", ids.join(", ")))
    })?;
    if config.output.csv.is_some() && !info.has_csv {
        return Err(CliError::Usage(format!("experiment `{id}` writes no CSV")));
    }
    let mut params = Params::new(config.params.clone(), info.params)?;
    let exec = if opts.sequential { Exec::Sequential } else { Exec::default() };
    let start = Instant::now();
    let outcome = (info.run)(&mut params, exec)?;
    let elapsed = start.elapsed().as_millis() as u64;
    let report = RunReport {
        id: info.id.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        module: info.module.to_string(),
        anchor: info.anchor.to_string(),
        config: params.echo(),
        pass: outcome.criteria.iter().all(|c| c.pass),
        criteria: outcome.criteria,
        tables: outcome.tables,
        elapsed_ms: opts.timing.then_some(elapsed),
    };
    Ok(RunOutput {
        report,
        csv: outcome.csv,
    })
}

/// Writes the configured files; returns the report JSON when no JSON path is
/// configured (the caller prints it).
pub fn write_outputs(config: &ExperimentConfig, out: &RunOutput) -> Result<Option<String>, CliError> {
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    };
    if let (Some(path), Some(csv)) = (&config.output.csv, &out.csv) {
        write(path, csv)?;
    }
    let json = out.report.to_json();
    match &config.output.json {
        Some(path) => {
            write(path, &json)?;
            Ok(None)
        }
        None => Ok(Some(json)),
    }
}

pub fn list(module: Option<&str>) -> Result<Vec<&'static ExperimentInfo>, CliError> {
    if let Some(m) = module {
        if !MODULES.contains(&m) {
            return Err(CliError::Usage(format!("unknown module `{m}` (known: {})", MODULES.join(", "))));
        }
    }
    Ok(CATALOG.iter().filter(|e| module.is_none_or(|m| e.module == m)).collect())
}

pub fn list_table(rows: &[&ExperimentInfo]) -> String {
    let w = rows.iter().map(|e| e.id.len()).max().unwrap_or(2).max(2);
    let a = rows.iter().map(|e| e.anchor.chars().count()).max().unwrap_or(6).max(6);
    let mut s = format!("{:<w$}  {:<7}  {:<a$}  {}\n", "id", "module", "anchor", "summary");
    for e in rows {
        s.push_str(&format!("{:<w$}  {:<7}  {:<a$}  {}\n", e.id, e.module, e.anchor, e.summary));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(id: &str, sets: &[&str]) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.apply_override(&format!("id={id}")).unwrap();
        for s in sets {
            c.apply_override(s).unwrap();
        }
        c
    }

    #[test]
    fn catalog_has_nine_unique_ids() {
        let mut ids: Vec<&str> = CATALOG.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 9);
        assert!(CATALOG.iter().all(|e| MODULES.contains(&e.module) && !e.anchor.is_empty()));
    }

    #[test]
    fn module_filter() {
        assert_eq!(list(Some("fock")).unwrap().len(), 4);
        assert_eq!(list(Some("cstar")).unwrap().len(), 3);
        assert_eq!(list(None).unwrap().len(), 9);
        assert!(list(Some("nope")).is_err());
    }

    #[test]
    fn unknown_id_and_param_are_usage_errors() {
        assert!(matches!(run(&config("nope", &[]), RunOptions::default()), Err(CliError::Usage(_))));
        assert!(matches!(run(&config("kappa-psd", &["kk=3"]), RunOptions::default()), Err(CliError::Usage(_))));
        assert!(matches!(
            run(&config("kappa-psd", &["output.csv=x.csv"]), RunOptions::default()),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn small_kappa_run_echoes_config() {
        let out = run(&config("kappa-psd", &["k=1..2"]), RunOptions::default()).unwrap();
        assert!(out.report.pass);
        assert_eq!(out.report.criteria.len(), 4);
        assert_eq!(out.report.config["k"], serde_json::json!([1, 2]));
        assert_eq!(out.report.elapsed_ms, None);
    }

    #[test]
    fn precondition_failures_are_run_errors() {
        let r = run(&config("calkin-defect", &["k=4", "oracle_k=[]"]), RunOptions::default());
        assert!(matches!(r, Err(CliError::Run(_))));
    }
}
