//! Run configuration, the task registry and report emission used by the
//! command-line front end.

mod config;
mod tasks;

use std::path::PathBuf;
use std::sync::OnceLock;

use serde_json::Value;

use crate::error::{Error, Result};

pub use config::RunConfig;

/// What a task produced: the JSON report, extra files, and whether every
/// check it ran held.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskOutput {
    pub report: Value,
    /// `(file name, contents)` written next to the report when an output directory is set.
    pub files: Vec<(String, String)>,
    pub healthy: bool,
}

pub trait Task: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, config: &RunConfig) -> Result<TaskOutput>;
}

#[derive(Default)]
pub struct TaskRegistry {
    tasks: Vec<Box<dyn Task>>,
}

impl TaskRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self::default();
        for t in tasks::builtins() {
            r.register(t);
        }
        r
    }

    pub fn register(&mut self, task: Box<dyn Task>) {
        self.tasks.retain(|t| t.name() != task.name());
        self.tasks.push(task);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Task> {
        self.tasks.iter().find(|t| t.name() == name).map(|t| t.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.tasks.iter().map(|t| t.name()).collect()
    }
}

fn registry() -> &'static TaskRegistry {
    static REGISTRY: OnceLock<TaskRegistry> = OnceLock::new();
    REGISTRY.get_or_init(TaskRegistry::with_builtins)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub report: Value,
    pub written: Vec<PathBuf>,
    /// 0 when every check held, 3 when a numerical-integrity check failed.
    pub status: i32,
}

/// Runs the configured task and writes its files into `config.out`, if set.
/// The report is written as `<task>.json`.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    config.check()?;
    let task = registry().get(&config.task).ok_or_else(|| {
        Error::Config(format!("unknown task {:?}; expected one of {}", config.task, registry().names().join(", ")))
    })?;
    let output = task.run(config)?;
    let mut written = Vec::new();
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir)?;
        let report_path = dir.join(format!("{}.json", task.name()));
        std::fs::write(&report_path, render(&output.report)?)?;
        written.push(report_path);
        for (name, contents) in &output.files {
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            written.push(path);
        }
    }
    Ok(RunOutcome { report: output.report, written, status: if output.healthy { 0 } else { 3 } })
}

/// Pretty JSON with a trailing newline.
pub fn render(report: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Process exit code for a finished or failed run.
pub fn exit_status(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(outcome) => outcome.status,
        Err(e) => e.exit_code(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_every_task() {
        let names = TaskRegistry::with_builtins().names();
        assert_eq!(names, ["full", "element", "fidelity", "convergence", "validate", "design-info"]);
    }

    #[test]
    fn unknown_task_is_a_config_error() {
        let cfg = RunConfig::for_task("nope");
        let r = execute(&cfg);
        assert_eq!(exit_status(&r), 2);
    }

    #[test]
    fn validate_identity_passes() {
        let mut cfg = RunConfig::for_task("validate");
        cfg.channel = crate::channels::ChannelSpec::named("identity");
        let r = execute(&cfg);
        assert_eq!(exit_status(&r), 0);
        let report = r.unwrap().report;
        assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    }
}
