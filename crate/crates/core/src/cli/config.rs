//! INI-style run configuration.
//!
//! ```ini
//! [media]
//! m = 2
//! p = 1.5
//!
//! [reaction]
//! family = sine
//! lambda = 1
//! ```
//!
//! Unknown sections and keys are rejected. Values given on the command line
//! take precedence over the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::reaction::{MediaParams, ReactionTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown output format '{other}' (json|csv)"))),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MediaSection {
    pub m: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReactionSection {
    pub family: Option<String>,
    pub lambda: Option<f64>,
    pub s: Option<f64>,
    pub table: Option<PathBuf>,
    pub fprime0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverSection {
    pub tol: Option<f64>,
    pub budget: Option<usize>,
    pub u0: Option<f64>,
    pub cells: Option<usize>,
    pub length: Option<f64>,
    pub tmax: Option<f64>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub media: MediaSection,
    pub reaction: ReactionSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

fn number<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key} = '{value}' is not a valid number")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if !matches!(section.as_str(), "media" | "reaction" | "solver" | "output") {
                    return Err(Error::Config(format!("line {}: unknown section [{section}]", lineno + 1)));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let s = section.as_str();
            match (s, key) {
                ("media", "m") => cfg.media.m = Some(number(s, key, value)?),
                ("media", "p") => cfg.media.p = Some(number(s, key, value)?),
                ("reaction", "family") => cfg.reaction.family = Some(value.to_string()),
                ("reaction", "lambda") => cfg.reaction.lambda = Some(number(s, key, value)?),
                ("reaction", "s") => cfg.reaction.s = Some(number(s, key, value)?),
                ("reaction", "table_path") => cfg.reaction.table = Some(PathBuf::from(value)),
                ("reaction", "fprime0") => cfg.reaction.fprime0 = Some(number(s, key, value)?),
                ("solver", "tol") => cfg.solver.tol = Some(number(s, key, value)?),
                ("solver", "budget") => cfg.solver.budget = Some(number(s, key, value)?),
                ("solver", "u0") => cfg.solver.u0 = Some(number(s, key, value)?),
                ("solver", "cells") => cfg.solver.cells = Some(number(s, key, value)?),
                ("solver", "length") => cfg.solver.length = Some(number(s, key, value)?),
                ("solver", "tmax") => cfg.solver.tmax = Some(number(s, key, value)?),
                ("solver", "jobs") => cfg.solver.jobs = Some(number(s, key, value)?),
                ("output", "format") => cfg.output.format = Some(Format::parse(value)?),
                ("output", "path") => cfg.output.path = Some(PathBuf::from(value)),
                ("", _) => {
                    return Err(Error::Config(format!("line {}: '{key}' appears before any section", lineno + 1)))
                }
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}' in [{s}]", lineno + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Serializes the keys that are set; `parse(to_ini())` reproduces `self`.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, entries: Vec<(&str, Option<String>)>| {
            let set: Vec<_> = entries.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect();
            if set.is_empty() {
                return;
            }
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in set {
                let _ = writeln!(out, "{k} = {v}");
            }
        };
        let num = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        let int = |v: Option<usize>| v.map(|x| x.to_string());
        let path = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string());
        section("media", vec![("m", num(self.media.m)), ("p", num(self.media.p))]);
        section(
            "reaction",
            vec![
                ("family", self.reaction.family.clone()),
                ("lambda", num(self.reaction.lambda)),
                ("s", num(self.reaction.s)),
                ("table_path", path(&self.reaction.table)),
                ("fprime0", num(self.reaction.fprime0)),
            ],
        );
        section(
            "solver",
            vec![
                ("tol", num(self.solver.tol)),
                ("budget", int(self.solver.budget)),
                ("u0", num(self.solver.u0)),
                ("cells", int(self.solver.cells)),
                ("length", num(self.solver.length)),
                ("tmax", num(self.solver.tmax)),
                ("jobs", int(self.solver.jobs)),
            ],
        );
        section(
            "output",
            vec![
                ("format", self.output.format.map(|f| f.as_str().to_string())),
                ("path", path(&self.output.path)),
            ],
        );
        out
    }

    /// Values set in `over` replace those in `self`.
    pub fn overlay(mut self, over: &RunConfig) -> Self {
        macro_rules! take {
            ($($sec:ident . $key:ident),*) => {
                $(if over.$sec.$key.is_some() {
                    self.$sec.$key = over.$sec.$key.clone();
                })*
            };
        }
        take!(
            media.m, media.p,
            reaction.family, reaction.lambda, reaction.s, reaction.table, reaction.fprime0,
            solver.tol, solver.budget, solver.u0, solver.cells, solver.length, solver.tmax, solver.jobs,
            output.format, output.path
        );
        self
    }

    pub fn media_params(&self) -> Result<MediaParams> {
        let m = self.media.m.ok_or_else(|| Error::Config("m is required (--m or [media] m)".into()))?;
        let p = self.media.p.ok_or_else(|| Error::Config("p is required (--p or [media] p)".into()))?;
        MediaParams::new(m, p)
    }

    pub fn reaction_term(&self) -> Result<ReactionTerm> {
        let r = &self.reaction;
        let need = |v: Option<f64>, name: &str, fam: &str| {
            v.ok_or_else(|| Error::Config(format!("reaction family '{fam}' needs {name}")))
        };
        let built = match r.family.as_deref().unwrap_or("kpp") {
            "kpp" => Ok(ReactionTerm::kpp()),
            "scaled-kpp" => ReactionTerm::scaled_kpp(need(r.lambda, "lambda", "scaled-kpp")?),
            "sine" => ReactionTerm::sine(r.lambda.unwrap_or(1.0)),
            "power-kpp" => ReactionTerm::power_kpp(need(r.s, "s", "power-kpp")?),
            "table" => {
                let path = r
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::Config("reaction family 'table' needs table_path".into()))?;
                ReactionTerm::from_csv(path, r.fprime0)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown reaction family '{other}' (kpp|scaled-kpp|sine|power-kpp|table)"
                )))
            }
        };
        built.map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("reaction table: {io}")),
            other => other,
        })
    }
}
