//! Output directory layout: effective config echo, version stamp, JSON
//! summaries and CSV curves.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use fracflow::verify::{Curve, Report};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Integers print plainly, everything else in round-trip exponent form.
fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct OutDir {
    pub root: PathBuf,
}

impl OutDir {
    /// Create `root` and write `config.json` and `version.json` into it.
    pub fn create(root: &Path, config: &impl Serialize) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        let out = OutDir { root: root.to_path_buf() };
        out.json("config.json", config)?;
        out.json("version.json", &json!({ "name": "fracflow", "version": VERSION }))?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let p = self.path(name);
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&p, text + "\n").with_context(|| format!("cannot write {}", p.display()))?;
        Ok(p)
    }

    pub fn csv(&self, name: &str, columns: &[String], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("cannot write {}", p.display()))?;
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r.iter().map(|&v| fmt_num(v)))?;
        }
        w.flush()?;
        Ok(p)
    }

    /// `<stem>.json` plus one `<stem>_<curve>.csv` per curve; the file
    /// names are recorded in `report.artifacts`.
    pub fn report(&self, stem: &str, report: &mut Report) -> Result<()> {
        let curves: Vec<Curve> = report.curves.clone();
        for c in &curves {
            let name = format!("{stem}_{}.csv", c.name);
            self.csv(&name, &c.columns, &c.rows)?;
            report.artifacts.push(name);
        }
        report.artifacts.push(format!("{stem}.json"));
        self.json(&format!("{stem}.json"), report)?;
        Ok(())
    }
}
