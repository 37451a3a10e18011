//! Artifact writing: directories, CSV files and `key: value` sidecars.

use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use acfilter_core::{RunRecord, RunRecord2D, SpectralField2D};
use anyhow::{Context as _, Result};

/// Opens `path` for writing, creating parent directories as needed.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Ordered `key: value` metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta {
    entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string().replace('\n', " ")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.render())
    }
}

/// Sidecar path for a data file: `profile.csv` becomes `profile.meta.txt`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("meta.txt")
}

pub fn write_series(dir: &Path, name: &str, rec: &RunRecord) -> Result<()> {
    let mut w = create(&dir.join(name))?;
    rec.write_series_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `t,energy,residual,max_abs,defect_x,defect_y`.
pub fn write_series_2d(path: &Path, rec: &RunRecord2D) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,energy,residual,max_abs,defect_x,defect_y")?;
    for i in 0..rec.times.len() {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            rec.times[i], rec.energies[i], rec.residuals[i], rec.max_abs[i], rec.defect_x[i], rec.defect_y[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `x,y,u` rows, `x` outermost.
pub fn write_field_2d(path: &Path, u: &SpectralField2D) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,u")?;
    let g = u.grid();
    for i in 0..u.nx() {
        for j in 0..u.ny() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", g.node_x(i), g.node_y(j), u.value(i, j))?;
        }
    }
    w.flush()?;
    Ok(())
}
