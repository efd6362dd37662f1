//! CSV tables with fixed, platform-independent number formatting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::RunConfig;

/// `%.12g`: twelve significant digits, trailing zeros removed, exponent form outside
/// `[1e-4, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const DIGITS: i32 = 12;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of a column (`NaN` for text cells).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// `<output>.meta` next to the CSV.
pub fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".meta");
    PathBuf::from(name)
}

/// Resolved configuration plus tool version, in the config file format.
pub fn metadata(cfg: &RunConfig, extra: &[(String, String)]) -> String {
    // provenance lines are comments so the file loads back with `--config`
    let mut s = format!(
        "# tool = {}\n# version = {}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in extra {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s.push_str(&cfg.serialize());
    s
}

/// Write the CSV and its metadata, or the CSV alone to stdout when no path is given.
pub fn emit(table: &Table, cfg: &RunConfig, extra: &[(String, String)]) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, table.to_csv())?;
            fs::write(meta_path(path), metadata(cfg, extra))?;
            log::info!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(table.to_csv().as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_matches_percent_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (0.82258064516129, "0.822580645161"),
            (123456.789, "123456.789"),
            (1e-5, "1e-05"),
            (1.5e-7, "1.5e-07"),
            (0.0001, "0.0001"),
            (1e12, "1e+12"),
            (999999999999.0, "999999999999"),
            (2.0f64.sqrt() * 1e20, "1.41421356237e+20"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["f".into(), "D_NM".into(), "status".into()]);
        t.push(vec![0.01.into(), 0.5.into(), "ok".into()]);
        t.push(vec![Cell::Num(1.0), Cell::Num(f64::NAN), "singular".into()]);
        assert_eq!(t.to_csv(), "f,D_NM,status\n0.01,0.5,ok\n1,nan,singular\n");
        assert_eq!(t.column("D_NM").unwrap()[0], 0.5);
        assert_eq!(meta_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.meta"));
    }

    #[test]
    fn metadata_loads_back_as_config() {
        let cfg = RunConfig::new(super::super::Experiment::Nmm);
        let meta = metadata(&cfg, &[("horizon_warning_f=0.1".into(), "true".into())]);
        assert!(meta.starts_with("# tool = dimer-nm\n# version = "));
        assert_eq!(RunConfig::parse(&meta).unwrap(), cfg);
    }
}
