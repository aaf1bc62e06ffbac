//! Result tables and their CSV form.

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "experiment,agent,alpha,metric,value,stderr,runs,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    /// 1-based agent id.
    pub agent: usize,
    pub alpha: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub spec_sha256: Option<String>,
    pub tool_version: String,
}

impl Default for Metadata {
    fn default() -> Self {
        Metadata {
            spec_sha256: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub metadata: Metadata,
}

/// `%.9g`-style rendering: 9 significant digits, trailing zeros removed.
pub fn format_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(&y),
    }
}

impl ResultTable {
    pub fn new(metadata: Metadata) -> Self {
        ResultTable {
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
    }

    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.experiment
                .cmp(&b.experiment)
                .then(a.agent.cmp(&b.agent))
                .then(cmp_opt(a.alpha, b.alpha))
                .then(a.metric.cmp(&b.metric))
        });
    }

    /// Rows matching an agent and metric, in table order.
    pub fn select<'a>(&'a self, agent: usize, metric: &'a str) -> impl Iterator<Item = &'a ResultRow> {
        self.rows
            .iter()
            .filter(move |r| r.agent == agent && r.metric == metric)
    }

    /// Value for an (agent, alpha, metric) triple.
    pub fn value(&self, agent: usize, alpha: Option<f64>, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.agent == agent && r.alpha == alpha && r.metric == metric)
    }

    /// Sorted CSV text with a header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut sorted = self.clone();
        sorted.sort();
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &sorted.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.experiment,
                r.agent,
                r.alpha.map(format_g9).unwrap_or_default(),
                r.metric,
                format_g9(r.value),
                r.stderr.map(format_g9).unwrap_or_default(),
                r.runs,
                r.seed
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => {
                return Err(Error::ResultsFile {
                    line: 1,
                    message: format!("expected header '{CSV_HEADER}'"),
                })
            }
        }
        let mut table = ResultTable::default();
        for (i, line) in lines {
            let bad = |message: String| Error::ResultsFile {
                line: i + 1,
                message,
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad(format!("expected 8 fields, found {}", f.len())));
            }
            let opt = |s: &str, name: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(format!("bad {name} '{s}'")))
                }
            };
            table.rows.push(ResultRow {
                experiment: f[0].to_string(),
                agent: f[1].parse().map_err(|_| bad(format!("bad agent '{}'", f[1])))?,
                alpha: opt(f[2], "alpha")?,
                metric: f[3].to_string(),
                value: f[4].parse().map_err(|_| bad(format!("bad value '{}'", f[4])))?,
                stderr: opt(f[5], "stderr")?,
                runs: f[6].parse().map_err(|_| bad(format!("bad runs '{}'", f[6])))?,
                seed: f[7].parse().map_err(|_| bad(format!("bad seed '{}'", f[7])))?,
            });
        }
        Ok(table)
    }

    /// 3-point moving average of `value` along alpha, per (experiment, agent, metric).
    ///
    /// End points average over their two available neighbors.
    pub fn smoothed(&self) -> ResultTable {
        let mut sorted = self.clone();
        sorted.sort();
        let rows = &sorted.rows;
        let mut out = sorted.clone();
        let same = |a: &ResultRow, b: &ResultRow| {
            a.experiment == b.experiment
                && a.agent == b.agent
                && a.metric == b.metric
                && a.alpha.is_some()
                && b.alpha.is_some()
        };
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (&rows[i], &rows[j]);
            a.experiment
                .cmp(&b.experiment)
                .then(a.agent.cmp(&b.agent))
                .then(a.metric.cmp(&b.metric))
                .then(cmp_opt(a.alpha, b.alpha))
        });
        for i in order {
            match groups.last_mut() {
                Some(g) if same(&rows[g[0]], &rows[i]) => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        for g in groups.iter().filter(|g| g.len() >= 3) {
            for (pos, &i) in g.iter().enumerate() {
                let lo = pos.saturating_sub(1);
                let hi = (pos + 1).min(g.len() - 1);
                let window = &g[lo..=hi];
                out.rows[i].value =
                    window.iter().map(|&j| rows[j].value).sum::<f64>() / window.len() as f64;
            }
        }
        out
    }

    /// Writes the CSV and a `<path>.meta.json` sidecar.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))?;
        let meta = meta_path(path);
        let json = serde_json::to_string_pretty(&self.metadata).expect("metadata serializes") + "\n";
        fs::write(&meta, json).map_err(|e| Error::io(&meta, e))
    }

    /// Reads a CSV and, when present, its metadata sidecar.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = Self::from_csv(&text)?;
        let meta = meta_path(path);
        if let Ok(json) = fs::read_to_string(&meta) {
            table.metadata = serde_json::from_str(&json).map_err(|e| Error::ResultsFile {
                line: e.line(),
                message: format!("{}: {e}", meta.display()),
            })?;
        }
        Ok(table)
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Sorts and writes a table; the CSV is the only output format.
pub fn emit_results(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    table.write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(agent: usize, alpha: Option<f64>, metric: &str, value: f64) -> ResultRow {
        ResultRow {
            experiment: "x".into(),
            agent,
            alpha,
            metric: metric.into(),
            value,
            stderr: Some(0.01),
            runs: 100,
            seed: 7,
        }
    }

    #[test]
    fn g9_formatting() {
        let cases = [
            (0.0, "0"),
            (0.1, "0.1"),
            (0.75, "0.75"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567891.0, "1.23456789e+09"),
            (1.5e-7, "1.5e-07"),
            (0.0001, "0.0001"),
            (-2.5, "-2.5"),
            (0.00001234, "1.234e-05"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g9(x), s, "{x}");
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(ResultTable::default().to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_are_sorted() {
        let mut t = ResultTable::default();
        t.push(row(2, Some(0.1), "p", 0.5));
        t.push(row(1, Some(0.2), "p", 0.5));
        t.push(row(1, Some(0.1), "p", 0.5));
        t.push(row(1, None, "gamma", 0.5));
        let csv = t.to_csv();
        let agents_alphas: Vec<&str> = csv.lines().skip(1).map(|l| &l[2..8]).collect();
        assert_eq!(agents_alphas, ["1,,gam", "1,0.1,", "1,0.2,", "2,0.1,"]);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn csv_round_trip() {
        let mut t = ResultTable::default();
        t.push(row(1, Some(0.1), "p_error", 0.123456789));
        let mut r = row(3, None, "gamma", 0.0417);
        r.stderr = None;
        t.push(r);
        let csv = t.to_csv();
        let back = ResultTable::from_csv(&csv).unwrap();
        assert_eq!(back.to_csv(), csv);
        let mut sorted = t.clone();
        sorted.sort();
        assert_eq!(back.rows, sorted.rows);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = format!("{CSV_HEADER}\nx,1,0.1,p,0.5,0.1,10,3\nx,1,0.1,p\n");
        match ResultTable::from_csv(&text) {
            Err(Error::ResultsFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn smoothing_averages_neighbors() {
        let mut t = ResultTable::default();
        for (i, v) in [0.0, 3.0, 6.0, 0.0].iter().enumerate() {
            t.push(row(1, Some(i as f64 / 10.0), "p", *v));
        }
        let s = t.smoothed();
        let vals: Vec<f64> = s.rows.iter().map(|r| r.value).collect();
        assert_eq!(vals, [1.5, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn write_and_read_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut t = ResultTable::default();
        t.metadata.spec_sha256 = Some("ab".into());
        t.push(row(1, Some(0.1), "p", 0.25));
        t.write(&path).unwrap();
        assert!(meta_path(&path).exists());
        assert_eq!(ResultTable::read(&path).unwrap(), t);
    }
}
