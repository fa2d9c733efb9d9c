use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One CSV cell. Reals are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Count(usize),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Real(v) => Some(*v),
            Self::Count(n) => Some(*n as f64),
            Self::Text(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Real(v) => write!(f, "{v:.16e}"),
            Self::Count(n) => write!(f, "{n}"),
            Self::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Self::Count(n)
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

/// A table of results with `# key: value` metadata lines.
#[derive(Clone, Debug, Default)]
pub struct RunRecord {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl RunRecord {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: vec![(
                "generator".into(),
                format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            )],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl fmt::Display) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; text cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[j].as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = RunRecord::new(&["time", "its", "label"]);
        r.meta("method", "L2-RIIA(L2)-VP");
        r.push(vec![0.1.into(), 3usize.into(), "a".to_string().into()]);
        let text = r.to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# generator: bcrk "));
        assert_eq!(lines[1], "# method: L2-RIIA(L2)-VP");
        assert_eq!(lines[2], "time,its,label");
        assert_eq!(lines[3], "1.0000000000000001e-1,3,a");
        let back: f64 = lines[3].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
        assert_eq!(r.column("its").unwrap(), vec![3.0]);
    }

    #[test]
    fn writes_to_nested_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/out.csv");
        let mut r = RunRecord::new(&["x"]);
        r.push(vec![1.0.into()]);
        r.write_csv(&path).unwrap();
        assert!(fs::read_to_string(path).unwrap().ends_with("x\n1.0000000000000000e0\n"));
    }
}
