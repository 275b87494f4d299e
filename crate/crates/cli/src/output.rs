use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::Effective;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Reproducibility header: everything needed to replay the run.
#[derive(Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub grid: String,
    pub config: BTreeMap<String, BTreeMap<String, String>>,
}

impl Header {
    pub fn new(command: &str, seed: u64, grid: String, eff: &Effective) -> Self {
        Header {
            tool: "dyadic",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            grid,
            config: eff.to_map(),
        }
    }
}

/// Rows of a CSV report.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn numeric(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows.into_iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        }
    }

    /// Flattens the scalar leaves of a JSON value into `key,value` rows.
    pub fn flatten(value: &serde_json::Value) -> Self {
        fn walk(prefix: &str, v: &serde_json::Value, rows: &mut Vec<Vec<String>>) {
            match v {
                serde_json::Value::Object(m) => {
                    for (k, x) in m {
                        let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                        walk(&p, x, rows);
                    }
                }
                serde_json::Value::Array(a) => {
                    for (i, x) in a.iter().enumerate() {
                        walk(&format!("{prefix}.{i}"), x, rows);
                    }
                }
                serde_json::Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
                other => rows.push(vec![prefix.to_string(), other.to_string()]),
            }
        }
        let mut rows = Vec::new();
        walk("", value, &mut rows);
        Table { columns: vec!["key".into(), "value".into()], rows }
    }
}

pub fn render_json(header: &Header, report: &serde_json::Value) -> Vec<u8> {
    #[derive(Serialize)]
    struct Envelope<'a> {
        header: &'a Header,
        report: &'a serde_json::Value,
    }
    let mut out = serde_json::to_vec_pretty(&Envelope { header, report }).expect("reports serialize");
    out.push(b'\n');
    out
}

/// CSV preceded by `#` lines holding the header; the commented block is itself a
/// valid configuration file.
pub fn render_csv(header: &Header, eff: &Effective, table: &Table) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "# {} {} {} seed={} grid={}", header.tool, header.version, header.command, header.seed, header.grid)
        .expect("write to memory");
    for line in eff.to_ini().lines() {
        writeln!(out, "# {line}").expect("write to memory");
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns).expect("write to memory");
    for row in &table.rows {
        w.write_record(row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> std::io::Result<()> {
    match path {
        Some(p) => atomic_write(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}
