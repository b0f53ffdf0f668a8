use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "eastlab";

/// Everything that determines the content of an output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub subcommand: String,
    /// Resolved parameter values, keys sorted.
    pub params: Value,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn new<P: Serialize>(subcommand: &str, params: &P, seed: u64, out: Option<PathBuf>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params: serde_json::to_value(params).expect("parameters serialize"),
            seed,
            out,
        }
    }

    /// First 16 hex digits of SHA-256 over the subcommand, parameters and
    /// seed. The output path is left out so that moving a file does not
    /// change its provenance.
    pub fn hash(&self) -> String {
        let canonical = serde_json::json!({
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn header(&self) -> Header {
        Header {
            tool: TOOL,
            version: eastlab_core::VERSION,
            runspec: self.hash(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub runspec: String,
    pub seed: u64,
}

impl Header {
    pub fn csv_line(&self) -> String {
        format!(
            "# {} {} runspec={} seed={}",
            self.tool, self.version, self.runspec, self.seed
        )
    }
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    header: Header,
    runspec: &'a RunSpec,
    result: &'a T,
}

/// Destination of one run; opened before any computation so that an
/// unwritable path fails fast.
pub struct Sink {
    path: Option<PathBuf>,
    writer: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let writer: Box<dyn Write> = match path {
            Some(p) => {
                let file = File::create(p).with_context(|| format!("cannot write output file {}", p.display()))?;
                Box::new(BufWriter::new(file))
            }
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            writer,
        })
    }

    fn finish(mut self) -> Result<()> {
        let path = self.path.clone();
        self.writer.flush().with_context(|| match path {
            Some(p) => format!("cannot write output file {}", p.display()),
            None => "cannot write to standard output".to_string(),
        })
    }

    pub fn json<T: Serialize>(mut self, run: &RunSpec, result: &T) -> Result<()> {
        let doc = JsonDoc {
            header: run.header(),
            runspec: run,
            result,
        };
        serde_json::to_writer(&mut self.writer, &doc)?;
        writeln!(self.writer)?;
        self.finish()
    }

    pub fn csv(mut self, run: &RunSpec, table: &Table) -> Result<()> {
        writeln!(self.writer, "{}", run.header().csv_line())?;
        table.write_to(&mut self.writer)?;
        self.finish()
    }

    pub fn text(mut self, run: &RunSpec, body: &str) -> Result<()> {
        writeln!(self.writer, "{}", run.header().csv_line())?;
        self.writer.write_all(body.as_bytes())?;
        self.finish()
    }
}

/// Column-oriented CSV builder.
#[derive(Debug, Clone, Default)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        let line = |cells: &[String]| cells.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
        write!(w, "{}\r\n", line(&self.columns))?;
        for row in &self.rows {
            write!(w, "{}\r\n", line(row))?;
        }
        Ok(())
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Shortest round-trip representation; `inf` and `nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_path() {
        let a = RunSpec::new("fpp", &serde_json::json!({"d": 2}), 7, None);
        let b = RunSpec::new("fpp", &serde_json::json!({"d": 2}), 7, Some("x.csv".into()));
        let c = RunSpec::new("fpp", &serde_json::json!({"d": 2}), 8, None);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(quote("1.5"), "1.5");
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
