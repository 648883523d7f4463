//! Design files: JSON and a plain adjacency text format.
//!
//! JSON: `{"n_variables", "n_tests", "tests": [[..], ..], "family", "seed"}`.
//!
//! Adjacency text: optional `#` comment lines (the writer records provenance as
//! `# family=<tag> seed=<u64>`), a header line `N M`, then exactly `M` lines of
//! space-separated variable indices. An empty line is an empty pool.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::{Family, PoolDesign, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Adjacency,
}

impl Format {
    /// `.json` means JSON, anything else the adjacency text format.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Adjacency,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "adj" | "adjacency" | "txt" | "text" => Ok(Format::Adjacency),
            other => Err(Error::Param(format!("unknown design format '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DesignFile {
    n_variables: usize,
    n_tests: usize,
    tests: Vec<Vec<u32>>,
    #[serde(default = "custom")]
    family: String,
    #[serde(default)]
    seed: u64,
}

fn custom() -> String {
    Family::Custom.to_string()
}

pub fn to_json(design: &PoolDesign) -> String {
    let file = DesignFile {
        n_variables: design.n_variables(),
        n_tests: design.n_tests(),
        tests: design.pools().to_vec(),
        family: design.provenance().family.to_string(),
        seed: design.provenance().seed,
    };
    serde_json::to_string(&file).expect("design serialises")
}

pub fn from_json(text: &str) -> Result<PoolDesign> {
    let file: DesignFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("column {}: {e}", e.column()),
    })?;
    if file.n_tests != file.tests.len() {
        return Err(Error::Validation(format!(
            "n_tests = {} but {} tests listed",
            file.n_tests,
            file.tests.len()
        )));
    }
    let family: Family = file.family.parse()?;
    PoolDesign::new(
        file.n_variables,
        file.tests,
        Provenance {
            family,
            seed: file.seed,
        },
    )
}

pub fn to_adjacency(design: &PoolDesign) -> String {
    let prov = design.provenance();
    let mut out = format!("# family={} seed={}\n", prov.family, prov.seed);
    out.push_str(&format!("{} {}\n", design.n_variables(), design.n_tests()));
    for pool in design.pools() {
        let line: Vec<String> = pool.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn from_adjacency(text: &str) -> Result<PoolDesign> {
    let mut provenance = Provenance::default();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((no, line)) = lines.next_if(|(_, l)| l.trim_start().starts_with('#')) {
        parse_provenance(line, no + 1, &mut provenance)?;
    }
    let (header_no, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing 'N M' header".into(),
    })?;
    let header_no = header_no + 1;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: header_no,
            msg: format!("expected 'N M', got '{header}'"),
        });
    }
    let n: usize = parse_field(dims[0], header_no, "N")?;
    let m: usize = parse_field(dims[1], header_no, "M")?;
    let mut tests = Vec::with_capacity(m);
    for (no, line) in lines {
        if tests.len() == m {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Validation(format!(
                "header declares M = {m} tests but line {} holds another",
                no + 1
            )));
        }
        let pool = line
            .split_whitespace()
            .map(|tok| parse_field::<u32>(tok, no + 1, "variable index"))
            .collect::<Result<Vec<_>>>()?;
        tests.push(pool);
    }
    if tests.len() != m {
        return Err(Error::Validation(format!(
            "header declares M = {m} tests but {} found",
            tests.len()
        )));
    }
    PoolDesign::new(n, tests, provenance)
}

fn parse_provenance(line: &str, no: usize, prov: &mut Provenance) -> Result<()> {
    for tok in line.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("family=") {
            prov.family = v.parse().map_err(|_| Error::Parse {
                line: no,
                msg: format!("unknown family '{v}'"),
            })?;
        } else if let Some(v) = tok.strip_prefix("seed=") {
            prov.seed = parse_field(v, no, "seed")?;
        }
    }
    Ok(())
}

fn parse_field<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

pub fn save_design(design: &PoolDesign, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => to_json(design),
        Format::Adjacency => to_adjacency(design),
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn load_design(path: &Path, format: Format) -> Result<PoolDesign> {
    let text = fs::read_to_string(path)?;
    match format {
        Format::Json => from_json(&text),
        Format::Adjacency => from_adjacency(&text),
    }
}
