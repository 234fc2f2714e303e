//! Output formats. Every artifact starts with a header carrying the library
//! version and the fully resolved configuration of the run.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use hardy_core::HardyParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format {s:?}, expected json, jsonl or csv")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub format: String,
    pub config: serde_json::Value,
}

impl Header {
    pub fn new(command: &str, format: Format, config: &impl Serialize) -> Self {
        Header {
            tool: "hardy".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            format: format.to_string(),
            config: serde_json::to_value(config).expect("configs serialize"),
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct HeaderLine {
    pub header: Header,
}

/// A result set: rows for JSON and JSONL, and a CSV rendering.
pub struct Table<'a, T> {
    pub rows: &'a [T],
    pub csv_header: &'a str,
    pub csv_row: &'a dyn Fn(&T) -> String,
}

/// Renders the header followed by the rows in the chosen format.
pub fn render<T: Serialize>(header: &Header, table: &Table<T>) -> Vec<u8> {
    let mut out = Vec::new();
    match header.format.parse::<Format>().expect("header holds a valid format") {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                header: &'a Header,
                results: &'a [T],
            }
            let doc = Doc {
                header,
                results: table.rows,
            };
            serde_json::to_writer_pretty(&mut out, &doc).expect("rows serialize");
            out.push(b'\n');
        }
        Format::Jsonl => {
            serde_json::to_writer(&mut out, &HeaderLine { header: header.clone() })
                .expect("header serializes");
            out.push(b'\n');
            for row in table.rows {
                serde_json::to_writer(&mut out, row).expect("rows serialize");
                out.push(b'\n');
            }
        }
        Format::Csv => {
            let h = serde_json::to_string(&HeaderLine { header: header.clone() })
                .expect("header serializes");
            writeln!(out, "# {h}").unwrap();
            writeln!(out, "{}", table.csv_header).unwrap();
            for row in table.rows {
                writeln!(out, "{}", (table.csv_row)(row)).unwrap();
            }
        }
    }
    out
}

pub const PARAMS_CSV: &str = "regime,lattice,d,p,s,eps,delta,K";

pub fn params_csv(p: &HardyParams) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        p.regime,
        p.lattice,
        p.d,
        p.p,
        opt(p.s),
        p.eps,
        opt(p.delta),
        opt(p.k)
    )
}

pub fn opt<T: fmt::Display>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}
