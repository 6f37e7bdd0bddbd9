//! File formats.
//!
//! Every CSV starts with `#`-prefixed `key: value` metadata lines followed by
//! a header row. Times are written in seconds with `{:e}` formatting and
//! dimensionless values with `{}`; both are shortest round-trip
//! representations, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bell::ThetaRow;
use crate::error::{Error, Result};
use crate::model::{DecayRecord, Flavor, MesonParams, TimePair};
use crate::montecarlo::{BatchMeta, BinnedCorrelation};

pub const EVENTS_HEADER: [&str; 4] = ["t_l_s", "t_r_s", "flavor_l", "flavor_r"];
pub const FIG2_HEADER: [&str; 3] = ["theta_rad", "r_qm", "lrt_bound"];
pub const BINNED_HEADER: [&str; 4] = ["dt_center_s", "c_est", "stderr", "n_events"];
pub const FIG3_HEADER: [&str; 5] = ["delta_t_s", "beta", "criterion", "p_s", "stderr"];

pub const TOOL_VERSION: &str = concat!("mesonbell ", env!("CARGO_PKG_VERSION"));

/// Provenance written into every output: tool version, command and the
/// full set of effective parameters. Keys are kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub command: String,
    pub params: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            tool: TOOL_VERSION.to_string(),
            command: command.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl ToString) {
        self.params.insert(key.into(), value.to_string());
    }

    pub fn write_comments<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# tool: {}", self.tool)?;
        writeln!(w, "# command: {}", self.command)?;
        for (k, v) in &self.params {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_table<W: Write>(
    w: W,
    meta: &Metadata,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = w;
    meta.write_comments(&mut w)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes to `path`, or to stdout for `-`.
pub fn with_output<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    if path.as_os_str() == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        f(&mut lock)?;
        lock.flush()?;
    } else {
        let mut w = create(path)?;
        f(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn write_events<W: Write>(w: W, records: &[DecayRecord], meta: &Metadata) -> Result<()> {
    write_table(
        w,
        meta,
        &EVENTS_HEADER,
        records.iter().map(|r| {
            vec![
                format!("{:e}", r.times.t_l),
                format!("{:e}", r.times.t_r),
                r.flavor_l.sign().to_string(),
                r.flavor_r.sign().to_string(),
            ]
        }),
    )
}

#[derive(Debug, Deserialize)]
struct EventRow {
    t_l_s: f64,
    t_r_s: f64,
    flavor_l: i64,
    flavor_r: i64,
}

/// Reads an events CSV, skipping `#` lines.
pub fn read_events<R: std::io::Read>(r: R) -> Result<Vec<DecayRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(EVENTS_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "events header must be {}, got {}",
            EVENTS_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (line, row) in reader.deserialize::<EventRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("events row {}: {e}", line + 1)))?;
        records.push(DecayRecord {
            times: TimePair::new(row.t_l_s, row.t_r_s)?,
            flavor_l: Flavor::from_sign(row.flavor_l)?,
            flavor_r: Flavor::from_sign(row.flavor_r)?,
        });
    }
    Ok(records)
}

pub fn read_events_file(path: &Path) -> Result<Vec<DecayRecord>> {
    read_events(open(path)?)
}

/// JSON sidecar of an events file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSidecar {
    pub model: String,
    pub seed: u64,
    pub n: usize,
    pub delta_m: f64,
    pub gamma: f64,
    #[serde(default)]
    pub meta: Metadata,
}

impl EventSidecar {
    pub fn from_batch(meta: &BatchMeta, provenance: Metadata) -> Self {
        Self {
            model: meta.model_id.clone(),
            seed: meta.seed,
            n: meta.n,
            delta_m: meta.params.delta_m,
            gamma: meta.params.gamma,
            meta: provenance,
        }
    }

    pub fn params(&self) -> Result<MesonParams> {
        MesonParams::new("file", self.delta_m, self.gamma)
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<EventSidecar> {
    Ok(serde_json::from_reader(open(path)?)?)
}

/// Path of the sidecar belonging to an events file: `X.events.csv` maps to
/// `X.events.json`, anything else gets `.json` appended.
pub fn sidecar_path(events_path: &Path) -> std::path::PathBuf {
    match events_path.extension() {
        Some(ext) if ext == "csv" => events_path.with_extension("json"),
        _ => {
            let mut s = events_path.as_os_str().to_owned();
            s.push(".json");
            s.into()
        }
    }
}

pub fn write_fig2<W: Write>(w: W, rows: &[ThetaRow], meta: &Metadata) -> Result<()> {
    write_table(
        w,
        meta,
        &FIG2_HEADER,
        rows.iter()
            .map(|r| vec![r.theta.to_string(), r.r_qm.to_string(), r.bound.to_string()]),
    )
}

pub fn write_binned<W: Write>(w: W, rows: &[BinnedCorrelation], meta: &Metadata) -> Result<()> {
    write_table(
        w,
        meta,
        &BINNED_HEADER,
        rows.iter().map(|r| {
            vec![
                format!("{:e}", r.dt_center),
                r.estimate.value.to_string(),
                r.estimate.stderr.to_string(),
                r.estimate.n.to_string(),
            ]
        }),
    )
}

/// One row of the space-like fraction table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Row {
    pub delta_t: f64,
    pub beta: f64,
    pub criterion: String,
    pub p_s: f64,
    pub stderr: f64,
}

pub fn write_fig3<W: Write>(w: W, rows: &[Fig3Row], meta: &Metadata) -> Result<()> {
    write_table(
        w,
        meta,
        &FIG3_HEADER,
        rows.iter().map(|r| {
            vec![
                format!("{:e}", r.delta_t),
                r.beta.to_string(),
                r.criterion.clone(),
                r.p_s.to_string(),
                r.stderr.to_string(),
            ]
        }),
    )
}

/// Reads `#` metadata lines at the top of a CSV back into `key -> value`.
pub fn read_comment_metadata<R: std::io::Read>(r: R) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        let Some(body) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = body.trim().split_once(": ") {
            out.insert(k.to_string(), v.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t_l: f64, t_r: f64, a: Flavor, b: Flavor) -> DecayRecord {
        DecayRecord {
            times: TimePair::new(t_l, t_r).unwrap(),
            flavor_l: a,
            flavor_r: b,
        }
    }

    #[test]
    fn events_round_trip() {
        let records = vec![
            rec(1.25e-12, 3.0e-13, Flavor::B0, Flavor::B0Bar),
            rec(0.0, 7.123456789e-12, Flavor::B0Bar, Flavor::B0Bar),
        ];
        let meta = Metadata::new("simulate").with("seed", 7).with("model", "qm");
        let mut buf = Vec::new();
        write_events(&mut buf, &records, &meta).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# tool: mesonbell"));
        assert!(text.contains("\nt_l_s,t_r_s,flavor_l,flavor_r\n1.25e-12,3e-13,1,-1\n"));
        assert_eq!(read_events(&buf[..]).unwrap(), records);
        let m = read_comment_metadata(&buf[..]).unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["command"], "simulate");
    }

    #[test]
    fn events_reject_bad_input() {
        assert!(read_events("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_events("t_l_s,t_r_s,flavor_l,flavor_r\n1e-12,1e-12,2,1\n".as_bytes()).is_err());
        assert!(read_events("t_l_s,t_r_s,flavor_l,flavor_r\n-1e-12,1e-12,1,1\n".as_bytes()).is_err());
        assert!(read_events("t_l_s,t_r_s,flavor_l,flavor_r\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("run.events.csv")), Path::new("run.events.json"));
        assert_eq!(sidecar_path(Path::new("run.dat")), Path::new("run.dat.json"));
    }

    #[test]
    fn fig2_header_and_format() {
        let rows = [ThetaRow { theta: 0.0, r_qm: 2.0, bound: 2.0 }];
        let mut buf = Vec::new();
        write_fig2(&mut buf, &rows, &Metadata::new("fig2")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with("theta_rad,r_qm,lrt_bound\n0,2,2\n"));
    }
}
