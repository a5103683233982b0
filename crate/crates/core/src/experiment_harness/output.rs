use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentId, ResultBundle, Row, RunMeta, Task, TaskOutput, FORMAT_VERSION};
use crate::error::{Error, Result};

const KEY_COLUMNS: [&str; 6] = ["n", "n_a", "sample", "seed", "stream", "t"];

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// `<out>.meta.json`: config echo, columns and run metadata.
pub fn meta_path(path: &Path) -> PathBuf {
    with_suffix(path, ".meta.json")
}

/// `<out>.nested.jsonl`: one JSON object per task with nested results.
pub fn nested_path(path: &Path) -> PathBuf {
    with_suffix(path, ".nested.jsonl")
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format_version: u32,
    complete: bool,
    config: ExperimentConfig,
    columns: Vec<String>,
    meta: Option<RunMeta>,
}

fn header(c: &ExperimentConfig, columns: &[String]) -> String {
    let mut h = String::new();
    h.push_str(&format!("# chronoscope {} output, format {FORMAT_VERSION}\n", c.experiment));
    h.push_str("# units: hbar = 1, times in inverse coupling units, Fisher information in 1/time^2, entropies in nats\n");
    h.push_str("# a row regenerates from stream_rng(seed, stream) and the config in the .meta.json sidecar; empty t marks a time-independent row\n");
    if let Some(m) = &c.model {
        h.push_str(&format!("# model: {}\n", serde_json::to_string(m).unwrap_or_default()));
    }
    let mut names: Vec<&str> = KEY_COLUMNS.to_vec();
    names.extend(columns.iter().map(String::as_str));
    h.push_str(&names.join(","));
    h.push('\n');
    h
}

fn format_row(r: &Row) -> String {
    let mut s = format!(
        "{},{},{},{},{},{}",
        r.n,
        r.n_a,
        r.sample,
        r.seed,
        r.stream,
        r.t.map(|t| t.to_string()).unwrap_or_default()
    );
    for v in &r.values {
        s.push(',');
        s.push_str(&v.to_string());
    }
    s.push('\n');
    s
}

fn parse_row(line: &str, columns: usize) -> Result<Row> {
    let f: Vec<&str> = line.split(',').collect();
    let bad = || Error::Config(format!("malformed row: {line}"));
    if f.len() != KEY_COLUMNS.len() + columns {
        return Err(bad());
    }
    let int = |s: &str| s.parse::<u64>().map_err(|_| bad());
    let float = |s: &str| s.parse::<f64>().map_err(|_| bad());
    Ok(Row {
        n: int(f[0])? as usize,
        n_a: int(f[1])? as usize,
        sample: int(f[2])? as usize,
        seed: int(f[3])?,
        stream: int(f[4])?,
        t: if f[5].is_empty() { None } else { Some(float(f[5])?) },
        values: f[6..].iter().map(|s| float(s)).collect::<Result<_>>()?,
    })
}

/// Complete lines of a CSV body, skipping comments and the column line.
fn read_rows(path: &Path, columns: usize) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for line in text.split_inclusive('\n') {
        // a torn final line has no newline
        let Some(line) = line.strip_suffix('\n') else { break };
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        rows.push(parse_row(line, columns)?);
    }
    Ok(rows)
}

fn read_nested(path: &Path) -> Result<Vec<serde_json::Value>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => out.push(v),
            // torn last line
            Err(_) => break,
        }
    }
    Ok(out)
}

fn write_atomic(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = with_suffix(path, ".tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the CSV, the nested JSON lines and the sidecar, each atomically.
pub fn write_bundle(bundle: &ResultBundle, path: &Path) -> Result<()> {
    let mut body = header(&bundle.config, &bundle.columns);
    for r in &bundle.rows {
        body.push_str(&format_row(r));
    }
    write_atomic(path, &body)?;
    let nested = nested_path(path);
    if bundle.nested.is_empty() {
        if nested.exists() {
            fs::remove_file(&nested)?;
        }
    } else {
        let mut s = String::new();
        for v in &bundle.nested {
            s.push_str(&serde_json::to_string(v)?);
            s.push('\n');
        }
        write_atomic(&nested, &s)?;
    }
    let side = Sidecar {
        format_version: bundle.format_version,
        complete: true,
        config: bundle.config.clone(),
        columns: bundle.columns.clone(),
        meta: Some(bundle.meta.clone()),
    };
    write_atomic(&meta_path(path), &serde_json::to_string_pretty(&side)?)
}

/// Reads a bundle written by [`write_bundle`].
pub fn load_bundle(path: &Path) -> Result<ResultBundle> {
    let side: Sidecar = serde_json::from_str(&fs::read_to_string(meta_path(path))?)?;
    if !side.complete {
        return Err(Error::Config(format!("{}: run did not finish", path.display())));
    }
    Ok(ResultBundle {
        format_version: side.format_version,
        rows: read_rows(path, side.columns.len())?,
        nested: read_nested(&nested_path(path))?,
        config: side.config,
        columns: side.columns,
        meta: side.meta.expect("complete runs carry metadata"),
    })
}

/// Rows of an earlier run of the same config, grouped by task stream.
#[derive(Default)]
pub(crate) struct Partial {
    rows: HashMap<u64, Vec<Row>>,
    nested: HashMap<u64, serde_json::Value>,
    needs_nested: bool,
}

impl Partial {
    /// The earlier output of `task` if it is complete.
    pub fn take(&mut self, task: &Task) -> Option<TaskOutput> {
        let complete = self.rows.get(&task.stream).is_some_and(|r| r.len() == task.expected_rows)
            && (!self.needs_nested || self.nested.contains_key(&task.stream));
        if !complete {
            return None;
        }
        Some(TaskOutput {
            rows: self.rows.remove(&task.stream)?,
            nested: self.nested.remove(&task.stream),
        })
    }
}

pub(crate) fn load_partial(path: &Path, c: &ExperimentConfig, columns: &[String]) -> Result<Partial> {
    let meta = meta_path(path);
    if !path.exists() {
        return Ok(Partial::default());
    }
    let side: Option<Sidecar> = fs::read_to_string(&meta).ok().and_then(|s| serde_json::from_str(&s).ok());
    match side {
        Some(s) if s.config == *c && s.columns == columns && s.format_version == FORMAT_VERSION => {}
        _ => {
            return Err(Error::Config(format!(
                "{} holds output of a different config; remove it or choose another output path",
                path.display()
            )))
        }
    }
    let mut p = Partial {
        needs_nested: c.experiment == ExperimentId::Mle,
        ..Default::default()
    };
    for r in read_rows(path, columns.len())? {
        p.rows.entry(r.stream).or_default().push(r);
    }
    for v in read_nested(&nested_path(path))? {
        if let Some(s) = v.get("stream").and_then(|s| s.as_u64()) {
            p.nested.insert(s, v);
        }
    }
    Ok(p)
}

/// Single writer for a run in progress: every finished task is appended
/// with one write.
pub(crate) struct Appender {
    csv: File,
    nested: Option<File>,
}

impl Appender {
    /// Starts the file afresh with the header and the reused task outputs.
    pub fn open<'a>(
        path: &Path,
        c: &ExperimentConfig,
        columns: &[String],
        reused: impl Iterator<Item = &'a TaskOutput>,
    ) -> Result<Self> {
        let mut body = header(c, columns);
        let mut nested_body = String::new();
        for o in reused {
            body.extend(o.rows.iter().map(format_row));
            if let Some(v) = &o.nested {
                nested_body.push_str(&serde_json::to_string(v)?);
                nested_body.push('\n');
            }
        }
        write_atomic(path, &body)?;
        let np = nested_path(path);
        let nested = if c.experiment == ExperimentId::Mle {
            write_atomic(&np, &nested_body)?;
            Some(OpenOptions::new().append(true).open(&np)?)
        } else {
            None
        };
        let side = Sidecar {
            format_version: FORMAT_VERSION,
            complete: false,
            config: c.clone(),
            columns: columns.to_vec(),
            meta: None,
        };
        write_atomic(&meta_path(path), &serde_json::to_string_pretty(&side)?)?;
        Ok(Appender {
            csv: OpenOptions::new().append(true).open(path)?,
            nested,
        })
    }

    pub fn append(&mut self, out: &TaskOutput) -> Result<()> {
        let block: String = out.rows.iter().map(format_row).collect();
        self.csv.write_all(block.as_bytes())?;
        self.csv.flush()?;
        if let (Some(f), Some(v)) = (self.nested.as_mut(), &out.nested) {
            f.write_all(format!("{}\n", serde_json::to_string(v)?).as_bytes())?;
            f.flush()?;
        }
        Ok(())
    }
}
