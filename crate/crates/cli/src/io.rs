//! CSV series and JSON document input and output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use levyfit::likelihood::TimeSeries;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Columns of a series file: optional time stamps, names and values.
#[derive(Debug, Clone)]
pub struct Table {
    pub times: Option<Vec<f64>>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn reader(path: &Path) -> CliResult<csv::Reader<fs::File>> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file))
}

/// Read a header-first CSV whose columns are `t,x1,...,xd` or `x1,...,xd`.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::data(format!("{}: unreadable header: {e}", path.display())))?
        .clone();
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(CliError::data(format!(
            "{}: header has empty column names",
            path.display()
        )));
    }
    if names.iter().any(|h| h.parse::<f64>().is_ok()) {
        return Err(CliError::data(format!(
            "{}: first line must be a header of column names",
            path.display()
        )));
    }
    let timed = names[0] == "t";
    let width = names.len();
    if timed && width < 2 {
        return Err(CliError::data(format!(
            "{}: no state columns besides t",
            path.display()
        )));
    }
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec =
            rec.map_err(|e| CliError::data(format!("{} line {line}: {e}", path.display())))?;
        if rec.len() != width {
            return Err(CliError::data(format!(
                "{} line {line}: {} fields, header has {width}",
                path.display(),
                rec.len()
            )));
        }
        let mut vals = Vec::with_capacity(width);
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| {
                CliError::data(format!(
                    "{} line {line}, column '{}': '{cell}' is not a number",
                    path.display(),
                    names[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::data(format!(
                    "{} line {line}, column '{}': non-finite value",
                    path.display(),
                    names[c]
                )));
            }
            vals.push(v);
        }
        if timed {
            times.push(vals.remove(0));
        }
        rows.push(vals);
    }
    if rows.len() < 2 {
        return Err(CliError::data(format!(
            "{}: at least 2 data rows are needed, found {}",
            path.display(),
            rows.len()
        )));
    }
    Ok(Table {
        times: timed.then_some(times),
        names: if timed { names[1..].to_vec() } else { names },
        rows,
    })
}

/// Build a series from a table. Time stamps, when present, fix the sampling
/// step; otherwise `delta` must be supplied.
pub fn table_to_series(table: &Table, delta: Option<f64>) -> CliResult<TimeSeries> {
    let ts = match (&table.times, delta) {
        (Some(t), _) => TimeSeries::with_times(t.clone(), &table.rows)?,
        (None, Some(d)) => TimeSeries::new(d, &table.rows)?,
        (None, None) => return Err(CliError::config(
            "the data file has no t column; give the sampling step in the config or with --delta-t",
        )),
    };
    Ok(ts)
}

/// Read a series file; see [`read_table`] and [`table_to_series`].
pub fn ingest_csv(path: &Path, delta: Option<f64>) -> CliResult<TimeSeries> {
    table_to_series(&read_table(path)?, delta)
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| {
                    CliError::config(format!("cannot create {}: {e}", dir.display()))
                })?;
            }
            let f = fs::File::create(p)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
    }
}

/// Write columns of numbers under `header` to `path`, or stdout when `None`.
pub fn write_csv(
    path: Option<&Path>,
    header: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(path)?);
    let result = (|| {
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    match result {
        Ok(()) => Ok(()),
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(e) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe) => {
            Ok(())
        }
        Err(e) => Err(CliError::config(format!("write failed: {e}"))),
    }
}

/// Write a series with a leading `t` column.
pub fn write_series(path: Option<&Path>, ts: &TimeSeries, names: &[String]) -> CliResult<()> {
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    let delta = ts.delta();
    write_csv(
        path,
        &header,
        (0..ts.len()).map(|t| {
            let mut r = vec![t as f64 * delta];
            r.extend_from_slice(ts.row(t));
            r
        }),
    )
}

/// JSON formatter writing every float with 17 significant digits.
struct Fixed17<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with fixed 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Fixed17(serde_json::ser::PrettyFormatter::new()),
    );
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::config(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = sink(Some(path))?;
    w.write_all(to_json(value)?.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

/// Parse a JSON document; failures are configuration errors.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
