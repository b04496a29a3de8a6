//! The sweep CSV: one row per grid point, floats with 17 significant digits,
//! empty fields for values a source does not provide.

use std::io::{Read, Write};

use site_entropy::scan::{Column, Driver, Grid, PointFlags, Record, Source, SweepResult};
use site_entropy::OccupationSet;

use crate::error::CliError;

pub const HEADER: [&str; 14] = [
    "g",
    "e0",
    "n",
    "m",
    "w0",
    "w_up",
    "w_down",
    "w2",
    "entropy",
    "d1_entropy",
    "d2_entropy",
    "d3_entropy",
    "source",
    "flags",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub g: f64,
    /// `e0, n, m, w0, w_up, w_down, w2`.
    pub observables: [Option<f64>; 7],
    pub entropy: f64,
    pub derivatives: [Option<f64>; 3],
    pub source: Source,
    pub flags: PointFlags,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub rows: Vec<Row>,
}

const OBSERVABLES: [Column; 7] = [
    Column::E0,
    Column::N,
    Column::M,
    Column::W0,
    Column::WUp,
    Column::WDown,
    Column::W2,
];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn parse(field: &str, line: usize) -> Result<f64, CliError> {
    field
        .parse()
        .map_err(|_| CliError::Csv(format!("line {line}: '{field}' is not a number")))
}

fn parse_opt(field: &str, line: usize) -> Result<Option<f64>, CliError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field, line).map(Some)
    }
}

impl Table {
    pub fn from_sweep(sweep: &SweepResult) -> Table {
        let rows = sweep
            .grid
            .values()
            .iter()
            .zip(&sweep.records)
            .enumerate()
            .map(|(i, (&g, rec))| Row {
                g,
                observables: OBSERVABLES.map(|c| rec.value(c)),
                entropy: rec.entropy,
                derivatives: std::array::from_fn(|k| sweep.entropy_derivatives[k].as_ref().map(|d| d[i])),
                source: sweep.source,
                flags: rec.flags,
            })
            .collect();
        Table { rows }
    }

    /// Rebuilds a sweep; derivative columns are recomputed from the entropy.
    pub fn to_sweep(&self, driver: Driver) -> Result<SweepResult, CliError> {
        let source = self
            .rows
            .first()
            .map(|r| r.source)
            .ok_or_else(|| CliError::Csv("no rows".into()))?;
        let grid = Grid::from_values(self.rows.iter().map(|r| r.g).collect())?;
        let records = self
            .rows
            .iter()
            .map(|r| {
                let [e0, _, _, w0, w_up, w_down, w2] = r.observables;
                let occupations = match (w0, w_up, w_down, w2) {
                    (Some(a), Some(b), Some(c), Some(d)) => Some(OccupationSet::from_probabilities(a, b, c, d)?),
                    _ => None,
                };
                Ok(Record {
                    e0,
                    occupations,
                    entropy: r.entropy,
                    flags: r.flags,
                })
            })
            .collect::<Result<Vec<_>, site_entropy::Error>>()?;
        Ok(SweepResult::new(driver, source, grid, records)?)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(HEADER)?;
        for r in &self.rows {
            let mut fields = vec![fmt(r.g)];
            fields.extend(r.observables.iter().map(|&x| fmt_opt(x)));
            fields.push(fmt(r.entropy));
            fields.extend(r.derivatives.iter().map(|&x| fmt_opt(x)));
            fields.push(r.source.to_string());
            fields.push(r.flags.to_string());
            w.write_record(&fields)?;
        }
        w.flush().map_err(|e| CliError::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }

    pub fn read<R: Read>(input: R) -> Result<Table, CliError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers()?.clone();
        if header.iter().ne(HEADER) {
            return Err(CliError::Csv(format!(
                "unexpected header '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let f = |k: usize| rec.get(k).unwrap_or("");
            let mut observables = [None; 7];
            for (k, slot) in observables.iter_mut().enumerate() {
                *slot = parse_opt(f(k + 1), line)?;
            }
            rows.push(Row {
                g: parse(f(0), line)?,
                observables,
                entropy: parse(f(8), line)?,
                derivatives: [parse_opt(f(9), line)?, parse_opt(f(10), line)?, parse_opt(f(11), line)?],
                source: f(12)
                    .parse()
                    .map_err(|e: site_entropy::Error| CliError::Csv(format!("line {line}: {e}")))?,
                flags: f(13)
                    .parse()
                    .map_err(|e: site_entropy::Error| CliError::Csv(format!("line {line}: {e}")))?,
            });
        }
        Ok(Table { rows })
    }
}
