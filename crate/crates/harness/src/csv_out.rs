//! CSV emission and parse-back for sweep records.

use crate::config::Scheme;
use crate::sweep::{Status, SweepRecord};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const HEADER: [&str; 14] = [
    "scheme",
    "alpha_fb",
    "snr_db",
    "J",
    "B_tot_bits",
    "rate_lower_bits",
    "rate_genie_upper_bits",
    "analytic_gap_bits",
    "rate_csit_bits",
    "n_trials",
    "stderr_bits",
    "seed",
    "mc_gap_bits",
    "status",
];

pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}, line {line}: {msg}")]
    Field {
        path: String,
        line: u64,
        msg: String,
    },
}

/// Rounds to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("valid float")
}

/// Formats at nine significant digits, dropping trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let y = round_sig(x);
    let a = y.abs();
    if y == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{y}")
    } else {
        format!("{y:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

impl SweepRecord {
    /// The record as it reads back from CSV.
    pub fn rounded(&self) -> Self {
        let r = |x: Option<f64>| x.map(round_sig);
        Self {
            alpha_fb: round_sig(self.alpha_fb),
            snr_db: round_sig(self.snr_db),
            b_tot_bits: r(self.b_tot_bits),
            rate_lower_bits: r(self.rate_lower_bits),
            rate_genie_upper_bits: r(self.rate_genie_upper_bits),
            analytic_gap_bits: r(self.analytic_gap_bits),
            rate_csit_bits: round_sig(self.rate_csit_bits),
            stderr_bits: r(self.stderr_bits),
            mc_gap_bits: r(self.mc_gap_bits),
            ..self.clone()
        }
    }

    fn fields(&self) -> [String; 14] {
        [
            self.scheme.name().to_string(),
            fmt_sig(self.alpha_fb),
            fmt_sig(self.snr_db),
            self.j.map(|j| j.to_string()).unwrap_or_default(),
            opt(self.b_tot_bits),
            opt(self.rate_lower_bits),
            opt(self.rate_genie_upper_bits),
            opt(self.analytic_gap_bits),
            fmt_sig(self.rate_csit_bits),
            self.n_trials.to_string(),
            opt(self.stderr_bits),
            self.seed.to_string(),
            opt(self.mc_gap_bits),
            self.status.as_str().to_string(),
        ]
    }
}

/// Writes records with LF line endings.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<(), CsvError> {
    let shown = path.display().to_string();
    let file = std::fs::File::create(path).map_err(|source| CsvError::Io {
        path: shown.clone(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file)).map_err(|source| CsvError::Csv {
        path: shown,
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>, CsvError> {
    let shown = path.display().to_string();
    let mut rd = csv::Reader::from_path(path).map_err(|source| CsvError::Csv {
        path: shown.clone(),
        source,
    })?;
    let header: Vec<String> = rd
        .headers()
        .map_err(|source| CsvError::Csv {
            path: shown.clone(),
            source,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != HEADER {
        return Err(CsvError::Field {
            path: shown,
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|source| CsvError::Csv {
            path: shown.clone(),
            source,
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |msg: String| CsvError::Field {
            path: shown.clone(),
            line,
            msg,
        };
        let num = |i: usize| -> Result<f64, CsvError> {
            match &row[i] {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                s => s
                    .parse()
                    .map_err(|_| bad(format!("{}: bad number {s:?}", HEADER[i]))),
            }
        };
        let opt_num = |i: usize| -> Result<Option<f64>, CsvError> {
            if row[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<u64, CsvError> {
            row[i]
                .parse()
                .map_err(|_| bad(format!("{}: bad integer {:?}", HEADER[i], &row[i])))
        };
        out.push(SweepRecord {
            scheme: Scheme::from_name(&row[0])
                .ok_or_else(|| bad(format!("unknown scheme {:?}", &row[0])))?,
            alpha_fb: num(1)?,
            snr_db: num(2)?,
            j: if row[3].is_empty() {
                None
            } else {
                Some(int(3)? as usize)
            },
            b_tot_bits: opt_num(4)?,
            rate_lower_bits: opt_num(5)?,
            rate_genie_upper_bits: opt_num(6)?,
            analytic_gap_bits: opt_num(7)?,
            rate_csit_bits: num(8)?,
            n_trials: int(9)? as usize,
            stderr_bits: opt_num(10)?,
            seed: int(11)?,
            mc_gap_bits: opt_num(12)?,
            status: Status::parse(&row[13])
                .ok_or_else(|| bad(format!("unknown status {:?}", &row[13])))?,
        });
    }
    Ok(out)
}
