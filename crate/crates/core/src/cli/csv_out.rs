//! CSV assembly: `#` metadata lines, one header row, LF endings and
//! numbers with 17 significant digits.

use super::CliError;

/// `x` with 17 significant digits in scientific notation; `NaN`, `inf`
/// and `-inf` for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Compact form for metadata values.
pub(crate) fn format_meta(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub(crate) struct Table {
    meta: Vec<(String, String)>,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[String]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header).map_err(io_error)?;
        Ok(Table { meta: Vec::new(), writer })
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        self.writer.write_record(cells).map_err(io_error)
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<(), CliError> {
        let cells: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
        self.row(&cells)
    }

    pub fn finish(self) -> Result<String, CliError> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let body = self.writer.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| CliError::Numerical(e.to_string()))?);
        Ok(out)
    }
}

fn io_error(e: csv::Error) -> CliError {
    CliError::Config(format!("cannot write CSV: {e}"))
}
