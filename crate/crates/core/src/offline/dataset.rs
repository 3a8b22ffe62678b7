use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::context::check_arm;
use crate::error::ContractError;
use crate::history::fmt_g17;

/// One logged interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedEvent {
    /// Logged action, 1-based.
    pub choice: usize,
    pub reward: f64,
    /// Probability with which the logging policy chose `choice`.
    pub propensity: Option<f64>,
    /// The `d` context features.
    pub context: Vec<f64>,
}

impl LoggedEvent {
    pub(crate) fn require_propensity(&self, index: usize) -> Result<f64, ContractError> {
        match self.propensity {
            None => Err(ContractError::MissingPropensity(index)),
            Some(p) if p > 0.0 && p <= 1.0 => Ok(p),
            Some(p) => Err(ContractError::InvalidPropensity(p)),
        }
    }
}

/// Logged events in evaluation order, all conforming to `(k, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedDataset {
    events: Vec<LoggedEvent>,
    k: usize,
    d: usize,
}

/// Column layout of a log file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogFormat {
    pub k: usize,
    pub d: usize,
    /// Column 3 holds the propensity.
    pub has_propensity: bool,
    /// Actions are written 0-based and get shifted to 1-based on load.
    pub zero_based: bool,
}

impl LogFormat {
    pub fn new(k: usize, d: usize) -> Self {
        Self {
            k,
            d,
            has_propensity: false,
            zero_based: false,
        }
    }

    pub fn with_propensity(mut self) -> Self {
        self.has_propensity = true;
        self
    }

    fn columns(&self) -> usize {
        2 + usize::from(self.has_propensity) + self.d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid log format: {0}")]
    Format(String),
    #[error("{} malformed rows; first: {}", .0.len(), .0[0])]
    Rows(Vec<RowError>),
}

impl LoggedDataset {
    pub fn new(events: Vec<LoggedEvent>, k: usize, d: usize) -> Result<Self, ContractError> {
        if k == 0 {
            return Err(ContractError::InvalidParameter(
                "k must be at least 1".into(),
            ));
        }
        for e in &events {
            check_arm(e.choice, k)?;
            if e.context.len() != d {
                return Err(ContractError::DimensionMismatch {
                    expected: d,
                    got: e.context.len(),
                });
            }
            if let Some(p) = e.propensity {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(ContractError::InvalidPropensity(p));
                }
            }
        }
        Ok(Self { events, k, d })
    }

    pub fn events(&self) -> &[LoggedEvent] {
        &self.events
    }

    pub fn get(&self, t: usize) -> Option<&LoggedEvent> {
        t.checked_sub(1).and_then(|i| self.events.get(i))
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn has_propensities(&self) -> bool {
        self.events.iter().all(|e| e.propensity.is_some())
    }

    /// Parses a log, reporting every malformed row rather than the first.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn read(reader: impl BufRead, format: LogFormat) -> Result<Self, LoadError> {
        if format.k == 0 {
            return Err(LoadError::Format("k must be at least 1".into()));
        }
        let mut events = Vec::new();
        let mut errors = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match parse_row(trimmed, format) {
                Ok(e) => events.push(e),
                Err(message) => errors.push(RowError {
                    line: i + 1,
                    message,
                }),
            }
        }
        if !errors.is_empty() {
            return Err(LoadError::Rows(errors));
        }
        Ok(Self {
            events,
            k: format.k,
            d: format.d,
        })
    }

    pub fn load(path: impl AsRef<Path>, format: LogFormat) -> Result<Self, LoadError> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file), format)
    }

    /// Writes the log in the 1-based text format, with a propensity column
    /// when every event has one.
    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        let with_p = self.has_propensities() && !self.is_empty();
        for e in &self.events {
            write!(out, "{} {}", e.choice, fmt_g17(e.reward))?;
            if with_p {
                write!(out, " {}", fmt_g17(e.propensity.unwrap_or(1.0)))?;
            }
            for &x in &e.context {
                write!(out, " {}", fmt_g17(x))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write(&mut out)?;
        out.flush()
    }
}

fn parse_row(line: &str, format: LogFormat) -> Result<LoggedEvent, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != format.columns() {
        return Err(format!(
            "expected {} columns, found {}",
            format.columns(),
            fields.len()
        ));
    }
    let real = |s: &str| -> Result<f64, String> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("{s:?} is not a finite number")),
        }
    };
    let raw: i64 = fields[0]
        .parse()
        .map_err(|_| format!("action {:?} is not an integer", fields[0]))?;
    let choice = raw + i64::from(format.zero_based);
    if choice < 1 || choice > format.k as i64 {
        return Err(format!("action {raw} is outside the {} arms", format.k));
    }
    let reward = real(fields[1])?;
    let (propensity, rest) = if format.has_propensity {
        let p = real(fields[2])?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(format!("propensity {p} is outside (0, 1]"));
        }
        (Some(p), &fields[3..])
    } else {
        (None, &fields[2..])
    };
    let context = rest.iter().map(|s| real(s)).collect::<Result<_, _>>()?;
    Ok(LoggedEvent {
        choice: choice as usize,
        reward,
        propensity,
        context,
    })
}
