use std::fmt::Write as _;

use thiserror::Error;

use super::AigNetwork;

/// Concrete stimulus for a counterexample: initial latch values and one row
/// of input values per frame.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub init: Vec<bool>,
    pub inputs: Vec<Vec<bool>>,
}

/// A property violation at `bound` of bad property `bad_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub bound: usize,
    pub bad_index: usize,
    pub trace: Trace,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("witness ends before the terminating \".\"")]
    Unterminated,
    #[error("witness has {found} {what} values, network has {expected}")]
    Width { what: &'static str, expected: usize, found: usize },
}

fn bits(row: &[bool]) -> String {
    row.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Renders a counterexample in the AIGER witness format.
pub fn write_witness(cex: &Counterexample, net: &AigNetwork) -> String {
    debug_assert_eq!(cex.trace.inputs.len(), cex.bound + 1);
    debug_assert_eq!(cex.trace.init.len(), net.latches().len());
    let mut out = String::new();
    writeln!(out, "1").unwrap();
    writeln!(out, "b{}", cex.bad_index).unwrap();
    writeln!(out, "{}", bits(&cex.trace.init)).unwrap();
    for row in &cex.trace.inputs {
        writeln!(out, "{}", bits(row)).unwrap();
    }
    out.push_str(".\n");
    out
}

/// Parses a witness produced by [`write_witness`]. `x` in the initial state
/// line reads as 0.
pub fn parse_witness(text: &str) -> Result<Counterexample, WitnessError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let syntax = |line: usize, reason: &str| WitnessError::Syntax { line, reason: reason.into() };

    let (n, status) = lines.next().ok_or(WitnessError::Unterminated)?;
    if status != "1" {
        return Err(syntax(n, "expected status line \"1\""));
    }
    let (n, prop) = lines.next().ok_or(WitnessError::Unterminated)?;
    let bad_index = prop
        .strip_prefix('b')
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| syntax(n, "expected property line \"b<index>\""))?;

    let row = |n: usize, s: &str, allow_x: bool| -> Result<Vec<bool>, WitnessError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                'x' if allow_x => Ok(false),
                _ => Err(syntax(n, "expected only 0/1 characters")),
            })
            .collect()
    };
    let (n, init_line) = lines.next().ok_or(WitnessError::Unterminated)?;
    let init = row(n, init_line, true)?;

    let mut inputs = Vec::new();
    loop {
        let (n, l) = lines.next().ok_or(WitnessError::Unterminated)?;
        if l == "." {
            break;
        }
        inputs.push(row(n, l, false)?);
    }
    if inputs.is_empty() {
        return Err(syntax(0, "witness has no input frames"));
    }
    let width = inputs[0].len();
    if let Some(bad) = inputs.iter().find(|r| r.len() != width) {
        return Err(WitnessError::Width { what: "input", expected: width, found: bad.len() });
    }
    Ok(Counterexample {
        bound: inputs.len() - 1,
        bad_index,
        trace: Trace { init, inputs },
    })
}

impl Counterexample {
    /// Checks that row widths match `net`.
    pub fn check_shape(&self, net: &AigNetwork) -> Result<(), WitnessError> {
        if self.trace.init.len() != net.latches().len() {
            return Err(WitnessError::Width {
                what: "latch",
                expected: net.latches().len(),
                found: self.trace.init.len(),
            });
        }
        for r in &self.trace.inputs {
            if r.len() != net.inputs().len() {
                return Err(WitnessError::Width {
                    what: "input",
                    expected: net.inputs().len(),
                    found: r.len(),
                });
            }
        }
        Ok(())
    }
}
