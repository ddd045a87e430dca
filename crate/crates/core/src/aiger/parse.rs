use thiserror::Error;

use super::{AigError, AigLiteral, AigNetwork, AndGate, Latch, LatchInit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("byte {offset}: malformed header: {reason}")]
    Header { offset: usize, reason: String },
    #[error("byte {offset}: {reason}")]
    Syntax { offset: usize, reason: String },
    #[error("byte {offset}: literal {lit} out of range (maximum variable {maxvar})")]
    LiteralOutOfRange { offset: usize, lit: u32, maxvar: u32 },
    #[error("byte {offset}: non-topological binary delta in gate {gate}")]
    NonTopological { offset: usize, gate: usize },
    #[error("byte {offset}: unexpected end of file")]
    Truncated { offset: usize },
    #[error("byte {offset}: {section} sections are not supported")]
    Unsupported { offset: usize, section: &'static str },
    #[error("invalid network: {0}")]
    Invalid(#[from] AigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Adopt outputs as bad-state properties when the header declares none.
    pub outputs_as_bads: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { outputs_as_bads: true }
    }
}

pub fn parse(bytes: &[u8]) -> Result<AigNetwork, ParseError> {
    parse_with(bytes, ParseOptions::default())
}

pub fn parse_with(bytes: &[u8], opts: ParseOptions) -> Result<AigNetwork, ParseError> {
    let mut cur = Cursor { data: bytes, pos: 0 };
    let (line, at) = cur.line()?;
    let header = Header::parse(line, at)?;

    let maxvar = header.m;
    let check = |lit: u32, offset: usize| -> Result<AigLiteral, ParseError> {
        if lit >> 1 > maxvar {
            Err(ParseError::LiteralOutOfRange { offset, lit, maxvar })
        } else {
            Ok(AigLiteral(lit))
        }
    };

    let mut inputs = Vec::with_capacity(header.i as usize);
    let mut latches = Vec::with_capacity(header.l as usize);
    if header.binary {
        if header.m != header.i + header.l + header.a {
            return Err(ParseError::Header {
                offset: 0,
                reason: format!("binary header needs M = I + L + A, got {}", header.m),
            });
        }
        for i in 0..header.i {
            inputs.push(AigLiteral::new(i + 1, false));
        }
        for i in 0..header.l {
            let (line, at) = cur.line()?;
            let fields = numbers(line, at, 1, 2)?;
            let state = AigLiteral::new(header.i + i + 1, false);
            let next = check(fields[0].0, fields[0].1)?;
            let init = match fields.get(1) {
                None => LatchInit::Zero,
                Some(&(v, off)) => latch_init(v, state, off)?,
            };
            latches.push(Latch { state, next, init });
        }
    } else {
        for _ in 0..header.i {
            let (line, at) = cur.line()?;
            let f = numbers(line, at, 1, 1)?;
            inputs.push(check(f[0].0, f[0].1)?);
        }
        for _ in 0..header.l {
            let (line, at) = cur.line()?;
            let f = numbers(line, at, 2, 3)?;
            let state = check(f[0].0, f[0].1)?;
            let next = check(f[1].0, f[1].1)?;
            let init = match f.get(2) {
                None => LatchInit::Zero,
                Some(&(v, off)) => latch_init(v, state, off)?,
            };
            latches.push(Latch { state, next, init });
        }
    }

    let single = |count: u32, cur: &mut Cursor| -> Result<Vec<AigLiteral>, ParseError> {
        (0..count)
            .map(|_| {
                let (line, at) = cur.line()?;
                let f = numbers(line, at, 1, 1)?;
                check(f[0].0, f[0].1)
            })
            .collect()
    };
    let outputs = single(header.o, &mut cur)?;
    let bads = single(header.b, &mut cur)?;
    let constraints = single(header.c, &mut cur)?;

    let mut ands = Vec::with_capacity(header.a as usize);
    if header.binary {
        for i in 0..header.a {
            let out = AigLiteral::new(header.i + header.l + i + 1, false);
            let at = cur.pos;
            let d0 = cur.varint()?;
            let d1 = cur.varint()?;
            if d0 == 0 || d0 > out.0 {
                return Err(ParseError::NonTopological { offset: at, gate: i as usize });
            }
            let in0 = out.0 - d0;
            if d1 > in0 {
                return Err(ParseError::NonTopological { offset: at, gate: i as usize });
            }
            ands.push(AndGate {
                out,
                in0: AigLiteral(in0),
                in1: AigLiteral(in0 - d1),
            });
        }
    } else {
        for _ in 0..header.a {
            let (line, at) = cur.line()?;
            let f = numbers(line, at, 3, 3)?;
            ands.push(AndGate {
                out: check(f[0].0, f[0].1)?,
                in0: check(f[1].0, f[1].1)?,
                in1: check(f[2].0, f[2].1)?,
            });
        }
    }
    // the symbol table and comment section are not interpreted

    let mut net = AigNetwork::new(maxvar, inputs, latches, ands, bads, constraints, outputs)?;
    if opts.outputs_as_bads {
        net.adopt_outputs_as_bads();
    }
    Ok(net)
}

struct Header {
    binary: bool,
    m: u32,
    i: u32,
    l: u32,
    o: u32,
    a: u32,
    b: u32,
    c: u32,
}

impl Header {
    fn parse(line: &str, at: usize) -> Result<Header, ParseError> {
        let err = |reason: String| ParseError::Header { offset: at, reason };
        let mut parts = line.split(' ');
        let binary = match parts.next() {
            Some("aag") => false,
            Some("aig") => true,
            _ => return Err(err("expected \"aag\" or \"aig\"".into())),
        };
        let nums: Vec<u32> = parts
            .map(|p| p.parse::<u32>().map_err(|_| err(format!("invalid field {p:?}"))))
            .collect::<Result<_, _>>()?;
        if nums.len() < 5 || nums.len() > 9 {
            return Err(err(format!("expected 5 to 9 fields, found {}", nums.len())));
        }
        let field = |i: usize| nums.get(i).copied().unwrap_or(0);
        if field(7) > 0 {
            return Err(ParseError::Unsupported { offset: at, section: "justice" });
        }
        if field(8) > 0 {
            return Err(ParseError::Unsupported { offset: at, section: "fairness" });
        }
        let h = Header {
            binary,
            m: nums[0],
            i: nums[1],
            l: nums[2],
            o: nums[3],
            a: nums[4],
            b: field(5),
            c: field(6),
        };
        if (h.i as u64 + h.l as u64 + h.a as u64) > h.m as u64 {
            return Err(err("I + L + A exceeds M".into()));
        }
        Ok(h)
    }
}

fn latch_init(v: u32, state: AigLiteral, offset: usize) -> Result<LatchInit, ParseError> {
    match v {
        0 => Ok(LatchInit::Zero),
        1 => Ok(LatchInit::One),
        v if v == state.0 => Ok(LatchInit::Uninitialized),
        v => Err(ParseError::Syntax {
            offset,
            reason: format!("latch reset must be 0, 1 or the latch literal, found {v}"),
        }),
    }
}

/// Splits a line into between `min` and `max` unsigned numbers, each paired
/// with its byte offset.
fn numbers(line: &str, at: usize, min: usize, max: usize) -> Result<Vec<(u32, usize)>, ParseError> {
    let mut out = Vec::with_capacity(max);
    let mut off = at;
    for tok in line.split(' ') {
        let v = tok.parse::<u32>().map_err(|_| ParseError::Syntax {
            offset: off,
            reason: format!("expected an unsigned literal, found {tok:?}"),
        })?;
        out.push((v, off));
        off += tok.len() + 1;
    }
    if out.len() < min || out.len() > max {
        return Err(ParseError::Syntax {
            offset: at,
            reason: format!("expected {min}..={max} fields, found {}", out.len()),
        });
    }
    Ok(out)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Result<(&'a str, usize), ParseError> {
        let start = self.pos;
        let rest = &self.data[start..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(ParseError::Truncated { offset: self.data.len() })?;
        self.pos = start + end + 1;
        let text = std::str::from_utf8(&rest[..end]).map_err(|_| ParseError::Syntax {
            offset: start,
            reason: "line is not valid UTF-8".into(),
        })?;
        Ok((text.strip_suffix('\r').unwrap_or(text), start))
    }

    fn varint(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        let mut x: u64 = 0;
        let mut shift = 0;
        loop {
            let &b = self
                .data
                .get(self.pos)
                .ok_or(ParseError::Truncated { offset: self.pos })?;
            self.pos += 1;
            x |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift > 35 {
                return Err(ParseError::Syntax {
                    offset: start,
                    reason: "delta encoding overflows".into(),
                });
            }
        }
        u32::try_from(x).map_err(|_| ParseError::Syntax {
            offset: start,
            reason: "delta encoding overflows".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffer_adopts_output_as_bad() {
        let net = parse(b"aag 1 1 0 1 0\n2\n2\n").unwrap();
        assert_eq!(net.inputs(), &[AigLiteral(2)]);
        assert_eq!(net.bads(), &[AigLiteral(2)]);
        assert!(net.bads_from_outputs());

        let net = parse_with(b"aag 1 1 0 1 0\n2\n2\n", ParseOptions { outputs_as_bads: false }).unwrap();
        assert!(net.bads().is_empty());
    }

    #[test]
    fn single_and_gate() {
        let net = parse(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        assert_eq!(
            net.ands(),
            &[AndGate { out: AigLiteral(6), in0: AigLiteral(2), in1: AigLiteral(4) }]
        );
    }

    #[test]
    fn latch_resets() {
        let net = parse(b"aag 3 0 3 0 0 1\n2 2\n4 5 1\n6 7 6\n2\n").unwrap();
        let inits: Vec<_> = net.latches().iter().map(|l| l.init).collect();
        assert_eq!(inits, vec![LatchInit::Zero, LatchInit::One, LatchInit::Uninitialized]);
        assert_eq!(net.bads(), &[AigLiteral(2)]);
        assert!(!net.bads_from_outputs());
    }

    #[test]
    fn binary_single_gate() {
        // aig 3 2 0 1 1: gate 6 = 4 & 2, deltas 2 and 2
        let net = parse(b"aig 3 2 0 1 1\n6\n\x02\x02").unwrap();
        assert_eq!(
            net.ands(),
            &[AndGate { out: AigLiteral(6), in0: AigLiteral(4), in1: AigLiteral(2) }]
        );
        assert_eq!(net.bads(), &[AigLiteral(6)]);
    }

    #[test]
    fn constraint_section() {
        let net = parse(b"aag 2 2 0 0 0 1 1\n2\n4\n2\n4\n").unwrap();
        assert_eq!(net.bads(), &[AigLiteral(2)]);
        assert_eq!(net.constraints(), &[AigLiteral(4)]);
    }

    #[test]
    fn errors_carry_offsets() {
        assert!(matches!(parse(b"foo 1 1 0 1 0\n"), Err(ParseError::Header { offset: 0, .. })));
        assert!(matches!(parse(b"aag 1 1 0 1\n"), Err(ParseError::Header { .. })));
        assert!(matches!(
            parse(b"aag 1 1 0 1 0\n2\n4\n"),
            Err(ParseError::LiteralOutOfRange { offset: 16, lit: 4, maxvar: 1 })
        ));
        assert!(matches!(parse(b"aag 1 1 0 1 0\n2\n"), Err(ParseError::Truncated { .. })));
        assert!(matches!(
            parse(b"aig 3 2 0 1 1\n6\n\x07\x02"),
            Err(ParseError::NonTopological { offset: 16, gate: 0 })
        ));
        assert!(matches!(parse(b"aig 3 2 0 1 1\n6\n\x02"), Err(ParseError::Truncated { .. })));
        assert!(matches!(
            parse(b"aag 1 1 0 0 0 0 0 1\n2\n"),
            Err(ParseError::Unsupported { section: "justice", .. })
        ));
        assert!(matches!(parse(b"aag 1 1 0 1 0\nx\n2\n"), Err(ParseError::Syntax { offset: 14, .. })));
    }

    #[test]
    fn ascii_cycle_rejected() {
        let r = parse(b"aag 3 1 0 1 2\n2\n6\n4 6 2\n6 4 2\n");
        assert!(matches!(r, Err(ParseError::Invalid(AigError::Cycle(_)))));
    }

    #[test]
    fn symbols_and_comments_ignored() {
        let net = parse(b"aag 1 1 0 1 0\n2\n2\ni0 x\no0 y\nc\nanything\n").unwrap();
        assert_eq!(net.inputs().len(), 1);
    }
}
