use std::fmt::Write as _;

use super::{AigError, AigNetwork, LatchInit};

fn header(net: &AigNetwork, magic: &str) -> String {
    let (b, c) = if net.bads_from_outputs() {
        (0, net.constraints().len())
    } else {
        (net.bads().len(), net.constraints().len())
    };
    let mut h = format!(
        "{magic} {} {} {} {} {}",
        net.maxvar(),
        net.inputs().len(),
        net.latches().len(),
        net.outputs().len(),
        net.ands().len()
    );
    if b > 0 || c > 0 {
        write!(h, " {b}").unwrap();
    }
    if c > 0 {
        write!(h, " {c}").unwrap();
    }
    h.push('\n');
    h
}

fn properties(net: &AigNetwork, out: &mut String) {
    for o in net.outputs() {
        writeln!(out, "{o}").unwrap();
    }
    if !net.bads_from_outputs() {
        for b in net.bads() {
            writeln!(out, "{b}").unwrap();
        }
    }
    for c in net.constraints() {
        writeln!(out, "{c}").unwrap();
    }
}

/// Serializes to ASCII AIGER, preserving literal numbering.
pub fn write_ascii(net: &AigNetwork) -> String {
    let mut out = header(net, "aag");
    for i in net.inputs() {
        writeln!(out, "{i}").unwrap();
    }
    for l in net.latches() {
        match l.init {
            LatchInit::Zero => writeln!(out, "{} {}", l.state, l.next),
            LatchInit::One => writeln!(out, "{} {} 1", l.state, l.next),
            LatchInit::Uninitialized => writeln!(out, "{} {} {}", l.state, l.next, l.state),
        }
        .unwrap();
    }
    properties(net, &mut out);
    for g in net.ands() {
        writeln!(out, "{} {} {}", g.out, g.in0, g.in1).unwrap();
    }
    out
}

/// Serializes to binary AIGER. The network must be canonically numbered
/// (see [`AigNetwork::is_canonical`]).
pub fn write_binary(net: &AigNetwork) -> Result<Vec<u8>, AigError> {
    if !net.is_canonical() {
        return Err(AigError::NotCanonical(
            "variables must be inputs, latches, then gates with out > in0 >= in1".into(),
        ));
    }
    let mut text = header(net, "aig");
    for l in net.latches() {
        match l.init {
            LatchInit::Zero => writeln!(text, "{}", l.next),
            LatchInit::One => writeln!(text, "{} 1", l.next),
            LatchInit::Uninitialized => writeln!(text, "{} {}", l.next, l.state),
        }
        .unwrap();
    }
    properties(net, &mut text);
    let mut out = text.into_bytes();
    for g in net.ands() {
        encode(&mut out, g.out.0 - g.in0.0);
        encode(&mut out, g.in0.0 - g.in1.0);
    }
    Ok(out)
}

fn encode(out: &mut Vec<u8>, mut x: u32) {
    while x & !0x7f != 0 {
        out.push((x & 0x7f) as u8 | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}
