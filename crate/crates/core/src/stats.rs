//! Per-bound run statistics and their CSV form.

use std::io::{self, Write};
use std::time::Duration;

use crate::unroll::FrameCounts;

pub const CSV_HEADER: &str = "bound,new_vars,new_clauses,merge_trivial,merge_structural,merge_functional,\
equiv_sat_calls,equiv_proved,equiv_refuted,equiv_skipped,t_unroll_ms,t_fraig_ms,t_property_ms";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundStats {
    pub bound: usize,
    /// Solver variables and clauses added by unrolling and constraint
    /// assertion for this frame.
    pub new_vars: u64,
    pub new_clauses: u64,
    pub counts: FrameCounts,
    /// Property queries issued, and bad literals that reduced to false.
    pub property_calls: u64,
    pub reduced_away: u64,
    /// Activation variables and guarded clauses of pattern sampling.
    pub sampling_vars: u64,
    pub sampling_clauses: u64,
    pub patterns: usize,
    pub t_unroll: Duration,
    pub t_fraig: Duration,
    pub t_property: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub bounds: Vec<BoundStats>,
}

impl RunStats {
    pub fn total_merges(&self) -> (u64, u64, u64) {
        self.bounds.iter().fold((0, 0, 0), |(t, s, f), b| {
            (t + b.counts.trivial, s + b.counts.structural, f + b.counts.functional)
        })
    }

    pub fn property_calls(&self) -> u64 {
        self.bounds.iter().map(|b| b.property_calls).sum()
    }

    /// Writes the header and one row per bound. With `timings` off the
    /// time columns are written as 0 so that output is reproducible.
    pub fn write_csv<W: Write>(&self, out: &mut W, timings: bool) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let ms = |d: Duration| if timings { d.as_secs_f64() * 1000.0 } else { 0.0 };
        for b in &self.bounds {
            let c = &b.counts;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}",
                b.bound,
                b.new_vars,
                b.new_clauses,
                c.trivial,
                c.structural,
                c.functional,
                c.equiv_calls,
                c.equiv_proved,
                c.equiv_refuted,
                c.equiv_skipped,
                ms(b.t_unroll),
                ms(b.t_fraig),
                ms(b.t_property),
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self, timings: bool) -> String {
        let mut v = Vec::new();
        self.write_csv(&mut v, timings).expect("writing to memory");
        String::from_utf8(v).expect("ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let mut s = RunStats::default();
        s.bounds.push(BoundStats { bound: 0, new_vars: 3, t_unroll: Duration::from_millis(2), ..Default::default() });
        let text = s.to_csv(false);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0].split(',').count(), 13);
        assert_eq!(lines[1], "0,3,0,0,0,0,0,0,0,0,0.000,0.000,0.000");
        assert!(s.to_csv(true).contains(",2.000,"));
    }
}
