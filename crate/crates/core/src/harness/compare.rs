use std::fmt::Write as _;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SetError};
use crate::harness::emit::fmt_float;
use crate::sets::{sample_cpz_with, ConstrainedPolyZonotope, SampleOptions};

/// Widths of one coordinate of one step in both runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthRow {
    pub k: usize,
    /// One-based coordinate.
    pub coord: usize,
    pub enclosure_a: f64,
    pub enclosure_b: f64,
    pub sampled_a: f64,
    pub sampled_b: f64,
}

impl WidthRow {
    pub fn sampled_margin(&self) -> f64 {
        self.sampled_b - self.sampled_a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthTable {
    pub label_a: String,
    pub label_b: String,
    pub samples: usize,
    pub rows: Vec<WidthRow>,
}

impl WidthTable {
    /// Share of cells where run A's sampled width does not exceed run B's.
    pub fn fraction_a_not_wider(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        let n = self.rows.iter().filter(|r| r.sampled_a <= r.sampled_b).count();
        n as f64 / self.rows.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,coord,enclosure_a,enclosure_b,sampled_a,sampled_b,sampled_margin\n",
        );
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.k,
                r.coord,
                fmt_float(r.enclosure_a),
                fmt_float(r.enclosure_b),
                fmt_float(r.sampled_a),
                fmt_float(r.sampled_b),
                fmt_float(r.sampled_margin())
            )
            .expect("writing to a String");
        }
        out
    }
}

fn sampled_widths(set: &ConstrainedPolyZonotope, samples: usize, seed: u64, stream: u64) -> Result<DVector<f64>> {
    if set.num_generators() == 0 || samples == 0 {
        return Ok(DVector::zeros(set.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let pts = sample_cpz_with(set, samples, &mut rng, &SampleOptions::default())?;
    let mut lo = DVector::from_element(set.dim(), f64::INFINITY);
    let mut hi = DVector::from_element(set.dim(), f64::NEG_INFINITY);
    for p in &pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    Ok(hi - lo)
}

/// Per-step, per-coordinate widths of two reachable-set sequences. Step
/// labels start at `first_step`. Sampled widths use `samples` points per set.
pub fn compare_widths(
    a: (&str, &[ConstrainedPolyZonotope]),
    b: (&str, &[ConstrainedPolyZonotope]),
    first_step: usize,
    samples: usize,
    seed: u64,
) -> Result<WidthTable> {
    if a.1.len() != b.1.len() {
        return Err(SetError::dims("compare_widths steps", a.1.len(), b.1.len()));
    }
    let mut rows = Vec::new();
    for (i, (sa, sb)) in a.1.iter().zip(b.1).enumerate() {
        if sa.dim() != sb.dim() {
            return Err(SetError::dims("compare_widths dim", sa.dim(), sb.dim()));
        }
        let k = first_step + i;
        let (la, ha) = sa.interval_enclosure();
        let (lb, hb) = sb.interval_enclosure();
        let wa = sampled_widths(sa, samples, seed, 2 * k as u64)?;
        let wb = sampled_widths(sb, samples, seed, 2 * k as u64 + 1)?;
        for c in 0..sa.dim() {
            rows.push(WidthRow {
                k,
                coord: c + 1,
                enclosure_a: ha[c] - la[c],
                enclosure_b: hb[c] - lb[c],
                sampled_a: wa[c],
                sampled_b: wb[c],
            });
        }
    }
    Ok(WidthTable {
        label_a: a.0.to_string(),
        label_b: b.0.to_string(),
        samples,
        rows,
    })
}
