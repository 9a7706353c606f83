//! Synthetic Gaussian datasets and the CSV sequence format.
//!
//! Random draws come from ChaCha8 (`rand_chacha`) seeded with the caller's
//! seed, and normal samples from `rand_distr::StandardNormal`, so a seed
//! produces the same data on every platform.
//!
//! CSV layout: header `step,time,mass,x0,...,x{d-1}`, one row per atom, rows
//! grouped and sorted by step, every row of a step carrying the step's time.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, TimedSequence};

pub const DIVERGING_DEFAULT_N: usize = 200;
pub const DIVERGING_DEFAULT_STEPS: usize = 4;
pub const CONVERGING_DEFAULT_COUNTS: [usize; 4] = [32, 96, 64, 32];

/// A cluster that starts tight at the origin and fans out radially.
///
/// Step `s > 0` draws point `i` from component `i mod k`, a Gaussian with
/// mean `2 s u_k` and standard deviation `0.1 + 0.15 s`, where the `u_k` are
/// evenly spread unit directions in the first two coordinates (`k = 3`, or
/// `k = 2` on the line). Step 0 is an isotropic Gaussian with deviation 0.1.
pub fn gen_diverging_gaussian(
    seed: u64,
    n: usize,
    steps: usize,
    d: usize,
) -> Result<TimedSequence> {
    if n < 1 || steps < 2 || d < 1 {
        return Err(Error::Config(format!(
            "diverging gaussian needs n >= 1, steps >= 2, d >= 1 (got n={n}, steps={steps}, d={d})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = if d == 1 { 2 } else { 3 };
    let directions: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let mut u = vec![0.0; d];
            if d == 1 {
                u[0] = if c == 0 { 1.0 } else { -1.0 };
            } else {
                let theta =
                    std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * c as f64 / k as f64;
                u[0] = theta.cos();
                u[1] = theta.sin();
            }
            u
        })
        .collect();

    let mut entries = Vec::with_capacity(steps);
    for s in 0..steps {
        let radius = 2.0 * s as f64;
        let sigma = 0.1 + 0.15 * s as f64;
        let mut support = Array2::<f64>::zeros((n, d));
        for i in 0..n {
            let u = &directions[i % k];
            for c in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                support[[i, c]] = radius * u[c] + sigma * z;
            }
        }
        entries.push((s as f64, DiscreteMeasure::new(support, None)?));
    }
    TimedSequence::new(entries)
}

/// Gaussian mixtures that branch and merge as they drift along the first axis.
///
/// Step `s` has `round(counts[s] / min(counts))` components of deviation 0.3,
/// centred at `x0 = 4 s` and spaced 2 apart along the second axis (along the
/// first axis when `d = 1`). Point `i` is drawn from component `i mod k`.
pub fn gen_converging_gaussian(seed: u64, counts: &[usize], d: usize) -> Result<TimedSequence> {
    if counts.len() < 2 || counts.contains(&0) || d < 1 {
        return Err(Error::Config(format!(
            "converging gaussian needs at least two positive counts and d >= 1 (got {counts:?}, d={d})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = *counts.iter().min().expect("nonempty");
    let sigma = 0.3;
    let mut entries = Vec::with_capacity(counts.len());
    for (s, &n) in counts.iter().enumerate() {
        let k = ((n as f64 / base as f64).round() as usize).max(1);
        let mut support = Array2::<f64>::zeros((n, d));
        for i in 0..n {
            let comp = (i % k) as f64 - (k as f64 - 1.0) / 2.0;
            let mut mean = vec![0.0; d];
            mean[0] = 4.0 * s as f64;
            if d >= 2 {
                mean[1] = 2.0 * comp;
            } else {
                mean[0] += 1.5 * comp;
            }
            for c in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                support[[i, c]] = mean[c] + sigma * z;
            }
        }
        entries.push((s as f64, DiscreteMeasure::new(support, None)?));
    }
    TimedSequence::new(entries)
}

/// Parses a sequence from CSV text.
pub fn read_sequence_csv<R: Read>(reader: R) -> Result<TimedSequence> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let d = check_header(&header)?;

    struct Group {
        step: u64,
        time: f64,
        points: Vec<f64>,
        masses: Vec<f64>,
        line: usize,
    }
    let mut groups: Vec<Group> = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
        if record.len() != 3 + d {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", 3 + d, record.len()),
            ));
        }
        let step: u64 = record[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad step {:?}", &record[0])))?;
        let time = parse_finite(&record[1], line, "time")?;
        let mass = parse_finite(&record[2], line, "mass")?;
        if mass < 0.0 {
            return Err(Error::parse(line, format!("negative mass {mass}")));
        }
        match groups.last_mut() {
            Some(g) if g.step == step => {
                if g.time != time {
                    return Err(Error::parse(
                        line,
                        format!("step {step} has times {} and {time}", g.time),
                    ));
                }
            }
            Some(g) if step < g.step => {
                return Err(Error::parse(
                    line,
                    format!("step {step} follows step {}", g.step),
                ));
            }
            Some(g) if time <= g.time => {
                return Err(Error::parse(
                    line,
                    format!("time {time} of step {step} does not exceed {}", g.time),
                ));
            }
            _ => groups.push(Group {
                step,
                time,
                points: Vec::new(),
                masses: Vec::new(),
                line,
            }),
        }
        let g = groups.last_mut().expect("group just ensured");
        for c in 0..d {
            g.points
                .push(parse_finite(&record[3 + c], line, "coordinate")?);
        }
        g.masses.push(mass);
    }
    if groups.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }

    let mut entries = Vec::with_capacity(groups.len());
    for g in groups {
        let n = g.masses.len();
        let support = Array2::from_shape_vec((n, d), g.points).expect("d values per row");
        let m = DiscreteMeasure::new(support, Some(g.masses))
            .map_err(|e| Error::parse(g.line, format!("step {}: {e}", g.step)))?;
        entries.push((g.time, m));
    }
    TimedSequence::new(entries).map_err(|e| Error::parse(1, e.to_string()))
}

pub fn parse_sequence_csv(text: &str) -> Result<TimedSequence> {
    read_sequence_csv(text.as_bytes())
}

pub fn load_sequence_csv(path: impl AsRef<Path>) -> Result<TimedSequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_sequence_csv(BufReader::new(file))
}

pub fn write_sequence_csv<W: Write>(seq: &TimedSequence, mut out: W) -> std::io::Result<()> {
    let d = seq.dim();
    let mut header = String::from("step,time,mass");
    for c in 0..d {
        header.push_str(&format!(",x{c}"));
    }
    writeln!(out, "{header}")?;
    for (step, (t, m)) in seq.entries().iter().enumerate() {
        for i in 0..m.len() {
            write!(out, "{step},{t:?},{:?}", m.weights()[i])?;
            for v in m.point(i) {
                write!(out, ",{v:?}")?;
            }
            writeln!(out)?;
        }
    }
    out.flush()
}

pub fn sequence_to_csv(seq: &TimedSequence) -> String {
    let mut buf = Vec::new();
    write_sequence_csv(seq, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn save_sequence_csv(seq: &TimedSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_sequence_csv(seq, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

fn check_header(header: &csv::StringRecord) -> Result<usize> {
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 4 || fields[..3] != ["step", "time", "mass"] {
        return Err(Error::parse(
            1,
            "header must start with step,time,mass followed by x0,...",
        ));
    }
    for (c, name) in fields[3..].iter().enumerate() {
        if *name != format!("x{c}") {
            return Err(Error::parse(
                1,
                format!("column {} should be x{c}, found {name}", c + 3),
            ));
        }
    }
    Ok(fields.len() - 3)
}

fn parse_finite(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what} is not finite")));
    }
    Ok(v)
}
