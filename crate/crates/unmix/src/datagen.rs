//! Synthetic-experiment generation: Gaussian libraries, sparse simplex
//! abundances, and low-pass noise calibrated to an exact per-realization
//! SNR. All generation is a pure function of (spec, seed).
//!
//! File format (text, UTF-8): line 1 is `<rows> <cols>`, followed by `rows`
//! lines of `cols` whitespace-separated decimal floats. Lines starting with
//! `#` are ignored. Vectors use the same format with one column.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::model::SpectralLibrary;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a tag.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// i.i.d. Gaussian convolved with a moving-average kernel along bands.
    Lowpass,
    /// Plain i.i.d. Gaussian.
    White,
}

/// Parameters of one synthetic experiment cell.
#[derive(Debug, Clone)]
pub struct SynthesisSpec {
    pub k: usize,
    pub n: usize,
    /// Number of nonzero abundances.
    pub s: usize,
    pub target_snr_db: f64,
    pub noise_kind: NoiseKind,
    /// Moving-average length; must be odd. 1 is equivalent to white noise.
    pub lowpass_window: usize,
    pub seed: u64,
}

impl SynthesisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be >= 1".into()));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::InvalidSpec(format!(
                "s must satisfy 1 <= s <= n, got s={} n={}",
                self.s, self.n
            )));
        }
        if self.lowpass_window == 0 || self.lowpass_window % 2 == 0 {
            return Err(Error::InvalidSpec(format!(
                "lowpass_window must be odd and >= 1, got {}",
                self.lowpass_window
            )));
        }
        if !self.target_snr_db.is_finite() {
            return Err(Error::InvalidSpec("target SNR must be finite".into()));
        }
        Ok(())
    }

    /// Gaussian library for this cell, deterministic from the base seed.
    pub fn build_library(&self) -> Result<SpectralLibrary<f64>> {
        gaussian_library(self.k, self.n, derive_seed(self.seed, 0))
    }

    /// Draws abundances and noise for one run against a given library.
    pub fn realize(&self, lib: &SpectralLibrary<f64>, run: u64) -> Result<Realization> {
        self.validate()?;
        let x_true = sparse_simplex_abundance(
            lib.signatures(),
            self.s,
            derive_seed(self.seed, 2 * run + 1),
        )?;
        let y_clean = lib.matrix().matvec(&x_true)?;
        let (noise, realized_snr_db) =
            add_noise(&y_clean, self, derive_seed(self.seed, 2 * run + 2))?;
        let y_noisy = y_clean.add(&noise);
        Ok(Realization {
            x_true,
            y_clean,
            y_noisy,
            realized_snr_db,
        })
    }

    /// One full problem: library plus a single realization.
    pub fn synthesize(&self) -> Result<SyntheticProblem> {
        self.validate()?;
        let library = self.build_library()?;
        let r = self.realize(&library, 0)?;
        Ok(SyntheticProblem {
            library,
            x_true: r.x_true,
            y_clean: r.y_clean,
            y_noisy: r.y_noisy,
            realized_snr_db: r.realized_snr_db,
        })
    }
}

/// Abundance/observation draw for one run.
#[derive(Debug, Clone)]
pub struct Realization {
    pub x_true: DenseVector<f64>,
    pub y_clean: DenseVector<f64>,
    pub y_noisy: DenseVector<f64>,
    pub realized_snr_db: f64,
}

impl Realization {
    /// Realized noise norm `‖y_noisy − y_clean‖₂`, the natural δ for CBPDN.
    pub fn noise_norm(&self) -> f64 {
        self.y_noisy.sub(&self.y_clean).norm2()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub library: SpectralLibrary<f64>,
    pub x_true: DenseVector<f64>,
    pub y_clean: DenseVector<f64>,
    pub y_noisy: DenseVector<f64>,
    pub realized_snr_db: f64,
}

/// `k × n` library with i.i.d. standard Gaussian entries.
pub fn gaussian_library(k: usize, n: usize, seed: u64) -> Result<SpectralLibrary<f64>> {
    if k == 0 || n == 0 {
        return Err(Error::EmptyLibrary);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DenseMatrix::from_fn(k, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    SpectralLibrary::new(a)
}

/// Vector with exactly `s` nonzeros at uniformly random positions; the
/// nonzero block is uniform on the (s−1)-simplex via sorted uniform
/// spacings.
pub fn sparse_simplex_abundance(n: usize, s: usize, seed: u64) -> Result<DenseVector<f64>> {
    if s == 0 || s > n {
        return Err(Error::InvalidSpec(format!(
            "s must satisfy 1 <= s <= n, got s={s} n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(s);
    if s == 1 {
        values.push(1.0);
    } else {
        let mut cuts: Vec<f64> = (0..s - 1).map(|_| rng.gen::<f64>()).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = 0.0;
        for &c in &cuts {
            values.push(c - prev);
            prev = c;
        }
        values.push(1.0 - prev);
    }
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(&mut rng);
    let mut x = DenseVector::zeros(n);
    for (&p, &v) in positions[..s].iter().zip(&values) {
        x[p] = v;
    }
    Ok(x)
}

fn reflect(idx: isize, len: isize) -> usize {
    let mut i = idx;
    // symmetric reflection without repeating the edge sample twice in a row
    while i < 0 || i >= len {
        if i < 0 {
            i = -1 - i;
        }
        if i >= len {
            i = 2 * len - 1 - i;
        }
    }
    i as usize
}

/// Draws noise for `y_clean` at the spec's target SNR. The realization is
/// rescaled so `10·log₁₀(‖y_clean‖²/‖noise‖²)` equals the target exactly.
pub fn add_noise(
    y_clean: &DenseVector<f64>,
    spec: &SynthesisSpec,
    seed: u64,
) -> Result<(DenseVector<f64>, f64)> {
    spec.validate()?;
    let k = y_clean.len();
    let signal = y_clean.norm2_sq();
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let filtered = match spec.noise_kind {
        NoiseKind::White => raw,
        NoiseKind::Lowpass => {
            let w = spec.lowpass_window as isize;
            let half = (w - 1) / 2;
            let len = k as isize;
            (0..len)
                .map(|i| {
                    let mut acc = 0.0;
                    for j in -half..=half {
                        acc += raw[reflect(i + j, len)];
                    }
                    acc / w as f64
                })
                .collect()
        }
    };
    let noise = DenseVector::from_raw(filtered);
    let energy = noise.norm2_sq();
    if energy == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let scale = (signal / energy).sqrt() * 10f64.powf(-spec.target_snr_db / 20.0);
    let noise = noise.scale(scale);
    let realized = 10.0 * (signal / noise.norm2_sq()).log10();
    Ok((noise, realized))
}

// --- text file format ---

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_matrix<W: Write>(
    w: &mut W,
    rows: usize,
    cols: usize,
    get: impl Fn(usize, usize) -> f64,
) -> Result<()> {
    writeln!(w, "{rows} {cols}")?;
    for i in 0..rows {
        let line: Vec<String> = (0..cols).map(|j| format_float(get(i, j))).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

fn parse_matrix<R: Read>(r: R) -> Result<(usize, usize, Vec<f64>)> {
    let reader = BufReader::new(r);
    let mut dims: Option<(usize, usize)> = None;
    let mut data = Vec::new();
    let mut rows_seen = 0usize;
    let mut last_line = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match dims {
            None => {
                let mut parts = trimmed.split_whitespace();
                let r = parts
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        msg: "expected '<rows> <cols>' header".into(),
                    })?;
                let c = parts
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        msg: "expected '<rows> <cols>' header".into(),
                    })?;
                if parts.next().is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "header has trailing tokens".into(),
                    });
                }
                dims = Some((r, c));
            }
            Some((r, c)) => {
                if rows_seen >= r {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("more than {r} data rows"),
                    });
                }
                let vals: std::result::Result<Vec<f64>, _> = trimmed
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect();
                let vals = vals.map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad float: {e}"),
                })?;
                if vals.len() != c {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {c} values, got {}", vals.len()),
                    });
                }
                data.extend(vals);
                rows_seen += 1;
            }
        }
    }
    let (r, c) = dims.ok_or(Error::Parse {
        line: last_line.max(1),
        msg: "missing header".into(),
    })?;
    if rows_seen != r {
        return Err(Error::Parse {
            line: last_line + 1,
            msg: format!("expected {r} data rows, got {rows_seen}"),
        });
    }
    Ok((r, c, data))
}

pub fn save_library(path: &Path, lib: &SpectralLibrary<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let a = lib.matrix();
    write_matrix(&mut w, a.rows(), a.cols(), |i, j| a.get(i, j))
}

pub fn load_library(path: &Path) -> Result<SpectralLibrary<f64>> {
    load_library_from(File::open(path)?)
}

pub fn load_library_from<R: Read>(r: R) -> Result<SpectralLibrary<f64>> {
    let (rows, cols, data) = parse_matrix(r)?;
    SpectralLibrary::new(DenseMatrix::new(rows, cols, data)?)
}

pub fn save_vector(path: &Path, v: &DenseVector<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, v.len(), 1, |i, _| v[i])
}

pub fn load_vector(path: &Path) -> Result<DenseVector<f64>> {
    load_vector_from(File::open(path)?)
}

pub fn load_vector_from<R: Read>(r: R) -> Result<DenseVector<f64>> {
    let (rows, cols, data) = parse_matrix(r)?;
    if cols != 1 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected a single-column vector file, got {cols} columns"),
        });
    }
    let _ = rows;
    DenseVector::new(data)
}
