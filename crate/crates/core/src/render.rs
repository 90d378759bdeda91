//! Image encoders, interference patterns and fork analysis.
//!
//! Images are written with the largest y on the top row and x increasing to
//! the right.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{GridField, GridSpec, HermiteTable, ModeExpansion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Csv,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Ppm => "ppm",
            ImageFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(ImageFormat::Pgm),
            "ppm" => Ok(ImageFormat::Ppm),
            "csv" => Ok(ImageFormat::Csv),
            _ => Err(Error::OutOfRange(format!("unknown image format {s}"))),
        }
    }
}

/// Row-major samples in image order (top row first).
fn image_rows(values: &[f64], n: usize) -> impl Iterator<Item = &[f64]> {
    (0..n).rev().map(move |j| &values[j * n..(j + 1) * n])
}

fn scale_to_peak(values: &[f64]) -> Vec<f64> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        values.iter().map(|v| v / peak).collect()
    } else {
        vec![0.0; values.len()]
    }
}

fn quantize(v: f64, max: f64) -> u32 {
    (v.clamp(0.0, 1.0) * max).round() as u32
}

/// 16-bit binary greyscale of values in [0, 1].
pub fn encode_pgm(unit: &[f64], n: usize) -> Vec<u8> {
    let mut out = format!("P5\n{n} {n}\n65535\n").into_bytes();
    for row in image_rows(unit, n) {
        for &v in row {
            out.extend_from_slice(&(quantize(v, 65535.0) as u16).to_be_bytes());
        }
    }
    out
}

/// 8-bit binary colour image from per-pixel RGB in [0, 1].
pub fn encode_ppm(rgb: &[[f64; 3]], n: usize) -> Vec<u8> {
    let mut out = format!("P6\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        for px in &rgb[j * n..(j + 1) * n] {
            out.extend(px.iter().map(|&c| quantize(c, 255.0) as u8));
        }
    }
    out
}

/// One image row per line, comma separated.
pub fn encode_csv(values: &[f64], n: usize) -> Vec<u8> {
    let mut out = String::new();
    for row in image_rows(values, n) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out.into_bytes()
}

/// Intensity normalized to its peak.
pub fn render_intensity(field: &GridField, format: ImageFormat) -> Vec<u8> {
    let n = field.spec().samples_per_side();
    let unit = scale_to_peak(&field.intensity());
    match format {
        ImageFormat::Pgm => encode_pgm(&unit, n),
        ImageFormat::Ppm => encode_ppm(&unit.iter().map(|&v| [v, v, v]).collect::<Vec<_>>(), n),
        ImageFormat::Csv => encode_csv(&field.intensity(), n),
    }
}

/// Phase in (-pi, pi] mapped to [0, 1]; colour images weight a hue wheel by amplitude.
pub fn render_phase(field: &GridField, format: ImageFormat) -> Vec<u8> {
    let n = field.spec().samples_per_side();
    let phase = field.phase();
    match format {
        ImageFormat::Pgm => {
            let unit: Vec<f64> = phase.iter().map(|p| (p + PI) / TAU).collect();
            encode_pgm(&unit, n)
        }
        ImageFormat::Ppm => {
            let amp = scale_to_peak(&field.values().iter().map(|v| v.norm()).collect::<Vec<_>>());
            let rgb: Vec<[f64; 3]> = phase.iter().zip(&amp).map(|(&p, &a)| hue(p, a)).collect();
            encode_ppm(&rgb, n)
        }
        ImageFormat::Csv => encode_csv(&phase, n),
    }
}

fn hue(phase: f64, value: f64) -> [f64; 3] {
    let h = (phase + PI) / TAU * 6.0;
    let sector = (h.floor() as i32).rem_euclid(6);
    let f = h - h.floor();
    let (q, t) = (1.0 - f, f);
    let rgb = match sector {
        0 => [1.0, t, 0.0],
        1 => [q, 1.0, 0.0],
        2 => [0.0, 1.0, t],
        3 => [0.0, q, 1.0],
        4 => [t, 0.0, 1.0],
        _ => [1.0, 0.0, q],
    };
    rgb.map(|c| c * value)
}

/// Reference beam added to an output for an interference image.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSpec {
    pub reference: ModeExpansion,
    /// Fringes across the full grid width, produced by tilting the reference about y.
    pub tilt: f64,
    /// Reference displacement in units of w0.
    pub offset: (f64, f64),
    /// Constant phase of the reference relative to the output.
    pub phase: f64,
    /// Mirror the reference about the y axis before displacing it.
    pub flip_x: bool,
}

impl InterferenceSpec {
    pub const STANDARD_TILT: f64 = 24.0;

    /// Untilted, centred, in-phase reference.
    pub fn new(reference: ModeExpansion) -> Self {
        InterferenceSpec {
            reference,
            tilt: 0.0,
            offset: (0.0, 0.0),
            phase: 0.0,
            flip_x: false,
        }
    }

    /// Tilted reference in quadrature with the output, so that a phase
    /// singularity shows up as a fringe-count change between cuts above and below it.
    pub fn standard(reference: ModeExpansion) -> Self {
        InterferenceSpec {
            tilt: Self::STANDARD_TILT,
            phase: PI / 2.0,
            ..Self::new(reference)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tilt >= 0.0 && self.tilt.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "tilt {} must be non-negative",
                self.tilt
            )));
        }
        if !(self.offset.0.is_finite() && self.offset.1.is_finite() && self.phase.is_finite()) {
            return Err(Error::OutOfRange(
                "reference offset and phase must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluates `e` at arbitrary points, reusing one Hermite table per coordinate.
fn eval_expansion(e: &ModeExpansion, x: f64, y: f64) -> Complex64 {
    let Some(max) = e.max_order() else {
        return Complex64::new(0.0, 0.0);
    };
    let w0 = e.geometry().w0();
    let tx = HermiteTable::at(max, x, w0);
    let ty = HermiteTable::at(max, y, w0);
    e.terms()
        .map(|(idx, c)| c * (tx.value(idx.n) * ty.value(idx.m)))
        .sum()
}

/// E_out(x, y) + E_ref(x - dx, y - dy) exp(i (k x + phase)).
pub fn interference_field(output: &GridField, spec: &InterferenceSpec) -> Result<GridField> {
    spec.validate()?;
    let grid: GridSpec = *output.spec();
    let w0 = spec.reference.geometry().w0();
    let k = TAU * spec.tilt / (2.0 * grid.half_width());
    let (dx, dy) = (spec.offset.0 * w0, spec.offset.1 * w0);
    let reference = GridField::from_fn(grid, |x, y| {
        let xr = if spec.flip_x { -(x - dx) } else { x - dx };
        eval_expansion(&spec.reference, xr, y - dy) * Complex64::from_polar(1.0, k * x + spec.phase)
    });
    let values = output
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| a + b)
        .collect();
    GridField::from_values(grid, values)
}

/// Fringe maxima on the horizontal cuts y = +/- 1.5 w0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForkAnalysis {
    pub upper: usize,
    pub lower: usize,
}

impl ForkAnalysis {
    pub const CUT_IN_WAISTS: f64 = 1.5;

    /// Change in fringe count across the singularity; its sign follows the
    /// handedness convention of the output, so only the magnitude is reported.
    pub fn difference(&self) -> usize {
        self.upper.abs_diff(self.lower)
    }
}

/// Maxima below this fraction of the image peak are treated as noise.
const FRINGE_FLOOR: f64 = 1e-3;

pub fn analyze_fork(field: &GridField, w0: f64) -> ForkAnalysis {
    let spec = field.spec();
    let intensity = field.intensity();
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    let n = spec.samples_per_side();
    let cut = ForkAnalysis::CUT_IN_WAISTS * w0;
    let upper = ((cut + spec.half_width()) / spec.spacing() - 0.5)
        .round()
        .clamp(0.0, (n - 1) as f64) as usize;
    let count = |j: usize| {
        let row = &intensity[j * n..(j + 1) * n];
        (1..n - 1)
            .filter(|&i| {
                row[i] > row[i - 1] && row[i] >= row[i + 1] && row[i] > FRINGE_FLOOR * peak
            })
            .count()
    };
    ForkAnalysis {
        upper: count(upper),
        lower: count(n - 1 - upper),
    }
}
