//! Binary PPM output: `log10 K` heatmaps and grid warps.

use std::io::{Read, Write};

use cardioid::extension::{EvalSample, Extension, Model};
use num_complex::Complex;
use rayon::prelude::*;

use crate::config::{ImageSpec, RenderMode, MAX_SIDE};
use crate::error::{CliError, CliResult};

/// Upper end of the `log10 K` gray scale.
pub const LOG10_K_MAX: f64 = 6.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// RGB, row-major from the top row.
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn filled(width: u32, height: u32, v: u8) -> Self {
        Self { width, height, rgb: vec![v; 3 * width as usize * height as usize] }
    }

    pub fn pixel(&self, i: u32, k: u32) -> [u8; 3] {
        let o = 3 * (k as usize * self.width as usize + i as usize);
        [self.rgb[o], self.rgb[o + 1], self.rgb[o + 2]]
    }

    fn set(&mut self, i: u32, k: u32, c: [u8; 3]) {
        let o = 3 * (k as usize * self.width as usize + i as usize);
        self.rgb[o..o + 3].copy_from_slice(&c);
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.rgb)
    }

    /// Reads the files written by [`Image::write_ppm`] (single whitespace after each header field).
    pub fn read_ppm<R: Read>(mut input: R) -> CliResult<Self> {
        let mut buf = Vec::new();
        input
            .read_to_end(&mut buf)
            .map_err(CliError::io("<ppm>"))?;
        let bad = |msg: &str| CliError::Input { path: "<ppm>".into(), line: 1, msg: msg.into() };
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            let start = pos;
            while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos >= buf.len() {
                return Err(bad("truncated header"));
            }
            fields.push(String::from_utf8_lossy(&buf[start..pos]).into_owned());
            pos += 1;
        }
        if fields[0] != "P6" || fields[3] != "255" {
            return Err(bad("not an 8-bit P6 file"));
        }
        let dim = |s: &str| s.parse::<u32>().ok().filter(|&v| v > 0 && v <= MAX_SIDE);
        let (w, h) = dim(&fields[1]).zip(dim(&fields[2])).ok_or_else(|| bad("bad size"))?;
        let rgb = buf[pos..].to_vec();
        if rgb.len() != 3 * w as usize * h as usize {
            return Err(bad("pixel data length does not match the header"));
        }
        Ok(Self { width: w, height: h, rgb })
    }
}

fn jet(ext: &Extension<f64>, z: Complex<f64>) -> cardioid::Result<EvalSample<f64>> {
    match ext.model {
        Model::StandardCardioid { .. } => ext.cardioid_f0_jet(z),
        Model::CardioidType { .. } => ext.eval_jet(z),
    }
}

/// Gray level of `log10 K` clipped to `[0, LOG10_K_MAX]`.
pub fn gray(k: f64) -> u8 {
    if k.is_nan() {
        return 255;
    }
    let v = k.max(1.0).log10().min(LOG10_K_MAX);
    (v / LOG10_K_MAX * 255.0).round() as u8
}

pub fn heatmap(ext: &Extension<f64>, spec: &ImageSpec) -> CliResult<Image> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let rows: Vec<Vec<u8>> = (0..h)
        .into_par_iter()
        .map(|k| {
            let mut row = Vec::with_capacity(3 * w as usize);
            for i in 0..w {
                let (x, y) = spec.pixel_center(i, k);
                let s = jet(ext, Complex::new(x, y))?;
                // interface points carry no Jacobian; orientation-reversing ones show as K = inf
                let g = gray(match s.jacobian {
                    None => 1.0,
                    Some(d) if d.det() < 0.0 => f64::INFINITY,
                    Some(d) => d.distortion(),
                });
                row.extend_from_slice(&[g, g, g]);
            }
            Ok(row)
        })
        .collect::<cardioid::Result<_>>()?;
    Ok(Image { width: w, height: h, rgb: rows.concat() })
}

/// Images of `grid_lines` horizontal and vertical lines of the viewport, drawn in black on white
/// inside the bounding box of the mapped viewport.
pub fn grid_warp(ext: &Extension<f64>, spec: &ImageSpec) -> CliResult<Image> {
    spec.validate()?;
    let (x0, x1) = spec.x_range;
    let (y0, y1) = spec.y_range;
    let n = spec.grid_lines as usize;
    let dense = 4 * spec.width.max(spec.height) as usize;
    let mut lines: Vec<Vec<Complex<f64>>> = Vec::with_capacity(2 * n);
    for a in 0..n {
        let fa = a as f64 / (n - 1) as f64;
        let xa = x0 + (x1 - x0) * fa;
        let ya = y0 + (y1 - y0) * fa;
        let pts = |vertical: bool| {
            (0..=dense)
                .map(|b| {
                    let fb = b as f64 / dense as f64;
                    if vertical {
                        Complex::new(xa, y0 + (y1 - y0) * fb)
                    } else {
                        Complex::new(x0 + (x1 - x0) * fb, ya)
                    }
                })
                .collect::<Vec<_>>()
        };
        lines.push(pts(true));
        lines.push(pts(false));
    }
    let mapped: Vec<Vec<Complex<f64>>> = lines
        .par_iter()
        .map(|l| l.iter().map(|&z| Ok(jet(ext, z)?.image)).collect())
        .collect::<cardioid::Result<_>>()?;
    let (mut bx0, mut bx1, mut by0, mut by1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for w in mapped.iter().flatten() {
        bx0 = bx0.min(w.re);
        bx1 = bx1.max(w.re);
        by0 = by0.min(w.im);
        by1 = by1.max(w.im);
    }
    let pad = 0.05 * (bx1 - bx0).max(by1 - by0).max(f64::MIN_POSITIVE);
    let (bx0, bx1, by0, by1) = (bx0 - pad, bx1 + pad, by0 - pad, by1 + pad);
    let mut img = Image::filled(spec.width, spec.height, 255);
    let (wf, hf) = (spec.width as f64, spec.height as f64);
    let mut plot = |w: Complex<f64>| {
        let i = ((w.re - bx0) / (bx1 - bx0) * wf).floor();
        let k = ((by1 - w.im) / (by1 - by0) * hf).floor();
        if i >= 0.0 && k >= 0.0 && i < wf && k < hf {
            img.set(i as u32, k as u32, [0, 0, 0]);
        }
    };
    for l in &mapped {
        for seg in l.windows(2) {
            // enough substeps that consecutive dots are at most one pixel apart
            let d = seg[1] - seg[0];
            let steps = ((d.re.abs() / (bx1 - bx0) * wf).max(d.im.abs() / (by1 - by0) * hf))
                .ceil()
                .clamp(1.0, 1e4) as usize;
            for s in 0..steps {
                plot(seg[0] + d * (s as f64 / steps as f64));
            }
        }
        if let Some(&last) = l.last() {
            plot(last);
        }
    }
    Ok(img)
}

pub fn render(ext: &Extension<f64>, spec: &ImageSpec) -> CliResult<Image> {
    match spec.mode {
        RenderMode::Heatmap => heatmap(ext, spec),
        RenderMode::Grid => grid_warp(ext, spec),
    }
}
