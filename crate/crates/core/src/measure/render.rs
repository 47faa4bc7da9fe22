use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::{attractor_box, discrete_approximant, FourierEval};
use crate::error::{Error, Result};
use crate::triples::AffinePair;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    /// Number of non-zero pixels.
    pub fn occupied(&self) -> usize {
        self.pixels.iter().filter(|&&p| p > 0).count()
    }

    /// Binary PGM (P5).
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_pgm(std::io::BufWriter::new(file))
    }
}

/// Marks the pixels hit by the atoms of `mu_depth`.
///
/// One-dimensional pairs give a `resolution x 1` strip, planar pairs a square image.
pub fn render_attractor(pair: &AffinePair, depth: usize, resolution: usize) -> Result<Raster> {
    let d = pair.dim();
    if d > 2 {
        return Err(Error::DimensionUnsupported(d));
    }
    if resolution == 0 {
        return Err(Error::EmptyField);
    }
    let bx = attractor_box(pair);
    let mu = discrete_approximant(pair, depth)?;
    let (w, h) = if d == 1 { (resolution, 1) } else { (resolution, resolution) };
    let mut pixels = vec![0u8; w * h];
    let cell = |v: f64, i: usize, n: usize| -> usize {
        let t = (v - bx.lo[i]) / (bx.hi[i] - bx.lo[i]);
        ((t * n as f64 + 1e-6).floor().max(0.0) as usize).min(n - 1)
    };
    for p in &mu.points {
        let x = cell(p[0], 0, w);
        let y = if d == 2 { h - 1 - cell(p[1], 1, h) } else { 0 };
        pixels[y * w + x] = 255;
    }
    Ok(Raster { width: w, height: h, pixels })
}

/// Grayscale image of `|mu_hat|` on the box `[lo, hi]`.
pub fn render_mu_hat(eval: &FourierEval, lo: &[f64], hi: &[f64], resolution: usize) -> Result<Raster> {
    let d = eval.pair().dim();
    if d > 2 {
        return Err(Error::DimensionUnsupported(d));
    }
    let (w, h) = if d == 1 { (resolution, 1) } else { (resolution, resolution) };
    let coord = |k: usize, i: usize, n: usize| lo[i] + (hi[i] - lo[i]) * (k as f64 + 0.5) / n as f64;
    let values: Vec<f64> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (idx % w, idx / w);
            let xi: Vec<f64> = if d == 1 { vec![coord(x, 0, w)] } else { vec![coord(x, 0, w), coord(h - 1 - y, 1, h)] };
            eval.mu_hat(&xi).norm()
        })
        .collect();
    render_field(&values, w, h)
}

/// Maps values in `[0, 1]` to gray levels.
pub fn render_field(values: &[f64], width: usize, height: usize) -> Result<Raster> {
    if values.is_empty() || width * height != values.len() {
        return Err(Error::EmptyField);
    }
    let pixels = values.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    Ok(Raster { width, height, pixels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn unit_interval_is_covered() {
        let r = render_attractor(&catalog::lebesgue(2).pair, 8, 256).unwrap();
        assert_eq!(r.occupied(), 256);
    }

    #[test]
    fn quarter_cantor_atoms_are_separated() {
        let r = render_attractor(&catalog::quarter_cantor().pair, 10, 1 << 20).unwrap();
        assert_eq!(r.occupied(), 1024);
    }

    #[test]
    fn empty_field_is_rejected() {
        assert_eq!(render_field(&[], 0, 0), Err(Error::EmptyField));
        assert!(render_attractor(&catalog::lebesgue(2).pair, 4, 0).is_err());
    }

    #[test]
    fn pgm_header() {
        let r = render_field(&[0.0, 1.0], 2, 1).unwrap();
        let mut buf = Vec::new();
        r.write_pgm(&mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n2 1\n255\n");
        assert_eq!(&buf[11..], &[0, 255]);
    }

    #[test]
    fn heatmap_is_deterministic() {
        let ev = FourierEval::new(&catalog::triangular().pair);
        let a = render_mu_hat(&ev, &[-2.0, -2.0], &[2.0, 2.0], 16).unwrap();
        let b = render_mu_hat(&ev, &[-2.0, -2.0], &[2.0, 2.0], 16).unwrap();
        assert_eq!(a, b);
    }
}
