use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::geometry::{clip_convex, disk_polygon_area, polygon_area, Body, Dim, Geom, Shape, Vec2, Vec3};

/// Sub-samples per axis in cells that meet the boundary.
pub const SUPERSAMPLE: usize = 4;

/// Raster of `χ_Ω` on an `L×L` grid over `[−S/2, S/2]²` and its discrete
/// transform, scaled so that `transform(k)` approximates `χ̂_Ω(k/S)`.
///
/// Boundary cells hold their covered fraction, so the raster is `χ_Ω`
/// box-filtered at the cell size. The fraction is exact for balls and for
/// polygons of at most 64 vertices; larger polygons use `SUPERSAMPLE²`
/// sub-samples.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    l: usize,
    side: f64,
    raster: Vec<f64>,
    // Row-major DFT of the raster times the cell area, without the phase
    // of the grid origin.
    dft: Vec<Complex64>,
}

fn signed(k: usize, l: usize) -> i64 {
    if k < l / 2 {
        k as i64
    } else {
        k as i64 - l as i64
    }
}

fn fft_2d(data: &mut [Complex64], l: usize) {
    let fft = FftPlanner::new().plan_fft_forward(l);
    data.par_chunks_mut(l).for_each(|row| fft.process(row));
    let mut t = vec![Complex64::new(0.0, 0.0); l * l];
    t.par_chunks_mut(l).enumerate().for_each(|(i, col)| {
        for (j, v) in col.iter_mut().enumerate() {
            *v = data[j * l + i];
        }
    });
    t.par_chunks_mut(l).for_each(|col| fft.process(col));
    data.par_chunks_mut(l).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = t[i * l + j];
        }
    });
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0
    } else {
        t.sin() / t
    }
}

impl SpectralGrid {
    /// Rasterizes a bounded planar shape. `l` must be a power of two and
    /// `side ≥ 2·bounding_radius + 2`.
    pub fn new(shape: &Shape, l: usize, side: f64) -> Result<Self> {
        let body = shape.prepare()?;
        if body.dim() != Dim::Two {
            return Err(LabError::UnsupportedDimension(3));
        }
        let rad = body.bounding_radius();
        if !rad.is_finite() {
            return Err(LabError::UnboundedVolume);
        }
        if !l.is_power_of_two() || l < 2 {
            return invalid(format!("grid size {l} must be a power of two"));
        }
        if !(side >= 2.0 * rad + 2.0) {
            return invalid(format!("grid side {side} is below 2·{rad} + 2"));
        }
        let raster = rasterize(&body, l, side);
        let h = side / l as f64;
        let mut dft: Vec<Complex64> = raster.iter().map(|&v| Complex64::new(v * h * h, 0.0)).collect();
        fft_2d(&mut dft, l);
        Ok(SpectralGrid { l, side, raster, dft })
    }

    /// Side `S` chosen as the smallest allowed value rounded up to an integer.
    pub fn auto(shape: &Shape, l: usize) -> Result<Self> {
        let rad = shape.prepare()?.bounding_radius();
        Self::new(shape, l, (2.0 * rad + 2.0).ceil())
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cell(&self) -> f64 {
        self.side / self.l as f64
    }

    /// Spacing `1/S` of the frequency lattice.
    pub fn freq_cell(&self) -> f64 {
        1.0 / self.side
    }

    /// Largest frequency on each axis, `L/(2S)`.
    pub fn nyquist(&self) -> f64 {
        self.l as f64 / (2.0 * self.side)
    }

    pub fn raster(&self) -> &[f64] {
        &self.raster
    }

    /// `Σ χ²·cell area`.
    pub fn spatial_energy(&self) -> f64 {
        let h = self.cell();
        self.raster.iter().map(|v| v * v).sum::<f64>() * h * h
    }

    /// `Σ |χ̂|²·frequency cell area`.
    pub fn spectral_energy(&self) -> f64 {
        self.dft.iter().map(|z| z.norm_sqr()).sum::<f64>() / (self.side * self.side)
    }

    /// Relative mismatch of the two sides of Parseval's identity.
    pub fn parseval_gap(&self) -> f64 {
        let a = self.spatial_energy();
        (a - self.spectral_energy()).abs() / a
    }

    fn slot(&self, kx: i64, ky: i64) -> usize {
        let l = self.l as i64;
        (ky.rem_euclid(l) * l + kx.rem_euclid(l)) as usize
    }

    /// `χ̂` of the box-filtered raster at `ξ = (kx, ky)/S`.
    pub fn transform(&self, kx: i64, ky: i64) -> Complex64 {
        let x0 = -0.5 * self.side + 0.5 * self.cell();
        let t = -2.0 * PI * (kx + ky) as f64 * x0 / self.side;
        self.dft[self.slot(kx, ky)] * Complex64::from_polar(1.0, t)
    }

    /// [`Self::transform`] divided by the box filter's `sinc(πhξ_x)·sinc(πhξ_y)`,
    /// an estimate of `χ̂_Ω` itself.
    pub fn deconvolved(&self, kx: i64, ky: i64) -> Complex64 {
        let h = self.cell();
        let f = sinc(PI * h * kx as f64 / self.side) * sinc(PI * h * ky as f64 / self.side);
        self.transform(kx, ky) / f
    }

    /// Visits `(ξ, |χ̂(ξ)|²)` over the whole frequency lattice in row order.
    pub fn for_each_power(&self, mut f: impl FnMut(Vec3, f64)) {
        let s = self.side;
        for j in 0..self.l {
            let ky = signed(j, self.l);
            for i in 0..self.l {
                let kx = signed(i, self.l);
                f(Vec3::new(kx as f64 / s, ky as f64 / s, 0.0), self.dft[j * self.l + i].norm_sqr());
            }
        }
    }

    /// `Σ |χ̂|²/S²` over the annulus `lo ≤ |ξ| < hi`.
    pub fn band_energy(&self, lo: f64, hi: f64) -> f64 {
        self.weighted_band_energy(lo, hi, |_| 1.0)
    }

    /// `Σ w(|ξ|)|χ̂|²/S²` over the annulus `lo ≤ |ξ| < hi`. Each lattice cell
    /// counts with the exact fraction of its area inside the annulus, so
    /// the mask error is second order and adjacent bands add up exactly.
    pub fn weighted_band_energy(&self, lo: f64, hi: f64, w: impl Fn(f64) -> f64 + Sync) -> f64 {
        let s = self.side;
        let l = self.l;
        let half = 0.5 / s;
        (0..l)
            .into_par_iter()
            .map(|j| {
                let ky = signed(j, l) as f64 / s;
                let mut acc = 0.0;
                for i in 0..l {
                    let kx = signed(i, l) as f64 / s;
                    let f = disc_fraction(kx, ky, half, hi) - disc_fraction(kx, ky, half, lo);
                    if f > 0.0 {
                        acc += f * w((kx * kx + ky * ky).sqrt()) * self.dft[j * l + i].norm_sqr();
                    }
                }
                acc
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .sum::<f64>()
            / (s * s)
    }

    /// Writes `<stem>.bin` (little-endian `f64`, row-major raster) and
    /// `<stem>.json` (header).
    pub fn dump(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = stem.with_extension("bin");
        let json = stem.with_extension("json");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&bin)?);
        for v in &self.raster {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        let header = GridHeader {
            size: self.l,
            side: self.side,
            cell: self.cell(),
            origin: [-0.5 * self.side, -0.5 * self.side],
            layout: "row-major, y rows from the bottom, little-endian f64".into(),
            data: bin.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        std::fs::write(&json, serde_json::to_string_pretty(&header)?)?;
        Ok((bin, json))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridHeader {
    pub size: usize,
    pub side: f64,
    pub cell: f64,
    pub origin: [f64; 2],
    pub layout: String,
    pub data: String,
}

/// Fraction of the square `c ± half` inside the disk `|ξ| < r`.
fn disc_fraction(cx: f64, cy: f64, half: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let (ax, ay) = (cx.abs(), cy.abs());
    let far = ((ax + half).powi(2) + (ay + half).powi(2)).sqrt();
    if far <= r {
        return 1.0;
    }
    let near = ((ax - half).max(0.0).powi(2) + (ay - half).max(0.0).powi(2)).sqrt();
    if near >= r {
        return 0.0;
    }
    let v = [
        Vec2::new(cx - half, cy - half),
        Vec2::new(cx + half, cy - half),
        Vec2::new(cx + half, cy + half),
        Vec2::new(cx - half, cy + half),
    ];
    (disk_polygon_area(&v, &Vec2::zeros(), r) / (4.0 * half * half)).clamp(0.0, 1.0)
}

/// Polygons up to this many vertices get exact cell coverage by clipping.
const EXACT_CLIP_VERTICES: usize = 64;

/// Fraction of the cell `c ± h/2` covered by the body: exact for balls and
/// small polygons, `SUPERSAMPLE²` point samples otherwise.
fn coverage(body: &Body, c: &Vec3, h: f64) -> f64 {
    let half = 0.5 * h;
    let cell = [
        Vec2::new(c.x - half, c.y - half),
        Vec2::new(c.x + half, c.y - half),
        Vec2::new(c.x + half, c.y + half),
        Vec2::new(c.x - half, c.y + half),
    ];
    let exact = match &body.geom {
        Geom::Ball { radius, .. } => Some(disk_polygon_area(&cell, &Vec2::zeros(), *radius)),
        Geom::Polygon(p) if p.vertices().len() <= EXACT_CLIP_VERTICES => {
            let mut v = p.vertices().to_vec();
            for (n, k) in [(Vec2::x(), c.x + half), (-Vec2::x(), half - c.x), (Vec2::y(), c.y + half), (-Vec2::y(), half - c.y)] {
                v = clip_convex(&v, &n, k);
                if v.len() < 3 {
                    break;
                }
            }
            Some(if v.len() < 3 { 0.0 } else { polygon_area(&v) })
        }
        _ => None,
    };
    if let Some(a) = exact {
        return (a / (h * h)).clamp(0.0, 1.0);
    }
    let s = SUPERSAMPLE;
    let mut hits = 0usize;
    for b in 0..s {
        for a in 0..s {
            let q = Vec3::new(
                c.x + h * ((a as f64 + 0.5) / s as f64 - 0.5),
                c.y + h * ((b as f64 + 0.5) / s as f64 - 0.5),
                0.0,
            );
            hits += body.contains_local(&q) as usize;
        }
    }
    hits as f64 / (s * s) as f64
}

fn rasterize(body: &Body, l: usize, side: f64) -> Vec<f64> {
    let h = side / l as f64;
    let x0 = -0.5 * side + 0.5 * h;
    let mut raster = vec![0.0; l * l];
    raster.par_chunks_mut(l).enumerate().for_each(|(j, row)| {
        let y = x0 + j as f64 * h;
        for (i, v) in row.iter_mut().enumerate() {
            let c = Vec3::new(x0 + i as f64 * h, y, 0.0);
            *v = if body.boundary_within(&c, h * std::f64::consts::FRAC_1_SQRT_2).unwrap_or(false) {
                coverage(body, &c, h)
            } else {
                body.contains_local(&c) as u8 as f64
            };
        }
    });
    raster
}

/// Annulus constants: the band is `γρ ≤ |ξ| ≤ δρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellBand {
    pub gamma: f64,
    pub delta: f64,
}

impl Default for ShellBand {
    fn default() -> Self {
        ShellBand { gamma: 0.125, delta: 8.0 }
    }
}

impl ShellBand {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < delta && delta.is_finite()) {
            return invalid(format!("band needs 0 < γ < δ, got γ = {gamma}, δ = {delta}"));
        }
        Ok(ShellBand { gamma, delta })
    }
}

/// `∫_{γρ ≤ |ξ| ≤ δρ} |χ̂_Ω(ξ)|² dξ` as a lattice sum.
pub fn shell_energy(grid: &SpectralGrid, rho: f64, band: &ShellBand) -> Result<f64> {
    let hi = band.delta * rho;
    if hi > grid.nyquist() {
        return Err(LabError::Nyquist { requested: hi, nyquist: grid.nyquist() });
    }
    if !(rho > 0.0) {
        return invalid(format!("scale ρ = {rho} must be positive"));
    }
    Ok(grid.band_energy(band.gamma * rho, hi))
}

/// One row of a shell table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub lo: f64,
    pub hi: f64,
    pub energy: f64,
}

/// The low ball `|ξ| < ρ₀` followed by dyadic shells `2^jρ₀ ≤ |ξ| < 2^{j+1}ρ₀`
/// out to the lattice corner; the energies add up to the grid's total.
pub fn dyadic_shells(grid: &SpectralGrid, rho0: f64) -> Result<Vec<ShellRow>> {
    if !(rho0 > 0.0) {
        return invalid("ρ₀ must be positive");
    }
    let corner = grid.nyquist() * 2f64.sqrt() * 1.01;
    let mut rows = vec![ShellRow { lo: 0.0, hi: rho0, energy: grid.band_energy(0.0, rho0) }];
    let mut lo = rho0;
    while lo < corner {
        let hi = 2.0 * lo;
        rows.push(ShellRow { lo, hi, energy: grid.band_energy(lo, hi) });
        lo = hi;
    }
    Ok(rows)
}

/// Writes rows as CSV with a header.
pub fn write_rows_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
