//! Spatially correlated log-normal shadowing.
//!
//! Each cell gets an independent zero-mean Gaussian field sampled at pixel
//! centers with covariance `sigma^2 exp(-d / d_corr)`. Fields are drawn by
//! circulant embedding: the covariance is laid out on a torus twice the grid
//! size, diagonalized with a 2-D FFT, and white noise is colored by the square
//! root of the resulting spectrum. The top-left block of the torus is an exact
//! sample whenever the embedded spectrum is non-negative; the (tiny) negative
//! eigenvalues that appear for very coarse grids are clipped to zero.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::scenario::{Area, Scenario};

use super::PropagationConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowField {
    nx: usize,
    ny: usize,
    seed: u64,
    /// `values[cell][iy * nx + ix]`, dB.
    values: Vec<Vec<f64>>,
}

impl ShadowField {
    /// A field of zeros (no shadowing).
    pub fn zeros(n_cells: usize, area: &Area) -> ShadowField {
        let (nx, ny) = (area.nx(), area.ny());
        ShadowField { nx, ny, seed: 0, values: vec![vec![0.0; nx * ny]; n_cells] }
    }

    pub fn value(&self, cell: usize, pixel: usize) -> f64 {
        self.values[cell][pixel]
    }

    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.values[cell]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// One correlated field per cell of `scenario`, deterministic per `seed`.
pub fn generate_shadow_field(scenario: &Scenario, cfg: &PropagationConfig, seed: u64) -> ShadowField {
    let area = &scenario.area;
    let (nx, ny) = (area.nx(), area.ny());
    assert!(nx * ny > 0, "pixel grid is empty");
    let sampler = GridSampler::new(nx, ny, area.pixel_size_m, cfg.shadowing_sigma_db, cfg.shadowing_dcorr_m);
    let values = (0..scenario.cells.len())
        .map(|cell| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(cell as u64 + 1);
            sampler.sample(&mut rng)
        })
        .collect();
    ShadowField { nx, ny, seed, values }
}

/// Circulant-embedding sampler for one grid geometry.
pub(crate) struct GridSampler {
    nx: usize,
    ny: usize,
    mx: usize,
    my: usize,
    /// sqrt(eigenvalue / (mx * my)), row-major over the torus.
    scale: Vec<f64>,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
}

impl GridSampler {
    pub(crate) fn new(nx: usize, ny: usize, spacing: f64, sigma: f64, dcorr: f64) -> GridSampler {
        let (mx, my) = (2 * nx, 2 * ny);
        let mut planner = FftPlanner::new();
        let row_fft = planner.plan_fft_forward(mx);
        let col_fft = planner.plan_fft_forward(my);

        let var = sigma * sigma;
        let mut cov: Vec<Complex64> = Vec::with_capacity(mx * my);
        for j in 0..my {
            let dj = j.min(my - j) as f64 * spacing;
            for i in 0..mx {
                let di = i.min(mx - i) as f64 * spacing;
                cov.push(Complex64::new(var * (-(di.hypot(dj)) / dcorr).exp(), 0.0));
            }
        }
        fft2(&mut cov, mx, my, &row_fft, &col_fft);
        let norm = (mx * my) as f64;
        let scale = cov.iter().map(|l| (l.re.max(0.0) / norm).sqrt()).collect();
        GridSampler { nx, ny, mx, my, scale, row_fft, col_fft }
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        fft2(&mut buf, self.mx, self.my, &self.row_fft, &self.col_fft);
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            out.extend(buf[iy * self.mx..iy * self.mx + self.nx].iter().map(|c| c.re));
        }
        out
    }
}

fn fft2(data: &mut [Complex64], mx: usize, my: usize, row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
    row.process(data);
    let mut column = vec![Complex64::new(0.0, 0.0); my];
    for i in 0..mx {
        for j in 0..my {
            column[j] = data[j * mx + i];
        }
        col.process(&mut column);
        for j in 0..my {
            data[j * mx + i] = column[j];
        }
    }
}
