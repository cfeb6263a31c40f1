//! Averaging a planar field over subsets of the `N`-element rotation group.

use std::f64::consts::PI;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use symavg_core::averaging::mix_seed;
use symavg_core::{Error, Result};

pub const FIELD_DESCRIPTION: &str = "f(x,y) = exp(-((x-0.6)^2 + (y-0.1)^2)/0.08) + 0.4*x";

/// The anisotropic test field.
pub fn field(x: f64, y: f64) -> f64 {
    (-((x - 0.6).powi(2) + (y - 0.1).powi(2)) / 0.08).exp() + 0.4 * x
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Figure1Config {
    pub n: usize,
    pub grid: usize,
    pub subset_sizes: Vec<usize>,
    pub seed: u64,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Figure1Config {
            n: 100,
            grid: 200,
            subset_sizes: vec![1, 5, 100],
            seed: 0,
        }
    }
}

impl Figure1Config {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Usage("rotation count must be positive".into()));
        }
        if self.grid < 2 {
            return Err(Error::Usage("grid resolution must be at least 2".into()));
        }
        if let Some(&m) = self.subset_sizes.iter().find(|&&m| m == 0 || m > self.n) {
            return Err(Error::Usage(format!(
                "subset size {m} must lie in 1..={}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Grid points of `[-1, 1]²`, row-major in `y` then `x`.
pub fn grid_points(resolution: usize) -> Vec<(f64, f64)> {
    let step = 2.0 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            out.push((-1.0 + i as f64 * step, -1.0 + j as f64 * step));
        }
    }
    out
}

/// `(1/m) Σ_θ f(R_θ⁻¹ p)` for each grid point, angles `2πk/N`.
pub fn average_field(points: &[(f64, f64)], rotations: &[usize], n: usize) -> Vec<f64> {
    let trig: Vec<(f64, f64)> = rotations
        .iter()
        .map(|&k| (2.0 * PI * k as f64 / n as f64).sin_cos())
        .collect();
    let m = rotations.len() as f64;
    points
        .iter()
        .map(|&(x, y)| {
            trig.iter()
                .map(|&(s, c)| field(c * x + s * y, -s * x + c * y))
                .sum::<f64>()
                / m
        })
        .collect()
}

pub fn relative_l2(a: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = reference.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Rotation indices for a subset of size `m`: the whole group when `m = N`,
/// otherwise `m` draws without replacement.
pub fn draw_rotations(n: usize, m: usize, seed: u64) -> Vec<usize> {
    if m >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, m as u64, 0xf1));
    let mut v = index::sample(&mut rng, n, m).into_vec();
    v.sort_unstable();
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetSummary {
    pub subset_size: usize,
    pub rotations: Vec<usize>,
    pub relative_l2_to_full: f64,
}

#[derive(Clone, Debug)]
pub struct Figure1Result {
    pub points: Vec<(f64, f64)>,
    pub full: Vec<f64>,
    pub averages: Vec<Vec<f64>>,
    pub summary: Vec<SubsetSummary>,
}

/// Precomputed grid and full-group average, reusable across seeds.
pub struct Figure1 {
    n: usize,
    points: Vec<(f64, f64)>,
    full: Vec<f64>,
}

impl Figure1 {
    pub fn new(n: usize, grid: usize) -> Self {
        let points = grid_points(grid);
        let all: Vec<usize> = (0..n).collect();
        let full = average_field(&points, &all, n);
        Figure1 { n, points, full }
    }

    pub fn subset(&self, m: usize, seed: u64) -> (SubsetSummary, Vec<f64>) {
        let rotations = draw_rotations(self.n, m, seed);
        let avg = if m >= self.n {
            self.full.clone()
        } else {
            average_field(&self.points, &rotations, self.n)
        };
        let summary = SubsetSummary {
            subset_size: m,
            relative_l2_to_full: relative_l2(&avg, &self.full),
            rotations,
        };
        (summary, avg)
    }
}

pub fn figure1_demo(cfg: &Figure1Config) -> Result<Figure1Result> {
    cfg.validate()?;
    let fig = Figure1::new(cfg.n, cfg.grid);
    let mut averages = Vec::new();
    let mut summary = Vec::new();
    for &m in &cfg.subset_sizes {
        let (s, avg) = fig.subset(m, cfg.seed);
        summary.push(s);
        averages.push(avg);
    }
    Ok(Figure1Result {
        points: fig.points,
        full: fig.full,
        averages,
        summary,
    })
}

/// `x,y,value` rows.
pub fn grid_csv(points: &[(f64, f64)], values: &[f64]) -> String {
    let mut out = String::from("x,y,value\n");
    for (&(x, y), v) in points.iter().zip(values) {
        out.push_str(&format!("{x:.16e},{y:.16e},{v:.16e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_group_distance_is_zero() {
        let cfg = Figure1Config {
            grid: 20,
            ..Figure1Config::default()
        };
        let r = figure1_demo(&cfg).unwrap();
        assert_eq!(r.summary[2].relative_l2_to_full, 0.0);
        assert_eq!(r.summary[2].rotations.len(), 100);
    }

    #[test]
    fn single_rotation_is_a_rotated_copy() {
        let pts = grid_points(11);
        let rot = draw_rotations(100, 1, 4);
        let avg = average_field(&pts, &rot, 100);
        let t = 2.0 * PI * rot[0] as f64 / 100.0;
        for (&(x, y), v) in pts.iter().zip(&avg) {
            let expect = field(t.cos() * x + t.sin() * y, -t.sin() * x + t.cos() * y);
            assert!((v - expect).abs() < 1e-15);
        }
        let ident = average_field(&pts, &[0], 100);
        assert!(pts.iter().zip(&ident).all(|(&(x, y), &v)| v == field(x, y)));
    }

    #[test]
    fn full_average_is_rotation_invariant() {
        let n = 100;
        let all: Vec<usize> = (0..n).collect();
        let pts = grid_points(9);
        let base = average_field(&pts, &all, n);
        for k in [1, 17, 50] {
            let t = 2.0 * PI * k as f64 / n as f64;
            let rotated: Vec<(f64, f64)> = pts
                .iter()
                .map(|&(x, y)| (t.cos() * x - t.sin() * y, t.sin() * x + t.cos() * y))
                .collect();
            let moved = average_field(&rotated, &all, n);
            for (a, b) in base.iter().zip(&moved) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn draws_are_distinct_and_reproducible() {
        let a = draw_rotations(100, 5, 9);
        assert_eq!(a, draw_rotations(100, 5, 9));
        let mut d = a.clone();
        d.dedup();
        assert_eq!(d.len(), 5);
    }

    #[test]
    fn config_validation() {
        let bad = Figure1Config {
            subset_sizes: vec![0],
            ..Figure1Config::default()
        };
        assert!(bad.validate().is_err());
        let bad = Figure1Config {
            grid: 1,
            ..Figure1Config::default()
        };
        assert!(bad.validate().is_err());
    }
}
