//! Training and collocation point sets: Latin hypercube samples, tensor
//! grids and random selection of initial/boundary data.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, stream)`, so a
//! point set is a pure function of its arguments on every platform.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seeded generator for an independent named stream.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Axis-aligned box `Π_j [lo_j, hi_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::BadBox(format!(
                "{} lower and {} upper bounds",
                lo.len(),
                hi.len()
            )));
        }
        for (j, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::BadBox(format!("coordinate {j}: [{a}, {b}]")));
            }
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }
}

/// Points of dimension `dim`, stored point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    domain: DomainBox,
    seed: Option<u64>,
}

impl PointSet {
    pub fn from_coords(domain: DomainBox, coords: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(p) = coords.chunks(dim).find(|p| !domain.contains(p)) {
            return Err(Error::BadBox(format!("point {p:?} outside the domain")));
        }
        Ok(PointSet {
            dim,
            coords,
            domain,
            seed: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    /// Flat point-major coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Values of coordinate `j` for every point.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter().map(|p| p[j]).collect()
    }

    /// Keeps the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            dim: self.dim,
            coords,
            domain: self.domain.clone(),
            seed: self.seed,
        }
    }

    /// Writes a header of coordinate names and one point per row.
    pub fn write_csv(&self, names: &[&str], path: &Path) -> Result<()> {
        if names.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                actual: names.len(),
            });
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(names)?;
        for p in self.iter() {
            w.write_record(p.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Plain Latin hypercube sample: every coordinate puts exactly one point in
/// each of `n` equal strata, with independent random stratum orderings.
pub fn latin_hypercube(n: usize, domain: &DomainBox, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::EmptyData("latin hypercube sample of size 0"));
    }
    let dim = domain.dim();
    let mut rng = rng_stream(seed, 0);
    let mut coords = vec![0.0; n * dim];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        perm.shuffle(&mut rng);
        let (lo, hi) = (domain.lo[j], domain.hi[j]);
        let width = (hi - lo) / n as f64;
        for (i, &stratum) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            let v = lo + (stratum as f64 + u) * width;
            coords[i * dim + j] = v.clamp(lo, hi);
        }
    }
    Ok(PointSet {
        dim,
        coords,
        domain: domain.clone(),
        seed: Some(seed),
    })
}

/// Number of grid nodes `round(extent/step) + 1` along one axis.
pub fn grid_count(lo: f64, hi: f64, step: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::BadStep(format!("step {step} must be positive")));
    }
    let ratio = (hi - lo) / step;
    let cells = ratio.round();
    if cells < 1.0 || (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::BadStep(format!(
            "step {step} does not divide [{lo}, {hi}]"
        )));
    }
    Ok(cells as usize + 1)
}

/// Nodes `lo + j·(hi − lo)/(n − 1)`, both endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|j| {
            if j + 1 == n {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Tensor-product grid including both endpoints; last coordinate fastest.
pub fn uniform_grid(domain: &DomainBox, steps: &[f64]) -> Result<PointSet> {
    if steps.len() != domain.dim() {
        return Err(Error::LengthMismatch {
            expected: domain.dim(),
            actual: steps.len(),
        });
    }
    let axes = domain
        .lo
        .iter()
        .zip(&domain.hi)
        .zip(steps)
        .map(|((&lo, &hi), &h)| grid_count(lo, hi, h).map(|n| linspace(lo, hi, n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet {
        dim: domain.dim(),
        coords: tensor_product(&axes),
        domain: domain.clone(),
        seed: None,
    })
}

pub(crate) fn tensor_product(axes: &[Vec<f64>]) -> Vec<f64> {
    let dim = axes.len();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        for j in 0..dim {
            coords.push(axes[j][idx[j]]);
        }
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    coords
}

/// Draws `n_total` candidates without replacement from the union of
/// `pools`, returning the chosen members of each pool in pool order.
pub fn split_boundary_initial(
    pools: &[Vec<f64>],
    n_total: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let available: usize = pools.iter().map(Vec::len).sum();
    if n_total > available {
        return Err(Error::PoolTooSmall {
            requested: n_total,
            available,
        });
    }
    let mut rng = rng_stream(seed, 1);
    let mut chosen = rand::seq::index::sample(&mut rng, available, n_total).into_vec();
    chosen.sort_unstable();
    let mut out = vec![Vec::new(); pools.len()];
    let mut picks = chosen.into_iter().peekable();
    let mut offset = 0;
    for (k, pool) in pools.iter().enumerate() {
        while let Some(&flat) = picks.peek() {
            if flat >= offset + pool.len() {
                break;
            }
            out[k].push(pool[flat - offset]);
            picks.next();
        }
        offset += pool.len();
    }
    Ok(out)
}
