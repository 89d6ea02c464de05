use std::fmt;

use crate::error::{Error, Result};

/// How a point set was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// `k × k` regular grid on `[-1, 1]²`, boundary included.
    RegularGrid(usize),
    /// Cell midpoints of the `k × k` regular grid.
    Midpoints(usize),
    Explicit,
}

/// Ordered list of distinct sites in `ℝ^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    construction: Construction,
}

impl PointSet {
    /// Builds an explicit point set from coordinate tuples, rejecting
    /// duplicate sites.
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Domain(format!(
                "{} coordinates cannot form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        let set = PointSet {
            dim,
            coords,
            construction: Construction::Explicit,
        };
        set.check_distinct()?;
        Ok(set)
    }

    /// Points on the real line.
    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Self::from_flat(1, xs.to_vec())
    }

    /// The `k × k` regular grid on `[-1, 1]²`, ordered with the first
    /// coordinate running fastest.
    pub fn regular_grid(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain(format!("grid parameter must be at least 2, got {k}")));
        }
        let ticks: Vec<f64> = (0..k).map(|i| grid_tick(i, k)).collect();
        Ok(PointSet {
            dim: 2,
            coords: tensor(&ticks),
            construction: Construction::RegularGrid(k),
        })
    }

    /// The `(k-1)²` cell midpoints of the `k × k` regular grid.
    pub fn midpoint_grid(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain(format!("grid parameter must be at least 2, got {k}")));
        }
        let ticks: Vec<f64> = (0..k - 1)
            .map(|i| 0.5 * (grid_tick(i, k) + grid_tick(i + 1, k)))
            .collect();
        Ok(PointSet {
            dim: 2,
            coords: tensor(&ticks),
            construction: Construction::Midpoints(k),
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

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// `c · X`. Construction metadata is dropped.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|x| c * x).collect(),
            construction: Construction::Explicit,
        })
    }

    /// Appends a site, rejecting it if already present.
    pub fn with_point(&self, p: &[f64]) -> Result<Self> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(p);
        Self::from_flat(self.dim, coords)
    }

    pub fn min_separation(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in 0..i {
                best = best.min(distance(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// `sup_{y ∈ probes} min_{x ∈ self} ‖y − x‖₂`, the fill distance with
    /// the domain represented by a probe set.
    pub fn fill_distance(&self, probes: &PointSet) -> f64 {
        probes
            .iter()
            .map(|y| self.iter().map(|x| distance(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    fn check_distinct(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in 0..i {
                if self.point(i) == self.point(j) {
                    return Err(Error::DuplicateSites(j, i));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.construction {
            Construction::RegularGrid(k) => write!(f, "grid({k})"),
            Construction::Midpoints(k) => write!(f, "midpoints({k})"),
            Construction::Explicit => write!(f, "{} points in R^{}", self.len(), self.dim),
        }
    }
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// Symmetric about zero so that grid(k) contains exact ±1 and 0 for odd k.
fn grid_tick(i: usize, k: usize) -> f64 {
    let m = (k - 1) as f64;
    (2 * i) as f64 / m - 1.0
}

fn tensor(ticks: &[f64]) -> Vec<f64> {
    let mut coords = Vec::with_capacity(2 * ticks.len() * ticks.len());
    for &y in ticks {
        for &x in ticks {
            coords.push(x);
            coords.push(y);
        }
    }
    coords
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g11 = PointSet::regular_grid(11).unwrap();
        assert_eq!(g11.len(), 121);
        assert_eq!(PointSet::regular_grid(21).unwrap().len(), 441);
        assert!(g11.iter().any(|p| p == [-1.0, -1.0]));
        assert!(g11.iter().any(|p| p == [1.0, 1.0]));
        assert!(g11.iter().any(|p| p == [0.0, 0.0]));
        assert!((g11.min_separation() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn midpoints() {
        let m2 = PointSet::midpoint_grid(2).unwrap();
        assert_eq!(m2.len(), 1);
        assert_eq!(m2.point(0), [0.0, 0.0]);
        assert_eq!(PointSet::midpoint_grid(21).unwrap().len(), 400);

        let m11 = PointSet::midpoint_grid(11).unwrap();
        assert_eq!(m11.len(), 100);
        assert!(m11.iter().all(|p| p.iter().all(|c| c.abs() < 1.0)));
        // Every midpoint sits at the half-diagonal of its cell from the
        // nearest grid sites: (√2 / 10)·(1/2)·2 = √2/10.
        let g11 = PointSet::regular_grid(11).unwrap();
        let half_diag = 2f64.sqrt() / 10.0;
        for y in m11.iter() {
            let d = g11.iter().map(|x| distance(x, y)).fold(f64::INFINITY, f64::min);
            assert!((d - half_diag).abs() < 1e-14);
        }
        assert!((g11.fill_distance(&m11) - half_diag).abs() < 1e-14);
    }

    #[test]
    fn rejects_duplicates_and_bad_grids() {
        let err = PointSet::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert_eq!(err, Error::DuplicateSites(0, 2));
        assert!(PointSet::regular_grid(1).is_err());
        assert!(PointSet::midpoint_grid(0).is_err());
        assert!(matches!(
            PointSet::new(2, &[vec![0.0]]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn scaling() {
        let x = PointSet::from_1d(&[-1.0, 0.5]).unwrap();
        let y = x.scaled(2.0).unwrap();
        assert_eq!(y.as_flat(), &[-2.0, 1.0]);
        assert!(x.scaled(0.0).is_err());
    }
}
