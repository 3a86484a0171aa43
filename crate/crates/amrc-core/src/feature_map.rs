//! Feature mapping from instance-label pairs to real vectors.
//!
//! An instance map `Psi` turns a raw instance into a `d`-vector, either as
//! the identity (linear map) or through random Fourier features. The full
//! feature map combines `Psi` with a one-hot label encoding: `Phi(x, y)` has
//! `|Y|` contiguous blocks of length `d`, with block `y` equal to `Psi(x)`
//! and every other block zero.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Labels are 1-based, in `1..=n_classes`.
pub type Label = usize;

/// Map from raw instances to `d`-dimensional feature vectors.
#[derive(Debug, Clone)]
pub enum InstanceMap {
    /// Identity map; `d` equals the raw instance dimension.
    Linear { dim: usize },
    /// Random Fourier features: `d = 2D` with `D` Gaussian vectors.
    Rff {
        /// `D x raw_dim` matrix of frequency vectors drawn from `N(0, scale * I)`.
        vectors: Array2<f64>,
        scale: f64,
        seed: u64,
    },
}

impl InstanceMap {
    pub fn linear(dim: usize) -> Self {
        assert!(dim > 0, "instance dimension must be positive");
        InstanceMap::Linear { dim }
    }

    /// Draws `n_vectors` frequency vectors from `N(0, scale * I)` once;
    /// the map is immutable afterwards.
    pub fn rff(raw_dim: usize, n_vectors: usize, scale: f64, seed: u64) -> Self {
        assert!(raw_dim > 0 && n_vectors > 0, "dimensions must be positive");
        assert!(scale > 0.0, "rff scale must be positive");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, scale.sqrt()).unwrap();
        let vectors =
            Array2::from_shape_fn((n_vectors, raw_dim), |_| normal.sample(&mut rng));
        InstanceMap::Rff { vectors, scale, seed }
    }

    /// Raw instance dimension this map accepts.
    pub fn raw_dim(&self) -> usize {
        match self {
            InstanceMap::Linear { dim } => *dim,
            InstanceMap::Rff { vectors, .. } => vectors.ncols(),
        }
    }

    /// Output dimension `d` of `Psi`.
    pub fn output_dim(&self) -> usize {
        match self {
            InstanceMap::Linear { dim } => *dim,
            InstanceMap::Rff { vectors, .. } => 2 * vectors.nrows(),
        }
    }

    /// Evaluates `Psi(x)`.
    pub fn psi(&self, x: &[f64]) -> Result<Array1<f64>> {
        if x.len() != self.raw_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.raw_dim(),
                got: x.len(),
            });
        }
        match self {
            InstanceMap::Linear { .. } => Ok(Array1::from(x.to_vec())),
            InstanceMap::Rff { vectors, .. } => {
                let n = vectors.nrows();
                let mut out = Array1::zeros(2 * n);
                for (i, row) in vectors.rows().into_iter().enumerate() {
                    let proj: f64 = row.iter().zip(x).map(|(u, v)| u * v).sum();
                    out[i] = proj.cos();
                    out[n + i] = proj.sin();
                }
                Ok(out)
            }
        }
    }
}

/// Default RFF scale: `1 / (2 * sigma^2)` where `sigma` is the median
/// pairwise Euclidean distance among the first `min(50, len)` instances.
pub fn median_heuristic_scale(instances: &[Vec<f64>]) -> f64 {
    let n = instances.len().min(50);
    let mut dists = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = instances[i]
                .iter()
                .zip(&instances[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = dists[dists.len() / 2];
    if median <= 0.0 {
        1.0
    } else {
        1.0 / (2.0 * median * median)
    }
}

/// Feature mapping `Phi(x, y)` with block layout: block `j` (for label `j`)
/// occupies entries `d*(j-1)..d*j` and equals `1{y=j} * Psi(x)`.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    map: InstanceMap,
    n_classes: usize,
}

impl FeatureMap {
    pub fn new(map: InstanceMap, n_classes: usize) -> Self {
        assert!(n_classes >= 2, "need at least two classes");
        FeatureMap { map, n_classes }
    }

    pub fn instance_map(&self) -> &InstanceMap {
        &self.map
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Per-label block length `d`.
    pub fn feature_dim(&self) -> usize {
        self.map.output_dim()
    }

    /// Total length `m = |Y| * d` of `Phi`.
    pub fn dim(&self) -> usize {
        self.n_classes * self.map.output_dim()
    }

    /// Label associated with component `i` of `Phi` (0-based component index).
    pub fn component_label(&self, i: usize) -> Label {
        debug_assert!(i < self.dim());
        i / self.feature_dim() + 1
    }

    pub fn psi(&self, x: &[f64]) -> Result<Array1<f64>> {
        self.map.psi(x)
    }

    fn check_label(&self, y: Label) -> Result<()> {
        if y == 0 || y > self.n_classes {
            return Err(Error::LabelOutOfRange { label: y, n_classes: self.n_classes });
        }
        Ok(())
    }

    /// Evaluates `Phi(x, y)`.
    pub fn phi(&self, x: &[f64], y: Label) -> Result<Array1<f64>> {
        self.check_label(y)?;
        let psi = self.psi(x)?;
        Ok(self.phi_from_psi(&psi, y))
    }

    /// Places `psi` in block `y`, zeros elsewhere.
    pub fn phi_from_psi(&self, psi: &Array1<f64>, y: Label) -> Array1<f64> {
        let d = self.feature_dim();
        let mut out = Array1::zeros(self.dim());
        out.slice_mut(ndarray::s![d * (y - 1)..d * y]).assign(psi);
        out
    }

    /// Inner product `Phi(x, y)^T mu` for each label `y`, given `Psi(x)`.
    pub fn block_scores(&self, psi: &Array1<f64>, mu: &Array1<f64>) -> Vec<f64> {
        let d = self.feature_dim();
        (0..self.n_classes)
            .map(|j| {
                psi.iter()
                    .zip(mu.iter().skip(j * d))
                    .map(|(p, m)| p * m)
                    .sum()
            })
            .collect()
    }

    /// Row `(f, h)` of the polyhedral description of `varphi` for a label
    /// subset `C`: `f = sum_{y in C} Phi(x, y) / |C|`, `h = 1 / |C|`.
    pub fn subset_row(&self, x: &[f64], labels: &[Label]) -> Result<(Array1<f64>, f64)> {
        if labels.is_empty() {
            return Err(Error::EmptySubset);
        }
        for &y in labels {
            self.check_label(y)?;
        }
        let psi = self.psi(x)?;
        Ok(self.subset_row_from_psi(&psi, labels))
    }

    pub fn subset_row_from_psi(
        &self,
        psi: &Array1<f64>,
        labels: &[Label],
    ) -> (Array1<f64>, f64) {
        let d = self.feature_dim();
        let inv = 1.0 / labels.len() as f64;
        let mut f = Array1::zeros(self.dim());
        for &y in labels {
            let mut block = f.slice_mut(ndarray::s![d * (y - 1)..d * y]);
            block += &(psi * inv);
        }
        (f, inv)
    }

    /// Rows for every nonempty subset of labels, optionally capped by subset
    /// size. Subsets are enumerated in increasing bitmask order over labels.
    pub fn subset_rows_from_psi(
        &self,
        psi: &Array1<f64>,
        max_subset_size: Option<usize>,
    ) -> Vec<(Array1<f64>, f64)> {
        let k = self.n_classes;
        let mut rows = Vec::with_capacity((1usize << k) - 1);
        for mask in 1u32..(1u32 << k) {
            let size = mask.count_ones() as usize;
            if let Some(cap) = max_subset_size {
                if size > cap {
                    continue;
                }
            }
            let labels: Vec<Label> =
                (0..k).filter(|j| mask & (1 << j) != 0).map(|j| j + 1).collect();
            rows.push(self.subset_row_from_psi(psi, &labels));
        }
        rows
    }
}
