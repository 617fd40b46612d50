//! Labeled tensor-product structure on top of flat amplitude vectors.
//!
//! A layout is an ordered list of (label, dim) pairs; the leftmost subsystem
//! owns the slowest-varying (most significant) index of the flat vector, so
//! `kron` of per-subsystem vectors in layout order lands in the right slots.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C_ZERO};

pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    parts: Vec<(String, usize)>,
}

impl SubsystemLayout {
    pub fn new<S: AsRef<str>>(parts: &[(S, usize)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("layout", "needs at least one subsystem"));
        }
        let mut seen: Vec<&str> = Vec::new();
        for (label, dim) in parts {
            let label = label.as_ref();
            if label.is_empty() {
                return Err(Error::invalid("layout", "empty subsystem label"));
            }
            if *dim < 2 {
                return Err(Error::invalid(
                    "layout",
                    format!("subsystem `{label}` has dim {dim}, need >= 2"),
                ));
            }
            if seen.contains(&label) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            seen.push(label);
        }
        Ok(SubsystemLayout {
            parts: parts
                .iter()
                .map(|(l, d)| (l.as_ref().to_string(), *d))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|(_, d)| *d).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.parts[self.position(label)?].1)
    }

    /// Row-major strides: rightmost subsystem has stride 1.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.parts.len()];
        for i in (0..self.parts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.parts[i + 1].1;
        }
        strides
    }

    /// Positions of `labels` in layout order; rejects unknowns and repeats.
    fn select(&self, labels: &[&str]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(Error::invalid("keep", "no subsystems selected"));
        }
        let mut positions = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if positions.contains(&p) {
                return Err(Error::DuplicateLabel((*l).to_string()));
            }
            positions.push(p);
        }
        positions.sort_unstable();
        Ok(positions)
    }

    fn sublayout(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout {
            parts: positions.iter().map(|&p| self.parts[p].clone()).collect(),
        }
    }

    /// Flat offsets contributed by the chosen positions as their indices run
    /// through all values in row-major order (first listed position slowest).
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let (_, d) = self.parts[p];
            let stride = strides[p];
            let mut next = Vec::with_capacity(out.len() * d);
            for &base in &out {
                for i in 0..d {
                    next.push(base + i * stride);
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SubsystemLayout,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalized (within `NORM_TOL`).
    pub fn new(layout: SubsystemLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a layout of total dim {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(StateVector { layout, amplitudes })
    }

    /// Wrap amplitudes, rescaling to unit norm.
    pub fn normalized(layout: SubsystemLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a layout of total dim {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::NotNormalized(1.0));
        }
        let inv = 1.0 / norm;
        Ok(StateVector {
            layout,
            amplitudes: amplitudes.into_iter().map(|a| a * inv).collect(),
        })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// <self|other>
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.amplitudes.len(), other.amplitudes.len());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    /// Embed one subsystem into a larger local space, padding with zeros.
    pub fn promote(&self, label: &str, new_dim: usize) -> Result<StateVector> {
        let pos = self.layout.position(label)?;
        let old_dim = self.layout.parts[pos].1;
        if new_dim < old_dim {
            return Err(Error::Dimension(format!(
                "cannot promote `{label}` from dim {old_dim} to {new_dim}"
            )));
        }
        let mut parts = self.layout.parts.clone();
        parts[pos].1 = new_dim;
        let new_layout = SubsystemLayout { parts };

        let old_strides = self.layout.strides();
        let new_strides = new_layout.strides();
        let dims = self.layout.dims();
        let mut amplitudes = vec![C_ZERO; new_layout.total_dim()];
        for (flat, &a) in self.amplitudes.iter().enumerate() {
            if a == C_ZERO {
                continue;
            }
            let mut rem = flat;
            let mut target = 0usize;
            for k in 0..dims.len() {
                let idx = rem / old_strides[k];
                rem %= old_strides[k];
                target += idx * new_strides[k];
            }
            amplitudes[target] = a;
        }
        Ok(StateVector {
            layout: new_layout,
            amplitudes,
        })
    }
}

/// Rearrange the tensor factors of a pure state. `order` must be a
/// permutation of the layout's labels.
pub fn reorder_subsystems(state: &StateVector, order: &[&str]) -> Result<StateVector> {
    let layout = state.layout();
    if order.len() != layout.len() {
        return Err(Error::NotAPermutation(
            order.iter().map(|s| s.to_string()).collect(),
        ));
    }
    let mut old_positions = Vec::with_capacity(order.len());
    for l in order {
        let p = layout.position(l)?;
        if old_positions.contains(&p) {
            return Err(Error::NotAPermutation(
                order.iter().map(|s| s.to_string()).collect(),
            ));
        }
        old_positions.push(p);
    }

    let new_layout = layout.sublayout(&old_positions);
    let old_strides = layout.strides();
    let new_dims = new_layout.dims();
    let total = layout.total_dim();
    let mut amplitudes = vec![C_ZERO; total];
    for new_flat in 0..total {
        // unpack in the new layout, repack with the old strides
        let mut rem = new_flat;
        let mut old_flat = 0usize;
        for k in (0..new_dims.len()).rev() {
            let idx = rem % new_dims[k];
            rem /= new_dims[k];
            old_flat += idx * old_strides[old_positions[k]];
        }
        amplitudes[new_flat] = state.amplitudes[old_flat];
    }
    Ok(StateVector {
        layout: new_layout,
        amplitudes,
    })
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wrap a matrix that is Hermitian (within 1e-12) with unit trace
    /// (within `NORM_TOL`). Positivity is a constructor-path invariant, not
    /// rechecked here; `min_eigenvalue` exists for callers that need proof.
    pub fn new(layout: SubsystemLayout, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for a layout of total dim {}",
                matrix.rows(),
                matrix.cols(),
                layout.total_dim()
            )));
        }
        matrix.check_hermitian(1e-12)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::NotNormalized((tr - 1.0).norm()));
        }
        Ok(DensityMatrix { layout, matrix })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.mul(&self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = crate::linalg::herm_eig(&self.matrix)?;
        Ok(vals.first().copied().unwrap_or(0.0))
    }
}

pub fn density_from_pure(state: &StateVector) -> DensityMatrix {
    let n = state.amplitudes.len();
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        state.amplitudes[i] * state.amplitudes[j].conj()
    });
    DensityMatrix {
        layout: state.layout.clone(),
        matrix,
    }
}

/// Trace out everything not named in `keep`. The kept subsystems retain
/// their relative order from the original layout.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    let layout = &rho.layout;
    let kept = layout.select(keep)?;
    let traced: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();

    let new_layout = layout.sublayout(&kept);
    let keep_offsets = layout.offsets(&kept);
    let trace_offsets = layout.offsets(&traced);

    let dk = keep_offsets.len();
    let m = &rho.matrix;
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C_ZERO;
            for &e in &trace_offsets {
                acc += m[(keep_offsets[a] + e, keep_offsets[b] + e)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix {
        layout: new_layout,
        matrix: out,
    })
}

/// Partial trace straight from a pure state, skipping the full outer product.
pub fn partial_trace_pure(state: &StateVector, keep: &[&str]) -> Result<DensityMatrix> {
    let layout = &state.layout;
    let kept = layout.select(keep)?;
    let traced: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();

    let new_layout = layout.sublayout(&kept);
    let keep_offsets = layout.offsets(&kept);
    let trace_offsets = layout.offsets(&traced);

    let dk = keep_offsets.len();
    let psi = &state.amplitudes;
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C_ZERO;
            for &e in &trace_offsets {
                acc += psi[keep_offsets[a] + e] * psi[keep_offsets[b] + e].conj();
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix {
        layout: new_layout,
        matrix: out,
    })
}
