//! Dense complex matrices and the few decompositions the rest of the crate
//! needs. Everything here is written for small Hilbert spaces (dim <= a few
//! hundred), so the storage is a flat row-major `Vec<Complex64>` and the
//! eigensolver is a cyclic Jacobi iteration rather than anything fancier.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const C_ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const C_ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    /// Build from nested rows. Panics on ragged input; shapes are static
    /// facts of the call site, not runtime data.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C_ZERO {
                    continue;
                }
                let lhs = k * other.cols;
                let dst = i * other.cols;
                for j in 0..other.cols {
                    out.data[dst + j] += a * other.data[lhs + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![C_ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = C_ZERO;
            let row = i * self.cols;
            for j in 0..self.cols {
                acc += self.data[row + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max_ij |M_ij - conj(M_ji)|, zero iff Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub(crate) fn check_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix is not square",
                self.rows, self.cols
            )));
        }
        let defect = self.hermiticity_defect();
        let scale = self.max_abs().max(1.0);
        if defect > tol * scale {
            return Err(Error::NotHermitian(defect));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product, `a` on the slow (most significant) index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let f = a[(ia, ja)];
            if f == C_ZERO {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(vec![vec![C_ZERO, C_ONE], vec![C_ONE, C_ZERO]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(vec![
        vec![C_ZERO, C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C_ZERO],
    ])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(vec![vec![C_ONE, C_ZERO], vec![C_ZERO, C64::new(-1.0, 0.0)]])
}

/// Bosonic annihilation operator truncated to `dim` levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut c = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        c[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    c
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

const MAX_JACOBI_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and a unitary whose columns are
/// the matching eigenvectors, so `m = v * diag(vals) * v^dag`. Input must be
/// Hermitian to within 1e-10 (relative to its largest entry); the iteration
/// runs on the symmetrized part.
pub fn herm_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    m.check_hermitian(1e-10)?;
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }

    // Symmetrize so the sub-tolerance defect cannot feed the iteration.
    let mut a = CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);

    let scale = a.frobenius_norm().max(1.0);
    let target = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = a[(p, q)];
                let r = beta.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = beta / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (app - aqq) / (2.0 * r);
                // smaller-magnitude root of t^2 - 2*theta*t - 1 = 0
                let t = if theta == 0.0 {
                    1.0
                } else {
                    -theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s;

                // a <- j^dag a j with the rotation in the (p, q) plane:
                // j[p][p] = c, j[p][q] = s*phase, j[q][p] = -s*conj(phase), j[q][q] = c
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * sp.conj();
                    a[(k, q)] = akp * sp + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * sp;
                    a[(q, k)] = apk * sp.conj() + aqk * c;
                }
                a[(p, q)] = C_ZERO;
                a[(q, p)] = C_ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp.conj();
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(Error::NoConvergence(MAX_JACOBI_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());

    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let sorted_v = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((sorted_vals, sorted_v))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues below a small multiple of the spectral scale are treated as
/// exact zeros; without the clamp, a nominal zero eigenvalue of size ~1e-16
/// turns into a ~1e-8 component of the root and poisons downstream
/// concurrence spectra. Eigenvalues below -1e-10 (relative) are rejected.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = herm_eig(m)?;
    let n = vals.len();
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let scale = top.max(1e-30);
    if let Some(&min) = vals.first() {
        if min < -1e-10 * scale.max(1.0) {
            return Err(Error::NotPositive(min));
        }
    }
    let clamp = 1e-14 * scale;
    let roots: Vec<f64> = vals
        .iter()
        .map(|&l| if l <= clamp { 0.0 } else { l.sqrt() })
        .collect();
    // v * diag(roots) * v^dag
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C_ZERO;
            for k in 0..n {
                if roots[k] != 0.0 {
                    acc += vecs[(i, k)] * roots[k] * vecs[(j, k)].conj();
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Unitary propagator `exp(-i * scale * t * h)` for Hermitian `h`.
pub fn expm(h: &CMatrix, t: f64, scale: f64) -> Result<CMatrix> {
    let (vals, vecs) = herm_eig(h)?;
    let n = vals.len();
    let mut out = CMatrix::zeros(n, n);
    let phases: Vec<C64> = vals
        .iter()
        .map(|&e| C64::new(0.0, -scale * t * e).exp())
        .collect();
    for i in 0..n {
        for j in 0..n {
            let mut acc = C_ZERO;
            for k in 0..n {
                acc += vecs[(i, k)] * phases[k] * vecs[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}
