//! Dense complex linear algebra for small state spaces (dimension 2..=16).
//!
//! Everything here is exact-as-possible and deterministic: the Hermitian
//! eigensolver is a cyclic complex Jacobi sweep with a fixed rotation order,
//! eigenvectors follow a fixed phase convention (first nonzero component real
//! positive), and degenerate clusters are re-orthonormalized in index order.
//! All values are immutable after construction and safe to share across
//! threads.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported state-space dimension.
pub const MAX_DIM: usize = 16;
/// Construction tolerance on |A - A†| for Hermitian inputs.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Construction tolerance on |UU† - I| for unitary inputs.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this gap form one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;
const RESIDUAL_TOL: f64 = 1e-6;

static NORM_DRIFT_WARNINGS: AtomicU64 = AtomicU64::new(0);

/// Number of times Born-rule sampling had to renormalize a drifted state.
pub fn norm_drift_warnings() -> u64 {
    NORM_DRIFT_WARNINGS.load(Ordering::Relaxed)
}

fn check_dim(dim: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange { dim })
    }
}

/// Square complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.set(k, k, Complex64::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix rows must form a square matrix"));
        }
        Ok(CMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..self.dim {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matvec dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let d = self.dim * rhs.dim;
        let mut out = Self::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..rhs.dim {
                    for l in 0..rhs.dim {
                        out.set(i * rhs.dim + k, j * rhs.dim + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, rhs: &CMatrix, factor: Complex64) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += factor * b;
        }
    }

    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max_{i,j} |a_ij - conj(a_ji)|
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// max_{i,j} |(UU†)_ij - δ_ij|
    pub fn unitarity_deviation(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&Self::identity(self.dim))
    }

    fn off_diagonal_frobenius(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    sum += self.get(i, j).norm_sqr();
                }
            }
        }
        sum.sqrt()
    }
}

/// Pure state: unit-norm vector of complex probability amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state |index⟩ in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        Ok(StateVector { amplitudes })
    }

    /// Wraps raw amplitudes, normalizing when the norm drifts beyond 1e-12.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr < 1e-24 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        let norm = norm_sqr.sqrt();
        if (norm - 1.0).abs() <= 1e-12 {
            Ok(StateVector { amplitudes })
        } else {
            Ok(StateVector {
                amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amplitudes[k]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Hermitian operator scaled and ready to exponentiate (the caller supplies
/// any time prefactor already absorbed into the entries).
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    matrix: CMatrix,
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        let deviation = matrix.hermiticity_deviation();
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianObservable { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Unitary matrix: the environment evolution, a codification gate, or any
/// intermediate product of those.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    matrix: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        let deviation = matrix.unitarity_deviation();
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix { matrix })
    }

    /// For matrices unitary by construction (gate embeddings, products).
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(matrix.unitarity_deviation() <= UNITARITY_TOL);
        UnitaryMatrix { matrix }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(UnitaryMatrix {
            matrix: CMatrix::identity(dim),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix {
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Eigendecomposition: values paired with orthonormal eigenvectors.
///
/// For Hermitian input the values are real and ascending; for unitary input
/// they are unit-modulus and sorted by principal argument in [0, 2π).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<Complex64>,
    vectors: Vec<StateVector>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        self.values[k]
    }

    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Principal arguments mapped into [0, 2π).
    pub fn eigenphases(&self) -> Vec<f64> {
        self.values.iter().map(|v| principal_phase(*v)).collect()
    }

    pub fn eigenvector(&self, k: usize) -> &StateVector {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    /// V diag(λ) V†
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d);
        for k in 0..d {
            let v = self.vectors[k].amplitudes();
            for i in 0..d {
                for j in 0..d {
                    let t = out.get(i, j) + self.values[k] * v[i] * v[j].conj();
                    out.set(i, j, t);
                }
            }
        }
        out
    }

    /// Indices grouped into degenerate clusters (eigenvalue gap < 1e-9),
    /// including the circular wrap for unit-modulus spectra.
    pub fn degenerate_clusters(&self) -> Vec<Vec<usize>> {
        let d = self.dim();
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        for k in 1..d {
            if (self.values[k] - self.values[k - 1]).norm() < DEGENERACY_GAP {
                clusters.last_mut().unwrap().push(k);
            } else {
                clusters.push(vec![k]);
            }
        }
        if clusters.len() > 1 && (self.values[d - 1] - self.values[0]).norm() < DEGENERACY_GAP {
            let tail = clusters.pop().unwrap();
            clusters[0].splice(0..0, tail);
        }
        clusters
    }
}

fn principal_phase(value: Complex64) -> f64 {
    let mut phase = value.arg();
    if phase < 0.0 {
        phase += std::f64::consts::TAU;
    }
    if phase >= std::f64::consts::TAU {
        phase = 0.0;
    }
    phase
}

/// One cyclic complex Jacobi pass over the strict upper triangle.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let modulus = apq.norm();
    if modulus == 0.0 {
        return;
    }
    let phase = apq / modulus;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    // t = s/c solves t² - 2θt - 1 = 0; take the smaller-magnitude root
    let theta = (aqq - app) / (2.0 * modulus);
    let t = if theta >= 0.0 {
        -1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // R is the identity apart from
    //   R[p][p] = c        R[p][q] = -s e^{iθ}
    //   R[q][p] = s e^{-iθ}  R[q][q] = c
    // with θ = arg(a_pq); apply A <- R† A R and V <- V R.
    let rpq = -s * phase;
    let rqp = s * phase.conj();
    let d = a.dim();

    for i in 0..d {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip * c + aiq * rqp);
        a.set(i, q, aip * rpq + aiq * c);
    }
    for j in 0..d {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, apj * c + aqj * rqp.conj());
        a.set(q, j, apj * rpq.conj() + aqj * c);
    }
    a.set(p, q, Complex64::ZERO);
    a.set(q, p, Complex64::ZERO);
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));

    for i in 0..d {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * c + viq * rqp);
        v.set(i, q, vip * rpq + viq * c);
    }
}

/// Jacobi eigensolve of a Hermitian matrix; returns unsorted (values, columns).
fn jacobi_hermitian(matrix: &CMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let d = matrix.dim();
    let mut a = matrix.clone();
    let mut v = CMatrix::identity(d);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_frobenius() < JACOBI_OFF_TOL {
            converged = true;
            break;
        }
        for p in 0..d - 1 {
            for q in p + 1..d {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && a.off_diagonal_frobenius() >= JACOBI_OFF_TOL {
        return Err(Error::EigensolverStalled {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let values = (0..d).map(|k| a.get(k, k).re).collect();
    let columns = (0..d)
        .map(|k| (0..d).map(|i| v.get(i, k)).collect())
        .collect();
    Ok((values, columns))
}

/// First component with modulus above 1e-6 made real positive.
fn fix_phase(column: &mut [Complex64]) {
    let pivot = column
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or_else(|| {
            column
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap()
        });
    let factor = pivot.conj() / pivot.norm();
    for z in column.iter_mut() {
        *z *= factor;
    }
}

/// Modified Gram-Schmidt in index order, in place.
fn orthonormalize(columns: &mut [Vec<Complex64>]) {
    for k in 0..columns.len() {
        let (done, rest) = columns.split_at_mut(k);
        let col = &mut rest[0];
        for prev in done.iter() {
            let overlap: Complex64 = prev.iter().zip(col.iter()).map(|(p, c)| p.conj() * c).sum();
            for (c, p) in col.iter_mut().zip(prev.iter()) {
                *c -= overlap * p;
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in col.iter_mut() {
            *z /= norm;
        }
    }
}

/// Ascending eigenvalues with orthonormal, phase-fixed eigenvectors.
///
/// Degenerate clusters (gap < 1e-9) are re-orthonormalized by modified
/// Gram-Schmidt in index order so repeated runs agree bit for bit.
pub fn hermitian_eigensystem(observable: &HermitianObservable) -> Result<EigenSystem> {
    let (values, columns) = jacobi_hermitian(observable.matrix())?;
    let d = values.len();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut columns: Vec<Vec<Complex64>> = order.into_iter().map(|i| columns[i].clone()).collect();

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            orthonormalize(&mut columns[start..end]);
        }
        start = end;
    }

    for column in columns.iter_mut() {
        fix_phase(column);
    }

    Ok(EigenSystem {
        values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        vectors: columns
            .into_iter()
            .map(StateVector::from_amplitudes)
            .collect::<Result<_>>()?,
    })
}

// Fixed mixing angle for the Hermitian reduction of a unitary; any value away
// from a multiple of π/2 works, this one is frozen for reproducibility.
const MIX_COS: f64 = 0.806_898_221_355_073_3;
const MIX_SIN: f64 = 0.590_690_494_568_872;

/// Eigenphases (sorted by principal argument in [0, 2π)) and orthonormal
/// eigenvectors of a unitary matrix.
///
/// Solved through the Hermitian eigensystem of a fixed real linear
/// combination of (U+U†)/2 and (U-U†)/(2i); clusters left degenerate by that
/// combination are refined with the orthogonal combination, which separates
/// any two distinct eigenphases.
pub fn unitary_eigensystem(unitary: &UnitaryMatrix) -> Result<EigenSystem> {
    let u = unitary.matrix();
    let d = u.dim();
    let u_adj = u.adjoint();

    let mut h_re = u.clone();
    h_re.add_scaled(&u_adj, Complex64::ONE);
    for z in h_re.data.iter_mut() {
        *z *= 0.5;
    }
    let mut h_im = u.clone();
    h_im.add_scaled(&u_adj, -Complex64::ONE);
    for z in h_im.data.iter_mut() {
        *z *= Complex64::new(0.0, -0.5);
    }

    let mut mixed = CMatrix::zeros(d);
    mixed.add_scaled(&h_re, Complex64::new(MIX_COS, 0.0));
    mixed.add_scaled(&h_im, Complex64::new(MIX_SIN, 0.0));

    let (mixed_values, mut columns) = {
        let (values, columns) = jacobi_hermitian(&mixed)?;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        (
            order.iter().map(|&i| values[i]).collect::<Vec<f64>>(),
            order
                .into_iter()
                .map(|i| columns[i].clone())
                .collect::<Vec<_>>(),
        )
    };

    // Refinement pass: inside each cluster of the mixed spectrum, diagonalize
    // the projection of the orthogonal combination.
    let mut orthogonal = CMatrix::zeros(d);
    orthogonal.add_scaled(&h_re, Complex64::new(-MIX_SIN, 0.0));
    orthogonal.add_scaled(&h_im, Complex64::new(MIX_COS, 0.0));

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && mixed_values[end] - mixed_values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let block = &columns[start..end];
            let mut projected = CMatrix::zeros(size);
            for r in 0..size {
                for s in 0..size {
                    let mut acc = Complex64::ZERO;
                    for i in 0..d {
                        for j in 0..d {
                            acc += block[r][i].conj() * orthogonal.get(i, j) * block[s][j];
                        }
                    }
                    projected.set(r, s, acc);
                }
            }
            let (sub_values, sub_columns) = jacobi_hermitian(&projected)?;
            let mut sub_order: Vec<usize> = (0..size).collect();
            sub_order.sort_by(|&i, &j| sub_values[i].total_cmp(&sub_values[j]));
            let refined: Vec<Vec<Complex64>> = sub_order
                .into_iter()
                .map(|k| {
                    (0..d)
                        .map(|i| {
                            (0..size)
                                .map(|s| block[s][i] * sub_columns[k][s])
                                .sum::<Complex64>()
                        })
                        .collect()
                })
                .collect();
            columns[start..end].clone_from_slice(&refined);
        }
        start = end;
    }

    // Rayleigh quotients give the eigenphases; verify the residual.
    let mut pairs: Vec<(f64, Complex64, Vec<Complex64>)> = Vec::with_capacity(d);
    for column in columns.drain(..) {
        let image = u.matvec(&column);
        let mu: Complex64 = column
            .iter()
            .zip(image.iter())
            .map(|(c, i)| c.conj() * i)
            .sum();
        let mu = mu / mu.norm();
        let residual = image
            .iter()
            .zip(column.iter())
            .map(|(i, c)| (i - mu * c).norm())
            .fold(0.0, f64::max);
        if residual > RESIDUAL_TOL {
            return Err(Error::EigenResidual { residual });
        }
        pairs.push((principal_phase(mu), mu, column));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let values = pairs.iter().map(|(_, mu, _)| *mu).collect();
    let vectors = pairs
        .into_iter()
        .map(|(_, _, mut column)| {
            fix_phase(&mut column);
            StateVector::from_amplitudes(column)
        })
        .collect::<Result<_>>()?;

    Ok(EigenSystem { values, vectors })
}

/// U = V diag(e^{-iλ_k}) V† from the eigensystem of the observable.
pub fn environment_from_observable(observable: &HermitianObservable) -> Result<UnitaryMatrix> {
    let eigen = hermitian_eigensystem(observable)?;
    let d = eigen.dim();
    let mut u = CMatrix::zeros(d);
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, -eigen.eigenvalue(k).re);
        let v = eigen.eigenvector(k).amplitudes();
        for i in 0..d {
            for j in 0..d {
                let t = u.get(i, j) + phase * v[i] * v[j].conj();
                u.set(i, j, t);
            }
        }
    }
    UnitaryMatrix::new(u)
}

/// Applies U to the state; the norm is preserved within 1e-12.
pub fn apply_unitary(unitary: &UnitaryMatrix, state: &StateVector) -> Result<StateVector> {
    if unitary.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            left: unitary.dim(),
            right: state.dim(),
        });
    }
    StateVector::from_amplitudes(unitary.matrix().matvec(state.amplitudes()))
}

/// Born-rule sampling by cumulative-sum inversion of a single uniform draw.
///
/// Deterministic given `u`. If the squared norm has drifted more than 1e-9
/// from one the probabilities are renormalized and a warning counter is
/// bumped (see [`norm_drift_warnings`]).
pub fn measure_computational(state: &StateVector, u: f64) -> usize {
    let mut total: f64 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (total - 1.0).abs() > 1e-9 {
        NORM_DRIFT_WARNINGS.fetch_add(1, Ordering::Relaxed);
    } else {
        total = 1.0;
    }
    let threshold = u * total;
    let mut cumulative = 0.0;
    for (k, amplitude) in state.amplitudes.iter().enumerate() {
        cumulative += amplitude.norm_sqr();
        if threshold < cumulative {
            return k;
        }
    }
    state.dim() - 1
}

/// |⟨a|b⟩|², symmetric in its arguments and invariant under global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// JSON wire format for matrices: row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub kind: MatrixKind,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Hermitian,
    Unitary,
}

/// A matrix loaded from the wire format, validated per its declared kind.
#[derive(Debug, Clone)]
pub enum LoadedMatrix {
    Hermitian(HermitianObservable),
    Unitary(UnitaryMatrix),
}

impl MatrixFile {
    pub fn parse(json: &str) -> Result<LoadedMatrix> {
        let file: MatrixFile =
            serde_json::from_str(json).map_err(|e| Error::invalid(format!("matrix JSON: {e}")))?;
        file.load()
    }

    pub fn load(&self) -> Result<LoadedMatrix> {
        let d = self.dim;
        if self.re.len() != d
            || self.im.len() != d
            || self.re.iter().any(|r| r.len() != d)
            || self.im.iter().any(|r| r.len() != d)
        {
            return Err(Error::invalid(format!(
                "matrix JSON: re/im must both be {d}x{d} row-major arrays"
            )));
        }
        let rows: Vec<Vec<Complex64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| Complex64::new(self.re[i][j], self.im[i][j]))
                    .collect()
            })
            .collect();
        let matrix = CMatrix::from_rows(&rows)?;
        match self.kind {
            MatrixKind::Hermitian => Ok(LoadedMatrix::Hermitian(HermitianObservable::new(matrix)?)),
            MatrixKind::Unitary => Ok(LoadedMatrix::Unitary(UnitaryMatrix::new(matrix)?)),
        }
    }

    pub fn from_matrix(matrix: &CMatrix, kind: MatrixKind) -> Self {
        let d = matrix.dim();
        MatrixFile {
            dim: d,
            kind,
            re: (0..d)
                .map(|i| (0..d).map(|j| matrix.get(i, j).re).collect())
                .collect(),
            im: (0..d)
                .map(|i| (0..d).map(|j| matrix.get(i, j).im).collect())
                .collect(),
        }
    }
}
