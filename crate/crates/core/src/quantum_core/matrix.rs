//! Small dense complex matrices and the local-operator kernel shared by
//! state vectors and density operators.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub dim: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            data.extend_from_slice(r);
        }
        CMatrix { dim, data }
    }

    pub fn from_real(dim: usize, vals: &[f64]) -> Self {
        assert_eq!(vals.len(), dim * dim);
        CMatrix { dim, data: vals.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    /// Kronecker product with `self` on the low (first) qubits:
    /// `(self ⊗_le other)[(a_hi,a_lo),(b_hi,b_lo)] = other[a_hi,b_hi]·self[a_lo,b_lo]`.
    pub fn kron_le(&self, other: &CMatrix) -> CMatrix {
        other.kron(self)
    }

    /// Standard Kronecker product `self ⊗ other` (self on the high index).
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut out = CMatrix::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * dim + j * m + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry difference after removing the best global phase.
    pub fn max_abs_diff_up_to_phase(&self, other: &CMatrix) -> f64 {
        // phase from the overlap Tr(other† self)
        let ov: C64 = self.data.iter().zip(&other.data).map(|(a, b)| b.conj() * a).sum();
        if ov.norm() < 1e-300 {
            return self.max_abs_diff(other);
        }
        let ph = ov / ov.norm();
        self.max_abs_diff(&other.scale(ph))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger().mul(self).max_abs_diff(&CMatrix::identity(self.dim)) < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) < tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let m = nalgebra::DMatrix::<C64>::from_fn(n, n, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i).conj())
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }
}

/// Applies the `2^k × 2^k` operator `op` to the qubits `targets` of the
/// little-endian register vector `v` (bit `q` of an index is qubit `q`).
/// `targets[0]` is the least significant bit of the operator's own index.
pub fn apply_local(v: &mut [C64], op: &CMatrix, targets: &[usize]) {
    let k = targets.len();
    let sub = 1usize << k;
    debug_assert_eq!(op.dim, sub);
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let mut offsets = vec![0usize; sub];
    for (s, off) in offsets.iter_mut().enumerate() {
        for (b, &t) in targets.iter().enumerate() {
            if s >> b & 1 == 1 {
                *off |= 1 << t;
            }
        }
    }
    let mut buf = vec![ZERO; sub];
    for base in 0..v.len() {
        if base & mask != 0 {
            continue;
        }
        for s in 0..sub {
            buf[s] = v[base | offsets[s]];
        }
        for r in 0..sub {
            let row = &op.data[r * sub..(r + 1) * sub];
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(&buf) {
                acc += a * b;
            }
            v[base | offsets[r]] = acc;
        }
    }
}

/// Embeds a local operator on `targets` into the full `n`-qubit space.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim);
    let mut col = vec![ZERO; dim];
    for c in 0..dim {
        col.iter_mut().for_each(|z| *z = ZERO);
        col[c] = ONE;
        apply_local(&mut col, op, targets);
        for r in 0..dim {
            out.data[r * dim + c] = col[r];
        }
    }
    out
}
