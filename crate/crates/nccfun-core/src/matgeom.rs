//! Matrix realisations for `Sl(n, R)/SO(p, q)`: Iwasawa and `H A N`
//! decompositions via principal minors, the bounded domain `Omega`, root
//! coordinate maps, nilpotent exponentials, and seeded samplers.
//!
//! This module is the geometric substrate of the quadrature oracle: the
//! decompositions here are computed directly from signed principal minors
//! and unit-triangular congruences, sharing nothing with the closed-form
//! Gamma/Beta machinery they are later tested against.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_core::RngCore;

use crate::quad::unit_f64;

/// Centralised numeric tolerances for the matrix layer.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Group elements must satisfy `|det - 1| <= det`.
    pub det: f64,
    /// Relative reconstruction error allowed for `k a n` round trips.
    pub reconstruction: f64,
    /// Allowed deviation of `h^T I_{p,q} h` from `I_{p,q}`.
    pub orthogonality: f64,
    /// Principal minors below this magnitude are reported as singular.
    pub minor_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            det: 1e-9,
            reconstruction: 1e-8,
            orthogonality: 1e-8,
            minor_floor: 1e-300,
        }
    }
}

/// Errors from the matrix decompositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatGeomError {
    /// A leading principal minor fell below the configured floor; the
    /// 1-based index of the minor is reported.
    NearSingularMinor { index: usize },
    /// The element is not in `H A N`; carries the first failing minor
    /// index (1-based).
    NotInHAN { index: usize },
    /// Matrix dimensions do not match the operation.
    DimensionMismatch,
}

impl core::fmt::Display for MatGeomError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MatGeomError::NearSingularMinor { index } => {
                write!(f, "principal minor {index} is numerically singular")
            }
            MatGeomError::NotInHAN { index } => {
                write!(f, "element is not in HAN (sign test fails at minor {index})")
            }
            MatGeomError::DimensionMismatch => write!(f, "matrix dimension mismatch"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MatGeomError {}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry accessor.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Entry mutator.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Matrix product.
    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Transpose.
    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                if f != 0.0 {
                    for c in col..n {
                        a[r * n + c] -= f * a[col * n + c];
                    }
                }
            }
        }
        det
    }

    /// Inverse of a unit upper-triangular matrix (back substitution).
    pub fn inv_unit_upper(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut inv = Mat::identity(n);
        // Solve U X = I column by column.
        for col in 0..n {
            for i in (0..n).rev() {
                let mut s = inv.get(i, col);
                for k in (i + 1)..n {
                    s -= self.get(i, k) * inv.get(k, col);
                }
                inv.set(i, col, s);
            }
        }
        inv
    }

    /// Matrix exponential by scaling and squaring with a Taylor core.
    pub fn exp(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let norm = self.max_abs() * n as f64;
        let mut squarings = 0u32;
        let mut scale = 1.0;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
            scale = 0.5f64.powi(squarings as i32);
        }
        let mut scaled = self.clone();
        for v in scaled.data.iter_mut() {
            *v *= scale;
        }
        let mut term = Mat::identity(n);
        let mut sum = Mat::identity(n);
        for k in 1..=20 {
            term = term.mul(&scaled);
            let inv_k = 1.0 / k as f64;
            for v in term.data.iter_mut() {
                *v *= inv_k;
            }
            for (s, t) in sum.data.iter_mut().zip(term.data.iter()) {
                *s += t;
            }
        }
        let mut out = sum;
        for _ in 0..squarings {
            out = out.mul(&out);
        }
        out
    }

    /// Nilpotent exponential: exact finite sum (for strictly triangular
    /// input).
    pub fn exp_nilpotent(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut term = Mat::identity(n);
        let mut sum = Mat::identity(n);
        for k in 1..n {
            term = term.mul(self);
            let inv_k = 1.0 / k as f64;
            for v in term.data.iter_mut() {
                *v *= inv_k;
            }
            for (s, t) in sum.data.iter_mut().zip(term.data.iter()) {
                *s += t;
            }
        }
        sum
    }
}

/// The `Sl(n, R)/SO(p, q)` matrix model (`n = p + q`, `p <= q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlModel {
    /// Matrix size.
    pub n: usize,
    /// Signature: `p` plus signs.
    pub p: usize,
    /// Signature: `q` minus signs.
    pub q: usize,
}

impl SlModel {
    /// Construct, checking `p + q = n`.
    pub fn new(n: usize, p: usize, q: usize) -> Self {
        assert_eq!(p + q, n, "SlModel requires p + q = n");
        SlModel { n, p, q }
    }

    /// Diagonal of `I_{p,q}`.
    pub fn signature(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.n];
        for v in s.iter_mut().skip(self.p) {
            *v = -1.0;
        }
        s
    }

    /// Dimension of `Omega` (number of `n^-` coordinates).
    pub fn omega_dim(&self) -> usize {
        self.p * self.q
    }

    /// Dimension of `n_0^-`.
    pub fn n0_dim(&self) -> usize {
        self.p * (self.p - 1) / 2 + self.q * (self.q - 1) / 2
    }

    /// Matrix slot `(row, col)` of the `k`-th `Omega` coordinate.
    ///
    /// Coordinates are enumerated row-major over the `q x p` matrix `X`:
    /// `k = i * p + j` corresponds to `X_{ij}`, i.e. matrix slot
    /// `(p + i, j)`.
    pub fn omega_slot(&self, k: usize) -> (usize, usize) {
        let i = k / self.p;
        let j = k % self.p;
        (self.p + i, j)
    }

    /// Matrix slot `(row, col)` of the `k`-th `n_0^-` coordinate.
    ///
    /// Coordinates enumerate the strictly lower triangles of the two
    /// diagonal blocks: first block rows `0..p`, then block rows `p..n`,
    /// each column-major within the block ((a, b) with a > b, ordered by b
    /// then a).
    pub fn n0_slot(&self, k: usize) -> (usize, usize) {
        let mut idx = k;
        // First block: pairs (a, b), 0 <= b < a < p.
        for b in 0..self.p {
            for a in (b + 1)..self.p {
                if idx == 0 {
                    return (a, b);
                }
                idx -= 1;
            }
        }
        for b in 0..self.q {
            for a in (b + 1)..self.q {
                if idx == 0 {
                    return (self.p + a, self.p + b);
                }
                idx -= 1;
            }
        }
        panic!("n0 coordinate index out of range");
    }

    /// Build the `n^-` matrix from `Omega` coordinates.
    pub fn nbar_matrix(&self, x: &[f64]) -> Mat {
        assert_eq!(x.len(), self.omega_dim());
        let mut m = Mat::zeros(self.n, self.n);
        for (k, &v) in x.iter().enumerate() {
            let (r, c) = self.omega_slot(k);
            m.set(r, c, v);
        }
        m
    }

    /// Build the `n_0^-` matrix from its coordinates.
    pub fn n0_matrix(&self, y: &[f64]) -> Mat {
        assert_eq!(y.len(), self.n0_dim());
        let mut m = Mat::zeros(self.n, self.n);
        for (k, &v) in y.iter().enumerate() {
            let (r, c) = self.n0_slot(k);
            m.set(r, c, v);
        }
        m
    }

    /// `exp(X) exp(Y)` with `X` from `Omega` coordinates and `Y` from
    /// `n_0^-` coordinates; the result is lower unitriangular.
    pub fn exp_nbar(&self, x: &[f64], y: &[f64]) -> Mat {
        let ex = self.nbar_matrix(x).exp_nilpotent();
        let ey = self.n0_matrix(y).exp_nilpotent();
        ex.mul(&ey)
    }

    /// Smallest eigenvalue of `1_p - X^T X` (membership margin of `Omega`).
    pub fn omega_margin(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.omega_dim());
        // S = 1_p - X^T X, a p x p symmetric matrix.
        let mut s = Mat::identity(self.p);
        for j1 in 0..self.p {
            for j2 in 0..self.p {
                let mut acc = 0.0;
                for i in 0..self.q {
                    acc += x[i * self.p + j1] * x[i * self.p + j2];
                }
                let v = s.get(j1, j2) - acc;
                s.set(j1, j2, v);
            }
        }
        let eigs = jacobi_eigenvalues(&s);
        eigs.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Whether `X` lies in `Omega` (strict membership).
    pub fn omega_membership(&self, x: &[f64]) -> bool {
        self.omega_margin(x) > 0.0
    }

    /// Zero all coordinates except the one at `Omega` slot `(i, j)`
    /// (the root-space projection `p_alpha`).
    pub fn project_root(&self, x: &[f64], i: usize, j: usize) -> Vec<f64> {
        assert!(i < self.q && j < self.p);
        let mut out = vec![0.0; x.len()];
        let k = i * self.p + j;
        out[k] = x[k];
        out
    }

    /// The slice `Omega ∩ R F_{ij}`: always the open interval
    /// `(-1, 1)`.
    pub fn slice_interval(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    /// Adjoint flow `e^{t ad Z}` on `Omega` coordinates for diagonal
    /// `Z = diag(z)`: the coordinate at slot `(p + i, j)` scales by
    /// `exp(t (z_{p+i} - z_j))`.
    pub fn adjoint_flow(&self, z: &[f64], t: f64, x: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        let mut out = x.to_vec();
        for (k, v) in out.iter_mut().enumerate() {
            let (r, c) = self.omega_slot(k);
            *v *= (t * (z[r] - z[c])).exp();
        }
        out
    }

    /// Conjugate an `nbar` coordinate pair by `exp(a_log)`:
    /// `a n a^{-1}` scales slot `(r, c)` by `exp(a_log_r - a_log_c)`.
    pub fn conjugate_coords(&self, a_log: &[f64], x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(a_log.len(), self.n);
        let mut xs = x.to_vec();
        for (k, v) in xs.iter_mut().enumerate() {
            let (r, c) = self.omega_slot(k);
            *v *= (a_log[r] - a_log[c]).exp();
        }
        let mut ys = y.to_vec();
        for (k, v) in ys.iter_mut().enumerate() {
            let (r, c) = self.n0_slot(k);
            *v *= (a_log[r] - a_log[c]).exp();
        }
        (xs, ys)
    }
}

/// Signed-minor `L D L^T` pivots of a symmetric matrix (no pivoting).
///
/// Returns the diagonal `d` of `W = L D L^T` with `L` unit lower
/// triangular, so the leading principal minors are `prod_{j<=k} d_j`.
/// Fails with the 1-based index when a running minor falls below `floor`.
fn ldl_pivots(w: &Mat, floor: f64) -> Result<(Vec<f64>, Mat), MatGeomError> {
    let n = w.rows();
    let mut a = w.clone();
    let mut l = Mat::identity(n);
    let mut d = vec![0.0; n];
    let mut minor = 1.0f64;
    for k in 0..n {
        let piv = a.get(k, k);
        minor *= piv;
        if minor.abs() < floor || piv == 0.0 {
            return Err(MatGeomError::NearSingularMinor { index: k + 1 });
        }
        d[k] = piv;
        for r in (k + 1)..n {
            let f = a.get(r, k) / piv;
            l.set(r, k, f);
            for c in k..n {
                let v = a.get(r, c) - f * a.get(k, c);
                a.set(r, c, v);
            }
        }
    }
    Ok((d, l))
}

/// Iwasawa `a`-part of `g` from the leading principal minors of `g^T g`:
/// `a_k^2 = Delta_k / Delta_{k-1}`.
pub fn iwasawa_a(g: &Mat, tol: &Tolerances) -> Result<Vec<f64>, MatGeomError> {
    let w = g.transpose().mul(g);
    let (d, _) = ldl_pivots(&w, tol.minor_floor)?;
    Ok(d.iter().map(|&v| v.sqrt()).collect())
}

/// Full `K A N` factorisation via Householder QR (the `a` part agrees with
/// [`iwasawa_a`]).
pub fn iwasawa_kan(g: &Mat, tol: &Tolerances) -> Result<(Mat, Vec<f64>, Mat), MatGeomError> {
    let n = g.rows();
    // Householder QR: g = Q R.
    let mut r = g.clone();
    let mut q = Mat::identity(n);
    for col in 0..n {
        let mut norm = 0.0;
        for i in col..n {
            norm += r.get(i, col) * r.get(i, col);
        }
        let norm = norm.sqrt();
        if norm < tol.minor_floor {
            return Err(MatGeomError::NearSingularMinor { index: col + 1 });
        }
        let alpha = if r.get(col, col) > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        v[col] = r.get(col, col) - alpha;
        for i in (col + 1)..n {
            v[i] = r.get(i, col);
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to R (left) and accumulate into Q.
        for c in 0..n {
            let mut dot = 0.0;
            for i in col..n {
                dot += v[i] * r.get(i, c);
            }
            let f = 2.0 * dot / vtv;
            for i in col..n {
                let val = r.get(i, c) - f * v[i];
                r.set(i, c, val);
            }
        }
        for c in 0..n {
            let mut dot = 0.0;
            for i in col..n {
                dot += v[i] * q.get(i, c);
            }
            let f = 2.0 * dot / vtv;
            for i in col..n {
                let val = q.get(i, c) - f * v[i];
                q.set(i, c, val);
            }
        }
    }
    // Now q (as accumulated) is Q^T: g = Q R with Q = q^T.
    // Fix signs so the diagonal of R is positive.
    let mut a = vec![0.0; n];
    for i in 0..n {
        let d = r.get(i, i);
        let s = if d < 0.0 { -1.0 } else { 1.0 };
        a[i] = d * s;
        if s < 0.0 {
            for c in 0..n {
                let val = -r.get(i, c);
                r.set(i, c, val);
                let qv = -q.get(i, c);
                q.set(i, c, qv);
            }
        }
    }
    // n-factor: a^{-1} R (unit upper).
    let mut nf = Mat::identity(n);
    for i in 0..n {
        for c in (i + 1)..n {
            nf.set(i, c, r.get(i, c) / a[i]);
        }
    }
    Ok((q.transpose(), a, nf))
}

/// The `a_H` part of the `H A N` decomposition, as `log a` (length `n`).
///
/// Forms `W = g^T I_{p,q} g`; `g` lies in `H A N` iff every signed minor
/// `det_k(W) det_k(I_{p,q})` is positive, and then
/// `a_k^2 = |d_k|` where `d_k` are the `L D L^T` pivots of `W`.
pub fn a_h_log(model: &SlModel, g: &Mat, tol: &Tolerances) -> Result<Vec<f64>, MatGeomError> {
    let n = model.n;
    let sig = model.signature();
    // W = g^T I g.
    let mut ig = g.clone();
    for i in 0..n {
        for j in 0..n {
            let v = ig.get(i, j) * sig[i];
            ig.set(i, j, v);
        }
    }
    let w = g.transpose().mul(&ig);
    let (d, _) = ldl_pivots(&w, tol.minor_floor)?;
    let mut log_a = vec![0.0; n];
    for k in 0..n {
        if d[k] * sig[k] <= 0.0 {
            return Err(MatGeomError::NotInHAN { index: k + 1 });
        }
        log_a[k] = 0.5 * d[k].abs().ln();
    }
    Ok(log_a)
}

/// Whether `g` lies in the open set `H A N`.
pub fn in_han(model: &SlModel, g: &Mat, tol: &Tolerances) -> bool {
    a_h_log(model, g, tol).is_ok()
}

/// The `h`-part of the `H A N` decomposition, with its `a` and `n`
/// factors: `g = h a n`.
pub fn h_h(
    model: &SlModel,
    g: &Mat,
    tol: &Tolerances,
) -> Result<(Mat, Vec<f64>, Mat), MatGeomError> {
    let n = model.n;
    let sig = model.signature();
    let mut ig = g.clone();
    for i in 0..n {
        for j in 0..n {
            let v = ig.get(i, j) * sig[i];
            ig.set(i, j, v);
        }
    }
    let w = g.transpose().mul(&ig);
    let (d, l) = ldl_pivots(&w, tol.minor_floor)?;
    let mut a = vec![0.0; n];
    for k in 0..n {
        if d[k] * sig[k] <= 0.0 {
            return Err(MatGeomError::NotInHAN { index: k + 1 });
        }
        a[k] = d[k].abs().sqrt();
    }
    // W = n^T (a^2 I_{p,q}) n with n = L^T unit upper.
    let nf = l.transpose();
    let n_inv = nf.inv_unit_upper();
    // h = g n^{-1} a^{-1}.
    let mut h = g.mul(&n_inv);
    for i in 0..n {
        for j in 0..n {
            let v = h.get(i, j) / a[j];
            h.set(i, j, v);
        }
    }
    Ok((h, a, nf))
}

/// Deviation of `h` from `SO(p, q)`: `max |h^T I_{p,q} h - I_{p,q}|`.
pub fn so_pq_defect(model: &SlModel, h: &Mat) -> f64 {
    let n = model.n;
    let sig = model.signature();
    let mut ih = h.clone();
    for i in 0..n {
        for j in 0..n {
            let v = ih.get(i, j) * sig[i];
            ih.set(i, j, v);
        }
    }
    let w = h.transpose().mul(&ih);
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { sig[i] } else { 0.0 };
            defect = defect.max((w.get(i, j) - expect).abs());
        }
    }
    defect
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(s: &Mat) -> Vec<f64> {
    assert_eq!(s.rows(), s.cols());
    let n = s.rows();
    if n == 1 {
        return vec![s.get(0, 0)];
    }
    let mut a = s.clone();
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a.get(i, j).abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = a.get(i, j);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a.get(i, i);
                let aqq = a.get(j, j);
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let aik = a.get(i, k);
                    let ajk = a.get(j, k);
                    a.set(i, k, c * aik - sn * ajk);
                    a.set(j, k, sn * aik + c * ajk);
                }
                for k in 0..n {
                    let aki = a.get(k, i);
                    let akj = a.get(k, j);
                    a.set(k, i, c * aki - sn * akj);
                    a.set(k, j, sn * aki + c * akj);
                }
            }
        }
    }
    (0..n).map(|i| a.get(i, i)).collect()
}

/// Ball model membership margin: `1 - |x|^2`.
pub fn ball_margin(x: &[f64]) -> f64 {
    1.0 - x.iter().map(|v| v * v).sum::<f64>()
}

/// Seeded sampler: a point of `Omega` by rejection from the coordinate
/// cube.
pub fn sample_omega(model: &SlModel, rng: &mut impl RngCore) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..model.omega_dim())
            .map(|_| 2.0 * unit_f64(rng) - 1.0)
            .collect();
        if model.omega_membership(&x) {
            return x;
        }
    }
}

/// Seeded sampler: a point of the coordinate cube *outside* `Omega`
/// (used for the complementary membership test).
pub fn sample_outside_omega(model: &SlModel, rng: &mut impl RngCore) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..model.omega_dim())
            .map(|_| 2.0 * unit_f64(rng) - 1.0)
            .collect();
        if !model.omega_membership(&x) {
            return x;
        }
    }
}

/// Seeded sampler: `n_0^-` coordinates (moderate Gaussian-free spread).
pub fn sample_n0(model: &SlModel, rng: &mut impl RngCore) -> Vec<f64> {
    (0..model.n0_dim())
        .map(|_| 4.0 * unit_f64(rng) - 2.0)
        .collect()
}

/// Seeded sampler: an element of `SO(p, q)` as `exp` of a Lie algebra
/// element `[[A, B^T], [B, D]]` with `A`, `D` antisymmetric.
pub fn sample_so_pq(model: &SlModel, rng: &mut impl RngCore) -> Mat {
    let n = model.n;
    let p = model.p;
    let mut m = Mat::zeros(n, n);
    // A block (antisymmetric p x p).
    for i in 0..p {
        for j in (i + 1)..p {
            let v = unit_f64(rng) - 0.5;
            m.set(i, j, v);
            m.set(j, i, -v);
        }
    }
    // D block (antisymmetric q x q).
    for i in p..n {
        for j in (i + 1)..n {
            let v = unit_f64(rng) - 0.5;
            m.set(i, j, v);
            m.set(j, i, -v);
        }
    }
    // B block (q x p, unconstrained; B^T mirrored).
    for i in p..n {
        for j in 0..p {
            let v = unit_f64(rng) - 0.5;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m.exp()
}

/// Seeded sampler: unit upper-triangular `N` element.
pub fn sample_upper_n(n: usize, rng: &mut impl RngCore) -> Mat {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            m.set(i, j, unit_f64(rng) - 0.5);
        }
    }
    m.exp_nilpotent()
}

/// Seeded sampler: positive diagonal `A` element with determinant 1.
pub fn sample_pos_diag(n: usize, rng: &mut impl RngCore) -> Vec<f64> {
    let mut logs: Vec<f64> = (0..n).map(|_| unit_f64(rng) - 0.5).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    for l in logs.iter_mut() {
        *l -= mean;
    }
    logs.iter().map(|l| l.exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::chunk_rng;
    use alloc::vec;

    fn mul_diag(g: &Mat, a: &[f64]) -> Mat {
        let mut out = g.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                let v = out.get(i, j) * a[j];
                out.set(i, j, v);
            }
        }
        out
    }

    fn diag_mul(a: &[f64], g: &Mat) -> Mat {
        let mut out = g.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                let v = out.get(i, j) * a[i];
                out.set(i, j, v);
            }
        }
        out
    }

    #[test]
    fn slot_layout_examples() {
        let m312 = SlModel::new(3, 1, 2);
        assert_eq!(m312.omega_dim(), 2);
        assert_eq!(m312.n0_dim(), 1);
        assert_eq!(m312.omega_slot(0), (1, 0));
        assert_eq!(m312.omega_slot(1), (2, 0));
        assert_eq!(m312.n0_slot(0), (2, 1));
        let m422 = SlModel::new(4, 2, 2);
        assert_eq!(m422.omega_dim(), 4);
        assert_eq!(m422.n0_dim(), 2);
        assert_eq!(m422.omega_slot(0), (2, 0));
        assert_eq!(m422.omega_slot(1), (2, 1));
        assert_eq!(m422.omega_slot(3), (3, 1));
        assert_eq!(m422.n0_slot(0), (1, 0));
        assert_eq!(m422.n0_slot(1), (3, 2));
    }

    #[test]
    fn iwasawa_a_of_lower_unipotent() {
        // For nbar_y in SL(2), a(nbar_y) = (sqrt(1+y^2), 1/sqrt(1+y^2)).
        let tol = Tolerances::default();
        for &y in &[-3.0, -0.5, 0.0, 0.25, 2.0] {
            let mut g = Mat::identity(2);
            g.set(1, 0, y);
            let a = iwasawa_a(&g, &tol).unwrap();
            let expect = (1.0 + y * y).sqrt();
            assert!((a[0] - expect).abs() < 1e-14);
            assert!((a[1] - 1.0 / expect).abs() < 1e-14);
        }
    }

    #[test]
    fn iwasawa_kan_round_trip() {
        let tol = Tolerances::default();
        let mut rng = chunk_rng(11, 0);
        for n in 2..=4usize {
            for _ in 0..20 {
                let mut g = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        g.set(i, j, 2.0 * crate::quad::unit_f64(&mut rng) - 1.0);
                    }
                }
                if g.det().abs() < 1e-2 {
                    continue;
                }
                let (k, a, nf) = iwasawa_kan(&g, &tol).unwrap();
                // k is orthogonal, a positive, n unit upper.
                let ktk = k.transpose().mul(&k).sub(&Mat::identity(n));
                assert!(ktk.max_abs() < 1e-10);
                assert!(a.iter().all(|&v| v > 0.0));
                for i in 0..n {
                    assert_eq!(nf.get(i, i), 1.0);
                    for j in 0..i {
                        assert_eq!(nf.get(i, j), 0.0);
                    }
                }
                let recon = k.mul(&mul_diag(&Mat::identity(n), &a)).mul(&nf);
                let scale = g.max_abs().max(1.0);
                assert!(recon.sub(&g).max_abs() < 1e-8 * scale);
                // The a-part agrees with the minor-ratio formula.
                let a2 = iwasawa_a(&g, &tol).unwrap();
                for i in 0..n {
                    assert!((a[i] - a2[i]).abs() < 1e-10 * a[i].max(1.0));
                }
            }
        }
    }

    #[test]
    fn a_h_log_sl2_example() {
        // a_H(nbar_y) = (sqrt(1-y^2), 1/sqrt(1-y^2)) inside Omega.
        let model = SlModel::new(2, 1, 1);
        let tol = Tolerances::default();
        for &y in &[-0.9, -0.3, 0.0, 0.5, 0.99] {
            let g = model.exp_nbar(&[y], &[]);
            let la = a_h_log(&model, &g, &tol).unwrap();
            let expect = 0.5 * (1.0 - y * y).ln();
            assert!((la[0] - expect).abs() < 1e-13);
            assert!((la[1] + expect).abs() < 1e-13);
        }
        // |y| >= 1 leaves HAN; the first signed minor fails.
        let g = model.exp_nbar(&[1.2], &[]);
        assert_eq!(
            a_h_log(&model, &g, &tol),
            Err(MatGeomError::NotInHAN { index: 1 })
        );
        assert!(!in_han(&model, &g, &tol));
    }

    #[test]
    fn a_h_log_vanishes_on_h() {
        let model = SlModel::new(3, 1, 2);
        let tol = Tolerances::default();
        let mut rng = chunk_rng(12, 0);
        for _ in 0..20 {
            let h = sample_so_pq(&model, &mut rng);
            assert!(so_pq_defect(&model, &h) < 1e-10);
            let la = a_h_log(&model, &h, &tol).unwrap();
            for v in la {
                assert!(v.abs() < 1e-10, "a_H not trivial on H: {v}");
            }
        }
    }

    #[test]
    fn h_h_factorisation() {
        let model = SlModel::new(3, 1, 2);
        let tol = Tolerances::default();
        let mut rng = chunk_rng(13, 0);
        for _ in 0..20 {
            let x = sample_omega(&model, &mut rng);
            let y = sample_n0(&model, &mut rng);
            let g = model.exp_nbar(&x, &y);
            let (h, a, nf) = h_h(&model, &g, &tol).unwrap();
            assert!(so_pq_defect(&model, &h) < 1e-8);
            let han = h.mul(&mul_diag(&Mat::identity(3), &a)).mul(&nf);
            assert!(han.sub(&g).max_abs() < 1e-8 * g.max_abs().max(1.0));
            // log a agrees with a_h_log.
            let la = a_h_log(&model, &g, &tol).unwrap();
            for i in 0..3 {
                assert!((a[i].ln() - la[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn omega_membership_examples() {
        let model = SlModel::new(3, 1, 2);
        assert!(model.omega_membership(&[0.6, 0.7]));
        assert!(!model.omega_membership(&[0.8, 0.8]));
        assert_eq!(model.slice_interval(), (-1.0, 1.0));
        // Membership forces every coordinate into the slice interval.
        let m422 = SlModel::new(4, 2, 2);
        let mut rng = chunk_rng(14, 0);
        for _ in 0..50 {
            let x = sample_omega(&m422, &mut rng);
            assert!(x.iter().all(|&v| v.abs() < 1.0));
        }
    }

    #[test]
    fn root_projections_preserve_omega() {
        let model = SlModel::new(4, 2, 2);
        let mut rng = chunk_rng(15, 0);
        for _ in 0..100 {
            let x = sample_omega(&model, &mut rng);
            for i in 0..model.q {
                for j in 0..model.p {
                    let px = model.project_root(&x, i, j);
                    assert!(model.omega_membership(&px));
                }
            }
        }
    }

    #[test]
    fn exp_nbar_is_lower_unitriangular() {
        let mut rng = chunk_rng(16, 0);
        for (n, p) in [(3usize, 1usize), (4, 2), (5, 2)] {
            let model = SlModel::new(n, p, n - p);
            let x = sample_omega(&model, &mut rng);
            let y = sample_n0(&model, &mut rng);
            let g = model.exp_nbar(&x, &y);
            for i in 0..n {
                assert_eq!(g.get(i, i), 1.0);
                for j in (i + 1)..n {
                    assert_eq!(g.get(i, j), 0.0);
                }
            }
            assert!((g.det() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn a_h_is_a_cocycle_under_h_and_n() {
        // a_H(h g n) = a_H(g), and right A-translation shifts the log.
        let model = SlModel::new(3, 1, 2);
        let tol = Tolerances::default();
        let mut rng = chunk_rng(17, 0);
        for _ in 0..25 {
            let x = sample_omega(&model, &mut rng);
            let y = sample_n0(&model, &mut rng);
            let g = model.exp_nbar(&x, &y);
            let la = a_h_log(&model, &g, &tol).unwrap();
            let h = sample_so_pq(&model, &mut rng);
            let nf = sample_upper_n(3, &mut rng);
            let moved = h.mul(&g).mul(&nf);
            let la2 = a_h_log(&model, &moved, &tol).unwrap();
            for i in 0..3 {
                assert!((la[i] - la2[i]).abs() < 1e-8, "cocycle broken at {i}");
            }
            let a = sample_pos_diag(3, &mut rng);
            let shifted = mul_diag(&g, &a);
            let la3 = a_h_log(&model, &shifted, &tol).unwrap();
            for i in 0..3 {
                assert!((la3[i] - (la[i] + a[i].ln())).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn a_h_matches_iwasawa_on_n0() {
        let tol = Tolerances::default();
        let mut rng = chunk_rng(18, 0);
        for (n, p) in [(3usize, 1usize), (4, 2)] {
            let model = SlModel::new(n, p, n - p);
            for _ in 0..25 {
                let y = sample_n0(&model, &mut rng);
                let g = model.exp_nbar(&vec![0.0; model.omega_dim()], &y);
                let la = a_h_log(&model, &g, &tol).unwrap();
                let a = iwasawa_a(&g, &tol).unwrap();
                for i in 0..n {
                    assert!((la[i] - a[i].ln()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn adjoint_flow_contracts_omega() {
        let model = SlModel::new(3, 1, 2);
        // Flow along the grading element T0 = (2/3, -1/3, -1/3).
        let z = [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
        let x = [0.6, 0.7];
        let m0 = model.omega_margin(&x);
        let mut last = m0;
        for &t in &[0.5, 1.0, 2.0] {
            let xt = model.adjoint_flow(&z, t, &x);
            assert!(model.omega_membership(&xt));
            let m = model.omega_margin(&xt);
            assert!(m > last, "margin must grow along the contraction");
            last = m;
        }
        // Every Omega coordinate sits at a slot (p+i, j), so the rate is
        // exp(-t) uniformly for this z.
        let xt = model.adjoint_flow(&z, 1.0, &x);
        for (v, v0) in xt.iter().zip(x.iter()) {
            assert!((v - v0 * (-1.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn han_contains_omega_n0_and_excludes_the_complement() {
        let model = SlModel::new(4, 2, 2);
        let tol = Tolerances::default();
        let mut rng = chunk_rng(19, 0);
        for _ in 0..100 {
            let x = sample_omega(&model, &mut rng);
            let y = sample_n0(&model, &mut rng);
            assert!(in_han(&model, &model.exp_nbar(&x, &y), &tol));
        }
        for _ in 0..100 {
            let x = sample_outside_omega(&model, &mut rng);
            let y = sample_n0(&model, &mut rng);
            assert!(!in_han(&model, &model.exp_nbar(&x, &y), &tol));
        }
    }

    #[test]
    fn conjugate_coords_matches_matrix_conjugation() {
        let mut rng = chunk_rng(20, 0);
        for (n, p) in [(3usize, 1usize), (4, 2)] {
            let model = SlModel::new(n, p, n - p);
            for _ in 0..10 {
                let x = sample_omega(&model, &mut rng);
                let y = sample_n0(&model, &mut rng);
                let a_log = {
                    let mut l: Vec<f64> =
                        (0..n).map(|_| crate::quad::unit_f64(&mut rng) - 0.5).collect();
                    let mean = l.iter().sum::<f64>() / n as f64;
                    l.iter_mut().for_each(|v| *v -= mean);
                    l
                };
                let (xc, yc) = model.conjugate_coords(&a_log, &x, &y);
                let a: Vec<f64> = a_log.iter().map(|v| v.exp()).collect();
                let ainv: Vec<f64> = a_log.iter().map(|v| (-v).exp()).collect();
                let lhs = model.exp_nbar(&xc, &yc);
                let rhs = mul_diag(&diag_mul(&a, &model.exp_nbar(&x, &y)), &ainv);
                assert!(lhs.sub(&rhs).max_abs() < 1e-12 * rhs.max_abs().max(1.0));
            }
        }
    }
}
