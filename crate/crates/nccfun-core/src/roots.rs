//! Exact restricted root system data with the causal grading.
//!
//! Everything structural here (root coordinates, coroots, Weyl matrices,
//! cone membership) is computed in exact rational arithmetic so that root
//! classification can never drift; complex floating point enters only when a
//! spectral parameter is paired against the data.
//!
//! Conventions: the ambient coordinate space carries `a*`; a root `alpha` is
//! a rational coordinate vector, and its value on a vector `v` of `a` (also
//! held in ambient coordinates) is the plain dot product `alpha . v`.  The
//! Gram matrix describes the inner product of `a`, so the induced product on
//! `a*` is `(alpha, beta) = alpha^T G^{-1} beta` and the coroot solves
//! `G X = alpha`, `H_alpha = 2 X / (alpha, alpha)`, which makes
//! `alpha(H_alpha) = 2` an exact identity.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;

/// Exact scalar used for all root data.
pub type Rat = Ratio<i128>;

/// Errors raised by root-datum construction and queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootError {
    /// The datum violates a structural invariant; the message names it.
    MalformedDatum(String),
    /// A vector was passed as a root but is not one of the datum's roots.
    NotARoot,
    /// Vector length does not match the ambient dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Weyl group generation exceeded the configured order bound.
    GroupTooLarge { bound: usize },
}

impl core::fmt::Display for RootError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RootError::MalformedDatum(msg) => write!(f, "malformed root datum: {msg}"),
            RootError::NotARoot => write!(f, "vector is not a root of this datum"),
            RootError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            RootError::GroupTooLarge { bound } => {
                write!(f, "Weyl group order exceeds bound {bound}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RootError {}

/// One restricted root together with its derived data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootEntry {
    /// Coordinates of the root in the ambient basis of `a*`.
    pub coords: Vec<Rat>,
    /// Dimension of the root space, `m_alpha`.
    pub multiplicity: u32,
    /// Value of the root on the grading element: -1, 0 or +1.
    pub grade: i8,
    /// Whether the root belongs to the chosen positive system.
    pub is_positive: bool,
    /// Coroot `H_alpha`, normalised so that `alpha(H_alpha) = 2`.
    pub coroot: Vec<Rat>,
    /// Squared length `(alpha, alpha)` in the Gram-dual inner product.
    pub norm_sq: Rat,
    /// For positive roots: coordinates over the simple basis (all entries
    /// are nonnegative integers).  `None` for negative roots.
    pub simple_coords: Option<Vec<u32>>,
}

impl RootEntry {
    /// Height of a positive root: the sum of its simple coordinates.
    pub fn height(&self) -> Option<u32> {
        self.simple_coords.as_ref().map(|c| c.iter().sum())
    }
}

/// How spectral parameters are normalised to a canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonicalization {
    /// Coordinates are already canonical; nothing is changed.
    Identity,
    /// Subtract the coordinate mean (type-A data, where roots kill the
    /// all-ones direction).
    SumZero,
}

/// Partition of the root set by sign and grade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// Indices of positive noncompact roots (grade +1).
    pub n_plus: Vec<usize>,
    /// Indices of negative noncompact roots (grade -1).
    pub n_minus: Vec<usize>,
    /// Indices of positive compact roots (grade 0, positive).
    pub zero_plus: Vec<usize>,
    /// Indices of negative compact roots (grade 0, negative).
    pub zero_minus: Vec<usize>,
}

/// Which block of the positive system a half-sum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSubset {
    /// All positive roots (gives `rho`).
    Full,
    /// Compact positive roots `Delta_0^+` (gives `rho_0`).
    Compact,
    /// Noncompact positive roots `Delta_n^+` (gives `rho_+`).
    Noncompact,
}

/// Exact membership flags for the maximal cone and the Weyl chamber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeLocation {
    /// `alpha(X) >= 0` for every noncompact positive root.
    pub in_c_max: bool,
    /// `alpha(X) > 0` for every noncompact positive root.
    pub in_c_max_interior: bool,
    /// `alpha(X) > 0` for every positive root (log of the chamber `A^+`).
    pub in_a_plus: bool,
    /// Indices of noncompact positive roots with `alpha(X) = 0` exactly.
    pub vanishing_noncompact: Vec<usize>,
    /// Indices of compact positive roots with `alpha(X) = 0` exactly.
    pub vanishing_compact: Vec<usize>,
}

/// An element of the little Weyl group as an exact matrix on `a*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeylElement {
    dim: usize,
    /// Row-major matrix acting on `a*` coordinates.
    matrix: Vec<Rat>,
}

impl WeylElement {
    /// Identity element.
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![Rat::zero(); dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = Rat::from_integer(1);
        }
        WeylElement { dim, matrix }
    }

    /// Reflection in the root `alpha` (with coroot `h`):
    /// `s(lambda) = lambda - lambda(H_alpha) alpha`.
    pub fn reflection(alpha: &[Rat], coroot: &[Rat]) -> Self {
        let dim = alpha.len();
        let mut w = WeylElement::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                w.matrix[i * dim + j] -= alpha[i] * coroot[j];
            }
        }
        w
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether this is the identity element.
    pub fn is_identity(&self) -> bool {
        *self == WeylElement::identity(self.dim)
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &WeylElement) -> Self {
        let n = self.dim;
        let mut matrix = vec![Rat::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.matrix[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    matrix[i * n + j] += a * other.matrix[k * n + j];
                }
            }
        }
        WeylElement { dim: n, matrix }
    }

    /// Action on exact `a*` vectors (roots, weights).
    pub fn act_rat(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.dim;
        let mut out = vec![Rat::zero(); n];
        for i in 0..n {
            for j in 0..n {
                out[i] += self.matrix[i * n + j] * v[j];
            }
        }
        out
    }

    /// Action on complex `a*` vectors (spectral parameters).
    pub fn act_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                let c = rat_to_f64(self.matrix[i * n + j]);
                if c != 0.0 {
                    out[i] += v[j] * c;
                }
            }
        }
        out
    }

    /// Contragredient action on vectors of `a` (e.g. the grading element):
    /// the transpose matrix, so that pairings are preserved.
    pub fn act_on_a(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.dim;
        let mut out = vec![Rat::zero(); n];
        for j in 0..n {
            for i in 0..n {
                out[j] += self.matrix[i * n + j] * v[i];
            }
        }
        out
    }
}

/// A complex spectral parameter in canonical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParameter {
    coords: Vec<Complex64>,
}

impl SpectralParameter {
    /// Canonicalise raw coordinates for the given datum.
    pub fn new(datum: &RootDatum, coords: &[Complex64]) -> Result<Self, RootError> {
        if coords.len() != datum.ambient_dim {
            return Err(RootError::DimensionMismatch {
                expected: datum.ambient_dim,
                got: coords.len(),
            });
        }
        let mut coords = coords.to_vec();
        if datum.canonicalization == Canonicalization::SumZero {
            let n = coords.len() as f64;
            // Subtract the mean to a bitwise fixpoint so canonicalization
            // is exactly idempotent (one pass leaves a ~1 ulp residual
            // mean; re-subtracting that residual is a no-op within a few
            // rounds).  The cap guards non-finite inputs.
            for _ in 0..8 {
                let mean = coords.iter().sum::<Complex64>() / n;
                let next: Vec<Complex64> = coords.iter().map(|c| c - mean).collect();
                if next == coords {
                    break;
                }
                coords = next;
            }
        }
        Ok(SpectralParameter { coords })
    }

    /// Convenience constructor from real coordinates.
    pub fn from_real(datum: &RootDatum, coords: &[f64]) -> Result<Self, RootError> {
        let complex: Vec<Complex64> = coords.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        SpectralParameter::new(datum, &complex)
    }

    /// Canonical coordinates.
    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Pairing with an exact vector of `a` (plain dot product).
    pub fn pair_rat(&self, v: &[Rat]) -> Result<Complex64, RootError> {
        if v.len() != self.coords.len() {
            return Err(RootError::DimensionMismatch {
                expected: self.coords.len(),
                got: v.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, r) in self.coords.iter().zip(v.iter()) {
            acc += c * rat_to_f64(*r);
        }
        Ok(acc)
    }

    /// Pairing with a floating-point vector of `a` (e.g. `log a`).
    pub fn pair_f64(&self, v: &[f64]) -> Result<Complex64, RootError> {
        if v.len() != self.coords.len() {
            return Err(RootError::DimensionMismatch {
                expected: self.coords.len(),
                got: v.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, x) in self.coords.iter().zip(v.iter()) {
            acc += c * *x;
        }
        Ok(acc)
    }
}

/// A restricted root system with causal grading, in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct RootDatum {
    ambient_dim: usize,
    gram: Vec<Rat>,
    t0: Vec<Rat>,
    roots: Vec<RootEntry>,
    simple_indices: Vec<usize>,
    canonicalization: Canonicalization,
}

impl RootDatum {
    /// Build a datum from its positive system.
    ///
    /// `positives` lists each positive root once with its multiplicity; the
    /// negatives are generated automatically.  Construction validates every
    /// structural invariant (grades in {-1, 0, +1} with the positive system
    /// containing all of `Delta_n^+`, reduced compact part, positive root
    /// lengths, simple generation of the positive system) and precomputes
    /// coroots and simple coordinates.
    pub fn new(
        ambient_dim: usize,
        gram: Vec<Vec<Rat>>,
        t0: Vec<Rat>,
        positives: &[(Vec<Rat>, u32)],
        canonicalization: Canonicalization,
    ) -> Result<Self, RootError> {
        if gram.len() != ambient_dim || gram.iter().any(|row| row.len() != ambient_dim) {
            return Err(RootError::MalformedDatum(String::from(
                "gram: matrix shape does not match ambient dimension",
            )));
        }
        if t0.len() != ambient_dim {
            return Err(RootError::MalformedDatum(String::from(
                "grading: vector length does not match ambient dimension",
            )));
        }
        for i in 0..ambient_dim {
            for j in 0..ambient_dim {
                if gram[i][j] != gram[j][i] {
                    return Err(RootError::MalformedDatum(String::from(
                        "gram: matrix is not symmetric",
                    )));
                }
            }
        }
        if positives.is_empty() {
            return Err(RootError::MalformedDatum(String::from(
                "roots: datum has no roots",
            )));
        }

        let mut flat_gram = vec![Rat::zero(); ambient_dim * ambient_dim];
        for i in 0..ambient_dim {
            for j in 0..ambient_dim {
                flat_gram[i * ambient_dim + j] = gram[i][j];
            }
        }

        let mut pos_coords: Vec<Vec<Rat>> = Vec::with_capacity(positives.len());
        let mut pos_mults: Vec<u32> = Vec::with_capacity(positives.len());
        for (coords, mult) in positives {
            if coords.len() != ambient_dim {
                return Err(RootError::DimensionMismatch {
                    expected: ambient_dim,
                    got: coords.len(),
                });
            }
            if coords.iter().all(|c| c.is_zero()) {
                return Err(RootError::MalformedDatum(String::from(
                    "roots: zero vector listed as a root",
                )));
            }
            if *mult == 0 {
                return Err(RootError::MalformedDatum(String::from(
                    "roots: multiplicity must be positive",
                )));
            }
            if pos_coords.iter().any(|c| c == coords) {
                return Err(RootError::MalformedDatum(String::from(
                    "roots: duplicate root in positive system",
                )));
            }
            let negated: Vec<Rat> = coords.iter().map(|c| -*c).collect();
            if pos_coords.iter().any(|c| *c == negated) {
                return Err(RootError::MalformedDatum(String::from(
                    "roots: positive system contains a root and its negative",
                )));
            }
            pos_coords.push(coords.clone());
            pos_mults.push(*mult);
        }

        // Reject a non-reduced compact part: 2*alpha with alpha compact.
        for a in &pos_coords {
            let grade_a = dot_rat(a, &t0);
            if grade_a.is_zero() {
                let doubled: Vec<Rat> = a.iter().map(|c| *c * Rat::from_integer(2)).collect();
                if pos_coords.iter().any(|c| *c == doubled) {
                    return Err(RootError::MalformedDatum(String::from(
                        "non-reduced compact part: alpha and 2*alpha are both compact roots (BC-type Delta_0 is not supported)",
                    )));
                }
            }
        }

        let mut roots: Vec<RootEntry> = Vec::with_capacity(2 * pos_coords.len());
        for (coords, mult) in pos_coords.iter().zip(pos_mults.iter()) {
            let grade_val = dot_rat(coords, &t0);
            let grade = rat_grade(grade_val).ok_or_else(|| {
                RootError::MalformedDatum(String::from(
                    "grading: root value on the grading element is not in {-1, 0, +1}",
                ))
            })?;
            if grade < 0 {
                return Err(RootError::MalformedDatum(String::from(
                    "grading: positive system must contain all of Delta_n^+ (found a positive root of grade -1)",
                )));
            }
            let solved = rat_solve(&flat_gram, ambient_dim, coords).ok_or_else(|| {
                RootError::MalformedDatum(String::from(
                    "gram: root is outside the regular span of the gram matrix",
                ))
            })?;
            let norm_sq = dot_rat(coords, &solved);
            if norm_sq <= Rat::zero() {
                return Err(RootError::MalformedDatum(String::from(
                    "roots: root has nonpositive squared length",
                )));
            }
            let two_over = Rat::from_integer(2) / norm_sq;
            let coroot: Vec<Rat> = solved.iter().map(|x| *x * two_over).collect();
            debug_assert_eq!(dot_rat(coords, &coroot), Rat::from_integer(2));
            roots.push(RootEntry {
                coords: coords.clone(),
                multiplicity: *mult,
                grade,
                is_positive: true,
                coroot,
                norm_sq,
                simple_coords: None,
            });
        }
        let n_pos = roots.len();
        for k in 0..n_pos {
            let pos = &roots[k];
            let entry = RootEntry {
                coords: pos.coords.iter().map(|c| -*c).collect(),
                multiplicity: pos.multiplicity,
                grade: -pos.grade,
                is_positive: false,
                coroot: pos.coroot.iter().map(|c| -*c).collect(),
                norm_sq: pos.norm_sq,
                simple_coords: None,
            };
            roots.push(entry);
        }

        // Simple roots: indecomposable positives.
        let mut simple_indices: Vec<usize> = Vec::new();
        for i in 0..n_pos {
            let alpha = &roots[i].coords;
            let mut decomposable = false;
            for j in 0..n_pos {
                if j == i {
                    continue;
                }
                let diff: Vec<Rat> = alpha
                    .iter()
                    .zip(roots[j].coords.iter())
                    .map(|(a, b)| *a - *b)
                    .collect();
                if roots[..n_pos].iter().any(|r| r.coords == diff) {
                    decomposable = true;
                    break;
                }
            }
            if !decomposable {
                simple_indices.push(i);
            }
        }
        if simple_indices.is_empty() {
            return Err(RootError::MalformedDatum(String::from(
                "simple system: positive system has no indecomposable roots",
            )));
        }

        // Express each positive root over the simple basis with nonnegative
        // integer coordinates.
        let simple_mat: Vec<Vec<Rat>> = simple_indices
            .iter()
            .map(|&i| roots[i].coords.clone())
            .collect();
        for i in 0..n_pos {
            let target = roots[i].coords.clone();
            let coeffs =
                rat_solve_columns(&simple_mat, ambient_dim, &target).ok_or_else(|| {
                    RootError::MalformedDatum(String::from(
                        "simple system: positive root is not a rational combination of the simple roots",
                    ))
                })?;
            let mut nat_coords: Vec<u32> = Vec::with_capacity(coeffs.len());
            for c in &coeffs {
                if !c.is_integer() || *c < Rat::zero() {
                    return Err(RootError::MalformedDatum(String::from(
                        "simple system: positive root is not a nonnegative integer combination of the simple roots",
                    )));
                }
                let v = c.to_integer();
                if v < 0 || v > u32::MAX as i128 {
                    return Err(RootError::MalformedDatum(String::from(
                        "simple system: simple-root coordinate out of range",
                    )));
                }
                nat_coords.push(v as u32);
            }
            roots[i].simple_coords = Some(nat_coords);
        }

        Ok(RootDatum {
            ambient_dim,
            gram: flat_gram,
            t0,
            roots,
            simple_indices,
            canonicalization,
        })
    }

    /// Ambient coordinate dimension.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// All roots; positives come first, in construction order, followed by
    /// their negatives in the same order.
    pub fn roots(&self) -> &[RootEntry] {
        &self.roots
    }

    /// Number of positive roots.
    pub fn num_positive(&self) -> usize {
        self.roots.len() / 2
    }

    /// The grading element `T_0` in ambient `a` coordinates.
    pub fn grading_vector(&self) -> &[Rat] {
        &self.t0
    }

    /// The Gram matrix of `a` (row-major).
    pub fn gram(&self) -> &[Rat] {
        &self.gram
    }

    /// Canonicalization convention for spectral parameters.
    pub fn canonicalization(&self) -> Canonicalization {
        self.canonicalization
    }

    /// Indices (into `roots()`) of the simple roots.
    pub fn simple_indices(&self) -> &[usize] {
        &self.simple_indices
    }

    /// Indices of all positive roots.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.num_positive()).collect()
    }

    /// Indices of positive roots in the requested block.
    pub fn block_indices(&self, subset: RootSubset) -> Vec<usize> {
        (0..self.num_positive())
            .filter(|&i| match subset {
                RootSubset::Full => true,
                RootSubset::Compact => self.roots[i].grade == 0,
                RootSubset::Noncompact => self.roots[i].grade == 1,
            })
            .collect()
    }

    /// Partition the full root set by sign and grade.
    pub fn classify(&self) -> Classification {
        let mut c = Classification {
            n_plus: Vec::new(),
            n_minus: Vec::new(),
            zero_plus: Vec::new(),
            zero_minus: Vec::new(),
        };
        for (i, r) in self.roots.iter().enumerate() {
            match (r.grade, r.is_positive) {
                (1, _) => c.n_plus.push(i),
                (-1, _) => c.n_minus.push(i),
                (0, true) => c.zero_plus.push(i),
                (0, false) => c.zero_minus.push(i),
                _ => unreachable!("grades validated at construction"),
            }
        }
        c
    }

    /// Find a root by exact coordinates.
    pub fn index_of_root(&self, coords: &[Rat]) -> Option<usize> {
        self.roots.iter().position(|r| r.coords == coords)
    }

    /// Coroot of a root given by exact coordinates.
    pub fn coroot(&self, coords: &[Rat]) -> Result<&[Rat], RootError> {
        if coords.len() != self.ambient_dim {
            return Err(RootError::DimensionMismatch {
                expected: self.ambient_dim,
                got: coords.len(),
            });
        }
        match self.index_of_root(coords) {
            Some(i) => Ok(&self.roots[i].coroot),
            None => Err(RootError::NotARoot),
        }
    }

    /// Half multiplicity-weighted sum over the selected positive block
    /// (`rho`, `rho_0` or `rho_+`).
    pub fn rho(&self, subset: RootSubset) -> Vec<Rat> {
        let mut acc = vec![Rat::zero(); self.ambient_dim];
        for &i in &self.block_indices(subset) {
            let r = &self.roots[i];
            let m = Rat::from_integer(r.multiplicity as i128);
            for (a, c) in acc.iter_mut().zip(r.coords.iter()) {
                *a += m * *c;
            }
        }
        let half = Rat::new(1, 2);
        for a in acc.iter_mut() {
            *a *= half;
        }
        acc
    }

    /// `rho` as floating-point coordinates.
    pub fn rho_f64(&self, subset: RootSubset) -> Vec<f64> {
        self.rho(subset).iter().map(|r| rat_to_f64(*r)).collect()
    }

    /// Pairing of an exact `a*` vector with an exact `a` vector.
    pub fn pair_rat(&self, mu: &[Rat], v: &[Rat]) -> Result<Rat, RootError> {
        if mu.len() != self.ambient_dim || v.len() != self.ambient_dim {
            return Err(RootError::DimensionMismatch {
                expected: self.ambient_dim,
                got: if mu.len() != self.ambient_dim {
                    mu.len()
                } else {
                    v.len()
                },
            });
        }
        Ok(dot_rat(mu, v))
    }

    /// Value of the root at index `i` on a floating-point `a` vector.
    pub fn root_value_f64(&self, i: usize, v: &[f64]) -> f64 {
        self.roots[i]
            .coords
            .iter()
            .zip(v.iter())
            .map(|(c, x)| rat_to_f64(*c) * x)
            .sum()
    }

    /// The little Weyl group with the default order bound of 10!.
    pub fn little_weyl_group(&self) -> Result<Vec<WeylElement>, RootError> {
        self.little_weyl_group_with_bound(3_628_800)
    }

    /// The reflection group of the compact root block `Delta_0`, generated
    /// by breadth-first closure.  The identity is the first element and the
    /// enumeration order is deterministic.
    pub fn little_weyl_group_with_bound(
        &self,
        bound: usize,
    ) -> Result<Vec<WeylElement>, RootError> {
        let mut generators: Vec<WeylElement> = Vec::new();
        for &i in &self.block_indices(RootSubset::Compact) {
            let r = &self.roots[i];
            generators.push(WeylElement::reflection(&r.coords, &r.coroot));
        }
        let identity = WeylElement::identity(self.ambient_dim);
        let mut seen: BTreeSet<Vec<Rat>> = BTreeSet::new();
        seen.insert(identity.matrix.clone());
        let mut elements = vec![identity];
        let mut frontier = 0usize;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            frontier += 1;
            for g in &generators {
                let next = g.compose(&current);
                if seen.insert(next.matrix.clone()) {
                    if elements.len() + 1 > bound {
                        return Err(RootError::GroupTooLarge { bound });
                    }
                    elements.push(next);
                }
            }
        }
        Ok(elements)
    }

    /// Apply a Weyl element to a spectral parameter.
    pub fn weyl_act(&self, w: &WeylElement, lambda: &SpectralParameter) -> SpectralParameter {
        SpectralParameter {
            coords: w.act_complex(lambda.coords()),
        }
    }

    /// Exact cone and chamber membership for a vector of `a`.
    pub fn cone_and_chamber(&self, x: &[Rat]) -> Result<ConeLocation, RootError> {
        if x.len() != self.ambient_dim {
            return Err(RootError::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.len(),
            });
        }
        let mut loc = ConeLocation {
            in_c_max: true,
            in_c_max_interior: true,
            in_a_plus: true,
            vanishing_noncompact: Vec::new(),
            vanishing_compact: Vec::new(),
        };
        for i in 0..self.num_positive() {
            let r = &self.roots[i];
            let v = dot_rat(&r.coords, x);
            match r.grade {
                1 => {
                    if v < Rat::zero() {
                        loc.in_c_max = false;
                        loc.in_c_max_interior = false;
                        loc.in_a_plus = false;
                    } else if v.is_zero() {
                        loc.in_c_max_interior = false;
                        loc.in_a_plus = false;
                        loc.vanishing_noncompact.push(i);
                    }
                }
                0 => {
                    if v < Rat::zero() {
                        loc.in_a_plus = false;
                    } else if v.is_zero() {
                        loc.in_a_plus = false;
                        loc.vanishing_compact.push(i);
                    }
                }
                _ => unreachable!("positive roots have grade 0 or +1"),
            }
        }
        Ok(loc)
    }

    /// Gram-dual inner product on `a*`: `(u, v) = u^T G^{-1} v`.
    pub fn dual_inner_rat(&self, u: &[Rat], v: &[Rat]) -> Result<Rat, RootError> {
        if u.len() != self.ambient_dim || v.len() != self.ambient_dim {
            return Err(RootError::DimensionMismatch {
                expected: self.ambient_dim,
                got: if u.len() != self.ambient_dim {
                    u.len()
                } else {
                    v.len()
                },
            });
        }
        let solved = rat_solve(&self.gram, self.ambient_dim, v).ok_or(RootError::NotARoot)?;
        Ok(dot_rat(u, &solved))
    }
}

/// Interpret an exact scalar as a grade.
fn rat_grade(v: Rat) -> Option<i8> {
    if v.is_zero() {
        Some(0)
    } else if v == Rat::from_integer(1) {
        Some(1)
    } else if v == Rat::from_integer(-1) {
        Some(-1)
    } else {
        None
    }
}

/// Plain dot product of exact vectors.
pub fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += *x * *y;
    }
    acc
}

/// Convert an exact scalar to floating point.
pub fn rat_to_f64(r: Rat) -> f64 {
    (*r.numer() as f64) / (*r.denom() as f64)
}

/// Solve the square system `A x = b` in exact arithmetic (row-major `A`).
///
/// Returns a particular solution when the system is consistent (free
/// variables are set to zero), `None` when it is inconsistent.
pub fn rat_solve(a: &[Rat], n: usize, b: &[Rat]) -> Option<Vec<Rat>> {
    let mut m = vec![Rat::zero(); n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            m[i * (n + 1) + j] = a[i * n + j];
        }
        m[i * (n + 1) + n] = b[i];
    }
    let cols = n + 1;
    let mut pivot_cols: Vec<Option<usize>> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let pivot = (row..n).find(|&r| !m[r * cols + col].is_zero());
        let Some(p) = pivot else {
            pivot_cols.push(None);
            continue;
        };
        pivot_cols.push(Some(row));
        if p != row {
            for c in 0..cols {
                m.swap(p * cols + c, row * cols + c);
            }
        }
        let inv = m[row * cols + col].recip();
        for c in col..cols {
            m[row * cols + c] *= inv;
        }
        for r in 0..n {
            if r != row && !m[r * cols + col].is_zero() {
                let factor = m[r * cols + col];
                for c in col..cols {
                    let sub = factor * m[row * cols + c];
                    m[r * cols + c] -= sub;
                }
            }
        }
        row += 1;
    }
    // Inconsistent if any zero row has a nonzero right-hand side.
    for r in row..n {
        if !m[r * cols + n].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); n];
    for (col, pc) in pivot_cols.iter().enumerate() {
        if let Some(r) = pc {
            x[col] = m[r * cols + n];
        }
    }
    Some(x)
}

/// Solve `C x = b` where `C` has the given columns (each of length `dim`).
///
/// Requires the columns to be linearly independent; returns `None` when the
/// system is inconsistent.
pub fn rat_solve_columns(columns: &[Vec<Rat>], dim: usize, b: &[Rat]) -> Option<Vec<Rat>> {
    let k = columns.len();
    let cols = k + 1;
    let mut m = vec![Rat::zero(); dim * cols];
    for i in 0..dim {
        for j in 0..k {
            m[i * cols + j] = columns[j][i];
        }
        m[i * cols + k] = b[i];
    }
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; k];
    let mut row = 0usize;
    for col in 0..k {
        let pivot = (row..dim).find(|&r| !m[r * cols + col].is_zero());
        let Some(p) = pivot else {
            continue;
        };
        pivot_row_of_col[col] = Some(row);
        if p != row {
            for c in 0..cols {
                m.swap(p * cols + c, row * cols + c);
            }
        }
        let inv = m[row * cols + col].recip();
        for c in col..cols {
            m[row * cols + c] *= inv;
        }
        for r in 0..dim {
            if r != row && !m[r * cols + col].is_zero() {
                let factor = m[r * cols + col];
                for c in col..cols {
                    let sub = factor * m[row * cols + c];
                    m[r * cols + c] -= sub;
                }
            }
        }
        row += 1;
    }
    for r in row..dim {
        if !m[r * cols + k].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); k];
    for col in 0..k {
        if let Some(r) = pivot_row_of_col[col] {
            x[col] = m[r * cols + k];
        }
    }
    Some(x)
}
