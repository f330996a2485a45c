//! Small dense kernels: vector tuples, Gram matrices, and the
//! semidefinite triangular factorization.
//!
//! Everything works at desk scale (k, m up to a few dozen), so storage is
//! flat `Vec<f64>` and the algorithms are textbook O(k^3) with explicit
//! handling of the positive-semidefinite boundary. Triangular matrices are
//! stored packed: row i holds entries for columns 0..=i, in row order, so
//! off-triangle zeros are exact by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for rank and semidefiniteness decisions.
///
/// Tolerances scale with the largest diagonal entry of the matrix at hand;
/// an entry is treated as zero when it falls below `tol * max_diag`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Index of entry (i, j), j <= i, in a packed lower triangle.
#[inline]
pub(crate) fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

/// Number of packed entries in a k x k lower triangle.
#[inline]
pub(crate) fn tri_len(k: usize) -> usize {
    k * (k + 1) / 2
}

// ---------------------------------------------------------------------------
// VectorTuple
// ---------------------------------------------------------------------------

/// An ordered tuple of k vectors in R^m, the raw configuration on which
/// orthogonally invariant functions are evaluated.
///
/// Serializes as `{"k": .., "m": .., "rows": [[..], ..]}` with one row per
/// vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorTupleRepr", into = "VectorTupleRepr")]
pub struct VectorTuple {
    k: usize,
    m: usize,
    /// Row-major k x m storage.
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorTupleRepr {
    k: usize,
    m: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<VectorTupleRepr> for VectorTuple {
    type Error = Error;

    fn try_from(r: VectorTupleRepr) -> Result<Self> {
        if r.rows.len() != r.k {
            return Err(Error::InvalidInput(format!(
                "expected {} rows, found {}",
                r.k,
                r.rows.len()
            )));
        }
        for (i, row) in r.rows.iter().enumerate() {
            if row.len() != r.m {
                return Err(Error::InvalidInput(format!(
                    "row {} has length {}, expected m={}",
                    i,
                    row.len(),
                    r.m
                )));
            }
        }
        VectorTuple::from_rows(r.rows)
    }
}

impl From<VectorTuple> for VectorTupleRepr {
    fn from(v: VectorTuple) -> Self {
        VectorTupleRepr {
            k: v.k,
            m: v.m,
            rows: (0..v.k).map(|i| v.row(i).to_vec()).collect(),
        }
    }
}

impl VectorTuple {
    /// Builds a tuple from row vectors. All rows must be the same length
    /// and every entry finite.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidInput("need at least one vector".into()));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::InvalidInput("vectors must have dimension >= 1".into()));
        }
        let mut data = Vec::with_capacity(k * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "row {} has length {}, expected {}",
                    i,
                    row.len(),
                    m
                )));
            }
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite entry in row {i}")));
                }
                data.push(x);
            }
        }
        Ok(VectorTuple { k, m, data })
    }

    /// The all-zero tuple of k vectors in R^m.
    pub fn zeros(k: usize, m: usize) -> Self {
        assert!(k >= 1 && m >= 1, "need k >= 1 and m >= 1");
        VectorTuple {
            k,
            m,
            data: vec![0.0; k * m],
        }
    }

    /// Number of vectors.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Ambient dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The i-th vector as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    /// Entry j of vector i.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.m + j] = x;
    }

    /// Flat row-major view of all coordinates.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_flat(k: usize, m: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), k * m);
        VectorTuple { k, m, data }
    }

    /// Sum of squared norms of all vectors (the trace of the Gram matrix).
    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }
}

// ---------------------------------------------------------------------------
// GramMatrix
// ---------------------------------------------------------------------------

/// A symmetric k x k matrix of pairwise inner products, stored as the
/// packed lower triangle in row order: u11, u21, u22, u31, ...
///
/// Serializes as `{"k": .., "lower": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GramMatrixRepr", into = "GramMatrixRepr")]
pub struct GramMatrix {
    k: usize,
    lower: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GramMatrixRepr {
    k: usize,
    lower: Vec<f64>,
}

impl TryFrom<GramMatrixRepr> for GramMatrix {
    type Error = Error;

    fn try_from(r: GramMatrixRepr) -> Result<Self> {
        GramMatrix::from_lower(r.k, r.lower)
    }
}

impl From<GramMatrix> for GramMatrixRepr {
    fn from(g: GramMatrix) -> Self {
        GramMatrixRepr {
            k: g.k,
            lower: g.lower,
        }
    }
}

impl GramMatrix {
    /// Builds a Gram matrix from its packed lower triangle
    /// (u11, u21, u22, u31, u32, u33, ...).
    pub fn from_lower(k: usize, lower: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("Gram matrix needs k >= 1".into()));
        }
        if lower.len() != tri_len(k) {
            return Err(Error::InvalidInput(format!(
                "packed lower triangle for k={} needs {} entries, found {}",
                k,
                tri_len(k),
                lower.len()
            )));
        }
        if let Some(x) = lower.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry {x}")));
        }
        Ok(GramMatrix { k, lower })
    }

    /// Builds from a dense symmetric matrix given as rows; the strict upper
    /// triangle is ignored.
    pub fn from_dense_lower(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut lower = Vec::with_capacity(tri_len(k));
        for (i, row) in rows.iter().enumerate() {
            if row.len() < i + 1 {
                return Err(Error::InvalidInput(format!(
                    "row {} too short for its lower triangle",
                    i
                )));
            }
            lower.extend_from_slice(&row[..=i]);
        }
        GramMatrix::from_lower(k, lower)
    }

    /// Matrix dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Symmetric accessor: entry (i, j) in either order.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.lower[tri_index(hi, lo)]
    }

    /// Diagonal entry u_ii.
    pub fn diag(&self, i: usize) -> f64 {
        self.lower[tri_index(i, i)]
    }

    /// Packed lower triangle in row order.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Largest diagonal entry clamped to be nonnegative; the scale against
    /// which relative tolerances are measured.
    pub fn max_diag(&self) -> f64 {
        (0..self.k).map(|i| self.diag(i)).fold(0.0, f64::max)
    }

    /// Trace (sum of diagonal entries).
    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.diag(i)).sum()
    }

    /// Dense row-major copy, for callers that want plain matrix layout.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Uniform scaling: returns c * G.
    pub fn scaled(&self, c: f64) -> GramMatrix {
        GramMatrix {
            k: self.k,
            lower: self.lower.iter().map(|x| c * x).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// TriangularFactor
// ---------------------------------------------------------------------------

/// A lower-triangular k x m coordinate matrix (k <= m): row i has nonzero
/// entries only in columns 0..=i, stored packed exactly like a Gram lower
/// triangle. Interior points have strictly positive diagonal entries.
///
/// Serializes as `{"k": .., "m": .., "lower": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TriangularFactorRepr", into = "TriangularFactorRepr")]
pub struct TriangularFactor {
    k: usize,
    m: usize,
    lower: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangularFactorRepr {
    k: usize,
    m: usize,
    lower: Vec<f64>,
}

impl TryFrom<TriangularFactorRepr> for TriangularFactor {
    type Error = Error;

    fn try_from(r: TriangularFactorRepr) -> Result<Self> {
        TriangularFactor::from_lower(r.k, r.m, r.lower)
    }
}

impl From<TriangularFactor> for TriangularFactorRepr {
    fn from(w: TriangularFactor) -> Self {
        TriangularFactorRepr {
            k: w.k,
            m: w.m,
            lower: w.lower,
        }
    }
}

impl TriangularFactor {
    /// Builds a factor from its packed lower triangle; requires k <= m.
    pub fn from_lower(k: usize, m: usize, lower: Vec<f64>) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidInput("need k >= 1 and m >= 1".into()));
        }
        if k > m {
            return Err(Error::NotCoregular { k, m });
        }
        if lower.len() != tri_len(k) {
            return Err(Error::InvalidInput(format!(
                "packed lower triangle for k={} needs {} entries, found {}",
                k,
                tri_len(k),
                lower.len()
            )));
        }
        if let Some(x) = lower.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry {x}")));
        }
        Ok(TriangularFactor { k, m, lower })
    }

    /// Number of rows.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Ambient dimension the rows live in.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Entry (i, j) for j <= i. Columns beyond i are zero by construction.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.lower[tri_index(i, j)]
    }

    /// Diagonal entry w_ii.
    pub fn diag(&self, i: usize) -> f64 {
        self.lower[tri_index(i, i)]
    }

    /// Packed lower triangle in row order.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Largest diagonal entry clamped to be nonnegative.
    pub fn max_diag(&self) -> f64 {
        (0..self.k).map(|i| self.diag(i)).fold(0.0, f64::max)
    }

    /// Reinterprets the rows in a larger ambient dimension (pads with
    /// zeros conceptually; the packed entries are unchanged).
    pub fn embed(&self, m: usize) -> Result<TriangularFactor> {
        if m < self.k {
            return Err(Error::NotCoregular { k: self.k, m });
        }
        Ok(TriangularFactor {
            k: self.k,
            m,
            lower: self.lower.clone(),
        })
    }

    /// Expands to a dense vector tuple with explicit zero padding.
    pub fn to_tuple(&self) -> VectorTuple {
        let mut v = VectorTuple::zeros(self.k, self.m);
        for i in 0..self.k {
            for j in 0..=i {
                v.set(i, j, self.entry(i, j));
            }
        }
        v
    }

    /// Gram matrix of the rows, W W^T.
    pub fn gram(&self) -> GramMatrix {
        let mut lower = Vec::with_capacity(tri_len(self.k));
        for i in 0..self.k {
            for j in 0..=i {
                // Rows are triangular: the dot product stops at column j.
                let mut s = 0.0;
                for p in 0..=j {
                    s += self.entry(i, p) * self.entry(j, p);
                }
                lower.push(s);
            }
        }
        GramMatrix {
            k: self.k,
            lower,
        }
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Gram matrix of a vector tuple: entry (i, j) is the inner product of
/// vectors i and j.
pub fn gram(v: &VectorTuple) -> GramMatrix {
    let k = v.k();
    let mut lower = Vec::with_capacity(tri_len(k));
    for i in 0..k {
        let ri = v.row(i);
        for j in 0..=i {
            let rj = v.row(j);
            lower.push(ri.iter().zip(rj).map(|(a, b)| a * b).sum());
        }
    }
    GramMatrix { k, lower }
}

/// Semidefinite triangular factorization G = W W^T with pivot clamping.
///
/// Pivots below `tol * max_diag(G)` are set to zero and the entries below
/// them — which must vanish for a genuinely positive-semidefinite matrix —
/// are set to zero as well (the least-squares-consistent value once the
/// division by a zero pivot is guarded). A pivot below `-tol * max_diag`
/// or a clamped pivot with a non-vanishing residual column means the input
/// is not positive semidefinite.
pub fn semidefinite_cholesky(g: &GramMatrix, tol: f64) -> Result<TriangularFactor> {
    let k = g.k();
    let scale = g.max_diag();
    let pivot_floor = tol * scale;
    // A clamped pivot d_j bounds residual entries by |r_ij| <= sqrt(d_i d_j),
    // so anything beyond sqrt(pivot_floor * scale) (with slack for roundoff
    // accumulated over k eliminations) betrays an indefinite matrix.
    let residual_floor = (k as f64) * (pivot_floor * scale).sqrt() + pivot_floor;

    let mut w = vec![0.0; tri_len(k)];
    for j in 0..k {
        let mut d = g.diag(j);
        for p in 0..j {
            d -= w[tri_index(j, p)] * w[tri_index(j, p)];
        }
        if d < -pivot_floor {
            return Err(Error::NotPositiveSemidefinite { index: j, pivot: d });
        }
        if d <= pivot_floor {
            w[tri_index(j, j)] = 0.0;
            for i in (j + 1)..k {
                let mut r = g.entry(i, j);
                for p in 0..j {
                    r -= w[tri_index(i, p)] * w[tri_index(j, p)];
                }
                if r.abs() > residual_floor {
                    return Err(Error::NotPositiveSemidefinite { index: j, pivot: r });
                }
                w[tri_index(i, j)] = 0.0;
            }
        } else {
            let root = d.sqrt();
            w[tri_index(j, j)] = root;
            for i in (j + 1)..k {
                let mut r = g.entry(i, j);
                for p in 0..j {
                    r -= w[tri_index(i, p)] * w[tri_index(j, p)];
                }
                w[tri_index(i, j)] = r / root;
            }
        }
    }
    Ok(TriangularFactor { k, m: k, lower: w })
}

/// Leading principal minors |G_0|, |G_1|, ..., |G_k| (so k+1 values,
/// starting with the empty minor 1).
///
/// For positive-semidefinite input the minors are cumulative products of
/// the squared factorization pivots, which is both stable and exact about
/// rank deficiency: once a pivot clamps to zero, all later minors are
/// zero. Indefinite input falls back to direct determinants of each
/// leading block.
pub fn leading_minors(g: &GramMatrix) -> Vec<f64> {
    match semidefinite_cholesky(g, DEFAULT_TOL) {
        Ok(w) => {
            let mut minors = Vec::with_capacity(g.k() + 1);
            minors.push(1.0);
            let mut prod = 1.0;
            for i in 0..g.k() {
                let d = w.diag(i);
                prod *= d * d;
                minors.push(prod);
            }
            minors
        }
        Err(_) => {
            let mut minors = Vec::with_capacity(g.k() + 1);
            minors.push(1.0);
            for l in 1..=g.k() {
                minors.push(leading_block_det(g, l));
            }
            minors
        }
    }
}

/// Determinant of the l x l leading block: closed cofactor forms for
/// l <= 3, LU with partial pivoting beyond.
fn leading_block_det(g: &GramMatrix, l: usize) -> f64 {
    match l {
        1 => g.entry(0, 0),
        2 => g.entry(0, 0) * g.entry(1, 1) - g.entry(1, 0) * g.entry(0, 1),
        3 => {
            let a = |i: usize, j: usize| g.entry(i, j);
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        _ => {
            let dense: Vec<f64> = (0..l)
                .flat_map(|i| (0..l).map(move |j| g.entry(i, j)))
                .collect();
            det_lu(&dense, l)
        }
    }
}

/// Determinant of a dense n x n row-major matrix via LU with partial
/// pivoting. Destroys nothing; clones the input.
pub(crate) fn det_lu(a: &[f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut lu = a.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let mut piv = c;
        let mut best = lu[c * n + c].abs();
        for r in (c + 1)..n {
            let x = lu[r * n + c].abs();
            if x > best {
                best = x;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..n {
                lu.swap(c * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = lu[c * n + c];
        det *= d;
        for r in (c + 1)..n {
            let f = lu[r * n + c] / d;
            lu[r * n + c] = f;
            for j in (c + 1)..n {
                lu[r * n + j] -= f * lu[c * n + j];
            }
        }
    }
    det
}

/// Whether a symmetric matrix is the Gram matrix of some k-tuple in R^m:
/// requires k <= m (otherwise the question is ill-posed here) and positive
/// semidefiniteness within tolerance.
pub fn is_in_image(g: &GramMatrix, m: usize, tol: f64) -> Result<bool> {
    if g.k() > m {
        return Err(Error::NotCoregular { k: g.k(), m });
    }
    Ok(semidefinite_cholesky(g, tol).is_ok())
}

/// Produces a concrete tuple in R^m whose Gram matrix is G: the
/// semidefinite factor embedded in the requested ambient dimension.
pub fn lift(g: &GramMatrix, m: usize, tol: f64) -> Result<VectorTuple> {
    if g.k() > m {
        return Err(Error::NotCoregular { k: g.k(), m });
    }
    let w = semidefinite_cholesky(g, tol).map_err(|e| match e {
        Error::NotPositiveSemidefinite { index, pivot } => Error::NotInImage { index, pivot },
        other => other,
    })?;
    Ok(w.embed(m)?.to_tuple())
}
