//! Reduction of a vector tuple to triangular form by plane rotations.
//!
//! Every k-tuple in R^m (k <= m) can be rotated so that vector i has
//! nonzero coordinates only in positions 1..=i, with positive leading
//! coordinates — a canonical representative of its orbit under rotations.
//! The rotations are recorded as an angle schedule: vector i is hit by
//! m - i plane rotations, the p-th acting on the coordinate pair
//! (m-p, m-p+1) and zeroing coordinate m-p+1. The first angle for each
//! vector ranges over the full circle (-pi, pi]; later ones lie in
//! (0, pi) because the previous step left a positive coordinate behind.
//!
//! When k = m the last vector has no rotation left to fix its sign, so a
//! final coordinate reflection is applied when its diagonal entry came
//! out negative; the accumulated matrix then has determinant -1 and the
//! schedule records the reflection.
//!
//! The angular measure swept by the schedule — what the rotations
//! integrate to over all orbits — carries the weight
//! `prod sin^{j-1} theta^{(i,j)}` over the in-plane angles, doubled in
//! the square case for the two-fold reflection cover; integrating it over
//! the declared ranges gives exactly the product of sphere volumes
//! returned by [`angular_volume`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::RotationMatrix;
use crate::linalg::{tri_len, TriangularFactor, VectorTuple};
use crate::measure::log_sphere_volume;
use crate::quadrature::gauss_legendre;

/// Coordinate pairs with both entries below this magnitude get angle 0
/// instead of whatever `atan2(0, 0)` would make up.
const DEGENERATE_PAIR_TOL: f64 = 1e-13;

// ---------------------------------------------------------------------------
// AngleSchedule
// ---------------------------------------------------------------------------

/// The rotation angles produced by [`reduce`]: `theta(i, p)` is the p-th
/// angle applied to vector i (both 0-based; vector i receives
/// m - i - 1 angles), plus a flag for the final reflection in the square
/// case.
///
/// Serializes as `{"k": .., "m": .., "theta": {"i,p": angle, ..},
/// "reflection": bool}` with 1-based keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AngleScheduleRepr", into = "AngleScheduleRepr")]
pub struct AngleSchedule {
    k: usize,
    m: usize,
    rows: Vec<Vec<f64>>,
    reflection: bool,
}

#[derive(Serialize, Deserialize)]
struct AngleScheduleRepr {
    k: usize,
    m: usize,
    theta: BTreeMap<String, f64>,
    reflection: bool,
}

impl TryFrom<AngleScheduleRepr> for AngleSchedule {
    type Error = Error;

    fn try_from(r: AngleScheduleRepr) -> Result<Self> {
        if r.k == 0 || r.k > r.m {
            return Err(Error::InvalidInput(format!(
                "schedule needs 1 <= k <= m, found k={}, m={}",
                r.k, r.m
            )));
        }
        let mut rows: Vec<Vec<f64>> = (0..r.k)
            .map(|i| vec![f64::NAN; r.m - i - 1])
            .collect();
        for (key, &value) in &r.theta {
            let (i, p) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| Error::InvalidInput(format!("bad angle key '{key}'")))?;
            if i == 0 || i > r.k || p == 0 || p > r.m - i {
                return Err(Error::InvalidInput(format!(
                    "angle key '{key}' out of range for k={}, m={}",
                    r.k, r.m
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite angle at '{key}'")));
            }
            rows[i - 1][p - 1] = value;
        }
        for (i, row) in rows.iter().enumerate() {
            if let Some(p) = row.iter().position(|x| x.is_nan()) {
                return Err(Error::InvalidInput(format!(
                    "missing angle {},{}",
                    i + 1,
                    p + 1
                )));
            }
        }
        Ok(AngleSchedule {
            k: r.k,
            m: r.m,
            rows,
            reflection: r.reflection,
        })
    }
}

impl From<AngleSchedule> for AngleScheduleRepr {
    fn from(s: AngleSchedule) -> Self {
        let mut theta = BTreeMap::new();
        for (i, row) in s.rows.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                theta.insert(format!("{},{}", i + 1, p + 1), v);
            }
        }
        AngleScheduleRepr {
            k: s.k,
            m: s.m,
            theta,
            reflection: s.reflection,
        }
    }
}

impl AngleSchedule {
    pub(crate) fn new(k: usize, m: usize, rows: Vec<Vec<f64>>, reflection: bool) -> Self {
        debug_assert_eq!(rows.len(), k);
        debug_assert!(rows.iter().enumerate().all(|(i, r)| r.len() == m - i - 1));
        AngleSchedule {
            k,
            m,
            rows,
            reflection,
        }
    }

    /// Number of vectors the schedule reduces.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Ambient dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The p-th angle applied to vector i, both 0-based; p ranges over
    /// 0..(m - i - 1).
    pub fn theta(&self, i: usize, p: usize) -> f64 {
        self.rows[i][p]
    }

    /// Number of angles for vector i (0-based): m - i - 1.
    pub fn angles_for(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    /// Total number of angles in the schedule.
    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Whether the schedule is empty (k = m = 1).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether the square-case reflection was applied.
    pub fn reflection(&self) -> bool {
        self.reflection
    }

    /// Whether every angle lies in its declared range: the first angle of
    /// each vector in (-pi, pi], the rest in [0, pi]. (The open-interval
    /// endpoints of (0, pi) are measure-zero and can be hit by degenerate
    /// inputs, where the convention angle is 0.)
    pub fn in_declared_ranges(&self) -> bool {
        use std::f64::consts::PI;
        self.rows.iter().all(|row| {
            row.iter().enumerate().all(|(p, &t)| {
                if p == 0 {
                    -PI < t && t <= PI
                } else {
                    (0.0..=PI).contains(&t)
                }
            })
        })
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// The m x m rotation acting on the coordinate pair (j, j+1), 1-based:
/// identity except for the 2 x 2 block `[[cos, -sin], [sin, cos]]` at
/// rows and columns j, j+1.
///
/// # Errors
///
/// [`Error::IndexOutOfRange`] unless `1 <= j <= m - 1`.
pub fn plane_rotation(m: usize, j: usize, angle: f64) -> Result<RotationMatrix> {
    if j == 0 || j + 1 > m {
        return Err(Error::IndexOutOfRange {
            index: j,
            limit: m.saturating_sub(1),
        });
    }
    let mut a = RotationMatrix::identity(m);
    let (c, s) = (angle.cos(), angle.sin());
    a.set(j - 1, j - 1, c);
    a.set(j - 1, j, -s);
    a.set(j, j - 1, s);
    a.set(j, j, c);
    Ok(a)
}

/// The result of reducing a tuple: triangular coordinates, the rotation
/// schedule that produced them, and the accumulated rotation with
/// `rotation * w_i = v_i` for every row.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub w: TriangularFactor,
    pub schedule: AngleSchedule,
    pub rotation: RotationMatrix,
}

/// Rotates a tuple into triangular form.
///
/// Works down the vectors in order; for vector i the coordinate pairs
/// (m-1, m), (m-2, m-1), ..., (i, i+1) are each rotated so the second
/// coordinate becomes zero and the first nonnegative. Those rotations
/// leave the already-reduced vectors untouched (their entries there are
/// zero) and carry the later vectors along. Exactly zero pairs get angle
/// 0, so rank-deficient tuples reduce without special cases and produce
/// zero diagonal entries.
///
/// The output satisfies, up to roundoff: `rotation` is special
/// orthogonal (determinant -1 exactly when the square-case reflection
/// fired), `rotation * w_i = v_i` row by row, and W has the same Gram
/// matrix as the input.
///
/// # Errors
///
/// [`Error::DimensionMismatch`] when the tuple has more vectors than
/// coordinates.
pub fn reduce(v: &VectorTuple) -> Result<Reduction> {
    let k = v.k();
    let m = v.m();
    if k > m {
        return Err(Error::DimensionMismatch { k, m });
    }

    // Working copy of the coordinates, row-major k x m.
    let mut x: Vec<f64> = v.as_flat().to_vec();
    let mut r = RotationMatrix::identity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);

    for i in 0..k {
        let mut angles = Vec::with_capacity(m - i - 1);
        for p in 1..=(m - i - 1) {
            let j = m - p; // 1-based pair (j, j+1) = 0-based columns (j-1, j)
            let a = x[i * m + (j - 1)];
            let b = x[i * m + j];
            let theta = if a.abs() < DEGENERATE_PAIR_TOL && b.abs() < DEGENERATE_PAIR_TOL {
                0.0
            } else {
                b.atan2(a)
            };
            angles.push(theta);
            let (c, s) = (theta.cos(), theta.sin());
            // Coordinates move by the inverse rotation: the recorded angle
            // is how far the reduced configuration must be rotated forward
            // to recover the input.
            for row in 0..k {
                let xa = x[row * m + (j - 1)];
                let xb = x[row * m + j];
                x[row * m + (j - 1)] = c * xa + s * xb;
                x[row * m + j] = -s * xa + c * xb;
            }
            // Accumulate r <- r * plane_rotation(j, theta): columns j-1, j
            // combine, every other column is untouched.
            for row in 0..m {
                let ra = r.get(row, j - 1);
                let rb = r.get(row, j);
                r.set(row, j - 1, c * ra + s * rb);
                r.set(row, j, -s * ra + c * rb);
            }
        }
        rows.push(angles);
    }

    let mut reflection = false;
    if k == m && x[(k - 1) * m + (k - 1)] < 0.0 {
        // No rotation remains that could fix the sign of the last
        // diagonal entry; flip the last coordinate instead.
        reflection = true;
        for row in 0..k {
            x[row * m + (m - 1)] = -x[row * m + (m - 1)];
        }
        for row in 0..m {
            let flipped = -r.get(row, m - 1);
            r.set(row, m - 1, flipped);
        }
    }

    let mut lower = Vec::with_capacity(tri_len(k));
    for i in 0..k {
        for j in 0..=i {
            lower.push(x[i * m + j]);
        }
    }
    let w = TriangularFactor::from_lower(k, m, lower)?;
    Ok(Reduction {
        w,
        schedule: AngleSchedule::new(k, m, rows, reflection),
        rotation: r,
    })
}

/// The angular density carried by a schedule:
/// `2^{[k = m]} * prod_i prod_{p >= 2} sin^{p-1} theta^{(i,p)}`
/// (1-based p; the full-circle first angles enter with weight one).
pub fn angular_weight(schedule: &AngleSchedule) -> f64 {
    let mut weight = if schedule.k() == schedule.m() { 2.0 } else { 1.0 };
    for i in 0..schedule.k() {
        for p in 1..schedule.angles_for(i) {
            weight *= schedule.theta(i, p).sin().powi(p as i32);
        }
    }
    weight
}

/// Total angular volume swept by all schedules: the product
/// `prod_{i=1..k} vol(S^{m-i})`, i.e. the integral of
/// [`angular_weight`] over the declared angle ranges.
///
/// # Errors
///
/// [`Error::NotCoregular`] when k > m.
pub fn angular_volume(k: usize, m: usize) -> Result<f64> {
    if k == 0 || k > m {
        return Err(Error::NotCoregular { k, m });
    }
    let log: f64 = (1..=k).map(|i| log_sphere_volume(m - i)).sum();
    Ok(log.exp())
}

/// Integrates [`angular_weight`] over the declared ranges by tensor
/// quadrature, as an independent check on [`angular_volume`].
///
/// Full-circle angles integrate to exactly 2 pi (the weight does not
/// depend on them), contributing interval-length factors; each in-plane
/// angle gets a Gauss-Legendre panel on (0, pi). Evaluation goes through
/// real `AngleSchedule` values and [`angular_weight`] so the check
/// exercises the production weight, not a copy of its formula.
pub fn angular_volume_by_quadrature(k: usize, m: usize, nodes_per_dim: usize) -> Result<f64> {
    use std::f64::consts::PI;
    if k == 0 || k > m {
        return Err(Error::NotCoregular { k, m });
    }
    // Dimensions carrying sine weights: (i, p) with p >= 1 (0-based).
    let mut dims: Vec<(usize, usize)> = Vec::new();
    let mut full_circles = 0usize;
    for i in 0..k {
        let count = m - i - 1;
        if count >= 1 {
            full_circles += 1;
        }
        for p in 1..count {
            dims.push((i, p));
        }
    }
    let (nodes, weights) = gauss_legendre(nodes_per_dim, 0.0, PI);

    let template: Vec<Vec<f64>> = (0..k).map(|i| vec![0.5; m - i - 1]).collect();
    let mut total = 0.0;
    let mut index = vec![0usize; dims.len()];
    loop {
        let mut rows = template.clone();
        let mut node_weight = 1.0;
        for (d, &(i, p)) in dims.iter().enumerate() {
            rows[i][p] = nodes[index[d]];
            node_weight *= weights[index[d]];
        }
        let schedule = AngleSchedule::new(k, m, rows, false);
        total += node_weight * angular_weight(&schedule);

        // Odometer increment over the tensor grid.
        let mut d = 0;
        loop {
            if d == dims.len() {
                let circle_factor = (2.0 * PI).powi(full_circles as i32);
                return Ok(total * circle_factor);
            }
            index[d] += 1;
            if index[d] < nodes_per_dim {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}
