//! Direction angles for unit vectors and the rotations they generate.
//!
//! A unit vector in R^m is parametrized by m-1 nested angles,
//!
//! ```text
//! v = sin t1 e1 + cos t1 (sin t2 e2 + cos t2 (... + cos t_{m-1} e_m)),
//! ```
//!
//! with polar angles t_1..t_{m-2} in [-pi/2, pi/2] and the final azimuthal
//! angle in (-pi, pi]. Each angle tuple also generates a special
//! orthogonal matrix whose last column is v and whose remaining columns
//! complete the associated frame; its entries have closed forms that this
//! module evaluates cancellation-free (products of sines and cosines,
//! never tangents).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::det_lu;

/// Threshold under which a norm counts as vanishing during angle
/// recovery: the window for renormalization, the zero-vector rejection,
/// and the degenerate-pole detection all use this scale.
pub const ANGLE_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Nested direction angles for a unit vector in R^m (m - 1 angles).
///
/// Serializes as `{"m": .., "theta": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EulerAnglesRepr", into = "EulerAnglesRepr")]
pub struct EulerAngles {
    m: usize,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EulerAnglesRepr {
    m: usize,
    theta: Vec<f64>,
}

impl TryFrom<EulerAnglesRepr> for EulerAngles {
    type Error = Error;

    fn try_from(r: EulerAnglesRepr) -> Result<Self> {
        EulerAngles::new(r.m, r.theta)
    }
}

impl From<EulerAngles> for EulerAnglesRepr {
    fn from(a: EulerAngles) -> Self {
        EulerAnglesRepr {
            m: a.m,
            theta: a.theta,
        }
    }
}

impl EulerAngles {
    /// Builds an angle tuple; requires exactly m - 1 finite angles.
    ///
    /// Angles outside the declared ranges are accepted: reconstruction
    /// only evaluates trigonometric functions, so it is insensitive to
    /// range conventions. Recovery operations always return canonical
    /// in-range angles; see [`EulerAngles::canonicalized`].
    pub fn new(m: usize, theta: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("need m >= 1".into()));
        }
        if theta.len() + 1 != m {
            return Err(Error::InvalidInput(format!(
                "m={} needs {} angles, found {}",
                m,
                m - 1,
                theta.len()
            )));
        }
        if let Some(x) = theta.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite angle {x}")));
        }
        Ok(EulerAngles { m, theta })
    }

    /// Ambient dimension m.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The angles t_1..t_{m-1}.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// The equivalent in-range angle tuple: polar angles in
    /// [-pi/2, pi/2], azimuthal angle in (-pi, pi], reconstructing the
    /// same unit vector.
    pub fn canonicalized(&self) -> EulerAngles {
        angles_from_unit_vector(&vector_from_angles(self))
            .expect("reconstructed vector is unit by construction")
    }
}

/// A square matrix intended to be special orthogonal, stored row-major.
///
/// Serializes as a bare nested array of rows.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix {
    m: usize,
    a: Vec<f64>,
}

impl Serialize for RotationMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = (0..self.m).map(|i| self.row(i)).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RotationMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        RotationMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

impl RotationMatrix {
    /// Builds from square row-major data; entries must be finite.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidInput("matrix needs m >= 1".into()));
        }
        let mut a = Vec::with_capacity(m * m);
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
                a.push(x);
            }
        }
        Ok(RotationMatrix { m, a })
    }

    /// The identity matrix.
    pub fn identity(m: usize) -> Self {
        assert!(m >= 1);
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            a[i * m + i] = 1.0;
        }
        RotationMatrix { m, a }
    }

    /// Matrix dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Entry (r, c).
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.m + c]
    }

    pub(crate) fn set(&mut self, r: usize, c: usize, x: f64) {
        self.a[r * self.m + c] = x;
    }

    /// Row r as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.a[r * self.m..(r + 1) * self.m]
    }

    /// Column c as an owned vector.
    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.m).map(|r| self.get(r, c)).collect()
    }

    /// Matrix-vector product A x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.m);
        (0..self.m)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Matrix product A B.
    pub fn matmul(&self, other: &RotationMatrix) -> RotationMatrix {
        assert_eq!(self.m, other.m);
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                let mut s = 0.0;
                for p in 0..m {
                    s += self.get(r, p) * other.get(p, c);
                }
                a[r * m + c] = s;
            }
        }
        RotationMatrix { m, a }
    }

    /// Determinant via LU.
    pub fn det(&self) -> f64 {
        det_lu(&self.a, self.m)
    }

    /// Largest absolute entry of A^T A - I: zero for exactly orthogonal
    /// matrices.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in i..m {
                let dot: f64 = (0..m).map(|r| self.get(r, i) * self.get(r, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// The unit vector with the given direction angles.
///
/// Component j (1-based) is sin t_j times the product of cos t_1..t_{j-1},
/// with the convention that a virtual t_m = pi/2 closes the recursion, so
/// the last component is the full cosine product. The result is unit to
/// machine precision for any input angles.
pub fn vector_from_angles(angles: &EulerAngles) -> Vec<f64> {
    let m = angles.m();
    let theta = angles.theta();
    let mut v = vec![0.0; m];
    let mut cos_prod = 1.0;
    for j in 0..m - 1 {
        v[j] = theta[j].sin() * cos_prod;
        cos_prod *= theta[j].cos();
    }
    v[m - 1] = cos_prod;
    v
}

/// Recovers canonical direction angles from a vector of (approximately)
/// unit norm. The input is renormalized internally.
///
/// At a degenerate pole — all coordinates past some polar index vanish —
/// the remaining angles are not determined by the vector; they are set to
/// zero by convention, which keeps the map total and the roundtrip exact
/// on the vector side.
///
/// # Errors
///
/// [`Error::ZeroVector`] when the norm is below 1e-8.
pub fn angles_from_unit_vector(v: &[f64]) -> Result<EulerAngles> {
    let m = v.len();
    if m == 0 {
        return Err(Error::InvalidInput("need m >= 1".into()));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < ANGLE_TOL {
        return Err(Error::ZeroVector);
    }
    let v: Vec<f64> = v.iter().map(|x| x / norm).collect();

    // Suffix norms t[j] = |(v_j, ..., v_m)|; t[0] = 1 after normalization.
    let mut tail = vec![0.0; m + 1];
    for j in (0..m).rev() {
        tail[j] = v[j].hypot(tail[j + 1]);
    }

    let mut theta = vec![0.0; m.saturating_sub(1)];
    for j in 0..m.saturating_sub(1) {
        if j + 1 == m - 1 {
            // Azimuthal angle: signed, full circle.
            let mut t = v[j].atan2(v[j + 1]);
            if t <= -std::f64::consts::PI {
                t = std::f64::consts::PI;
            }
            theta[j] = t;
        } else {
            // Polar angle against the (nonnegative) remaining tail norm.
            theta[j] = v[j].atan2(tail[j + 1]);
            if tail[j + 1] < ANGLE_TOL {
                // Pole: nothing below is determined; zero-fill and stop.
                break;
            }
        }
    }
    EulerAngles::new(m, theta)
}

/// The special orthogonal matrix generated by an angle tuple: its last
/// column is the unit vector of the angles and the other columns complete
/// the frame obtained by rotating each basis vector toward it.
///
/// Entries are evaluated in the cancellation-free form
///
/// ```text
/// A[r][q] = cos t_q                                   r = q < m
///         = -sin t_q sin t_r prod_{l=q+1..r-1} cos t_l    r > q, q < m
///         = sin t_r prod_{l<r} cos t_l                q = m (the vector)
/// ```
///
/// with the virtual sin t_m = 1, so no entry divides by a cosine and
/// poles (cos t_j = 0) are exact rather than 0 * inf.
pub fn rotation_from_angles(angles: &EulerAngles) -> RotationMatrix {
    let m = angles.m();
    let theta = angles.theta();
    // Extended sine/cosine tables with the virtual closing angle pi/2.
    let mut sin = Vec::with_capacity(m);
    let mut cos = Vec::with_capacity(m);
    for &t in theta {
        sin.push(t.sin());
        cos.push(t.cos());
    }
    sin.push(1.0);
    cos.push(0.0);

    let mut a = RotationMatrix::identity(m);
    // Columns 0..m-1: cos t_q on the diagonal, zeros above, and below the
    // diagonal -sin t_q sin t_r times the cosine run strictly between the
    // two indices.
    for q in 0..m.saturating_sub(1) {
        for r in 0..q {
            a.set(r, q, 0.0);
        }
        a.set(q, q, cos[q]);
        let mut run = 1.0;
        for r in q + 1..m {
            a.set(r, q, -sin[q] * run * sin[r]);
            run *= cos[r];
        }
    }
    // Last column: the generated unit vector sin t_r prod_{l<r} cos t_l.
    let mut run = 1.0;
    for r in 0..m {
        a.set(r, m - 1, run * sin[r]);
        run *= cos[r];
    }
    a
}

/// Recovers the angle tuple that generates a special orthogonal matrix.
///
/// The candidate angles are read off the last column (the generated unit
/// vector determines them); the full matrix is then reconstructed and
/// compared, because for m >= 3 most special orthogonal matrices are not
/// generated by any single angle tuple.
///
/// # Errors
///
/// * [`Error::NotSpecialOrthogonal`] when A^T A differs from the identity
///   by more than 1e-8 or det A < 0.
/// * [`Error::DegenerateAngles`] when a polar cosine vanishes within
///   1e-8, leaving deeper angles undetermined.
/// * [`Error::NotAngleGenerated`] when the matrix is a genuine rotation
///   but not of the generated form.
pub fn angles_from_rotation(a: &RotationMatrix) -> Result<EulerAngles> {
    let m = a.m();
    let defect = a.orthonormality_defect();
    let det = a.det();
    if defect > ANGLE_TOL || det < 0.0 {
        return Err(Error::NotSpecialOrthogonal {
            ortho_defect: defect,
            det,
        });
    }
    if m == 1 {
        return EulerAngles::new(1, vec![]);
    }

    let v = a.column(m - 1);
    // Degenerate pole: a vanishing tail norm ahead of the azimuthal angle
    // means the missing angles are real information we cannot recover.
    let mut tail = 0.0_f64;
    for j in (1..m).rev() {
        tail = v[j].hypot(tail);
        if j <= m - 2 && tail < ANGLE_TOL {
            return Err(Error::DegenerateAngles { index: j - 1 });
        }
    }

    let angles = angles_from_unit_vector(&v)?;
    let rebuilt = rotation_from_angles(&angles);
    let mut worst = 0.0_f64;
    for r in 0..m {
        for c in 0..m {
            worst = worst.max((rebuilt.get(r, c) - a.get(r, c)).abs());
        }
    }
    if worst > ANGLE_TOL {
        return Err(Error::NotAngleGenerated { defect: worst });
    }
    Ok(angles)
}

#[cfg(test)]
// Entry comparisons index both sides so failures name the entry.
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    /// Frame recursion oracle: builds the same matrix column by column
    /// from the textbook recursion f_m = e_m,
    /// f_{j} = sin t_j e_j + cos t_j f_{j+1}, a_q = cos t_q e_q - sin t_q f_{q+1},
    /// a_m = f_1.
    fn rotation_by_recursion(angles: &EulerAngles) -> Vec<Vec<f64>> {
        let m = angles.m();
        let theta = angles.theta();
        // f[j] for j = 0..m (0-based): f[m-1] = e_m.
        let mut f = vec![vec![0.0; m]; m];
        f[m - 1][m - 1] = 1.0;
        for j in (0..m - 1).rev() {
            let mut fj = vec![0.0; m];
            fj[j] = theta[j].sin();
            for p in 0..m {
                fj[p] += theta[j].cos() * f[j + 1][p];
            }
            f[j] = fj;
        }
        let mut cols = Vec::with_capacity(m);
        for q in 0..m - 1 {
            let mut aq = vec![0.0; m];
            aq[q] = theta[q].cos();
            for p in 0..m {
                aq[p] -= theta[q].sin() * f[q + 1][p];
            }
            cols.push(aq);
        }
        cols.push(f[0].clone());
        // Transpose columns into rows.
        (0..m)
            .map(|r| (0..m).map(|q| cols[q][r]).collect())
            .collect()
    }

    #[test]
    fn worked_vector_for_two_angles() {
        let a = EulerAngles::new(3, vec![FRAC_PI_6, FRAC_PI_4]).unwrap();
        let v = vector_from_angles(&a);
        let s64 = 6.0_f64.sqrt() / 4.0;
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert!((v[1] - s64).abs() < 1e-15);
        assert!((v[2] - s64).abs() < 1e-15);
        let back = angles_from_unit_vector(&v).unwrap();
        assert!((back.theta()[0] - FRAC_PI_6).abs() < 1e-15);
        assert!((back.theta()[1] - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn pole_convention_zero_fills() {
        let a = angles_from_unit_vector(&[1.0, 0.0, 0.0]).unwrap();
        assert!((a.theta()[0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(a.theta()[1], 0.0);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(matches!(
            angles_from_unit_vector(&[1e-9, 0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn non_unit_inputs_are_renormalized() {
        let a = angles_from_unit_vector(&[3.0, 0.0, 4.0]).unwrap();
        let v = vector_from_angles(&a);
        assert!((v[0] - 0.6).abs() < 1e-15);
        assert!((v[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_in_the_plane() {
        let a = EulerAngles::new(2, vec![FRAC_PI_2]).unwrap();
        let r = rotation_from_angles(&a);
        assert!((r.get(0, 0) - 0.0).abs() < 1e-15);
        assert!((r.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((r.get(1, 0) + 1.0).abs() < 1e-15);
        assert!((r.get(1, 1) - 0.0).abs() < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_frame_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let m = rng.gen_range(2..=6);
            let mut theta: Vec<f64> = (0..m - 2)
                .map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2))
                .collect();
            theta.push(rng.gen_range(-PI..PI));
            let angles = EulerAngles::new(m, theta).unwrap();
            let closed = rotation_from_angles(&angles);
            let recursive = rotation_by_recursion(&angles);
            for r in 0..m {
                for c in 0..m {
                    assert!(
                        (closed.get(r, c) - recursive[r][c]).abs() < 1e-13,
                        "entry ({r},{c}) differs at m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn generated_matrices_are_special_orthogonal_with_vector_last_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..300 {
            let m: usize = rng.gen_range(1..=6);
            let mut theta: Vec<f64> = (0..m.saturating_sub(2))
                .map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2))
                .collect();
            if m >= 2 {
                theta.push(rng.gen_range(-PI..PI));
            }
            let angles = EulerAngles::new(m, theta).unwrap();
            let a = rotation_from_angles(&angles);
            assert!(a.orthonormality_defect() < 1e-12);
            assert!((a.det() - 1.0).abs() < 1e-12);
            let v = vector_from_angles(&angles);
            for r in 0..m {
                assert!((a.get(r, m - 1) - v[r]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn angle_matrix_roundtrip_on_generic_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..300 {
            let m = rng.gen_range(2..=6);
            // Keep cosines bounded away from zero: the generic set.
            let mut theta: Vec<f64> = (0..m - 2)
                .map(|_| rng.gen_range(-1.4..1.4))
                .collect();
            theta.push(rng.gen_range(-3.0..3.0));
            let angles = EulerAngles::new(m, theta.clone()).unwrap();
            let a = rotation_from_angles(&angles);
            let back = angles_from_rotation(&a).unwrap();
            for (t, b) in theta.iter().zip(back.theta()) {
                assert!((t - b).abs() < 1e-10, "m={m}: {theta:?} vs {:?}", back.theta());
            }
        }
    }

    #[test]
    fn rotation_recovery_rejects_bad_matrices() {
        // Not orthogonal.
        let a = RotationMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            angles_from_rotation(&a),
            Err(Error::NotSpecialOrthogonal { .. })
        ));
        // Orthogonal with det -1.
        let a = RotationMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(
            angles_from_rotation(&a),
            Err(Error::NotSpecialOrthogonal { .. })
        ));
        // Genuine rotation that no angle tuple generates: block-diagonal
        // planar rotation away from the generated submanifold (m = 3).
        let c = 0.6_f64;
        let s = 0.8_f64;
        let a = RotationMatrix::from_rows(vec![
            vec![c, -s, 0.0],
            vec![s, c, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(
            angles_from_rotation(&a),
            Err(Error::NotAngleGenerated { .. })
        ));
    }

    #[test]
    fn rotation_recovery_flags_degenerate_poles() {
        // Last column e_1: the polar cosine vanishes and the lower angles
        // are undetermined, yet the matrix content depends on them.
        let angles = EulerAngles::new(3, vec![FRAC_PI_2, 0.3]).unwrap();
        let a = rotation_from_angles(&angles);
        assert!(matches!(
            angles_from_rotation(&a),
            Err(Error::DegenerateAngles { .. })
        ));
    }

    #[test]
    fn canonicalization_reflects_out_of_range_angles() {
        // A polar angle of 2.0 > pi/2 reconstructs a vector whose canonical
        // angles differ, but the vector must be identical.
        let raw = EulerAngles::new(3, vec![2.0, -4.0]).unwrap();
        let canon = raw.canonicalized();
        let v_raw = vector_from_angles(&raw);
        let v_canon = vector_from_angles(&canon);
        for (a, b) in v_raw.iter().zip(&v_canon) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(canon.theta()[0].abs() <= FRAC_PI_2 + 1e-15);
        assert!(canon.theta()[1] > -PI && canon.theta()[1] <= PI + 1e-15);
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let a = EulerAngles::new(3, vec![0.1, -0.2]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"m":3,"theta":[0.1,-0.2]}"#);
        let back: EulerAngles = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
        let bad: std::result::Result<EulerAngles, _> =
            serde_json::from_str(r#"{"m":3,"theta":[0.1]}"#);
        assert!(bad.is_err());

        let r = rotation_from_angles(&a);
        let json = serde_json::to_string(&r).unwrap();
        let back: RotationMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(r, back);
        let bad: std::result::Result<RotationMatrix, _> =
            serde_json::from_str("[[1,0],[0]]");
        assert!(bad.is_err());
    }
}
