//! Oriented spheres and hyperplanes in n dimensions, their
//! curvature-center coordinates, inversion, separation, orthogonal
//! spheres, and the duality operation on tangent families.
//!
//! An oriented sphere carries a nonzero oriented radius: positive for an
//! inward-pointing normal (interior = the bounded side), negative for
//! outward. A hyperplane `y · h = m` is oriented by its unit normal `h`,
//! which points into the closed half-space `{y : y · h >= m}` designated
//! as its interior.
//!
//! The coordinate vector of a sphere is `(b̄, b, b·x)` with curvature
//! `b = 1/r` and co-curvature `b̄ = |x|²/r − r`; a hyperplane gets
//! `(2m, 0, h)`. Every valid vector `w` satisfies the normalization
//! `w₀w₁ − Σᵢ wᵢ₊₂² = −1`, which is self-separation −1 under the
//! bilinear separation form implemented here.

use crate::exactq::{rat, Rational};
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use std::fmt;

/// Tolerance for geometric identities checked in floating point.
pub const GEOM_TOL: f64 = 1e-9;
/// Tolerance for coordinate round-trips.
pub const ROUND_TRIP_TOL: f64 = 1e-12;
/// A hyperplane normal must be unit length within this tolerance.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;
/// Looser gate used when screening whether an input family is a valid
/// tangent configuration before running a derived construction on it.
const CONFIG_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum SpheresError {
    /// Inputs live in different ambient dimensions or have the wrong count.
    DimensionMismatch,
    /// A sphere was requested with oriented radius zero.
    ZeroRadius,
    /// A hyperplane normal is not unit length within tolerance.
    NonUnitNormal,
    /// A coordinate vector fails the self-separation normalization, so it
    /// names no sphere or hyperplane.
    InconsistentAcc,
    /// The orthogonal-sphere system is rank deficient or has no real
    /// solution (coincident tangency points, dependent inputs, or a
    /// negative squared curvature).
    DegenerateInput,
    /// The closed-form curvature/center values and the independent linear
    /// solve disagree beyond tolerance.
    CrossCheckFailed,
    /// A family handed to the duality operation is not pairwise
    /// unit-separated.
    NotEquiseparated,
    /// A JSON record is missing fields or has the wrong shape.
    BadRecord(String),
}

impl fmt::Display for SpheresError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpheresError::DimensionMismatch => write!(f, "dimension mismatch"),
            SpheresError::ZeroRadius => write!(f, "oriented radius must be nonzero"),
            SpheresError::NonUnitNormal => write!(f, "hyperplane normal must be unit length"),
            SpheresError::InconsistentAcc => {
                write!(f, "coordinate vector fails the self-separation normalization")
            }
            SpheresError::DegenerateInput => {
                write!(f, "degenerate input: no unique real orthogonal sphere")
            }
            SpheresError::CrossCheckFailed => {
                write!(f, "closed-form values disagree with the independent solve")
            }
            SpheresError::NotEquiseparated => {
                write!(f, "input family is not pairwise unit-separated")
            }
            SpheresError::BadRecord(msg) => write!(f, "bad sphere record: {msg}"),
        }
    }
}

impl std::error::Error for SpheresError {}

/// An oriented sphere or oriented hyperplane in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub enum OrientedSphere {
    Sphere {
        center: Vec<f64>,
        /// Positive for inward orientation, negative for outward.
        oriented_radius: f64,
    },
    Hyperplane {
        /// Unit normal pointing into the designated interior half-space.
        unit_normal: Vec<f64>,
        /// The plane is `{y : y · unit_normal = offset_m}`.
        offset_m: f64,
    },
}

impl OrientedSphere {
    pub fn sphere(center: Vec<f64>, oriented_radius: f64) -> Result<Self, SpheresError> {
        if oriented_radius == 0.0 || !oriented_radius.is_finite() {
            return Err(SpheresError::ZeroRadius);
        }
        Ok(OrientedSphere::Sphere { center, oriented_radius })
    }

    pub fn hyperplane(unit_normal: Vec<f64>, offset_m: f64) -> Result<Self, SpheresError> {
        let norm = unit_normal.iter().map(|h| h * h).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORMAL_TOL {
            return Err(SpheresError::NonUnitNormal);
        }
        Ok(OrientedSphere::Hyperplane { unit_normal, offset_m })
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        match self {
            OrientedSphere::Sphere { center, .. } => center.len(),
            OrientedSphere::Hyperplane { unit_normal, .. } => unit_normal.len(),
        }
    }

    /// Oriented curvature: 1/r for spheres, 0 for hyperplanes.
    pub fn curvature(&self) -> f64 {
        match self {
            OrientedSphere::Sphere { oriented_radius, .. } => 1.0 / oriented_radius,
            OrientedSphere::Hyperplane { .. } => 0.0,
        }
    }

    /// The same point set with the opposite orientation.
    pub fn reversed(&self) -> Self {
        match self {
            OrientedSphere::Sphere { center, oriented_radius } => OrientedSphere::Sphere {
                center: center.clone(),
                oriented_radius: -oriented_radius,
            },
            OrientedSphere::Hyperplane { unit_normal, offset_m } => OrientedSphere::Hyperplane {
                unit_normal: unit_normal.iter().map(|h| -h).collect(),
                offset_m: -offset_m,
            },
        }
    }
}

/// Curvature-center coordinate vector `(b̄, b, b·x₁, …, b·xₙ)`.
///
/// The float entries are always populated; an exact rational mirror is
/// carried when the vector came from exact data, and exact inputs keep
/// exact arithmetic in [`separation_acc`].
#[derive(Debug, Clone, PartialEq)]
pub struct AccVector {
    entries: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl AccVector {
    pub fn from_f64(entries: Vec<f64>) -> Result<Self, SpheresError> {
        if entries.len() < 4 {
            return Err(SpheresError::DimensionMismatch);
        }
        Ok(AccVector { entries, exact: None })
    }

    pub fn from_exact(entries: Vec<Rational>) -> Result<Self, SpheresError> {
        if entries.len() < 4 {
            return Err(SpheresError::DimensionMismatch);
        }
        let floats = entries.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(AccVector { entries: floats, exact: Some(entries) })
    }

    /// Ambient dimension n (two fewer than the entry count).
    pub fn dim(&self) -> usize {
        self.entries.len() - 2
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn exact_entries(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// First two entries swapped: the coordinate action of inversion in
    /// the unit sphere about the origin.
    pub fn swap_first_two(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.swap(0, 1);
        let exact = self.exact.as_ref().map(|e| {
            let mut e = e.clone();
            e.swap(0, 1);
            e
        });
        AccVector { entries, exact }
    }
}

/// A scalar that is exact when every input to its computation was exact.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }
}

/// Coordinate vector of an oriented sphere or hyperplane.
pub fn acc_coords(s: &OrientedSphere) -> AccVector {
    match s {
        OrientedSphere::Sphere { center, oriented_radius } => {
            let r = *oriented_radius;
            let b = 1.0 / r;
            let norm2: f64 = center.iter().map(|x| x * x).sum();
            let mut entries = Vec::with_capacity(center.len() + 2);
            entries.push(norm2 / r - r);
            entries.push(b);
            entries.extend(center.iter().map(|x| b * x));
            AccVector { entries, exact: None }
        }
        OrientedSphere::Hyperplane { unit_normal, offset_m } => {
            let mut entries = Vec::with_capacity(unit_normal.len() + 2);
            entries.push(2.0 * offset_m);
            entries.push(0.0);
            entries.extend(unit_normal.iter().copied());
            AccVector { entries, exact: None }
        }
    }
}

/// Recover the sphere or hyperplane named by a coordinate vector.
///
/// The vector must satisfy the self-separation normalization
/// `w₀w₁ − ‖tail‖² = −1` (checked exactly for exact vectors, to relative
/// tolerance otherwise). Zero curvature resolves to a hyperplane with
/// offset `w₀/2`; zero curvature and zero leading entry resolve to a
/// hyperplane through the origin.
pub fn sphere_from_acc(w: &AccVector) -> Result<OrientedSphere, SpheresError> {
    if let Some(exact) = &w.exact {
        let tail_norm2: Rational =
            exact[2..].iter().map(|t| t * t).fold(Rational::zero(), |a, b| a + b);
        let residual = &exact[0] * &exact[1] - tail_norm2 + rat(1);
        if !residual.is_zero() {
            return Err(SpheresError::InconsistentAcc);
        }
    } else {
        let e = &w.entries;
        let tail_norm2: f64 = e[2..].iter().map(|t| t * t).sum();
        let residual = e[0] * e[1] - tail_norm2 + 1.0;
        let scale = 1f64.max((e[0] * e[1]).abs()).max(tail_norm2);
        if residual.abs() > GEOM_TOL * scale {
            return Err(SpheresError::InconsistentAcc);
        }
    }

    let e = &w.entries;
    let b = e[1];
    let is_plane = match &w.exact {
        Some(exact) => exact[1].is_zero(),
        None => b.abs() <= ROUND_TRIP_TOL,
    };
    if is_plane {
        // Normalization forces a unit tail; renormalize so the stored
        // normal is unit to machine precision.
        let norm = e[2..].iter().map(|t| t * t).sum::<f64>().sqrt();
        let unit_normal: Vec<f64> = e[2..].iter().map(|t| t / norm).collect();
        let offset_m = e[0] / 2.0 / norm;
        Ok(OrientedSphere::Hyperplane { unit_normal, offset_m })
    } else {
        let center: Vec<f64> = e[2..].iter().map(|t| t / b).collect();
        Ok(OrientedSphere::Sphere { center, oriented_radius: 1.0 / b })
    }
}

/// Inversion in the unit sphere about the origin.
///
/// On coordinate vectors this swaps the first two entries; geometrically a
/// sphere maps to the sphere with center `x/(|x|² − r²)` and oriented
/// radius `r/(|x|² − r²)`, a sphere through the origin maps to a
/// hyperplane, and hyperplanes map back accordingly.
pub fn invert_in_unit_sphere(s: &OrientedSphere) -> Result<OrientedSphere, SpheresError> {
    sphere_from_acc(&acc_coords(s).swap_first_two())
}

/// Separation of two oriented spheres or hyperplanes, by geometric case.
///
/// Sphere/sphere: `(d² − r₁² − r₂²)/(2r₁r₂)` with oriented radii (the sign
/// rule for mixed orientations is carried by the signs of the radii).
/// Sphere/hyperplane: signed distance from the center to the plane,
/// measured positively on the exterior side for an inward sphere, divided
/// by the oriented radius. Hyperplane/hyperplane: minus the cosine of the
/// angle between the designated normals.
///
/// Externally tangent spheres with matching orientation have separation
/// +1, internally tangent spheres with matching orientation −1, and
/// orthogonal spheres 0. Separation is invariant under inversions,
/// translations, dilations, and rotations.
pub fn separation(c1: &OrientedSphere, c2: &OrientedSphere) -> f64 {
    assert_eq!(c1.dim(), c2.dim(), "separation requires matching ambient dimensions");
    match (c1, c2) {
        (
            OrientedSphere::Sphere { center: x1, oriented_radius: r1 },
            OrientedSphere::Sphere { center: x2, oriented_radius: r2 },
        ) => {
            let d2: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2 - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
        }
        (
            OrientedSphere::Sphere { center, oriented_radius },
            OrientedSphere::Hyperplane { unit_normal, offset_m },
        )
        | (
            OrientedSphere::Hyperplane { unit_normal, offset_m },
            OrientedSphere::Sphere { center, oriented_radius },
        ) => {
            let h_dot_x: f64 = unit_normal.iter().zip(center).map(|(h, x)| h * x).sum();
            (offset_m - h_dot_x) / oriented_radius
        }
        (
            OrientedSphere::Hyperplane { unit_normal: h1, .. },
            OrientedSphere::Hyperplane { unit_normal: h2, .. },
        ) => -h1.iter().zip(h2).map(|(a, b)| a * b).sum::<f64>(),
    }
}

/// Separation evaluated on coordinate vectors as the bilinear value
/// `−½·w₁ᵀ·K·w₂` with `K = [[0,−1,0],[−1,0,0],[0,0,2Iₙ]]`, i.e.
/// `(w₁₀w₂₁ + w₁₁w₂₀)/2 − tail₁·tail₂`.
///
/// The sign is chosen so the value agrees with the geometric
/// [`separation`] in every case; evaluating `+½·wᵀKw` instead negates all
/// values. Exact inputs give an exact result.
pub fn separation_acc(w1: &AccVector, w2: &AccVector) -> Result<Scalar, SpheresError> {
    if w1.entries.len() != w2.entries.len() {
        return Err(SpheresError::DimensionMismatch);
    }
    if let (Some(e1), Some(e2)) = (&w1.exact, &w2.exact) {
        let tail: Rational = e1[2..]
            .iter()
            .zip(&e2[2..])
            .map(|(a, b)| a * b)
            .fold(Rational::zero(), |a, b| a + b);
        let value = (&e1[0] * &e2[1] + &e1[1] * &e2[0]) / rat(2) - tail;
        return Ok(Scalar::Exact(value));
    }
    let a = &w1.entries;
    let b = &w2.entries;
    let tail: f64 = a[2..].iter().zip(&b[2..]).map(|(x, y)| x * y).sum();
    Ok(Scalar::Float((a[0] * b[1] + a[1] * b[0]) / 2.0 - tail))
}

/// Orientation choice for the orthogonal sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationPick {
    Inward,
    Outward,
}

/// Squared curvature of the sphere orthogonal to n+1 pairwise tangent
/// spheres with the given oriented curvatures (ambient dimension
/// n = len − 1): `q² = ½((Σb)²/(n−1) − Σb²)`.
pub fn orthogonal_curvature_sq(curvatures: &[f64]) -> f64 {
    let n = curvatures.len() - 1;
    let sum: f64 = curvatures.iter().sum();
    let sum_sq: f64 = curvatures.iter().map(|b| b * b).sum();
    0.5 * (sum * sum / (n as f64 - 1.0) - sum_sq)
}

/// Exact version of [`orthogonal_curvature_sq`] for rational curvatures.
pub fn orthogonal_curvature_sq_exact(curvatures: &[Rational]) -> Rational {
    let n = curvatures.len() - 1;
    let sum: Rational = curvatures.iter().fold(Rational::zero(), |a, b| a + b);
    let sum_sq: Rational = curvatures.iter().map(|b| b * b).fold(Rational::zero(), |a, b| a + b);
    (&sum * &sum / rat(n as i64 - 1) - sum_sq) / rat(2)
}

/// Apply `K = [[0,−1,0],[−1,0,0],[0,0,2Iₙ]]` to a coordinate vector.
fn k_apply(w: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len());
    out.push(-w[1]);
    out.push(-w[0]);
    out.extend(w[2..].iter().map(|t| 2.0 * t));
    out
}

/// `vᵀKv` for a float coordinate vector.
fn k_self(v: &[f64]) -> f64 {
    -2.0 * v[0] * v[1] + 2.0 * v[2..].iter().map(|t| t * t).sum::<f64>()
}

/// One-dimensional nullspace of a full-row-rank homogeneous system, by
/// Gauss-Jordan elimination with partial pivoting. Errors when the
/// nullspace is not exactly one-dimensional.
fn nullspace_vector(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>, SpheresError> {
    let rows = a.len();
    let cols = a[0].len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let pivot_tol = 1e-10 * scale;

    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, best_val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if best_val <= pivot_tol {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for cc in c..cols {
            a[r][cc] /= p;
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0.0 {
                let f = a[i][c];
                for cc in c..cols {
                    a[i][cc] -= f * a[r][cc];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }

    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    if free.len() != 1 {
        return Err(SpheresError::DegenerateInput);
    }
    let fc = free[0];
    let mut v = vec![0.0; cols];
    v[fc] = 1.0;
    for (k, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -a[k][fc];
    }
    Ok(v)
}

/// The sphere orthogonal to n+1 pairwise tangent spheres in ℝⁿ.
///
/// Two routes are run and must agree: a linear solve of the n+1
/// orthogonality conditions (zero separation against each input), and the
/// closed forms `q² = ½((Σb)²/(n−1) − Σb²)` for the squared curvature and
/// `q²·x = −½·Σⱼ(bⱼ − Σb/(n−1))·tailⱼ` for the center, where `tailⱼ` is
/// the trailing block of the j-th coordinate vector. Disagreement beyond
/// tolerance is an error, as is a rank-deficient system (coincident
/// tangency points) or `q² < 0`. A zero `q²` yields a hyperplane.
pub fn orthogonal_sphere(
    spheres: &[OrientedSphere],
    pick: OrientationPick,
) -> Result<OrientedSphere, SpheresError> {
    if spheres.is_empty() {
        return Err(SpheresError::DimensionMismatch);
    }
    let n = spheres[0].dim();
    if n < 2 || spheres.len() != n + 1 || spheres.iter().any(|s| s.dim() != n) {
        return Err(SpheresError::DimensionMismatch);
    }

    let accs: Vec<AccVector> = spheres.iter().map(acc_coords).collect();
    let system: Vec<Vec<f64>> = accs.iter().map(|w| k_apply(w.entries())).collect();
    let raw = nullspace_vector(system)?;

    let c = k_self(&raw);
    let raw_norm2: f64 = raw.iter().map(|x| x * x).sum();
    if c <= GEOM_TOL * raw_norm2 {
        // Isotropic or negative: no real sphere satisfies the conditions.
        return Err(SpheresError::DegenerateInput);
    }
    let s_factor = (2.0 / c).sqrt();
    let v: Vec<f64> = raw.iter().map(|x| x * s_factor).collect();

    // Closed forms from the curvatures and coordinate tails.
    let curvatures: Vec<f64> = spheres.iter().map(|s| s.curvature()).collect();
    let qq = orthogonal_curvature_sq(&curvatures);
    let sum_b: f64 = curvatures.iter().sum();
    let mut qq_center = vec![0.0; n];
    for (j, w) in accs.iter().enumerate() {
        let coef = -0.5 * (curvatures[j] - sum_b / (n as f64 - 1.0));
        for (i, t) in w.entries()[2..].iter().enumerate() {
            qq_center[i] += coef * t;
        }
    }

    let v_scale = v.iter().map(|x| x.abs()).fold(1.0f64, f64::max);
    if v[1].abs() > GEOM_TOL * v_scale {
        // Sphere case. Curvature of the solution is ±√(q²).
        let qq_solved = v[1] * v[1];
        if qq <= 0.0 || (qq_solved - qq).abs() > GEOM_TOL * qq.abs().max(qq_solved).max(1.0) {
            return Err(SpheresError::CrossCheckFailed);
        }
        let center: Vec<f64> = v[2..].iter().map(|t| t / v[1]).collect();
        let center_scale = qq_center
            .iter()
            .map(|x| x.abs())
            .fold(1.0f64, f64::max)
            .max(qq.abs());
        for i in 0..n {
            if (qq * center[i] - qq_center[i]).abs() > GEOM_TOL * center_scale {
                return Err(SpheresError::CrossCheckFailed);
            }
        }
        let magnitude = v[1].abs();
        let b = match pick {
            OrientationPick::Inward => magnitude,
            OrientationPick::Outward => -magnitude,
        };
        Ok(OrientedSphere::Sphere { center, oriented_radius: 1.0 / b })
    } else {
        // Hyperplane case; the closed form must agree that q² = 0.
        if qq.abs() > GEOM_TOL * (sum_b * sum_b).max(1.0) {
            return Err(SpheresError::CrossCheckFailed);
        }
        let norm = v[2..].iter().map(|t| t * t).sum::<f64>().sqrt();
        let mut unit_normal: Vec<f64> = v[2..].iter().map(|t| t / norm).collect();
        let mut offset_m = v[0] / 2.0 / norm;
        // Hyperplanes carry no inward/outward distinction; the pick fixes
        // a deterministic representative by the sign of the first
        // non-negligible normal coordinate.
        let lead = unit_normal.iter().find(|h| h.abs() > GEOM_TOL).copied().unwrap_or(1.0);
        let want_positive = pick == OrientationPick::Inward;
        if (lead > 0.0) != want_positive {
            for h in &mut unit_normal {
                *h = -*h;
            }
            offset_m = -offset_m;
        }
        Ok(OrientedSphere::Hyperplane { unit_normal, offset_m })
    }
}

/// The dual family of a pairwise unit-separated family of n+2 oriented
/// spheres in ℝⁿ: the j-th output is orthogonal to every input except the
/// j-th.
///
/// Orientations are assigned so the outputs are mutually equiseparated at
/// `+1/(n−1)`; the remaining global sign is fixed by majority: when the
/// input family is inwardly oriented on balance the output keeps the
/// sign with more inward spheres (for an all-inward input that leaves
/// exactly one outward dual, the one of largest radius), and an input
/// with an outward majority gets the mirrored choice.
pub fn dual_configuration(
    spheres: &[OrientedSphere],
) -> Result<Vec<OrientedSphere>, SpheresError> {
    if spheres.is_empty() {
        return Err(SpheresError::DimensionMismatch);
    }
    let n = spheres[0].dim();
    if n < 2 || spheres.len() != n + 2 || spheres.iter().any(|s| s.dim() != n) {
        return Err(SpheresError::DimensionMismatch);
    }
    for i in 0..spheres.len() {
        for j in i + 1..spheres.len() {
            if (separation(&spheres[i], &spheres[j]) - 1.0).abs() > CONFIG_TOL {
                return Err(SpheresError::NotEquiseparated);
            }
        }
    }

    let mut duals: Vec<OrientedSphere> = Vec::with_capacity(n + 2);
    for j in 0..n + 2 {
        let others: Vec<OrientedSphere> = spheres
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, s)| s.clone())
            .collect();
        duals.push(orthogonal_sphere(&others, OrientationPick::Inward)?);
    }

    // Fix relative orientations: with consistent signs every pairwise
    // separation among the duals is +1/(n−1).
    for j in 1..duals.len() {
        if separation(&duals[0], &duals[j]) < 0.0 {
            duals[j] = duals[j].reversed();
        }
    }

    // Global sign by majority of inward spheres; hyperplanes count for
    // neither side. The input's majority decides which way to lean.
    let input_lean: i64 = spheres
        .iter()
        .map(|s| match s {
            OrientedSphere::Sphere { oriented_radius, .. } => (*oriented_radius).signum() as i64,
            OrientedSphere::Hyperplane { .. } => 0,
        })
        .sum();
    let dual_lean: i64 = duals
        .iter()
        .map(|s| match s {
            OrientedSphere::Sphere { oriented_radius, .. } => (*oriented_radius).signum() as i64,
            OrientedSphere::Hyperplane { .. } => 0,
        })
        .sum();
    let want_inward_majority = input_lean >= 0;
    if (dual_lean < 0) == want_inward_majority {
        for d in duals.iter_mut() {
            *d = d.reversed();
        }
    }

    // Verify the defining properties before handing the family back.
    let target = 1.0 / (n as f64 - 1.0);
    for i in 0..duals.len() {
        for j in i + 1..duals.len() {
            if (separation(&duals[i], &duals[j]) - target).abs() > GEOM_TOL {
                return Err(SpheresError::NotEquiseparated);
            }
        }
    }
    for (j, d) in duals.iter().enumerate() {
        for (i, s) in spheres.iter().enumerate() {
            if i != j && separation(d, s).abs() > GEOM_TOL {
                return Err(SpheresError::CrossCheckFailed);
            }
        }
    }
    Ok(duals)
}

/// How two oriented spheres or hyperplanes meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Coincident,
    Tangent,
    Disjoint,
    Crossing,
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PairClass::Coincident => "coincident",
            PairClass::Tangent => "tangent",
            PairClass::Disjoint => "disjoint",
            PairClass::Crossing => "crossing",
        };
        write!(f, "{name}")
    }
}

/// Classify how two oriented spheres or hyperplanes meet, by |separation|:
/// below 1 they cross, at 1 (within tolerance) they are tangent, above 1
/// disjoint. Coincidence (same point set with the same orientation) is
/// checked first on coordinates.
pub fn classify_pair(c1: &OrientedSphere, c2: &OrientedSphere) -> PairClass {
    assert_eq!(c1.dim(), c2.dim(), "classify_pair requires matching ambient dimensions");
    let coincident = match (c1, c2) {
        (
            OrientedSphere::Sphere { center: x1, oriented_radius: r1 },
            OrientedSphere::Sphere { center: x2, oriented_radius: r2 },
        ) => {
            let scale = 1f64.max(r1.abs()).max(r2.abs());
            (r1 - r2).abs() <= GEOM_TOL * scale
                && x1
                    .iter()
                    .zip(x2)
                    .all(|(a, b)| (a - b).abs() <= GEOM_TOL * scale.max(a.abs()).max(b.abs()))
        }
        (
            OrientedSphere::Hyperplane { unit_normal: h1, offset_m: m1 },
            OrientedSphere::Hyperplane { unit_normal: h2, offset_m: m2 },
        ) => {
            (m1 - m2).abs() <= GEOM_TOL * 1f64.max(m1.abs()).max(m2.abs())
                && h1.iter().zip(h2).all(|(a, b)| (a - b).abs() <= GEOM_TOL)
        }
        _ => false,
    };
    if coincident {
        return PairClass::Coincident;
    }
    let delta = separation(c1, c2).abs();
    if delta < 1.0 - GEOM_TOL {
        PairClass::Crossing
    } else if (delta - 1.0).abs() <= GEOM_TOL {
        PairClass::Tangent
    } else {
        PairClass::Disjoint
    }
}

/// JSON record for a sphere or hyperplane:
/// `{"kind":"sphere","center":[…],"radius":r}` or
/// `{"kind":"hyperplane","normal":[…],"offset":m}`.
pub fn sphere_to_json(s: &OrientedSphere) -> Value {
    match s {
        OrientedSphere::Sphere { center, oriented_radius } => json!({
            "kind": "sphere",
            "center": center,
            "radius": oriented_radius,
        }),
        OrientedSphere::Hyperplane { unit_normal, offset_m } => json!({
            "kind": "hyperplane",
            "normal": unit_normal,
            "offset": offset_m,
        }),
    }
}

fn json_f64_array(v: &Value, field: &str) -> Result<Vec<f64>, SpheresError> {
    let arr = v
        .get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| SpheresError::BadRecord(format!("missing array field '{field}'")))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| SpheresError::BadRecord(format!("non-numeric entry in '{field}'")))
        })
        .collect()
}

/// Parse a JSON sphere record produced by [`sphere_to_json`].
pub fn sphere_from_json(v: &Value) -> Result<OrientedSphere, SpheresError> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| SpheresError::BadRecord("missing string field 'kind'".into()))?;
    match kind {
        "sphere" => {
            let center = json_f64_array(v, "center")?;
            let radius = v
                .get("radius")
                .and_then(Value::as_f64)
                .ok_or_else(|| SpheresError::BadRecord("missing numeric field 'radius'".into()))?;
            OrientedSphere::sphere(center, radius)
        }
        "hyperplane" => {
            let normal = json_f64_array(v, "normal")?;
            let offset = v
                .get("offset")
                .and_then(Value::as_f64)
                .ok_or_else(|| SpheresError::BadRecord("missing numeric field 'offset'".into()))?;
            OrientedSphere::hyperplane(normal, offset)
        }
        other => Err(SpheresError::BadRecord(format!("unknown kind '{other}'"))),
    }
}
