//! Ordered, oriented families of n+2 pairwise tangent spheres in ℝⁿ,
//! stored as the (n+2)×(n+2) matrix whose rows are the members'
//! curvature-center coordinate vectors.
//!
//! A matrix W names such a family exactly when WᵀQ_D W = Q_W, where Q_D
//! is the curvature quadratic form and Q_W the coordinate-side form; the
//! (2,2) entry of that identity is the curvature relation
//! Σbᵢ² = (1/n)(Σbᵢ)². Configurations built from exact rational data keep
//! an exact matrix alongside the float mirror, and every operation here
//! preserves that representation tag.

use crate::exactq::{
    congruence, matrix_from_json, matrix_to_json, rat, rational_from_str, rational_to_string,
    ExactqError, Rational, RationalMatrix,
};
use crate::forms::{descartes_form, wilker_form, FormsError};
use crate::spheres::{
    acc_coords, dual_configuration, sphere_from_acc, AccVector, OrientedSphere, SpheresError,
};
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use std::fmt;

/// Tolerance for the defining matrix identity on float configurations,
/// relative to the squared magnitude of the entries.
pub const VALIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigsError {
    /// The matrix is not (n+2)×(n+2) for the stated n, or n < 2.
    Shape,
    /// The defining identity WᵀQ_D W = Q_W fails; carries the largest
    /// entry residual.
    IdentityViolated(f64),
    /// The curvature column sums to zero, so no total orientation exists.
    ZeroCurvatureSum,
    /// A row permutation was requested with an invalid permutation.
    InvalidPermutation,
    /// Supplied exact curvatures disagree with the float mirror.
    CurvatureMismatch,
    /// Exact data was requested from a float-backed configuration.
    NotExact,
    /// A JSON record is missing fields or has the wrong shape.
    BadRecord(String),
    Exactq(ExactqError),
    Forms(FormsError),
    Spheres(SpheresError),
}

impl fmt::Display for ConfigsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigsError::Shape => write!(f, "matrix shape does not match the stated dimension"),
            ConfigsError::IdentityViolated(r) => {
                write!(f, "defining identity violated, max residual {r:e}")
            }
            ConfigsError::ZeroCurvatureSum => {
                write!(f, "curvature sum is zero, total orientation undefined")
            }
            ConfigsError::InvalidPermutation => write!(f, "invalid permutation"),
            ConfigsError::CurvatureMismatch => {
                write!(f, "exact curvatures disagree with the float mirror")
            }
            ConfigsError::NotExact => {
                write!(f, "exact data requested from a float-backed configuration")
            }
            ConfigsError::BadRecord(msg) => write!(f, "bad configuration record: {msg}"),
            ConfigsError::Exactq(e) => write!(f, "{e}"),
            ConfigsError::Forms(e) => write!(f, "{e}"),
            ConfigsError::Spheres(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigsError {}

impl From<ExactqError> for ConfigsError {
    fn from(e: ExactqError) -> Self {
        ConfigsError::Exactq(e)
    }
}

impl From<FormsError> for ConfigsError {
    fn from(e: FormsError) -> Self {
        ConfigsError::Forms(e)
    }
}

impl From<SpheresError> for ConfigsError {
    fn from(e: SpheresError) -> Self {
        ConfigsError::Spheres(e)
    }
}

/// An ordered, oriented Descartes configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DescartesConfig {
    n: usize,
    /// Float mirror of the coordinate matrix, always populated.
    rows: Vec<Vec<f64>>,
    /// Exact matrix when the configuration came from exact data.
    exact: Option<RationalMatrix>,
    /// Exact curvature column for float-backed configurations whose
    /// curvatures are nonetheless rational (the strip seeds have integer
    /// curvatures even when the centers are irrational). Redundant when
    /// the exact matrix is present.
    exact_curvatures: Option<Vec<Rational>>,
    /// Sign of the curvature sum: +1 positive total orientation, −1 negative.
    orientation: i8,
}

fn float_rows_of(m: &RationalMatrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).to_f64().unwrap_or(f64::NAN)).collect())
        .collect()
}

/// Q_D as a float matrix: 1 − 1/n on the diagonal, −1/n off it.
fn descartes_form_f64(n: usize) -> Vec<Vec<f64>> {
    let dim = n + 2;
    let y = 1.0 / n as f64;
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 - y } else { -y }).collect())
        .collect()
}

/// Q_W as a float matrix.
fn wilker_form_f64(n: usize) -> Vec<Vec<f64>> {
    let dim = n + 2;
    let mut m = vec![vec![0.0; dim]; dim];
    m[0][1] = -4.0;
    m[1][0] = -4.0;
    for i in 2..dim {
        m[i][i] = 2.0;
    }
    m
}

fn congruence_f64(w: &[Vec<f64>], q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = w.len();
    // t = q · w
    let mut t = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for k in 0..dim {
            let qik = q[i][k];
            if qik != 0.0 {
                for j in 0..dim {
                    t[i][j] += qik * w[k][j];
                }
            }
        }
    }
    // wᵀ · t
    let mut out = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for k in 0..dim {
            let wki = w[k][i];
            if wki != 0.0 {
                for j in 0..dim {
                    out[i][j] += wki * t[k][j];
                }
            }
        }
    }
    out
}

/// Validate an exact coordinate matrix as a Descartes configuration.
pub fn validate_exact(n: usize, w: RationalMatrix) -> Result<DescartesConfig, ConfigsError> {
    if n < 2 || w.rows() != n + 2 || w.cols() != n + 2 {
        return Err(ConfigsError::Shape);
    }
    let qd = descartes_form(n)?;
    let qw = wilker_form(n)?;
    let image = congruence(&w, &qd.matrix)?;
    if image != qw.matrix {
        let max_residual = (0..n + 2)
            .flat_map(|i| (0..n + 2).map(move |j| (i, j)))
            .map(|(i, j)| {
                (image.at(i, j) - qw.matrix.at(i, j))
                    .to_f64()
                    .map(f64::abs)
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0f64, f64::max);
        return Err(ConfigsError::IdentityViolated(max_residual));
    }
    let curvature_sum: Rational =
        (0..n + 2).map(|i| w.at(i, 1).clone()).fold(Rational::zero(), |a, b| a + b);
    if curvature_sum.is_zero() {
        return Err(ConfigsError::ZeroCurvatureSum);
    }
    let orientation = if curvature_sum > Rational::zero() { 1 } else { -1 };
    Ok(DescartesConfig {
        n,
        rows: float_rows_of(&w),
        exact: Some(w),
        exact_curvatures: None,
        orientation,
    })
}

/// Validate a float coordinate matrix as a Descartes configuration.
pub fn validate_float(n: usize, rows: Vec<Vec<f64>>) -> Result<DescartesConfig, ConfigsError> {
    if n < 2 || rows.len() != n + 2 || rows.iter().any(|r| r.len() != n + 2) {
        return Err(ConfigsError::Shape);
    }
    let image = congruence_f64(&rows, &descartes_form_f64(n));
    let target = wilker_form_f64(n);
    let mut max_residual = 0.0f64;
    for i in 0..n + 2 {
        for j in 0..n + 2 {
            max_residual = max_residual.max((image[i][j] - target[i][j]).abs());
        }
    }
    let magnitude = rows
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(1.0f64, f64::max);
    if max_residual > VALIDATE_TOL * magnitude * magnitude {
        return Err(ConfigsError::IdentityViolated(max_residual));
    }
    let curvature_sum: f64 = rows.iter().map(|r| r[1]).sum();
    if curvature_sum.abs() <= VALIDATE_TOL {
        return Err(ConfigsError::ZeroCurvatureSum);
    }
    let orientation = if curvature_sum > 0.0 { 1 } else { -1 };
    Ok(DescartesConfig { n, rows, exact: None, exact_curvatures: None, orientation })
}

impl DescartesConfig {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn representation(&self) -> &'static str {
        if self.is_exact() {
            "exact"
        } else {
            "float"
        }
    }

    /// +1 when the curvature sum is positive, −1 when negative.
    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn rows_f64(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn exact_matrix(&self) -> Option<&RationalMatrix> {
        self.exact.as_ref()
    }

    /// Oriented curvatures (second column).
    pub fn curvatures_f64(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[1]).collect()
    }

    /// Oriented curvatures, exactly: from the exact matrix when present,
    /// otherwise from the tracked exact curvature column.
    pub fn curvatures_exact(&self) -> Result<Vec<Rational>, ConfigsError> {
        if let Some(w) = self.exact.as_ref() {
            return Ok((0..self.n + 2).map(|i| w.at(i, 1).clone()).collect());
        }
        self.exact_curvatures.clone().ok_or(ConfigsError::NotExact)
    }

    /// Whether exact curvature data is available (full exact matrix or
    /// the tracked curvature column).
    pub fn has_exact_curvatures(&self) -> bool {
        self.exact.is_some() || self.exact_curvatures.is_some()
    }

    /// Attach an exact curvature column to a float-backed configuration.
    /// The values must agree with the float mirror.
    pub fn with_exact_curvatures(
        mut self,
        b: Vec<Rational>,
    ) -> Result<DescartesConfig, ConfigsError> {
        if b.len() != self.n + 2 {
            return Err(ConfigsError::Shape);
        }
        for (i, v) in b.iter().enumerate() {
            let approx = v.to_f64().unwrap_or(f64::NAN);
            let scale = approx.abs().max(1.0);
            if (approx - self.rows[i][1]).abs() > 1e-6 * scale {
                return Err(ConfigsError::CurvatureMismatch);
            }
        }
        if self.exact.is_none() {
            self.exact_curvatures = Some(b);
        }
        Ok(self)
    }

    /// Coordinate vector of the i-th member, exact when the configuration is.
    pub fn acc_row(&self, i: usize) -> AccVector {
        match &self.exact {
            Some(w) => {
                AccVector::from_exact((0..self.n + 2).map(|j| w.at(i, j).clone()).collect())
                    .expect("config rows have n+2 >= 4 entries")
            }
            None => AccVector::from_f64(self.rows[i].clone())
                .expect("config rows have n+2 >= 4 entries"),
        }
    }

    /// The members as oriented spheres and hyperplanes.
    pub fn to_spheres(&self) -> Result<Vec<OrientedSphere>, ConfigsError> {
        (0..self.n + 2)
            .map(|i| sphere_from_acc(&self.acc_row(i)).map_err(ConfigsError::from))
            .collect()
    }

    /// The dual family: member j orthogonal to every member except the j-th.
    pub fn dual(&self) -> Result<Vec<OrientedSphere>, ConfigsError> {
        Ok(dual_configuration(&self.to_spheres()?)?)
    }

    /// Largest residual of the defining identity on the float mirror; a
    /// diagnostic, zero-ish for valid configurations.
    pub fn identity_residual(&self) -> f64 {
        let image = congruence_f64(&self.rows, &descartes_form_f64(self.n));
        let target = wilker_form_f64(self.n);
        let mut max_residual = 0.0f64;
        for i in 0..self.n + 2 {
            for j in 0..self.n + 2 {
                max_residual = max_residual.max((image[i][j] - target[i][j]).abs());
            }
        }
        max_residual
    }
}

/// `bᵀ·Q_D·b = Σbᵢ² − (Σbᵢ)²/n`, exactly; zero precisely on curvature
/// vectors of Descartes configurations.
pub fn soddy_gossett_residual(b: &[Rational], n: usize) -> Result<Rational, ConfigsError> {
    if n < 2 || b.len() != n + 2 {
        return Err(ConfigsError::Shape);
    }
    let sum: Rational = b.iter().fold(Rational::zero(), |a, x| a + x);
    let sum_sq: Rational = b.iter().map(|x| x * x).fold(Rational::zero(), |a, x| a + x);
    Ok(sum_sq - &sum * &sum / rat(n as i64))
}

/// Float version of [`soddy_gossett_residual`].
pub fn soddy_gossett_residual_f64(b: &[f64], n: usize) -> Result<f64, ConfigsError> {
    if n < 2 || b.len() != n + 2 {
        return Err(ConfigsError::Shape);
    }
    let sum: f64 = b.iter().sum();
    let sum_sq: f64 = b.iter().map(|x| x * x).sum();
    Ok(sum_sq - sum * sum / n as f64)
}

/// Vertices of a regular m-simplex in ℝᵐ with edge length 2 and centroid
/// at the origin (m+1 vertices), built by the standard recursion: drop the
/// (m−1)-simplex to height −h and add an apex at height m·h, with
/// h² = 2/(m(m+1)).
fn simplex_vertices(m: usize) -> Vec<Vec<f64>> {
    if m == 1 {
        return vec![vec![-1.0], vec![1.0]];
    }
    let prev = simplex_vertices(m - 1);
    let h = (2.0 / (m as f64 * (m as f64 + 1.0))).sqrt();
    let mut out: Vec<Vec<f64>> = prev
        .into_iter()
        .map(|mut v| {
            v.push(-h);
            v
        })
        .collect();
    let mut apex = vec![0.0; m];
    apex[m - 1] = m as f64 * h;
    out.push(apex);
    out
}

/// The canonical strip configuration with curvatures (0, 0, 1, …, 1):
/// hyperplanes x₁ = ±1 (interiors facing away from the strip) and n unit
/// spheres centered at the vertices of a regular (n−1)-simplex with edge 2
/// in the hyperplane x₁ = 0. Exact for n = 2 (all entries integers),
/// float-backed for n ≥ 3 where the simplex coordinates are irrational.
pub fn seed_polystrip(n: usize) -> Result<DescartesConfig, ConfigsError> {
    if n < 2 {
        return Err(ConfigsError::Shape);
    }
    if n == 2 {
        let w = RationalMatrix::from_i64_rows(&[
            &[2, 0, 1, 0],
            &[2, 0, -1, 0],
            &[0, 1, 0, 1],
            &[0, 1, 0, -1],
        ]);
        return validate_exact(2, w);
    }
    let dim = n + 2;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for sign in [1.0, -1.0] {
        let mut row = vec![0.0; dim];
        row[0] = 2.0;
        row[2] = sign;
        rows.push(row);
    }
    // Unit sphere at center c in the hyperplane x₁ = 0:
    // coordinates (|c|² − 1, 1, 0, c).
    for v in simplex_vertices(n - 1) {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let mut row = Vec::with_capacity(dim);
        row.push(norm2 - 1.0);
        row.push(1.0);
        row.push(0.0);
        row.extend(v);
        rows.push(row);
    }
    // The curvature column (0, 0, 1, …, 1) is exact by construction even
    // though the sphere centers are irrational.
    let mut curvatures = vec![rat(0), rat(0)];
    curvatures.resize(dim, rat(1));
    validate_float(n, rows)?.with_exact_curvatures(curvatures)
}

/// Reorder the members: row i of the result is row sigma[i] of the input.
/// Any permutation preserves validity since the curvature form is
/// symmetric under coordinate permutations.
pub fn permute(config: &DescartesConfig, sigma: &[usize]) -> Result<DescartesConfig, ConfigsError> {
    let dim = config.n + 2;
    if sigma.len() != dim {
        return Err(ConfigsError::InvalidPermutation);
    }
    let mut seen = vec![false; dim];
    for &s in sigma {
        if s >= dim || seen[s] {
            return Err(ConfigsError::InvalidPermutation);
        }
        seen[s] = true;
    }
    let rows = sigma.iter().map(|&s| config.rows[s].clone()).collect();
    let exact = match &config.exact {
        Some(w) => {
            let mut m = RationalMatrix::zeros(dim, dim);
            for (i, &s) in sigma.iter().enumerate() {
                for j in 0..dim {
                    m.set(i, j, w.at(s, j).clone());
                }
            }
            Some(m)
        }
        None => None,
    };
    let exact_curvatures = config
        .exact_curvatures
        .as_ref()
        .map(|b| sigma.iter().map(|&s| b[s].clone()).collect());
    Ok(DescartesConfig {
        n: config.n,
        rows,
        exact,
        exact_curvatures,
        orientation: config.orientation,
    })
}

/// Negate the whole coordinate matrix: the same spheres with every
/// orientation reversed, flipping the total orientation sign.
pub fn reverse_orientation(config: &DescartesConfig) -> DescartesConfig {
    let rows = config
        .rows
        .iter()
        .map(|r| r.iter().map(|x| -x).collect())
        .collect();
    let exact = config.exact.as_ref().map(|w| w.neg());
    let exact_curvatures = config
        .exact_curvatures
        .as_ref()
        .map(|b| b.iter().map(|x| -x).collect());
    DescartesConfig {
        n: config.n,
        rows,
        exact,
        exact_curvatures,
        orientation: -config.orientation,
    }
}

/// Build a configuration from n+2 oriented spheres (float-backed).
pub fn config_from_spheres(spheres: &[OrientedSphere]) -> Result<DescartesConfig, ConfigsError> {
    if spheres.is_empty() {
        return Err(ConfigsError::Shape);
    }
    let n = spheres[0].dim();
    if spheres.len() != n + 2 || spheres.iter().any(|s| s.dim() != n) {
        return Err(ConfigsError::Shape);
    }
    let rows = spheres.iter().map(|s| acc_coords(s).entries().to_vec()).collect();
    validate_float(n, rows)
}

/// JSON record: `{n, representation, orientation, W}` with exact entries
/// as rational strings and float entries as numbers. Float records carry
/// an `exact_curvatures` field when that column is tracked exactly.
pub fn config_to_json(config: &DescartesConfig) -> Value {
    let w = match &config.exact {
        Some(m) => matrix_to_json(m),
        None => json!(config.rows),
    };
    let mut record = json!({
        "n": config.n,
        "representation": config.representation(),
        "orientation": config.orientation,
        "W": w,
    });
    if config.exact.is_none() {
        if let Some(b) = &config.exact_curvatures {
            let strings: Vec<String> = b.iter().map(rational_to_string).collect();
            record["exact_curvatures"] = json!(strings);
        }
    }
    record
}

/// Parse and re-validate a JSON configuration record.
pub fn config_from_json(v: &Value) -> Result<DescartesConfig, ConfigsError> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| ConfigsError::BadRecord("missing integer field 'n'".into()))?
        as usize;
    let representation = v
        .get("representation")
        .and_then(Value::as_str)
        .ok_or_else(|| ConfigsError::BadRecord("missing string field 'representation'".into()))?;
    let w = v
        .get("W")
        .ok_or_else(|| ConfigsError::BadRecord("missing field 'W'".into()))?;
    match representation {
        "exact" => {
            let m = matrix_from_json(w)
                .map_err(|e| ConfigsError::BadRecord(format!("bad exact matrix: {e}")))?;
            validate_exact(n, m)
        }
        "float" => {
            let arr = w
                .as_array()
                .ok_or_else(|| ConfigsError::BadRecord("'W' must be an array".into()))?;
            let rows: Result<Vec<Vec<f64>>, ConfigsError> = arr
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| ConfigsError::BadRecord("'W' rows must be arrays".into()))?
                        .iter()
                        .map(|x| {
                            x.as_f64().ok_or_else(|| {
                                ConfigsError::BadRecord("non-numeric entry in 'W'".into())
                            })
                        })
                        .collect()
                })
                .collect();
            let config = validate_float(n, rows?)?;
            match v.get("exact_curvatures") {
                None => Ok(config),
                Some(field) => {
                    let arr = field.as_array().ok_or_else(|| {
                        ConfigsError::BadRecord("'exact_curvatures' must be an array".into())
                    })?;
                    let b: Result<Vec<Rational>, ConfigsError> = arr
                        .iter()
                        .map(|x| {
                            x.as_str()
                                .ok_or_else(|| {
                                    ConfigsError::BadRecord(
                                        "'exact_curvatures' entries must be strings".into(),
                                    )
                                })
                                .and_then(|s| {
                                    rational_from_str(s).map_err(|e| {
                                        ConfigsError::BadRecord(format!("bad curvature: {e}"))
                                    })
                                })
                        })
                        .collect();
                    config.with_exact_curvatures(b?)
                }
            }
        }
        other => Err(ConfigsError::BadRecord(format!("unknown representation '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::{mat_mul, ratio};
    use crate::spheres::separation;

    #[test]
    fn seed_n2_is_exact_integer_matrix() {
        let config = seed_polystrip(2).unwrap();
        assert!(config.is_exact());
        assert_eq!(config.orientation(), 1);
        let expected = RationalMatrix::from_i64_rows(&[
            &[2, 0, 1, 0],
            &[2, 0, -1, 0],
            &[0, 1, 0, 1],
            &[0, 1, 0, -1],
        ]);
        assert_eq!(config.exact_matrix().unwrap(), &expected);
    }

    #[test]
    fn seed_validates_through_dimension_eight() {
        for n in 2..=8 {
            let config = seed_polystrip(n).unwrap();
            assert_eq!(config.n(), n);
            assert!(
                config.identity_residual() <= 1e-9,
                "n={n} residual {}",
                config.identity_residual()
            );
            // Curvature vector (0, 0, 1, …, 1).
            let b = config.curvatures_f64();
            assert_eq!(b[0], 0.0);
            assert_eq!(b[1], 0.0);
            for v in &b[2..] {
                assert!((v - 1.0).abs() <= 1e-12);
            }
            assert_eq!(config.orientation(), 1);
            // Members are pairwise unit-separated.
            let spheres = config.to_spheres().unwrap();
            for i in 0..n + 2 {
                for j in i + 1..n + 2 {
                    let delta = separation(&spheres[i], &spheres[j]);
                    assert!((delta - 1.0).abs() <= 1e-9, "n={n} pair ({i},{j}): {delta}");
                }
            }
        }
    }

    #[test]
    fn validate_rejects_identity_matrix() {
        match validate_exact(2, RationalMatrix::identity(4)) {
            Err(ConfigsError::IdentityViolated(r)) => assert!(r > 0.0),
            other => panic!("expected identity violation, got {other:?}"),
        }
        let rows = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        match validate_float(2, rows) {
            Err(ConfigsError::IdentityViolated(r)) => assert!(r > 0.0),
            other => panic!("expected identity violation, got {other:?}"),
        }
    }

    #[test]
    fn negated_config_is_valid_with_negative_orientation() {
        let config = seed_polystrip(2).unwrap();
        let reversed = reverse_orientation(&config);
        assert_eq!(reversed.orientation(), -1);
        assert!(reversed.is_exact());
        let revalidated = validate_exact(2, reversed.exact_matrix().unwrap().clone()).unwrap();
        assert_eq!(revalidated.orientation(), -1);
        let double = reverse_orientation(&reversed);
        assert_eq!(&double, &config);

        let f3 = seed_polystrip(3).unwrap();
        let rev3 = reverse_orientation(&f3);
        assert!(validate_float(3, rev3.rows_f64().to_vec()).is_ok());
    }

    #[test]
    fn permutations_preserve_validity() {
        let config = seed_polystrip(2).unwrap();
        let same = permute(&config, &[0, 1, 2, 3]).unwrap();
        assert_eq!(&same, &config);
        let swapped = permute(&config, &[1, 0, 2, 3]).unwrap();
        assert!(validate_exact(2, swapped.exact_matrix().unwrap().clone()).is_ok());
        let reversed = permute(&config, &[3, 2, 1, 0]).unwrap();
        assert!(validate_exact(2, reversed.exact_matrix().unwrap().clone()).is_ok());

        assert_eq!(
            permute(&config, &[0, 0, 1, 2]),
            Err(ConfigsError::InvalidPermutation)
        );
        assert_eq!(
            permute(&config, &[0, 1, 2]),
            Err(ConfigsError::InvalidPermutation)
        );
        assert_eq!(
            permute(&config, &[0, 1, 2, 9]),
            Err(ConfigsError::InvalidPermutation)
        );
    }

    #[test]
    fn soddy_gossett_examples() {
        let zero = soddy_gossett_residual(
            &[rat(0), rat(0), rat(1), rat(1), rat(1)],
            3,
        )
        .unwrap();
        assert_eq!(zero, rat(0));
        let zero = soddy_gossett_residual(&[rat(-1), rat(2), rat(2), rat(3)], 2).unwrap();
        assert_eq!(zero, rat(0));
        let nonzero = soddy_gossett_residual(&[rat(1), rat(1), rat(1), rat(1)], 2).unwrap();
        assert_eq!(nonzero, rat(-4));
        assert_eq!(
            soddy_gossett_residual(&[rat(1), rat(1), rat(1)], 2),
            Err(ConfigsError::Shape)
        );
    }

    #[test]
    fn soddy_gossett_matches_form_evaluation() {
        // Independent route: evaluate bᵀ·Q_D·b with the actual form matrix.
        for (n, b) in [
            (2usize, vec![rat(-1), rat(2), rat(2), rat(3)]),
            (2, vec![rat(1), rat(1), rat(1), rat(1)]),
            (3, vec![rat(0), rat(0), rat(1), rat(1), rat(1)]),
            (4, vec![ratio(1, 2), rat(3), rat(-1), rat(7), rat(2), rat(5)]),
        ] {
            let direct = soddy_gossett_residual(&b, n).unwrap();
            let qd = descartes_form(n).unwrap();
            let via_form = qd.evaluate(&b).unwrap();
            assert_eq!(direct, via_form);
        }
    }

    #[test]
    fn curvature_column_satisfies_soddy_gossett() {
        for n in 2..=6 {
            let config = seed_polystrip(n).unwrap();
            let res = soddy_gossett_residual_f64(&config.curvatures_f64(), n).unwrap();
            assert!(res.abs() <= 1e-9, "n={n}: {res}");
        }
        let exact = seed_polystrip(2).unwrap();
        let res = soddy_gossett_residual(&exact.curvatures_exact().unwrap(), 2).unwrap();
        assert_eq!(res, rat(0));
    }

    #[test]
    fn dual_of_plane_config_matches_curvature_form_action() {
        // In the plane the dual family's coordinate matrix is ±Q_D·W; the
        // production path goes through per-member orthogonal spheres, so
        // agreement here is a genuine cross-check.
        let config = seed_polystrip(2).unwrap();
        let duals = config.dual().unwrap();
        assert_eq!(duals.len(), 4);

        let qd = descartes_form(2).unwrap();
        let action = mat_mul(&qd.matrix, config.exact_matrix().unwrap()).unwrap();
        for sign in [1.0, -1.0] {
            let all_match = duals.iter().enumerate().all(|(i, d)| {
                let w = acc_coords(d);
                (0..4).all(|j| {
                    let predicted = sign * action.at(i, j).to_f64().unwrap();
                    (w.entries()[j] - predicted).abs() <= 1e-9
                })
            });
            if all_match {
                return;
            }
        }
        panic!("dual coordinates do not match ±Q_D·W");
    }

    #[test]
    fn config_from_spheres_round_trip() {
        let config = seed_polystrip(3).unwrap();
        let spheres = config.to_spheres().unwrap();
        let rebuilt = config_from_spheres(&spheres).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!(
                    (rebuilt.rows_f64()[i][j] - config.rows_f64()[i][j]).abs() <= 1e-9,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let exact = seed_polystrip(2).unwrap();
        let v = config_to_json(&exact);
        assert_eq!(v["representation"], "exact");
        let back = config_from_json(&v).unwrap();
        assert_eq!(back, exact);

        let float = seed_polystrip(3).unwrap();
        let v = config_to_json(&float);
        assert_eq!(v["representation"], "float");
        let back = config_from_json(&v).unwrap();
        assert_eq!(back.n(), 3);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(back.rows_f64()[i][j], float.rows_f64()[i][j]);
            }
        }

        assert!(matches!(
            config_from_json(&json!({"n": 2, "representation": "octonion", "W": []})),
            Err(ConfigsError::BadRecord(_))
        ));
    }

    #[test]
    fn acc_rows_carry_exactness() {
        let exact = seed_polystrip(2).unwrap();
        assert!(exact.acc_row(0).exact_entries().is_some());
        let float = seed_polystrip(3).unwrap();
        assert!(float.acc_row(0).exact_entries().is_none());
        // The full matrix is float-backed but the curvature column is
        // tracked exactly.
        assert_eq!(
            float.curvatures_exact().unwrap(),
            vec![rat(0), rat(0), rat(1), rat(1), rat(1)]
        );
        let from_spheres = config_from_spheres(&float.to_spheres().unwrap()).unwrap();
        assert!(!from_spheres.has_exact_curvatures());
        assert_eq!(from_spheres.curvatures_exact(), Err(ConfigsError::NotExact));
    }

    #[test]
    fn exact_curvature_column_survives_json_and_reordering() {
        let float = seed_polystrip(4).unwrap();
        let v = config_to_json(&float);
        assert!(v.get("exact_curvatures").is_some());
        let back = config_from_json(&v).unwrap();
        assert_eq!(back.curvatures_exact().unwrap(), float.curvatures_exact().unwrap());

        let sigma = [5, 4, 3, 2, 1, 0];
        let permuted = permute(&float, &sigma).unwrap();
        assert_eq!(
            permuted.curvatures_exact().unwrap(),
            vec![rat(1), rat(1), rat(1), rat(1), rat(0), rat(0)]
        );
        let reversed = reverse_orientation(&float);
        assert_eq!(
            reversed.curvatures_exact().unwrap(),
            vec![rat(0), rat(0), rat(-1), rat(-1), rat(-1), rat(-1)]
        );

        let mismatched = validate_float(3, seed_polystrip(3).unwrap().rows_f64().to_vec())
            .unwrap()
            .with_exact_curvatures(vec![rat(9), rat(0), rat(1), rat(1), rat(1)]);
        assert_eq!(mismatched, Err(ConfigsError::CurvatureMismatch));
    }
}
