//! Conformal maps of compactified n-space as right-acting matrices on
//! the coordinate side: each generator of the Möbius group (translation,
//! dilation, rotation, unit-sphere inversion) plus the orientation flip
//! corresponds to a matrix preserving the coordinate form, and the action
//! on a configuration is W ↦ W·V⁻¹.
//!
//! Generator data is rational here, which keeps the action exact on
//! exact configurations; rotations therefore take rational orthogonal
//! matrices (signed permutations, Pythagorean-triple rotations). Float
//! configurations go through the same matrices via the float mirror.

use crate::configs::{validate_exact, validate_float, ConfigsError, DescartesConfig};
use crate::exactq::{
    congruence, inverse, mat_mul, rat, rational_from_str, ratio, ExactqError, Rational,
    RationalMatrix,
};
use crate::forms::{wilker_form, FormsError};
use num_traits::{ToPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum MoebiusError {
    /// Generator data does not fit the ambient dimension.
    DimensionMismatch,
    /// Dilation ratio must be positive.
    NonPositiveDilation,
    /// Rotation matrix is not orthogonal.
    NotOrthogonal,
    /// The matrix does not preserve the coordinate form.
    NotAutomorphism,
    /// A generator string could not be parsed.
    BadGenString(String),
    Configs(ConfigsError),
    Exactq(ExactqError),
    Forms(FormsError),
}

impl fmt::Display for MoebiusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoebiusError::DimensionMismatch => {
                write!(f, "generator data does not fit the dimension")
            }
            MoebiusError::NonPositiveDilation => write!(f, "dilation ratio must be positive"),
            MoebiusError::NotOrthogonal => write!(f, "rotation matrix is not orthogonal"),
            MoebiusError::NotAutomorphism => {
                write!(f, "matrix does not preserve the coordinate form")
            }
            MoebiusError::BadGenString(s) => write!(f, "bad generator string: {s}"),
            MoebiusError::Configs(e) => write!(f, "{e}"),
            MoebiusError::Exactq(e) => write!(f, "{e}"),
            MoebiusError::Forms(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MoebiusError {}

impl From<ConfigsError> for MoebiusError {
    fn from(e: ConfigsError) -> Self {
        MoebiusError::Configs(e)
    }
}

impl From<ExactqError> for MoebiusError {
    fn from(e: ExactqError) -> Self {
        MoebiusError::Exactq(e)
    }
}

impl From<FormsError> for MoebiusError {
    fn from(e: FormsError) -> Self {
        MoebiusError::Forms(e)
    }
}

/// One Möbius generator (or the orientation flip) with rational data.
#[derive(Debug, Clone, PartialEq)]
pub enum MoebiusGen {
    /// y ↦ y + y₀.
    Translation { y0: Vec<Rational> },
    /// y ↦ r·y with r > 0.
    Dilation { r: Rational },
    /// y ↦ O·y with O orthogonal.
    Rotation { o: RationalMatrix },
    /// y ↦ y/|y|².
    UnitInversion,
    /// The central element −I: reverses total orientation, not conformal.
    Flip,
}

/// The right-action matrix V⁻¹ of a generator on coordinate rows,
/// verified exactly to preserve the coordinate form.
pub fn wilker_matrix(g: &MoebiusGen, n: usize) -> Result<RationalMatrix, MoebiusError> {
    if n < 2 {
        return Err(MoebiusError::DimensionMismatch);
    }
    let dim = n + 2;
    let v = match g {
        MoebiusGen::Translation { y0 } => {
            if y0.len() != n {
                return Err(MoebiusError::DimensionMismatch);
            }
            // Row 2 carries (|y₀|², 1, y₀ᵀ); column 1 carries 2·y₀ below it.
            let mut m = RationalMatrix::identity(dim);
            let norm2: Rational =
                y0.iter().map(|y| y * y).fold(Rational::zero(), |a, x| a + x);
            m.set(1, 0, norm2);
            for (i, y) in y0.iter().enumerate() {
                m.set(1, 2 + i, y.clone());
                m.set(2 + i, 0, rat(2) * y);
            }
            m
        }
        MoebiusGen::Dilation { r } => {
            if *r <= Rational::zero() {
                return Err(MoebiusError::NonPositiveDilation);
            }
            let mut m = RationalMatrix::identity(dim);
            m.set(0, 0, r.clone());
            m.set(1, 1, rat(1) / r);
            m
        }
        MoebiusGen::Rotation { o } => {
            if o.rows() != n || o.cols() != n {
                return Err(MoebiusError::DimensionMismatch);
            }
            let product = mat_mul(&o.transpose(), o)?;
            if product != RationalMatrix::identity(n) {
                return Err(MoebiusError::NotOrthogonal);
            }
            // Tail block is Oᵀ: row coordinates transform by w ↦ w·Oᵀ.
            let mut m = RationalMatrix::identity(dim);
            for i in 0..n {
                for j in 0..n {
                    m.set(2 + i, 2 + j, o.at(j, i).clone());
                }
            }
            m
        }
        MoebiusGen::UnitInversion => {
            let mut m = RationalMatrix::identity(dim);
            m.set(0, 0, rat(0));
            m.set(1, 1, rat(0));
            m.set(0, 1, rat(1));
            m.set(1, 0, rat(1));
            m
        }
        MoebiusGen::Flip => RationalMatrix::identity(dim).neg(),
    };
    let qw = wilker_form(n)?;
    if congruence(&v, &qw.matrix)? != qw.matrix {
        return Err(MoebiusError::NotAutomorphism);
    }
    Ok(v)
}

/// Apply a generator sequence to a configuration: W ↦ W·V₁⁻¹·V₂⁻¹·….
/// The result re-validates; exactness follows the input representation.
pub fn apply_moebius(
    config: &DescartesConfig,
    gens: &[MoebiusGen],
) -> Result<DescartesConfig, MoebiusError> {
    let n = config.n();
    let dim = n + 2;
    let mut total = RationalMatrix::identity(dim);
    for g in gens {
        total = mat_mul(&total, &wilker_matrix(g, n)?)?;
    }
    match config.exact_matrix() {
        Some(w) => Ok(validate_exact(n, mat_mul(w, &total)?)?),
        None => {
            let rows = config.rows_f64();
            let mut out = vec![vec![0.0; dim]; dim];
            for i in 0..dim {
                for k in 0..dim {
                    let wik = rows[i][k];
                    if wik != 0.0 {
                        for j in 0..dim {
                            out[i][j] += wik * total.at(k, j).to_f64().unwrap_or(f64::NAN);
                        }
                    }
                }
            }
            Ok(validate_float(n, out)?)
        }
    }
}

/// Whether a coordinate-form automorphism preserves the time direction:
/// conjugating by the intertwiner to the Lorentz side (its √2 scale factor
/// cancels) must leave the (1,1) entry positive. Errors when the input is
/// not an automorphism of the coordinate form.
pub fn isochronous_test(v: &RationalMatrix, n: usize) -> Result<bool, MoebiusError> {
    if n < 2 || v.rows() != n + 2 || v.cols() != n + 2 {
        return Err(MoebiusError::DimensionMismatch);
    }
    let qw = wilker_form(n)?;
    if congruence(v, &qw.matrix)? != qw.matrix {
        return Err(MoebiusError::NotAutomorphism);
    }
    let dim = n + 2;
    let mut a = RationalMatrix::identity(dim);
    a.set(0, 0, rat(1));
    a.set(0, 1, rat(1));
    a.set(1, 0, rat(-1));
    a.set(1, 1, rat(1));
    let a_inv = inverse(&a)?;
    let conjugated = mat_mul(&mat_mul(&a, v)?, &a_inv)?;
    Ok(*conjugated.at(0, 0) > Rational::zero())
}

/// Parse a semicolon-separated generator string: `t:…,…` translation with
/// one rational per coordinate, `d:…` dilation, `j` unit inversion, `f`
/// flip. Example for the plane: `"t:0.5,0;d:2;j;f"`.
pub fn parse_gen_string(n: usize, text: &str) -> Result<Vec<MoebiusGen>, MoebiusError> {
    let mut gens = Vec::new();
    for token in text.split(';') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        match token.split_once(':') {
            None => match token {
                "j" => gens.push(MoebiusGen::UnitInversion),
                "f" => gens.push(MoebiusGen::Flip),
                other => return Err(MoebiusError::BadGenString(other.to_string())),
            },
            Some(("t", args)) => {
                let y0: Result<Vec<Rational>, MoebiusError> = args
                    .split(',')
                    .map(|s| {
                        rational_from_str(s)
                            .map_err(|_| MoebiusError::BadGenString(token.to_string()))
                    })
                    .collect();
                let y0 = y0?;
                if y0.len() != n {
                    return Err(MoebiusError::BadGenString(token.to_string()));
                }
                gens.push(MoebiusGen::Translation { y0 });
            }
            Some(("d", args)) => {
                let r = rational_from_str(args)
                    .map_err(|_| MoebiusError::BadGenString(token.to_string()))?;
                gens.push(MoebiusGen::Dilation { r });
            }
            Some(_) => return Err(MoebiusError::BadGenString(token.to_string())),
        }
    }
    Ok(gens)
}
