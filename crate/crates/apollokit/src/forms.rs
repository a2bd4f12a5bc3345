//! The Descartes, Wilker, and Lorentz quadratic forms, known conjugating
//! matrices between them, and exact rational diagonalization.

use crate::exactq::{
    congruence, determinant, mat_mul, rat, ratio, ExactqError, Rational, RationalMatrix,
};
use num::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormsError {
    /// The forms are only defined for dimension n >= 2.
    DimensionTooSmall,
    NotSymmetric,
    Singular,
    /// Signature readout requires a nonsingular diagonal.
    ZeroDiagonalEntry,
    Exactq(ExactqError),
}

impl std::fmt::Display for FormsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormsError::DimensionTooSmall => write!(f, "dimension must be at least 2"),
            FormsError::NotSymmetric => write!(f, "matrix is not symmetric"),
            FormsError::Singular => write!(f, "form is singular"),
            FormsError::ZeroDiagonalEntry => write!(f, "diagonal contains a zero entry"),
            FormsError::Exactq(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FormsError {}

impl From<ExactqError> for FormsError {
    fn from(e: ExactqError) -> Self {
        FormsError::Exactq(e)
    }
}

/// Symmetric rational quadratic form of a given dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    pub dim: usize,
    pub matrix: RationalMatrix,
}

impl QuadraticForm {
    pub fn new(matrix: RationalMatrix) -> Result<Self, FormsError> {
        if !matrix.is_square() {
            return Err(FormsError::Exactq(ExactqError::NotSquare));
        }
        let n = matrix.rows();
        for i in 0..n {
            for j in i + 1..n {
                if matrix.at(i, j) != matrix.at(j, i) {
                    return Err(FormsError::NotSymmetric);
                }
            }
        }
        Ok(QuadraticForm { dim: n, matrix })
    }

    /// Evaluate the form at a vector: `vᵀ · Q · v`.
    pub fn evaluate(&self, v: &[Rational]) -> Result<Rational, FormsError> {
        if v.len() != self.dim {
            return Err(FormsError::Exactq(ExactqError::DimensionMismatch));
        }
        let col = RationalMatrix::new(self.dim, 1, v.to_vec())?;
        Ok(congruence(&col, &self.matrix)?.at(0, 0).clone())
    }
}

/// Result of an exact congruence diagonalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalizationResult {
    pub diagonal: Vec<Rational>,
    pub transform: RationalMatrix,
}

/// The Descartes form `I_{n+2} − (1/n)·𝟙𝟙ᵀ`.
///
/// Curvature vectors of Descartes configurations are exactly its isotropic
/// vectors.
pub fn descartes_form(n: usize) -> Result<QuadraticForm, FormsError> {
    if n < 2 {
        return Err(FormsError::DimensionTooSmall);
    }
    let dim = n + 2;
    let mut m = RationalMatrix::zeros(dim, dim);
    let off = ratio(-1, n as i64);
    let diag = Rational::one() + &off;
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, if i == j { diag.clone() } else { off.clone() });
        }
    }
    QuadraticForm::new(m)
}

/// The Wilker form: block matrix `[[0,−4,0],[−4,0,0],[0,0,2·I_n]]`.
pub fn wilker_form(n: usize) -> Result<QuadraticForm, FormsError> {
    if n < 2 {
        return Err(FormsError::DimensionTooSmall);
    }
    let dim = n + 2;
    let mut m = RationalMatrix::zeros(dim, dim);
    m.set(0, 1, rat(-4));
    m.set(1, 0, rat(-4));
    for i in 2..dim {
        m.set(i, i, rat(2));
    }
    QuadraticForm::new(m)
}

/// The Lorentz form `diag(−1, 1, …, 1)` in n+2 variables.
pub fn lorentz_form(n: usize) -> Result<QuadraticForm, FormsError> {
    if n < 2 {
        return Err(FormsError::DimensionTooSmall);
    }
    let dim = n + 2;
    let mut m = RationalMatrix::identity(dim);
    m.set(0, 0, rat(-1));
    QuadraticForm::new(m)
}

/// The matrix `J₀ = (1/2)[[1,1,1,1],[1,1,−1,−1],[1,−1,1,−1],[1,−1,−1,1]]`
/// carrying the two-dimensional Descartes form to the Lorentz form:
/// `J₀ᵀ · Q_D · J₀ = Q_L` exactly.
pub fn lorentz_intertwiner_n2() -> RationalMatrix {
    RationalMatrix::from_i64_rows(&[
        &[1, 1, 1, 1],
        &[1, 1, -1, -1],
        &[1, -1, 1, -1],
        &[1, -1, -1, 1],
    ])
    .scale(&ratio(1, 2))
}

/// Final reduction step for the 4-variable Descartes form: a rational matrix
/// `N` with `Nᵀ · Q_D(n=2) · N = diag(2,2,2,−2)` exactly.
///
/// Columns: (1,1,−1/2,−1/2), (1,−1,0,0), (0,0,1,−1), (1,1,1/2,1/2).
fn final_step_n4() -> RationalMatrix {
    let h = ratio(1, 2);
    RationalMatrix::from_rows(vec![
        vec![rat(1), rat(1), rat(0), rat(1)],
        vec![rat(1), rat(-1), rat(0), rat(1)],
        vec![-h.clone(), rat(0), rat(1), h.clone()],
        vec![-h.clone(), rat(0), rat(-1), h],
    ])
    .expect("fixed shape")
}

fn is_diagonal(m: &RationalMatrix) -> bool {
    let n = m.rows();
    (0..n).all(|i| (0..n).all(|j| i == j || m.at(i, j).is_zero()))
}

/// Shape test for `x·I − y·𝟙𝟙ᵀ`-style matrices: constant diagonal `x`,
/// constant off-diagonal `−y`. Returns `(x, y)` when it matches.
fn descartes_shape(m: &RationalMatrix) -> Option<(Rational, Rational)> {
    let n = m.rows();
    if n < 2 {
        return None;
    }
    let x = m.at(0, 0).clone();
    let y = -m.at(0, 1).clone();
    let neg_y = -y.clone();
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { &x } else { &neg_y };
            if m.at(i, j) != expected {
                return None;
            }
        }
    }
    Some((x, y))
}

/// Is the n+2-variable Descartes block with parameters (x, y) = (1/2, 1/2)?
fn is_descartes_n2_block(x: &Rational, y: &Rational) -> bool {
    *x == ratio(1, 2) && *y == ratio(1, 2)
}

/// Multiply `transform` on the right by a block acting on the trailing
/// `block.rows()` coordinates.
fn apply_trailing_block(
    transform: &RationalMatrix,
    block: &RationalMatrix,
) -> Result<RationalMatrix, ExactqError> {
    let dim = transform.rows();
    let k = dim - block.rows();
    let mut full = RationalMatrix::identity(dim);
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            full.set(k + i, k + j, block.at(i, j).clone());
        }
    }
    mat_mul(transform, &full)
}

/// Right-multiply `transform` in place by the block-diagonal matrix whose
/// trailing block differs from the identity only in its first row
/// `(1, α, …, α)`. Column-wise that is `col_j += α · col_k` for every
/// `j > k`, an O(dim²) update.
fn apply_trailing_row_shear(transform: &mut RationalMatrix, k: usize, alpha: &Rational) {
    let dim = transform.rows();
    for i in 0..dim {
        let pivot = transform.at(i, k).clone();
        if pivot.is_zero() {
            continue;
        }
        let scaled = alpha * &pivot;
        for j in k + 1..dim {
            let updated = transform.at(i, j) + &scaled;
            transform.set(i, j, updated);
        }
    }
}

/// Exact congruence diagonalization.
///
/// Matrices of shape `x·I − y·𝟙𝟙ᵀ` take a specialized pivot-free recursion
/// that peels one variable per step; when the remaining 4-variable block is
/// the two-dimensional Descartes form the final step lands exactly on
/// `diag(2,2,2,−2)`. All other symmetric inputs take a generic pivoting
/// path. In both cases `transformᵀ · q · transform` is exactly diagonal.
pub fn conway_diagonalize(q: &QuadraticForm) -> Result<DiagonalizationResult, FormsError> {
    let dim = q.dim;
    if determinant(&q.matrix)?.is_zero() {
        return Err(FormsError::Singular);
    }
    if is_diagonal(&q.matrix) {
        return Ok(DiagonalizationResult {
            diagonal: (0..dim).map(|i| q.matrix.at(i, i).clone()).collect(),
            transform: RationalMatrix::identity(dim),
        });
    }

    let mut transform = RationalMatrix::identity(dim);
    let mut diagonal: Vec<Rational> = Vec::with_capacity(dim);
    let mut block = q.matrix.clone();

    // Specialized recursion while the trailing block keeps the x·I − y·𝟙𝟙ᵀ
    // shape and the pivot x stays nonzero.
    while let Some((x, y)) = descartes_shape(&block) {
        let m = block.rows();
        if m == 4 && is_descartes_n2_block(&x, &y) {
            let n4 = final_step_n4();
            transform = apply_trailing_block(&transform, &n4)?;
            diagonal.extend([rat(2), rat(2), rat(2), rat(-2)]);
            block = RationalMatrix::zeros(0, 0);
            break;
        }
        if y.is_zero() {
            // Already diagonal from here on.
            diagonal.extend((0..m).map(|_| x.clone()));
            block = RationalMatrix::zeros(0, 0);
            break;
        }
        if x.is_zero() {
            break; // generic path must finish the block
        }
        let alpha = &y / &x;
        apply_trailing_row_shear(&mut transform, dim - m, &alpha);
        diagonal.push(x.clone());
        // New block parameters: x' = x − y²/x, y' = y + y²/x.
        let shift = &y * &y / &x;
        let m2 = m - 1;
        let mut next = RationalMatrix::zeros(m2, m2);
        let x2 = &x - &shift;
        let y2 = &y + &shift;
        for i in 0..m2 {
            for j in 0..m2 {
                next.set(i, j, if i == j { x2.clone() } else { -y2.clone() });
            }
        }
        block = next;
        if block.rows() == 1 {
            diagonal.push(block.at(0, 0).clone());
            block = RationalMatrix::zeros(0, 0);
            break;
        }
    }

    if block.rows() > 0 {
        // Generic symmetric pivoting path on the remaining trailing block.
        let m = block.rows();
        let offset = dim - m;
        let mut a = block;
        let mut t = RationalMatrix::identity(m);
        for k in 0..m {
            if a.at(k, k).is_zero() {
                if let Some(r) = (k + 1..m).find(|&r| !a.at(r, r).is_zero()) {
                    swap_coordinates(&mut a, &mut t, k, r);
                } else if let Some((i, j)) = first_offdiag_nonzero(&a, k) {
                    // Make the (i,i) entry nonzero: x_i ↦ x_i + x_j turns
                    // a_ii into 2·a_ij.
                    add_coordinate(&mut a, &mut t, i, j, &Rational::one());
                    if i != k {
                        swap_coordinates(&mut a, &mut t, k, i);
                    }
                } else {
                    return Err(FormsError::Singular);
                }
            }
            let pivot = a.at(k, k).clone();
            for i in k + 1..m {
                if a.at(i, k).is_zero() {
                    continue;
                }
                let factor = -(a.at(i, k) / &pivot);
                add_coordinate(&mut a, &mut t, i, k, &factor);
            }
        }
        for i in 0..m {
            diagonal.push(a.at(i, i).clone());
        }
        // Embed the block transform at the trailing coordinates.
        let mut full = RationalMatrix::identity(dim);
        for i in 0..m {
            for j in 0..m {
                full.set(offset + i, offset + j, t.at(i, j).clone());
            }
        }
        transform = mat_mul(&transform, &full)?;
    }

    debug_assert_eq!(diagonal.len(), dim);
    Ok(DiagonalizationResult {
        diagonal,
        transform,
    })
}

/// Congruence by the swap of coordinates `i` and `j`, tracked in `t`.
fn swap_coordinates(a: &mut RationalMatrix, t: &mut RationalMatrix, i: usize, j: usize) {
    let m = a.rows();
    for c in 0..m {
        let (x, y) = (a.at(i, c).clone(), a.at(j, c).clone());
        a.set(i, c, y);
        a.set(j, c, x);
    }
    for r in 0..m {
        let (x, y) = (a.at(r, i).clone(), a.at(r, j).clone());
        a.set(r, i, y);
        a.set(r, j, x);
    }
    for r in 0..t.rows() {
        let (x, y) = (t.at(r, i).clone(), t.at(r, j).clone());
        t.set(r, i, y);
        t.set(r, j, x);
    }
}

/// Congruence by `x_i ↦ x_i + factor·x_j` (column then row update), tracked
/// in `t`.
fn add_coordinate(
    a: &mut RationalMatrix,
    t: &mut RationalMatrix,
    i: usize,
    j: usize,
    factor: &Rational,
) {
    let m = a.rows();
    for r in 0..m {
        let v = a.at(r, i) + factor * a.at(r, j);
        a.set(r, i, v);
    }
    for c in 0..m {
        let v = a.at(i, c) + factor * a.at(j, c);
        a.set(i, c, v);
    }
    for r in 0..t.rows() {
        let v = t.at(r, i) + factor * t.at(r, j);
        t.set(r, i, v);
    }
}

fn first_offdiag_nonzero(a: &RationalMatrix, k: usize) -> Option<(usize, usize)> {
    let m = a.rows();
    for i in k..m {
        for j in i + 1..m {
            if !a.at(i, j).is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Diagonalization of the Wilker form to `diag(−2, 2, …, 2)` by the fixed
/// transform `(1/2)[[1,1,0],[1,−1,0],[0,0,2·I_n]]`.
pub fn wilker_diagonal(n: usize) -> Result<DiagonalizationResult, FormsError> {
    let q = wilker_form(n)?;
    let dim = n + 2;
    let h = ratio(1, 2);
    let mut w0 = RationalMatrix::identity(dim);
    w0.set(0, 0, h.clone());
    w0.set(0, 1, h.clone());
    w0.set(1, 0, h.clone());
    w0.set(1, 1, -h);
    let image = congruence(&w0, &q.matrix)?;
    debug_assert!(is_diagonal(&image));
    Ok(DiagonalizationResult {
        diagonal: (0..dim).map(|i| image.at(i, i).clone()).collect(),
        transform: w0,
    })
}

/// Signature (positive count, negative count) of a diagonalization.
pub fn signature(d: &DiagonalizationResult) -> Result<(usize, usize), FormsError> {
    let mut pos = 0;
    let mut neg = 0;
    for entry in &d.diagonal {
        if entry.is_zero() {
            return Err(FormsError::ZeroDiagonalEntry);
        }
        if entry.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok((pos, neg))
}
