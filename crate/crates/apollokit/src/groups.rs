//! Generators of the reflection groups acting on Descartes
//! configurations, their relation certificates, word reduction, and the
//! mass certificate that proves nonempty reduced words are not the
//! identity in the three-dimensional group.
//!
//! Two generator families act on the coordinate matrix of a configuration
//! by left multiplication: the curvature-side reflections `S_j` (row j
//! replaced using the other members' data) and the integral dual
//! reflections `S_j⊥` (column j). Both are involutions preserving the
//! curvature form exactly; `S_j` and `S_k⊥` commute whenever `j ≠ k`, and
//! in dimension three `(S_j S_k)³ = I`.

use crate::exactq::{mat_mul, rat, ratio, ExactqError, Rational, RationalMatrix};
use crate::forms::{descartes_form, FormsError};
use num_traits::{ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Debug, Clone, PartialEq)]
pub enum GroupsError {
    /// The ambient dimension must be at least 2.
    DimensionTooSmall,
    /// Generator index outside 1..=n+2.
    IndexOutOfRange,
    /// Word letters exceed the stated dimension's index range.
    WrongDimension,
    /// The operation is defined for curvature-side letters only.
    NonApollonianLetter,
    /// The operation requires a reduced word.
    NotReduced,
    /// A certificate invariant failed to verify.
    CertificateFailed,
    /// A constructed generator failed the exact form-preservation check.
    AutomorphismCheckFailed,
    /// A word token could not be parsed.
    BadToken(String),
    Exactq(ExactqError),
    Forms(FormsError),
}

impl fmt::Display for GroupsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupsError::DimensionTooSmall => write!(f, "dimension must be at least 2"),
            GroupsError::IndexOutOfRange => write!(f, "generator index out of range"),
            GroupsError::WrongDimension => write!(f, "word letters do not fit the dimension"),
            GroupsError::NonApollonianLetter => {
                write!(f, "operation requires curvature-side letters only")
            }
            GroupsError::NotReduced => write!(f, "word is not reduced"),
            GroupsError::CertificateFailed => write!(f, "certificate invariant failed"),
            GroupsError::AutomorphismCheckFailed => {
                write!(f, "generator does not preserve the curvature form")
            }
            GroupsError::BadToken(t) => write!(f, "bad word token '{t}'"),
            GroupsError::Exactq(e) => write!(f, "{e}"),
            GroupsError::Forms(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for GroupsError {}

impl From<ExactqError> for GroupsError {
    fn from(e: ExactqError) -> Self {
        GroupsError::Exactq(e)
    }
}

impl From<FormsError> for GroupsError {
    fn from(e: FormsError) -> Self {
        GroupsError::Forms(e)
    }
}

/// Which generator family a letter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Apollonian,
    Dual,
}

/// One generator letter: family and 1-based member index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenSymbol {
    pub kind: GenKind,
    pub index: usize,
}

impl GenSymbol {
    pub fn apollonian(index: usize) -> Self {
        GenSymbol { kind: GenKind::Apollonian, index }
    }

    pub fn dual(index: usize) -> Self {
        GenSymbol { kind: GenKind::Dual, index }
    }
}

impl fmt::Display for GenSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            GenKind::Apollonian => 's',
            GenKind::Dual => 'd',
        };
        write!(f, "{prefix}{}", self.index)
    }
}

/// A word in the generators for a fixed ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    n: usize,
    letters: Vec<GenSymbol>,
}

impl Word {
    pub fn new(n: usize, letters: Vec<GenSymbol>) -> Result<Self, GroupsError> {
        if n < 2 {
            return Err(GroupsError::DimensionTooSmall);
        }
        if letters.iter().any(|l| l.index == 0 || l.index > n + 2) {
            return Err(GroupsError::WrongDimension);
        }
        Ok(Word { n, letters })
    }

    pub fn empty(n: usize) -> Result<Self, GroupsError> {
        Word::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[GenSymbol] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.letters {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

/// Parse a whitespace-separated word like "s1 d3 s2".
pub fn parse_word(n: usize, text: &str) -> Result<Word, GroupsError> {
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let (kind, digits) = match token.split_at(1) {
            ("s", rest) => (GenKind::Apollonian, rest),
            ("d", rest) => (GenKind::Dual, rest),
            _ => return Err(GroupsError::BadToken(token.to_string())),
        };
        let index: usize = digits
            .parse()
            .map_err(|_| GroupsError::BadToken(token.to_string()))?;
        letters.push(GenSymbol { kind, index });
    }
    Word::new(n, letters)
}

fn check_generator_args(n: usize, j: usize) -> Result<(), GroupsError> {
    if n < 2 {
        return Err(GroupsError::DimensionTooSmall);
    }
    if j == 0 || j > n + 2 {
        return Err(GroupsError::IndexOutOfRange);
    }
    Ok(())
}

/// Curvature-side reflection with a free off-diagonal parameter: identity
/// everywhere except row j, which has −1 on the diagonal and `lambda` off
/// it. An involution for every `lambda`; the commutation relations with
/// the dual family hold only at `lambda = 2/(n−1)`.
fn apollonian_reflection_with_lambda(n: usize, j: usize, lambda: &Rational) -> RationalMatrix {
    let dim = n + 2;
    let mut m = RationalMatrix::identity(dim);
    let r = j - 1;
    for c in 0..dim {
        m.set(r, c, if c == r { rat(-1) } else { lambda.clone() });
    }
    m
}

fn build_generator(n: usize, kind: GenKind, j: usize) -> RationalMatrix {
    let dim = n + 2;
    match kind {
        GenKind::Apollonian => {
            apollonian_reflection_with_lambda(n, j, &ratio(2, n as i64 - 1))
        }
        GenKind::Dual => {
            let mut m = RationalMatrix::identity(dim);
            let c = j - 1;
            for r in 0..dim {
                m.set(r, c, if r == c { rat(-1) } else { rat(2) });
            }
            m
        }
    }
}

static GENERATOR_CACHE: OnceLock<
    RwLock<HashMap<(usize, GenKind, usize), Arc<RationalMatrix>>>,
> = OnceLock::new();

/// Fetch a generator through the per-(n, kind, j) cache, verifying form
/// preservation exactly on first construction.
fn cached_generator(n: usize, kind: GenKind, j: usize) -> Result<Arc<RationalMatrix>, GroupsError> {
    check_generator_args(n, j)?;
    let cache = GENERATOR_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(found) = cache.read().expect("generator cache poisoned").get(&(n, kind, j)) {
        return Ok(found.clone());
    }
    let built = build_generator(n, kind, j);
    let qd = descartes_form(n)?;
    let image = crate::exactq::congruence(&built, &qd.matrix)?;
    if image != qd.matrix {
        return Err(GroupsError::AutomorphismCheckFailed);
    }
    let mut write = cache.write().expect("generator cache poisoned");
    let entry = write.entry((n, kind, j)).or_insert_with(|| Arc::new(built));
    Ok(entry.clone())
}

/// The curvature-side reflection `S_j`: identity except row j, which has
/// −1 on the diagonal and `2/(n−1)` elsewhere. Preserves the curvature
/// form exactly (checked on construction).
pub fn apollonian_generator(n: usize, j: usize) -> Result<RationalMatrix, GroupsError> {
    cached_generator(n, GenKind::Apollonian, j).map(|m| (*m).clone())
}

/// The dual reflection `S_j⊥`: identity except column j, which has −1 on
/// the diagonal and 2 elsewhere. Integral in every dimension; preserves
/// the curvature form exactly (checked on construction).
pub fn dual_generator(n: usize, j: usize) -> Result<RationalMatrix, GroupsError> {
    cached_generator(n, GenKind::Dual, j).map(|m| (*m).clone())
}

fn generator_for(n: usize, letter: GenSymbol) -> Result<Arc<RationalMatrix>, GroupsError> {
    cached_generator(n, letter.kind, letter.index)
}

/// Exact product of the word's generator matrices, left to right; the
/// empty word gives the identity.
pub fn word_to_matrix(w: &Word) -> Result<RationalMatrix, GroupsError> {
    let dim = w.n + 2;
    let mut acc = RationalMatrix::identity(dim);
    for letter in &w.letters {
        let g = generator_for(w.n, *letter)?;
        acc = mat_mul(&acc, &g)?;
    }
    Ok(acc)
}

/// Outcome of checking the defining relations in one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub n: usize,
    pub max_power: u32,
    /// S_j² = I for every j, exactly.
    pub apollonian_involutions: bool,
    /// (S_j⊥)² = I for every j, exactly.
    pub dual_involutions: bool,
    /// S_j S_k⊥ = S_k⊥ S_j for every j ≠ k, exactly.
    pub commutation: bool,
    /// The commutation fails (exactly) for the reflection family with the
    /// off-diagonal parameter moved away from 2/(n−1).
    pub perturbed_commutation_fails: bool,
    /// (S_j S_k)³ = I for every j ≠ k (holds precisely in dimension 3).
    pub pair_cubes: bool,
    /// No power (S_j S_k)^m with 2 ≤ m ≤ max_power equals I (j < k).
    pub pair_powers_nontrivial: bool,
    /// Every relation expected in this dimension verified.
    pub all_expected_hold: bool,
}

/// Verify the generator relations exactly: involutions and mixed
/// commutation in every dimension, the cube relations in dimension 3, and
/// the absence of small pair-power relations elsewhere.
pub fn verify_relations(n: usize, max_power: u32) -> Result<RelationReport, GroupsError> {
    if n < 2 {
        return Err(GroupsError::DimensionTooSmall);
    }
    let dim = n + 2;
    let identity = RationalMatrix::identity(dim);

    let mut apollonian_involutions = true;
    let mut dual_involutions = true;
    for j in 1..=dim {
        let s = apollonian_generator(n, j)?;
        if mat_mul(&s, &s)? != identity {
            apollonian_involutions = false;
        }
        let d = dual_generator(n, j)?;
        if mat_mul(&d, &d)? != identity {
            dual_involutions = false;
        }
    }

    let mut commutation = true;
    let mut perturbed_commutation_fails = true;
    let perturbed_lambda = ratio(2, n as i64 - 1) + rat(1);
    for j in 1..=dim {
        for k in 1..=dim {
            if j == k {
                continue;
            }
            let s = apollonian_generator(n, j)?;
            let d = dual_generator(n, k)?;
            if mat_mul(&s, &d)? != mat_mul(&d, &s)? {
                commutation = false;
            }
            let s_perturbed = apollonian_reflection_with_lambda(n, j, &perturbed_lambda);
            if mat_mul(&s_perturbed, &d)? == mat_mul(&d, &s_perturbed)? {
                perturbed_commutation_fails = false;
            }
        }
    }

    let mut pair_cubes = true;
    let mut pair_powers_nontrivial = true;
    for j in 1..=dim {
        for k in 1..=dim {
            if j == k {
                continue;
            }
            let product = mat_mul(&apollonian_generator(n, j)?, &apollonian_generator(n, k)?)?;
            let cube = mat_mul(&mat_mul(&product, &product)?, &product)?;
            if cube != identity {
                pair_cubes = false;
            }
            if j < k {
                let mut power = mat_mul(&product, &product)?;
                for _ in 2..=max_power {
                    if power == identity {
                        pair_powers_nontrivial = false;
                        break;
                    }
                    power = mat_mul(&power, &product)?;
                }
            }
        }
    }

    let dimension_specific = if n == 3 { pair_cubes } else { pair_powers_nontrivial };
    let all_expected_hold = apollonian_involutions
        && dual_involutions
        && commutation
        && perturbed_commutation_fails
        && dimension_specific;

    Ok(RelationReport {
        n,
        max_power,
        apollonian_involutions,
        dual_involutions,
        commutation,
        perturbed_commutation_fails,
        pair_cubes,
        pair_powers_nontrivial,
        all_expected_hold,
    })
}

fn require_apollonian_n3(w: &Word) -> Result<(), GroupsError> {
    if w.n != 3 {
        return Err(GroupsError::WrongDimension);
    }
    if w.letters.iter().any(|l| l.kind != GenKind::Apollonian) {
        return Err(GroupsError::NonApollonianLetter);
    }
    Ok(())
}

/// Delete adjacent equal letters to a fixpoint (involution relation).
fn two_reduce(letters: &[GenSymbol]) -> Vec<GenSymbol> {
    let mut out: Vec<GenSymbol> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Find the leftmost minimal braid-chain subword: a window
/// V₁V₂…V_{2m} (m ≥ 2) with V₁ = V₃, V_{2j} = V_{2j+3} for
/// 1 ≤ j ≤ m−2, and V_{2m−2} = V_{2m}. Returns (start, m).
pub(crate) fn find_chain_subword(letters: &[GenSymbol]) -> Option<(usize, usize)> {
    let len = letters.len();
    for s in 0..len {
        if s + 4 > len || letters[s] != letters[s + 2] {
            continue;
        }
        // m = 2 closes with V₂ = V₄.
        if letters[s + 1] == letters[s + 3] {
            return Some((s, 2));
        }
        let mut m = 3;
        while s + 2 * m <= len {
            // Chain condition for j = m−2: V_{2(m−2)} = V_{2(m−2)+3}.
            let j = m - 2;
            if letters[s + 2 * j - 1] != letters[s + 2 * j + 2] {
                break;
            }
            // Closure at this m: V_{2m−2} = V_{2m}.
            if letters[s + 2 * m - 3] == letters[s + 2 * m - 1] {
                return Some((s, m));
            }
            m += 1;
        }
    }
    None
}

/// Reduce a word over the dimension-3 curvature-side generators to the
/// reduced normal form: no doubled letter and no braid-chain subword.
///
/// Doubled letters vanish by the involution relation. A detected chain
/// V₁…V_{2m} is rewritten by the relation S_jS_kS_j = S_kS_jS_k applied at
/// positions 1, 3, …, 2m−3, which leaves a doubled pair at its end; the
/// pair is deleted and the scan restarts. Each round shortens the word by
/// two, so the process terminates, and every rewrite preserves the
/// word's matrix exactly.
pub fn reduce_word_n3(w: &Word) -> Result<Word, GroupsError> {
    require_apollonian_n3(w)?;
    let mut letters = two_reduce(&w.letters);
    while let Some((s, m)) = find_chain_subword(&letters) {
        for p in (0..2 * m - 3).step_by(2) {
            let (a, b) = (letters[s + p], letters[s + p + 1]);
            debug_assert_eq!(letters[s + p + 2], a, "chain rewrite expects an aba triple");
            letters[s + p] = b;
            letters[s + p + 1] = a;
            letters[s + p + 2] = b;
        }
        assert_eq!(
            letters[s + 2 * m - 2],
            letters[s + 2 * m - 1],
            "chain rewrite must end in a doubled pair"
        );
        letters.drain(s + 2 * m - 2..s + 2 * m);
        letters = two_reduce(&letters);
    }
    Word::new(3, letters)
}

/// Whether a dimension-3 curvature-side word is in reduced form.
pub fn is_reduced_n3(w: &Word) -> Result<bool, GroupsError> {
    require_apollonian_n3(w)?;
    let two_ok = w.letters.windows(2).all(|p| p[0] != p[1]);
    Ok(two_ok && find_chain_subword(&w.letters).is_none())
}

/// Mass data certifying that a reduced word's matrix is not the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassCertificate {
    pub word: Word,
    /// Entry sums of the suffix products, starting from the identity
    /// (mass 5) and incorporating letters right to left; strictly
    /// increasing for reduced words.
    pub mass_trace: Vec<Rational>,
    /// Per-step mass increments (each positive for reduced words).
    pub deltas: Vec<Rational>,
}

fn entry_sum(m: &RationalMatrix) -> Rational {
    let mut total = Rational::zero();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            total = total + m.at(i, j);
        }
    }
    total
}

fn row_sum(m: &RationalMatrix, r: usize) -> Rational {
    let mut total = Rational::zero();
    for j in 0..m.cols() {
        total = total + m.at(r, j);
    }
    total
}

/// All per-row mass increments: δ_j(U) = Σ(U) − 3σ_j(U).
fn all_deltas(m: &RationalMatrix) -> Vec<Rational> {
    let sigma = entry_sum(m);
    (0..m.rows()).map(|r| &sigma - rat(3) * row_sum(m, r)).collect()
}

/// Build the mass certificate for a reduced dimension-3 word: the trace
/// of entry sums of the suffix products, verified strictly increasing,
/// ending at least at 7 for nonempty words (the identity has mass 5).
///
/// The per-row increments are additionally cross-checked at every step
/// against their recurrences under left multiplication: for letter k,
/// δ_j picks up δ_k when j ≠ k and flips sign when j = k.
pub fn mass_certificate(w: &Word) -> Result<MassCertificate, GroupsError> {
    require_apollonian_n3(w)?;
    if !is_reduced_n3(w)? {
        return Err(GroupsError::NotReduced);
    }
    let dim = w.n + 2;
    let mut suffix = RationalMatrix::identity(dim);
    let mut mass_trace = vec![entry_sum(&suffix)];
    let mut deltas = Vec::with_capacity(w.letters.len());
    let mut prev_deltas = all_deltas(&suffix);

    for letter in w.letters.iter().rev() {
        let g = generator_for(w.n, *letter)?;
        suffix = mat_mul(&g, &suffix)?;
        let mass = entry_sum(&suffix);
        let step = &mass - mass_trace.last().expect("trace nonempty");
        // The step must match the tracked increment for this letter.
        if step != prev_deltas[letter.index - 1] {
            return Err(GroupsError::CertificateFailed);
        }
        let next_deltas = all_deltas(&suffix);
        for j in 0..dim {
            let expected = if j == letter.index - 1 {
                -&prev_deltas[j]
            } else {
                &prev_deltas[j] + &prev_deltas[letter.index - 1]
            };
            if next_deltas[j] != expected {
                return Err(GroupsError::CertificateFailed);
            }
        }
        mass_trace.push(mass);
        deltas.push(step);
        prev_deltas = next_deltas;
    }

    // Strict increase and the final bound certify the word's matrix ≠ I.
    for pair in mass_trace.windows(2) {
        if pair[1] <= pair[0] {
            return Err(GroupsError::CertificateFailed);
        }
    }
    if !w.letters.is_empty() && *mass_trace.last().expect("trace nonempty") < rat(7) {
        return Err(GroupsError::CertificateFailed);
    }
    Ok(MassCertificate { word: w.clone(), mass_trace, deltas })
}

/// Normal form under the involution and mixed-commutation relations only:
/// dual letters are pushed left past curvature-side letters with a
/// different index, and adjacent equal letters cancel, to a fixpoint.
///
/// For words in the curvature-side letters alone with n ≥ 4 this is
/// complete: the result is empty exactly when the matrix is the identity.
/// For mixed words it is sound but makes no completeness claim.
pub fn free_reduce(w: &Word) -> Result<Word, GroupsError> {
    let mut letters = w.letters.clone();
    loop {
        let mut changed = false;
        // Involution cancellation.
        let cancelled = two_reduce(&letters);
        if cancelled.len() != letters.len() {
            changed = true;
        }
        letters = cancelled;
        // One bubble pass of the commutation relation: a dual letter moves
        // left past a curvature-side letter with a different index.
        let mut i = 0;
        while i + 1 < letters.len() {
            let (a, b) = (letters[i], letters[i + 1]);
            if a.kind == GenKind::Apollonian && b.kind == GenKind::Dual && a.index != b.index {
                letters.swap(i, i + 1);
                changed = true;
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    Word::new(w.n, letters)
}

/// Rotation angle of a generator pair product: θ = 2·arccos(1/(n−1)).
///
/// For n ≥ 3 the product S₁S₂ fixes an n-dimensional subspace and rotates
/// a plane by θ; this is verified by checking exactly that
/// (M − I)(M² − T·M + I) = 0 with T the trace of the rotation block, and
/// numerically that e^{±iθ} are roots of λ² − Tλ + 1 within 1e−9. The
/// n = 2 case is parabolic (θ = 0) and skips the eigenvalue check.
pub fn pair_rotation_angle(n: usize) -> Result<f64, GroupsError> {
    if n < 2 {
        return Err(GroupsError::DimensionTooSmall);
    }
    let theta = 2.0 * (1.0 / (n as f64 - 1.0)).acos();
    if n == 2 {
        return Ok(theta);
    }
    let dim = n + 2;
    let identity = RationalMatrix::identity(dim);
    let m = mat_mul(&apollonian_generator(n, 1)?, &apollonian_generator(n, 2)?)?;

    // Rotation-block trace: total trace minus the n fixed directions.
    let mut trace = Rational::zero();
    for i in 0..dim {
        trace = trace + m.at(i, i);
    }
    let t = trace - rat(n as i64);

    // Exact spectral split: (M − I)(M² − T·M + I) = 0.
    let m2 = mat_mul(&m, &m)?;
    let quadratic = m2.add(&identity)?.sub(&m.scale(&t))?;
    let product = mat_mul(&m.sub(&identity)?, &quadratic)?;
    if product != RationalMatrix::zeros(dim, dim) {
        return Err(GroupsError::CertificateFailed);
    }

    // e^{±iθ} must be roots of λ² − Tλ + 1.
    let t_f = t.to_f64().unwrap_or(f64::NAN);
    let (re, im) = (theta.cos(), theta.sin());
    // λ² − Tλ + 1 at λ = e^{iθ}: real and imaginary parts.
    let real = re * re - im * im - t_f * re + 1.0;
    let imag = 2.0 * re * im - t_f * im;
    if (real * real + imag * imag).sqrt() > 1e-9 {
        return Err(GroupsError::CertificateFailed);
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{seed_polystrip, validate_exact};
    use crate::exactq::congruence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn s(index: usize) -> GenSymbol {
        GenSymbol::apollonian(index)
    }

    fn d(index: usize) -> GenSymbol {
        GenSymbol::dual(index)
    }

    #[test]
    fn apollonian_generator_rows() {
        let g = apollonian_generator(3, 1).unwrap();
        let expected = RationalMatrix::from_i64_rows(&[
            &[-1, 1, 1, 1, 1],
            &[0, 1, 0, 0, 0],
            &[0, 0, 1, 0, 0],
            &[0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 1],
        ]);
        assert_eq!(g, expected);

        let g = apollonian_generator(2, 1).unwrap();
        let expected = RationalMatrix::from_i64_rows(&[
            &[-1, 2, 2, 2],
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[0, 0, 0, 1],
        ]);
        assert_eq!(g, expected);

        assert_eq!(apollonian_generator(2, 0), Err(GroupsError::IndexOutOfRange));
        assert_eq!(apollonian_generator(2, 5), Err(GroupsError::IndexOutOfRange));
        assert_eq!(apollonian_generator(1, 1), Err(GroupsError::DimensionTooSmall));
    }

    #[test]
    fn dual_generator_columns() {
        let g = dual_generator(2, 1).unwrap();
        let expected = RationalMatrix::from_i64_rows(&[
            &[-1, 0, 0, 0],
            &[2, 1, 0, 0],
            &[2, 0, 1, 0],
            &[2, 0, 0, 1],
        ]);
        assert_eq!(g, expected);
    }

    #[test]
    fn dual_generators_are_integral() {
        for n in 2..=8 {
            for j in 1..=n + 2 {
                let g = dual_generator(n, j).unwrap();
                for r in 0..n + 2 {
                    for c in 0..n + 2 {
                        assert!(g.at(r, c).is_integer(), "n={n} j={j} entry ({r},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn generators_preserve_curvature_form() {
        for n in 2..=8 {
            let qd = descartes_form(n).unwrap();
            for j in 1..=n + 2 {
                for g in [apollonian_generator(n, j).unwrap(), dual_generator(n, j).unwrap()] {
                    assert_eq!(congruence(&g, &qd.matrix).unwrap(), qd.matrix, "n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn generator_actions_preserve_configs() {
        let seed = seed_polystrip(2).unwrap();
        let w = seed.exact_matrix().unwrap();
        for j in 1..=4 {
            for g in [apollonian_generator(2, j).unwrap(), dual_generator(2, j).unwrap()] {
                let moved = mat_mul(&g, w).unwrap();
                assert!(validate_exact(2, moved).is_ok(), "j={j}");
            }
        }
    }

    #[test]
    fn relation_report_by_dimension() {
        let r3 = verify_relations(3, 12).unwrap();
        assert!(r3.apollonian_involutions);
        assert!(r3.dual_involutions);
        assert!(r3.commutation);
        assert!(r3.perturbed_commutation_fails);
        assert!(r3.pair_cubes);
        assert!(r3.all_expected_hold);

        let r2 = verify_relations(2, 24).unwrap();
        assert!(r2.commutation);
        assert!(!r2.pair_cubes, "the parabolic plane case has no cube relation");
        assert!(r2.pair_powers_nontrivial);
        assert!(r2.all_expected_hold);

        for n in 4..=6 {
            let r = verify_relations(n, 50).unwrap();
            assert!(r.apollonian_involutions && r.dual_involutions);
            assert!(r.commutation && r.perturbed_commutation_fails);
            assert!(!r.pair_cubes);
            assert!(r.pair_powers_nontrivial, "n={n}");
            assert!(r.all_expected_hold, "n={n}");
        }
    }

    #[test]
    fn word_to_matrix_examples() {
        let empty = Word::empty(3).unwrap();
        assert_eq!(word_to_matrix(&empty).unwrap(), RationalMatrix::identity(5));

        let single = Word::new(3, vec![s(1)]).unwrap();
        assert_eq!(
            word_to_matrix(&single).unwrap(),
            apollonian_generator(3, 1).unwrap()
        );

        let doubled = Word::new(3, vec![s(1), s(1)]).unwrap();
        assert_eq!(word_to_matrix(&doubled).unwrap(), RationalMatrix::identity(5));
    }

    #[test]
    fn word_parsing_round_trip() {
        let word = parse_word(3, "s1 d3 s2 s2 d5").unwrap();
        assert_eq!(
            word.letters(),
            &[s(1), d(3), s(2), s(2), d(5)]
        );
        assert_eq!(word.to_string(), "s1 d3 s2 s2 d5");
        assert!(matches!(parse_word(3, "x1"), Err(GroupsError::BadToken(_))));
        assert!(matches!(parse_word(3, "s"), Err(GroupsError::BadToken(_))));
        assert_eq!(parse_word(3, "s6"), Err(GroupsError::WrongDimension));
    }

    #[test]
    fn reduction_examples() {
        let doubled = Word::new(3, vec![s(1), s(1)]).unwrap();
        assert!(reduce_word_n3(&doubled).unwrap().is_empty());

        // The length-4 chain s1 s2 s1 s2 rewrites to s2 s1.
        let chain = Word::new(3, vec![s(1), s(2), s(1), s(2)]).unwrap();
        let reduced = reduce_word_n3(&chain).unwrap();
        assert_eq!(reduced.letters(), &[s(2), s(1)]);
        assert_eq!(
            word_to_matrix(&chain).unwrap(),
            word_to_matrix(&reduced).unwrap()
        );

        // A length-6 chain a b a c b c.
        let chain6 = Word::new(3, vec![s(1), s(2), s(1), s(3), s(2), s(3)]).unwrap();
        let reduced6 = reduce_word_n3(&chain6).unwrap();
        assert_eq!(reduced6.letters(), &[s(2), s(1), s(3), s(2)]);
        assert_eq!(
            word_to_matrix(&chain6).unwrap(),
            word_to_matrix(&reduced6).unwrap()
        );

        // Already-reduced words are fixpoints.
        let fixed = Word::new(3, vec![s(1), s(2), s(3), s(1)]).unwrap();
        assert!(is_reduced_n3(&fixed).unwrap());
        assert_eq!(reduce_word_n3(&fixed).unwrap(), fixed);

        let dual_word = Word::new(3, vec![d(1)]).unwrap();
        assert_eq!(
            reduce_word_n3(&dual_word),
            Err(GroupsError::NonApollonianLetter)
        );
        let wrong_dim = Word::new(4, vec![s(1)]).unwrap();
        assert_eq!(reduce_word_n3(&wrong_dim), Err(GroupsError::WrongDimension));
    }

    #[test]
    fn reduction_is_sound_on_random_words() {
        let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
        for _ in 0..150 {
            let len = rng.gen_range(0..=30);
            let letters: Vec<GenSymbol> =
                (0..len).map(|_| s(rng.gen_range(1..=5))).collect();
            let word = Word::new(3, letters).unwrap();
            let reduced = reduce_word_n3(&word).unwrap();
            assert!(is_reduced_n3(&reduced).unwrap());
            assert!(reduced.len() <= word.len());
            assert_eq!(
                word_to_matrix(&word).unwrap(),
                word_to_matrix(&reduced).unwrap()
            );
        }
    }

    #[test]
    fn mass_certificate_examples() {
        let empty = Word::empty(3).unwrap();
        let cert = mass_certificate(&empty).unwrap();
        assert_eq!(cert.mass_trace, vec![rat(5)]);

        let single = Word::new(3, vec![s(1)]).unwrap();
        let cert = mass_certificate(&single).unwrap();
        assert_eq!(cert.mass_trace, vec![rat(5), rat(7)]);
        assert_eq!(cert.deltas, vec![rat(2)]);

        let unreduced = Word::new(3, vec![s(1), s(1)]).unwrap();
        assert_eq!(mass_certificate(&unreduced), Err(GroupsError::NotReduced));
    }

    #[test]
    fn mass_certificate_on_random_reduced_words() {
        let mut rng = ChaCha20Rng::seed_from_u64(0xacc);
        let mut nonempty_seen = 0;
        for _ in 0..100 {
            let len = rng.gen_range(1..=20);
            let letters: Vec<GenSymbol> =
                (0..len).map(|_| s(rng.gen_range(1..=5))).collect();
            let word = reduce_word_n3(&Word::new(3, letters).unwrap()).unwrap();
            let cert = mass_certificate(&word).unwrap();
            for pair in cert.mass_trace.windows(2) {
                assert!(pair[1] > pair[0]);
            }
            if !word.is_empty() {
                nonempty_seen += 1;
                assert!(*cert.mass_trace.last().unwrap() >= rat(7));
                // Mass ≥ 7 > 5 certifies the matrix is not the identity.
                assert_ne!(word_to_matrix(&word).unwrap(), RationalMatrix::identity(5));
            }
        }
        assert!(nonempty_seen > 50, "sampling should hit nonempty reduced words");
    }

    #[test]
    fn free_reduce_examples() {
        let w = Word::new(4, vec![s(1), s(2), s(2), s(1)]).unwrap();
        assert!(free_reduce(&w).unwrap().is_empty());

        let alternating = Word::new(4, vec![s(1), s(2), s(1), s(2)]).unwrap();
        let reduced = free_reduce(&alternating).unwrap();
        assert_eq!(reduced, alternating);
        assert_ne!(
            word_to_matrix(&alternating).unwrap(),
            RationalMatrix::identity(6)
        );

        let mixed = Word::new(3, vec![s(1), d(2), s(1)]).unwrap();
        let reduced = free_reduce(&mixed).unwrap();
        assert_eq!(reduced.letters(), &[d(2)]);
        assert_eq!(
            word_to_matrix(&mixed).unwrap(),
            word_to_matrix(&reduced).unwrap()
        );

        // Same-index mixed letters do not commute and must not cancel.
        let blocked = Word::new(3, vec![s(1), d(1), s(1)]).unwrap();
        assert_eq!(free_reduce(&blocked).unwrap(), blocked);
    }

    #[test]
    fn free_reduce_is_sound_on_random_mixed_words() {
        let mut rng = ChaCha20Rng::seed_from_u64(0xf4ee);
        for _ in 0..100 {
            let len = rng.gen_range(0..=16);
            let letters: Vec<GenSymbol> = (0..len)
                .map(|_| {
                    let index = rng.gen_range(1..=6);
                    if rng.gen_bool(0.5) {
                        s(index)
                    } else {
                        d(index)
                    }
                })
                .collect();
            let word = Word::new(4, letters).unwrap();
            let reduced = free_reduce(&word).unwrap();
            assert!(reduced.len() <= word.len());
            assert_eq!(
                word_to_matrix(&word).unwrap(),
                word_to_matrix(&reduced).unwrap()
            );
        }
    }

    #[test]
    fn nonempty_free_words_are_nontrivial_in_dimension_four() {
        let mut rng = ChaCha20Rng::seed_from_u64(0x44);
        let mut checked = 0;
        for _ in 0..120 {
            let len = rng.gen_range(1..=12);
            let letters: Vec<GenSymbol> =
                (0..len).map(|_| s(rng.gen_range(1..=6))).collect();
            let word = free_reduce(&Word::new(4, letters).unwrap()).unwrap();
            if word.is_empty() {
                continue;
            }
            checked += 1;
            assert_ne!(word_to_matrix(&word).unwrap(), RationalMatrix::identity(6));
        }
        assert!(checked > 60);
    }

    #[test]
    fn rotation_angles() {
        let theta3 = pair_rotation_angle(3).unwrap();
        assert!((theta3 - 2.0 * std::f64::consts::PI / 3.0).abs() <= 1e-12);
        let theta4 = pair_rotation_angle(4).unwrap();
        assert!((theta4 - 2.0 * (1.0f64 / 3.0).acos()).abs() <= 1e-12);
        assert!((theta4 - 2.46191883468).abs() <= 1e-9);
        let theta2 = pair_rotation_angle(2).unwrap();
        assert_eq!(theta2, 0.0);
        // Consistency with the cube relation: 3θ₃ = 2π.
        assert!((3.0 * theta3 - 2.0 * std::f64::consts::PI).abs() <= 1e-12);
    }

    #[test]
    fn generator_cache_returns_consistent_matrices() {
        let a = apollonian_generator(5, 3).unwrap();
        let b = apollonian_generator(5, 3).unwrap();
        assert_eq!(a, b);
        let c = dual_generator(5, 3).unwrap();
        let d2 = dual_generator(5, 3).unwrap();
        assert_eq!(c, d2);
        assert_ne!(a, c);
    }
}
