//! Orbits of Descartes configurations under the reflection groups:
//! breadth-first generation in normal-form words, curvature spectra,
//! integrality reporting for the curvature denominators, and verification
//! of the packing (non-crossing) property across configurations.

use crate::arith::{prime_factors, ArithError};
use crate::configs::{validate_exact, validate_float, ConfigsError, DescartesConfig};
use crate::exactq::{mat_mul, ExactqError, Rational, RationalMatrix};
use crate::groups::{
    apollonian_generator, dual_generator, find_chain_subword, GenKind, GenSymbol, GroupsError,
    Word,
};
use crate::spheres::{classify_pair, PairClass, SpheresError};
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

/// Default traversal caps: exponential branching makes deeper orbits a
/// deliberate opt-in through the explicit-limit entry point.
pub const DEFAULT_MAX_DEPTH: usize = 4;
pub const DEFAULT_MAX_ELEMENTS: usize = 100_000;

/// Quantization grid for deduplicating float-backed coordinate matrices.
const DEDUP_GRID: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum EnsemblesError {
    /// Requested depth exceeds the default cap.
    DepthLimit(usize),
    /// The orbit grew past the element cap.
    ElementLimit(usize),
    /// Exact curvature data is unavailable for this orbit.
    FloatOrbit,
    /// An orbit JSON record is missing fields or malformed.
    BadRecord(String),
    Configs(ConfigsError),
    Groups(GroupsError),
    Spheres(SpheresError),
    Exactq(ExactqError),
    Arith(ArithError),
}

impl fmt::Display for EnsemblesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsemblesError::DepthLimit(d) => {
                write!(f, "depth {d} exceeds the default cap {DEFAULT_MAX_DEPTH}")
            }
            EnsemblesError::ElementLimit(cap) => {
                write!(f, "orbit exceeded the element cap {cap}")
            }
            EnsemblesError::FloatOrbit => {
                write!(f, "exact curvature data unavailable for a float-backed orbit")
            }
            EnsemblesError::Configs(e) => write!(f, "{e}"),
            EnsemblesError::Groups(e) => write!(f, "{e}"),
            EnsemblesError::Spheres(e) => write!(f, "{e}"),
            EnsemblesError::Exactq(e) => write!(f, "{e}"),
            EnsemblesError::Arith(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EnsemblesError {}

impl From<ConfigsError> for EnsemblesError {
    fn from(e: ConfigsError) -> Self {
        EnsemblesError::Configs(e)
    }
}

impl From<GroupsError> for EnsemblesError {
    fn from(e: GroupsError) -> Self {
        EnsemblesError::Groups(e)
    }
}

impl From<SpheresError> for EnsemblesError {
    fn from(e: SpheresError) -> Self {
        EnsemblesError::Spheres(e)
    }
}

impl From<ExactqError> for EnsemblesError {
    fn from(e: ExactqError) -> Self {
        EnsemblesError::Exactq(e)
    }
}

impl From<ArithError> for EnsemblesError {
    fn from(e: ArithError) -> Self {
        EnsemblesError::Arith(e)
    }
}

/// Which group drives the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Apollonian,
    Dual,
    Super,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GroupKind::Apollonian => "apollonian",
            GroupKind::Dual => "dual",
            GroupKind::Super => "super",
        };
        write!(f, "{name}")
    }
}

impl FromStr for GroupKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "apollonian" => Ok(GroupKind::Apollonian),
            "dual" => Ok(GroupKind::Dual),
            "super" => Ok(GroupKind::Super),
            other => Err(format!("unknown group '{other}'")),
        }
    }
}

/// One orbit member: the normal-form word and the configuration it maps
/// the seed to.
#[derive(Debug, Clone)]
pub struct OrbitElement {
    pub word: Word,
    pub config: DescartesConfig,
}

/// A depth-bounded orbit of a seed configuration.
#[derive(Debug, Clone)]
pub struct Orbit {
    seed: DescartesConfig,
    group: GroupKind,
    depth: usize,
    elements: Vec<OrbitElement>,
    collisions: usize,
}

impl Orbit {
    pub fn seed(&self) -> &DescartesConfig {
        &self.seed
    }

    pub fn group(&self) -> GroupKind {
        self.group
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn elements(&self) -> &[OrbitElement] {
        &self.elements
    }

    /// Distinct normal-form words that mapped to an already-seen
    /// configuration.
    pub fn collisions(&self) -> usize {
        self.collisions
    }
}

/// Flattened dedup key: exact entries when available, else entries
/// snapped to the quantization grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum MatrixKey {
    Exact(Vec<Rational>),
    Quantized(Vec<i64>),
}

fn exact_key(w: &RationalMatrix) -> MatrixKey {
    let mut flat = Vec::with_capacity(w.rows() * w.cols());
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            flat.push(w.at(i, j).clone());
        }
    }
    MatrixKey::Exact(flat)
}

fn quantized_key(rows: &[Vec<f64>]) -> MatrixKey {
    MatrixKey::Quantized(
        rows.iter()
            .flat_map(|r| r.iter().map(|x| (x / DEDUP_GRID).round() as i64))
            .collect(),
    )
}

fn config_key(config: &DescartesConfig) -> MatrixKey {
    match config.exact_matrix() {
        Some(w) => exact_key(w),
        None => quantized_key(config.rows_f64()),
    }
}

fn rational_rows_to_f64(m: &RationalMatrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).to_f64().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn f64_product(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = a.len();
    let mut out = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..dim {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

fn mat_vec(m: &RationalMatrix, v: &[Rational]) -> Vec<Rational> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| m.at(i, j) * &v[j])
                .fold(Rational::zero(), |a, x| a + x)
        })
        .collect()
}

fn letters_for(group: GroupKind, n: usize) -> Vec<GenSymbol> {
    let dim = n + 2;
    let mut letters = Vec::new();
    if matches!(group, GroupKind::Dual | GroupKind::Super) {
        letters.extend((1..=dim).map(GenSymbol::dual));
    }
    if matches!(group, GroupKind::Apollonian | GroupKind::Super) {
        letters.extend((1..=dim).map(GenSymbol::apollonian));
    }
    letters
}

/// Whether appending `next` keeps the word in the orbit's normal form:
/// never an immediate repeat; in the combined group a dual letter may not
/// follow a curvature-side letter it commutes with (the commuted word is
/// enumerated instead); in the dimension-3 curvature-side group the word
/// must not complete a braid-chain subword.
fn allowed_append(
    group: GroupKind,
    n: usize,
    letters: &[GenSymbol],
    next: GenSymbol,
) -> bool {
    if let Some(&last) = letters.last() {
        if last == next {
            return false;
        }
        if group == GroupKind::Super
            && last.kind == GenKind::Apollonian
            && next.kind == GenKind::Dual
            && last.index != next.index
        {
            return false;
        }
    }
    if group == GroupKind::Apollonian && n == 3 {
        let mut candidate = letters.to_vec();
        candidate.push(next);
        if find_chain_subword(&candidate).is_some() {
            return false;
        }
    }
    true
}

/// Generate the orbit with the default caps (depth at most 4, at most
/// 100 000 elements).
pub fn generate_orbit(
    seed: &DescartesConfig,
    group: GroupKind,
    depth: usize,
) -> Result<Orbit, EnsemblesError> {
    if depth > DEFAULT_MAX_DEPTH {
        return Err(EnsemblesError::DepthLimit(depth));
    }
    generate_orbit_with_limit(seed, group, depth, DEFAULT_MAX_ELEMENTS)
}

/// Breadth-first orbit generation over normal-form words of length at
/// most `depth`, deduplicating configurations by exact coordinates (or by
/// grid-quantized coordinates for float-backed seeds). Every element is
/// re-validated on construction; exact curvature columns propagate to all
/// elements whenever the seed carries one.
pub fn generate_orbit_with_limit(
    seed: &DescartesConfig,
    group: GroupKind,
    depth: usize,
    max_elements: usize,
) -> Result<Orbit, EnsemblesError> {
    let n = seed.n();
    let dim = n + 2;
    let letters = letters_for(group, n);
    let seed_curvatures = seed.curvatures_exact().ok();
    let seed_exact = seed.exact_matrix().cloned();
    let seed_rows = seed.rows_f64().to_vec();

    let mut seen: HashMap<MatrixKey, usize> = HashMap::new();
    let mut elements: Vec<OrbitElement> = Vec::new();
    let mut collisions = 0usize;
    if max_elements == 0 {
        return Err(EnsemblesError::ElementLimit(max_elements));
    }
    seen.insert(config_key(seed), 0);
    elements.push(OrbitElement { word: Word::empty(n)?, config: seed.clone() });

    // Frontier entries carry the word letters and the exact accumulated
    // generator product (generators are rational in every dimension).
    let mut frontier: Vec<(Vec<GenSymbol>, RationalMatrix)> =
        vec![(Vec::new(), RationalMatrix::identity(dim))];

    for _level in 1..=depth {
        let mut next_frontier = Vec::new();
        for (word_letters, u) in &frontier {
            for &letter in &letters {
                if !allowed_append(group, n, word_letters, letter) {
                    continue;
                }
                let g = match letter.kind {
                    GenKind::Apollonian => apollonian_generator(n, letter.index)?,
                    GenKind::Dual => dual_generator(n, letter.index)?,
                };
                let u_next = mat_mul(u, &g)?;
                let mut config = match &seed_exact {
                    Some(w) => validate_exact(n, mat_mul(&u_next, w)?)?,
                    None => {
                        validate_float(n, f64_product(&rational_rows_to_f64(&u_next), &seed_rows))?
                    }
                };
                if seed_exact.is_none() {
                    if let Some(b) = &seed_curvatures {
                        config = config.with_exact_curvatures(mat_vec(&u_next, b))?;
                    }
                }
                let mut word_next = word_letters.clone();
                word_next.push(letter);
                match seen.entry(config_key(&config)) {
                    std::collections::hash_map::Entry::Occupied(_) => {
                        collisions += 1;
                    }
                    std::collections::hash_map::Entry::Vacant(slot) => {
                        if elements.len() >= max_elements {
                            return Err(EnsemblesError::ElementLimit(max_elements));
                        }
                        slot.insert(elements.len());
                        elements.push(OrbitElement {
                            word: Word::new(n, word_next.clone())?,
                            config,
                        });
                        next_frontier.push((word_next, u_next));
                    }
                }
            }
        }
        frontier = next_frontier;
    }

    Ok(Orbit { seed: seed.clone(), group, depth, elements, collisions })
}

/// All curvatures across the orbit's distinct spheres, as a sorted
/// multiset with one entry per distinct sphere. Exact curvature data is
/// used when the orbit carries it; otherwise the float curvatures are
/// lifted verbatim (every float is a dyadic rational).
pub fn curvature_spectrum(orbit: &Orbit) -> Result<Vec<Rational>, EnsemblesError> {
    let dim = orbit.seed.n() + 2;
    let mut seen_rows: HashSet<MatrixKey> = HashSet::new();
    let mut spectrum = Vec::new();
    for element in &orbit.elements {
        let config = &element.config;
        let exact_b = config.curvatures_exact().ok();
        for i in 0..dim {
            let row_key = match config.exact_matrix() {
                Some(w) => MatrixKey::Exact((0..dim).map(|j| w.at(i, j).clone()).collect()),
                None => MatrixKey::Quantized(
                    config.rows_f64()[i]
                        .iter()
                        .map(|x| (x / DEDUP_GRID).round() as i64)
                        .collect(),
                ),
            };
            if !seen_rows.insert(row_key) {
                continue;
            }
            let curvature = match &exact_b {
                Some(b) => b[i].clone(),
                None => Rational::from_float(config.rows_f64()[i][1])
                    .ok_or(EnsemblesError::FloatOrbit)?,
            };
            spectrum.push(curvature);
        }
    }
    spectrum.sort();
    Ok(spectrum)
}

/// The set of primes occurring in curvature denominators across the
/// orbit. Requires exact curvature data on every element.
pub fn s_integrality_report(orbit: &Orbit) -> Result<BTreeSet<u64>, EnsemblesError> {
    let mut primes = BTreeSet::new();
    for element in &orbit.elements {
        let b = element
            .config
            .curvatures_exact()
            .map_err(|_| EnsemblesError::FloatOrbit)?;
        for curvature in &b {
            let denom = curvature.denom();
            if !denom.is_one() {
                prime_factors(denom, &mut primes)?;
            }
        }
    }
    Ok(primes)
}

/// Classification counts for every cross-configuration sphere pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingReport {
    pub pairs: usize,
    pub coincident: usize,
    pub tangent: usize,
    pub disjoint: usize,
    pub crossing: usize,
}

impl PackingReport {
    /// The weak packing property: no crossings between configurations.
    pub fn is_packing(&self) -> bool {
        self.crossing == 0
    }
}

/// Classify every pair of spheres drawn from distinct configurations of
/// the orbit.
pub fn check_packing(orbit: &Orbit) -> Result<PackingReport, EnsemblesError> {
    let spheres: Vec<_> = orbit
        .elements
        .iter()
        .map(|e| e.config.to_spheres())
        .collect::<Result<Vec<_>, _>>()?;
    let mut report =
        PackingReport { pairs: 0, coincident: 0, tangent: 0, disjoint: 0, crossing: 0 };
    for i in 0..spheres.len() {
        for j in i + 1..spheres.len() {
            for a in &spheres[i] {
                for b in &spheres[j] {
                    report.pairs += 1;
                    match classify_pair(a, b) {
                        PairClass::Coincident => report.coincident += 1,
                        PairClass::Tangent => report.tangent += 1,
                        PairClass::Disjoint => report.disjoint += 1,
                        PairClass::Crossing => report.crossing += 1,
                    }
                }
            }
        }
    }
    Ok(report)
}

/// JSON dump of the orbit: words as token strings plus full
/// configuration records.
pub fn orbit_to_json(orbit: &Orbit) -> Value {
    let elements: Vec<Value> = orbit
        .elements
        .iter()
        .map(|e| {
            json!({
                "word": e.word.to_string(),
                "config": crate::configs::config_to_json(&e.config),
            })
        })
        .collect();
    json!({
        "n": orbit.seed.n(),
        "group": orbit.group.to_string(),
        "depth": orbit.depth,
        "collisions": orbit.collisions,
        "elements": elements,
    })
}
