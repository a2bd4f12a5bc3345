//! Rational-equivalence arithmetic: p-adic symbols mod 8, square classes,
//! the Hasse-Minkowski decision for pairs of forms, the closed-form dimension
//! predicate, and a bounded search for exact rational intertwiners.

use crate::exactq::{congruence, determinant, inverse, mat_mul, rat, Rational, RationalMatrix};
use crate::forms::{
    conway_diagonalize, descartes_form, lorentz_form, signature, wilker_form, FormsError,
    QuadraticForm,
};
use num::bigint::BigInt;
use num::integer::Roots;
use num::{One, Signed, Zero};
use num_traits::ToPrimitive;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    /// The scalar symbol is undefined at zero.
    ZeroInput,
    NotPrime(u64),
    DimensionMismatch,
    Singular,
    /// Intertwiner preconditions require rational equivalence.
    NotEquivalent,
    /// Bounded search ended without a witness; not a refutation.
    Exhausted,
    /// A cofactor exceeded the supported factorization range.
    FactorizationOutOfRange,
    Forms(FormsError),
}

impl std::fmt::Display for ArithError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArithError::ZeroInput => write!(f, "p-adic symbol is undefined at zero"),
            ArithError::NotPrime(p) => write!(f, "{p} is not prime"),
            ArithError::DimensionMismatch => write!(f, "forms have different dimensions"),
            ArithError::Singular => write!(f, "form is singular"),
            ArithError::NotEquivalent => write!(f, "forms are not rationally equivalent"),
            ArithError::Exhausted => write!(f, "height bound exhausted without a witness"),
            ArithError::FactorizationOutOfRange => {
                write!(f, "a value was too large to factor")
            }
            ArithError::Forms(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ArithError {}

impl From<FormsError> for ArithError {
    fn from(e: FormsError) -> Self {
        match e {
            FormsError::Singular => ArithError::Singular,
            other => ArithError::Forms(other),
        }
    }
}

impl From<crate::exactq::ExactqError> for ArithError {
    fn from(e: crate::exactq::ExactqError) -> Self {
        ArithError::Forms(FormsError::Exactq(e))
    }
}

/// The mod-8 symbol of a nonzero scalar or diagonal form at a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicSymbol {
    pub p: u64,
    pub value: u8,
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Legendre symbol (b/p) for odd prime p and b coprime to p, via Euler's
/// criterion. Returns 1 or -1.
fn legendre(b: &BigInt, p: u64) -> i8 {
    let pb = BigInt::from(p);
    let mut r = b % &pb;
    if r.is_negative() {
        r += &pb;
    }
    debug_assert!(!r.is_zero(), "legendre requires (b, p) = 1");
    let e = (&pb - BigInt::one()) / BigInt::from(2);
    let v = r.modpow(&e, &pb);
    if v.is_one() {
        1
    } else {
        -1
    }
}

fn residue_mod_8(b: &BigInt) -> u8 {
    let eight = BigInt::from(8);
    let mut r = b % &eight;
    if r.is_negative() {
        r += &eight;
    }
    r.to_u8().expect("residue fits")
}

/// Mod-8 symbol of a nonzero integer `d = b·p^l` with `(b, p) = 1`.
///
/// Odd p: 1 for even l; `p` or `p+4` mod 8 for odd l as the Legendre symbol
/// of b is +1 or -1. p = 2: `b` mod 8 for even l; for odd l, `b` when
/// `b ≡ ±1 (mod 8)`, else `b + 4`.
pub fn padic_invariant_scalar(d: &BigInt, p: u64) -> Result<PadicSymbol, ArithError> {
    if d.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    let pb = BigInt::from(p);
    let mut b = d.clone();
    let mut l = 0u32;
    while (&b % &pb).is_zero() {
        b /= &pb;
        l += 1;
    }
    let value = if p != 2 {
        if l % 2 == 0 {
            1
        } else if legendre(&b, p) == 1 {
            (p % 8) as u8
        } else {
            ((p + 4) % 8) as u8
        }
    } else {
        let b8 = residue_mod_8(&b);
        if l % 2 == 0 {
            b8
        } else if b8 == 1 || b8 == 7 {
            b8
        } else {
            (b8 + 4) % 8
        }
    };
    Ok(PadicSymbol { p, value })
}

/// Clear a rational to an integer in the same square class
/// (multiply by denominator squared).
fn clear_to_integer(r: &Rational) -> BigInt {
    r.numer() * r.denom()
}

/// Mod-8 symbol of a diagonal form: the sum of scalar symbols of the
/// entries, each cleared to an integer in its square class.
pub fn form_padic_invariant(diagonal: &[Rational], p: u64) -> Result<PadicSymbol, ArithError> {
    if !is_prime_u64(p) {
        return Err(ArithError::NotPrime(p));
    }
    let mut acc = 0u64;
    for entry in diagonal {
        if entry.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        acc += u64::from(padic_invariant_scalar(&clear_to_integer(entry), p)?.value);
    }
    Ok(PadicSymbol {
        p,
        value: (acc % 8) as u8,
    })
}

/// Exact rational square root, when one exists.
fn sqrt_rational(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(Rational::new(ns, ds))
    } else {
        None
    }
}

/// True iff a/b is a nonzero square in the rationals.
pub fn square_class_equal(a: &Rational, b: &Rational) -> Result<bool, ArithError> {
    if a.is_zero() || b.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    Ok(sqrt_rational(&(a / b)).is_some())
}

/// Prime factors of a u64 by trial division with Miller-Rabin shortcuts.
fn prime_factors_u64(mut r: u64, out: &mut BTreeSet<u64>) {
    while r > 1 {
        if is_prime_u64(r) {
            out.insert(r);
            return;
        }
        let mut d = 2u64;
        let mut found = false;
        while (d as u128) * (d as u128) <= r as u128 {
            if r % d == 0 {
                out.insert(d);
                while r % d == 0 {
                    r /= d;
                }
                found = true;
                break;
            }
            d = if d == 2 { 3 } else { d + 2 };
        }
        if !found {
            out.insert(r);
            return;
        }
    }
}

/// Prime factors of |x|. Values beyond u64 first shed their small prime
/// factors; a cofactor still beyond u64 afterwards is an error.
pub(crate) fn prime_factors(x: &BigInt, out: &mut BTreeSet<u64>) -> Result<(), ArithError> {
    let mut rest = x.abs();
    if rest.is_zero() || rest.is_one() {
        return Ok(());
    }
    if let Some(r) = rest.to_u64() {
        prime_factors_u64(r, out);
        return Ok(());
    }
    let mut d = 2u64;
    while d <= 1 << 20 {
        let db = BigInt::from(d);
        if (&rest % &db).is_zero() {
            out.insert(d);
            while (&rest % &db).is_zero() {
                rest /= &db;
            }
        }
        if let Some(r) = rest.to_u64() {
            prime_factors_u64(r, out);
            return Ok(());
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    Err(ArithError::FactorizationOutOfRange)
}

/// Hasse-Minkowski decision: same dimension and signature, determinant ratio
/// a nonzero rational square, and equal mod-8 symbols at 2 and at every prime
/// of the cleared determinants and cleared diagonal entries. Symbols at all
/// other primes agree automatically (every entry is a unit there).
pub fn rationally_equivalent(q1: &QuadraticForm, q2: &QuadraticForm) -> Result<bool, ArithError> {
    if q1.dim != q2.dim {
        return Err(ArithError::DimensionMismatch);
    }
    let det1 = determinant(&q1.matrix)?;
    let det2 = determinant(&q2.matrix)?;
    if det1.is_zero() || det2.is_zero() {
        return Err(ArithError::Singular);
    }
    let d1 = conway_diagonalize(q1)?;
    let d2 = conway_diagonalize(q2)?;
    if signature(&d1)? != signature(&d2)? {
        return Ok(false);
    }
    if !square_class_equal(&det1, &det2)? {
        return Ok(false);
    }
    let mut primes: BTreeSet<u64> = BTreeSet::new();
    primes.insert(2);
    prime_factors(&clear_to_integer(&det1), &mut primes)?;
    prime_factors(&clear_to_integer(&det2), &mut primes)?;
    for entry in d1.diagonal.iter().chain(d2.diagonal.iter()) {
        prime_factors(&clear_to_integer(entry), &mut primes)?;
    }
    for &p in &primes {
        if form_padic_invariant(&d1.diagonal, p)? != form_padic_invariant(&d2.diagonal, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closed-form dimension predicate: n is twice a perfect square or an odd
/// perfect square. Shares no code with [`rationally_equivalent`].
pub fn super_rational_dimension(n: usize) -> bool {
    if n % 2 == 0 {
        let half = n / 2;
        let s = half.sqrt();
        s * s == half && half >= 1
    } else {
        let s = n.sqrt();
        s * s == n
    }
}

/// D-orthogonal complement of a set of columns: a basis (as columns of the
/// returned matrix) of the exact nullspace of the system `colᵢᵀ·D·v = 0`.
fn orthogonal_complement_basis(
    d: &RationalMatrix,
    columns: &[Vec<Rational>],
) -> Result<RationalMatrix, ArithError> {
    let dim = d.rows();
    // Constraint matrix: one row per fixed column, entries (colᵀD)_j.
    let mut sys = RationalMatrix::zeros(columns.len(), dim);
    for (i, col) in columns.iter().enumerate() {
        for j in 0..dim {
            let mut acc = Rational::zero();
            for k in 0..dim {
                acc += &col[k] * d.at(k, j);
            }
            sys.set(i, j, acc);
        }
    }
    // Row-reduce, then read the nullspace from the free columns.
    let mut a = sys;
    let rows = a.rows();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..dim {
        if r >= rows {
            break;
        }
        let pivot = (r..rows).find(|&i| !a.at(i, c).is_zero());
        let Some(p) = pivot else { continue };
        if p != r {
            for j in 0..dim {
                let (x, y) = (a.at(r, j).clone(), a.at(p, j).clone());
                a.set(r, j, y);
                a.set(p, j, x);
            }
        }
        let pv = a.at(r, c).clone();
        for j in 0..dim {
            a.set(r, j, a.at(r, j) / &pv);
        }
        for i in 0..rows {
            if i != r && !a.at(i, c).is_zero() {
                let f = a.at(i, c).clone();
                for j in 0..dim {
                    let v = a.at(i, j) - &f * a.at(r, j);
                    a.set(i, j, v);
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free_cols: Vec<usize> = (0..dim).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = RationalMatrix::zeros(dim, free_cols.len());
    for (bi, &fc) in free_cols.iter().enumerate() {
        basis.set(fc, bi, rat(1));
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            basis.set(pc, bi, -a.at(ri, fc).clone());
        }
    }
    Ok(basis)
}

/// Enumerate integer vectors of length `m` with max-norm exactly `shell`,
/// lexicographically, calling `f` until it returns true. Returns whether any
/// call succeeded.
fn for_each_shell_vector(m: usize, shell: i64, f: &mut dyn FnMut(&[i64]) -> bool) -> bool {
    fn rec(
        u: &mut Vec<i64>,
        m: usize,
        shell: i64,
        on_shell: bool,
        f: &mut dyn FnMut(&[i64]) -> bool,
    ) -> bool {
        if u.len() == m {
            return on_shell && f(u);
        }
        for v in -shell..=shell {
            u.push(v);
            if rec(u, m, shell, on_shell || v.abs() == shell, f) {
                u.pop();
                return true;
            }
            u.pop();
        }
        false
    }
    rec(&mut Vec::with_capacity(m), m, shell, false, f)
}

/// Bounded deterministic search for `W` with `Wᵀ·q1·W = q2`, exact.
///
/// Both forms are first diagonalized; the witness is built column by column
/// in the diagonal picture. A candidate column is accepted when its value
/// differs from the target by a nonzero rational square, which the column is
/// then scaled by. Greedy extension always remains completable by Witt
/// cancellation, so no backtracking is needed; only the height bound can
/// stop the search.
pub fn find_rational_intertwiner(
    q1: &QuadraticForm,
    q2: &QuadraticForm,
    height_bound: u32,
) -> Result<RationalMatrix, ArithError> {
    if !rationally_equivalent(q1, q2)? {
        return Err(ArithError::NotEquivalent);
    }

    // Known closed-form witnesses.
    if let (Ok(d2), Ok(l2), Ok(w2)) = (descartes_form(2), lorentz_form(2), wilker_form(2)) {
        if *q1 == d2 && *q2 == l2 {
            let j0 = crate::forms::lorentz_intertwiner_n2();
            let image = congruence(&j0, &q1.matrix)?;
            debug_assert_eq!(image, q2.matrix);
            return Ok(j0);
        }
        if *q1 == d2 && *q2 == w2 {
            // Rows are the curvature-center coordinates of an integral
            // strip configuration: planes x1 = ±1 plus unit circles at
            // (0, ±1).
            let w = RationalMatrix::from_i64_rows(&[
                &[2, 0, 1, 0],
                &[2, 0, -1, 0],
                &[0, 1, 0, 1],
                &[0, 1, 0, -1],
            ]);
            let image = congruence(&w, &q1.matrix)?;
            debug_assert_eq!(image, q2.matrix);
            return Ok(w);
        }
    }

    let dim = q1.dim;
    let diag1 = conway_diagonalize(q1)?;
    let diag2 = conway_diagonalize(q2)?;
    let mut d1 = RationalMatrix::zeros(dim, dim);
    for (i, v) in diag1.diagonal.iter().enumerate() {
        d1.set(i, i, v.clone());
    }

    // Deterministic enumeration budget per column keeps the bounded search
    // bounded in time as well as height.
    const CANDIDATE_BUDGET: u64 = 2_000_000;

    let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(dim);
    for target in &diag2.diagonal {
        let basis = orthogonal_complement_basis(&d1, &columns)?;
        let m = basis.cols();
        if m == 0 {
            return Err(ArithError::Exhausted);
        }
        // Gram matrix of the complement: G = basisᵀ·D1·basis.
        let gram = congruence(&basis, &d1)?;
        let mut found: Option<Vec<Rational>> = None;
        let mut budget = CANDIDATE_BUDGET;
        'shells: for shell in 1..=i64::from(height_bound) {
            let hit = for_each_shell_vector(m, shell, &mut |u| {
                if budget == 0 {
                    return true; // stop enumerating; found stays None
                }
                budget -= 1;
                let mut val = Rational::zero();
                for i in 0..m {
                    for j in 0..m {
                        if gram.at(i, j).is_zero() {
                            continue;
                        }
                        val += gram.at(i, j) * rat(u[i]) * rat(u[j]);
                    }
                }
                if val.is_zero() {
                    return false;
                }
                let Some(alpha) = sqrt_rational(&(target / &val)) else {
                    return false;
                };
                let mut col = vec![Rational::zero(); dim];
                for (bi, &coeff) in u.iter().enumerate() {
                    if coeff == 0 {
                        continue;
                    }
                    for row in 0..dim {
                        col[row] += basis.at(row, bi) * rat(coeff) * &alpha;
                    }
                }
                found = Some(col);
                true
            });
            if hit {
                break 'shells;
            }
        }
        match found {
            Some(col) => columns.push(col),
            None => return Err(ArithError::Exhausted),
        }
    }

    let mut s = RationalMatrix::zeros(dim, dim);
    for (j, col) in columns.iter().enumerate() {
        for i in 0..dim {
            s.set(i, j, col[i].clone());
        }
    }
    // W = T1 · S · T2⁻¹ carries q1 to q2 exactly.
    let w = mat_mul(&mat_mul(&diag1.transform, &s)?, &inverse(&diag2.transform)?)?;
    let image = congruence(&w, &q1.matrix)?;
    assert_eq!(image, q2.matrix, "constructed intertwiner must verify");
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::ratio;
    use proptest::prelude::*;

    fn symbol(d: i64, p: u64) -> u8 {
        padic_invariant_scalar(&BigInt::from(d), p).unwrap().value
    }

    #[test]
    fn scalar_symbols_frozen_table() {
        assert_eq!(symbol(3, 3), 3);
        assert_eq!(symbol(2, 2), 1);
        assert_eq!(symbol(9, 5), 1);
        assert_eq!(symbol(-2, 2), 7);
        assert_eq!(symbol(6, 3), 7);
        assert_eq!(symbol(5, 5), 5);
        assert_eq!(symbol(10, 5), 1);
        assert_eq!(symbol(8, 2), 1);
        assert_eq!(symbol(12, 2), 3);
        assert_eq!(symbol(-4, 2), 7);
        assert_eq!(symbol(-7, 7), 3);
        assert_eq!(symbol(1, 2), 1);
        assert_eq!(symbol(-1, 2), 7);
    }

    #[test]
    fn scalar_symbol_rejects_zero_and_composite() {
        assert_eq!(
            padic_invariant_scalar(&BigInt::zero(), 3),
            Err(ArithError::ZeroInput)
        );
        assert_eq!(
            padic_invariant_scalar(&BigInt::from(5), 6),
            Err(ArithError::NotPrime(6))
        );
    }

    #[test]
    fn form_symbol_examples() {
        let d = vec![rat(2), rat(2), rat(2), rat(-2)];
        assert_eq!(form_padic_invariant(&d, 2).unwrap().value, 2);
        let units = vec![rat(1), rat(1)];
        for p in [2u64, 3, 5, 7] {
            assert_eq!(form_padic_invariant(&units, p).unwrap().value, 2);
        }
    }

    #[test]
    fn descartes_and_wilker_agree_at_3_in_dimension_4() {
        let d4 = conway_diagonalize(&descartes_form(4).unwrap()).unwrap();
        let w4 = crate::forms::wilker_diagonal(4).unwrap();
        assert_eq!(
            form_padic_invariant(&d4.diagonal, 3).unwrap(),
            form_padic_invariant(&w4.diagonal, 3).unwrap()
        );
    }

    #[test]
    fn square_class_cases() {
        assert!(square_class_equal(&ratio(-1, 4), &rat(-4096)).unwrap());
        assert!(!square_class_equal(&rat(-1), &rat(1)).unwrap());
        assert!(square_class_equal(&rat(18), &rat(2)).unwrap());
        assert_eq!(
            square_class_equal(&rat(0), &rat(1)),
            Err(ArithError::ZeroInput)
        );
    }

    #[test]
    fn dimension_predicate_spot_values() {
        for n in [2usize, 8, 9, 18, 25, 49, 50] {
            assert!(super_rational_dimension(n), "n = {n}");
        }
        for n in [3usize, 4, 5, 6, 7, 10] {
            assert!(!super_rational_dimension(n), "n = {n}");
        }
    }

    #[test]
    fn equivalence_spot_values() {
        let check = |n: usize| {
            rationally_equivalent(&descartes_form(n).unwrap(), &wilker_form(n).unwrap()).unwrap()
        };
        assert!(check(2));
        assert!(!check(3));
        assert!(check(8));
    }

    #[test]
    fn equivalence_matches_closed_form_over_range() {
        for n in 2..=60usize {
            let hm =
                rationally_equivalent(&descartes_form(n).unwrap(), &wilker_form(n).unwrap())
                    .unwrap();
            assert_eq!(hm, super_rational_dimension(n), "n = {n}");
        }
    }

    #[test]
    fn intertwiner_fast_paths() {
        let d2 = descartes_form(2).unwrap();
        let l2 = lorentz_form(2).unwrap();
        let w2 = wilker_form(2).unwrap();
        let j0 = find_rational_intertwiner(&d2, &l2, 64).unwrap();
        assert_eq!(congruence(&j0, &d2.matrix).unwrap(), l2.matrix);
        let w = find_rational_intertwiner(&d2, &w2, 64).unwrap();
        assert_eq!(congruence(&w, &d2.matrix).unwrap(), w2.matrix);
    }

    #[test]
    fn intertwiner_general_search_path() {
        // Reversed order avoids the fast paths and exercises the search.
        let d2 = descartes_form(2).unwrap();
        let l2 = lorentz_form(2).unwrap();
        let w = find_rational_intertwiner(&l2, &d2, 64).unwrap();
        assert_eq!(congruence(&w, &l2.matrix).unwrap(), d2.matrix);
    }

    #[test]
    fn intertwiner_rejects_inequivalent() {
        let d3 = descartes_form(3).unwrap();
        let w3 = wilker_form(3).unwrap();
        assert_eq!(
            find_rational_intertwiner(&d3, &w3, 8),
            Err(ArithError::NotEquivalent)
        );
    }

    proptest! {
        #[test]
        fn symbol_invariant_under_squares(d in -50i64..50, s in 1i64..12, p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
            prop_assume!(d != 0);
            let plain = padic_invariant_scalar(&BigInt::from(d), p).unwrap();
            let scaled = padic_invariant_scalar(&BigInt::from(d * s * s), p).unwrap();
            prop_assert_eq!(plain, scaled);
        }

        #[test]
        fn form_symbol_invariant_under_entry_squares(n in -9i64..9, den in 1i64..5, s in 1i64..9) {
            prop_assume!(n != 0);
            let entry = ratio(n, den);
            let scaled = &entry * ratio(s * s, 1);
            for p in [2u64, 3, 5] {
                let a = form_padic_invariant(&[entry.clone()], p).unwrap();
                let b = form_padic_invariant(&[scaled.clone()], p).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
