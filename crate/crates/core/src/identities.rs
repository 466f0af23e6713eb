//! Executable checks of the closed-form Fibonacci/Lucas identities behind the
//! averaging results.
//!
//! Each equality `A = B` is written once, generically over an [`Eval`]
//! backend, and evaluated two ways: exactly with big integers while the
//! indices stay within the exact table, and as residues modulo a caller
//! modulus together with three fixed 61-bit primes. A check passes only if
//! every applicable path agrees.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::seq::{
    fib_exact, fib_mod, lucas_exact, lucas_mod, Modulus, EXACT_INDEX_MAX,
};

/// `2^61 - 1` and the next two primes below it.
pub const FIXED_PRIMES: [u64; 3] = [
    2_305_843_009_213_693_951,
    2_305_843_009_213_693_921,
    2_305_843_009_213_693_907,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("need m >= n >= 1, got m={m}, n={n}")]
    DifferenceOrder { m: u64, n: u64 },
    #[error("divisibility check needs 3 <= n <= 90, got {0}")]
    DivisorIndex(u64),
}

/// Arithmetic backend for the identity predicates.
pub trait Eval {
    type V: PartialEq + Clone;
    fn fib(&self, n: u64) -> Self::V;
    fn lucas(&self, n: u64) -> Self::V;
    fn constant(&self, c: u64) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
}

/// Exact values; only valid for indices up to [`EXACT_INDEX_MAX`].
pub struct Exact;

impl Eval for Exact {
    type V = BigUint;
    fn fib(&self, n: u64) -> BigUint {
        BigUint::from(fib_exact(n).expect("exact path index within table"))
    }
    fn lucas(&self, n: u64) -> BigUint {
        BigUint::from(lucas_exact(n).expect("exact path index within table"))
    }
    fn constant(&self, c: u64) -> BigUint {
        BigUint::from(c)
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a + b
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b
    }
}

/// Simultaneous residues modulo `K` moduli.
pub struct Residues<const K: usize>(pub [Modulus; K]);

impl<const K: usize> Residues<K> {
    fn each(&self, f: impl Fn(usize, Modulus) -> u64) -> [u64; K] {
        std::array::from_fn(|i| f(i, self.0[i]))
    }
}

impl Residues<4> {
    /// The caller's modulus plus [`FIXED_PRIMES`].
    pub fn with_fixed(m: Modulus) -> Self {
        let p = FIXED_PRIMES.map(|p| Modulus::new(p).expect("61-bit prime"));
        Residues([m, p[0], p[1], p[2]])
    }
}

impl<const K: usize> Eval for Residues<K> {
    type V = [u64; K];
    fn fib(&self, n: u64) -> [u64; K] {
        self.each(|_, m| fib_mod(n, m))
    }
    fn lucas(&self, n: u64) -> [u64; K] {
        self.each(|_, m| lucas_mod(n, m))
    }
    fn constant(&self, c: u64) -> [u64; K] {
        self.each(|_, m| m.reduce(c))
    }
    fn add(&self, a: &[u64; K], b: &[u64; K]) -> [u64; K] {
        self.each(|i, m| m.add(a[i], b[i]))
    }
    fn mul(&self, a: &[u64; K], b: &[u64; K]) -> [u64; K] {
        self.each(|i, m| m.mul(a[i], b[i]))
    }
}

/// The four lines of the `F_{4k+r} - 1` factorization, each as `(lhs, rhs)`
/// with the `-1` moved across: `F_{4k+2} = F_{2k} L_{2k+2} + 1` and so on.
pub fn f4k_factorization_sides<E: Eval>(e: &E, k: u64) -> [(E::V, E::V); 4] {
    let one = e.constant(1);
    let line = |f_idx: u64, a: u64, b: u64| {
        (e.fib(f_idx), e.add(&e.mul(&e.fib(a), &e.lucas(b)), &one))
    };
    [
        line(4 * k + 2, 2 * k, 2 * k + 2),
        line(4 * k + 3, 2 * k + 2, 2 * k + 1),
        line(4 * k + 4, 2 * k + 3, 2 * k + 1),
        line(4 * k + 5, 2 * k + 2, 2 * k + 3),
    ]
}

/// `L_{m+n} = L_{m-n} + L_m L_n` (n odd) or `L_{m-n} + 5 F_m F_n` (n even).
pub fn lucas_difference_sides<E: Eval>(e: &E, m: u64, n: u64) -> (E::V, E::V) {
    let product = if n % 2 == 1 {
        e.mul(&e.lucas(m), &e.lucas(n))
    } else {
        e.mul(&e.constant(5), &e.mul(&e.fib(m), &e.fib(n)))
    };
    (e.lucas(m + n), e.add(&e.lucas(m - n), &product))
}

fn all_equal<V: PartialEq>(sides: &[(V, V)]) -> bool {
    sides.iter().all(|(a, b)| a == b)
}

/// All four `F_{4k+r} - 1` identities, exactly when `4k + 5 <= 180` and
/// always modulo `m` and the fixed primes.
pub fn check_f4k_factorization(k: u64, m: Modulus) -> bool {
    let exact_ok = 4 * k + 5 > EXACT_INDEX_MAX || all_equal(&f4k_factorization_sides(&Exact, k));
    exact_ok && all_equal(&f4k_factorization_sides(&Residues::with_fixed(m), k))
}

/// `L_n mod 4`, exact when possible, with both paths required to agree.
fn lucas_mod4(n: u64) -> Option<u64> {
    let residue = lucas_mod(n, Modulus::new(4).unwrap());
    match lucas_exact(n) {
        Ok(v) if (v % 4) as u64 != residue => None,
        _ => Some(residue),
    }
}

/// `L_n = L_{n+6} (mod 4)`.
pub fn check_lucas_mod4_period(n: u64) -> bool {
    matches!((lucas_mod4(n), lucas_mod4(n + 6)), (Some(a), Some(b)) if a == b)
}

/// `L_{2k+1} + L_{2k+3} + L_{2k+5} = 0 (mod 4)`.
pub fn check_lucas_odd_triple(k: u64) -> bool {
    let terms = [2 * k + 1, 2 * k + 3, 2 * k + 5].map(lucas_mod4);
    terms
        .iter()
        .try_fold(0, |s, t| t.map(|t| s + t))
        .is_some_and(|s| s % 4 == 0)
}

/// `L_{2k+2} != 0 (mod 4)`, and `L_{2k+2} = 2 (mod 4)` when `3 | k + 1`.
pub fn check_lucas_even_nonzero(k: u64) -> bool {
    match lucas_mod4(2 * k + 2) {
        Some(0) | None => false,
        Some(r) => !(k + 1).is_multiple_of(3) || r == 2,
    }
}

pub fn check_lucas_difference(m: u64, n: u64, modulus: Modulus) -> Result<bool, IdentityError> {
    if n < 1 || m < n {
        return Err(IdentityError::DifferenceOrder { m, n });
    }
    let exact_ok = m + n > EXACT_INDEX_MAX || {
        let (a, b) = lucas_difference_sides(&Exact, m, n);
        a == b
    };
    let (a, b) = lucas_difference_sides(&Residues::with_fixed(modulus), m, n);
    Ok(exact_ok && a == b)
}

/// `F_n | F_m <=> n | m` for `3 <= n <= 90`, with `F_m mod F_n` by fast doubling.
pub fn check_fib_divisibility(n: u64, m: u64) -> Result<bool, IdentityError> {
    if !(3..=90).contains(&n) {
        return Err(IdentityError::DivisorIndex(n));
    }
    let fn_ = fib_exact(n).expect("n <= 90") as u64;
    let divides = fib_mod(m, Modulus::new(fn_).expect("F_90 < 2^62")) == 0;
    let exact_agrees = match fib_exact(m) {
        Ok(fm) => (fm % fn_ as u128 == 0) == divides,
        Err(_) => true,
    };
    Ok(exact_agrees && divides == m.is_multiple_of(n))
}

/// `24 | F_{12k}`.
pub fn check_24_divides_f12k(k: u64) -> bool {
    let residue = fib_mod(12 * k, Modulus::new(24).unwrap());
    let exact_ok = fib_exact(12 * k).map_or(true, |v| v % 24 == 0);
    residue == 0 && exact_ok
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    F4kFactorization,
    LucasPeriod4,
    LucasOddTriple,
    LucasEvenNonzero,
    LucasDifference,
    FibDivisibility,
    F12kDiv24,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::F4kFactorization,
        IdentityId::LucasPeriod4,
        IdentityId::LucasOddTriple,
        IdentityId::LucasEvenNonzero,
        IdentityId::LucasDifference,
        IdentityId::FibDivisibility,
        IdentityId::F12kDiv24,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::F4kFactorization => "f4k-factorization",
            IdentityId::LucasPeriod4 => "lucas-period4",
            IdentityId::LucasOddTriple => "lucas-odd-triple",
            IdentityId::LucasEvenNonzero => "lucas-even-nonzero",
            IdentityId::LucasDifference => "lucas-difference",
            IdentityId::FibDivisibility => "fib-divisibility",
            IdentityId::F12kDiv24 => "f12k-div24",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == s)
    }

    /// Smallest admissible value of the primary parameter.
    pub fn min_param(self) -> u64 {
        match self {
            IdentityId::F4kFactorization | IdentityId::LucasPeriod4 | IdentityId::LucasDifference | IdentityId::F12kDiv24 => 1,
            IdentityId::LucasOddTriple | IdentityId::LucasEvenNonzero => 0,
            IdentityId::FibDivisibility => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeChecked {
    pub lo: u64,
    pub hi: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    /// Exhaustive range of the primary parameter.
    pub range_checked: RangeChecked,
    pub random_samples: u64,
    /// Inputs that failed; empty on a healthy run.
    pub failures: Vec<Vec<u64>>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn default_modulus() -> Modulus {
    Modulus::new(FIXED_PRIMES[0]).unwrap()
}

/// Evaluate one identity at one input tuple; `None` means outside preconditions.
fn check_one(id: IdentityId, args: &[u64]) -> Option<bool> {
    let m = default_modulus();
    Some(match (id, args) {
        (IdentityId::F4kFactorization, &[k]) => check_f4k_factorization(k, m),
        (IdentityId::LucasPeriod4, &[n]) => check_lucas_mod4_period(n),
        (IdentityId::LucasOddTriple, &[k]) => check_lucas_odd_triple(k),
        (IdentityId::LucasEvenNonzero, &[k]) => check_lucas_even_nonzero(k),
        (IdentityId::LucasDifference, &[a, b]) => check_lucas_difference(a, b, m).ok()?,
        (IdentityId::FibDivisibility, &[n, b]) => check_fib_divisibility(n, b).ok()?,
        (IdentityId::F12kDiv24, &[k]) => check_24_divides_f12k(k),
        _ => return None,
    })
}

/// Inputs covered by an exhaustive run over `[lo, hi]` of the primary parameter.
///
/// * `lucas-difference`: all `(m, n)` with `lo <= m <= hi`, `1 <= n <= m`.
/// * `fib-divisibility`: all `(n, m)` with `3 <= n <= 90` and `lo <= m <= hi`.
/// * everything else: the single parameter itself.
fn exhaustive_inputs(id: IdentityId, lo: u64, hi: u64) -> Vec<Vec<u64>> {
    let lo = lo.max(id.min_param());
    match id {
        IdentityId::LucasDifference => (lo..=hi)
            .flat_map(|m| (1..=m).map(move |n| vec![m, n]))
            .collect(),
        IdentityId::FibDivisibility => (3..=90u64)
            .flat_map(|n| (lo..=hi).map(move |m| vec![n, m]))
            .collect(),
        _ => (lo..=hi).map(|k| vec![k]).collect(),
    }
}

/// Random inputs with indices up to about `max_index`, reproducible from `seed`.
fn random_inputs(id: IdentityId, samples: u64, max_index: u64, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let top = max_index.max(16);
    (0..samples)
        .map(|_| match id {
            IdentityId::F4kFactorization => vec![rng.gen_range(1..=top / 4)],
            IdentityId::LucasPeriod4 => vec![rng.gen_range(1..=top)],
            IdentityId::LucasOddTriple | IdentityId::LucasEvenNonzero => vec![rng.gen_range(0..=top / 2)],
            IdentityId::LucasDifference => {
                let m = rng.gen_range(1..=top / 2);
                vec![m, rng.gen_range(1..=m)]
            }
            // precondition caps m at 10^4
            IdentityId::FibDivisibility => vec![rng.gen_range(3..=90), rng.gen_range(0..=10_000)],
            IdentityId::F12kDiv24 => vec![rng.gen_range(1..=top / 12)],
        })
        .collect()
}

fn failures(id: IdentityId, inputs: &[Vec<u64>]) -> Vec<Vec<u64>> {
    par::map_items(inputs, |args| (check_one(id, args) != Some(true)).then(|| args.clone()))
        .into_iter()
        .flatten()
        .collect()
}

/// Exhaustive run over `[lo, hi]` followed by `samples` random large inputs.
pub fn run_identity(
    id: IdentityId,
    lo: u64,
    hi: u64,
    samples: u64,
    max_index: u64,
    seed: u64,
) -> IdentityReport {
    let mut fails = failures(id, &exhaustive_inputs(id, lo, hi));
    fails.extend(failures(id, &random_inputs(id, samples, max_index, seed)));
    IdentityReport {
        identity_id: id,
        range_checked: RangeChecked {
            lo: lo.max(id.min_param()),
            hi,
        },
        random_samples: samples,
        failures: fails,
    }
}

/// Default exhaustive upper bound: 2000 for single-parameter checks, 500 for grids.
pub fn default_range_hi(id: IdentityId) -> u64 {
    match id {
        IdentityId::LucasDifference | IdentityId::FibDivisibility => 500,
        _ => 2000,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p61() -> Modulus {
        Modulus::new(FIXED_PRIMES[0]).unwrap()
    }

    #[test]
    fn fixed_primes_are_prime() {
        assert!(FIXED_PRIMES.iter().all(|&p| crate::primes::is_prime(p) && p >> 60 == 1));
    }

    #[test]
    fn f4k_examples() {
        let sides = f4k_factorization_sides(&Exact, 1);
        assert_eq!(sides[0].0, BigUint::from(8u32)); // F_6 - 1 = 7 = F_2 L_4
        assert_eq!(sides[0].1, BigUint::from(8u32));
        assert_eq!(sides[1].0, BigUint::from(13u32)); // F_7 - 1 = 12 = F_4 L_3
        assert!(check_f4k_factorization(1, p61()));
        assert!(check_f4k_factorization(1_000_000, p61()));
        assert!(check_f4k_factorization(44, Modulus::new(1).unwrap()));
    }

    #[test]
    fn mod4_checks() {
        assert!(check_lucas_mod4_period(1) && check_lucas_mod4_period(2) && check_lucas_mod4_period(123_456));
        assert!(check_lucas_odd_triple(0) && check_lucas_odd_triple(1) && check_lucas_odd_triple(100_000));
        assert!(check_lucas_even_nonzero(0) && check_lucas_even_nonzero(2) && check_lucas_even_nonzero(10_000));
        assert_eq!(lucas_exact(6).unwrap() % 4, 2);
    }

    #[test]
    fn lucas_difference_examples() {
        assert!(check_lucas_difference(4, 2, p61()).unwrap());
        assert!(check_lucas_difference(3, 1, p61()).unwrap());
        assert!(check_lucas_difference(100_000, 10_001, p61()).unwrap());
        assert_eq!(check_lucas_difference(2, 3, p61()), Err(IdentityError::DifferenceOrder { m: 2, n: 3 }));
        assert!(check_lucas_difference(5, 0, p61()).is_err());
    }

    #[test]
    fn divisibility_examples() {
        assert!(check_fib_divisibility(3, 24).unwrap());
        assert!(check_fib_divisibility(5, 7).unwrap());
        assert!(check_fib_divisibility(12, 10_000).unwrap());
        assert_eq!(check_fib_divisibility(2, 4), Err(IdentityError::DivisorIndex(2)));
        assert_eq!(check_fib_divisibility(91, 4), Err(IdentityError::DivisorIndex(91)));
    }

    #[test]
    fn f12k_examples() {
        assert!(check_24_divides_f12k(1));
        assert!(check_24_divides_f12k(2));
        assert!(check_24_divides_f12k(1_000_000_000));
    }

    #[test]
    fn wrong_identity_is_caught() {
        // F_{4k+2} = F_{2k} L_{2k+2} + 2 is false
        let e = Residues::with_fixed(p61());
        let k = 500_000;
        let (lhs, rhs) = f4k_factorization_sides(&e, k)[0];
        let bumped = e.add(&rhs, &e.constant(1));
        assert_ne!(lhs, bumped);
    }

    #[test]
    fn names_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(IdentityId::from_name(id.name()), Some(id));
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
    }

    #[test]
    fn small_report() {
        let r = run_identity(IdentityId::F4kFactorization, 1, 40, 20, 1_000_000_000_000, 7);
        assert!(r.passed());
        assert_eq!(r.range_checked, RangeChecked { lo: 1, hi: 40 });
        let r = run_identity(IdentityId::FibDivisibility, 0, 50, 10, 0, 7);
        assert!(r.passed(), "{:?}", r.failures);
    }
}
