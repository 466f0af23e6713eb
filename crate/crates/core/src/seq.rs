//! Fibonacci and Lucas numbers, exact and modulo `m`.
//!
//! Residues are produced by fast doubling on the pair `(F_n, F_{n+1})`:
//!
//! ```text
//! F_{2k}   = F_k (2 F_{k+1} - F_k)
//! F_{2k+1} = F_k^2 + F_{k+1}^2
//! ```
//!
//! Lucas residues are derived from the Fibonacci pair through
//! `L_n = 2 F_{n+1} - F_n` and `L_{n+1} = 2 F_n + F_{n+1}`, so there is a
//! single doubling loop to trust.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest index accepted by [`fib_exact`] and [`lucas_exact`].
pub const EXACT_INDEX_MAX: u64 = 180;

/// Exclusive upper bound on moduli; products of two residues fit in `u128`.
pub const MODULUS_LIMIT: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("index {0} exceeds exact evaluation limit {EXACT_INDEX_MAX}")]
    IndexTooLarge(u64),
    #[error("modulus {0} is outside 1..2^62")]
    ModulusOutOfRange(u64),
}

/// A modulus `m` with `1 <= m < 2^62`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(m: u64) -> Result<Self, SeqError> {
        if m == 0 || m >= MODULUS_LIMIT {
            return Err(SeqError::ModulusOutOfRange(m));
        }
        Ok(Modulus(m))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        a % self.0
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        // a, b < m < 2^62, no overflow
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = self.reduce(1);
        base = self.reduce(base);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

impl TryFrom<u64> for Modulus {
    type Error = SeqError;

    fn try_from(m: u64) -> Result<Self, Self::Error> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `(F_n mod m, F_{n+1} mod m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FibPairMod {
    pub n: u64,
    pub m: Modulus,
    pub f: u64,
    pub f_next: u64,
}

/// `(L_n mod m, L_{n+1} mod m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LucasPairMod {
    pub n: u64,
    pub m: Modulus,
    pub l: u64,
    pub l_next: u64,
}

/// Fast doubling over the bits of `n`, most significant first.
pub fn fib_pair_mod(n: u64, m: Modulus) -> FibPairMod {
    let mut a = 0u64; // F_k
    let mut b = m.reduce(1); // F_{k+1}
    let bits = u64::BITS - n.leading_zeros();
    for i in (0..bits).rev() {
        let two_b_minus_a = m.sub(m.add(b, b), a);
        let c = m.mul(a, two_b_minus_a); // F_{2k}
        let d = m.add(m.mul(a, a), m.mul(b, b)); // F_{2k+1}
        if (n >> i) & 1 == 1 {
            a = d;
            b = m.add(c, d);
        } else {
            a = c;
            b = d;
        }
    }
    FibPairMod {
        n,
        m,
        f: a,
        f_next: b,
    }
}

/// Lucas residues via `L_n = 2F_{n+1} - F_n`, `L_{n+1} = 2F_n + F_{n+1}`.
pub fn lucas_pair_mod(n: u64, m: Modulus) -> LucasPairMod {
    let FibPairMod { f, f_next, .. } = fib_pair_mod(n, m);
    LucasPairMod {
        n,
        m,
        l: m.sub(m.add(f_next, f_next), f),
        l_next: m.add(m.add(f, f), f_next),
    }
}

#[inline]
pub fn fib_mod(n: u64, m: Modulus) -> u64 {
    fib_pair_mod(n, m).f
}

#[inline]
pub fn lucas_mod(n: u64, m: Modulus) -> u64 {
    lucas_pair_mod(n, m).l
}

const fn exact_table(first: u128, second: u128) -> [u128; EXACT_INDEX_MAX as usize + 1] {
    let mut t = [0u128; EXACT_INDEX_MAX as usize + 1];
    t[0] = first;
    t[1] = second;
    let mut i = 2;
    while i < t.len() {
        t[i] = t[i - 1] + t[i - 2];
        i += 1;
    }
    t
}

static FIB_TABLE: [u128; EXACT_INDEX_MAX as usize + 1] = exact_table(0, 1);
static LUCAS_TABLE: [u128; EXACT_INDEX_MAX as usize + 1] = exact_table(2, 1);

pub fn fib_exact(n: u64) -> Result<u128, SeqError> {
    FIB_TABLE
        .get(n as usize)
        .copied()
        .filter(|_| n <= EXACT_INDEX_MAX)
        .ok_or(SeqError::IndexTooLarge(n))
}

pub fn lucas_exact(n: u64) -> Result<u128, SeqError> {
    LUCAS_TABLE
        .get(n as usize)
        .copied()
        .filter(|_| n <= EXACT_INDEX_MAX)
        .ok_or(SeqError::IndexTooLarge(n))
}

/// `F_1 + ... + F_n mod m`, evaluated as `F_{n+2} - 1`.
pub fn fib_sum_mod(n: u64, m: Modulus) -> u64 {
    m.sub(fib_mod(n + 2, m), m.reduce(1))
}

/// `L_1 + ... + L_n mod m`, evaluated as `L_{n+2} - 3`.
pub fn lucas_sum_mod(n: u64, m: Modulus) -> u64 {
    m.sub(lucas_mod(n + 2, m), m.reduce(3))
}

/// Legendre symbol `(p/5)` for a prime `p`, read off `p mod 5`.
pub fn legendre5(p: u64) -> i8 {
    debug_assert!(crate::primes::is_prime(p), "legendre5 called with non-prime {p}");
    match p % 5 {
        0 => 0,
        1 | 4 => 1,
        _ => -1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    fn iterative(n: u64, m: u64, first: u64, second: u64) -> (u64, u64) {
        let (mut a, mut b) = ((first % m) as u128, (second % m) as u128);
        for _ in 0..n {
            let c = (a + b) % m as u128;
            a = b;
            b = c;
        }
        (a as u64, b as u64)
    }

    #[test]
    fn initial_values() {
        let p = fib_pair_mod(0, md(10));
        assert_eq!((p.f, p.f_next), (0, 1));
        let l = lucas_pair_mod(0, md(100));
        assert_eq!((l.l, l.l_next), (2, 1));
        let one = fib_pair_mod(12345, md(1));
        assert_eq!((one.f, one.f_next), (0, 0));
    }

    #[test]
    fn fib_26_and_27() {
        let p = fib_pair_mod(26, md(1_000_000_000));
        assert_eq!((p.f, p.f_next), (121393, 196418));
        assert_eq!(fib_exact(26).unwrap() - 1, 24 * 5058);
    }

    #[test]
    fn billionth_term_matches_iteration() {
        // frozen from the O(n) iterative recurrence mod 9999999967
        let p = fib_pair_mod(1_000_000_000, md(9_999_999_967));
        assert_eq!((p.f, p.f_next), (FIB_1E9_MOD.0, FIB_1E9_MOD.1));
    }

    // computed offline by a 10^9-step iteration; see the ignored test below
    const FIB_1E9_MOD: (u64, u64) = (4_709_713_759, 8_962_873_228);

    #[test]
    #[ignore = "10^9 iterations; run with --ignored --release"]
    fn billionth_term_iterative_oracle() {
        assert_eq!(iterative(1_000_000_000, 9_999_999_967, 0, 1), FIB_1E9_MOD);
    }

    #[test]
    fn lucas_small() {
        let l = lucas_pair_mod(6, md(1000));
        assert_eq!((l.l, l.l_next), (18, 29));
        let l = lucas_pair_mod(9, md(1000));
        assert_eq!((l.l, l.l_next), (76, 123));
    }

    #[test]
    fn exact_values() {
        assert_eq!(fib_exact(24).unwrap(), 46368);
        assert_eq!(fib_exact(5).unwrap(), 5);
        assert_eq!(fib_exact(0).unwrap(), 0);
        assert_eq!(lucas_exact(3).unwrap(), 4);
        assert_eq!(lucas_exact(1).unwrap(), 1);
        assert_eq!(lucas_exact(8).unwrap(), 47);
        assert_eq!(fib_exact(181), Err(SeqError::IndexTooLarge(181)));
        assert_eq!(lucas_exact(u64::MAX), Err(SeqError::IndexTooLarge(u64::MAX)));
        assert!(fib_exact(180).is_ok() && lucas_exact(180).is_ok());
    }

    #[test]
    fn prefix_sums() {
        assert_eq!(fib_sum_mod(24, md(24)), 0);
        assert_eq!(fib_sum_mod(3, md(3)), 1);
        assert_eq!(fib_sum_mod(0, md(7)), 0);
        let direct = (1..=1000u64).fold(0u64, |s, i| (s + iterative(i, 997, 0, 1).0) % 997);
        assert_eq!(fib_sum_mod(1000, md(997)), direct);

        assert_eq!(lucas_sum_mod(4, md(15)), 0);
        assert_eq!(lucas_sum_mod(8, md(8)), 0);
        assert_eq!(lucas_sum_mod(0, md(7)), 0);
    }

    #[test]
    fn legendre_table() {
        assert_eq!(legendre5(5), 0);
        assert_eq!(legendre5(11), 1);
        assert_eq!(legendre5(7), -1);
        assert_eq!(legendre5(19), 1);
        assert_eq!(legendre5(3), -1);
    }

    #[test]
    fn modulus_bounds() {
        assert!(Modulus::new(0).is_err());
        assert!(Modulus::new(MODULUS_LIMIT).is_err());
        assert!(Modulus::new(MODULUS_LIMIT - 1).is_ok());
    }

    #[test]
    fn agrees_with_iteration_small() {
        for m in [2u64, 3, 10, 97, 1000, (1 << 61) - 1] {
            let (mut a, mut b) = (0u64, 1 % m);
            for n in 0..2000u64 {
                let p = fib_pair_mod(n, md(m));
                assert_eq!((p.f, p.f_next), (a, b), "n={n} m={m}");
                let c = ((a as u128 + b as u128) % m as u128) as u64;
                a = b;
                b = c;
            }
        }
    }

    #[test]
    fn parity_identity() {
        let two = md(2);
        for n in 0..10_000u64 {
            let f_even = fib_mod(n, two) == 0;
            let l_even = lucas_mod(n, two) == 0;
            assert_eq!(f_even, n % 3 == 0);
            assert_eq!(l_even, n % 3 == 0);
        }
    }

    #[test]
    fn exact_matches_residues() {
        for m in [7u64, 1 << 40, MODULUS_LIMIT - 1] {
            for n in 0..=EXACT_INDEX_MAX {
                assert_eq!((fib_exact(n).unwrap() % m as u128) as u64, fib_mod(n, md(m)));
                assert_eq!((lucas_exact(n).unwrap() % m as u128) as u64, lucas_mod(n, md(m)));
            }
        }
    }
}
