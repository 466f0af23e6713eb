//! Primality, factorization and prime enumeration for integers below `2^62`.

use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::seq::Modulus;

/// Trial division covers every prime below this bound before rho takes over.
const TRIAL_LIMIT: u64 = 100_000;

// Deterministic for all n < 3.3 * 10^24.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(TRIAL_LIMIT))
}

/// Plain sieve of Eratosthenes, primes `<= limit`.
pub fn sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi]`, sieved in fixed-size segments so memory stays
/// proportional to `sqrt(hi)` plus one segment.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime_in(lo, hi, |p| out.push(p));
    out
}

pub fn for_each_prime_in(lo: u64, hi: u64, mut visit: impl FnMut(u64)) {
    const SEGMENT: u64 = 1 << 18;
    let lo = lo.max(2);
    if hi < lo {
        return;
    }
    let base = sieve(isqrt(hi));
    let mut seg_lo = lo;
    let mut marks = vec![false; SEGMENT as usize];
    loop {
        let seg_hi = seg_lo.saturating_add(SEGMENT - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        marks[..len].fill(false);
        for &p in &base {
            if p * p > seg_hi {
                break;
            }
            let mut start = (seg_lo.div_ceil(p) * p).max(p * p);
            while start <= seg_hi {
                marks[(start - seg_lo) as usize] = true;
                start += p;
            }
        }
        for (i, &c) in marks[..len].iter().enumerate() {
            if !c {
                visit(seg_lo + i as u64);
            }
        }
        if seg_hi == hi {
            break;
        }
        seg_lo = seg_hi + 1;
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Canonical factorization `n = p_1^e_1 * ... * p_k^e_k` with `p_1 < ... < p_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    fn product(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &(p, e)| {
            p.checked_pow(e).and_then(|pe| acc.checked_mul(pe))
        })
    }
}

/// `7*11`, `2^4*3^2*5`; `1` for the empty product.
impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Factorization {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Factor `n >= 1` (`n < 2^62`).
///
/// Panics if `n == 0`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize(0) is undefined");
    let mut primes = Vec::new();
    let mut rest = n;
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        while rest.is_multiple_of(p) {
            primes.push(p);
            rest /= p;
        }
    }
    if rest > 1 {
        split(rest, &mut primes);
    }
    primes.sort_unstable();

    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    let fz = Factorization { n, factors };
    assert_eq!(fz.product(), Some(n), "factorization of {n} does not re-multiply");
    fz
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).is_squarefree()
}

fn split(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let r = isqrt(n);
    if r * r == n {
        split(r, out);
        split(r, out);
        return;
    }
    let d = pollard_brent(n);
    split(d, out);
    split(n / d, out);
}

/// A nontrivial divisor of the odd composite `n`. The generator is seeded from
/// `n`, so the result is reproducible.
fn pollard_brent(n: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(n);
    let m = Modulus::new(n).expect("composite below 2^62");
    loop {
        let c = rng.gen_range(1..n);
        let mut y = rng.gen_range(0..n);
        let step = |x: u64| m.add(m.mul(x, x), c);
        let batch = 128;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..batch.min(r - k) {
                    y = step(y);
                    q = m.mul(q, x.abs_diff(y));
                }
                g = gcd(q, n);
                k += batch;
            }
            r *= 2;
        }
        if g == n {
            // batch overshot; replay one step at a time
            loop {
                ys = step(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
}
