//! Range scans for indices `n` whose Fibonacci (or Lucas) prefix average is
//! an integer.
//!
//! Membership is decided per index with one fast-doubling evaluation:
//! `n | F_1 + ... + F_n` iff `F_{n+2} = 1 (mod n)`, and
//! `n | L_1 + ... + L_n` iff `L_{n+2} = 3 (mod n)`. Because the modulus is
//! the index itself there is nothing to share between neighbours, so ranges
//! split into independent chunks that are merged back in ascending order.

use std::fmt;
use std::fs;
use std::io;
use std::ops::ControlFlow;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::primes::{factorize, primes_in_range, Factorization};
use crate::seq::{fib_sum_mod, lucas_sum_mod, Modulus, MODULUS_LIMIT};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// Indices processed between two checkpoints.
pub const CHECKPOINT_INTERVAL: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fib,
    Lucas,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Fib => "fib",
            Kind::Lucas => "lucas",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub n: u64,
    pub kind: Kind,
}

/// `n` and `n + t` are both Fibonacci hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairHit {
    pub n: u64,
    pub t: u64,
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid range [{lo}, {hi}]: need 1 <= lo <= hi < 2^62")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("pair offset must be at least 1")]
    ZeroOffset,
    #[error("checkpoint is for a {found} scan, expected {expected}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("checkpoint schema version {found} is not supported (expected {CHECKPOINT_SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("checkpoint covers [{found_lo}, {found_hi}], scan requested [{lo}, {hi}]")]
    RangeMismatch {
        lo: u64,
        hi: u64,
        found_lo: u64,
        found_hi: u64,
    },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint parse: {0}")]
    Json(#[from] serde_json::Error),
}

fn index_modulus(n: u64) -> Modulus {
    assert!(n >= 1, "indices start at 1");
    Modulus::new(n).expect("index below 2^62")
}

/// `n | F_1 + ... + F_n`.
pub fn is_fib_hit(n: u64) -> bool {
    fib_sum_mod(n, index_modulus(n)) == 0
}

/// `n | L_1 + ... + L_n`.
pub fn is_lucas_hit(n: u64) -> bool {
    lucas_sum_mod(n, index_modulus(n)) == 0
}

pub fn is_hit(kind: Kind, n: u64) -> bool {
    match kind {
        Kind::Fib => is_fib_hit(n),
        Kind::Lucas => is_lucas_hit(n),
    }
}

fn check_range(lo: u64, hi: u64) -> Result<(), ScanError> {
    if lo == 0 || lo > hi || hi >= MODULUS_LIMIT {
        return Err(ScanError::InvalidRange { lo, hi });
    }
    Ok(())
}

fn hits_in(kind: Kind, lo: u64, hi: u64, chunk: u64) -> Vec<u64> {
    par::map_chunks(lo, hi, chunk, |a, b| {
        (a..=b).filter(|&n| is_hit(kind, n)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// All hits in `[lo, hi]`, ascending.
pub fn scan(kind: Kind, lo: u64, hi: u64) -> Result<Vec<Hit>, ScanError> {
    check_range(lo, hi)?;
    Ok(hits_in(kind, lo, hi, par::DEFAULT_CHUNK)
        .into_iter()
        .map(|n| Hit { n, kind })
        .collect())
}

/// Resumable state of a long scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCheckpoint {
    pub schema_version: u32,
    pub kind: Kind,
    pub lo: u64,
    pub hi: u64,
    pub next_n: u64,
    pub hits: Vec<Hit>,
}

impl ScanCheckpoint {
    pub fn new(kind: Kind, lo: u64, hi: u64) -> Self {
        ScanCheckpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            kind,
            lo,
            hi,
            next_n: lo,
            hits: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.next_n > self.hi
    }

    /// Structural checks that hold for any checkpoint this module writes.
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(ScanError::SchemaVersion {
                found: self.schema_version,
            });
        }
        check_range(self.lo, self.hi)
            .map_err(|_| ScanError::Corrupt(format!("bad range [{}, {}]", self.lo, self.hi)))?;
        if self.next_n < self.lo || self.next_n > self.hi + 1 {
            return Err(ScanError::Corrupt(format!(
                "next_n {} outside [{}, {}]",
                self.next_n,
                self.lo,
                self.hi + 1
            )));
        }
        let mut prev = None;
        for hit in &self.hits {
            if hit.kind != self.kind {
                return Err(ScanError::Corrupt(format!("hit {} has kind {}", hit.n, hit.kind)));
            }
            if hit.n < self.lo || hit.n >= self.next_n || prev.is_some_and(|p| p >= hit.n) {
                return Err(ScanError::Corrupt(format!("hit {} out of order or range", hit.n)));
            }
            prev = Some(hit.n);
        }
        Ok(())
    }

    /// Check that this checkpoint can continue a `kind` scan of `[lo, hi]`.
    pub fn ensure_matches(&self, kind: Kind, lo: u64, hi: u64) -> Result<(), ScanError> {
        self.validate()?;
        if self.kind != kind {
            return Err(ScanError::KindMismatch {
                expected: kind,
                found: self.kind,
            });
        }
        if (self.lo, self.hi) != (lo, hi) {
            return Err(ScanError::RangeMismatch {
                lo,
                hi,
                found_lo: self.lo,
                found_hi: self.hi,
            });
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ScanError> {
        let text = fs::read_to_string(path)?;
        let cp: ScanCheckpoint = serde_json::from_str(&text)?;
        cp.validate()?;
        Ok(cp)
    }

    /// Write via a sibling temp file and rename, so a reader never sees a torn file.
    pub fn save(&self, path: &Path) -> Result<(), ScanError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = std::path::PathBuf::from(tmp);
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        fs::write(&tmp, text)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// Indices between checkpoints.
    pub interval: u64,
    /// Chunk length handed to each worker.
    pub chunk: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            interval: CHECKPOINT_INTERVAL,
            chunk: par::DEFAULT_CHUNK,
        }
    }
}

/// Checkpointed scan.
///
/// Hits already recorded in `resume` are replayed through `on_hit` first, so
/// the emitted stream is the same whether or not the run was interrupted.
/// `on_checkpoint` is called after every block; returning `Break` stops the
/// scan there and the returned checkpoint is resumable.
pub fn scan_resumable(
    kind: Kind,
    lo: u64,
    hi: u64,
    resume: Option<ScanCheckpoint>,
    opts: ScanOptions,
    mut on_hit: impl FnMut(Hit),
    mut on_checkpoint: impl FnMut(&ScanCheckpoint) -> ControlFlow<()>,
) -> Result<ScanCheckpoint, ScanError> {
    check_range(lo, hi)?;
    assert!(opts.interval > 0 && opts.chunk > 0);
    let mut cp = match resume {
        Some(cp) => {
            cp.ensure_matches(kind, lo, hi)?;
            cp
        }
        None => ScanCheckpoint::new(kind, lo, hi),
    };
    for &hit in &cp.hits {
        on_hit(hit);
    }
    while !cp.is_complete() {
        let block_hi = cp.next_n.saturating_add(opts.interval - 1).min(hi);
        for n in hits_in(kind, cp.next_n, block_hi, opts.chunk) {
            let hit = Hit { n, kind };
            on_hit(hit);
            cp.hits.push(hit);
        }
        cp.next_n = block_hi + 1;
        if on_checkpoint(&cp).is_break() {
            break;
        }
    }
    Ok(cp)
}

/// Starts `n` in `[lo, hi]` such that `n` and `n + t` are both Fibonacci hits.
pub fn pair_scan(t: u64, lo: u64, hi: u64) -> Result<Vec<PairHit>, ScanError> {
    if t == 0 {
        return Err(ScanError::ZeroOffset);
    }
    check_range(lo, hi)?;
    let top = hi.checked_add(t).filter(|&v| v < MODULUS_LIMIT);
    let top = top.ok_or(ScanError::InvalidRange { lo, hi })?;
    let hits = hits_in(Kind::Fib, lo, top, par::DEFAULT_CHUNK);
    Ok(hits
        .iter()
        .take_while(|&&n| n <= hi)
        .filter(|&&n| hits.binary_search(&(n + t)).is_ok())
        .map(|&n| PairHit { n, t })
        .collect())
}

/// No odd prime is a Fibonacci hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OddPrimeAudit {
    pub hi: u64,
    pub primes_checked: u64,
    pub violations: Vec<u64>,
}

pub fn odd_prime_audit(hi: u64) -> OddPrimeAudit {
    const SEGMENT: u64 = 1 << 18;
    let hi = hi.min(MODULUS_LIMIT - 1);
    let parts = par::map_chunks(3, hi, SEGMENT, |a, b| {
        let primes = primes_in_range(a, b);
        let bad: Vec<u64> = primes.iter().copied().filter(|&p| is_fib_hit(p)).collect();
        (primes.len() as u64, bad)
    });
    let mut audit = OddPrimeAudit {
        hi,
        primes_checked: 0,
        violations: Vec::new(),
    };
    for (count, bad) in parts {
        audit.primes_checked += count;
        audit.violations.extend(bad);
    }
    audit
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditedHit {
    pub n: u64,
    pub factorization: Factorization,
    pub squarefree: bool,
}

/// Checks whether each odd Fibonacci hit is square-free. It is not always:
/// 13869 = 3^2 * 23 * 67 is the first exception.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquarefreeAudit {
    pub hi: u64,
    pub odd_hits: Vec<AuditedHit>,
    pub violations: Vec<u64>,
}

pub fn squarefree_audit(hi: u64) -> SquarefreeAudit {
    let hi = hi.min(MODULUS_LIMIT - 1);
    let odd = par::filter_range(1, hi, |n| n % 2 == 1 && is_fib_hit(n));
    let odd_hits: Vec<AuditedHit> = par::map_items(&odd, |&n| {
        let factorization = factorize(n);
        let squarefree = factorization.is_squarefree();
        AuditedHit {
            n,
            factorization,
            squarefree,
        }
    });
    let violations = odd_hits.iter().filter(|h| !h.squarefree).map(|h| h.n).collect();
    SquarefreeAudit {
        hi,
        odd_hits,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_fib_sum_mod(n: u64) -> u64 {
        let m = n as u128;
        let (mut a, mut b, mut s) = (1u128 % m, 1u128 % m, 0u128);
        for _ in 0..n {
            s = (s + a) % m;
            (a, b) = (b, (a + b) % m);
        }
        s as u64
    }

    #[test]
    fn membership_examples() {
        assert!(is_fib_hit(24));
        assert!(!is_fib_hit(3));
        assert!(is_fib_hit(1));
        assert!(is_lucas_hit(1));
        assert!(is_lucas_hit(8));
        assert!(!is_lucas_hit(3));
    }

    #[test]
    fn membership_matches_summation() {
        for n in 1..=800 {
            assert_eq!(is_fib_hit(n), direct_fib_sum_mod(n) == 0, "n={n}");
        }
    }

    #[test]
    fn scan_examples() {
        let ns = |v: Vec<Hit>| v.into_iter().map(|h| h.n).collect::<Vec<_>>();
        assert_eq!(ns(scan(Kind::Fib, 1, 100).unwrap()), [1, 2, 24, 48, 72, 77, 96]);
        assert_eq!(ns(scan(Kind::Fib, 1900, 1930).unwrap()), [1920]);
        assert_eq!(ns(scan(Kind::Lucas, 1, 10).unwrap()), [1, 2, 8]);
        assert!(matches!(scan(Kind::Fib, 0, 5), Err(ScanError::InvalidRange { .. })));
        assert!(matches!(scan(Kind::Fib, 9, 5), Err(ScanError::InvalidRange { .. })));
    }

    #[test]
    fn pair_examples() {
        let starts = |t, lo, hi| pair_scan(t, lo, hi).unwrap().into_iter().map(|p| p.n).collect::<Vec<_>>();
        assert!(starts(1, 2, 6000).is_empty());
        assert_eq!(starts(24, 1, 100), [24, 48, 72, 96]);
        assert_eq!(starts(1, 1, 7000), [1, 6479]);
        assert_eq!(starts(1, 1, 100_000), [1, 6479, 11663, 34943, 47519, 51983]);
        assert!(matches!(pair_scan(0, 1, 10), Err(ScanError::ZeroOffset)));
    }

    #[test]
    fn odd_prime_audit_small() {
        let a = odd_prime_audit(100);
        assert_eq!(a.primes_checked, 24);
        assert!(a.violations.is_empty());
        let a = odd_prime_audit(3);
        assert_eq!((a.primes_checked, a.violations.len()), (1, 0));
        let a = odd_prime_audit(2);
        assert_eq!(a.primes_checked, 0);
        assert!(is_fib_hit(2));
    }

    #[test]
    fn squarefree_audit_small() {
        let a = squarefree_audit(2000);
        let ns: Vec<u64> = a.odd_hits.iter().map(|h| h.n).collect();
        assert_eq!(ns, [1, 77, 319, 323, 1517]);
        assert!(a.violations.is_empty());
        let shown: Vec<String> = a.odd_hits.iter().map(|h| h.factorization.to_string()).collect();
        assert_eq!(shown, ["1", "7*11", "11*29", "17*19", "37*41"]);
        let ns: Vec<u64> = squarefree_audit(76).odd_hits.iter().map(|h| h.n).collect();
        assert_eq!(ns, [1]);
    }

    #[test]
    fn squarefree_audit_finds_multiples_of_nine() {
        let a = squarefree_audit(15_000);
        assert_eq!(a.violations, [13869, 14949]);
        let bad = a.odd_hits.iter().find(|h| h.n == 13869).unwrap();
        assert_eq!(bad.factorization.to_string(), "3^2*23*67");
    }

    #[test]
    fn checkpoint_rejects_mismatch() {
        let cp = ScanCheckpoint::new(Kind::Fib, 1, 100);
        assert!(matches!(
            cp.ensure_matches(Kind::Lucas, 1, 100),
            Err(ScanError::KindMismatch { .. })
        ));
        assert!(matches!(
            cp.ensure_matches(Kind::Fib, 1, 200),
            Err(ScanError::RangeMismatch { .. })
        ));
        let mut bad = cp.clone();
        bad.schema_version = 2;
        assert!(matches!(bad.validate(), Err(ScanError::SchemaVersion { found: 2 })));
        let mut bad = cp.clone();
        bad.hits.push(Hit { n: 24, kind: Kind::Fib });
        assert!(matches!(bad.validate(), Err(ScanError::Corrupt(_))));
        let mut bad = cp;
        bad.next_n = 500;
        assert!(matches!(bad.validate(), Err(ScanError::Corrupt(_))));
    }

    #[test]
    fn resumed_scan_replays_identically() {
        let opts = ScanOptions { interval: 1000, chunk: 97 };
        let mut full = Vec::new();
        scan_resumable(Kind::Fib, 1, 5000, None, opts, |h| full.push(h), |_| ControlFlow::Continue(()))
            .unwrap();

        let mut blocks = 0;
        let cp = scan_resumable(Kind::Fib, 1, 5000, None, opts, |_| {}, |_| {
            blocks += 1;
            if blocks == 2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(cp.next_n, 2001);
        let mut resumed = Vec::new();
        let done = scan_resumable(Kind::Fib, 1, 5000, Some(cp), opts, |h| resumed.push(h), |_| {
            ControlFlow::Continue(())
        })
        .unwrap();
        assert!(done.is_complete());
        assert_eq!(resumed, full);
        assert_eq!(done.hits, full);
    }
}
