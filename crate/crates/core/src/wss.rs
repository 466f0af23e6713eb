//! Wall-Sun-Sun search: primes `p` with `p^2 | F_{p - (p/5)}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::primes::{is_prime, primes_in_range};
use crate::seq::{fib_mod, legendre5, Modulus};

/// Primes must stay below this so that `p^2 < 2^62`.
pub const WSS_PRIME_LIMIT: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WssError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is at least 2^31")]
    TooLarge(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WssRecord {
    pub p: u64,
    pub eps: i8,
    /// `F_{p - eps} mod p^2`
    pub residue: u64,
}

impl WssRecord {
    pub fn is_witness(&self) -> bool {
        self.residue == 0
    }

    /// `p | F_{p - eps}`; holds for every prime except 5.
    pub fn first_power_divides(&self) -> bool {
        self.residue.is_multiple_of(self.p)
    }
}

pub fn wss_test(p: u64) -> Result<WssRecord, WssError> {
    if p >= WSS_PRIME_LIMIT {
        return Err(WssError::TooLarge(p));
    }
    if !is_prime(p) {
        return Err(WssError::NotPrime(p));
    }
    Ok(wss_record(p))
}

fn wss_record(p: u64) -> WssRecord {
    let eps = legendre5(p);
    let index = (p as i64 - eps as i64) as u64;
    let square = Modulus::new(p * p).expect("p < 2^31");
    WssRecord {
        p,
        eps,
        residue: fib_mod(index, square),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WssScan {
    pub lo: u64,
    pub hi: u64,
    pub tested: u64,
    pub witnesses: Vec<WssRecord>,
    /// Every tested record, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<WssRecord>>,
}

/// Test every prime in `[lo, hi]`. Records come back in ascending `p`.
pub fn wss_scan(lo: u64, hi: u64, keep_records: bool) -> Result<WssScan, WssError> {
    if hi >= WSS_PRIME_LIMIT {
        return Err(WssError::TooLarge(hi));
    }
    const SEGMENT: u64 = 1 << 18;
    let parts = par::map_chunks(lo.max(2), hi, SEGMENT, |a, b| {
        primes_in_range(a, b).into_iter().map(wss_record).collect::<Vec<_>>()
    });
    let mut scan = WssScan {
        lo,
        hi,
        tested: 0,
        witnesses: Vec::new(),
        records: keep_records.then(Vec::new),
    };
    for rec in parts.into_iter().flatten() {
        scan.tested += 1;
        if rec.is_witness() {
            scan.witnesses.push(rec);
        }
        if let Some(all) = scan.records.as_mut() {
            all.push(rec);
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(wss_test(3).unwrap(), WssRecord { p: 3, eps: -1, residue: 3 });
        assert_eq!(wss_test(5).unwrap(), WssRecord { p: 5, eps: 0, residue: 5 });
        assert_eq!(wss_test(11).unwrap(), WssRecord { p: 11, eps: 1, residue: 55 });
        assert!(!wss_test(5).unwrap().is_witness());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(wss_test(9), Err(WssError::NotPrime(9)));
        assert_eq!(wss_test(WSS_PRIME_LIMIT + 11), Err(WssError::TooLarge(WSS_PRIME_LIMIT + 11)));
        assert!(wss_scan(1, WSS_PRIME_LIMIT, false).is_err());
    }

    #[test]
    fn scan_small_ranges() {
        let s = wss_scan(3, 100, true).unwrap();
        assert!(s.witnesses.is_empty());
        assert_eq!(s.tested, 24);
        let rec = s.records.unwrap();
        assert!(rec.windows(2).all(|w| w[0].p < w[1].p));
        let s = wss_scan(5, 5, false).unwrap();
        assert_eq!((s.tested, s.witnesses.len()), (1, 0));
        assert!(s.records.is_none());
    }

    #[test]
    fn first_power_divisibility() {
        for p in primes_in_range(7, 20_000) {
            assert!(wss_test(p).unwrap().first_power_divides(), "p={p}");
        }
    }
}
