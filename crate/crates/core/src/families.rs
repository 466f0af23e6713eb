//! Constructive families of averaging indices.
//!
//! * `3 * 2^(a+3)` is a Fibonacci hit for every `a >= 0`.
//! * `2^(a+3) * 3^(b+1) * 5^c` is both a Fibonacci and a Lucas hit.
//! * The tower `2, F_6, F_24, ...` with `v_{d+1} = F_{3 v_d}` gives indices
//!   `v` with `v | F_{12 v}`.
//!
//! Nothing is emitted on faith: each generated index is checked with the
//! scanner's membership predicate before it is returned.

use serde::Serialize;
use thiserror::Error;

use crate::scanner::{is_fib_hit, is_lucas_hit, Kind};
use crate::seq::{fib_exact, fib_mod, lucas_mod, Modulus, MODULUS_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("family index for exponents {0:?} does not fit below 2^62")]
    Overflow(FamilyParams),
    #[error("generated index {n} is not a {kind} hit")]
    NotAHit { n: u64, kind: Kind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilyParams {
    pub alpha: u32,
    pub beta: u32,
    pub gamma: u32,
}

impl FamilyParams {
    pub fn new(alpha: u32, beta: u32, gamma: u32) -> Self {
        FamilyParams { alpha, beta, gamma }
    }

    /// `2^(alpha+3) * 3^(beta+1) * 5^gamma`, if it is below `2^62`.
    pub fn index(&self) -> Option<u64> {
        2u64.checked_pow(self.alpha + 3)?
            .checked_mul(3u64.checked_pow(self.beta + 1)?)?
            .checked_mul(5u64.checked_pow(self.gamma)?)
            .filter(|&n| n < MODULUS_LIMIT)
    }
}

fn verified(n: u64, kind: Kind) -> Result<u64, FamilyError> {
    let ok = match kind {
        Kind::Fib => is_fib_hit(n),
        Kind::Lucas => is_lucas_hit(n),
    };
    ok.then_some(n).ok_or(FamilyError::NotAHit { n, kind })
}

/// `3 * 2^(a+3)` for `a = 0..=alpha_max`.
pub fn doubling_family(alpha_max: u32) -> Result<Vec<u64>, FamilyError> {
    (0..=alpha_max)
        .map(|a| {
            let params = FamilyParams::new(a, 0, 0);
            let n = params.index().ok_or(FamilyError::Overflow(params))?;
            verified(n, Kind::Fib)
        })
        .collect()
}

/// `2^(a+3) * 3^(b+1) * 5^c`, verified as a Fibonacci hit.
pub fn smooth_family_fib(params: FamilyParams) -> Result<u64, FamilyError> {
    let n = params.index().ok_or(FamilyError::Overflow(params))?;
    verified(n, Kind::Fib)
}

/// Same index, verified as a Lucas hit.
pub fn smooth_family_lucas(params: FamilyParams) -> Result<u64, FamilyError> {
    let n = params.index().ok_or(FamilyError::Overflow(params))?;
    verified(n, Kind::Lucas)
}

/// Every `(params, n)` of the three-exponent family with `n <= bound`, sorted by `n`.
pub fn family_members_up_to(bound: u64) -> Vec<(FamilyParams, u64)> {
    let mut out = Vec::new();
    for alpha in 0.. {
        if FamilyParams::new(alpha, 0, 0).index().is_none_or(|n| n > bound) {
            break;
        }
        for beta in 0.. {
            if FamilyParams::new(alpha, beta, 0).index().is_none_or(|n| n > bound) {
                break;
            }
            for gamma in 0.. {
                let params = FamilyParams::new(alpha, beta, gamma);
                match params.index() {
                    Some(n) if n <= bound => out.push((params, n)),
                    _ => break,
                }
            }
        }
    }
    out.sort_by_key(|&(_, n)| n);
    out
}

/// Residues of `F_{3*2^(a+3)+2} - 1` and of the product
/// `F_3 L_3 L_6 ... L_{3*2^(a+1)} L_{3*2^(a+2)+2}` modulo `m`.
pub fn doubling_chain_residues(alpha: u32, m: Modulus) -> (u64, u64) {
    let lhs = m.sub(fib_mod(3 * (1u64 << (alpha + 3)) + 2, m), m.reduce(1));
    let mut rhs = m.reduce(2); // F_3
    for j in 0..=alpha + 1 {
        rhs = m.mul(rhs, lucas_mod(3 << j, m));
    }
    rhs = m.mul(rhs, lucas_mod(3 * (1u64 << (alpha + 2)) + 2, m));
    (lhs, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TowerElement {
    pub depth: u32,
    pub value: u64,
    /// `value | F_{12 value}`
    pub divides_f12v: bool,
    /// `value | F_{3 value}`
    pub divides_f3v: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub requested_depth: u32,
    pub elements: Vec<TowerElement>,
    /// Set when the next element's defining index has no exact value here.
    pub truncated: bool,
}

impl Tower {
    pub fn achieved_depth(&self) -> u32 {
        self.elements.len() as u32
    }
}

pub fn tower_element(depth: u32, value: u64) -> TowerElement {
    let m = Modulus::new(value).expect("tower values stay below 2^62");
    TowerElement {
        depth,
        value,
        divides_f12v: fib_mod(12 * value, m) == 0,
        divides_f3v: fib_mod(3 * value, m) == 0,
    }
}

/// `v_1 = F_3 = 2`, `v_{d+1} = F_{3 v_d}`, while exactly representable.
pub fn tower(depth_max: u32) -> Tower {
    let mut elements = Vec::new();
    let mut value = 2u64;
    let mut truncated = false;
    for depth in 1..=depth_max {
        elements.push(tower_element(depth, value));
        if depth == depth_max {
            break;
        }
        match fib_exact(3 * value).ok().and_then(|v| u64::try_from(v).ok()) {
            Some(next) if next < MODULUS_LIMIT => value = next,
            _ => {
                truncated = true;
                break;
            }
        }
    }
    Tower {
        requested_depth: depth_max,
        elements,
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::FIXED_PRIMES;

    #[test]
    fn doubling_examples() {
        let v = doubling_family(5).unwrap();
        assert_eq!(v, [24, 48, 96, 192, 384, 768]);
        assert!(matches!(doubling_family(60), Err(FamilyError::Overflow(_))));
    }

    #[test]
    fn smooth_examples() {
        assert_eq!(smooth_family_fib(FamilyParams::new(1, 1, 1)).unwrap(), 720);
        assert_eq!(smooth_family_fib(FamilyParams::new(0, 0, 1)).unwrap(), 120);
        assert_eq!(smooth_family_fib(FamilyParams::new(2, 2, 1)).unwrap(), 4320);
        assert_eq!(smooth_family_lucas(FamilyParams::new(2, 2, 1)).unwrap(), 4320);
        assert!(matches!(
            smooth_family_fib(FamilyParams::new(40, 10, 10)),
            Err(FamilyError::Overflow(_))
        ));
    }

    #[test]
    fn members_enumeration() {
        let m = family_members_up_to(130);
        let ns: Vec<u64> = m.iter().map(|&(_, n)| n).collect();
        assert_eq!(ns, [24, 48, 72, 96, 120]);
        assert!(family_members_up_to(23).is_empty());
    }

    #[test]
    fn chain_factorization() {
        for alpha in 0..=10 {
            for &p in &FIXED_PRIMES {
                let (l, r) = doubling_chain_residues(alpha, Modulus::new(p).unwrap());
                assert_eq!(l, r, "alpha={alpha} p={p}");
            }
        }
    }

    #[test]
    fn tower_values() {
        let t = tower(3);
        let vals: Vec<u64> = t.elements.iter().map(|e| e.value).collect();
        assert_eq!(vals, [2, 8, 46368]);
        assert!(!t.truncated);
        assert!(t.elements.iter().all(|e| e.divides_f12v && e.divides_f3v));
        let t = tower(5);
        assert_eq!(t.achieved_depth(), 3);
        assert!(t.truncated);
        assert_eq!(tower(1).elements[0].value, 2);
        assert_eq!(fib_mod(556_416, Modulus::new(46368).unwrap()), 0);
        assert_eq!(fib_mod(96, Modulus::new(8).unwrap()), 0);
    }
}
