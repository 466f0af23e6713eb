//! Which `n` make the average of the first `n` Fibonacci (or Lucas) numbers an
//! integer?
//!
//! Everything runs on 64-bit residues: `F_n mod m` by fast doubling, with
//! exact values only up to index 180. Range work (scans, audits, the
//! Wall-Sun-Sun search) is split into chunks that run on rayon when the
//! `parallel` feature is enabled (the default) and sequentially otherwise;
//! output order is the same either way.
//!
//! ```
//! use fibavg::scanner::{is_fib_hit, scan, Kind};
//!
//! // (F_1 + ... + F_24) / 24 = 5058
//! assert!(is_fib_hit(24));
//! let hits: Vec<u64> = scan(Kind::Fib, 1, 100).unwrap().iter().map(|h| h.n).collect();
//! assert_eq!(hits, [1, 2, 24, 48, 72, 77, 96]);
//! ```

pub mod families;
pub mod formats;
pub mod identities;
pub mod par;
pub mod primes;
pub mod ranks;
pub mod scanner;
pub mod seq;
pub mod wss;

pub use scanner::{Hit, Kind, PairHit, ScanCheckpoint};
pub use seq::{fib_pair_mod, lucas_pair_mod, FibPairMod, LucasPairMod, Modulus};
