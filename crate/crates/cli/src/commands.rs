use std::io::{self, BufWriter, IsTerminal, Write};
use std::ops::ControlFlow;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use fibavg::families::{self, FamilyError, FamilyParams};
use fibavg::formats::{self, BFileWriter};
use fibavg::identities::{self, IdentityId};
use fibavg::ranks::{self, RankError};
use fibavg::scanner::{self, Hit, Kind, ScanCheckpoint, ScanError, ScanOptions};
use fibavg::seq::MODULUS_LIMIT;
use fibavg::wss::{self, WSS_PRIME_LIMIT};
use serde::Serialize;

use crate::args::{AuditKind, Cli, Command, FamilyArgs, Format, Range, Theorem, VerifyArgs};

#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// An audit found a counterexample.
    Violation,
    Interrupted,
}

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Usage(String),
    /// Exit code 3.
    Io(anyhow::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::InvalidRange { .. }
            | ScanError::ZeroOffset
            | ScanError::KindMismatch { .. }
            | ScanError::RangeMismatch { .. } => CliError::Usage(e.to_string()),
            other => CliError::Io(other.into()),
        }
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CmdResult = Result<Outcome, CliError>;

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

fn unsupported(format: Format, what: &str) -> CliError {
    CliError::Usage(format!("--format {format:?} is not available for {what}").to_lowercase())
}

fn check_range(r: Range, cap: u64) -> Result<(), CliError> {
    if r.from == 0 || r.from > r.to || r.to >= cap {
        return Err(CliError::Usage(format!(
            "malformed range --from {} --to {} (need 1 <= from <= to < {cap})",
            r.from, r.to
        )));
    }
    Ok(())
}

fn json_line<W: Write, T: Serialize>(out: &mut W, item: &T) -> Result<(), CliError> {
    formats::write_json_line(out, item)?;
    Ok(())
}

fn progress(msg: std::fmt::Arguments<'_>) {
    if io::stderr().is_terminal() {
        eprint!("\r{msg}");
    }
}

pub fn run(cli: Cli) -> CmdResult {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let outcome = dispatch(cli.command, cli.format, &mut out)?;
    out.flush()?;
    Ok(outcome)
}

fn dispatch<W: Write>(command: Command, format: Format, out: &mut W) -> CmdResult {
    match command {
        Command::Hit { n, lucas } => hit(n, kind_of(lucas), format, out),
        Command::Scan {
            range,
            lucas,
            checkpoint,
            interval,
            halt_after,
        } => {
            if interval == 0 {
                return Err(CliError::Usage("--interval must be positive".into()));
            }
            scan(range, kind_of(lucas), checkpoint.as_deref(), interval, halt_after, format, out)
        }
        Command::Pairs { t, range } => pairs(t, range, format, out),
        Command::Audit { which } => match which {
            AuditKind::OddPrimes { to } => audit_odd_primes(to, format, out),
            AuditKind::Squarefree { to } => audit_squarefree(to, format, out),
        },
        Command::Family(args) => family(args, format, out),
        Command::Tower { depth } => tower(depth, format, out),
        Command::Rank { m } => rank(m, format, out),
        Command::Pisano { m } => pisano(m, format, out),
        Command::LucasRank { p, power } => lucas_rank(p, power, format, out),
        Command::Wss { range, emit_all } => wss_scan(range, emit_all, format, out),
        Command::Verify(args) => verify(args, format, out),
    }
}

fn kind_of(lucas: bool) -> Kind {
    if lucas {
        Kind::Lucas
    } else {
        Kind::Fib
    }
}

fn hit<W: Write>(n: u64, kind: Kind, format: Format, out: &mut W) -> CmdResult {
    if n == 0 || n >= MODULUS_LIMIT {
        return Err(CliError::Usage(format!("n must satisfy 1 <= n < 2^62, got {n}")));
    }
    let yes = scanner::is_hit(kind, n);
    #[derive(Serialize)]
    struct Verdict {
        n: u64,
        kind: Kind,
        hit: bool,
    }
    match format {
        Format::Human => writeln!(out, "{}", if yes { "yes" } else { "no" })?,
        Format::Jsonl => json_line(out, &Verdict { n, kind, hit: yes })?,
        Format::Csv => write!(out, "n,kind,hit\n{n},{kind},{yes}\n")?,
        Format::Bfile => return Err(unsupported(format, "hit")),
    }
    Ok(Outcome::Ok)
}

/// Writes hits as they are produced, in any of the four formats.
struct HitSink<'a, W: Write> {
    format: Format,
    out: &'a mut W,
    bfile_index: u64,
}

impl<W: Write> HitSink<'_, W> {
    fn header(&mut self) -> io::Result<()> {
        if self.format == Format::Csv {
            writeln!(self.out, "n,kind")?;
        }
        Ok(())
    }

    fn push(&mut self, h: Hit) -> io::Result<()> {
        match self.format {
            Format::Human => writeln!(self.out, "{}", h.n),
            Format::Jsonl => formats::write_json_line(&mut *self.out, &h),
            Format::Csv => writeln!(self.out, "{},{}", h.n, h.kind),
            Format::Bfile => {
                self.bfile_index += 1;
                writeln!(self.out, "{} {}", self.bfile_index, h.n)
            }
        }
    }
}

fn scan<W: Write>(
    range: Range,
    kind: Kind,
    checkpoint: Option<&Path>,
    interval: u64,
    halt_after: Option<u64>,
    format: Format,
    out: &mut W,
) -> CmdResult {
    check_range(range, MODULUS_LIMIT)?;
    let resume = match checkpoint {
        Some(path) if path.exists() => Some(ScanCheckpoint::load(path)?),
        _ => None,
    };
    // second Ctrl-C falls through to the default handler only after a flush
    let _ = ctrlc::set_handler(|| INTERRUPTED.store(true, Ordering::SeqCst));

    let mut sink = HitSink {
        format,
        out,
        bfile_index: 0,
    };
    sink.header()?;
    let mut write_err: Option<io::Error> = None;
    let mut save_err: Option<ScanError> = None;
    let mut blocks = 0u64;
    let opts = ScanOptions {
        interval,
        ..ScanOptions::default()
    };
    let (sink_ref, werr) = (&mut sink, &mut write_err);
    let final_cp = scanner::scan_resumable(
        kind,
        range.from,
        range.to,
        resume,
        opts,
        |h| {
            if werr.is_none() {
                if let Err(e) = sink_ref.push(h) {
                    *werr = Some(e);
                }
            }
        },
        |cp| {
            blocks += 1;
            progress(format_args!("scanned through {} of {}", cp.next_n - 1, cp.hi));
            if let Some(path) = checkpoint {
                if let Err(e) = cp.save(path) {
                    save_err = Some(e);
                    return ControlFlow::Break(());
                }
            }
            let halted = halt_after.is_some_and(|h| blocks >= h);
            if INTERRUPTED.load(Ordering::SeqCst) || halted {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;
    if io::stderr().is_terminal() {
        eprintln!();
    }
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if let Some(e) = save_err {
        return Err(e.into());
    }
    sink.out.flush()?;
    if final_cp.is_complete() {
        Ok(Outcome::Ok)
    } else {
        eprintln!(
            "fibavg: scan stopped before {}; rerun with the same --checkpoint to resume",
            final_cp.next_n
        );
        Ok(Outcome::Interrupted)
    }
}

fn pairs<W: Write>(t: u64, range: Range, format: Format, out: &mut W) -> CmdResult {
    check_range(range, MODULUS_LIMIT)?;
    let found = scanner::pair_scan(t, range.from, range.to)?;
    match format {
        Format::Human => {
            for p in &found {
                writeln!(out, "{} {}", p.n, p.n + p.t)?;
            }
        }
        Format::Jsonl => formats::write_jsonl(&mut *out, &found)?,
        Format::Csv => formats::write_pairs_csv(&mut *out, &found)?,
        Format::Bfile => {
            let mut b = BFileWriter::new(&mut *out);
            for p in &found {
                b.push(p.n)?;
            }
        }
    }
    Ok(Outcome::Ok)
}

fn verdict(violations: usize) -> Outcome {
    if violations == 0 {
        Outcome::Ok
    } else {
        Outcome::Violation
    }
}

fn audit_odd_primes<W: Write>(to: u64, format: Format, out: &mut W) -> CmdResult {
    let report = scanner::odd_prime_audit(to);
    match format {
        Format::Human => {
            writeln!(
                out,
                "odd primes checked: {}\nviolations: {}",
                report.primes_checked,
                report.violations.len()
            )?;
            for p in &report.violations {
                writeln!(out, "violation {p}")?;
            }
        }
        Format::Jsonl => json_line(out, &report)?,
        Format::Csv => {
            writeln!(out, "hi,primes_checked,violations")?;
            writeln!(out, "{},{},{}", report.hi, report.primes_checked, report.violations.len())?;
        }
        Format::Bfile => return Err(unsupported(format, "audit")),
    }
    Ok(verdict(report.violations.len()))
}

fn audit_squarefree<W: Write>(to: u64, format: Format, out: &mut W) -> CmdResult {
    let report = scanner::squarefree_audit(to);
    match format {
        Format::Human => {
            for h in &report.odd_hits {
                let tag = if h.squarefree { "square-free" } else { "NOT square-free" };
                writeln!(out, "{} = {} {}", h.n, h.factorization, tag)?;
            }
            writeln!(
                out,
                "odd hits: {}\nviolations: {}",
                report.odd_hits.len(),
                report.violations.len()
            )?;
        }
        Format::Jsonl => json_line(out, &report)?,
        Format::Csv => {
            writeln!(out, "n,factorization,squarefree")?;
            for h in &report.odd_hits {
                writeln!(out, "{},{},{}", h.n, h.factorization, h.squarefree)?;
            }
        }
        Format::Bfile => return Err(unsupported(format, "audit")),
    }
    Ok(verdict(report.violations.len()))
}

#[derive(Serialize)]
struct FamilyMember {
    theorem: &'static str,
    alpha: u32,
    beta: u32,
    gamma: u32,
    n: u64,
    kind: Kind,
}

fn family<W: Write>(args: FamilyArgs, format: Format, out: &mut W) -> CmdResult {
    let (label, kind) = match args.theorem {
        Theorem::Doubling => ("33", Kind::Fib),
        Theorem::SmoothFib => ("35", Kind::Fib),
        Theorem::SmoothLucas => ("36", Kind::Lucas),
    };
    let generated: Result<Vec<(FamilyParams, u64)>, FamilyError> = match args.theorem {
        Theorem::Doubling => families::doubling_family(args.alpha_max).map(|ns| {
            ns.into_iter()
                .enumerate()
                .map(|(a, n)| (FamilyParams::new(a as u32, 0, 0), n))
                .collect()
        }),
        Theorem::SmoothFib | Theorem::SmoothLucas => {
            let check = |p| match kind {
                Kind::Fib => families::smooth_family_fib(p),
                Kind::Lucas => families::smooth_family_lucas(p),
            };
            match (args.alpha, args.beta, args.gamma, args.up_to) {
                (Some(a), Some(b), Some(c), None) => {
                    let p = FamilyParams::new(a, b, c);
                    check(p).map(|n| vec![(p, n)])
                }
                (None, None, None, Some(bound)) => families::family_members_up_to(bound)
                    .into_iter()
                    .map(|(p, _)| check(p).map(|n| (p, n)))
                    .collect(),
                _ => {
                    return Err(CliError::Usage(
                        "give either --alpha/--beta/--gamma or --up-to".into(),
                    ))
                }
            }
        }
    };
    let members = match generated {
        Ok(m) => m,
        Err(e @ FamilyError::Overflow(_)) => return Err(CliError::Usage(e.to_string())),
        Err(e @ FamilyError::NotAHit { .. }) => {
            eprintln!("fibavg: {e}");
            return Ok(Outcome::Violation);
        }
    };
    match format {
        Format::Human => {
            for (_, n) in &members {
                writeln!(out, "{n}")?;
            }
        }
        Format::Jsonl => {
            for &(p, n) in &members {
                json_line(
                    out,
                    &FamilyMember {
                        theorem: label,
                        alpha: p.alpha,
                        beta: p.beta,
                        gamma: p.gamma,
                        n,
                        kind,
                    },
                )?;
            }
        }
        Format::Csv => {
            writeln!(out, "alpha,beta,gamma,n,kind")?;
            for (p, n) in &members {
                writeln!(out, "{},{},{},{n},{kind}", p.alpha, p.beta, p.gamma)?;
            }
        }
        Format::Bfile => {
            let mut b = BFileWriter::new(&mut *out);
            for (_, n) in &members {
                b.push(*n)?;
            }
        }
    }
    Ok(Outcome::Ok)
}

fn tower<W: Write>(depth: u32, format: Format, out: &mut W) -> CmdResult {
    let t = families::tower(depth);
    match format {
        Format::Human => {
            for e in &t.elements {
                writeln!(
                    out,
                    "{} {} divides F_12v: {} divides F_3v: {}",
                    e.depth, e.value, e.divides_f12v, e.divides_f3v
                )?;
            }
        }
        Format::Jsonl => formats::write_jsonl(&mut *out, &t.elements)?,
        Format::Csv => {
            writeln!(out, "depth,value,divides_f12v,divides_f3v")?;
            for e in &t.elements {
                writeln!(out, "{},{},{},{}", e.depth, e.value, e.divides_f12v, e.divides_f3v)?;
            }
        }
        Format::Bfile => return Err(unsupported(format, "tower")),
    }
    if t.truncated {
        eprintln!(
            "fibavg: tower stops at depth {}: the next element is not representable in 64 bits",
            t.achieved_depth()
        );
    }
    let bad = t.elements.iter().filter(|e| !(e.divides_f12v && e.divides_f3v)).count();
    Ok(verdict(bad))
}

fn rank<W: Write>(m: u64, format: Format, out: &mut W) -> CmdResult {
    match format {
        Format::Human => writeln!(out, "{}", ranks::rank_of_apparition(m)?)?,
        Format::Jsonl => json_line(out, &ranks::rank_info(m)?)?,
        Format::Csv => {
            let info = ranks::rank_info(m)?;
            let sigma = info.sigma.map(|s| s.to_string()).unwrap_or_default();
            write!(out, "m,rho,pisano,sigma\n{},{},{},{}\n", info.m, info.rho, info.pisano, sigma)?;
        }
        Format::Bfile => return Err(unsupported(format, "rank")),
    }
    Ok(Outcome::Ok)
}

fn pisano<W: Write>(m: u64, format: Format, out: &mut W) -> CmdResult {
    let period = ranks::pisano_period(m)?;
    #[derive(Serialize)]
    struct Period {
        m: u64,
        pisano: u64,
    }
    match format {
        Format::Human => writeln!(out, "{period}")?,
        Format::Jsonl => json_line(out, &Period { m, pisano: period })?,
        Format::Csv => write!(out, "m,pisano\n{m},{period}\n")?,
        Format::Bfile => return Err(unsupported(format, "pisano")),
    }
    Ok(Outcome::Ok)
}

fn lucas_rank<W: Write>(p: u64, r: u32, format: Format, out: &mut W) -> CmdResult {
    let sigma = ranks::lucas_rank(p, r)?;
    #[derive(Serialize)]
    struct LucasRank {
        p: u64,
        r: u32,
        sigma: Option<u64>,
    }
    match format {
        Format::Human => match sigma {
            Some(s) => writeln!(out, "{s}")?,
            None => writeln!(out, "none")?,
        },
        Format::Jsonl => json_line(out, &LucasRank { p, r, sigma })?,
        Format::Csv => {
            let s = sigma.map(|s| s.to_string()).unwrap_or_default();
            write!(out, "p,r,sigma\n{p},{r},{s}\n")?
        }
        Format::Bfile => return Err(unsupported(format, "lucas-rank")),
    }
    Ok(Outcome::Ok)
}

fn wss_scan<W: Write>(range: Range, emit_all: bool, format: Format, out: &mut W) -> CmdResult {
    check_range(range, WSS_PRIME_LIMIT)?;
    let scan = wss::wss_scan(range.from, range.to, emit_all)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let shown = scan.records.as_ref().unwrap_or(&scan.witnesses);
    #[derive(Serialize)]
    struct Summary {
        tested: u64,
        witnesses: usize,
    }
    match format {
        Format::Human => {
            for r in shown {
                let tag = if r.is_witness() { " WITNESS" } else { "" };
                writeln!(out, "{} eps={} residue={}{}", r.p, r.eps, r.residue, tag)?;
            }
            writeln!(out, "primes tested: {}\nwitnesses: {}", scan.tested, scan.witnesses.len())?;
        }
        Format::Jsonl => {
            formats::write_jsonl(&mut *out, shown)?;
            json_line(
                out,
                &Summary {
                    tested: scan.tested,
                    witnesses: scan.witnesses.len(),
                },
            )?;
        }
        Format::Csv => {
            writeln!(out, "p,eps,residue")?;
            for r in shown {
                writeln!(out, "{},{},{}", r.p, r.eps, r.residue)?;
            }
        }
        Format::Bfile => return Err(unsupported(format, "wss")),
    }
    Ok(verdict(scan.witnesses.len()))
}

fn parse_span(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::Usage(format!("malformed --range {s:?}; expected LO..HI"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn verify<W: Write>(args: VerifyArgs, format: Format, out: &mut W) -> CmdResult {
    let ids: Vec<IdentityId> = if args.identity == "all" {
        IdentityId::ALL.to_vec()
    } else {
        let id = IdentityId::from_name(&args.identity).ok_or_else(|| {
            let names: Vec<&str> = IdentityId::ALL.iter().map(|i| i.name()).collect();
            CliError::Usage(format!(
                "unknown identity {:?}; choose one of: all, {}",
                args.identity,
                names.join(", ")
            ))
        })?;
        vec![id]
    };
    let span = args.range.as_deref().map(parse_span).transpose()?;
    let mut failed = 0;
    if format == Format::Csv {
        writeln!(out, "identity,lo,hi,random_samples,failures")?;
    }
    for id in ids {
        let (lo, hi) = span.unwrap_or((id.min_param(), identities::default_range_hi(id)));
        let report =
            identities::run_identity(id, lo, hi, args.samples, args.max_index, args.seed);
        failed += report.failures.len();
        match format {
            Format::Human => {
                writeln!(
                    out,
                    "{}: exhaustive {}..{}, {} random samples, {} failures",
                    id.name(),
                    report.range_checked.lo,
                    report.range_checked.hi,
                    report.random_samples,
                    report.failures.len()
                )?;
                for f in &report.failures {
                    writeln!(out, "  failed at {f:?}")?;
                }
            }
            Format::Jsonl => json_line(out, &report)?,
            Format::Csv => writeln!(
                out,
                "{},{},{},{},{}",
                id.name(),
                report.range_checked.lo,
                report.range_checked.hi,
                report.random_samples,
                report.failures.len()
            )?,
            Format::Bfile => return Err(unsupported(format, "verify")),
        }
    }
    Ok(verdict(failed))
}
