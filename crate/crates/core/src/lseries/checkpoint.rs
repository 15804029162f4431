use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use super::sum::{LSeriesJob, SumContext};
use super::LSeriesError;
use crate::arith::Precision;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "freysha-checkpoint";

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Text rendering of a job. The accumulator is stored exactly as the integer
/// `S` with `L = 2 S / 2^bits`; `partial_l` is informational. The last line
/// is a SHA-256 digest of everything above it.
pub fn checkpoint_text(job: &LSeriesJob, ctx: &SumContext) -> String {
    let mut body = String::new();
    let _ = writeln!(body, "{MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(body, "class {}", job.class_hash);
    let _ = writeln!(body, "precision {}", job.precision.decimal_digits());
    let _ = writeln!(body, "step {}", job.step);
    let _ = writeln!(body, "n_current {}", job.n_current);
    let _ = writeln!(body, "frac_bits {}", ctx.frac_bits());
    let _ = writeln!(body, "sum {}", job.sum);
    let _ = writeln!(
        body,
        "partial_l {}",
        job.partial_l(ctx)
            .to_sig_string(job.precision.decimal_digits())
    );
    for (n, s) in &job.window {
        let _ = writeln!(body, "window {n} {s}");
    }
    let digest = hex(&Sha256::digest(body.as_bytes()));
    let _ = writeln!(body, "digest {digest}");
    body
}

fn corrupt(msg: &str) -> LSeriesError {
    LSeriesError::Checkpoint(msg.to_string())
}

/// Parses a checkpoint, refusing tampered text and, when given, a different
/// class hash.
pub fn parse_checkpoint(
    text: &str,
    expected_class: Option<&str>,
) -> Result<LSeriesJob, LSeriesError> {
    let digest_at = text
        .rfind("digest ")
        .ok_or_else(|| corrupt("missing digest"))?;
    let (body, tail) = text.split_at(digest_at);
    let stated = tail.trim_start_matches("digest ").trim();
    if hex(&Sha256::digest(body.as_bytes())) != stated {
        return Err(corrupt("digest mismatch"));
    }
    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| corrupt("empty"))?;
    if header != format!("{MAGIC} {CHECKPOINT_VERSION}") {
        return Err(corrupt("unknown format version"));
    }
    let mut class = None;
    let mut precision = None;
    let mut step = None;
    let mut n_current = None;
    let mut frac_bits = None;
    let mut sum = None;
    let mut window = VecDeque::new();
    for line in lines {
        let mut parts = line.splitn(2, ' ');
        let key = parts.next().unwrap_or("");
        let value = parts.next().ok_or_else(|| corrupt("field without value"))?;
        let num = |v: &str| v.parse::<u64>().map_err(|_| corrupt("bad number"));
        match key {
            "class" => class = Some(value.to_string()),
            "precision" => precision = Some(Precision::digits(num(value)? as u32)),
            "step" => step = Some(num(value)?),
            "n_current" => n_current = Some(num(value)?),
            "frac_bits" => frac_bits = Some(num(value)? as u32),
            "sum" => sum = Some(value.parse::<BigInt>().map_err(|_| corrupt("bad sum"))?),
            "partial_l" => {}
            "window" => {
                let (n, s) = value.split_once(' ').ok_or_else(|| corrupt("bad window"))?;
                let s = s.parse::<BigInt>().map_err(|_| corrupt("bad window"))?;
                window.push_back((num(n)?, s));
            }
            _ => return Err(corrupt("unknown field")),
        }
    }
    let class = class.ok_or_else(|| corrupt("missing class"))?;
    if let Some(expected) = expected_class {
        if expected != class {
            return Err(LSeriesError::ClassMismatch {
                expected: expected.to_string(),
                found: class,
            });
        }
    }
    let precision = precision.ok_or_else(|| corrupt("missing precision"))?;
    if frac_bits != Some(precision.bits() + 32) {
        return Err(corrupt("fixed-point scale does not match precision"));
    }
    let step = step
        .filter(|&s| s > 0)
        .ok_or_else(|| corrupt("missing step"))?;
    let n_current = n_current.ok_or_else(|| corrupt("missing n_current"))?;
    let sum = sum.ok_or_else(|| corrupt("missing sum"))?;
    let window: Vec<_> = window.into_iter().collect();
    if window.windows(2).any(|w| w[0].0 >= w[1].0) || window.last().is_some_and(|w| w.0 > n_current)
    {
        return Err(corrupt("window out of order"));
    }
    Ok(LSeriesJob::from_parts(
        class,
        precision,
        step,
        n_current,
        sum,
        window.into(),
    ))
}
