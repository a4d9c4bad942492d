//! Single-range `Range: bytes=...` parsing.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ByteRange {
    pub start: u64,
    /// Exclusive.
    pub end: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeError {
    /// Not a byte range we serve (other unit, multiple ranges, bad syntax):
    /// the full body is returned instead.
    Unsupported,
    /// Syntactically valid but outside the resource: 416.
    Unsatisfiable,
}

pub fn parse_range(header: &str, len: u64) -> Result<ByteRange, RangeError> {
    let spec = header.trim().strip_prefix("bytes=").ok_or(RangeError::Unsupported)?;
    if spec.contains(',') {
        return Err(RangeError::Unsupported);
    }
    let (first, last) = spec.trim().split_once('-').ok_or(RangeError::Unsupported)?;
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| RangeError::Unsupported);
    match (first.trim().is_empty(), last.trim().is_empty()) {
        (true, true) => Err(RangeError::Unsupported),
        (true, false) => {
            let suffix = num(last)?;
            if suffix == 0 || len == 0 {
                return Err(RangeError::Unsatisfiable);
            }
            Ok(ByteRange { start: len.saturating_sub(suffix), end: len })
        }
        (false, open_end) => {
            let start = num(first)?;
            let end = if open_end { len } else { (num(last)? + 1).min(len) };
            if !open_end && num(last)? < start {
                return Err(RangeError::Unsupported);
            }
            if start >= len {
                return Err(RangeError::Unsatisfiable);
            }
            Ok(ByteRange { start, end })
        }
    }
}
