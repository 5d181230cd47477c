//! Weight-image file format.
//!
//! A weight image is the 64-kbit memory content as 512 rows of 128 bits,
//! unit-major (unit 0 rows 0..63 first). Each row holds its 8 complex
//! elements in ascending element order as byte pairs `[re, im]`, where each
//! byte is sign bit 7 plus magnitude bits 6:0. The binary form is exactly
//! 8192 bytes; the hex-text form is one 32-digit lowercase row per line,
//! with blank lines and `#` comments permitted.

use thiserror::Error;

use crate::cmacro::{WeightMemory, ROWS_PER_UNIT, UNITS};
use crate::numfmt::{Complex8, Smf8, VECTOR_LEN};

/// Total rows in an image.
pub const IMAGE_ROWS: usize = UNITS * ROWS_PER_UNIT;
/// Bytes per row (8 complex elements, 2 bytes each).
pub const ROW_BYTES: usize = 2 * VECTOR_LEN;
/// Binary image size: 8192 bytes.
pub const IMAGE_BYTES: usize = IMAGE_ROWS * ROW_BYTES;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WimageError {
    #[error("binary image is {got} bytes, expected {IMAGE_BYTES}")]
    BadLength { got: usize },
    #[error("line {line}: row has {got} hex digits, expected 32")]
    BadRowLength { line: usize, got: usize },
    #[error("line {line}: invalid hex digit {found:?}")]
    BadDigit { line: usize, found: char },
    #[error("hex image has {got} rows, expected {IMAGE_ROWS}")]
    BadRowCount { got: usize },
}

/// Serialize memory contents to the 8192-byte binary image.
pub fn to_bytes(mem: &WeightMemory) -> Vec<u8> {
    let mut out = Vec::with_capacity(IMAGE_BYTES);
    for unit in 0..UNITS {
        for row in 0..ROWS_PER_UNIT {
            for elem in mem.read_row(unit, row).expect("in-range") {
                out.push(elem.re.to_byte());
                out.push(elem.im.to_byte());
            }
        }
    }
    out
}

/// Parse a binary image. Only the length can be invalid: every byte is a
/// well-formed signed-magnitude operand.
pub fn from_bytes(bytes: &[u8]) -> Result<WeightMemory, WimageError> {
    if bytes.len() != IMAGE_BYTES {
        return Err(WimageError::BadLength { got: bytes.len() });
    }
    let mut mem = WeightMemory::new();
    for (idx, chunk) in bytes.chunks_exact(ROW_BYTES).enumerate() {
        let mut row = [Complex8::ZERO; VECTOR_LEN];
        for (elem, pair) in row.iter_mut().zip(chunk.chunks_exact(2)) {
            *elem = Complex8::new(Smf8::from_byte(pair[0]), Smf8::from_byte(pair[1]));
        }
        mem.write_row(idx / ROWS_PER_UNIT, idx % ROWS_PER_UNIT, &row).expect("in-range");
    }
    Ok(mem)
}

/// Serialize to hex text: 512 lines of 32 lowercase digits.
pub fn to_hex(mem: &WeightMemory) -> String {
    let bytes = to_bytes(mem);
    let mut out = String::with_capacity(IMAGE_ROWS * (2 * ROW_BYTES + 1));
    for row in bytes.chunks_exact(ROW_BYTES) {
        for b in row {
            out.push_str(&format!("{b:02x}"));
        }
        out.push('\n');
    }
    out
}

/// Parse hex text. Whitespace inside a row is ignored; blank lines and lines
/// starting with `#` are skipped; a trailing `#` comment is allowed after
/// the digits.
pub fn from_hex(text: &str) -> Result<WeightMemory, WimageError> {
    let mut bytes = Vec::with_capacity(IMAGE_BYTES);
    let mut rows = 0usize;
    for (line_no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let digits: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        if digits.is_empty() {
            continue;
        }
        if digits.len() != 2 * ROW_BYTES {
            return Err(WimageError::BadRowLength { line: line_no + 1, got: digits.len() });
        }
        for pair in digits.chunks_exact(2) {
            let hi = pair[0]
                .to_digit(16)
                .ok_or(WimageError::BadDigit { line: line_no + 1, found: pair[0] })?;
            let lo = pair[1]
                .to_digit(16)
                .ok_or(WimageError::BadDigit { line: line_no + 1, found: pair[1] })?;
            bytes.push((hi * 16 + lo) as u8);
        }
        rows += 1;
    }
    if rows != IMAGE_ROWS {
        return Err(WimageError::BadRowCount { got: rows });
    }
    from_bytes(&bytes)
}
