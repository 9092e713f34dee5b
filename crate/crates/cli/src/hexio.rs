//! Lowercase, unprefixed, big-endian hex.

use drmmm_core::Natural;
use num_traits::Num;

use crate::error::{CliError, CliResult, ErrorCode};

pub fn parse_hex(field: &str, s: &str) -> CliResult<Natural> {
    let valid = !s.is_empty() && s.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f'));
    if !valid {
        return Err(CliError::new(
            ErrorCode::Parse,
            format!("{field}: expected lowercase hex without prefix, got {s:?}"),
        ));
    }
    Natural::from_str_radix(s, 16)
        .map_err(|e| CliError::new(ErrorCode::Parse, format!("{field}: {e}")))
}

pub fn to_hex(x: &Natural) -> String {
    format!("{x:x}")
}
