//! Finnish Business ID (Y-tunnus): seven digits, a hyphen and a mod-11
//! check digit.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

const WEIGHTS: [u32; 7] = [7, 9, 10, 5, 8, 4, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CheckDigitError {
    #[error("base must be exactly seven ASCII digits")]
    MalformedBase,
    /// Weighted sum leaves remainder 1; no such ID is ever issued.
    #[error("no valid check digit exists for this base")]
    NoValidCheckDigit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize)]
pub enum InvalidReason {
    #[error("not shaped like a business ID")]
    BadShape,
    #[error("check digit does not match")]
    BadChecksum,
    #[error("base can never carry a valid check digit")]
    ImpossibleBase,
}

/// A checksum-valid business ID in canonical `NNNNNNN-C` form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct BusinessId(String);

impl BusinessId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for BusinessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn compute_check_digit(base: &str) -> Result<u8, CheckDigitError> {
    let bytes = base.as_bytes();
    if bytes.len() != 7 || !bytes.iter().all(u8::is_ascii_digit) {
        return Err(CheckDigitError::MalformedBase);
    }
    let sum: u32 = bytes
        .iter()
        .zip(WEIGHTS)
        .map(|(b, w)| u32::from(b - b'0') * w)
        .sum();
    match sum % 11 {
        0 => Ok(0),
        1 => Err(CheckDigitError::NoValidCheckDigit),
        r => Ok((11 - r) as u8),
    }
}

/// Normalises and checks a raw business ID.
///
/// Accepted shapes (after trimming): `NNNNNNN-C`, `NNNNNNNC`, and the legacy
/// six-digit `NNNNNN-C`, which gets a leading zero.
pub fn validate_business_id(raw: &str) -> Result<BusinessId, InvalidReason> {
    let raw = raw.trim();
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let (base, check) = match raw.split_once('-') {
        Some((base, check)) if check.len() == 1 && all_digits(check) && all_digits(base) => {
            match base.len() {
                7 => (base.to_owned(), check),
                6 => (format!("0{base}"), check),
                _ => return Err(InvalidReason::BadShape),
            }
        }
        None if raw.len() == 8 && all_digits(raw) => (raw[..7].to_owned(), &raw[7..]),
        _ => return Err(InvalidReason::BadShape),
    };
    let expected = match compute_check_digit(&base) {
        Ok(digit) => digit,
        Err(CheckDigitError::NoValidCheckDigit) => return Err(InvalidReason::ImpossibleBase),
        Err(CheckDigitError::MalformedBase) => return Err(InvalidReason::BadShape),
    };
    if check.as_bytes()[0] - b'0' != expected {
        return Err(InvalidReason::BadChecksum);
    }
    Ok(BusinessId(format!("{base}-{check}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent check: a base is valid with digit `c` iff the weighted sum
    /// plus `c` is divisible by 11. Digits come from integer arithmetic, not
    /// from the string.
    fn oracle(base: u32) -> Option<u8> {
        let mut digits = [0u32; 7];
        let mut n = base;
        for slot in digits.iter_mut().rev() {
            *slot = n % 10;
            n /= 10;
        }
        let sum = 7 * digits[0] + 9 * digits[1] + 10 * digits[2] + 5 * digits[3] + 8 * digits[4]
            + 4 * digits[5]
            + 2 * digits[6];
        (0..=9u8).find(|c| (sum + u32::from(*c)) % 11 == 0)
    }

    #[test]
    fn worked_examples() {
        assert_eq!(compute_check_digit("0000000"), Ok(0));
        // 0*7 + 1*9 + 2*10 + 3*5 + 4*8 + 5*4 + 6*2 = 108; 108 mod 11 = 9.
        assert_eq!(oracle(123456), Some(2));
        assert_eq!(compute_check_digit("0123456"), Ok(2));
        // 1*7 + 1*5 = 12; remainder 1.
        assert_eq!(oracle(1001000), None);
        assert_eq!(compute_check_digit("1001000"), Err(CheckDigitError::NoValidCheckDigit));
    }

    #[test]
    fn malformed_bases() {
        for base in ["", "012345", "01234567", "01234a6", "０123456"] {
            assert_eq!(compute_check_digit(base), Err(CheckDigitError::MalformedBase), "{base}");
        }
    }

    #[test]
    fn validation_shapes() {
        assert_eq!(validate_business_id("0123456-2").unwrap().as_str(), "0123456-2");
        assert_eq!(validate_business_id(" 01234562 ").unwrap().as_str(), "0123456-2");
        assert_eq!(validate_business_id("123456-2").unwrap().as_str(), "0123456-2");
        assert_eq!(validate_business_id("0123456-3"), Err(InvalidReason::BadChecksum));
        assert_eq!(validate_business_id("1001000-0"), Err(InvalidReason::ImpossibleBase));
        for bad in ["", "0123456", "0123456-", "0123456-22", "12345-6", "O123456-2", "0123 456-2"] {
            assert_eq!(validate_business_id(bad), Err(InvalidReason::BadShape), "{bad}");
        }
    }

    #[test]
    fn sampled_bases_agree_with_oracle() {
        // The exhaustive sweep lives in the acceptance suite.
        for base in (0..10_000_000u32).step_by(7_919) {
            let text = format!("{base:07}");
            assert_eq!(compute_check_digit(&text).ok(), oracle(base), "{text}");
        }
    }

    proptest! {
        #[test]
        fn canonical_ids_revalidate_unchanged(base in 0u32..10_000_000) {
            if let Some(check) = oracle(base) {
                let id = validate_business_id(&format!("{base:07}-{check}")).unwrap();
                prop_assert_eq!(validate_business_id(id.as_str()).unwrap(), id);
            }
        }
    }
}
