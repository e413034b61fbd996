//! Working-precision levels and dispatch over the scalar type.

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Hardware double, 15 digits.
    Double,
    /// 192-bit mantissa, 57 digits.
    Bits192,
    /// 384-bit mantissa, 115 digits.
    Bits384,
    /// 768-bit mantissa, 231 digits.
    Bits768,
}

impl Precision {
    /// Smallest level carrying at least `digits` significant decimal digits.
    pub fn from_digits(digits: u32) -> Result<Self, CliError> {
        Ok(match digits {
            0 => return Err(CliError::Config("precision must be at least 1 digit".into())),
            1..=15 => Precision::Double,
            16..=57 => Precision::Bits192,
            58..=115 => Precision::Bits384,
            116..=231 => Precision::Bits768,
            _ => return Err(CliError::Config(format!("precision of {digits} digits is not supported (max 231)"))),
        })
    }

    /// Double up to N = 30, 57 digits beyond.
    pub fn default_for(max_n: usize) -> Self {
        if max_n > 30 {
            Precision::Bits192
        } else {
            Precision::Double
        }
    }

    pub fn digits(&self) -> u32 {
        match self {
            Precision::Double => 15,
            Precision::Bits192 => 57,
            Precision::Bits384 => 115,
            Precision::Bits768 => 231,
        }
    }
}

/// Calls a generic function with the scalar type matching a [`Precision`].
#[macro_export]
macro_rules! with_precision {
    ($p:expr, $f:ident ( $($arg:expr),* $(,)? )) => {
        match $p {
            $crate::Precision::Double => $f::<f64>($($arg),*),
            $crate::Precision::Bits192 => $f::<qla_core::Wide<192>>($($arg),*),
            $crate::Precision::Bits384 => $f::<qla_core::Wide<384>>($($arg),*),
            $crate::Precision::Bits768 => $f::<qla_core::Wide<768>>($($arg),*),
        }
    };
}
