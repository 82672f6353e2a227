//! Number formatting and display units.

use std::f64::consts::LN_2;

/// Formats `x` with 12 significant digits, like C's `%.12g`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Information unit used for display. Computation is always in nats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn from_bits_flag(bits: bool) -> Self {
        if bits {
            Units::Bits
        } else {
            Units::Nats
        }
    }

    pub fn info(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / LN_2,
        }
    }

    pub fn sqrt_info(self, v: f64) -> f64 {
        match self {
            Units::Nats => v,
            Units::Bits => v / LN_2.sqrt(),
        }
    }

    pub fn info_sq(self, v: f64) -> f64 {
        match self {
            Units::Nats => v,
            Units::Bits => v / (LN_2 * LN_2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    pub fn sqrt_name(self) -> &'static str {
        match self {
            Units::Nats => "sqrt_nats",
            Units::Bits => "sqrt_bits",
        }
    }

    pub fn sq_name(self) -> &'static str {
        match self {
            Units::Nats => "nats2",
            Units::Bits => "bits2",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.9251381651234567), "0.925138165123");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(-2.5), "-2.5");
        assert_eq!(sig12(123456.0), "123456");
        assert_eq!(sig12(1e-7), "1e-7");
        assert_eq!(sig12(1.23456789012345e15), "1.23456789012e15");
        assert_eq!(sig12(0.000123), "0.000123");
        assert_eq!(sig12(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trips_within_precision() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 6.02e23, 1.6e-19] {
            let back: f64 = sig12(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    #[test]
    fn bits_conversion() {
        assert!((Units::Bits.info(LN_2) - 1.0).abs() < 1e-15);
        let l = 0.9;
        // L scales like nats / sqrt(nats)
        assert!((Units::Bits.sqrt_info(l) - (l / LN_2) / (1.0 / LN_2).sqrt()).abs() < 1e-15);
        assert_eq!(Units::Nats.info_sq(2.0), 2.0);
    }
}
