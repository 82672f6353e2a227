//! Parameter grids: `A:B:STEP` (arithmetic), `A:B:xF` (geometric) or a
//! comma-separated list.

use crate::error::{CliError, Result};

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("not a number: {s:?}")))
}

pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, step] => {
            let (a, b) = (number(a)?, number(b)?);
            if let Some(f) = step.trim().strip_prefix('x') {
                let f = number(f)?;
                if !(f > 1.0 && a > 0.0) {
                    return Err(CliError::Usage(format!("bad geometric grid {spec:?}")));
                }
                let mut out = Vec::new();
                let mut v = a;
                while v <= b * (1.0 + 1e-12) {
                    out.push(v);
                    v *= f;
                }
                out
            } else {
                let step = number(step)?;
                if step <= 0.0 {
                    return Err(CliError::Usage(format!(
                        "grid step must be positive in {spec:?}"
                    )));
                }
                let count = ((b - a) / step + 1e-9).floor();
                if count < 0.0 {
                    return Err(CliError::Usage(format!("empty grid {spec:?}")));
                }
                (0..=count as usize).map(|i| a + i as f64 * step).collect()
            }
        }
        [_] => spec.split(',').map(number).collect::<Result<_>>()?,
        _ => return Err(CliError::Usage(format!("bad grid {spec:?}"))),
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty grid {spec:?}")));
    }
    Ok(values)
}

/// Blocklength grid; entries such as `1e5` are accepted if integral.
pub fn parse_n_grid(spec: &str) -> Result<Vec<u64>> {
    parse_real_grid(spec)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r >= 1.0 && (v - r).abs() <= 1e-9 * r {
                Ok(r as u64)
            } else {
                Err(CliError::Usage(format!(
                    "blocklength {v} is not a positive integer"
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let g = parse_real_grid("0.005:0.495:0.005").unwrap();
        assert_eq!(g.len(), 99);
        assert!((g[98] - 0.495).abs() < 1e-12);
        assert_eq!(parse_real_grid("0:1:0.5").unwrap(), [0.0, 0.5, 1.0]);
    }

    #[test]
    fn geometric_and_lists() {
        assert_eq!(
            parse_n_grid("100:1e5:x10").unwrap(),
            [100, 1000, 10_000, 100_000]
        );
        assert_eq!(parse_n_grid("5000,20000").unwrap(), [5000, 20000]);
        assert_eq!(parse_real_grid("0.1").unwrap(), [0.1]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_real_grid("1:0:0.1").is_err());
        assert!(parse_real_grid("0:1:0").is_err());
        assert!(parse_real_grid("a,b").is_err());
        assert!(parse_n_grid("0.5").is_err());
        assert!(parse_real_grid("1:2:3:4").is_err());
    }
}
