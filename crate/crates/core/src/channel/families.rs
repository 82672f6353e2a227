//! Built-in channel families.

use super::Channel;
use crate::{Error, Result};

fn check_crossover(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "crossover probability {p} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Binary symmetric channel with crossover `p`; input `0` is off.
pub fn bsc(p: f64) -> Result<Channel> {
    check_crossover(p)?;
    Channel::new(
        vec!["0".into(), "1".into()],
        vec!["0".into(), "1".into()],
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        0,
    )
}

/// BSC on `{-1, 1}` plus an off input `0` that induces the uniform output.
pub fn bsc_with_off(p: f64) -> Result<Channel> {
    check_crossover(p)?;
    Channel::new(
        vec!["-1".into(), "0".into(), "1".into()],
        vec!["-1".into(), "1".into()],
        vec![vec![1.0 - p, p], vec![0.5, 0.5], vec![p, 1.0 - p]],
        1,
    )
}

/// `k`-ary uniform-error channel: `W(y|x) = 1 - p` if `y == x`, else
/// `p / (k - 1)`. Input `0` is off.
pub fn kary_uniform_error(k: usize, p: f64) -> Result<Channel> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {k} < 2")));
    }
    check_crossover(p)?;
    let off_diag = p / (k - 1) as f64;
    let matrix = (0..k)
        .map(|x| {
            (0..k)
                .map(|y| if x == y { 1.0 - p } else { off_diag })
                .collect()
        })
        .collect();
    Channel::from_matrix(matrix, 0)
}

/// Ternary cyclic channel whose off row is `[0.37, 0.01, 0.62]`; the other
/// rows are its cyclic shifts. Satisfies the all-inputs capacity condition
/// but not the tangent-cone condition.
pub fn ternary_cyclic() -> Channel {
    Channel::from_matrix(
        vec![
            vec![0.37, 0.01, 0.62],
            vec![0.62, 0.37, 0.01],
            vec![0.01, 0.62, 0.37],
        ],
        0,
    )
    .expect("constant channel is valid")
}
