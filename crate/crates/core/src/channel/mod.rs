//! Discrete memoryless channels with a designated "off" input symbol.
//!
//! A [`Channel`] is a validated row-stochastic matrix `W(y|x)` together with
//! input/output labels and the index of the off symbol `0`, whose row is the
//! no-communication output distribution `Q0`. [`reduce`] strips inputs and
//! outputs that would make the detection divergence infinite, leaving a
//! channel on which `supp(Q0)` is the whole output alphabet.

mod distribution;
pub mod families;
mod file;

use std::ops::Deref;

pub use distribution::{Distribution, SUM_TOLERANCE};
pub use file::{parse_channel, ChannelFile, OffSymbol};

pub(crate) use distribution::check_same_size;

use crate::{Error, Result};

/// Accepted deviation of a raw row sum from one before renormalization.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Rows closer than this in L-infinity are treated as the same output law.
pub const DUPLICATE_ROW_TOLERANCE: f64 = 1e-9;

/// Output mass below this counts as zero when computing supports.
pub const ZERO_MASS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    rows: Vec<Distribution>,
    off: usize,
}

impl Channel {
    pub fn new(
        input_labels: Vec<String>,
        output_labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
        off: usize,
    ) -> Result<Self> {
        check_same_size(input_labels.len(), matrix.len())?;
        if output_labels.is_empty() {
            return Err(Error::Parse("channel has no outputs".into()));
        }
        if off >= matrix.len() {
            return Err(Error::UnknownOff(off.to_string()));
        }
        let mut rows = Vec::with_capacity(matrix.len());
        for (x, row) in matrix.into_iter().enumerate() {
            check_same_size(output_labels.len(), row.len())?;
            if let Some((y, &value)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                return Err(Error::InvalidEntry {
                    row: x,
                    col: y,
                    value,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochastic { row: x, sum });
            }
            rows.push(Distribution::with_tolerance(row, ROW_SUM_TOLERANCE)?);
        }
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if rows[i].max_abs_diff(&rows[j]) < DUPLICATE_ROW_TOLERANCE {
                    return Err(Error::DuplicateRows(i, j));
                }
            }
        }
        if rows.len() < 2 {
            return Err(Error::NoNonOffInput);
        }
        Ok(Channel {
            input_labels,
            output_labels,
            rows,
            off,
        })
    }

    /// Channel with labels `"0"`, `"1"`, ... on both sides.
    pub fn from_matrix(matrix: Vec<Vec<f64>>, off: usize) -> Result<Self> {
        let inputs = (0..matrix.len()).map(|i| i.to_string()).collect();
        let width = matrix.first().map_or(0, Vec::len);
        let outputs = (0..width).map(|i| i.to_string()).collect();
        Channel::new(inputs, outputs, matrix, off)
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_labels.len()
    }

    pub fn off_index(&self) -> usize {
        self.off
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    /// `W(.|x)`.
    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    /// `Q0 = W(.|0)`.
    pub fn off_output(&self) -> &Distribution {
        &self.rows[self.off]
    }

    /// Input indices other than the off symbol, in order.
    pub fn non_off_inputs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows.len()).filter(move |&x| x != self.off)
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Output distribution induced by `input` through the channel.
    pub fn output_marginal(&self, input: &Distribution) -> Result<Distribution> {
        check_same_size(self.num_inputs(), input.len())?;
        let weights = self.push_forward(input.probs());
        Distribution::from_weights(weights)
    }

    /// `sum_x weights[x] W(.|x)` without normalization.
    pub(crate) fn push_forward(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_outputs()];
        for (row, &w) in self.rows.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(row.probs()) {
                *o += w * p;
            }
        }
        out
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            inputs: Some(self.input_labels.clone()),
            outputs: Some(self.output_labels.clone()),
            off: OffSymbol::Label(self.input_labels[self.off].clone()),
            matrix: self.rows.iter().map(|r| r.probs().to_vec()).collect(),
        }
    }

    /// Serializes to the channel file format read by [`parse_channel`].
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("channel file serializes")
    }
}

/// A channel on which every output has positive mass under `Q0` and every
/// retained input's support lies inside `supp(Q0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedChannel {
    channel: Channel,
    /// Original indices of the retained inputs, in order.
    pub kept_inputs: Vec<usize>,
    pub dropped_inputs: Vec<usize>,
    pub dropped_outputs: Vec<usize>,
}

impl ReducedChannel {
    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn into_channel(self) -> Channel {
        self.channel
    }

    pub fn is_unchanged(&self) -> bool {
        self.dropped_inputs.is_empty() && self.dropped_outputs.is_empty()
    }
}

impl Deref for ReducedChannel {
    type Target = Channel;

    fn deref(&self) -> &Channel {
        &self.channel
    }
}

/// Drops every output outside `supp(Q0)` and every input that puts mass on a
/// dropped output. Rows are restricted, not renormalized.
pub fn reduce(ch: &Channel) -> Result<ReducedChannel> {
    let q0 = ch.off_output();
    let (kept_outputs, dropped_outputs): (Vec<usize>, Vec<usize>) =
        (0..ch.num_outputs()).partition(|&y| q0[y] >= ZERO_MASS);
    let (kept_inputs, dropped_inputs): (Vec<usize>, Vec<usize>) = (0..ch.num_inputs())
        .partition(|&x| dropped_outputs.iter().all(|&y| ch.entry(x, y) < ZERO_MASS));

    if kept_inputs.len() < 2 {
        return Err(Error::NoCovertInput);
    }
    if dropped_inputs.is_empty() && dropped_outputs.is_empty() {
        return Ok(ReducedChannel {
            channel: ch.clone(),
            kept_inputs,
            dropped_inputs,
            dropped_outputs,
        });
    }
    let matrix = kept_inputs
        .iter()
        .map(|&x| kept_outputs.iter().map(|&y| ch.entry(x, y)).collect())
        .collect();
    let off = kept_inputs
        .iter()
        .position(|&x| x == ch.off)
        .expect("off input is always retained");
    let channel = Channel::new(
        kept_inputs
            .iter()
            .map(|&x| ch.input_labels[x].clone())
            .collect(),
        kept_outputs
            .iter()
            .map(|&y| ch.output_labels[y].clone())
            .collect(),
        matrix,
        off,
    )?;
    Ok(ReducedChannel {
        channel,
        kept_inputs,
        dropped_inputs,
        dropped_outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bec(e: f64) -> Channel {
        // outputs: 0, erasure, 1
        Channel::from_matrix(vec![vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]], 0).unwrap()
    }

    #[test]
    fn rejects_non_stochastic_row() {
        let err = Channel::from_matrix(vec![vec![0.5, 0.3], vec![0.1, 0.9]], 0).unwrap_err();
        assert!(matches!(err, Error::NonStochastic { row: 0, .. }));
    }

    #[test]
    fn rejects_duplicate_rows() {
        let err = Channel::from_matrix(
            vec![vec![0.5, 0.5], vec![0.2, 0.8], vec![0.2, 0.8 + 1e-12]],
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateRows(1, 2)));
    }

    #[test]
    fn rejects_single_input() {
        let err = Channel::from_matrix(vec![vec![1.0]], 0).unwrap_err();
        assert!(matches!(err, Error::NoNonOffInput));
    }

    #[test]
    fn rows_are_renormalized() {
        let ch = Channel::from_matrix(vec![vec![0.9, 0.1 + 5e-7], vec![0.1, 0.9]], 0).unwrap();
        assert_eq!(ch.row(0).iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn bsc_is_already_reduced() {
        let r = reduce(&families::bsc(0.1).unwrap()).unwrap();
        assert!(r.is_unchanged());
        assert_eq!(r.num_inputs(), 2);
    }

    #[test]
    fn input_escaping_support_is_dropped() {
        let ch = Channel::from_matrix(
            vec![
                vec![0.6, 0.4, 0.0],
                vec![0.3, 0.7, 0.0],
                vec![0.25, 0.25, 0.5],
            ],
            0,
        )
        .unwrap();
        let r = reduce(&ch).unwrap();
        assert_eq!(r.dropped_inputs, vec![2]);
        assert_eq!(r.dropped_outputs, vec![2]);
        assert_eq!(r.num_outputs(), 2);
        assert_eq!(r.input_labels(), &["0".to_string(), "1".to_string()]);
    }

    #[test]
    fn binary_erasure_channel_has_no_covert_input() {
        // Q0 = [1-e, e, 0]; input 1 puts 1-e on the third output.
        let err = reduce(&bec(0.3)).unwrap_err();
        assert!(matches!(err, Error::NoCovertInput));
    }

    #[test]
    fn off_index_follows_reduction() {
        let ch = Channel::from_matrix(
            vec![
                vec![0.0, 0.5, 0.5],
                vec![0.2, 0.3, 0.5],
                vec![0.0, 0.4, 0.6],
            ],
            2,
        )
        .unwrap();
        let r = reduce(&ch).unwrap();
        assert_eq!(r.kept_inputs, vec![0, 2]);
        assert_eq!(r.off_index(), 1);
        assert_eq!(r.off_output().probs(), &[0.4, 0.6]);
    }
}
