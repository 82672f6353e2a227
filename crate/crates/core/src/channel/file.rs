//! JSON channel file format.
//!
//! ```json
//! {
//!   "inputs": ["0", "1"],
//!   "outputs": ["0", "1"],
//!   "off": "0",
//!   "matrix": [[0.9, 0.1], [0.1, 0.9]]
//! }
//! ```
//!
//! `off` is either an input label (string) or a zero-based input index
//! (integer). `inputs` and `outputs` default to `"0"`, `"1"`, ... when omitted.

use serde::{Deserialize, Serialize};

use super::Channel;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OffSymbol {
    Index(usize),
    Label(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    pub off: OffSymbol,
    pub matrix: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<Channel> {
        let n_in = self.matrix.len();
        let n_out = self.matrix.first().map_or(0, Vec::len);
        let inputs = self
            .inputs
            .unwrap_or_else(|| (0..n_in).map(|i| i.to_string()).collect());
        let outputs = self
            .outputs
            .unwrap_or_else(|| (0..n_out).map(|i| i.to_string()).collect());
        if inputs.len() != n_in {
            return Err(Error::Parse(format!(
                "{} input labels for {} matrix rows",
                inputs.len(),
                n_in
            )));
        }
        if let Some((i, row)) = self
            .matrix
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != outputs.len())
        {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                outputs.len()
            )));
        }
        let off = match &self.off {
            OffSymbol::Label(name) => inputs
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::UnknownOff(name.clone()))?,
            OffSymbol::Index(i) if *i < n_in => *i,
            OffSymbol::Index(i) => return Err(Error::UnknownOff(i.to_string())),
        };
        Channel::new(inputs, outputs, self.matrix, off)
    }
}

/// Parses and validates a channel file.
pub fn parse_channel(text: &str) -> Result<Channel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_channel()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = r#"{
        "inputs": ["0", "1"],
        "outputs": ["0", "1"],
        "off": "0",
        "matrix": [[0.9, 0.1], [0.1, 0.9]]
    }"#;

    #[test]
    fn parses_bsc() {
        let ch = parse_channel(BSC).unwrap();
        assert_eq!(ch.off_index(), 0);
        assert_eq!(ch.num_inputs(), 2);
        assert_eq!(ch.row(1).probs(), &[0.1, 0.9]);
    }

    #[test]
    fn off_by_index_or_label() {
        let by_index = r#"{"inputs": ["a", "b"], "off": 1, "matrix": [[0.9, 0.1], [0.1, 0.9]]}"#;
        assert_eq!(parse_channel(by_index).unwrap().off_index(), 1);
        let by_label = r#"{"inputs": ["a", "b"], "off": "b", "matrix": [[0.9, 0.1], [0.1, 0.9]]}"#;
        assert_eq!(parse_channel(by_label).unwrap().off_index(), 1);
    }

    #[test]
    fn unknown_off_symbol() {
        let text = r#"{"inputs": ["a", "b"], "off": "c", "matrix": [[0.9, 0.1], [0.1, 0.9]]}"#;
        assert!(matches!(parse_channel(text), Err(Error::UnknownOff(_))));
        let text = r#"{"off": 5, "matrix": [[0.9, 0.1], [0.1, 0.9]]}"#;
        assert!(matches!(parse_channel(text), Err(Error::UnknownOff(_))));
    }

    #[test]
    fn malformed_syntax() {
        assert!(matches!(parse_channel("{ off: 0 "), Err(Error::Parse(_))));
        let ragged = r#"{"off": 0, "matrix": [[0.9, 0.1], [1.0]]}"#;
        assert!(matches!(parse_channel(ragged), Err(Error::Parse(_))));
        let unknown_field = r#"{"off": 0, "matrix": [[0.9, 0.1], [0.1, 0.9]], "extra": 1}"#;
        assert!(matches!(parse_channel(unknown_field), Err(Error::Parse(_))));
    }

    #[test]
    fn non_stochastic_row() {
        let text = r#"{"off": 0, "matrix": [[0.5, 0.3], [0.1, 0.9]]}"#;
        assert!(matches!(
            parse_channel(text),
            Err(Error::NonStochastic { row: 0, .. })
        ));
    }

    #[test]
    fn degenerate_alphabet() {
        let text = r#"{"off": 0, "matrix": [[1.0]]}"#;
        assert!(matches!(parse_channel(text), Err(Error::NoNonOffInput)));
    }

    #[test]
    fn duplicate_rows() {
        let text = r#"{"off": 0, "matrix": [[0.5, 0.5], [0.1, 0.9], [0.1, 0.9]]}"#;
        assert!(matches!(
            parse_channel(text),
            Err(Error::DuplicateRows(1, 2))
        ));
    }
}
