//! The `analyze` report.

use serde_json::{Map, Value};

use covert_core::capacity::{
    blahut_arimoto, check_condition_all_inputs, constrained_capacity_redundant,
};
use covert_core::infodiv::llr_variance;
use covert_core::lpd::{classify, solve_l, tangent_certificate, variance_bound, CaseKind};
use covert_core::{reduce, Channel, Distribution};

use crate::error::Result;
use crate::format::{sig12, Units};

const MAX_ITER: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct ChannelSummary {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub off: String,
    pub dropped_inputs: Vec<String>,
    pub dropped_outputs: Vec<String>,
}

/// Present when the off output is a mixture of the other rows.
#[derive(Clone, Debug)]
pub struct RedundantPart {
    pub constrained_capacity: f64,
    pub constrained_input: Vec<(String, f64)>,
}

/// Present when the square-root law applies.
#[derive(Clone, Debug)]
pub struct SqrtLawPart {
    pub l: f64,
    pub maximizer: Vec<(String, f64)>,
    pub variance_bound: f64,
    pub variance_bound_valid: bool,
    pub llr_variance: f64,
    pub certificate_tight: bool,
    pub certificate_residual: f64,
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub channel: ChannelSummary,
    pub case: CaseKind,
    pub capacity: f64,
    pub q_star: Vec<(String, f64)>,
    pub full_support_achiever: bool,
    pub redundant: Option<RedundantPart>,
    pub sqrt_law: Option<SqrtLawPart>,
}

fn labelled(labels: &[String], d: &Distribution) -> Vec<(String, f64)> {
    labels.iter().cloned().zip(d.iter().copied()).collect()
}

pub fn analyze(ch: &Channel, tol: f64) -> Result<AnalysisReport> {
    let reduced = reduce(ch)?;
    let label = classify(&reduced)?;
    let cap = blahut_arimoto(&reduced, tol, MAX_ITER)?;
    let condition = check_condition_all_inputs(&reduced, &cap)?;
    let names = |idx: &[usize], all: &[String]| idx.iter().map(|&i| all[i].clone()).collect();
    let channel = ChannelSummary {
        inputs: ch.input_labels().to_vec(),
        outputs: ch.output_labels().to_vec(),
        off: ch.input_labels()[ch.off_index()].clone(),
        dropped_inputs: names(&reduced.dropped_inputs, ch.input_labels()),
        dropped_outputs: names(&reduced.dropped_outputs, ch.output_labels()),
    };
    let mut report = AnalysisReport {
        channel,
        case: label.case_kind,
        capacity: cap.capacity_nats,
        q_star: labelled(reduced.output_labels(), &cap.output_dist),
        full_support_achiever: condition.holds,
        redundant: None,
        sqrt_law: None,
    };
    match label.case_kind {
        CaseKind::RedundantOff => {
            let cc = constrained_capacity_redundant(&reduced)?;
            report.redundant = Some(RedundantPart {
                constrained_capacity: cc.capacity_nats,
                constrained_input: labelled(reduced.input_labels(), &cc.input_dist),
            });
        }
        CaseKind::NonRedundantOff => {
            let l = solve_l(&reduced)?;
            let vb = variance_bound(&reduced, &cap)?;
            let cert = tangent_certificate(&reduced, &cap)?;
            report.sqrt_law = Some(SqrtLawPart {
                l: l.l,
                maximizer: labelled(reduced.input_labels(), &l.maximizer),
                variance_bound: vb.value,
                variance_bound_valid: vb.valid,
                llr_variance: llr_variance(reduced.off_output(), &cap.output_dist)?,
                certificate_tight: cert.tight,
                certificate_residual: cert.residual,
            });
        }
    }
    Ok(report)
}

enum Field {
    Text(String),
    Num(f64),
    Bool(bool),
    Law(Vec<(String, f64)>),
    List(Vec<String>),
}

impl AnalysisReport {
    fn fields(&self, u: Units) -> Vec<(String, Field)> {
        let mut f = vec![
            (
                "inputs".to_string(),
                Field::List(self.channel.inputs.clone()),
            ),
            ("outputs".into(), Field::List(self.channel.outputs.clone())),
            ("off".into(), Field::Text(self.channel.off.clone())),
            (
                "dropped_inputs".into(),
                Field::List(self.channel.dropped_inputs.clone()),
            ),
            (
                "dropped_outputs".into(),
                Field::List(self.channel.dropped_outputs.clone()),
            ),
            (
                "case".into(),
                Field::Text(
                    match self.case {
                        CaseKind::RedundantOff => "redundant_off",
                        CaseKind::NonRedundantOff => "non_redundant_off",
                    }
                    .into(),
                ),
            ),
            (
                format!("capacity_{}", u.name()),
                Field::Num(u.info(self.capacity)),
            ),
            ("q_star".into(), Field::Law(self.q_star.clone())),
            ("full_support_achiever".into(), Field::Bool(self.full_support_achiever)),
        ];
        if let Some(r) = &self.redundant {
            f.push((
                format!("constrained_capacity_{}", u.name()),
                Field::Num(u.info(r.constrained_capacity)),
            ));
            f.push((
                "constrained_input".into(),
                Field::Law(r.constrained_input.clone()),
            ));
        }
        if let Some(s) = &self.sqrt_law {
            f.push((format!("L_{}", u.sqrt_name()), Field::Num(u.sqrt_info(s.l))));
            f.push(("maximizer".into(), Field::Law(s.maximizer.clone())));
            f.push((
                format!("variance_bound_{}", u.sqrt_name()),
                Field::Num(u.sqrt_info(s.variance_bound)),
            ));
            f.push((
                "variance_bound_valid".into(),
                Field::Bool(s.variance_bound_valid),
            ));
            f.push((
                format!("llr_variance_{}", u.sq_name()),
                Field::Num(u.info_sq(s.llr_variance)),
            ));
            f.push(("certificate_tight".into(), Field::Bool(s.certificate_tight)));
            f.push((
                "certificate_residual".into(),
                Field::Num(s.certificate_residual),
            ));
        }
        f
    }

    /// One `key: value` line per field.
    pub fn to_text(&self, units: Units) -> String {
        let mut out = String::new();
        for (key, value) in self.fields(units) {
            let v = match value {
                Field::Text(s) => s,
                Field::Num(x) => sig12(x),
                Field::Bool(b) => b.to_string(),
                Field::List(l) => format!("[{}]", l.join(", ")),
                Field::Law(l) => l
                    .iter()
                    .map(|(k, v)| format!("{k}={}", sig12(*v)))
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            out.push_str(&format!("{key}: {v}\n"));
        }
        out
    }

    pub fn to_json(&self, units: Units) -> Result<String> {
        let mut map = Map::new();
        for (key, value) in self.fields(units) {
            let v = match value {
                Field::Text(s) => Value::String(s),
                Field::Num(x) => serde_json::to_value(x)?,
                Field::Bool(b) => Value::Bool(b),
                Field::List(l) => serde_json::to_value(l)?,
                Field::Law(l) => Value::Object(
                    l.into_iter()
                        .map(|(k, v)| Ok((k, serde_json::to_value(v)?)))
                        .collect::<Result<Map<_, _>>>()?,
                ),
            };
            map.insert(key, v);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(map))?;
        s.push('\n');
        Ok(s)
    }
}
