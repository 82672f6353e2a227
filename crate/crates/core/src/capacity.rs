//! Channel capacity by Blahut-Arimoto, the all-inputs capacity condition,
//! and the constrained capacity of channels whose off symbol is redundant.

use serde::Serialize;

use crate::channel::{Channel, Distribution};
use crate::infodiv::{kl_slices, mutual_information_with_output};
use crate::opt::{self, Constraint, Relation};
use crate::{Error, Nats, Result};

/// Probabilities above this count as "in the support" of an input law.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

/// KKT slacks up to this value mark an input as capacity-active.
pub const ACTIVE_SLACK: f64 = 1e-6;

/// Slack on `P W = Q*` allowed by the all-inputs condition LP.
pub const CONDITION_LP_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    pub capacity_nats: Nats,
    /// A capacity-achieving input law `P*`.
    pub input_dist: Distribution,
    /// The capacity-achieving output law `Q*`.
    pub output_dist: Distribution,
    /// `C - D(W(.|x) || Q*)` per input.
    pub kkt_slacks: Vec<Nats>,
    pub iterations: usize,
    /// Final gap `max_x D(W(.|x) || Q) - I(P, W)`.
    pub residual: Nats,
}

pub fn blahut_arimoto(ch: &Channel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    blahut_arimoto_from(ch, &Distribution::uniform(ch.num_inputs()), tol, max_iter)
}

/// Blahut-Arimoto from an arbitrary full-support starting law. Stops when
/// `max_x D(W(.|x) || Q_k) - I(P_k, W) <= tol`.
pub fn blahut_arimoto_from(
    ch: &Channel,
    init: &Distribution,
    tol: f64,
    max_iter: usize,
) -> Result<CapacityResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    if init.len() != ch.num_inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_inputs(),
            got: init.len(),
        });
    }
    let mut p = init.probs().to_vec();
    let mut gap = f64::INFINITY;
    for iter in 0..max_iter {
        let q = ch.push_forward(&p);
        let d: Vec<f64> = ch.rows().iter().map(|w| kl_slices(w.probs(), &q)).collect();
        let lower: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gap = upper - lower;
        if gap <= tol {
            return Ok(finish(ch, p, iter));
        }
        // P(x) <- P(x) exp(D(W(.|x) || Q) - upper), normalized
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (dx - upper).exp();
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
    }
    Err(Error::NotConverged {
        solver: "Blahut-Arimoto",
        iterations: max_iter,
        gap,
    })
}

fn finish(ch: &Channel, p: Vec<f64>, iterations: usize) -> CapacityResult {
    let input_dist = Distribution::from_weights(p).expect("iterate stays on the simplex");
    let q = ch.push_forward(input_dist.probs());
    let capacity = mutual_information_with_output(input_dist.probs(), ch, &q);
    let d: Vec<f64> = ch.rows().iter().map(|w| kl_slices(w.probs(), &q)).collect();
    let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CapacityResult {
        capacity_nats: capacity,
        kkt_slacks: d.iter().map(|dx| capacity - dx).collect(),
        output_dist: Distribution::from_weights(q).expect("output law of a valid input"),
        input_dist,
        iterations,
        residual: (upper - capacity).max(0.0),
    }
}

/// Outcome of the test for a capacity-achieving input with full support.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    /// A full-support capacity achiever, present when `holds`.
    pub witness: Option<Distribution>,
    /// Optimal `min_x P(x)` over the capacity-achieving polytope.
    pub min_mass: f64,
}

/// Decides whether some capacity-achieving input law uses every input.
///
/// Maximizes `min_x P(x)` over `{P : P W = Q*, P(x) = 0 for inactive x}`,
/// with `P W = Q*` relaxed to [`CONDITION_LP_TOLERANCE`] per output.
pub fn check_condition_all_inputs(ch: &Channel, cap: &CapacityResult) -> Result<ConditionCheck> {
    if cap.kkt_slacks.len() != ch.num_inputs() || cap.output_dist.len() != ch.num_outputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_inputs(),
            got: cap.kkt_slacks.len(),
        });
    }
    let active: Vec<usize> = (0..ch.num_inputs())
        .filter(|&x| cap.kkt_slacks[x] <= ACTIVE_SLACK)
        .collect();
    let k = active.len();
    // variables: P(active[0..k]), t
    let mut constraints = Vec::new();
    let mut sum = vec![1.0; k + 1];
    sum[k] = 0.0;
    constraints.push(Constraint::new(sum, Relation::Eq, 1.0));
    for y in 0..ch.num_outputs() {
        let mut row: Vec<f64> = active.iter().map(|&x| ch.entry(x, y)).collect();
        row.push(0.0);
        let target = cap.output_dist[y];
        constraints.push(Constraint::new(
            row.clone(),
            Relation::Le,
            target + CONDITION_LP_TOLERANCE,
        ));
        constraints.push(Constraint::new(
            row,
            Relation::Ge,
            target - CONDITION_LP_TOLERANCE,
        ));
    }
    for i in 0..k {
        let mut row = vec![0.0; k + 1];
        row[k] = 1.0;
        row[i] = -1.0;
        constraints.push(Constraint::new(row, Relation::Le, 0.0));
    }
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let sol = opt::maximize(&objective, &constraints)?;

    let min_mass = if k == ch.num_inputs() { sol.x[k] } else { 0.0 };
    let holds = min_mass > 1e-9;
    let witness = if holds {
        let mut p = vec![0.0; ch.num_inputs()];
        for (i, &x) in active.iter().enumerate() {
            p[x] = sol.x[i];
        }
        Some(Distribution::from_weights(p)?)
    } else {
        None
    };
    Ok(ConditionCheck {
        holds,
        witness,
        min_mass,
    })
}

/// Largest mutual information under `P(0) = 0` and `P W = Q0`.
#[derive(Clone, Debug, Serialize)]
pub struct ConstrainedCapacity {
    pub capacity_nats: Nats,
    pub input_dist: Distribution,
    pub output_dist: Distribution,
    /// `max_y |P W(y) - Q0(y)|`.
    pub constraint_violation: f64,
}

/// Maximizes `I(P, W)` over input laws that avoid the off symbol and
/// reproduce `Q0` at the output.
///
/// On that set `I(P, W) = sum_x P(x) D(W(.|x) || Q0)` is linear, so the
/// conditional-gradient linear step already lands on an optimal vertex and
/// the program reduces to one LP.
pub fn constrained_capacity_redundant(ch: &Channel) -> Result<ConstrainedCapacity> {
    let q0 = ch.off_output();
    let inputs: Vec<usize> = ch.non_off_inputs().collect();
    let d: Vec<f64> = inputs
        .iter()
        .map(|&x| kl_slices(ch.row(x).probs(), q0.probs()))
        .collect();
    let solve = |slack: f64| {
        let mut constraints = vec![Constraint::new(vec![1.0; inputs.len()], Relation::Eq, 1.0)];
        for y in 0..ch.num_outputs() {
            let row: Vec<f64> = inputs.iter().map(|&x| ch.entry(x, y)).collect();
            constraints.push(Constraint::new(row.clone(), Relation::Le, q0[y] + slack));
            constraints.push(Constraint::new(row, Relation::Ge, q0[y] - slack));
        }
        opt::maximize(&d, &constraints)
    };
    let sol = match solve(1e-10) {
        Err(Error::Infeasible) => solve(CONDITION_LP_TOLERANCE),
        other => other,
    }
    .map_err(|e| match e {
        Error::Infeasible => Error::NotRedundant,
        e => e,
    })?;

    let mut p = vec![0.0; ch.num_inputs()];
    for (i, &x) in inputs.iter().enumerate() {
        p[x] = sol.x[i];
    }
    let input_dist = Distribution::from_weights(p)?;
    let q = ch.push_forward(input_dist.probs());
    let capacity = mutual_information_with_output(input_dist.probs(), ch, &q);
    let output_dist = Distribution::from_weights(q)?;
    Ok(ConstrainedCapacity {
        capacity_nats: capacity,
        constraint_violation: output_dist.max_abs_diff(q0),
        input_dist,
        output_dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::families;

    fn h_b(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn bsc_capacity() {
        let cap = blahut_arimoto(&families::bsc(0.1).unwrap(), 1e-12, 10_000).unwrap();
        assert!((cap.capacity_nats - (std::f64::consts::LN_2 - h_b(0.1))).abs() < 1e-12);
        assert!(cap.output_dist.max_abs_diff(&Distribution::uniform(2)) < 1e-12);
        assert!(cap.kkt_slacks.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn kary_capacity() {
        let cap = blahut_arimoto(
            &families::kary_uniform_error(3, 0.2).unwrap(),
            1e-12,
            10_000,
        )
        .unwrap();
        let want = 3f64.ln() + 0.8 * 0.8f64.ln() + 0.2 * 0.1f64.ln();
        assert!((cap.capacity_nats - want).abs() < 1e-12);
        assert!(cap.output_dist.max_abs_diff(&Distribution::uniform(3)) < 1e-12);
    }

    #[test]
    fn identity_capacity() {
        let ch = Channel::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0).unwrap();
        let cap = blahut_arimoto(&ch, 1e-12, 100).unwrap();
        assert!((cap.capacity_nats - std::f64::consts::LN_2).abs() < 1e-14);
        assert_eq!(cap.input_dist.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn non_convergence_is_reported() {
        let ch = families::ternary_cyclic();
        let err = blahut_arimoto_from(
            &ch,
            &Distribution::new(vec![0.98, 0.01, 0.01]).unwrap(),
            1e-15,
            3,
        )
        .unwrap_err();
        assert!(err.is_convergence());
    }

    #[test]
    fn capacity_outputs_agree_from_different_starts() {
        let ch = families::bsc_with_off(0.2).unwrap();
        let a = blahut_arimoto(&ch, 1e-14, 1_000_000).unwrap();
        let init = Distribution::new(vec![0.7, 0.2, 0.1]).unwrap();
        let b = blahut_arimoto_from(&ch, &init, 1e-14, 1_000_000).unwrap();
        assert!(a.output_dist.max_abs_diff(&b.output_dist) < 1e-7);
    }

    #[test]
    fn condition_on_bsc() {
        let ch = families::bsc(0.1).unwrap();
        let cap = blahut_arimoto(&ch, 1e-13, 10_000).unwrap();
        let check = check_condition_all_inputs(&ch, &cap).unwrap();
        assert!(check.holds);
        let w = check.witness.unwrap();
        assert!(w.max_abs_diff(&Distribution::uniform(2)) < 1e-6);
    }

    #[test]
    fn condition_fails_with_unused_off_symbol() {
        let ch = families::bsc_with_off(0.1).unwrap();
        let cap = blahut_arimoto(&ch, 1e-13, 1_000_000).unwrap();
        // D(W(.|0) || Q*) = 0 < C
        assert!((cap.kkt_slacks[1] - cap.capacity_nats).abs() < 1e-9);
        let check = check_condition_all_inputs(&ch, &cap).unwrap();
        assert!(!check.holds);
        assert!(check.witness.is_none());
    }

    #[test]
    fn condition_on_ternary_cyclic() {
        let ch = families::ternary_cyclic();
        let cap = blahut_arimoto(&ch, 1e-13, 10_000).unwrap();
        assert!((cap.capacity_nats - 0.388305).abs() < 1e-6);
        assert!(check_condition_all_inputs(&ch, &cap).unwrap().holds);
    }

    #[test]
    fn redundant_capacity_fig1() {
        for &p in &[0.05, 0.1, 0.25] {
            let ch = families::bsc_with_off(p).unwrap();
            let res = constrained_capacity_redundant(&ch).unwrap();
            assert!((res.capacity_nats - (std::f64::consts::LN_2 - h_b(p))).abs() < 1e-9);
            let want = Distribution::new(vec![0.5, 0.0, 0.5]).unwrap();
            assert!(res.input_dist.max_abs_diff(&want) < 1e-9);
            assert!(res.constraint_violation <= 1e-7);
        }
    }

    #[test]
    fn redundant_capacity_rejects_case2() {
        let err = constrained_capacity_redundant(&families::bsc(0.1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotRedundant));
    }

    #[test]
    fn pure_noise_fig1_channel_is_rejected() {
        // every row equals the off row at p = 1/2
        assert!(matches!(
            families::bsc_with_off(0.5),
            Err(Error::DuplicateRows(..))
        ));
    }
}
