//! Square-root-law analysis of a reduced channel: case classification, the
//! scaling constant `L`, its variance upper bound and tightness certificate,
//! the geodesic between `Q0` and `Q*`, the finite-`n` constrained capacity,
//! and budget-calibrated covert input laws.

use serde::Serialize;

use crate::capacity::{check_condition_all_inputs, CapacityResult};
use crate::channel::{Channel, Distribution, ReducedChannel};
use crate::infodiv::{
    chi2_half, kl_mixture, kl_slices, llr_variance, mutual_information_with_output,
};
use crate::opt::{minimize_on_simplex, nnls, SimplexQp};
use crate::{Error, Nats, Result};

/// Squared hull distance at or below which `Q0` counts as a mixture of the
/// other rows.
pub const REDUNDANCY_THRESHOLD: f64 = 1e-14;

/// L-infinity residual at or below which the tangent system counts as solved.
pub const CERTIFICATE_THRESHOLD: f64 = 1e-7;

const QP_MAX_ITER: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    /// `Q0` is a mixture of the other rows; a positive covert rate exists.
    RedundantOff,
    /// `Q0` lies outside the hull; the square-root law applies.
    NonRedundantOff,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseLabel {
    pub case_kind: CaseKind,
    /// Law over all inputs, zero at the off symbol, whose output is `Q0`.
    pub mixture_witness: Option<Distribution>,
    /// Euclidean distance from `Q0` to the hull of the non-off rows.
    pub residual: f64,
}

/// Weighted least-squares distance from `target` to the hull of `rows`.
fn hull_fit(rows: &[Vec<f64>], target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let weights = vec![1.0; target.len()];
    let sol = minimize_on_simplex(
        SimplexQp {
            atoms: rows,
            target,
            weights: &weights,
        },
        REDUNDANCY_THRESHOLD,
        QP_MAX_ITER,
    )?;
    Ok((sol.beta, sol.value))
}

pub fn classify(ch: &ReducedChannel) -> Result<CaseLabel> {
    let inputs: Vec<usize> = ch.non_off_inputs().collect();
    let rows: Vec<Vec<f64>> = inputs.iter().map(|&x| ch.row(x).probs().to_vec()).collect();
    let (beta, value) = hull_fit(&rows, ch.off_output().probs())?;
    let residual = (2.0 * value).sqrt();
    if value <= REDUNDANCY_THRESHOLD {
        let mut p = vec![0.0; ch.num_inputs()];
        for (b, &x) in beta.iter().zip(&inputs) {
            p[x] = *b;
        }
        Ok(CaseLabel {
            case_kind: CaseKind::RedundantOff,
            mixture_witness: Some(Distribution::from_weights(p)?),
            residual,
        })
    } else {
        Ok(CaseLabel {
            case_kind: CaseKind::NonRedundantOff,
            mixture_witness: None,
            residual,
        })
    }
}

/// Euclidean distance from `q` to the convex hull of all rows of `ch`.
pub fn hull_distance(ch: &Channel, q: &Distribution) -> Result<f64> {
    if q.len() != ch.num_outputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_outputs(),
            got: q.len(),
        });
    }
    let rows: Vec<Vec<f64>> = ch.rows().iter().map(|r| r.probs().to_vec()).collect();
    let (_, value) = hull_fit(&rows, q.probs())?;
    Ok((2.0 * value).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct LResult {
    /// Scaling constant, in square-root nats.
    #[serde(rename = "L")]
    pub l: f64,
    /// Maximizing law over all inputs, zero at the off symbol.
    pub maximizer: Distribution,
    /// `Q~`, the output law of `maximizer`.
    pub induced_output: Distribution,
    /// Certified bound on how far `l` may lie below the true maximum.
    pub solver_gap: f64,
    pub oracle_checked: bool,
}

/// `sum_x P(x) D(W(.|x) || Q0) / sqrt(chi2_half(P W, Q0))` for a law over
/// all inputs with no mass on the off symbol. Invariant under scaling of `p`.
pub fn l_ratio(ch: &Channel, p: &[f64]) -> Result<f64> {
    if p.len() != ch.num_inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_inputs(),
            got: p.len(),
        });
    }
    let q0 = ch.off_output().probs();
    let num: f64 = p
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| w * kl_slices(ch.row(x).probs(), q0))
        .sum();
    // sum_x p(x) (W(.|x) - Q0), homogeneous in p
    let mass: f64 = p.iter().sum();
    let qt = ch.push_forward(p);
    let den: f64 = 0.5
        * qt.iter()
            .zip(q0)
            .map(|(a, b)| (a - mass * b).powi(2) / b)
            .sum::<f64>();
    Ok(num / den.sqrt())
}

/// Maximizes the `L` ratio over laws on the non-off inputs.
///
/// The ratio is invariant under scaling, so the problem is solved as
/// `minimize chi2_half(sum_x a_x W(.|x), Q0)` subject to
/// `sum_x a_x D(W(.|x) || Q0) = 1`, `a >= 0`, then `L = 1 / sqrt(min)`.
pub fn solve_l(ch: &ReducedChannel) -> Result<LResult> {
    let q0 = ch.off_output();
    let inputs: Vec<usize> = ch.non_off_inputs().collect();
    let divs: Vec<f64> = inputs
        .iter()
        .map(|&x| kl_slices(ch.row(x).probs(), q0.probs()))
        .collect();

    let weights_for = |beta: &[f64]| {
        let mut p = vec![0.0; ch.num_inputs()];
        for ((&b, &d), &x) in beta.iter().zip(&divs).zip(&inputs) {
            p[x] = b / d;
        }
        p
    };

    let (p, solver_gap) = if inputs.len() == 1 {
        (weights_for(&[1.0]), 0.0)
    } else {
        let atoms: Vec<Vec<f64>> = inputs
            .iter()
            .zip(&divs)
            .map(|(&x, &d)| {
                ch.row(x)
                    .iter()
                    .zip(q0.iter())
                    .map(|(w, q)| (w - q) / d)
                    .collect()
            })
            .collect();
        let weights: Vec<f64> = q0.iter().map(|q| 1.0 / q).collect();
        let target = vec![0.0; q0.len()];
        let sol = minimize_on_simplex(
            SimplexQp {
                atoms: &atoms,
                target: &target,
                weights: &weights,
            },
            1e-13,
            QP_MAX_ITER,
        )?;
        if sol.value <= REDUNDANCY_THRESHOLD {
            return Err(Error::RedundantOff);
        }
        let floor = (sol.value - sol.gap).max(REDUNDANCY_THRESHOLD);
        (
            weights_for(&sol.beta),
            1.0 / floor.sqrt() - 1.0 / sol.value.sqrt(),
        )
    };

    let maximizer = Distribution::from_weights(p)?;
    let l = l_ratio(ch, maximizer.probs())?;
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::RedundantOff);
    }
    let induced_output = ch.output_marginal(&maximizer)?;

    let oracle_checked = if (2..=4).contains(&inputs.len()) {
        let best = grid_maximum(ch, &inputs)?;
        if best > l * (1.0 + 1e-9) + solver_gap {
            return Err(Error::NotConverged {
                solver: "L ratio",
                iterations: QP_MAX_ITER,
                gap: best - l,
            });
        }
        true
    } else {
        inputs.len() == 1
    };

    Ok(LResult {
        l,
        maximizer,
        induced_output,
        solver_gap,
        oracle_checked,
    })
}

/// Best ratio over a regular grid on the non-off simplex.
fn grid_maximum(ch: &Channel, inputs: &[usize]) -> Result<f64> {
    let steps = match inputs.len() {
        2 => 1000,
        3 => 400,
        _ => 80,
    };
    let mut best = f64::NEG_INFINITY;
    let mut counts = vec![0usize; inputs.len()];
    let mut p = vec![0.0; ch.num_inputs()];
    loop {
        let used: usize = counts[..inputs.len() - 1].iter().sum();
        if used <= steps {
            counts[inputs.len() - 1] = steps - used;
            for (&c, &x) in counts.iter().zip(inputs) {
                p[x] = c as f64 / steps as f64;
            }
            let r = l_ratio(ch, &p)?;
            if r.is_finite() {
                best = best.max(r);
            }
        }
        // odometer over the first k - 1 coordinates
        let mut i = 0;
        loop {
            if i == inputs.len() - 1 {
                return Ok(best);
            }
            counts[i] += 1;
            if counts[..inputs.len() - 1].iter().sum::<usize>() <= steps {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VarianceBound {
    /// `sqrt(2 var_{Q0} ln(Q0 / Q*))`, in square-root nats.
    pub value: f64,
    /// Whether the all-inputs capacity condition holds, under which `value`
    /// is a proven upper bound on `L`.
    pub valid: bool,
}

pub fn variance_bound(ch: &ReducedChannel, cap: &CapacityResult) -> Result<VarianceBound> {
    let v = llr_variance(ch.off_output(), &cap.output_dist)?;
    Ok(VarianceBound {
        value: (2.0 * v).sqrt(),
        valid: check_condition_all_inputs(ch, cap)?.holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentCertificate {
    /// `Q0(y) (ln(Q*(y) / Q0(y)) + C)`.
    pub s: Vec<f64>,
    /// Nonnegative weights on the non-off inputs, present when `tight`.
    pub alpha: Option<Vec<f64>>,
    /// L-infinity norm of `sum_x alpha_x (W(.|x) - Q0) - s`.
    pub residual: f64,
    pub tight: bool,
}

/// Tests whether the geodesic tangent `s` at `Q0` lies in the cone spanned
/// by `W(.|x) - Q0`, which makes the variance bound equal to `L`.
pub fn tangent_certificate(
    ch: &ReducedChannel,
    cap: &CapacityResult,
) -> Result<TangentCertificate> {
    let q0 = ch.off_output();
    let qs = &cap.output_dist;
    if qs.len() != q0.len() {
        return Err(Error::DimensionMismatch {
            expected: q0.len(),
            got: qs.len(),
        });
    }
    if qs.iter().any(|&v| v <= 0.0) {
        return Err(Error::ZeroMass("capacity-achieving output law"));
    }
    let s: Vec<f64> = q0
        .iter()
        .zip(qs.iter())
        .map(|(a, b)| a * ((b / a).ln() + cap.capacity_nats))
        .collect();
    let columns: Vec<Vec<f64>> = ch
        .non_off_inputs()
        .map(|x| {
            ch.row(x)
                .iter()
                .zip(q0.iter())
                .map(|(w, q)| w - q)
                .collect()
        })
        .collect();
    let sol = nnls(&columns, &s)?;
    // residual in the original scaling
    let mut fit = vec![0.0; s.len()];
    for (col, a) in columns.iter().zip(&sol.x) {
        for (f, c) in fit.iter_mut().zip(col) {
            *f += a * c;
        }
    }
    let residual = fit
        .iter()
        .zip(&s)
        .map(|(f, t)| (f - t).abs())
        .fold(0.0, f64::max);
    let tight = residual <= CERTIFICATE_THRESHOLD;
    Ok(TangentCertificate {
        s,
        alpha: tight.then_some(sol.x),
        residual,
        tight,
    })
}

/// `Q_lambda` proportional to `q0^(1 - lambda) qstar^lambda`.
pub fn geodesic_point(
    q0: &Distribution,
    qstar: &Distribution,
    lambda: f64,
) -> Result<Distribution> {
    if q0.len() != qstar.len() {
        return Err(Error::DimensionMismatch {
            expected: q0.len(),
            got: qstar.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} outside [0, 1]"
        )));
    }
    if q0.iter().any(|&v| v <= 0.0) {
        return Err(Error::ZeroMass("q0"));
    }
    if qstar.iter().any(|&v| v <= 0.0) {
        return Err(Error::ZeroMass("qstar"));
    }
    if lambda == 0.0 {
        return Ok(q0.clone());
    }
    if lambda == 1.0 {
        return Ok(qstar.clone());
    }
    let logs: Vec<f64> = q0
        .iter()
        .zip(qstar.iter())
        .map(|(a, b)| (1.0 - lambda) * a.ln() + lambda * b.ln())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Distribution::from_weights(logs.iter().map(|l| (l - top).exp()).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstrainedOptimum {
    pub value: Nats,
    pub input: Distribution,
    /// `D(P W || Q0)` at `input`.
    pub kl: Nats,
    /// Lagrangian duality gap certifying `value`.
    pub gap: Nats,
    /// Multiplier of the divergence constraint at the returned point.
    pub multiplier: f64,
}

const FINITE_N_TOLERANCE: f64 = 1e-10;

/// Maximizes `I(P, W)` subject to `D(P W || Q0) <= eps`.
///
/// Uses the identity `D(P W || Q0) = sum_x P(x) D(W(.|x) || Q0) - I(P, W)`:
/// the Lagrangian `I - nu (D - eps)` is, up to scale, a capacity-cost problem
/// with cost `D(W(.|x) || Q0)` and price `sigma = nu / (1 + nu)`, solved by
/// Blahut-Arimoto. `sigma` is bisected until the divergence meets `eps`, and
/// the dual bound `(1 + nu) U(sigma) + nu eps` certifies the answer.
pub fn finite_n_constrained_capacity(ch: &ReducedChannel, eps: Nats) -> Result<ConstrainedOptimum> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!("budget {eps} is negative")));
    }
    let q0 = ch.off_output().probs();
    let costs: Vec<f64> = ch.rows().iter().map(|r| kl_slices(r.probs(), q0)).collect();

    if eps == 0.0 {
        return Ok(match classify(ch)?.case_kind {
            CaseKind::NonRedundantOff => ConstrainedOptimum {
                value: 0.0,
                input: Distribution::point_mass(ch.num_inputs(), ch.off_index()),
                kl: 0.0,
                gap: 0.0,
                multiplier: f64::INFINITY,
            },
            CaseKind::RedundantOff => {
                let res = crate::capacity::constrained_capacity_redundant(ch)?;
                ConstrainedOptimum {
                    value: res.capacity_nats,
                    kl: kl_slices(res.output_dist.probs(), q0),
                    input: res.input_dist,
                    gap: 0.0,
                    multiplier: f64::INFINITY,
                }
            }
        });
    }

    let mut solver = CostBa::new(ch, &costs);
    let free = solver.solve(0.0)?;
    if free.kl <= eps {
        return Ok(ConstrainedOptimum {
            value: free.info,
            input: Distribution::from_weights(free.p)?,
            kl: free.kl,
            gap: free.upper - free.info,
            multiplier: 0.0,
        });
    }

    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best_primal: Option<(f64, Vec<f64>, f64, f64)> = None;
    let mut best_dual = f64::INFINITY;
    for _ in 0..200 {
        let sigma = 0.5 * (lo + hi);
        let nu = sigma / (1.0 - sigma);
        let it = solver.solve(sigma)?;
        best_dual = best_dual.min((1.0 + nu) * it.upper + nu * eps);
        if it.kl <= eps {
            hi = sigma;
            if best_primal.as_ref().is_none_or(|b| it.info > b.0) {
                best_primal = Some((it.info, it.p.clone(), it.kl, nu));
            }
        } else {
            lo = sigma;
        }
        if let Some((value, ..)) = &best_primal {
            if best_dual - value <= FINITE_N_TOLERANCE {
                break;
            }
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    let (value, p, kl, multiplier) = best_primal.ok_or(Error::NotConverged {
        solver: "constrained capacity",
        iterations: 200,
        gap: f64::INFINITY,
    })?;
    let gap = (best_dual - value).max(0.0);
    if gap > FINITE_N_TOLERANCE {
        return Err(Error::NotConverged {
            solver: "constrained capacity",
            iterations: 200,
            gap,
        });
    }
    Ok(ConstrainedOptimum {
        value,
        input: Distribution::from_weights(p)?,
        kl,
        gap,
        multiplier,
    })
}

struct CostBaIterate {
    p: Vec<f64>,
    info: f64,
    kl: f64,
    /// `max_x D(W(.|x) || Q) - sigma c_x`, an upper bound on the
    /// capacity-cost objective.
    upper: f64,
}

/// Blahut-Arimoto for `max_P I(P, W) - sigma sum_x P(x) c_x`, warm-started
/// across calls.
struct CostBa<'a> {
    ch: &'a Channel,
    costs: &'a [f64],
    p: Vec<f64>,
}

impl<'a> CostBa<'a> {
    fn new(ch: &'a Channel, costs: &'a [f64]) -> Self {
        CostBa {
            ch,
            costs,
            p: Distribution::uniform(ch.num_inputs()).into_vec(),
        }
    }

    fn solve(&mut self, sigma: f64) -> Result<CostBaIterate> {
        let k = self.p.len();
        let mut p: Vec<f64> = self
            .p
            .iter()
            .map(|v| 0.999 * v + 0.001 / k as f64)
            .collect();
        // scale the inner tolerance with the dual amplification 1 + nu
        let tol = (1e-3 * FINITE_N_TOLERANCE * (1.0 - sigma)).max(1e-16);
        let max_iter = 2_000_000;
        let q0 = self.ch.off_output().probs();
        for _ in 0..max_iter {
            let q = self.ch.push_forward(&p);
            let d: Vec<f64> = self
                .ch
                .rows()
                .iter()
                .map(|w| kl_slices(w.probs(), &q))
                .collect();
            let score: Vec<f64> = d
                .iter()
                .zip(self.costs)
                .map(|(a, c)| a - sigma * c)
                .collect();
            let lower: f64 = p.iter().zip(&score).map(|(a, b)| a * b).sum();
            let upper = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if upper - lower <= tol {
                self.p = p.clone();
                let info = mutual_information_with_output(&p, self.ch, &q);
                return Ok(CostBaIterate {
                    kl: kl_slices(&q, q0),
                    info,
                    p,
                    upper,
                });
            }
            for (px, sx) in p.iter_mut().zip(&score) {
                *px *= (sx - upper).exp();
            }
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= total);
        }
        Err(Error::NotConverged {
            solver: "capacity-cost Blahut-Arimoto",
            iterations: max_iter,
            gap: f64::NAN,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CovertInputSpec {
    pub n: u64,
    pub delta: Nats,
    /// Weight of `P~` in the mixture with the off point mass.
    pub mu: f64,
    /// `(1 - mu) delta_0 + mu P~`.
    pub p_n: Distribution,
    /// `(1 - mu) Q0 + mu Q~`.
    pub q_n: Distribution,
    pub exact_per_letter_kl: Nats,
    /// `mu = 1` still spends less than `delta`.
    pub saturated: bool,
}

/// Mixes the off symbol with `lres.maximizer`, choosing the weight so that
/// `n D(Q_mu || Q0)` equals `delta` without exceeding it.
pub fn build_covert_input(
    ch: &ReducedChannel,
    lres: &LResult,
    n: u64,
    delta: Nats,
) -> Result<CovertInputSpec> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "blocklength must be positive".into(),
        ));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "budget {delta} must be finite and nonnegative"
        )));
    }
    let q0 = ch.off_output();
    let qt = &lres.induced_output;
    let nf = n as f64;
    let spend = |mu: f64| kl_mixture(q0, qt, mu).map(|d| nf * d);

    let (mu, saturated) = if delta == 0.0 {
        (0.0, false)
    } else if spend(1.0)? <= delta {
        (1.0, true)
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if spend(mid)? <= delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, false)
    };

    let off = ch.off_index();
    let mut p: Vec<f64> = lres.maximizer.iter().map(|v| mu * v).collect();
    p[off] = 1.0 - mu;
    let q: Vec<f64> = q0
        .iter()
        .zip(qt.iter())
        .map(|(a, b)| (1.0 - mu) * a + mu * b)
        .collect();
    Ok(CovertInputSpec {
        n,
        delta,
        mu,
        p_n: Distribution::from_weights(p)?,
        q_n: Distribution::from_weights(q)?,
        exact_per_letter_kl: kl_mixture(q0, qt, mu)?,
        saturated,
    })
}

/// Asymptotic mixture weight `sqrt(delta / (n chi2_half(Q~, Q0)))`.
pub fn asymptotic_mu(ch: &Channel, lres: &LResult, n: u64, delta: Nats) -> Result<f64> {
    let g = chi2_half(&lres.induced_output, ch.off_output())?;
    Ok((delta / (n as f64 * g)).sqrt())
}
