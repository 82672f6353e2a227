//! Monte Carlo experiments for covert communication at finite blocklength.
//!
//! A random codebook draws every codeword IID from the covert input law.
//! The decoder declares the unique message whose information density
//! exceeds a threshold. Each trial draws a transmitted codeword and the
//! channel output, then averages exactly over the other codewords: they are
//! independent of the output, so given the output each one exceeds the
//! threshold with the same probability `pi`, and the conditional error
//! probability is `1 - (1 - pi)^(M - 1)` when the true codeword clears the
//! threshold. `pi` is computed exactly for binary covert inputs on binary
//! outputs and by exponentially tilted importance sampling otherwise; small
//! codebooks are sampled codeword by codeword.
//!
//! Trials are seeded with `ChaCha8(master_seed)` on stream `trial_index`
//! and reduced in index order, so reports are bit-identical for any thread
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, ChiSquared, Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::awgn::{AwgnChannel, AwgnCodebookSpec};
use crate::channel::{Channel, ReducedChannel};
use crate::infodiv::{kl_slices, mutual_information_with_output};
use crate::lpd::{build_covert_input, CovertInputSpec, LResult};
use crate::{Error, Nats, Result};

/// Codebooks with at most this many competing codewords are sampled
/// explicitly.
pub const EXPLICIT_LIMIT: f64 = 4096.0;

/// How the decoder's threshold on the normalized information density
/// `(1 / sqrt(n)) sum_i ln(W(y_i | x_i) / Q_n(y_i))` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ThresholdRule {
    /// `ln|M| / sqrt(n) + offset`, with `offset` in square-root nats.
    MessageSet { offset: f64 },
    /// `m (1 - offset)`, where `m` is `sqrt(n) I(P_n, W)` on a DMC and
    /// `sqrt(delta)` on the AWGN channel.
    FractionOfMean { offset: f64 },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::MessageSet { offset: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimConfig {
    pub n: u64,
    pub delta: Nats,
    /// `ln |M|`; stored as a logarithm because useful codebooks hold far
    /// more than `2^64` messages.
    pub log_message_count: Nats,
    pub trials: usize,
    pub master_seed: u64,
    pub threshold: ThresholdRule,
    /// Importance samples per trial when `pi` is estimated.
    pub is_samples: usize,
}

impl SimConfig {
    pub fn new(
        n: u64,
        delta: Nats,
        log_message_count: Nats,
        trials: usize,
        master_seed: u64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            n,
            delta,
            log_message_count,
            trials,
            master_seed,
            threshold: ThresholdRule::default(),
            is_samples: 256,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_message_count(
        n: u64,
        delta: Nats,
        message_count: u64,
        trials: usize,
        master_seed: u64,
    ) -> Result<Self> {
        SimConfig::new(n, delta, (message_count as f64).ln(), trials, master_seed)
    }

    pub fn with_threshold(mut self, threshold: ThresholdRule) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument(
                "blocklength must be positive".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument(
                "at least one trial is required".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "budget {} must be positive",
                self.delta
            )));
        }
        if !(self.log_message_count >= 2f64.ln() - 1e-12 && self.log_message_count.is_finite()) {
            return Err(Error::InvalidArgument(
                "at least two messages are required".into(),
            ));
        }
        if self.is_samples == 0 {
            return Err(Error::InvalidArgument(
                "importance sample count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `ln(M - 1)`.
    fn log_competitors(&self) -> f64 {
        self.log_message_count + (-(-self.log_message_count).exp()).ln_1p()
    }

    fn explicit_competitors(&self) -> Option<u64> {
        let m = self.log_message_count.exp().round();
        (m - 1.0 <= EXPLICIT_LIMIT).then_some(m as u64 - 1)
    }
}

/// How competing codewords were handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CompetitorMethod {
    Explicit,
    Exact,
    ImportanceSampling,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub n: u64,
    pub log_message_count: Nats,
    pub trials: usize,
    pub error_rate: f64,
    /// Half-width of the 95% confidence interval.
    pub error_rate_ci95: f64,
    /// `n D(Q_n || Q0)`, computed exactly.
    pub kl_spent: Nats,
    /// Exact total variation between the output product laws, binary
    /// outputs only.
    pub tv_exact: Option<f64>,
    /// `ln|M| / sqrt(n delta)`, in square-root nats.
    pub normalized_rate: f64,
    /// Decoder threshold on the normalized information density.
    pub threshold: f64,
    /// Sample mean and variance of the transmitted codeword's normalized
    /// information density.
    pub density_mean: f64,
    pub density_var: f64,
    pub method: CompetitorMethod,
}

struct Trial {
    error: f64,
    density: f64,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `1 - (1 - pi)^k` with `k = exp(log_k)` and `pi = exp(log_pi)`.
fn competitor_error(log_k: f64, log_pi: f64) -> f64 {
    if log_pi == f64::NEG_INFINITY {
        return 0.0;
    }
    let log1m_pi = if log_pi < -std::f64::consts::LN_2 {
        (-log_pi.exp()).ln_1p()
    } else {
        (-log_pi.exp_m1()).ln()
    };
    if log1m_pi == 0.0 {
        return 0.0;
    }
    if log1m_pi == f64::NEG_INFINITY {
        return 1.0;
    }
    let z = -(log_k + (-log1m_pi).ln()).exp();
    -z.exp_m1()
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("valid binomial parameters")
        .sample(rng)
}

/// Multinomial counts by sequential conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64], out: &mut [u64]) {
    let mut remaining = n;
    let mut mass = 1.0;
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    out.iter_mut().for_each(|o| *o = 0);
    for (i, (&p, o)) in probs.iter().zip(out.iter_mut()).enumerate() {
        if i == last {
            *o = remaining;
            break;
        }
        let k = if mass > 0.0 {
            binomial(rng, remaining, (p / mass).min(1.0))
        } else {
            0
        };
        *o = k;
        remaining -= k;
        mass -= p;
    }
}

fn summarize(outcomes: &[Trial]) -> (f64, f64, f64, f64) {
    let t = outcomes.len() as f64;
    let sum: f64 = outcomes.iter().map(|o| o.error).sum();
    let rate = sum / t;
    let var = if outcomes.len() > 1 {
        outcomes
            .iter()
            .map(|o| (o.error - rate).powi(2))
            .sum::<f64>()
            / (t - 1.0)
    } else {
        0.0
    };
    const Z: f64 = 1.959_963_984_540_054;
    let ci = if sum < 10.0 {
        // Wilson score interval around the same point estimate
        let z2 = Z * Z;
        let denom = 1.0 + z2 / t;
        Z / denom * (rate * (1.0 - rate) / t + z2 / (4.0 * t * t)).sqrt()
    } else {
        Z * (var / t).sqrt()
    };
    let dmean = outcomes.iter().map(|o| o.density).sum::<f64>() / t;
    let dvar = if outcomes.len() > 1 {
        outcomes
            .iter()
            .map(|o| (o.density - dmean).powi(2))
            .sum::<f64>()
            / (t - 1.0)
    } else {
        0.0
    };
    (rate, ci, dmean, dvar)
}

/// Precomputed per-letter quantities for a DMC run.
struct DmcModel {
    /// Inputs with positive mass under `p_n`.
    support: Vec<usize>,
    /// `p_n` restricted to `support`.
    p: Vec<f64>,
    /// `ln W(y | x) - ln Q_n(y)` for `x` in `support`, row-major.
    llr: Vec<Vec<f64>>,
    /// Joint law of `(x, y)` over `support x outputs`, flattened.
    joint: Vec<f64>,
    outputs: usize,
    ln_table: Vec<f64>,
}

impl DmcModel {
    fn new(ch: &Channel, spec: &CovertInputSpec) -> Self {
        let support = spec.p_n.support(0.0);
        let q = spec.q_n.probs();
        let p: Vec<f64> = support.iter().map(|&x| spec.p_n[x]).collect();
        let llr = support
            .iter()
            .map(|&x| {
                ch.row(x)
                    .iter()
                    .zip(q)
                    .map(|(&w, &qy)| {
                        if w > 0.0 {
                            w.ln() - qy.ln()
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect()
            })
            .collect();
        let joint = support
            .iter()
            .zip(&p)
            .flat_map(|(&x, &px)| ch.row(x).iter().map(move |w| px * w))
            .collect();
        let ln_table = (0..=spec.n).map(|k| (k as f64).ln()).collect();
        DmcModel {
            support,
            p,
            llr,
            joint,
            outputs: ch.num_outputs(),
            ln_table,
        }
    }

    fn exact_applies(&self) -> bool {
        self.support.len() == 2
            && self.outputs == 2
            && self.llr.iter().flatten().all(|v| v.is_finite())
    }

    /// Log of `sum_{k=0}^{n} pmf` entries of `Binomial(n, r)`.
    fn binomial_log_pmf(&self, n: u64, r: f64) -> Vec<f64> {
        let (lr, l1r) = (r.ln(), (-r).ln_1p());
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut log_choose = 0.0;
        for k in 0..=n {
            out.push(log_choose + k as f64 * lr + (n - k) as f64 * l1r);
            if k < n {
                log_choose += self.ln_table[(n - k) as usize] - self.ln_table[(k + 1) as usize];
            }
        }
        out
    }

    /// `ln P(T > t)` for a competing codeword, binary support on binary
    /// outputs, by summing over the two binomial counts.
    fn exact_log_pi(&self, counts: &[u64], t: f64) -> f64 {
        let r = self.p[1];
        let (l0, l1) = (&self.llr[0], &self.llr[1]);
        let base = counts[0] as f64 * l0[0] + counts[1] as f64 * l0[1];
        let d0 = l1[0] - l0[0];
        let d1 = l1[1] - l0[1];
        let rhs = t - base;
        let pmf0 = self.binomial_log_pmf(counts[0], r);
        let pmf1 = self.binomial_log_pmf(counts[1], r);
        let n1 = counts[1] as usize;
        // suffix[j] = ln P(K1 >= j), prefix[j] = ln P(K1 <= j)
        let mut suffix = vec![f64::NEG_INFINITY; n1 + 2];
        for j in (0..=n1).rev() {
            suffix[j] = log_add_exp(suffix[j + 1], pmf1[j]);
        }
        let mut prefix = vec![f64::NEG_INFINITY; n1 + 1];
        let mut acc = f64::NEG_INFINITY;
        for j in 0..=n1 {
            acc = log_add_exp(acc, pmf1[j]);
            prefix[j] = acc;
        }
        let mut total = f64::NEG_INFINITY;
        for (k0, lp0) in pmf0.iter().enumerate() {
            // need K1 d1 > v
            let v = rhs - k0 as f64 * d0;
            let tail = if d1 > 0.0 {
                let j = (v / d1).floor() + 1.0;
                if j <= 0.0 {
                    0.0
                } else if j > n1 as f64 {
                    f64::NEG_INFINITY
                } else {
                    suffix[j as usize]
                }
            } else if d1 < 0.0 {
                let j = (v / d1).ceil() - 1.0;
                if j < 0.0 {
                    f64::NEG_INFINITY
                } else if j >= n1 as f64 {
                    0.0
                } else {
                    prefix[j as usize]
                }
            } else if v < 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            };
            total = log_add_exp(total, lp0 + tail);
        }
        total.min(0.0)
    }

    fn competitor_density(
        &self,
        rng: &mut ChaCha8Rng,
        counts: &[u64],
        probs: &[Vec<f64>],
        buf: &mut [u64],
    ) -> f64 {
        let mut total = 0.0;
        for (y, &ny) in counts.iter().enumerate() {
            if ny == 0 {
                continue;
            }
            multinomial(rng, ny, &probs[y], buf);
            for (i, &c) in buf.iter().enumerate() {
                if c > 0 {
                    total += c as f64 * self.llr[i][y];
                }
            }
        }
        total
    }

    /// Importance-sampling estimate of `ln P(T > t)` under the tilt
    /// `p_theta(x | y)` proportional to `p(x) exp(theta llr(x, y))`.
    fn tilted_log_pi(&self, rng: &mut ChaCha8Rng, counts: &[u64], t: f64, samples: usize) -> f64 {
        let ceiling: f64 = counts
            .iter()
            .enumerate()
            .map(|(y, &ny)| {
                let best = self
                    .llr
                    .iter()
                    .map(|l| l[y])
                    .fold(f64::NEG_INFINITY, f64::max);
                if ny == 0 {
                    0.0
                } else {
                    ny as f64 * best
                }
            })
            .sum();
        if t >= ceiling {
            return f64::NEG_INFINITY;
        }
        // log-MGF and its derivative at theta
        let cumulants = |theta: f64| -> (f64, f64) {
            let mut lam = 0.0;
            let mut slope = 0.0;
            for (y, &ny) in counts.iter().enumerate() {
                if ny == 0 {
                    continue;
                }
                let logs: Vec<f64> = self
                    .p
                    .iter()
                    .zip(&self.llr)
                    .map(|(p, l)| {
                        if l[y] == f64::NEG_INFINITY {
                            f64::NEG_INFINITY
                        } else {
                            p.ln() + theta * l[y]
                        }
                    })
                    .collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = logs.iter().map(|v| (v - top).exp()).sum();
                let m: f64 = logs
                    .iter()
                    .zip(&self.llr)
                    .filter(|(v, _)| v.is_finite())
                    .map(|(v, l)| (v - top).exp() * l[y])
                    .sum::<f64>()
                    / z;
                lam += ny as f64 * (top + z.ln());
                slope += ny as f64 * m;
            }
            (lam, slope)
        };
        let theta = if cumulants(0.0).1 >= t {
            0.0
        } else {
            let mut hi = 1.0;
            while cumulants(hi).1 < t && hi < 1e6 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if cumulants(mid).1 < t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        let (lam, _) = cumulants(theta);
        let probs: Vec<Vec<f64>> = (0..self.outputs)
            .map(|y| {
                let w: Vec<f64> = self
                    .p
                    .iter()
                    .zip(&self.llr)
                    .map(|(p, l)| {
                        if l[y] == f64::NEG_INFINITY {
                            f64::NEG_INFINITY
                        } else {
                            p.ln() + theta * l[y]
                        }
                    })
                    .collect();
                let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = w.iter().map(|v| (v - top).exp()).collect();
                let z: f64 = e.iter().sum();
                e.iter().map(|v| v / z).collect()
            })
            .collect();
        let mut buf = vec![0u64; self.p.len()];
        let mut acc = f64::NEG_INFINITY;
        for _ in 0..samples {
            let s = self.competitor_density(rng, counts, &probs, &mut buf);
            if s > t {
                acc = log_add_exp(acc, lam - theta * s);
            }
        }
        (acc - (samples as f64).ln()).min(0.0)
    }
}

fn threshold_for(rule: ThresholdRule, cfg: &SimConfig, mean: f64) -> f64 {
    match rule {
        ThresholdRule::MessageSet { offset } => {
            cfg.log_message_count / (cfg.n as f64).sqrt() + offset
        }
        ThresholdRule::FractionOfMean { offset } => mean * (1.0 - offset),
    }
}

/// Runs `cfg.trials` random-coding trials over a DMC with the covert input
/// `spec`.
pub fn run_dmc_trial(
    ch: &ReducedChannel,
    cfg: &SimConfig,
    spec: &CovertInputSpec,
) -> Result<SimReport> {
    cfg.validate()?;
    if spec.n != cfg.n || spec.delta != cfg.delta {
        return Err(Error::InvalidArgument(
            "covert input was built for a different (n, delta)".into(),
        ));
    }
    if spec.p_n.len() != ch.num_inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_inputs(),
            got: spec.p_n.len(),
        });
    }
    let model = DmcModel::new(ch, spec);
    let sqrt_n = (cfg.n as f64).sqrt();
    let info = mutual_information_with_output(spec.p_n.probs(), ch, spec.q_n.probs());
    let threshold = threshold_for(cfg.threshold, cfg, sqrt_n * info);
    let t = threshold * sqrt_n;
    let explicit = cfg.explicit_competitors();
    let method = if explicit.is_some() {
        CompetitorMethod::Explicit
    } else if model.exact_applies() {
        CompetitorMethod::Exact
    } else {
        CompetitorMethod::ImportanceSampling
    };
    let log_k = cfg.log_competitors();
    let untilted: Vec<Vec<f64>> = (0..model.outputs).map(|_| model.p.clone()).collect();

    let outcomes: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.master_seed, trial);
            let mut joint = vec![0u64; model.joint.len()];
            multinomial(&mut rng, cfg.n, &model.joint, &mut joint);
            let mut counts = vec![0u64; model.outputs];
            let mut density = 0.0;
            for (i, row) in model.llr.iter().enumerate() {
                for (y, l) in row.iter().enumerate() {
                    let c = joint[i * model.outputs + y];
                    if c > 0 {
                        counts[y] += c;
                        density += c as f64 * l;
                    }
                }
            }
            let error = if density <= t {
                1.0
            } else if model.support.len() == 1 {
                // every codeword is the same word
                1.0
            } else {
                match method {
                    CompetitorMethod::Explicit => {
                        let mut buf = vec![0u64; model.p.len()];
                        let k = explicit.unwrap_or(0);
                        let hit = (0..k).any(|_| {
                            model.competitor_density(&mut rng, &counts, &untilted, &mut buf) > t
                        });
                        if hit {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    CompetitorMethod::Exact => {
                        competitor_error(log_k, model.exact_log_pi(&counts, t))
                    }
                    CompetitorMethod::ImportanceSampling => competitor_error(
                        log_k,
                        model.tilted_log_pi(&mut rng, &counts, t, cfg.is_samples),
                    ),
                }
            };
            Trial {
                error,
                density: density / sqrt_n,
            }
        })
        .collect();

    let (error_rate, error_rate_ci95, density_mean, density_var) = summarize(&outcomes);
    let metrics = exact_detection_metrics(ch, spec)?;
    Ok(SimReport {
        n: cfg.n,
        log_message_count: cfg.log_message_count,
        trials: cfg.trials,
        error_rate,
        error_rate_ci95,
        kl_spent: metrics.kl,
        tv_exact: metrics.tv,
        normalized_rate: cfg.log_message_count / (cfg.n as f64 * cfg.delta).sqrt(),
        threshold,
        density_mean,
        density_var,
        method,
    })
}

/// Runs random-coding trials over the AWGN channel with the Gaussian
/// codebook `spec`.
pub fn run_awgn_trial(
    awgn: &AwgnChannel,
    cfg: &SimConfig,
    spec: &AwgnCodebookSpec,
) -> Result<SimReport> {
    cfg.validate()?;
    if spec.n != cfg.n || spec.delta != cfg.delta || spec.sigma2 != awgn.sigma2() {
        return Err(Error::InvalidArgument(
            "codebook was built for a different (n, delta, sigma2)".into(),
        ));
    }
    let n = cfg.n as f64;
    let sqrt_n = n.sqrt();
    let (rho, s2) = (spec.rho_n, spec.sigma2);
    let threshold = threshold_for(cfg.threshold, cfg, cfg.delta.sqrt());
    let t = threshold * sqrt_n;
    let half_log = 0.5 * n * (rho / s2).ln_1p();
    let explicit = cfg.explicit_competitors();
    let method = if explicit.is_some() {
        CompetitorMethod::Explicit
    } else {
        CompetitorMethod::ImportanceSampling
    };
    let log_k = cfg.log_competitors();
    let chi_n = ChiSquared::new(n).expect("positive degrees of freedom");
    let chi_rest =
        (cfg.n > 1).then(|| ChiSquared::new(n - 1.0).expect("positive degrees of freedom"));

    // S = sum (y_i - x'_i)^2 for a competitor, as v [(sqrt(lam) + N)^2 + chi2_{n-1}]
    let sample_s = |rng: &mut ChaCha8Rng, v: f64, lam: f64| {
        let g: f64 = rng.sample(StandardNormal);
        let rest = chi_rest.as_ref().map_or(0.0, |c| c.sample(rng));
        v * ((lam.sqrt() + g).powi(2) + rest)
    };

    let outcomes: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.master_seed, trial);
            // Bartlett factors of the 2 x 2 Wishart matrix of (x, z)
            let c1 = chi_n.sample(&mut rng).sqrt();
            let g: f64 = rng.sample(StandardNormal);
            let c2 = chi_rest.as_ref().map_or(0.0, |c| c.sample(&mut rng));
            let sxx = rho * c1 * c1;
            let sxz = (rho * s2).sqrt() * c1 * g;
            let szz = s2 * (g * g + c2);
            let syy = sxx + 2.0 * sxz + szz;
            let free = syy / (2.0 * (rho + s2)) + half_log;
            let density = free - szz / (2.0 * s2);

            let error = if density <= t {
                1.0
            } else {
                // competitor exceeds t iff S < r
                let r = 2.0 * s2 * (free - t);
                if r <= 0.0 {
                    0.0
                } else if let Some(k) = explicit {
                    let hit = (0..k).any(|_| sample_s(&mut rng, rho, syy / rho) < r);
                    if hit {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    // tilt by exp(-c S): u = 1 / (1 + 2 c rho) solves E S = r
                    let u = if n * rho + syy <= r {
                        1.0
                    } else {
                        2.0 * r / (n * rho + (n * n * rho * rho + 4.0 * syy * r).sqrt())
                    };
                    let c = (1.0 / u - 1.0) / (2.0 * rho);
                    let (v, lam) = (rho * u, syy * u / rho);
                    let mut acc = f64::NEG_INFINITY;
                    for _ in 0..cfg.is_samples {
                        let s = sample_s(&mut rng, v, lam);
                        if s < r {
                            acc = log_add_exp(acc, c * s + 0.5 * n * u.ln() - c * u * syy);
                        }
                    }
                    let log_pi = (acc - (cfg.is_samples as f64).ln()).min(0.0);
                    competitor_error(log_k, log_pi)
                }
            };
            Trial {
                error,
                density: density / sqrt_n,
            }
        })
        .collect();

    let (error_rate, error_rate_ci95, density_mean, density_var) = summarize(&outcomes);
    Ok(SimReport {
        n: cfg.n,
        log_message_count: cfg.log_message_count,
        trials: cfg.trials,
        error_rate,
        error_rate_ci95,
        kl_spent: n * spec.per_letter_kl,
        tv_exact: None,
        normalized_rate: cfg.log_message_count / (n * cfg.delta).sqrt(),
        threshold,
        density_mean,
        density_var,
        method,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectionMetrics {
    /// `n D(Q_n || Q0)`.
    pub kl: Nats,
    /// Total variation between `Q_n^n` and `Q0^n`, binary outputs only.
    pub tv: Option<f64>,
}

pub fn exact_detection_metrics(ch: &Channel, spec: &CovertInputSpec) -> Result<DetectionMetrics> {
    if spec.q_n.len() != ch.num_outputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_outputs(),
            got: spec.q_n.len(),
        });
    }
    let kl = spec.n as f64 * spec.exact_per_letter_kl;
    let tv = if ch.num_outputs() == 2 {
        Some(binomial_tv(spec.n, spec.q_n[1], ch.off_output()[1]))
    } else {
        None
    };
    debug_assert!(
        spec.mu == 0.0
            || (kl_slices(spec.q_n.probs(), ch.off_output().probs()) - spec.exact_per_letter_kl)
                .abs()
                < 1e-9
    );
    Ok(DetectionMetrics { kl, tv })
}

/// Total variation between `Binomial(n, q1)` and `Binomial(n, q0)`, which
/// equals that between the `n`-fold products of the two binary laws.
pub fn binomial_tv(n: u64, q1: f64, q0: f64) -> f64 {
    let log_terms = |q: f64| -> (f64, f64) {
        (
            if q > 0.0 { q.ln() } else { f64::NEG_INFINITY },
            if q < 1.0 {
                (-q).ln_1p()
            } else {
                f64::NEG_INFINITY
            },
        )
    };
    let (a1, b1) = log_terms(q1);
    let (a0, b0) = log_terms(q0);
    let term = |k: u64, log_choose: f64, a: f64, b: f64| {
        let x = if k == 0 { 0.0 } else { k as f64 * a };
        let y = if k == n { 0.0 } else { (n - k) as f64 * b };
        log_choose + x + y
    };
    let mut log_choose = 0.0;
    let mut sum = 0.0;
    for k in 0..=n {
        let l1 = term(k, log_choose, a1, b1);
        let l0 = term(k, log_choose, a0, b0);
        let (hi, lo) = if l1 >= l0 { (l1, l0) } else { (l0, l1) };
        if hi > f64::NEG_INFINITY {
            sum += hi.exp() * -(lo - hi).exp_m1();
        }
        if k < n {
            log_choose += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    (0.5 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub log_message_count: Nats,
    pub error_rate: f64,
    pub normalized_rate: f64,
    pub kl_spent: Nats,
}

/// For each `n`, bisects the largest `ln|M|` whose estimated error rate is at
/// most `target_error`, with the other settings taken from `template`.
pub fn sqrt_law_sweep(
    ch: &ReducedChannel,
    lres: &LResult,
    template: &SimConfig,
    n_values: &[u64],
    target_error: f64,
) -> Result<Vec<SweepRow>> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "blocklengths must be increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let spec = build_covert_input(ch, lres, n, template.delta)?;
        let run = |log_m: f64| -> Result<SimReport> {
            let cfg = SimConfig {
                n,
                log_message_count: log_m,
                ..template.clone()
            };
            run_dmc_trial(ch, &cfg, &spec)
        };
        let mut lo = 2f64.ln();
        let mut lo_report = run(lo)?;
        if lo_report.error_rate <= target_error {
            let mut hi = (2.0 * lres.l * (n as f64 * template.delta).sqrt()).max(2.0 * lo);
            while run(hi)?.error_rate <= target_error {
                lo = hi;
                hi *= 2.0;
            }
            lo_report = run(lo)?;
            for _ in 0..60 {
                if hi - lo <= 1e-4 * lo {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let report = run(mid)?;
                if report.error_rate <= target_error {
                    lo = mid;
                    lo_report = report;
                } else {
                    hi = mid;
                }
            }
        }
        rows.push(SweepRow {
            n,
            log_message_count: lo,
            error_rate: lo_report.error_rate,
            normalized_rate: lo_report.normalized_rate,
            kl_spent: lo_report.kl_spent,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{families, reduce};
    use crate::lpd::solve_l;

    #[test]
    fn tv_single_letter() {
        assert!((binomial_tv(1, 0.75, 0.5) - 0.25).abs() < 1e-15);
        assert_eq!(binomial_tv(50, 0.3, 0.3), 0.0);
        assert!((binomial_tv(3, 1.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_matches_direct_sum() {
        let (n, q1, q0) = (12u64, 0.4f64, 0.55f64);
        let mut direct = 0.0;
        for k in 0..=n {
            let c = (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64);
            let a = c * q1.powi(k as i32) * (1.0 - q1).powi((n - k) as i32);
            let b = c * q0.powi(k as i32) * (1.0 - q0).powi((n - k) as i32);
            direct += (a - b).abs();
        }
        assert!((binomial_tv(n, q1, q0) - 0.5 * direct).abs() < 1e-13);
    }

    #[test]
    fn competitor_error_limits() {
        assert_eq!(competitor_error(0.0, f64::NEG_INFINITY), 0.0);
        assert!((competitor_error(0.0, 0.5f64.ln()) - 0.5).abs() < 1e-15);
        // (M - 1) pi small: error close to (M - 1) pi
        let e = competitor_error(100.0, -130.0);
        assert!((e / (-30f64).exp() - 1.0).abs() < 1e-9);
        assert!((competitor_error(800.0, -700.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_pi_matches_enumeration() {
        let ch = reduce(&families::bsc(0.2).unwrap()).unwrap();
        let lres = solve_l(&ch).unwrap();
        let spec = build_covert_input(&ch, &lres, 12, 0.5).unwrap();
        let model = DmcModel::new(&ch, &spec);
        let counts = [7u64, 5];
        let t = 0.3;
        let r = model.p[1];
        let mut brute = 0.0;
        for k0 in 0..=7u64 {
            for k1 in 0..=5u64 {
                let s = (7 - k0) as f64 * model.llr[0][0]
                    + k0 as f64 * model.llr[1][0]
                    + (5 - k1) as f64 * model.llr[0][1]
                    + k1 as f64 * model.llr[1][1];
                if s > t {
                    let c0 = (1..=k0).fold(1.0, |a, i| a * (7 - k0 + i) as f64 / i as f64);
                    let c1 = (1..=k1).fold(1.0, |a, i| a * (5 - k1 + i) as f64 / i as f64);
                    brute += c0
                        * r.powi(k0 as i32)
                        * (1.0 - r).powi((7 - k0) as i32)
                        * c1
                        * r.powi(k1 as i32)
                        * (1.0 - r).powi((5 - k1) as i32);
                }
            }
        }
        let exact = model.exact_log_pi(&counts, t).exp();
        assert!((exact - brute).abs() < 1e-12, "{exact} vs {brute}");
    }

    #[test]
    fn tilted_pi_agrees_with_exact() {
        let ch = reduce(&families::bsc(0.11).unwrap()).unwrap();
        let lres = solve_l(&ch).unwrap();
        let spec = build_covert_input(&ch, &lres, 4000, 1.0).unwrap();
        let model = DmcModel::new(&ch, &spec);
        let counts = [2100u64, 1900];
        let t = 25.0;
        let exact = model.exact_log_pi(&counts, t);
        let mut rng = trial_rng(7, 0);
        let tilted = model.tilted_log_pi(&mut rng, &counts, t, 20_000);
        assert!(exact < -20.0);
        assert!((tilted - exact).abs() < 0.05, "{tilted} vs {exact}");
    }

    #[test]
    fn reports_are_deterministic() {
        let ch = reduce(&families::bsc(0.11).unwrap()).unwrap();
        let lres = solve_l(&ch).unwrap();
        let spec = build_covert_input(&ch, &lres, 2000, 1.0).unwrap();
        let cfg = SimConfig::new(2000, 1.0, 20.0, 200, 42).unwrap();
        let a = run_dmc_trial(&ch, &cfg, &spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_dmc_trial(&ch, &cfg, &spec).unwrap());
        assert_eq!(a.error_rate.to_bits(), b.error_rate.to_bits());
        assert_eq!(a.density_var.to_bits(), b.density_var.to_bits());
    }

    #[test]
    fn smoke_single_letter() {
        let ch = reduce(&families::bsc(0.11).unwrap()).unwrap();
        let lres = solve_l(&ch).unwrap();
        let spec = build_covert_input(&ch, &lres, 1, 1.0).unwrap();
        let cfg = SimConfig::with_message_count(1, 1.0, 2, 50, 1).unwrap();
        let report = run_dmc_trial(&ch, &cfg, &spec).unwrap();
        assert!((0.0..=1.0).contains(&report.error_rate));
        assert!(report.kl_spent <= 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0, 1.0, 2.0, 1, 0).is_err());
        assert!(SimConfig::new(10, 1.0, 2.0, 0, 0).is_err());
        assert!(SimConfig::new(10, 0.0, 2.0, 1, 0).is_err());
        assert!(SimConfig::with_message_count(10, 1.0, 1, 1, 0).is_err());
        assert!(SimConfig::with_message_count(10, 1.0, 2, 1, 0).is_ok());
    }
}
