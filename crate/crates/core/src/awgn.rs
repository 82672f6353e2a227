//! Closed-form analysis of covert communication over `Y = X + Z`,
//! `Z ~ N(0, sigma2)`, with off input `X = 0`.
//!
//! Quantities that only depend on the signal-to-noise ratio are computed in
//! SNR units so that their normalized versions do not depend on `sigma2` at
//! all, not even in the last bit.

use serde::Serialize;

use crate::{Error, Nats, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AwgnChannel {
    sigma2: f64,
}

impl AwgnChannel {
    pub fn new(sigma2: f64) -> Result<Self> {
        check_noise(sigma2)?;
        Ok(AwgnChannel { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

fn check_noise(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise variance {sigma2} must be positive"
        )));
    }
    Ok(())
}

/// `(a - ln(1 + a)) / 2`, i.e. `D(N(0, 1 + a) || N(0, 1))`.
fn kl_snr(a: f64) -> f64 {
    if a.abs() < 0.1 {
        // sum_{k>=2} (-1)^k a^k / k
        let mut term = a * a;
        let mut sum = 0.0;
        let mut k = 2.0;
        loop {
            let add = term / k;
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
            term *= -a;
            k += 1.0;
        }
        0.5 * sum
    } else {
        0.5 * (a - a.ln_1p())
    }
}

/// `D(N(0, rho + sigma2) || N(0, sigma2)) = rho / (2 sigma2) - ln(1 + rho / sigma2) / 2`.
pub fn gaussian_kl(rho: f64, sigma2: f64) -> Result<Nats> {
    check_noise(sigma2)?;
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::InvalidArgument(format!("power {rho} is negative")));
    }
    Ok(kl_snr(rho / sigma2))
}

fn check_budget(n: u64, delta: f64) -> Result<()> {
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
    Ok(())
}

/// Largest SNR `a` with `n kl_snr(a) <= delta`.
fn converse_snr(n: u64, delta: f64) -> f64 {
    let eps = delta / n as f64;
    if eps == 0.0 {
        return 0.0;
    }
    let mut hi = 2.0 * (2.0 * eps).sqrt() + 2.0 * eps + 1.0;
    while kl_snr(hi) <= eps {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return lo;
        }
        if kl_snr(mid) <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Largest per-letter power whose Gaussian output spends at most `delta / n`
/// nats of divergence per letter.
pub fn converse_power_bound(n: u64, delta: Nats, sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    check_budget(n, delta)?;
    Ok(converse_snr(n, delta) * sigma2)
}

/// `sqrt(n / delta) ln(1 + rho / sigma2) / 2` at the converse power.
pub fn converse_normalized_rate(n: u64, delta: Nats) -> Result<f64> {
    check_budget(n, delta)?;
    if delta == 0.0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    Ok((n as f64 / delta).sqrt() * 0.5 * converse_snr(n, delta).ln_1p())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AwgnCodebookSpec {
    pub n: u64,
    pub delta: Nats,
    pub sigma2: f64,
    /// Per-letter input power `2 sigma2 sqrt(delta / n)`.
    pub rho_n: f64,
    pub per_letter_kl: Nats,
    /// `sqrt(n) ln(1 + rho_n / sigma2) / 2`, the mean of the normalized
    /// information density.
    pub info_density_mean: Nats,
    /// Variance of the per-letter (equivalently, the normalized) information
    /// density, `rho_n / (rho_n + sigma2)`, in nats squared.
    pub info_density_var: f64,
}

impl AwgnCodebookSpec {
    pub fn snr(&self) -> f64 {
        2.0 * (self.delta / self.n as f64).sqrt()
    }

    /// `info_density_mean / sqrt(delta)`.
    pub fn normalized_mean(&self) -> f64 {
        self.info_density_mean / self.delta.sqrt()
    }
}

/// Gaussian codebook with per-letter power `2 sigma2 sqrt(delta / n)`.
pub fn achievability_schedule(n: u64, delta: Nats, sigma2: f64) -> Result<AwgnCodebookSpec> {
    check_noise(sigma2)?;
    check_budget(n, delta)?;
    if delta == 0.0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let a = 2.0 * (delta / n as f64).sqrt();
    let per_letter_kl = kl_snr(a);
    debug_assert!(n as f64 * per_letter_kl <= delta);
    Ok(AwgnCodebookSpec {
        n,
        delta,
        sigma2,
        rho_n: a * sigma2,
        per_letter_kl,
        info_density_mean: 0.5 * (n as f64).sqrt() * a.ln_1p(),
        // E[(X^2 + 2XZ - (rho/sigma2) Z^2)^2] / (4 (rho + sigma2)^2)
        //   = 4 rho (rho + sigma2) / (4 (rho + sigma2)^2)
        info_density_var: a / (1.0 + a),
    })
}

/// The scaling constant of the AWGN channel, one square-root nat for every
/// noise power.
pub fn awgn_l() -> f64 {
    1.0
}
