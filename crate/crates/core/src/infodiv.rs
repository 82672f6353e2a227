//! Entropy, relative entropy, halved chi-squared divergence, mutual
//! information and log-likelihood-ratio variance. All logarithms are natural.

use crate::channel::{check_same_size, Channel, Distribution};
use crate::{Error, Nats, Result};

/// `phi(u) = (1 + u) ln(1 + u) - u`, accurate near `u = 0`.
///
/// `sum_y q0(y) phi(q(y)/q0(y) - 1)` equals `D(q || q0)` for normalized
/// `q, q0` and avoids the first-order cancellation of the textbook sum.
pub(crate) fn phi(u: f64) -> f64 {
    if u == -1.0 {
        return 1.0;
    }
    if u.abs() < 0.1 {
        // sum_{k>=2} (-u)^k / (k (k - 1))
        let mut term = u * u;
        let mut sum = 0.0;
        let mut k = 2.0;
        loop {
            let add = term / (k * (k - 1.0));
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
            term *= -u;
            k += 1.0;
        }
        sum
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

pub fn entropy(p: &Distribution) -> Nats {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Relative entropy `D(q1 || q0)`, `+inf` when `q1` is not absolutely
/// continuous with respect to `q0`.
pub fn kl(q1: &Distribution, q0: &Distribution) -> Result<Nats> {
    check_same_size(q0.len(), q1.len())?;
    Ok(kl_slices(q1.probs(), q0.probs()))
}

pub(crate) fn kl_slices(q1: &[f64], q0: &[f64]) -> Nats {
    let mut sum = 0.0;
    let mut drift = 0.0;
    for (&a, &b) in q1.iter().zip(q0) {
        if b == 0.0 {
            if a > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        sum += b * phi(a / b - 1.0);
        drift += a - b;
    }
    (sum + drift).max(0.0)
}

/// `D((1 - mu) q0 + mu qt || q0)` evaluated without forming the mixture.
pub fn kl_mixture(q0: &Distribution, qt: &Distribution, mu: f64) -> Result<Nats> {
    check_same_size(q0.len(), qt.len())?;
    let mut sum = 0.0;
    for (&b, &a) in q0.iter().zip(qt.iter()) {
        if b == 0.0 {
            if a > 0.0 && mu > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        sum += b * phi(mu * (a / b - 1.0));
    }
    Ok(sum.max(0.0))
}

/// `1/2 sum_y (qt(y) - q0(y))^2 / q0(y)`.
pub fn chi2_half(qt: &Distribution, q0: &Distribution) -> Result<Nats> {
    check_same_size(q0.len(), qt.len())?;
    if q0.iter().any(|&v| v <= 0.0) {
        return Err(Error::ZeroMass("reference distribution"));
    }
    Ok(0.5
        * qt.iter()
            .zip(q0.iter())
            .map(|(a, b)| (a - b) * (a - b) / b)
            .sum::<f64>())
}

/// `I(P, W) = sum_x P(x) D(W(.|x) || PW)`.
pub fn mutual_information(p: &Distribution, ch: &Channel) -> Result<Nats> {
    check_same_size(ch.num_inputs(), p.len())?;
    let q = ch.push_forward(p.probs());
    Ok(mutual_information_with_output(p.probs(), ch, &q))
}

pub(crate) fn mutual_information_with_output(p: &[f64], ch: &Channel, q: &[f64]) -> Nats {
    p.iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| w * kl_slices(ch.row(x).probs(), q))
        .sum::<f64>()
        .max(0.0)
}

/// `var_{Y ~ q0} ln(q0(Y) / qref(Y))`, in nats squared.
pub fn llr_variance(q0: &Distribution, qref: &Distribution) -> Result<f64> {
    check_same_size(q0.len(), qref.len())?;
    if q0.iter().any(|&v| v <= 0.0) {
        return Err(Error::ZeroMass("q0"));
    }
    if qref.iter().any(|&v| v <= 0.0) {
        return Err(Error::ZeroMass("reference distribution"));
    }
    let llr: Vec<f64> = q0
        .iter()
        .zip(qref.iter())
        .map(|(a, b)| (a / b).ln())
        .collect();
    let mean: f64 = q0.iter().zip(&llr).map(|(p, l)| p * l).sum();
    Ok(q0
        .iter()
        .zip(&llr)
        .map(|(p, l)| p * (l - mean) * (l - mean))
        .sum())
}

/// Pinsker's bound `sqrt(d / 2)` on total variation.
pub fn pinsker_tv_bound(d: Nats) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "divergence {d} is negative"
        )));
    }
    Ok((d / 2.0).sqrt())
}

/// `1/2 sum |a - b|`.
pub fn total_variation(a: &Distribution, b: &Distribution) -> Result<f64> {
    check_same_size(a.len(), b.len())?;
    Ok(0.5
        * a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::families;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    fn h_b(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn phi_series_matches_closed_form() {
        for &u in &[-0.099f64, -0.05, -1e-3, 1e-6, 0.02, 0.0999] {
            let direct = (1.0 + u) * (1.0 + u).ln() - u;
            assert!((phi(u) - direct).abs() <= 1e-15, "u = {u}");
        }
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(-1.0), 1.0);
    }

    #[test]
    fn kl_values() {
        let q = d(&[0.2, 0.3, 0.5]);
        assert_eq!(kl(&q, &q).unwrap(), 0.0);
        let want = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((kl(&d(&[0.75, 0.25]), &d(&[0.5, 0.5])).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.130812).abs() < 1e-6);
        let ln2 = kl(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap();
        assert!((ln2 - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn kl_infinite_off_support() {
        assert_eq!(kl(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert!(kl(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn kl_mixture_matches_kl() {
        let q0 = d(&[0.2, 0.3, 0.5]);
        let qt = d(&[0.6, 0.3, 0.1]);
        for &mu in &[0.0, 1e-3, 0.3, 1.0] {
            let mixed = q0.mix(&qt, mu).unwrap();
            let a = kl_mixture(&q0, &qt, mu).unwrap();
            let b = kl(&mixed, &q0).unwrap();
            assert!((a - b).abs() <= 1e-14 + 1e-12 * b, "mu = {mu}: {a} vs {b}");
        }
    }

    #[test]
    fn chi2_values() {
        let q = d(&[0.4, 0.6]);
        assert_eq!(chi2_half(&q, &q).unwrap(), 0.0);
        // 1/2 (0.0625 / 0.5 + 0.0625 / 0.5)
        assert!((chi2_half(&d(&[0.75, 0.25]), &d(&[0.5, 0.5])).unwrap() - 0.125).abs() < 1e-15);
        let p: f64 = 0.1;
        let want = (1.0 - 2.0 * p).powi(2) / (2.0 * p * (1.0 - p));
        let got = chi2_half(&d(&[p, 1.0 - p]), &d(&[1.0 - p, p])).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 3.555_555_555_6).abs() < 1e-9);
        assert!(matches!(
            chi2_half(&q, &d(&[1.0, 0.0])),
            Err(Error::ZeroMass(_))
        ));
    }

    #[test]
    fn mutual_information_values() {
        let ch = families::bsc(0.1).unwrap();
        assert!(
            mutual_information(&Distribution::point_mass(2, 1), &ch)
                .unwrap()
                .abs()
                < 1e-15
        );
        let want = std::f64::consts::LN_2 - h_b(0.1);
        let got = mutual_information(&Distribution::uniform(2), &ch).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.368064).abs() < 1e-6);

        // Same value on the {-1, 1} part of the BSC-with-off channel.
        let fig1 = families::bsc_with_off(0.1).unwrap();
        let p = d(&[0.5, 0.0, 0.5]);
        assert!((mutual_information(&p, &fig1).unwrap() - want).abs() < 1e-14);
        assert!(mutual_information(&Distribution::uniform(2), &fig1).is_err());
    }

    #[test]
    fn llr_variance_values() {
        let q = d(&[0.3, 0.7]);
        assert_eq!(llr_variance(&q, &q).unwrap(), 0.0);
        let p: f64 = 0.1;
        let want = p * (1.0 - p) * ((1.0 - p) / p).ln().powi(2);
        let got = llr_variance(&d(&[1.0 - p, p]), &Distribution::uniform(2)).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.434502).abs() < 1e-6);
        assert!(llr_variance(&d(&[1.0, 0.0]), &Distribution::uniform(2)).is_err());
    }

    #[test]
    fn llr_variance_kary_formula() {
        // v(k, p) for the k-ary uniform-error channel.
        for k in 2..=6usize {
            for &p in &[0.05, 0.2, 0.35] {
                let ch = families::kary_uniform_error(k, p).unwrap();
                let a = (1.0 - p) * (1.0 / (1.0 - p)).ln();
                let b = p * ((k - 1) as f64 / p).ln();
                let v = (1.0 - p) * (1.0 / (1.0 - p)).ln().powi(2)
                    + p * ((k - 1) as f64 / p).ln().powi(2)
                    - (a + b).powi(2);
                let got = llr_variance(ch.off_output(), &Distribution::uniform(k)).unwrap();
                assert!((got - v).abs() < 1e-13, "k = {k}, p = {p}");
            }
        }
    }

    #[test]
    fn pinsker_values() {
        assert_eq!(pinsker_tv_bound(0.0).unwrap(), 0.0);
        assert_eq!(pinsker_tv_bound(0.5).unwrap(), 0.5);
        assert_eq!(pinsker_tv_bound(2.0).unwrap(), 1.0);
        assert!(pinsker_tv_bound(-1e-3).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&Distribution::point_mass(3, 0)), 0.0);
        assert!((entropy(&Distribution::uniform(4)) - 4f64.ln()).abs() < 1e-15);
    }
}
