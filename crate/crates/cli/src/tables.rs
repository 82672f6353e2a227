//! CSV-producing commands.

use std::io::Write;

use covert_core::awgn::{
    achievability_schedule, converse_normalized_rate, converse_power_bound, AwgnChannel,
};
use covert_core::capacity::blahut_arimoto;
use covert_core::channel::families;
use covert_core::lpd::{
    build_covert_input, classify, geodesic_point, hull_distance, solve_l, tangent_certificate,
    variance_bound, CaseKind,
};
use covert_core::sim::{run_awgn_trial, run_dmc_trial, SimConfig, SimReport, ThresholdRule};
use covert_core::{reduce, Channel, Error as CoreError};

use crate::error::{CliError, Result};
use crate::format::{sig12, Units};

const MAX_ITER: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(x) => sig12(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: Vec<String>) -> Self {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepFamily {
    Bsc,
    Kary(Vec<usize>),
}

/// `L`, the variance bound and the certificate over a crossover grid.
pub fn sweep(family: &SweepFamily, p_grid: &[f64], tol: f64, units: Units) -> Result<Table> {
    if p_grid.is_empty() {
        return Err(CliError::Usage("empty parameter grid".into()));
    }
    let mut headers = Vec::new();
    if matches!(family, SweepFamily::Kary(_)) {
        headers.push("k".to_string());
    }
    headers.extend([
        "p".to_string(),
        format!("L_{}", units.sqrt_name()),
        format!("variance_bound_{}", units.sqrt_name()),
        "variance_bound_valid".into(),
        "tight".into(),
    ]);
    let mut table = Table::new(headers);
    let ks: Vec<Option<usize>> = match family {
        SweepFamily::Bsc => vec![None],
        SweepFamily::Kary(ks) => ks.iter().map(|&k| Some(k)).collect(),
    };
    for k in ks {
        for &p in p_grid {
            let ch = match k {
                None => families::bsc(p)?,
                Some(k) => families::kary_uniform_error(k, p)?,
            };
            let r = reduce(&ch)?;
            let cap = blahut_arimoto(&r, tol, MAX_ITER)?;
            let l = solve_l(&r)?;
            let vb = variance_bound(&r, &cap)?;
            let cert = tangent_certificate(&r, &cap)?;
            let mut row = Vec::new();
            if let Some(k) = k {
                row.push(Cell::Int(k as u64));
            }
            row.extend([
                Cell::Num(p),
                Cell::Num(units.sqrt_info(l.l)),
                Cell::Num(units.sqrt_info(vb.value)),
                Cell::Bool(vb.valid),
                Cell::Bool(cert.tight),
            ]);
            table.rows.push(row);
        }
    }
    Ok(table)
}

/// Points of the exponential family between `Q0` and `Q*` with their
/// distance to the hull of the channel rows.
pub fn geodesic(ch: &Channel, lambdas: &[f64], tol: f64) -> Result<Table> {
    let r = reduce(ch)?;
    if classify(&r)?.case_kind != CaseKind::NonRedundantOff {
        return Err(CoreError::RedundantOff.into());
    }
    let cap = blahut_arimoto(&r, tol, MAX_ITER)?;
    let mut headers = vec!["lambda".to_string()];
    headers.extend(r.output_labels().iter().map(|y| format!("q_{y}")));
    headers.push("hull_residual".into());
    let mut table = Table::new(headers);
    for &lambda in lambdas {
        let q = geodesic_point(r.off_output(), &cap.output_dist, lambda)?;
        let mut row = vec![Cell::Num(lambda)];
        row.extend(q.iter().map(|&v| Cell::Num(v)));
        row.push(Cell::Num(hull_distance(&r, &q)?));
        table.rows.push(row);
    }
    Ok(table)
}

/// Converse and achievability columns for the Gaussian channel.
pub fn awgn(sigma2: f64, delta: f64, n_grid: &[u64], units: Units) -> Result<Table> {
    AwgnChannel::new(sigma2)?;
    let mut table = Table::new(vec![
        "n".into(),
        "converse_power_bound".into(),
        "rho_n".into(),
        format!("kl_spent_{}", units.name()),
        format!("converse_normalized_rate_{}", units.sqrt_name()),
        format!("achievability_normalized_mean_{}", units.sqrt_name()),
    ]);
    for &n in n_grid {
        let spec = achievability_schedule(n, delta, sigma2)?;
        table.rows.push(vec![
            Cell::Int(n),
            Cell::Num(converse_power_bound(n, delta, sigma2)?),
            Cell::Num(spec.rho_n),
            Cell::Num(units.info(n as f64 * spec.per_letter_kl)),
            Cell::Num(units.sqrt_info(converse_normalized_rate(n, delta)?)),
            Cell::Num(units.sqrt_info(spec.normalized_mean())),
        ]);
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub delta: f64,
    /// `ln|M| = rate_factor L sqrt(n delta)`.
    pub rate_factor: f64,
    pub trials: usize,
    pub seed: u64,
    pub threshold: ThresholdRule,
    pub is_samples: usize,
}

pub enum SimTarget<'a> {
    Dmc(&'a Channel),
    Awgn(f64),
}

/// One simulation per blocklength.
pub fn simulate(
    target: SimTarget<'_>,
    n_grid: &[u64],
    opts: &SimulateOptions,
    units: Units,
) -> Result<Table> {
    if opts.rate_factor.is_nan() || opts.rate_factor <= 0.0 {
        return Err(CliError::Usage("rate factor must be positive".into()));
    }
    let mut table = Table::new(vec![
        "n".into(),
        format!("log_message_count_{}", units.name()),
        "error_rate".into(),
        "error_rate_ci95".into(),
        format!("kl_spent_{}", units.name()),
        "tv_exact".into(),
        format!("normalized_rate_{}", units.sqrt_name()),
    ]);
    let config = |n: u64, l: f64| -> Result<SimConfig> {
        let log_m = (opts.rate_factor * l * (n as f64 * opts.delta).sqrt()).max(2f64.ln());
        let mut cfg = SimConfig::new(n, opts.delta, log_m, opts.trials, opts.seed)?
            .with_threshold(opts.threshold);
        cfg.is_samples = opts.is_samples;
        cfg.validate()?;
        Ok(cfg)
    };
    let reports: Vec<SimReport> = match target {
        SimTarget::Dmc(ch) => {
            let r = reduce(ch)?;
            let l = solve_l(&r)?;
            n_grid
                .iter()
                .map(|&n| {
                    let spec = build_covert_input(&r, &l, n, opts.delta)?;
                    Ok(run_dmc_trial(&r, &config(n, l.l)?, &spec)?)
                })
                .collect::<Result<_>>()?
        }
        SimTarget::Awgn(sigma2) => {
            let ch = AwgnChannel::new(sigma2)?;
            n_grid
                .iter()
                .map(|&n| {
                    let spec = achievability_schedule(n, opts.delta, sigma2)?;
                    Ok(run_awgn_trial(&ch, &config(n, 1.0)?, &spec)?)
                })
                .collect::<Result<_>>()?
        }
    };
    for rep in reports {
        table.rows.push(vec![
            Cell::Int(rep.n),
            Cell::Num(units.info(rep.log_message_count)),
            Cell::Num(rep.error_rate),
            Cell::Num(rep.error_rate_ci95),
            Cell::Num(units.info(rep.kl_spent)),
            rep.tv_exact.map_or(Cell::Empty, Cell::Num),
            Cell::Num(units.sqrt_info(rep.normalized_rate)),
        ]);
    }
    Ok(table)
}
