use rayon::prelude::*;
use urllc_core::age::{age_violation, high_rate_limit, peak_age_pgf};
use urllc_core::channel::{arq_service_model, rcus_optimize, DEFAULT_ALPHAS};
use urllc_core::pgf::{exact_ccdf, saddlepoint_ccdf};
use urllc_core::queueing::{
    delay_pgf_async, delay_pgf_sync, delay_violation, delay_violation_channel_uses, max_arrival_rate,
    snc_delay_bound, DelayMethod, RateBound, DEFAULT_DEGREE_CAP,
};
use urllc_core::sim::{default_warmup, simulate_async_delay, simulate_fcfs_delay, simulate_peak_age};
use urllc_core::vlsf::{
    default_gamma_grid, log_spaced, optimize_gamma, simulate_threshold_crossing,
    simulate_threshold_crossing_grid, vlsf_service_model,
};
use urllc_core::{AgePolicy, ChannelSpec, Error, QueueConfig, RationalPgf, ServiceModel};

use crate::args::*;
use crate::config::{parse_list, parse_range};
use crate::fail::{required, CliError};
use crate::table::{Cell, Provenance, Table};

const DEFAULT_K: u32 = 30;
const DEFAULT_ELL_MAX: usize = 10;
const DEFAULT_SAMPLES: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;

type Out = Result<(Table, Provenance), CliError>;

/// Resolved channel parameters.
struct Channel<'a> {
    args: &'a ChannelArgs,
    k: u32,
    seed: u64,
    samples: u64,
}

impl<'a> Channel<'a> {
    fn new(args: &'a ChannelArgs) -> Self {
        Self {
            args,
            k: args.k.unwrap_or(DEFAULT_K),
            seed: args.seed.unwrap_or(DEFAULT_SEED),
            samples: args.samples.unwrap_or(DEFAULT_SAMPLES),
        }
    }

    fn n(&self) -> Result<usize, CliError> {
        required(self.args.n, "n")
    }

    fn spec(&self, n: usize) -> Result<ChannelSpec, CliError> {
        Ok(ChannelSpec::from_snr_db(required(self.args.snr_db, "snr_db")?, n)?)
    }

    fn is_vlsf(&self) -> bool {
        self.args.service == Some(ServiceChoice::Vlsf)
    }

    /// Frame error probability from `--eps-frame` or the RCUs bound.
    fn eps_frame(&self, n: usize) -> Result<(f64, u64), CliError> {
        if let Some(e) = self.args.eps_frame {
            return Ok((e, 0));
        }
        let r = rcus_optimize(&self.spec(n)?, self.k, &DEFAULT_ALPHAS, self.samples, self.seed)?;
        Ok((r.estimate.value, self.samples))
    }

    /// Service model at frame size `n` and the Monte Carlo samples it took.
    fn service(&self, n: usize) -> Result<(ServiceModel, u64), CliError> {
        if self.is_vlsf() {
            let gamma = required(self.args.gamma, "gamma")?;
            let ell_max = self.args.ell_max.unwrap_or(DEFAULT_ELL_MAX);
            let r =
                simulate_threshold_crossing(&self.spec(n)?, self.k, gamma, ell_max, self.samples, self.seed)?;
            return Ok((vlsf_service_model(&r)?, self.samples));
        }
        let (eps, used) = self.eps_frame(n)?;
        Ok((arq_service_model(eps)?, used))
    }

    /// As `service`, but `None` when every ARQ frame fails.
    fn usable_service(&self, n: usize) -> Result<(Option<ServiceModel>, u64), CliError> {
        if !self.is_vlsf() {
            let (eps, used) = self.eps_frame(n)?;
            if eps >= 1.0 {
                return Ok((None, used));
            }
            return Ok((Some(arq_service_model(eps)?), used));
        }
        self.service(n).map(|(s, used)| (Some(s), used))
    }

    fn footer(&self, samples: u64) -> Provenance {
        Provenance { seed: self.seed, samples }
    }
}

fn methods(m: Option<MethodChoice>) -> Vec<DelayMethod> {
    match m.unwrap_or(MethodChoice::Exact) {
        MethodChoice::Exact => vec![DelayMethod::Exact],
        MethodChoice::Saddlepoint => vec![DelayMethod::Saddlepoint],
        MethodChoice::Both => vec![DelayMethod::Exact, DelayMethod::Saddlepoint],
    }
}

fn method_name(m: DelayMethod) -> &'static str {
    match m {
        DelayMethod::Exact => "exact",
        DelayMethod::Saddlepoint => "saddlepoint",
    }
}

fn policies(p: Option<&str>) -> Result<Vec<AgePolicy>, CliError> {
    match p {
        None => Err(CliError::Config("missing required parameter 'policy'".into())),
        Some(s) if s.eq_ignore_ascii_case("all") => Ok(AgePolicy::ALL.to_vec()),
        Some(s) => s.split(',').map(|p| p.trim().parse::<AgePolicy>().map_err(CliError::from)).collect(),
    }
}

/// Columns of `P[X >= d]` for `d = 1..=d_max`, one per method.
fn ccdf_columns(g: &RationalPgf, d_max: u64, methods: &[DelayMethod]) -> Result<Vec<Vec<f64>>, CliError> {
    let grid: Vec<i64> = (1..=d_max as i64).collect();
    methods
        .iter()
        .map(|m| match m {
            DelayMethod::Exact => {
                let curve = exact_ccdf(g, d_max as usize)?;
                Ok(grid.iter().map(|&d| curve.at_least(d)).collect())
            }
            DelayMethod::Saddlepoint => {
                grid.par_iter().map(|&d| saddlepoint_ccdf(g, d).map_err(CliError::from)).collect()
            }
        })
        .collect()
}

fn ccdf_table(first: &str, g: &RationalPgf, d_max: u64, ms: &[DelayMethod]) -> Result<Table, CliError> {
    if d_max == 0 {
        return Err(CliError::Config("grid end must be at least 1".into()));
    }
    let columns = ccdf_columns(g, d_max, ms)?;
    let mut header = vec![first];
    header.extend(ms.iter().map(|&m| method_name(m)));
    let mut t = Table::new(&header);
    for i in 0..d_max as usize {
        let mut row = vec![Cell::from(i as u64 + 1)];
        row.extend(columns.iter().map(|c| Cell::from(c[i])));
        t.push(row);
    }
    Ok(t)
}

pub fn rcus(a: &RcusArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let ns = match &a.n_range {
        Some(r) => parse_range(r)?,
        None => vec![ch.n()?],
    };
    let snr_db = required(a.channel.snr_db, "snr_db")?;
    let results: Result<Vec<_>, CliError> = ns
        .iter()
        .map(|&n| Ok(rcus_optimize(&ch.spec(n)?, ch.k, &DEFAULT_ALPHAS, ch.samples, ch.seed)?))
        .collect();
    let mut t = Table::new(&["n", "k", "snr_db", "alpha", "epsilon", "half_width"]);
    for (n, r) in ns.iter().zip(results?) {
        t.push(vec![
            (*n).into(),
            (ch.k as u64).into(),
            snr_db.into(),
            r.alpha.into(),
            r.estimate.value.into(),
            r.estimate.half_width.into(),
        ]);
    }
    Ok((t, ch.footer(ch.samples)))
}

pub fn vlsf_bound(a: &VlsfArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let n = ch.n()?;
    let spec = ch.spec(n)?;
    let ell_max = a.channel.ell_max.unwrap_or(DEFAULT_ELL_MAX);
    let gammas = match (&a.gammas, a.gamma_points) {
        (Some(list), _) => parse_list::<f64>(list, "gamma")?,
        (None, Some(points)) => {
            let g = default_gamma_grid(ch.k);
            log_spaced(g[0], g[g.len() - 1], points.max(1))
        }
        (None, None) => default_gamma_grid(ch.k),
    };
    match (a.lambda, a.d0) {
        (Some(lambda), Some(d0)) => {
            let q = QueueConfig::new(n, lambda)?;
            let sweep = optimize_gamma(&spec, ch.k, &q, d0, &gammas, ell_max, ch.samples, ch.seed)?;
            let mut t = Table::new(&[
                "gamma",
                "mean_service",
                "eps_undetected",
                "eps_detected",
                "delay_ccdf",
                "p_dv",
            ]);
            for p in &sweep.points {
                t.push(vec![
                    p.gamma.into(),
                    p.mean_service.into(),
                    p.eps_undetected.into(),
                    p.eps_detected.into(),
                    p.delay_ccdf.into(),
                    p.p_dv.into(),
                ]);
            }
            Ok((t, ch.footer(ch.samples)))
        }
        (None, None) => {
            let results =
                simulate_threshold_crossing_grid(&spec, ch.k, &gammas, ell_max, ch.samples, ch.seed)?;
            let mut t = Table::new(&["gamma", "mean_service", "eps_undetected", "eps_detected"]);
            for r in &results {
                let mean: f64 = r.tau_tail.iter().map(|e| e.value).sum();
                t.push(vec![
                    r.gamma.into(),
                    mean.into(),
                    r.eps_undetected_bound.value.into(),
                    r.eps_detected_term.value.into(),
                ]);
            }
            Ok((t, ch.footer(ch.samples)))
        }
        _ => Err(CliError::Config("lambda and d0 must be given together".into())),
    }
}

fn delay_pgf(
    model: Option<ModelChoice>,
    service: &ServiceModel,
    q: &QueueConfig,
) -> Result<RationalPgf, Error> {
    match model.unwrap_or(ModelChoice::Sync) {
        ModelChoice::Sync => delay_pgf_sync(service, q),
        ModelChoice::Async => delay_pgf_async(service, q, DEFAULT_DEGREE_CAP),
    }
}

pub fn delay_ccdf(a: &DelayCcdfArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let n = ch.n()?;
    let q = QueueConfig::new(n, required(a.lambda, "lambda")?)?;
    let (service, used) = ch.service(n)?;
    let g = delay_pgf(a.model, &service, &q)?;
    let t = ccdf_table("d", &g, a.dmax.unwrap_or(20), &methods(a.method))?;
    Ok((t, ch.footer(used)))
}

pub fn delay_violation_cmd(a: &DelayViolationArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let n = ch.n()?;
    let q = QueueConfig::new(n, required(a.lambda, "lambda")?)?;
    let d0s = parse_list::<u64>(&required(a.d0.clone(), "d0")?, "d0")?;
    let (service, used) = ch.service(n)?;
    let model = a.model.unwrap_or(ModelChoice::Sync);
    let g = delay_pgf(Some(model), &service, &q)?;
    let mut t = Table::new(&["d0", "method", "threshold", "delay_tail", "eps_undetected", "p_dv"]);
    for &d0 in &d0s {
        for m in methods(a.method) {
            let r = match model {
                ModelChoice::Sync => delay_violation(&g, d0, &q, service.eps_undetected, m)?,
                ModelChoice::Async => delay_violation_channel_uses(&g, d0, service.eps_undetected, m)?,
            };
            t.push(vec![
                d0.into(),
                method_name(m).into(),
                (r.threshold as u64).into(),
                r.delay_tail.into(),
                service.eps_undetected.into(),
                r.p_dv.into(),
            ]);
        }
    }
    Ok((t, ch.footer(used)))
}

pub fn snc_bound(a: &SncArgs) -> Out {
    let ch = Channel::new(&a.channel);
    if ch.is_vlsf() {
        return Err(CliError::Config("the network-calculus bound needs ARQ service".into()));
    }
    let n = ch.n()?;
    let q = QueueConfig::new(n, required(a.lambda, "lambda")?)?;
    let d0s = parse_list::<u64>(&required(a.d0.clone(), "d0")?, "d0")?;
    let (eps, used) = ch.eps_frame(n)?;
    let service = arq_service_model(eps)?;
    let g = delay_pgf_sync(&service, &q)?;
    let mut t = Table::new(&["d0", "threshold", "snc_bound", "exact_tail"]);
    for &d0 in &d0s {
        let exact = delay_violation(&g, d0, &q, 0.0, DelayMethod::Exact)?;
        t.push(vec![
            d0.into(),
            (exact.threshold as u64).into(),
            snc_delay_bound(eps, &q, d0).into(),
            exact.delay_tail.into(),
        ]);
    }
    Ok((t, ch.footer(used)))
}

/// `λ*`, or 0 when no positive rate meets the target.
fn rate_or_zero(r: Result<f64, Error>) -> Result<f64, CliError> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::NoFeasibleRate { .. }) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

pub fn throughput(a: &ThroughputArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let ns = match &a.n_range {
        Some(r) => parse_range(r)?,
        None => vec![ch.n()?],
    };
    let d0 = required(a.d0, "d0")?;
    let target = required(a.target, "target")?;
    let bounds = match a.bound.unwrap_or(BoundChoice::Exact) {
        BoundChoice::Exact => vec![RateBound::Exact],
        BoundChoice::Snc => vec![RateBound::Snc],
        BoundChoice::Both => vec![RateBound::Exact, RateBound::Snc],
    };
    let rows: Result<Vec<(Vec<f64>, u64)>, CliError> = ns
        .par_iter()
        .map(|&n| {
            let (service, used) = ch.usable_service(n)?;
            let Some(service) = service else {
                return Ok((vec![0.0; bounds.len()], used));
            };
            let rates = bounds
                .iter()
                .map(|&b| {
                    rate_or_zero(max_arrival_rate(&service, n, ch.k, d0, target, b).map(|r| r.lambda_star))
                })
                .collect::<Result<Vec<f64>, CliError>>()?;
            Ok((rates, used))
        })
        .collect();
    let rows = rows?;
    let mut header = vec!["n", "lambda_star", "throughput"];
    if bounds.len() == 2 {
        header.extend(["lambda_star_snc", "throughput_snc"]);
    }
    let mut t = Table::new(&header);
    for (n, (rates, _)) in ns.iter().zip(&rows) {
        let mut row = vec![Cell::from(*n)];
        for l in rates {
            row.push(Cell::from(*l));
            row.push(Cell::from(ch.k as f64 * l));
        }
        t.push(row);
    }
    let used = rows.iter().map(|(_, u)| *u).max().unwrap_or(0);
    Ok((t, ch.footer(used)))
}

pub fn age_ccdf(a: &AgeCcdfArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let n = ch.n()?;
    let policy: AgePolicy = required(a.policy.as_deref(), "policy")?.parse()?;
    let q = QueueConfig::new(n, required(a.lambda, "lambda")?)?;
    let (service, used) = ch.service(n)?;
    let g = peak_age_pgf(policy, &service, &q)?;
    let t = ccdf_table("a", &g, a.amax.unwrap_or(50), &methods(a.method))?;
    Ok((t, ch.footer(used)))
}

pub fn age_violation_cmd(a: &AgeViolationArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let n = ch.n()?;
    let ps = policies(a.policy.as_deref())?;
    let lambdas = parse_list::<f64>(&required(a.lambdas.clone(), "lambdas")?, "lambda")?;
    let a0 = required(a.a0, "a0")?;
    let (service, used) = ch.service(n)?;
    let ms = methods(a.method);
    let mut t = Table::new(&["policy", "lambda", "method", "threshold", "p_av"]);
    for &p in &ps {
        for &lambda in &lambdas {
            let q = QueueConfig::new(n, lambda)?;
            let g = peak_age_pgf(p, &service, &q)?;
            for &m in &ms {
                let r = age_violation(&g, a0, &q, service.eps_undetected, m)?;
                t.push(vec![
                    p.name().into(),
                    lambda.into(),
                    method_name(m).into(),
                    (r.threshold as u64).into(),
                    r.p_av.into(),
                ]);
            }
        }
    }
    Ok((t, ch.footer(used)))
}

pub fn high_rate(a: &HighRateArgs) -> Out {
    let ch = Channel::new(&a.channel);
    if ch.is_vlsf() {
        return Err(CliError::Config("high-rate limits need ARQ service".into()));
    }
    let n = ch.n()?;
    let ps = policies(a.policy.as_deref())?;
    let a0s = parse_list::<u64>(&required(a.a0.clone(), "a0")?, "a0")?;
    let (eps, used) = ch.eps_frame(n)?;
    let mut t = Table::new(&["policy", "a0", "threshold", "limit"]);
    for &p in &ps {
        for &a0 in &a0s {
            t.push(vec![
                p.name().into(),
                a0.into(),
                a0.div_ceil(n as u64).into(),
                high_rate_limit(p, eps, a0, n)?.into(),
            ]);
        }
    }
    Ok((t, ch.footer(used)))
}

pub fn simulate(a: &SimulateArgs) -> Out {
    let ch = Channel::new(&a.channel);
    let n = ch.n()?;
    let q = QueueConfig::new(n, required(a.lambda, "lambda")?)?;
    let (service, _) = ch.service(n)?;
    let events = a.events.unwrap_or(DEFAULT_SAMPLES);
    let warmup = a.warmup.unwrap_or_else(|| default_warmup(events));
    let k_max = a.kmax.unwrap_or(30);
    let seed = ch.seed;
    let (report, g) = match a.kind.unwrap_or(SimChoice::Sync) {
        SimChoice::Sync => {
            (simulate_fcfs_delay(&service, &q, events, warmup, seed, k_max)?, delay_pgf_sync(&service, &q)?)
        }
        SimChoice::Async => (
            simulate_async_delay(&service, &q, events, warmup, seed, k_max)?,
            delay_pgf_async(&service, &q, DEFAULT_DEGREE_CAP)?,
        ),
        SimChoice::Age => {
            let policy: AgePolicy = required(a.policy.as_deref(), "policy")?.parse()?;
            (
                simulate_peak_age(policy, &service, &q, events, warmup, seed, k_max)?,
                peak_age_pgf(policy, &service, &q)?,
            )
        }
    };
    let analytic = exact_ccdf(&g, k_max)?;
    let mut t = Table::new(&["k", "ccdf", "std_err", "batch_std_err", "analytic"]);
    for k in 0..=k_max {
        t.push(vec![
            k.into(),
            report.ccdf.values[k].into(),
            report.std_err[k].into(),
            report.batch_std_err[k].into(),
            analytic.exceeds(k as i64).into(),
        ]);
    }
    Ok((t, ch.footer(events)))
}
