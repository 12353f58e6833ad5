use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rayon::prelude::*;

use fujita_core::config::RunConfig;
use fujita_core::io::{fmt_f64, write_run, write_xt_table};
use fujita_core::solver::run;
use fujita_core::verify::{
    bracket_margin, classify_regime, fit_rate, transitional_bracket, verify_suite, Regime,
    SuiteOptions, DEFAULT_BAND,
};
use fujita_core::{
    critical_exponents, rate_exponent, Error, InitialDatum, KernelEvaluator, ProblemParams,
};

/// Largest accepted `|fitted - predicted|` slope error in a rate sweep.
pub const SLOPE_TOLERANCE: f64 = 0.05;
/// Multiplicative slack on the transitional-exponent bracket.
pub const BRACKET_SLACK: f64 = 0.02;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn checks(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::DomainTooSmall { .. }
            | Error::Domain { .. } => Failure::config(e.to_string()),
            _ => Failure::runtime(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load(config: Option<&Path>) -> Result<RunConfig, Failure> {
    let path = config.ok_or_else(|| Failure::config("--config is required for this command"))?;
    Ok(RunConfig::from_file(path)?)
}

// one exponent writes straight into `out`, several get their own subdirectory
fn run_dir(out: &Path, p: f64, many: bool) -> PathBuf {
    if many {
        out.join(format!("p_{p}"))
    } else {
        out.to_path_buf()
    }
}

pub fn solve(config: Option<&Path>, out: &Path) -> Outcome {
    let cfg = load(config)?;
    let many = cfg.params.len() > 1;
    let results: Vec<Result<(f64, f64), Failure>> = cfg
        .params
        .par_iter()
        .map(|&params| {
            let result = run(&cfg.datum, params, &cfg.sim)?;
            write_run(&result, &run_dir(out, params.p(), many))?;
            let last = result
                .deviation
                .last()
                .map_or(f64::NAN, |d| d.sup_deviation);
            Ok((params.p(), last))
        })
        .collect();
    for r in results {
        let (p, last) = r?;
        println!(
            "p = {p}: sup(u - u_h) at t = {} is {}",
            cfg.sim.t_end,
            fmt_f64(last)
        );
    }
    Ok(())
}

pub fn verify(config: Option<&Path>, out: &Path, inject_spike: bool) -> Outcome {
    let cfg = load(config)?;
    let many = cfg.params.len() > 1;
    let options = SuiteOptions {
        inject_spike,
        ..SuiteOptions::default()
    };
    let mut all_passed = true;
    for &params in &cfg.params {
        let (result, report) = verify_suite(&cfg, params, &options)?;
        let dir = run_dir(out, params.p(), many);
        write_run(&result, &dir)?;
        report.write(&dir.join("verification.json"))?;
        for c in &report.checks {
            println!(
                "p = {}: {:<30} {} worst margin {}",
                params.p(),
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                fmt_f64(c.worst_margin)
            );
        }
        all_passed &= report.passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::checks(
            "verification failed; see verification.json",
        ))
    }
}

struct RateRow {
    p: f64,
    predicted: f64,
    fitted: f64,
    r2: f64,
    regime: Regime,
    bracket_margin: Option<f64>,
}

fn rate_one(cfg: &RunConfig, params: ProblemParams, dir: &Path) -> Result<RateRow, Failure> {
    let p = params.p();
    let result = run(&cfg.datum, params, &cfg.sim)?;
    write_run(&result, dir)?;
    let predicted = rate_exponent(p)?;
    let fit = fit_rate(&result.deviation, cfg.fit_window, predicted)?;
    let regime = classify_regime(p, DEFAULT_BAND)?.regime;
    let bracket_margin = if regime == Regime::LiapunovStable {
        let ev = KernelEvaluator::with_defaults(cfg.datum.clone(), params)?;
        let samples = transitional_bracket(&result, &ev, cfg.fit_window)?;
        let mut text = String::from("t,sup_deviation,c_minus_origin,sup_w,c_plus_origin\n");
        for s in &samples {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(s.t),
                fmt_f64(s.deviation),
                fmt_f64(s.lower),
                fmt_f64(s.upper),
                fmt_f64(s.c_plus_at_origin)
            ));
        }
        fs::write(dir.join("bracket.csv"), text).map_err(Error::from)?;
        Some(bracket_margin(&samples, BRACKET_SLACK))
    } else {
        None
    };
    Ok(RateRow {
        p,
        predicted,
        fitted: fit.slope,
        r2: fit.r_squared,
        regime,
        bracket_margin,
    })
}

pub fn rate(config: Option<&Path>, out: &Path) -> Outcome {
    let cfg = load(config)?;
    let rows: Vec<Result<RateRow, Failure>> = cfg
        .params
        .par_iter()
        .map(|&params| rate_one(&cfg, params, &run_dir(out, params.p(), true)))
        .collect();
    let rows: Vec<RateRow> = rows.into_iter().collect::<Result<_, _>>()?;
    let mut table = String::from("p,predicted_slope,fitted_slope,r2,regime\n");
    let mut failures = Vec::new();
    for r in &rows {
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.p),
            fmt_f64(r.predicted),
            fmt_f64(r.fitted),
            fmt_f64(r.r2),
            r.regime.as_str()
        ));
        println!(
            "p = {}: slope {:.4} (predicted {:.4}), r2 {:.6}, {}",
            r.p,
            r.fitted,
            r.predicted,
            r.r2,
            r.regime.as_str()
        );
        if (r.fitted - r.predicted).abs() > SLOPE_TOLERANCE {
            failures.push(format!(
                "p = {}: slope error {:.3e}",
                r.p,
                r.fitted - r.predicted
            ));
        }
        if let Some(m) = r.bracket_margin.filter(|&m| m > 0.0) {
            failures.push(format!(
                "p = {}: deviation leaves the bracket by {m:.3e}",
                r.p
            ));
        }
    }
    fs::create_dir_all(out).map_err(Error::from)?;
    fs::write(out.join("rate_table.csv"), table).map_err(Error::from)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::checks(failures.join("; ")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelQuantity {
    /// Heat evolution D of the datum.
    #[value(name = "D")]
    Heat,
    /// Spatial derivative of D.
    #[value(name = "Dx")]
    HeatDx,
    /// D at unit time (t is ignored).
    #[value(name = "Delta")]
    Delta,
    /// Excess E at unit time (t is ignored).
    #[value(name = "E")]
    Excess,
    /// Linearised perturbation W, t >= 1.
    #[value(name = "W")]
    Linearized,
    #[value(name = "uh")]
    Homogeneous,
    #[value(name = "usub")]
    Subsolution,
    /// u_h + W, t >= 1.
    #[value(name = "usup")]
    Supersolution,
    /// Upper envelope.
    #[value(name = "uplus")]
    EnvelopeUpper,
    #[value(name = "c_minus")]
    CMinus,
    /// t > 1.
    #[value(name = "c_plus")]
    CPlus,
    /// |x| >= 1.
    #[value(name = "tail_bound")]
    TailBound,
}

impl KernelQuantity {
    fn name(&self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn eval(&self, ev: &KernelEvaluator, x: f64, t: f64) -> fujita_core::Result<f64> {
        match self {
            Self::Heat => ev.heat(x, t),
            Self::HeatDx => ev.heat_dx(x, t),
            Self::Delta => Ok(ev.delta(x)),
            Self::Excess => Ok(ev.excess(x)),
            Self::Linearized => ev.linearized(x, t),
            Self::Homogeneous => ev.params().homogeneous(t),
            Self::Subsolution => ev.subsolution(x, t),
            Self::Supersolution => ev.supersolution(x, t),
            Self::EnvelopeUpper => ev.envelope_upper(x, t),
            Self::CMinus => ev.c_minus(x, t),
            Self::CPlus => ev.c_plus(x, t),
            Self::TailBound => ev.tail_bound(x, t),
        }
    }
}

fn parse_lattice(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Failure::config(format!("--x expects `lo,hi,n`, got `{spec}`"));
    let [lo, hi, n] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn parse_times(spec: &str) -> Result<Vec<f64>, Failure> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| Failure::config(format!("--t: `{s}` is not a time")))
        })
        .collect()
}

pub fn kernels(
    config: Option<&Path>,
    out: &Path,
    p: Option<f64>,
    quantity: KernelQuantity,
    x: &str,
    t: &str,
) -> Outcome {
    let (datum, file_p) = match config {
        Some(path) => {
            let cfg = RunConfig::from_file(path)?;
            let p = cfg.single_params().ok().map(|q| q.p());
            (cfg.datum, p)
        }
        None => (InitialDatum::tent(), None),
    };
    let p = p
        .or(file_p)
        .ok_or_else(|| Failure::config("give --p or a config with a single `p`"))?;
    let params = ProblemParams::new(p)?;
    let ev = KernelEvaluator::with_defaults(datum, params)?;
    let xs = parse_lattice(x)?;
    let ts = parse_times(t)?;
    let points: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (x, t)))
        .collect();
    let rows: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|&(x, t)| quantity.eval(&ev, x, t).map(|v| (x, t, v)))
        .collect::<fujita_core::Result<_>>()?;
    fs::create_dir_all(out).map_err(Error::from)?;
    let path = out.join(format!("{}.csv", quantity.name()));
    write_xt_table(&path, &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

pub fn exponents(n_max: u32, out: Option<&Path>) -> Outcome {
    if n_max == 0 {
        return Err(Failure::config("--n-max must be at least 1"));
    }
    let mut table = String::from("N,p_minus,p_plus,product\n");
    for n in 1..=n_max {
        let c = critical_exponents(n as i64)?;
        table.push_str(&format!(
            "{},{},{},{}\n",
            n,
            fmt_f64(c.p_minus),
            fmt_f64(c.p_plus),
            fmt_f64(c.product())
        ));
    }
    print!("{table}");
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(Error::from)?;
        fs::write(out.join("exponents.csv"), &table).map_err(Error::from)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_specs() {
        assert_eq!(parse_lattice("-1,1,3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_lattice("2,2,1").unwrap(), vec![2.0]);
        assert!(parse_lattice("1,0,3").is_err());
        assert!(parse_lattice("0,1").is_err());
        assert_eq!(parse_times("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_times("1,a").is_err());
    }

    #[test]
    fn domain_errors_map_to_config_failures() {
        let ev =
            KernelEvaluator::with_defaults(InitialDatum::tent(), ProblemParams::new(0.5).unwrap())
                .unwrap();
        let err = KernelQuantity::Linearized.eval(&ev, 0.0, 0.5).unwrap_err();
        assert_eq!(Failure::from(err).code, 2);
        assert_eq!(Failure::from(Error::SingularSystem(3)).code, 3);
    }

    #[test]
    fn quantity_names() {
        assert_eq!(KernelQuantity::Linearized.name(), "W");
        assert_eq!(KernelQuantity::CMinus.name(), "c_minus");
    }
}
