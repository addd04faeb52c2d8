//! Command-line interface.
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible constraint,
//! 4 verification failure.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::equilibrium::{
    classify_regime, constrained_threshold, match_constraint, precommitment_threshold,
    solve_threshold, EquilibriumSolution,
};
use crate::error::Error;
use crate::model::{Model, ModelParams};
use crate::montecarlo::{
    default_horizon, simulate_reward, simulate_ruin_probability, simulate_threshold, SimConfig,
    SimEstimate, ThresholdStrategy,
};
use crate::output::{format_number, Format, Table};
use crate::verify::{hjb_residual, shape_check, smooth_fit_check, HjbGrid};

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } | Error::CertainRuin => EXIT_INFEASIBLE,
            Error::Bracket(_) => EXIT_VERIFICATION,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::invalid(format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parsed invocation.
#[derive(Debug, Parser)]
#[command(
    name = "equidiv",
    version,
    about = "Equilibrium dividend thresholds under a discounted ruin penalty"
)]
pub struct RunConfig {
    /// File of `key=value` lines supplying parameters; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Print progress information to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lmax: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Constraint level (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Initial surplus (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Number of paths (default 10000).
    #[arg(long)]
    pub paths: Option<usize>,
    /// Time step (default 0.001).
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Truncation time (default 15 / min(delta, beta)).
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pair each path with its mirror image.
    #[arg(long)]
    pub antithetic: bool,
    /// Detect ruin only at grid points.
    #[arg(long)]
    pub no_bridge: bool,
    /// Constant payout rate for the ruin-probability row (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Beta,
    Lambda,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium threshold and regime.
    Solve(ModelArgs),
    /// Equilibrium threshold over a range of beta or lambda.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Geometric instead of linear spacing.
        #[arg(long)]
        log: bool,
    },
    /// Threshold and multiplier meeting `w(x0, b) <= alpha`.
    Match {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
    },
    /// Monte Carlo estimates next to their closed forms.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Residual, smooth-fit and shape checks of the equilibrium value function.
    Verify(ModelArgs),
    /// Data behind one of the threshold figures.
    Figure {
        #[arg(long)]
        id: u32,
    },
}

fn parse_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::invalid(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: [&str; 14] = [
    "mu", "sigma", "delta", "beta", "lmax", "lambda", "alpha", "x0", "paths", "dt", "horizon",
    "seed", "rate", "t0",
];

/// Parameter file values, consulted when a flag is absent.
struct FileValues(BTreeMap<String, String>);

impl FileValues {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let map = match path {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::invalid(format!("unknown config key: {k}")));
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::invalid(format!("invalid value for {key}: {v}"))),
        }
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn require(&self, flag: Option<f64>, key: &str) -> CliResult<f64> {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::invalid(format!("missing parameter: {key}")))
    }
}

struct Ctx {
    file: FileValues,
    verbose: u8,
}

impl Ctx {
    /// `lambda_default` is used when neither flag nor file sets lambda.
    fn params(&self, m: &ModelArgs, lambda_default: Option<f64>) -> CliResult<ModelParams> {
        let f = &self.file;
        let lambda = match f.pick(m.lambda, "lambda")? {
            Some(v) => v,
            None => lambda_default
                .ok_or_else(|| CliError::invalid("missing parameter: lambda".to_string()))?,
        };
        Ok(ModelParams {
            mu: f.require(m.mu, "mu")?,
            sigma: f.require(m.sigma, "sigma")?,
            delta: f.require(m.delta, "delta")?,
            beta: f.require(m.beta, "beta")?,
            lmax: f.require(m.lmax, "lmax")?,
            lambda,
            alpha: f.pick(m.alpha, "alpha")?.unwrap_or(1.0),
        })
    }

    fn model(&self, m: &ModelArgs, lambda_default: Option<f64>) -> CliResult<Model> {
        let params = self.params(m, lambda_default)?;
        let model = Model::new(params)?;
        self.log(&format!("parameters: {params:?}"));
        Ok(model)
    }

    fn log(&self, msg: &str) {
        if self.verbose > 0 {
            eprintln!("{msg}");
        }
    }
}

fn describe_params(t: &mut Table, p: &ModelParams) {
    t.meta_num("mu", p.mu)
        .meta_num("sigma", p.sigma)
        .meta_num("delta", p.delta)
        .meta_num("beta", p.beta)
        .meta_num("lmax", p.lmax)
        .meta_num("lambda", p.lambda)
        .meta_num("alpha", p.alpha);
}

fn cmd_solve(ctx: &Ctx, m: &ModelArgs) -> CliResult<Table> {
    let model = ctx.model(m, None)?;
    let sol = solve_threshold(&model)?;
    let report = classify_regime(&model);
    let mut t = Table::new(&["b_star", "regime", "b_bar", "capital_lambda", "g_residual"]);
    describe_params(&mut t, model.params());
    t.push(vec![
        sol.b_star.into(),
        sol.regime.as_str().into(),
        report.b_bar.into(),
        report.capital_lambda.into(),
        sol.residual.into(),
    ]);
    Ok(t)
}

fn grid(from: f64, to: f64, steps: usize, log: bool) -> CliResult<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) || from == to || steps < 2 {
        return Err(CliError::invalid(
            "empty range: need finite --from != --to and --steps >= 2",
        ));
    }
    if log && !(from * to > 0.0) {
        return Err(CliError::invalid(
            "logarithmic spacing needs --from and --to of the same sign, both nonzero",
        ));
    }
    Ok((0..steps)
        .map(|i| {
            let s = i as f64 / (steps - 1) as f64;
            if i == 0 {
                from
            } else if i + 1 == steps {
                to
            } else if log {
                from.signum() * (from.abs().ln() + s * (to.abs().ln() - from.abs().ln())).exp()
            } else {
                from + s * (to - from)
            }
        })
        .collect())
}

fn cmd_sweep(ctx: &Ctx, m: &ModelArgs, param: SweepParam, values: &[f64]) -> CliResult<Table> {
    let mut args = m.clone();
    // the swept parameter needs no value of its own
    match param {
        SweepParam::Beta => args.beta = Some(args.beta.unwrap_or(values[0])),
        SweepParam::Lambda => args.lambda = Some(args.lambda.unwrap_or(values[0])),
    }
    let base = ctx.model(&args, None)?;
    let mut t = Table::new(&["param", "value", "b_star", "regime"]);
    t.meta_num("b_bar", base.classical_threshold());
    describe_params(&mut t, base.params());
    let name = match param {
        SweepParam::Beta => "beta",
        SweepParam::Lambda => "lambda",
    };
    for &v in values {
        let model = match param {
            SweepParam::Beta => base.with_beta(v)?,
            SweepParam::Lambda => base.with_lambda(v)?,
        };
        let sol = solve_threshold(&model)?;
        t.push(vec![
            name.into(),
            v.into(),
            sol.b_star.into(),
            sol.regime.as_str().into(),
        ]);
    }
    Ok(t)
}

fn cmd_match(ctx: &Ctx, m: &ModelArgs, x0: Option<f64>) -> CliResult<Table> {
    let x0 = ctx.file.require(x0, "x0")?;
    if ctx.file.pick(m.alpha, "alpha")?.is_none() {
        return Err(CliError::invalid("missing parameter: alpha"));
    }
    let model = ctx.model(m, Some(0.0))?;
    let alpha = model.params().alpha;
    let x_bar = model.x_bar();
    let matched = match match_constraint(x0, &model, alpha) {
        Err(Error::Infeasible { .. }) => {
            return Err(CliError {
                code: EXIT_INFEASIBLE,
                message: format!(
                    "constraint infeasible: x0 ≤ x_bar (x0 = {}, x_bar = {})",
                    format_number(x0),
                    format_number(x_bar)
                ),
            })
        }
        other => other?,
    };
    let mut t = Table::new(&[
        "x0",
        "x_bar",
        "b_star",
        "lambda_star",
        "w",
        "slack",
        "binding",
    ]);
    describe_params(&mut t, model.params());
    t.push(vec![
        x0.into(),
        x_bar.into(),
        matched.b_star.into(),
        matched.lambda_star.into(),
        matched.w().into(),
        matched.slack.into(),
        matched.binding.into(),
    ]);
    Ok(t)
}

fn sim_config(ctx: &Ctx, s: &SimArgs, params: &ModelParams) -> CliResult<SimConfig> {
    let f = &ctx.file;
    let t0 = f.get::<f64>("t0")?.unwrap_or(0.0);
    let config = SimConfig {
        x0: f.pick(s.x0, "x0")?.unwrap_or(1.0),
        t0,
        dt: f.pick(s.dt, "dt")?.unwrap_or(1e-3),
        horizon: f
            .pick(s.horizon, "horizon")?
            .unwrap_or_else(|| default_horizon(params, t0)),
        paths: f.pick(s.paths, "paths")?.unwrap_or(10_000),
        seed: f.pick(s.seed, "seed")?.unwrap_or(0),
        antithetic: s.antithetic,
        bridge: !s.no_bridge,
    };
    config.validate()?;
    Ok(config)
}

fn sim_row(t: &mut Table, name: &str, est: &SimEstimate, closed_form: f64) {
    t.push(vec![
        name.into(),
        est.mean.into(),
        est.stderr.into(),
        closed_form.into(),
        (est.mean - closed_form).abs().into(),
        est.agrees_with(closed_form, 3.0).into(),
    ]);
}

fn cmd_simulate(ctx: &Ctx, m: &ModelArgs, s: &SimArgs) -> CliResult<Table> {
    let model = ctx.model(m, None)?;
    let p = *model.params();
    let cfg = sim_config(ctx, s, &p)?;
    let rate = ctx.file.pick(s.rate, "rate")?.unwrap_or(0.0);
    if !(rate.is_finite() && (0.0..=p.lmax).contains(&rate)) {
        return Err(CliError::invalid("rate must lie in [0, lmax]"));
    }
    let sol = solve_threshold(&model)?;
    ctx.log(&format!("b_star = {}", sol.b_star));

    let mut t = Table::new(&[
        "quantity",
        "estimate",
        "stderr",
        "closed_form",
        "abs_diff",
        "pass",
    ]);
    t.meta_num("x0", cfg.x0)
        .meta_num("t0", cfg.t0)
        .meta_num("dt", cfg.dt)
        .meta_num("horizon", cfg.horizon)
        .meta("paths", cfg.paths)
        .meta("seed", cfg.seed)
        .meta("antithetic", cfg.antithetic)
        .meta("bridge", cfg.bridge)
        .meta_num("b_star", sol.b_star);
    describe_params(&mut t, &p);

    let reward_cf = sol.nu(cfg.t0, cfg.t0, cfg.x0);
    if p.beta > 0.0 {
        let est = simulate_threshold(sol.b_star, &model, &cfg)?;
        t.meta_num("reward_truncation_bound", est.reward.truncation_bound)
            .meta_num("laplace_truncation_bound", est.laplace.truncation_bound);
        sim_row(&mut t, "reward", &est.reward, reward_cf);
        sim_row(
            &mut t,
            "laplace",
            &est.laplace,
            model.laplace_w(cfg.x0, sol.b_star),
        );
    } else {
        let strategy = ThresholdStrategy {
            b: sol.b_star,
            lmax: p.lmax,
        };
        let est = simulate_reward(&strategy, &model, &cfg)?;
        t.meta_num("reward_truncation_bound", est.truncation_bound);
        sim_row(&mut t, "reward", &est, reward_cf);
    }
    let ruin = simulate_ruin_probability(rate, &model, &cfg)?;
    let psi = crate::closed_form::ruin_probability(cfg.x0, rate, p.mu, p.sigma).unwrap_or(1.0);
    t.meta_num("ruin_rate", rate)
        .meta_num("ruin_tail_bound", ruin.truncation_bound);
    sim_row(&mut t, "ruin_probability", &ruin, psi);
    Ok(t)
}

fn check_row(t: &mut Table, name: &str, value: f64, tol: f64, pass: bool) -> bool {
    t.push(vec![name.into(), value.into(), tol.into(), pass.into()]);
    pass
}

fn cmd_verify(ctx: &Ctx, m: &ModelArgs) -> CliResult<(Table, bool)> {
    let model = ctx.model(m, None)?;
    let sol: EquilibriumSolution = solve_threshold(&model)?;
    let mut t = Table::new(&["check", "value", "tolerance", "pass"]);
    t.meta_num("b_star", sol.b_star)
        .meta("regime", sol.regime.as_str());
    describe_params(&mut t, model.params());
    let mut ok = true;
    let hjb = hjb_residual(&model, &sol, &HjbGrid::default())?;
    ok &= check_row(
        &mut t,
        "hjb_residual_below",
        hjb.max_residual_below,
        1e-8,
        hjb.max_residual_below < 1e-8,
    );
    ok &= check_row(
        &mut t,
        "hjb_residual_above",
        hjb.max_residual_above,
        1e-8,
        hjb.max_residual_above < 1e-8,
    );
    ok &= check_row(
        &mut t,
        "boundary_deviation",
        hjb.boundary_deviation,
        0.0,
        hjb.boundary_deviation == 0.0,
    );
    ok &= check_row(
        &mut t,
        "sup_violation",
        hjb.sup_violation,
        1e-10,
        hjb.sup_violation <= 1e-10,
    );
    let shape = shape_check(&sol, 2001)?;
    ok &= check_row(
        &mut t,
        "min_slope",
        shape.min_slope,
        0.0,
        shape.min_slope > 0.0,
    );
    ok &= check_row(
        &mut t,
        "max_curvature",
        shape.max_curvature,
        0.0,
        shape.max_curvature < 0.0,
    );
    if sol.b_star > 0.0 {
        let fit = smooth_fit_check(&model, sol.b_star)?;
        ok &= check_row(
            &mut t,
            "slope_gap_at_b_star",
            fit.equilibrium_gap,
            1e-10,
            fit.equilibrium_gap < 1e-10,
        );
        ok &= check_row(
            &mut t,
            "curvature_gap_at_b_star",
            fit.curvature_gap,
            1e-6,
            fit.curvature_gap < 1e-6,
        );
        let bands = shape.slope_above_one_below && shape.slope_at_most_one_above;
        ok &= check_row(&mut t, "slope_bands", bands as u8 as f64, 1.0, bands);
    } else {
        ok &= check_row(
            &mut t,
            "slope_at_zero",
            shape.slope_at_zero,
            1.0,
            shape.slope_at_zero <= 1.0 + 1e-12,
        );
    }
    Ok((t, ok))
}

/// Figure parameter sets.
fn figure_params(lmax: f64, beta: f64, lambda: f64, alpha: f64) -> ModelParams {
    ModelParams {
        mu: 2.0,
        sigma: 1.0,
        delta: 0.1,
        beta,
        lmax,
        lambda,
        alpha,
    }
}

fn beta_grid() -> Vec<f64> {
    (-60..=30).map(|k| 10f64.powf(k as f64 / 10.0)).collect()
}

fn lambda_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((-20..=30).map(|k| -(10f64.powf(k as f64 / 10.0))))
        .collect()
}

fn figure_beta_sweep(lmax: f64) -> CliResult<Table> {
    let base = Model::new(figure_params(lmax, 0.2, -50.0, 0.5))?;
    let mut t = Table::new(&["beta", "b_star", "b_bar", "regime"]);
    describe_params(&mut t, base.params());
    t.meta("varies", "beta");
    let b_bar = base.classical_threshold();
    for beta in std::iter::once(0.0).chain(beta_grid()) {
        let sol = solve_threshold(&base.with_beta(beta)?)?;
        t.push(vec![
            beta.into(),
            sol.b_star.into(),
            b_bar.into(),
            sol.regime.as_str().into(),
        ]);
    }
    Ok(t)
}

fn figure_lambda_sweep(lmax: f64) -> CliResult<Table> {
    let base = Model::new(figure_params(lmax, 0.2, -50.0, 0.5))?;
    let limit = base.with_beta(0.0)?;
    let mut t = Table::new(&["lambda", "b_star", "b_star_beta0", "b_bar"]);
    describe_params(&mut t, base.params());
    t.meta("varies", "lambda");
    let b_bar = base.classical_threshold();
    for lambda in lambda_grid() {
        let sol = solve_threshold(&base.with_lambda(lambda)?)?;
        let sol0 = solve_threshold(&limit.with_lambda(lambda)?)?;
        t.push(vec![
            lambda.into(),
            sol.b_star.into(),
            sol0.b_star.into(),
            b_bar.into(),
        ]);
    }
    Ok(t)
}

fn figure_regions() -> CliResult<Table> {
    let model = Model::new(figure_params(4.0, 0.2, -10.0, 0.01))?;
    let alpha = model.params().alpha;
    let x_bar = model.x_bar();
    let b_bar = model.classical_threshold();
    let b_lambda = solve_threshold(&model)?.b_star;
    let mut t = Table::new(&[
        "x",
        "x_bar",
        "b_bar",
        "b_tilde",
        "b_lambda_m10",
        "b_precommit_m10",
    ]);
    describe_params(&mut t, model.params());
    t.meta_num("x_bar", x_bar);
    let x_max = 4.0;
    let n = 200;
    for i in 1..=n {
        // quadratic spacing resolves the divergence of b_tilde at x_bar
        let s = i as f64 / n as f64;
        let x = x_bar + (x_max - x_bar) * s * s;
        t.push(vec![
            x.into(),
            x_bar.into(),
            b_bar.into(),
            constrained_threshold(x, &model, alpha)?.into(),
            b_lambda.into(),
            precommitment_threshold(x, &model)?.into(),
        ]);
    }
    Ok(t)
}

fn cmd_figure(id: u32) -> CliResult<Table> {
    let mut t = match id {
        1 => figure_regions()?,
        2 => figure_beta_sweep(1.9)?,
        3 => figure_lambda_sweep(1.9)?,
        4 => figure_beta_sweep(4.0)?,
        5 => figure_lambda_sweep(4.0)?,
        _ => {
            return Err(CliError::invalid(format!(
                "unknown figure id {id}; expected 1..=5"
            )))
        }
    };
    t.meta.insert(0, ("figure".into(), id.to_string()));
    Ok(t)
}

/// Runs a parsed invocation, writing results to `--out` or `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let ctx = Ctx {
        file: FileValues::load(cfg.config.as_deref())?,
        verbose: cfg.verbose,
    };
    let mut verified = true;
    let table = match &cfg.command {
        Command::Solve(m) => cmd_solve(&ctx, m)?,
        Command::Sweep {
            model,
            param,
            from,
            to,
            steps,
            log,
        } => {
            let values = grid(*from, *to, *steps, *log)?;
            cmd_sweep(&ctx, model, *param, &values)?
        }
        Command::Match { model, x0 } => cmd_match(&ctx, model, *x0)?,
        Command::Simulate { model, sim } => cmd_simulate(&ctx, model, sim)?,
        Command::Verify(m) => {
            let (t, ok) = cmd_verify(&ctx, m)?;
            verified = ok;
            t
        }
        Command::Figure { id } => cmd_figure(*id)?,
    };
    match &cfg.out {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            table.write(cfg.format, &mut file)?;
        }
        None => table.write(cfg.format, stdout)?,
    }
    if verified {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_VERIFICATION,
            message: "verification failed".into(),
        })
    }
}

/// Entry point for the binary: parses `args` and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cfg, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
