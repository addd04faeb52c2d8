//! Euler–Maruyama simulation of the controlled surplus.
//!
//! Every sample unit (a single path, an antithetic pair, or a pair of paths
//! sharing their noise) draws from its own ChaCha stream selected by the unit
//! index, and per-chunk statistics are merged in index order. Estimates are
//! therefore bit-identical for a fixed seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::ruin_probability;
use crate::equilibrium::{solve_threshold, ConstraintMatch};
use crate::error::{Error, Result};
use crate::model::{Model, ModelParams};

/// Units per parallel chunk. Changing it changes the reduction tree.
const CHUNK: usize = 256;

/// Exponent below which a bridge crossing probability is treated as zero.
const BRIDGE_CUTOFF: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub x0: f64,
    pub t0: f64,
    pub dt: f64,
    /// Absolute truncation time `T > t0`.
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Also count ruin between grid points using the Brownian-bridge crossing probability.
    pub bridge: bool,
}

impl SimConfig {
    /// Defaults for initial surplus `x0`: `dt = 1e-3`, `10^4` paths, seed 0,
    /// and a horizon at which the slower discount factor is `e^{-15}`.
    pub fn new(x0: f64, params: &ModelParams) -> Self {
        Self {
            x0,
            t0: 0.0,
            dt: 1e-3,
            horizon: default_horizon(params, 0.0),
            paths: 10_000,
            seed: 0,
            antithetic: false,
            bridge: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.x0.is_finite() && self.x0 >= 0.0) {
            return bad("x0 must be finite and ≥ 0");
        }
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            return bad("t0 must be finite and ≥ 0");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be > 0");
        }
        if !(self.horizon.is_finite() && self.horizon > self.t0) {
            return bad("horizon must exceed t0");
        }
        if self.paths < 1 {
            return bad("paths must be ≥ 1");
        }
        if self.antithetic && !self.paths.is_multiple_of(2) {
            return bad("antithetic sampling needs an even number of paths");
        }
        if self.steps() > u32::MAX as usize {
            return bad("too many time steps");
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        ((self.horizon - self.t0) / self.dt).round().max(1.0) as usize
    }

    fn step_of(&self, t: f64) -> usize {
        ((t - self.t0) / self.dt).round().max(0.0) as usize
    }
}

/// `t0 + 15 / min(delta, beta)`, ignoring `beta` when it is zero.
pub fn default_horizon(params: &ModelParams, t0: f64) -> f64 {
    let rate = if params.beta > 0.0 {
        params.delta.min(params.beta)
    } else {
        params.delta
    };
    t0 + 15.0 / rate
}

/// Feedback payout law `(t, x) -> l`. Values outside `[0, lmax]` are clamped
/// by the simulator and counted in [`SimEstimate::clamped`].
pub trait FeedbackStrategy: Sync {
    fn rate(&self, t: f64, x: f64) -> f64;
}

/// Pay `lmax` at or above `b`, nothing below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStrategy {
    pub b: f64,
    pub lmax: f64,
}

impl FeedbackStrategy for ThresholdStrategy {
    fn rate(&self, _t: f64, x: f64) -> f64 {
        if x >= self.b {
            self.lmax
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRate(pub f64);

impl FeedbackStrategy for ConstantRate {
    fn rate(&self, _t: f64, _x: f64) -> f64 {
        self.0
    }
}

/// `deviation` on `[start, start + h)`, `base` afterwards.
#[derive(Debug, Clone, Copy)]
pub struct Perturbed<'a, B: ?Sized, D: ?Sized> {
    pub base: &'a B,
    pub deviation: &'a D,
    pub start: f64,
    pub h: f64,
}

impl<B: FeedbackStrategy + ?Sized, D: FeedbackStrategy + ?Sized> FeedbackStrategy
    for Perturbed<'_, B, D>
{
    fn rate(&self, t: f64, x: f64) -> f64 {
        if t < self.start + self.h {
            self.deviation.rate(t, x)
        } else {
            self.base.rate(t, x)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    /// Sample standard deviation of the independent units over `sqrt(units)`.
    pub stderr: f64,
    pub n_paths: usize,
    pub n_ruined: usize,
    /// Fraction of paths still alive at the horizon.
    pub truncation_fraction: f64,
    /// Bound on the bias caused by stopping at the horizon.
    pub truncation_bound: f64,
    /// Steps at which the strategy returned a rate outside `[0, lmax]`.
    pub clamped: u64,
    pub seed: u64,
}

impl SimEstimate {
    /// `|mean - reference| <= k stderr + truncation_bound`.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.stderr + self.truncation_bound
    }
}

#[derive(Debug, Clone, Default)]
struct PathOutcome {
    dividends: f64,
    ruin_time: Option<f64>,
    x_end: f64,
    clamped: u64,
    /// `(min(t, tau), X_{min(t, tau)})` per requested checkpoint.
    marks: Vec<(f64, f64)>,
}

struct PathRunner<'a> {
    params: &'a ModelParams,
    config: &'a SimConfig,
    steps: usize,
    /// Sorted checkpoint step indices.
    marks: &'a [usize],
}

/// Per-step constants shared by all paths of a run.
struct StepConstants {
    mu: f64,
    lmax: f64,
    dt: f64,
    sd: f64,
    bridge: bool,
    bridge_scale: f64,
    step_weight: f64,
}

struct PathState {
    sign: f64,
    x: f64,
    next_mark: usize,
    out: PathOutcome,
}

impl PathState {
    fn new(x0: f64, t0: f64, sign: f64, n_marks: usize) -> Self {
        Self {
            sign,
            x: x0,
            next_mark: 0,
            out: PathOutcome {
                ruin_time: if x0 <= 0.0 { Some(t0) } else { None },
                marks: Vec::with_capacity(n_marks),
                ..PathOutcome::default()
            },
        }
    }

    fn alive(&self) -> bool {
        self.out.ruin_time.is_none()
    }

    fn record_marks(&mut self, marks: &[usize], n: usize, t: f64) {
        while self.next_mark < marks.len() && marks[self.next_mark] == n {
            self.out.marks.push((t, self.x));
            self.next_mark += 1;
        }
    }

    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn advance<S: FeedbackStrategy + ?Sized>(
        &mut self,
        c: &StepConstants,
        strategy: &S,
        t: f64,
        t_next: f64,
        z: f64,
        discount: f64,
        uniforms: &mut ChaCha8Rng,
    ) {
        let raw = strategy.rate(t, self.x);
        let l = if raw >= 0.0 && raw <= c.lmax {
            raw
        } else {
            self.out.clamped += 1;
            if raw > c.lmax {
                c.lmax
            } else {
                0.0
            }
        };
        let x_next = self.x + (c.mu - l) * c.dt + c.sd * self.sign * z;
        self.out.dividends += l * discount * c.step_weight;
        let crossed = if x_next <= 0.0 {
            true
        } else if c.bridge {
            let e = c.bridge_scale * self.x * x_next;
            e > BRIDGE_CUTOFF && uniforms.random::<f64>() < e.exp()
        } else {
            false
        };
        if crossed {
            self.out.ruin_time = Some(t_next);
            self.x = 0.0;
        } else {
            self.x = x_next;
        }
    }

    fn finish(mut self, end_time: f64, n_marks: usize) -> PathOutcome {
        let end = self.out.ruin_time.unwrap_or(end_time);
        for _ in self.next_mark..n_marks {
            self.out.marks.push((end, self.x.max(0.0)));
        }
        self.out.x_end = self.x;
        self.out
    }
}

impl PathRunner<'_> {
    /// Simulates one path, or two paths driven by the same normals, each
    /// scaled by its own sign. Bridge uniforms come from a separate stream so
    /// that the normal sequence stays aligned across paths.
    fn run_group<A, B>(
        &self,
        (a, sign_a): (&A, f64),
        b: Option<(&B, f64)>,
        mut normals: ChaCha8Rng,
        mut uniforms: ChaCha8Rng,
    ) -> (PathOutcome, Option<PathOutcome>)
    where
        A: FeedbackStrategy + ?Sized,
        B: FeedbackStrategy + ?Sized,
    {
        let p = self.params;
        let cfg = self.config;
        let c = StepConstants {
            mu: p.mu,
            lmax: p.lmax,
            dt: cfg.dt,
            sd: p.sigma * cfg.dt.sqrt(),
            bridge: cfg.bridge,
            bridge_scale: -2.0 / (p.sigma * p.sigma * cfg.dt),
            step_weight: (1.0 - (-p.delta * cfg.dt).exp()) / p.delta,
        };
        let step_discount = (-p.delta * cfg.dt).exp();
        let n_marks = self.marks.len();
        let mut sa = PathState::new(cfg.x0, cfg.t0, sign_a, n_marks);
        let mut sb = b.map(|(_, sign)| PathState::new(cfg.x0, cfg.t0, sign, n_marks));
        let mut discount = 1.0;
        for n in 0..self.steps {
            let b_alive = sb.as_ref().is_some_and(|s| s.alive());
            if !sa.alive() && !b_alive {
                break;
            }
            let t = cfg.t0 + n as f64 * cfg.dt;
            let t_next = cfg.t0 + (n + 1) as f64 * cfg.dt;
            let z: f64 = normals.sample(StandardNormal);
            if sa.alive() {
                sa.record_marks(self.marks, n, t);
                sa.advance(&c, a, t, t_next, z, discount, &mut uniforms);
            }
            if let (Some(state), Some((strategy, _))) = (sb.as_mut(), b) {
                if state.alive() {
                    state.record_marks(self.marks, n, t);
                    state.advance(&c, strategy, t, t_next, z, discount, &mut uniforms);
                }
            }
            discount *= step_discount;
        }
        let end = cfg.t0 + self.steps as f64 * cfg.dt;
        (sa.finish(end, n_marks), sb.map(|s| s.finish(end, n_marks)))
    }
}

fn unit_rngs(seed: u64, unit: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut normals = ChaCha8Rng::seed_from_u64(seed);
    normals.set_stream(2 * unit as u64);
    let mut uniforms = ChaCha8Rng::seed_from_u64(seed);
    uniforms.set_stream(2 * unit as u64 + 1);
    (normals, uniforms)
}

/// Streaming mean/variance (Welford) with counters.
#[derive(Debug, Clone, Default)]
struct Accumulator {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
    paths: usize,
    ruined: usize,
    alive: usize,
    clamped: u64,
    tail: f64,
}

impl Accumulator {
    fn new(width: usize) -> Self {
        Self {
            mean: vec![0.0; width],
            m2: vec![0.0; width],
            ..Self::default()
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for (i, v) in values.iter().enumerate() {
            let d = v - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (v - self.mean[i]);
        }
    }

    fn count(&mut self, o: &PathOutcome) {
        self.paths += 1;
        self.clamped += o.clamped;
        if o.ruin_time.is_some() {
            self.ruined += 1;
        } else {
            self.alive += 1;
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.n > 0 {
            let (na, nb) = (self.n as f64, other.n as f64);
            let n = na + nb;
            for i in 0..self.mean.len() {
                let d = other.mean[i] - self.mean[i];
                self.mean[i] += d * nb / n;
                self.m2[i] += other.m2[i] + d * d * na * nb / n;
            }
            self.n += other.n;
        }
        self.paths += other.paths;
        self.ruined += other.ruined;
        self.alive += other.alive;
        self.clamped += other.clamped;
        self.tail += other.tail;
    }

    fn estimate(&self, i: usize, seed: u64, bound_per_alive: f64) -> SimEstimate {
        let var = if self.n > 1 {
            self.m2[i] / (self.n - 1) as f64
        } else {
            0.0
        };
        let alive_fraction = self.alive as f64 / self.paths as f64;
        SimEstimate {
            mean: self.mean[i],
            stderr: (var / self.n as f64).sqrt(),
            n_paths: self.paths,
            n_ruined: self.ruined,
            truncation_fraction: alive_fraction,
            truncation_bound: alive_fraction * bound_per_alive + self.tail / self.paths as f64,
            clamped: self.clamped,
            seed,
        }
    }
}

/// Runs `units` independent sample units in fixed-size chunks.
///
/// `unit(index, acc)` must push exactly one value vector and count its paths.
fn run_units<F>(units: usize, width: usize, unit: F) -> Accumulator
where
    F: Fn(usize, &mut Accumulator) + Sync,
{
    let chunks: Vec<Accumulator> = (0..units.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new(width);
            for i in c * CHUNK..((c + 1) * CHUNK).min(units) {
                unit(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = Accumulator::new(width);
    for c in &chunks {
        total.merge(c);
    }
    total
}

/// Simulates the paths of one unit (one path, or an antithetic pair).
fn unit_paths<S: FeedbackStrategy + ?Sized>(
    runner: &PathRunner<'_>,
    strategy: &S,
    index: usize,
) -> Vec<PathOutcome> {
    let (normals, uniforms) = unit_rngs(runner.config.seed, index);
    let mirror = runner.config.antithetic.then_some((strategy, -1.0));
    let (a, b) = runner.run_group((strategy, 1.0), mirror, normals, uniforms);
    std::iter::once(a).chain(b).collect()
}

/// Paths of `base` and `other` on common noise, per unit: `(base paths, other paths)`.
fn paired_unit_paths<A, B>(
    runner: &PathRunner<'_>,
    base: &A,
    other: &B,
    index: usize,
) -> (Vec<PathOutcome>, Vec<PathOutcome>)
where
    A: FeedbackStrategy + ?Sized,
    B: FeedbackStrategy + ?Sized,
{
    let (normals, uniforms) = unit_rngs(runner.config.seed, index);
    let signs: &[f64] = if runner.config.antithetic {
        &[1.0, -1.0]
    } else {
        &[1.0]
    };
    let mut left = Vec::with_capacity(signs.len());
    let mut right = Vec::with_capacity(signs.len());
    for &sign in signs {
        let (a, b) = runner.run_group(
            (base, sign),
            Some((other, sign)),
            normals.clone(),
            uniforms.clone(),
        );
        left.push(a);
        right.push(b.expect("paired run"));
    }
    (left, right)
}

fn unit_count(config: &SimConfig) -> usize {
    if config.antithetic {
        config.paths / 2
    } else {
        config.paths
    }
}

fn mean_of<F: Fn(&PathOutcome) -> f64>(paths: &[PathOutcome], f: F) -> f64 {
    paths.iter().map(f).sum::<f64>() / paths.len() as f64
}

/// Estimates the reward `E[int e^{-delta(s-t0)} l ds + lambda (e^{-beta(tau-t0)} - alpha)]`.
pub fn simulate_reward<S: FeedbackStrategy + ?Sized>(
    strategy: &S,
    model: &Model,
    config: &SimConfig,
) -> Result<SimEstimate> {
    config.validate()?;
    let p = *model.params();
    let runner = PathRunner {
        params: &p,
        config,
        steps: config.steps(),
        marks: &[],
    };
    let payoff = |o: &PathOutcome| {
        let penalty = match o.ruin_time {
            Some(tau) => (-p.beta * (tau - config.t0)).exp(),
            None => 0.0,
        };
        o.dividends + p.lambda * (penalty - p.alpha)
    };
    let acc = run_units(unit_count(config), 1, |i, acc| {
        let paths = unit_paths(&runner, strategy, i);
        paths.iter().for_each(|o| acc.count(o));
        acc.push(&[mean_of(&paths, payoff)]);
    });
    let elapsed = config.horizon - config.t0;
    let bound =
        (-p.delta * elapsed).exp() * p.lmax / p.delta + p.lambda.abs() * (-p.beta * elapsed).exp();
    Ok(acc.estimate(0, config.seed, bound))
}

/// Estimates `E[e^{-beta (tau - t0)}]` under the threshold-`b` strategy.
pub fn simulate_laplace(b: f64, model: &Model, config: &SimConfig) -> Result<SimEstimate> {
    config.validate()?;
    let p = *model.params();
    if !(p.beta > 0.0) {
        return Err(Error::Precondition(
            "the Laplace transform estimator needs beta > 0".into(),
        ));
    }
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::Domain(format!(
            "threshold must be finite and ≥ 0, got {b}"
        )));
    }
    let strategy = ThresholdStrategy { b, lmax: p.lmax };
    let runner = PathRunner {
        params: &p,
        config,
        steps: config.steps(),
        marks: &[],
    };
    let value = |o: &PathOutcome| match o.ruin_time {
        Some(tau) => (-p.beta * (tau - config.t0)).exp(),
        None => 0.0,
    };
    let acc = run_units(unit_count(config), 1, |i, acc| {
        let paths = unit_paths(&runner, &strategy, i);
        paths.iter().for_each(|o| acc.count(o));
        acc.push(&[mean_of(&paths, value)]);
    });
    let bound = (-p.beta * (config.horizon - config.t0)).exp();
    Ok(acc.estimate(0, config.seed, bound))
}

/// Reward and ruin-time Laplace transform of the threshold-`b` strategy,
/// estimated from the same paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdEstimates {
    pub reward: SimEstimate,
    pub laplace: SimEstimate,
}

pub fn simulate_threshold(b: f64, model: &Model, config: &SimConfig) -> Result<ThresholdEstimates> {
    config.validate()?;
    let p = *model.params();
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::Domain(format!(
            "threshold must be finite and ≥ 0, got {b}"
        )));
    }
    let strategy = ThresholdStrategy { b, lmax: p.lmax };
    let runner = PathRunner {
        params: &p,
        config,
        steps: config.steps(),
        marks: &[],
    };
    let laplace = |o: &PathOutcome| match o.ruin_time {
        Some(tau) => (-p.beta * (tau - config.t0)).exp(),
        None => 0.0,
    };
    let acc = run_units(unit_count(config), 2, |i, acc| {
        let paths = unit_paths(&runner, &strategy, i);
        paths.iter().for_each(|o| acc.count(o));
        let w = mean_of(&paths, laplace);
        let dividends = mean_of(&paths, |o| o.dividends);
        acc.push(&[dividends + p.lambda * (w - p.alpha), w]);
    });
    let elapsed = config.horizon - config.t0;
    let penalty_tail = (-p.beta * elapsed).exp();
    let reward_bound =
        (-p.delta * elapsed).exp() * p.lmax / p.delta + p.lambda.abs() * penalty_tail;
    Ok(ThresholdEstimates {
        reward: acc.estimate(0, config.seed, reward_bound),
        laplace: acc.estimate(1, config.seed, penalty_tail),
    })
}

/// Estimates the probability of ruin before the horizon under a constant rate.
///
/// `truncation_bound` is the average of `psi(X_T, l)` over surviving paths,
/// the expected number of later ruins; it is one per survivor when
/// `mu - l <= 0`.
pub fn simulate_ruin_probability(
    l_const: f64,
    model: &Model,
    config: &SimConfig,
) -> Result<SimEstimate> {
    config.validate()?;
    let p = *model.params();
    let strategy = ConstantRate(l_const);
    let runner = PathRunner {
        params: &p,
        config,
        steps: config.steps(),
        marks: &[],
    };
    let l_eff = l_const.clamp(0.0, p.lmax);
    let acc = run_units(unit_count(config), 1, |i, acc| {
        let paths = unit_paths(&runner, &strategy, i);
        for o in &paths {
            acc.count(o);
            if o.ruin_time.is_none() {
                acc.tail += ruin_probability(o.x_end, l_eff, p.mu, p.sigma).unwrap_or(1.0);
            }
        }
        acc.push(&[mean_of(&paths, |o| o.ruin_time.is_some() as u8 as f64)]);
    });
    Ok(acc.estimate(0, config.seed, 0.0))
}

/// Difference quotient `(J(base) - J(l_h)) / h` with common random numbers,
/// where `l_h` follows `deviation` on `[t0, t0 + h)` and `base` afterwards.
pub fn perturbation_quotient<B, D>(
    base: &B,
    deviation: &D,
    h: f64,
    model: &Model,
    config: &SimConfig,
) -> Result<SimEstimate>
where
    B: FeedbackStrategy + ?Sized,
    D: FeedbackStrategy + ?Sized,
{
    config.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidConfig("h must be > 0".into()));
    }
    let p = *model.params();
    let perturbed = Perturbed {
        base,
        deviation,
        start: config.t0,
        h,
    };
    let runner = PathRunner {
        params: &p,
        config,
        steps: config.steps(),
        marks: &[],
    };
    let payoff = |o: &PathOutcome| {
        let penalty = match o.ruin_time {
            Some(tau) => (-p.beta * (tau - config.t0)).exp(),
            None => 0.0,
        };
        o.dividends + p.lambda * penalty
    };
    let acc = run_units(unit_count(config), 1, |i, acc| {
        let (a, b) = paired_unit_paths(&runner, base, &perturbed, i);
        a.iter().for_each(|o| acc.count(o));
        acc.push(&[(mean_of(&a, payoff) - mean_of(&b, payoff)) / h]);
    });
    // Both members of a pair are truncated at the same time.
    let elapsed = config.horizon - config.t0;
    let bound = 2.0
        * ((-p.delta * elapsed).exp() * p.lmax / p.delta
            + p.lambda.abs() * (-p.beta * elapsed).exp())
        / h;
    Ok(acc.estimate(0, config.seed, bound))
}

/// [`perturbation_quotient`] with the equilibrium threshold law as the base strategy.
pub fn perturbation_test<D: FeedbackStrategy + ?Sized>(
    deviation: &D,
    h: f64,
    model: &Model,
    config: &SimConfig,
) -> Result<SimEstimate> {
    let solution = solve_threshold(model)?;
    let base = ThresholdStrategy {
        b: solution.b_star,
        lmax: model.params().lmax,
    };
    perturbation_quotient(&base, deviation, h, model, config)
}

/// Estimates `E[e^{-beta (t∧tau - t0)} w(X_{t∧tau}, b*)]` at each checkpoint
/// along paths of the matched threshold strategy started from `matched.x0`.
///
/// The horizon is the last checkpoint; `config.x0` and `config.horizon` are ignored.
pub fn martingale_check(
    matched: &ConstraintMatch,
    model: &Model,
    checkpoints: &[f64],
    config: &SimConfig,
) -> Result<Vec<SimEstimate>> {
    let last = checkpoints.iter().cloned().fold(f64::NAN, f64::max);
    if checkpoints.is_empty()
        || checkpoints
            .iter()
            .any(|c| !(c.is_finite() && *c >= config.t0))
    {
        return Err(Error::InvalidConfig(
            "checkpoints must be finite and ≥ t0".into(),
        ));
    }
    let config = SimConfig {
        x0: matched.x0,
        horizon: if last > config.t0 {
            last
        } else {
            config.t0 + config.dt
        },
        ..*config
    };
    config.validate()?;
    let p = *model.params();
    let marks: Vec<usize> = checkpoints.iter().map(|c| config.step_of(*c)).collect();
    let mut order: Vec<usize> = (0..marks.len()).collect();
    order.sort_by_key(|&i| marks[i]);
    let sorted: Vec<usize> = order.iter().map(|&i| marks[i]).collect();
    let strategy = ThresholdStrategy {
        b: matched.b_star,
        lmax: p.lmax,
    };
    let runner = PathRunner {
        params: &p,
        config: &config,
        steps: config.steps(),
        marks: &sorted,
    };
    let level =
        |(t, x): (f64, f64)| (-p.beta * (t - config.t0)).exp() * model.laplace_w(x, matched.b_star);
    let n = checkpoints.len();
    let acc = run_units(unit_count(&config), n, |i, acc| {
        let paths = unit_paths(&runner, &strategy, i);
        paths.iter().for_each(|o| acc.count(o));
        let mut values = vec![0.0; n];
        for (slot, &orig) in order.iter().enumerate() {
            values[orig] = mean_of(&paths, |o| level(o.marks[slot]));
        }
        acc.push(&values);
    });
    Ok((0..n).map(|i| acc.estimate(i, config.seed, 0.0)).collect())
}
