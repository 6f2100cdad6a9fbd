//! Randomized property suites tying the closed-form engines to the
//! quadrature and Monte Carlo oracles.
//!
//! Each suite draws its instances from a ChaCha20 stream derived from the
//! configured seed, so a report is reproducible bit for bit.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::chain::{chain_state, conditional_stats_k, ChainQuery, MeasurementChain};
use crate::conditional::{
    backward_density, backward_stats, conditional_state, conditional_state_normalized,
    forward_density, forward_stats,
    marginal_x1, marginal_x2,
};
use crate::error::Error;
use crate::joint::{joint_model, post_first_state};
use crate::kraus::{completeness_defect, effect_at, kraus_at, MeasurementStage};
use crate::linalg::{eigh, ComplexMatrix};
use crate::mpur::mpur_check;
use crate::oracle::{
    mc_conditional_variance, quad_pair_moment, quad_pointer_variances, quad_stats,
    quad_sum_stats, quad_unread_update, sample_chain, pointer_breaks, QuadratureConfig,
    SamplerConfig,
};
use crate::pointer::{GaussianPairSum, Pointer};
use crate::random::{random_density, random_observable, random_pure, random_sigma};
use crate::spin;
use crate::state::{DensityMatrix, Observable, PureState};

/// A named group of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Pointer,
    Kraus,
    Joint,
    Conditional,
    Nseq,
    Mpur,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Pointer,
        Suite::Kraus,
        Suite::Joint,
        Suite::Conditional,
        Suite::Nseq,
        Suite::Mpur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pointer => "pointer",
            Suite::Kraus => "kraus",
            Suite::Joint => "joint",
            Suite::Conditional => "conditional",
            Suite::Nseq => "nseq",
            Suite::Mpur => "mpur",
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

/// Trial counts, seed and oracle settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateConfig {
    pub seed: u64,
    /// Trials for closed-form invariants.
    pub trials: usize,
    /// Trials for checks that run the quadrature oracle.
    pub quad_trials: usize,
    pub mc_samples: usize,
    pub quad: QuadratureConfig,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            trials: 1000,
            quad_trials: 100,
            mc_samples: 1_000_000,
            quad: QuadratureConfig::default(),
        }
    }
}

/// Outcome of one property.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Why a trial failed.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type Trial = std::result::Result<(), Failure>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Trial {
    if ok {
        Ok(())
    } else {
        Err(Failure(msg()))
    }
}

struct Runner {
    rng: ChaCha20Rng,
    checks: Vec<Check>,
}

impl Runner {
    fn new(cfg: &ValidateConfig, suite: Suite) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        rng.set_stream(suite.stream());
        Self {
            rng,
            checks: Vec::new(),
        }
    }

    /// Runs `trial` `n` times and records the first failure, if any.
    fn trials(&mut self, name: &str, n: usize, mut trial: impl FnMut(&mut ChaCha20Rng) -> Trial) {
        let mut failure = None;
        for i in 0..n {
            if let Err(Failure(msg)) = trial(&mut self.rng) {
                failure = Some(format!("trial {i}: {msg}"));
                break;
            }
        }
        self.checks.push(Check {
            name: name.to_string(),
            passed: failure.is_none(),
            detail: failure.unwrap_or_else(|| format!("{n} trials")),
        });
    }

    fn single(&mut self, name: &str, result: Trial, detail: String) {
        let (passed, detail) = match result {
            Ok(()) => (true, detail),
            Err(Failure(msg)) => (false, msg),
        };
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

fn random_dim(rng: &mut ChaCha20Rng) -> usize {
    rng.random_range(2..=3)
}

fn random_stage(rng: &mut ChaCha20Rng, dim: usize, lo: f64, hi: f64) -> MeasurementStage {
    let obs = random_observable(rng, dim, 0.2);
    MeasurementStage::new(obs, random_sigma(rng, lo, hi), "").expect("valid width")
}

fn min_eig(m: &ComplexMatrix) -> Result<f64, Error> {
    Ok(eigh(&m.hermitian_part())?.values[0])
}

pub fn run_suite(suite: Suite, cfg: &ValidateConfig) -> SuiteReport {
    let start = Instant::now();
    let mut r = Runner::new(cfg, suite);
    match suite {
        Suite::Pointer => pointer_suite(&mut r, cfg),
        Suite::Kraus => kraus_suite(&mut r, cfg),
        Suite::Joint => joint_suite(&mut r, cfg),
        Suite::Conditional => conditional_suite(&mut r, cfg),
        Suite::Nseq => nseq_suite(&mut r, cfg),
        Suite::Mpur => mpur_suite(&mut r, cfg),
    }
    SuiteReport {
        suite,
        checks: r.checks,
        elapsed: start.elapsed(),
    }
}

pub fn run_all(cfg: &ValidateConfig) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|&s| run_suite(s, cfg)).collect()
}

fn pointer_suite(r: &mut Runner, cfg: &ValidateConfig) {
    let quad = cfg.quad;
    r.trials("pair moments match quadrature", cfg.trials, |rng| {
        let sigma = random_sigma(rng, 0.05, 5.0);
        let a = rng.random_range(-2.0..2.0);
        let b = rng.random_range(-2.0..2.0);
        let n = rng.random_range(0..3u32);
        let p = Pointer::new(sigma)?;
        let exact = p.pair_moment(a, b, n)?;
        // natural size of the integral; the overlap can be astronomically small
        let scale = p.overlap(a, b) * (0.5 * (a + b)).abs().max(sigma).powi(n as i32);
        let cfg = QuadratureConfig {
            abs_tol: 1e-12 * scale,
            ..quad
        };
        let q = quad_pair_moment(sigma, a, b, n, &cfg)?;
        ensure((q - exact).abs() <= 1e-8 * scale, || {
            format!("sigma={sigma} a={a} a'={b} n={n}: {exact:e} vs {q:e}")
        })
    });
    r.trials("hermitian pair sums have real moments", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let kernel = random_density(rng, dim).matrix().rows();
        let centers: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let sum = GaussianPairSum::from_kernel(&centers, &kernel, random_sigma(rng, 0.05, 5.0))?;
        for n in 0..3 {
            sum.sum_moment(n)?;
        }
        let st = sum.stats()?;
        ensure(st.variance > 0.0 && st.norm > 0.0, || format!("{st:?}"))
    });
    r.trials("pair-sum moments match quadrature", cfg.quad_trials, |rng| {
        let dim = rng.random_range(2..=3);
        let kernel = random_density(rng, dim).matrix().rows();
        let centers: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sigma = random_sigma(rng, 0.1, 3.0);
        let sum = GaussianPairSum::from_kernel(&centers, &kernel, sigma)?;
        let st = sum.stats()?;
        let q = quad_sum_stats(&sum, &quad)?;
        ensure(
            (q.norm - st.norm).abs() <= 1e-8 * st.norm
                && (q.mean - st.mean).abs() <= 1e-8 * st.variance.sqrt()
                && (q.variance - st.variance).abs() <= 1e-8 * st.variance,
            || format!("{st:?} vs {q:?}"),
        )
    });
}

fn kraus_suite(r: &mut Runner, cfg: &ValidateConfig) {
    let quad = cfg.quad;
    r.trials("completeness by quadrature", cfg.quad_trials, |rng| {
        let dim = random_dim(rng);
        let stage = random_stage(rng, dim, 0.1, 10.0);
        let defect = completeness_defect(&stage, &quad)?;
        ensure(defect < 1e-8, || format!("defect {defect:e}"))
    });
    r.trials("effects are positive", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let stage = random_stage(rng, dim, 0.05, 5.0);
        let x = rng.random_range(-3.0..3.0);
        let e = effect_at(&stage, x).matrix;
        let m = min_eig(&e)?;
        ensure(m >= -1e-12 * e.max_abs().max(1e-300), || format!("min eigenvalue {m:e}"))
    });
    r.trials("updates keep states positive", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let stage = random_stage(rng, dim, 0.05, 5.0);
        let x = rng.random_range(-2.0..2.0);
        let (post, log_p) = conditional_state_normalized(&rho, &stage, x)?;
        let m = min_eig(post.matrix())?;
        ensure(log_p.is_finite() && (post.trace() - 1.0).abs() < 1e-12 && m >= -1e-12, || {
            format!("trace {} min eigenvalue {m:e}, ln p = {log_p}", post.trace())
        })
    });
    r.trials("kraus operators commute with the observable", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let stage = random_stage(rng, dim, 0.05, 5.0);
        let k = kraus_at(&stage, rng.random_range(-2.0..2.0)).matrix;
        let comm = k.commutator(&stage.observable.matrix()).max_abs();
        ensure(comm <= 1e-12 * k.max_abs().max(1e-300), || format!("|[M, A]| = {comm:e}"))
    });
    r.trials("unread update preserves trace", cfg.quad_trials, |rng| {
        let dim = random_dim(rng);
        let rho = random_density(rng, dim);
        let stage = random_stage(rng, dim, 0.1, 5.0);
        let q = quad_unread_update(&rho, &stage, &quad)?;
        let closed = post_first_state(&rho, &stage)?;
        let tr = q.trace().re;
        let diff = q.max_abs_diff(closed.matrix());
        ensure((tr - 1.0).abs() < 1e-8 && diff < 1e-8, || {
            format!("trace {tr}, deviation from dephased form {diff:e}")
        })
    });
}

fn joint_suite(r: &mut Runner, cfg: &ValidateConfig) {
    let quad = cfg.quad;
    r.trials("post-interaction state is a normalized state", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let stage = random_stage(rng, dim, 0.01, 100.0);
        let rho1 = post_first_state(&rho, &stage)?;
        let m = rho1.min_eigenvalue()?;
        ensure((rho1.trace() - 1.0).abs() < 1e-12 && m > -1e-12, || {
            format!("trace {} min eigenvalue {m:e}", rho1.trace())
        })
    });
    r.trials("first interaction leaves A statistics unchanged", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let stage = random_stage(rng, dim, 0.01, 100.0);
        let rho1 = post_first_state(&rho, &stage)?;
        let p0 = stage.observable.distribution(&rho)?;
        let p1 = stage.observable.distribution(&rho1)?;
        let dev = p0.iter().zip(&p1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(dev < 1e-12, || format!("distribution shift {dev:e}"))
    });
    r.trials("strong coupling fully dephases", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let obs = random_observable(rng, dim, 0.2);
        let gaps = obs.distinct_values();
        let min_gap = gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let stage = MeasurementStage::new(obs, 0.01 * min_gap.min(1.0), "")?;
        let rho1 = post_first_state(&rho, &stage)?;
        let mut luders = ComplexMatrix::zeros(dim);
        for g in stage.observable.groups() {
            luders = &luders + &(&(&g.projector * rho.matrix()) * &g.projector);
        }
        let dev = rho1.matrix().max_abs_diff(&luders);
        ensure(dev < 1e-12, || format!("deviation {dev:e}"))
    });
    r.trials("pointer variances match quadrature", cfg.quad_trials, |rng| {
        let dim = random_dim(rng);
        let rho = random_density(rng, dim);
        let s1 = random_stage(rng, dim, 0.1, 3.0);
        let s2 = random_stage(rng, dim, 0.1, 3.0);
        let j = joint_model(&rho, &s1, &s2)?;
        let (q1, q2) = quad_pointer_variances(&rho, &s1, &s2, &quad)?;
        ensure((q1 - j.var_x1).abs() < 1e-8 && (q2 - j.var_x2).abs() < 1e-8, || {
            format!("({}, {}) vs ({q1}, {q2})", j.var_x1, j.var_x2)
        })
    });
}

fn conditional_suite(r: &mut Runner, cfg: &ValidateConfig) {
    let quad = cfg.quad;
    r.trials("conditional densities integrate to one", cfg.quad_trials, |rng| {
        let dim = random_dim(rng);
        let rho = random_density(rng, dim);
        let s1 = random_stage(rng, dim, 0.1, 3.0);
        let s2 = random_stage(rng, dim, 0.1, 3.0);
        let x = rng.random_range(-1.0..1.0);
        for (d, stage) in [
            (forward_density(&rho, &s1, &s2, x)?, &s2),
            (backward_density(&rho, &s1, &s2, x)?, &s1),
        ] {
            let breaks = pointer_breaks(&stage.observable.distinct_values(), stage.sigma(), quad.pad);
            let q = quad_stats(|t| d.pdf(t), &breaks, &quad)?;
            ensure((q.norm - 1.0).abs() < 1e-8, || format!("{:?}: {}", d.direction, q.norm))?;
        }
        Ok(())
    });
    r.trials("forward densities are nonnegative", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let s1 = random_stage(rng, dim, 0.05, 5.0);
        let s2 = random_stage(rng, dim, 0.05, 5.0);
        let d = forward_density(&rho, &s1, &s2, rng.random_range(-2.0..2.0))?;
        let peak = d.pdf(0.0).abs().max(1e-300);
        for i in -40..=40 {
            let x = i as f64 * 0.1;
            let v = d.pdf(x);
            ensure(v >= -1e-12 * peak, || format!("pdf({x}) = {v:e}"))?;
        }
        Ok(())
    });
    r.trials("Bayes consistency", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let s1 = random_stage(rng, dim, 0.1, 3.0);
        let s2 = random_stage(rng, dim, 0.1, 3.0);
        let x1 = rng.random_range(-1.0..1.0);
        let x2 = rng.random_range(-1.0..1.0);
        let via_x1 = marginal_x1(&rho, &s1, x1)? * forward_density(&rho, &s1, &s2, x1)?.pdf(x2);
        let via_x2 = marginal_x2(&rho, &s1, &s2, x2)? * backward_density(&rho, &s1, &s2, x2)?.pdf(x1);
        let joint = conditional_state(&rho, &s1, x1)?.expect(&effect_at(&s2, x2).matrix).re;
        let tol = 1e-10 * joint.abs().max(1e-300);
        ensure((via_x1 - joint).abs() <= tol && (via_x2 - joint).abs() <= tol, || {
            format!("{via_x1:e} / {via_x2:e} / {joint:e}")
        })
    });
    r.trials("forward extracted variance is nonnegative", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let rho = random_density(rng, dim);
        let s1 = random_stage(rng, dim, 0.05, 5.0);
        let s2 = random_stage(rng, dim, 0.05, 5.0);
        let st = forward_stats(&rho, &s1, &s2, rng.random_range(-2.0..2.0))?;
        ensure(st.extracted_system_variance >= 0.0, || format!("{st:?}"))
    });
    r.trials("spin engines match closed forms", cfg.trials, |rng| {
        let (s1, s2) = (random_sigma(rng, 0.1, 2.0), random_sigma(rng, 0.1, 2.0));
        let (x1, x2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let rho = DensityMatrix::from_pure(&PureState::plus());
        let z = MeasurementStage::new(Observable::spin_z(), s1, "Sz")?;
        let x = MeasurementStage::new(Observable::spin_x(), s2, "Sx")?;
        let f = forward_stats(&rho, &z, &x, x1)?.extracted_system_variance;
        let b = backward_stats(&rho, &z, &x, x2)?.extracted_system_variance;
        let fc = spin::var_sx_given_sz_closed(s1, x1);
        let bc = spin::var_sz_given_sx_closed(s1, s2, x2)?;
        ensure((f - fc).abs() < 1e-10 && (b - bc).abs() < 1e-9, || {
            format!("forward {f} vs {fc}, backward {b} vs {bc}")
        })
    });
}

fn random_chain(rng: &mut ChaCha20Rng, len: usize) -> Result<MeasurementChain, Error> {
    let dim = random_dim(rng);
    let stages = (0..len).map(|_| random_stage(rng, dim, 0.2, 2.0)).collect();
    MeasurementChain::new(stages, random_density(rng, dim))
}

fn nseq_suite(r: &mut Runner, cfg: &ValidateConfig) {
    let quad = cfg.quad;
    r.trials("two-stage chain reproduces the conditional model", cfg.trials, |rng| {
        let chain = random_chain(rng, 2)?;
        let (rho, s) = (chain.initial(), chain.stages());
        let x = rng.random_range(-0.5..0.5);
        let fwd = conditional_stats_k(&chain, &ChainQuery::new(1, vec![x])?)?;
        let bwd = conditional_stats_k(&chain, &ChainQuery::new(0, vec![x])?)?;
        let f = forward_stats(rho, &s[0], &s[1], x)?;
        let b = backward_stats(rho, &s[0], &s[1], x)?;
        let d = (fwd.variance - f.variance)
            .abs()
            .max((bwd.variance - b.variance).abs())
            .max((fwd.mean - f.mean).abs())
            .max((bwd.mean - b.mean).abs());
        ensure(d < 1e-12, || format!("deviation {d:e}"))
    });
    r.trials("chain states are positive", cfg.trials, |rng| {
        let len = rng.random_range(1..=5);
        let chain = random_chain(rng, len)?;
        let xs: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = chain_state(&chain, &xs)?;
        let m = min_eig(rho.matrix())?;
        ensure(rho.trace() > 0.0 && m >= -1e-12 * rho.trace(), || {
            format!("trace {:e} min eigenvalue {m:e}", rho.trace())
        })
    });
    r.trials("chain conditional moments match quadrature", cfg.quad_trials, |rng| {
        let len = rng.random_range(2..=4);
        let chain = random_chain(rng, len)?;
        let k = rng.random_range(0..len);
        let fixed: Vec<f64> = (1..len).map(|_| rng.random_range(-0.5..0.5)).collect();
        let query = ChainQuery::new(k, fixed)?;
        let res = conditional_stats_k(&chain, &query)?;
        let stage = &chain.stages()[k];
        let joint = |x: f64| {
            let xs: Vec<f64> = (0..len).map(|j| if j == k { x } else { query.outcome(j) }).collect();
            chain_state(&chain, &xs).map(|s| s.trace()).unwrap_or(f64::NAN)
        };
        let breaks = pointer_breaks(&stage.observable.distinct_values(), stage.sigma(), quad.pad);
        let q = quad_stats(joint, &breaks, &quad)?;
        let d = (q.mean - res.mean).abs().max((q.variance - res.variance).abs());
        ensure(d < 1e-8, || format!("({}, {}) vs ({}, {})", res.mean, res.variance, q.mean, q.variance))
    });
    r.trials("sampler is deterministic under a seed", cfg.trials, |rng| {
        let len = rng.random_range(1..=3);
        let chain = random_chain(rng, len)?;
        let seed = rng.random::<u64>();
        let a = sample_chain(&chain, &SamplerConfig::new(64, seed)?)?;
        let b = sample_chain(&chain, &SamplerConfig::new(64, seed)?)?;
        let other = sample_chain(&chain, &SamplerConfig::new(64, seed ^ 1)?)?;
        ensure(a == b && a != other, || "sample streams differ".into())
    });
    let chain = spin::four_stage_chain(0.5);
    let result = chain.and_then(|chain| {
        let query = ChainQuery::new(1, vec![0.3, 0.1, -0.4])?;
        let exact = conditional_stats_k(&chain, &query)?.variance;
        let mc = mc_conditional_variance(
            &chain,
            &query,
            &SamplerConfig::new(cfg.mc_samples, cfg.seed)?,
        )?;
        Ok((exact, mc))
    });
    match result {
        Ok((exact, mc)) => {
            let z = (mc.estimate - exact) / mc.standard_error;
            r.single(
                "Monte Carlo conditional variance within 3 SE",
                ensure(z.abs() < 3.0, || format!("analytic {exact}, MC {} ± {}", mc.estimate, mc.standard_error)),
                format!("analytic {exact}, MC {} ± {} ({z:+.2} SE)", mc.estimate, mc.standard_error),
            );
        }
        Err(e) => r.single("Monte Carlo conditional variance within 3 SE", Err(e.into()), String::new()),
    }
}

fn mpur_suite(r: &mut Runner, cfg: &ValidateConfig) {
    r.trials("random pure states satisfy the sum bound", cfg.trials, |rng| {
        let dim = rng.random_range(2..=4);
        let psi = random_pure(rng, dim);
        let a = random_observable(rng, dim, 0.2);
        let b = random_observable(rng, dim, 0.2);
        let rep = mpur_check(&psi, &a, &b)?;
        ensure(rep.lhs_sum >= rep.bound - 1e-10, || format!("{rep:?}"))
    });
    let spin = mpur_check(&PureState::plus(), &Observable::spin_z(), &Observable::spin_x());
    let detail = spin.as_ref().map(|s| format!("{s:?}")).unwrap_or_default();
    let check = spin.map_err(Failure::from).and_then(|s| {
        ensure(
            (s.lhs_sum - 0.25).abs() < 1e-12
                && (s.bound - 0.25).abs() < 1e-12
                && (s.r_a - 0.25).abs() <= 1e-15
                && (s.r_b - 0.125).abs() <= 1e-15,
            || format!("{s:?}"),
        )
    });
    r.single("spin baseline saturates the bound", check, detail);
    r.trials("conditional spin sum stays above 1/8", cfg.trials, |rng| {
        let (s1, s2) = (random_sigma(rng, 0.05, 1e3), random_sigma(rng, 0.05, 5.0));
        let (x1, x2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let rho = DensityMatrix::from_pure(&PureState::plus());
        let z = MeasurementStage::new(Observable::spin_z(), s1, "Sz")?;
        let x = MeasurementStage::new(Observable::spin_x(), s2, "Sx")?;
        let f = forward_stats(&rho, &z, &x, x1)?.extracted_system_variance;
        let b = backward_stats(&rho, &z, &x, x2)?.extracted_system_variance;
        ensure(f + b >= 0.125 - 1e-9, || format!("sum {} at ({s1}, {s2}, {x1}, {x2})", f + b))
    });
}

/// One line per check, prefixed by its suite.
pub fn format_report(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    for rep in reports {
        for ch in &rep.checks {
            out.push_str(&format!(
                "[{}] {}: {} ({})\n",
                if ch.passed { "PASS" } else { "FAIL" },
                rep.suite,
                ch.name,
                ch.detail
            ));
        }
        out.push_str(&format!(
            "suite {} {} in {:.2?}\n",
            rep.suite,
            if rep.passed() { "passed" } else { "FAILED" },
            rep.elapsed
        ));
    }
    out
}
