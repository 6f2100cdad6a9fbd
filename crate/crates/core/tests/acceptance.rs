//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so every line reaches the
//! terminal in order. Tolerances, grids, seeds and runtime limits are fixed
//! here; a failing criterion reports its worst case and makes the target
//! exit nonzero.

// `!(x <= y)` comparisons deliberately fail on NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use seqmeas::chain::{chain_state, conditional_stats_k, ChainQuery, MeasurementChain};
use seqmeas::conditional::{backward_stats, forward_stats};
use seqmeas::joint::{backaction_variance, joint_model};
use seqmeas::kraus::{completeness_defect, MeasurementStage};
use seqmeas::mpur::mpur_check;
use seqmeas::oracle::{
    mc_conditional_variance, pointer_breaks, quad_pointer_variances, quad_stats, sample_chain,
    variance_with_jackknife, QuadratureConfig, SamplerConfig,
};
use seqmeas::random::{random_density, random_observable, random_pure, random_sigma};
use seqmeas::spin;
use seqmeas::validate::{format_report, run_all, ValidateConfig};
use seqmeas::{ComplexMatrix, DensityMatrix, Observable, PureState};

type Outcome = Result<String, String>;

fn plus() -> DensityMatrix {
    DensityMatrix::from_pure(&PureState::plus())
}

fn sz(sigma: f64) -> MeasurementStage {
    MeasurementStage::new(Observable::spin_z(), sigma, "Sz").unwrap()
}

fn sx(sigma: f64) -> MeasurementStage {
    MeasurementStage::new(Observable::spin_x(), sigma, "Sx").unwrap()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(())
    } else {
        Err(format!("runtime {t:.2?} exceeds {limit:?}"))
    }
}

/// Tracks the largest deviation seen and where.
#[derive(Default)]
struct Worst {
    dev: f64,
    at: String,
}

impl Worst {
    fn see(&mut self, dev: f64, at: impl FnOnce() -> String) {
        if !(dev <= self.dev) {
            self.dev = dev;
            self.at = at();
        }
    }

    fn check(&self, what: &str, tol: f64) -> Result<String, String> {
        if self.dev <= tol {
            Ok(format!("{what} {:.1e} <= {tol:e}", self.dev))
        } else {
            Err(format!("{what} {:.3e} > {tol:e} at {}", self.dev, self.at))
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = Worst::default();
    for s in logspace(0.01, 100.0, 50) {
        let v = backaction_variance(&plus(), &sz(s), &Observable::spin_x()).map_err(|e| e.to_string())?;
        worst.see((v - spin::var_sx_rho1_closed(s)).abs(), || format!("sigma1={s}"));
    }
    let lo = backaction_variance(&plus(), &sz(0.01), &Observable::spin_x()).unwrap();
    let hi = backaction_variance(&plus(), &sz(100.0), &Observable::spin_x()).unwrap();
    let grid = worst.check("max |engine - closed form|", 1e-10)?;
    if (lo - 0.25).abs() > 1e-6 || hi.abs() > 1e-6 {
        return Err(format!("endpoints {lo} and {hi}"));
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("{grid}; endpoints {lo:.9} / {hi:.2e}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst = Worst::default();
    let mut asym = Worst::default();
    for s1 in linspace(0.1, 2.0, 20) {
        for x1 in linspace(-1.0, 1.0, 20) {
            let f = |x: f64| {
                forward_stats(&plus(), &sz(s1), &sx(0.5), x)
                    .map(|st| st.extracted_system_variance)
                    .map_err(|e| e.to_string())
            };
            let v = f(x1)?;
            worst.see((v - spin::var_sx_given_sz_closed(s1, x1)).abs(), || {
                format!("sigma1={s1} x1={x1}")
            });
            asym.see((v - f(-x1)?).abs(), || format!("sigma1={s1} x1={x1}"));
        }
    }
    let grid = worst.check("max |engine - tanh^2 form|", 1e-10)?;
    asym.check("max |f(x1) - f(-x1)|", 1e-12)?;
    let v = forward_stats(&plus(), &sz(0.5), &sx(0.5), 0.5).unwrap().extracted_system_variance;
    // the quoted 0.1450066 is a loose rounding of tanh^2(1)/4 = 0.14500641...
    if (v - 0.25 * 1f64.tanh().powi(2)).abs() > 1e-10 || (v - 0.145_006_6).abs() > 1e-6 {
        return Err(format!("value at (0.5, 0.5) = {v}"));
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("{grid}; value(0.5, 0.5) = {v:.8}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let bw = |s1: f64, s2: f64, x2: f64| {
        backward_stats(&plus(), &sz(s1), &sx(s2), x2)
            .map(|st| st.extracted_system_variance)
            .map_err(|e| e.to_string())
    };
    let mut worst = Worst::default();
    for s1 in linspace(0.1, 2.0, 12) {
        for s2 in linspace(0.1, 2.0, 12) {
            for x2 in linspace(-1.0, 1.0, 12) {
                let exact = spin::var_sz_given_sx_closed(s1, s2, x2).map_err(|e| e.to_string())?;
                worst.see((bw(s1, s2, x2)? - exact).abs(), || {
                    format!("sigma1={s1} sigma2={s2} x2={x2}")
                });
            }
        }
    }
    let grid = worst.check("max |engine - closed form|", 1e-9)?;

    // weak first stage over the plotted range (values up to 0.5)
    let mut weak = Worst::default();
    let mut plotted = 0;
    for s2 in linspace(0.1, 2.0, 20) {
        for x2 in linspace(-1.0, 1.0, 41) {
            let v = bw(1e3, s2, x2)?;
            if v > 0.5 {
                continue;
            }
            plotted += 1;
            let approx = 0.125 * (1.0 + (-x2 / (s2 * s2)).exp());
            weak.see((v - approx).abs(), || format!("sigma2={s2} x2={x2}"));
        }
    }
    let weak_line = weak.check("weak-limit deviation", 1e-4)?;
    for s2 in [0.1, 0.5, 1.0, 2.0] {
        let v = bw(0.5, s2, 0.0)?;
        if (v - 0.25).abs() > 1e-6 {
            return Err(format!("x2 = 0, sigma2 = {s2}: {v}"));
        }
    }
    let v = bw(0.5, 0.5, 0.5)?;
    // the quoted 0.1710105 differs from the displayed formula, which gives 0.17100681
    let exact = spin::var_sz_given_sx_closed(0.5, 0.5, 0.5).unwrap();
    if (v - exact).abs() > 1e-9 || (v - 0.171_006_8).abs() > 1e-7 {
        return Err(format!("value at (0.5, 0.5, 0.5) = {v}"));
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("{grid}; {weak_line} over {plotted} points; value = {v:.8}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2026);
    let quad = QuadratureConfig::default();
    let mut law = Worst::default();
    let mut quad_dev = Worst::default();
    let mut worst_z = Worst::default();
    let mut misses = Vec::new();
    let mut z2 = 0.0;
    for draw in 0..100 {
        let dim = if draw % 2 == 0 { 2 } else { 3 };
        let rho0 = random_density(&mut rng, dim);
        let a = random_observable(&mut rng, dim, 0.2);
        let b = random_observable(&mut rng, dim, 0.2);
        let (s1, s2) = (random_sigma(&mut rng, 0.1, 2.0), random_sigma(&mut rng, 0.1, 2.0));
        let st1 = MeasurementStage::new(a.clone(), s1, "A").unwrap();
        let st2 = MeasurementStage::new(b.clone(), s2, "B").unwrap();
        let j = joint_model(&rho0, &st1, &st2).map_err(|e| e.to_string())?;

        // reference values from the matrices directly
        let var = |m: &ComplexMatrix, rho: &ComplexMatrix| {
            let mean = rho.trace_product(m).re;
            rho.trace_product(&(m * m)).re - mean * mean
        };
        let mut rho1 = ComplexMatrix::zeros(dim);
        for gi in a.groups() {
            for gj in a.groups() {
                let d = (-(gi.value - gj.value).powi(2) / (8.0 * s1 * s1)).exp();
                let term = &(&gi.projector * rho0.matrix()) * &gj.projector;
                rho1 = &rho1 + &term.scale_real(d);
            }
        }
        let v1 = s1 * s1 + var(&a.matrix(), rho0.matrix());
        let v2 = s2 * s2 + var(&b.matrix(), &rho1);
        law.see((j.var_x1 - v1).abs().max((j.var_x2 - v2).abs()), || format!("draw {draw}"));

        let (q1, q2) = quad_pointer_variances(&rho0, &st1, &st2, &quad).map_err(|e| e.to_string())?;
        quad_dev.see((q1 - j.var_x1).abs().max((q2 - j.var_x2).abs()), || format!("draw {draw}"));

        let chain = MeasurementChain::new(vec![st1, st2], rho0).unwrap();
        let cfg = SamplerConfig::new(1_000_000, 7_000 + draw as u64).unwrap();
        let samples = sample_chain(&chain, &cfg).map_err(|e| e.to_string())?;
        for (k, exact) in [(0, j.var_x1), (1, j.var_x2)] {
            let (est, se) = variance_with_jackknife(&samples.stage(k)).unwrap();
            let z = (est - exact) / se;
            z2 += z * z;
            worst_z.see(z.abs(), || format!("draw {draw} stage {}", k + 1));
            if z.abs() >= 3.0 {
                misses.push(format!("draw {draw} x{}: {z:+.2} SE", k + 1));
            }
        }
    }
    let l = law.check("law deviation", 1e-10)?;
    let q = quad_dev.check("quadrature deviation", 1e-8)?;
    let z_rms = (z2 / 200.0).sqrt();
    if !misses.is_empty() {
        return Err(format!(
            "{} of 200 Monte Carlo checks beyond 3 SE: {} (rms z over all checks {z_rms:.3}); {l}; {q}",
            misses.len(),
            misses.join(", ")
        ));
    }
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("{l}; {q}; max MC |z| {:.2}, rms z {z_rms:.3}", worst_z.dev))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let quad = QuadratureConfig::default();
    let mut observables = vec![Observable::spin_z(), Observable::spin_x()];
    observables.extend((0..5).map(|_| random_observable(&mut rng, 3, 0.0)));
    observables.push(random_observable(&mut rng, 3, 1.0));
    let mut worst = Worst::default();
    for (i, obs) in observables.iter().enumerate() {
        for s in [0.1, 0.5, 2.0, 10.0] {
            let st = MeasurementStage::new(obs.clone(), s, "").unwrap();
            let d = completeness_defect(&st, &quad).map_err(|e| e.to_string())?;
            worst.see(d, || format!("observable {i} sigma={s}"));
        }
    }
    worst.check("max completeness defect", 1e-8)
}

fn criterion_6() -> Outcome {
    let rep = mpur_check(&PureState::plus(), &Observable::spin_z(), &Observable::spin_x())
        .map_err(|e| e.to_string())?;
    if (rep.lhs_sum - 0.25).abs() > 1e-12 || (rep.bound - 0.25).abs() > 1e-12 {
        return Err(format!("spin baseline {rep:?}"));
    }
    // the reference constants are exact; the generic engine lands within a few ulps
    let engine_off = (rep.r_a - 0.25).abs().max((rep.r_b - 0.125).abs());
    if engine_off > 1e-15 || spin::mpur_spin_constants() != (0.25, 0.125) {
        return Err(format!("R_a = {}, R_b = {}", rep.r_a, rep.r_b));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut tightest = f64::INFINITY;
    for i in 0..10_000 {
        let dim = rng.random_range(2..=4);
        let psi = random_pure(&mut rng, dim);
        let a = random_observable(&mut rng, dim, 0.2);
        let b = random_observable(&mut rng, dim, 0.2);
        let rep = mpur_check(&psi, &a, &b).map_err(|e| e.to_string())?;
        let slack = rep.lhs_sum - rep.bound;
        if slack < -1e-10 {
            return Err(format!("check {i} violates the bound by {:e}", -slack));
        }
        tightest = tightest.min(slack);
    }
    Ok(format!("baseline saturated; 10^4 random states, min slack {tightest:.2e}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let sigma1 = logspace(0.05, 1e3, 25);
    let sigma2 = logspace(0.05, 5.0, 25);
    let xs = linspace(-2.0, 2.0, 41);
    // Var(S_x|S_z) depends on (sigma1, x1), Var(S_z|S_x) on (sigma1, sigma2, x2);
    // tabulate both, then scan every grid combination.
    let mut best = (f64::INFINITY, String::new());
    let mut lowest = f64::INFINITY;
    for &s1 in &sigma1 {
        let fwd: Vec<f64> = xs
            .iter()
            .map(|&x1| forward_stats(&plus(), &sz(s1), &sx(1.0), x1).map(|s| s.extracted_system_variance))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for &s2 in &sigma2 {
            for &x2 in &xs {
                let b = backward_stats(&plus(), &sz(s1), &sx(s2), x2)
                    .map_err(|e| e.to_string())?
                    .extracted_system_variance;
                for (&x1, &f) in xs.iter().zip(&fwd) {
                    let sum = f + b;
                    lowest = lowest.min(sum);
                    if sum < best.0 {
                        best = (sum, format!("x1={x1} x2={x2} sigma1={s1:.3e} sigma2={s2:.3e}"));
                    }
                }
            }
        }
    }
    if lowest < 0.125 - 1e-6 {
        return Err(format!("sum drops to {lowest}"));
    }
    if best.0 > 0.1251 {
        return Err(format!("grid minimum {} at {}", best.0, best.1));
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("min {:.9} at {}", best.0, best.1))
}

fn criterion_8() -> Outcome {
    let mut worst = Worst::default();
    for s1 in linspace(0.1, 2.0, 20) {
        for x in linspace(-1.0, 1.0, 20) {
            let s2 = 0.5;
            let chain = MeasurementChain::new(vec![sz(s1), sx(s2)], plus()).unwrap();
            let fwd = conditional_stats_k(&chain, &ChainQuery::new(1, vec![x]).unwrap())
                .map_err(|e| e.to_string())?;
            let bwd = conditional_stats_k(&chain, &ChainQuery::new(0, vec![x]).unwrap())
                .map_err(|e| e.to_string())?;
            let f = forward_stats(&plus(), &sz(s1), &sx(s2), x).unwrap();
            let b = backward_stats(&plus(), &sz(s1), &sx(s2), x).unwrap();
            let dev = (fwd.extracted_variance - f.extracted_system_variance)
                .abs()
                .max((bwd.extracted_variance - b.extracted_system_variance).abs())
                .max((fwd.variance - f.variance).abs())
                .max((bwd.variance - b.variance).abs());
            worst.see(dev, || format!("sigma1={s1} x={x}"));
        }
    }
    let two = worst.check("N=2 deviation", 1e-12)?;

    let chain = spin::four_stage_chain(0.5).unwrap();
    let query = ChainQuery::new(1, vec![0.3, 0.1, -0.4]).unwrap();
    let analytic = conditional_stats_k(&chain, &query).map_err(|e| e.to_string())?;
    let quad = QuadratureConfig::default();
    let joint = |x2: f64| chain_state(&chain, &[0.3, x2, 0.1, -0.4]).unwrap().trace();
    let q = quad_stats(joint, &pointer_breaks(&[-0.5, 0.5], 0.5, quad.pad), &quad)
        .map_err(|e| e.to_string())?;
    if (q.variance - analytic.variance).abs() > 1e-8 {
        return Err(format!("quadrature {} vs analytic {}", q.variance, analytic.variance));
    }
    let mc = mc_conditional_variance(&chain, &query, &SamplerConfig::new(1_000_000, 8).unwrap())
        .map_err(|e| e.to_string())?;
    let z = (mc.estimate - analytic.variance) / mc.standard_error;
    if z.abs() >= 3.0 {
        return Err(format!(
            "Monte Carlo {} ± {} vs analytic {} ({z:+.2} SE)",
            mc.estimate, mc.standard_error, analytic.variance
        ));
    }
    Ok(format!(
        "{two}; four-stage Var(x2|rest) analytic {:.10}, quadrature {:.10}, MC {:.5} ± {:.1e} ({z:+.2} SE)",
        analytic.variance, q.variance, mc.estimate, mc.standard_error
    ))
}

fn criterion_9() -> Outcome {
    let s = 1e3;
    let mut fwd = Worst::default();
    let mut bwd = Worst::default();
    for x in linspace(-3.0 * s, 3.0 * s, 61) {
        let f = forward_stats(&plus(), &sz(s), &sx(s), x).map_err(|e| e.to_string())?;
        let b = backward_stats(&plus(), &sz(s), &sx(s), x).map_err(|e| e.to_string())?;
        fwd.see(f.extracted_system_variance.abs(), || format!("x1={x}"));
        bwd.see((b.extracted_system_variance - 0.25).abs(), || format!("x2={x}"));
    }
    let f = fwd.check("max Var(S_x|S_z)", 1e-4)?;
    let b = bwd.check("max |Var(S_z|S_x) - 1/4|", 1e-3)?;
    Ok(format!("{f}; {b} for outcomes within 3 sigma"))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let reports = run_all(&ValidateConfig::default());
    let elapsed = start.elapsed();
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {} ({})", r.suite, c.name, c.detail)))
        .collect();
    if !failed.is_empty() {
        eprint!("{}", format_report(&reports));
        return Err(failed.join("; "));
    }
    within_time(start, Duration::from_secs(120))?;
    let n: usize = reports.iter().map(|r| r.checks.len()).sum();
    Ok(format!("{n} properties across {} suites in {elapsed:.1?}", reports.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("joint-model backaction curve", criterion_1),
        ("conditional forward variance", criterion_2),
        ("conditional backward variance", criterion_3),
        ("pointer-variance laws", criterion_4),
        ("Kraus completeness", criterion_5),
        ("sum-of-variances bound", criterion_6),
        ("conditional bound demonstration", criterion_7),
        ("N-stage chain consistency", criterion_8),
        ("weak-limit elimination", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{t:.2?}]: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} [{t:.2?}]: {detail}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
