//! Monte Carlo sampling of measurement records.
//!
//! Work is split into a fixed number of lanes, each with its own ChaCha20
//! stream derived from the seed. Lane outputs are concatenated in lane order,
//! so results are bit-identical for a given seed whatever the thread count.
//!
//! The chain sampler tracks the normalized state in the eigenbasis of the
//! stage about to act. There every Kraus operator is diagonal, outcome
//! weights are sums of diagonal entries, and moving to the next stage is a
//! fixed unitary change of basis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::chain::{conditional_density_k, ChainQuery, MeasurementChain};
use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix};
use crate::pointer::GaussianPairSum;

/// Identifier of the generator and stream layout, for output metadata.
pub const RNG_ALGORITHM: &str = "chacha20-rand_chacha-0.9/64-lanes";

const LANES: u64 = 64;
const MIN_ACCEPTANCE: f64 = 1e-6;

/// Sample count and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        Ok(Self { samples, seed })
    }
}

fn lane_rng(seed: u64, lane: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(lane);
    rng
}

/// Number of draws handled by `lane`; the first `n % LANES` lanes take one extra.
fn lane_quota(n: usize, lane: u64) -> usize {
    let lanes = LANES as usize;
    n / lanes + usize::from((lane as usize) < n % lanes)
}

/// Runs `work(rng, quota, out)` per lane and concatenates the outputs.
fn run_lanes<T: Send>(
    cfg: &SamplerConfig,
    work: impl Fn(&mut ChaCha20Rng, usize, &mut Vec<T>) -> Result<()> + Sync,
) -> Result<Vec<T>> {
    let parts: Vec<Result<Vec<T>>> = (0..LANES)
        .into_par_iter()
        .map(|lane| {
            let quota = lane_quota(cfg.samples, lane);
            let mut out = Vec::new();
            work(&mut lane_rng(cfg.seed, lane), quota, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(cfg.samples);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// Outcome tuples stored row-major: record `i` is `data[i*stages..(i+1)*stages]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSamples {
    stages: usize,
    data: Vec<f64>,
}

impl OutcomeSamples {
    pub fn len(&self) -> usize {
        self.data.len() / self.stages
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn record(&self, i: usize) -> &[f64] {
        &self.data[i * self.stages..(i + 1) * self.stages]
    }

    /// All outcomes of stage `k` (0-based).
    pub fn stage(&self, k: usize) -> Vec<f64> {
        self.data.iter().skip(k).step_by(self.stages).copied().collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Per-stage data in the stage's own eigenbasis.
struct StagePlan {
    /// Group index of each eigenvector.
    group_of: Vec<usize>,
    values: Vec<f64>,
    sigma: f64,
    /// `V_k^H V_{k+1}`, absent for the last stage.
    to_next: Option<ComplexMatrix>,
    /// When the next stage is the last: for each of its groups `g`, the flat
    /// matrix `Q_g[k][l] = sum_{i in g} conj(W_ki) W_li`, so that the group
    /// weight after the update is `sum_kl f_k f_l Re(rho_kl Q_g[k][l])`.
    final_forms: Vec<Vec<Complex64>>,
}

fn plan(chain: &MeasurementChain) -> (Vec<StagePlan>, ComplexMatrix) {
    let stages = chain.stages();
    let plans = stages
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let obs = &s.observable;
            let mut group_of = vec![0; obs.dim()];
            for (g, grp) in obs.groups().iter().enumerate() {
                for &i in &grp.indices {
                    group_of[i] = g;
                }
            }
            let to_next = stages
                .get(k + 1)
                .map(|n| &obs.eigenvectors().adjoint() * n.observable.eigenvectors());
            let final_forms = match (&to_next, k + 2 == stages.len()) {
                (Some(w), true) => {
                    let n = obs.dim();
                    stages[k + 1]
                        .observable
                        .groups()
                        .iter()
                        .map(|grp| {
                            let mut q = vec![Complex64::new(0.0, 0.0); n * n];
                            for &i in &grp.indices {
                                for a in 0..n {
                                    for b in 0..n {
                                        q[a * n + b] += w[(a, i)].conj() * w[(b, i)];
                                    }
                                }
                            }
                            q
                        })
                        .collect()
                }
                _ => Vec::new(),
            };
            StagePlan {
                group_of,
                values: obs.distinct_values(),
                sigma: s.sigma(),
                to_next,
                final_forms,
            }
        })
        .collect();
    let v0 = stages[0].observable.eigenvectors();
    let rho = &(&v0.adjoint() * chain.initial().matrix()) * v0;
    (plans, rho)
}

/// `out <- W^H (rho o f f^T) W`: the diagonal Kraus update followed by the
/// change to the next stage's eigenbasis, on flat row-major buffers.
fn update_full(
    rho: &[Complex64],
    f: &[f64],
    w: &[Complex64],
    tmp: &mut [Complex64],
    out: &mut [Complex64],
    n: usize,
) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += rho[i * n + k] * (f[i] * f[k]) * w[k * n + j];
            }
            tmp[i * n + j] = acc;
        }
    }
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += w[k * n + i].conj() * tmp[k * n + j];
            }
            out[i * n + j] = acc;
        }
        tr += out[i * n + i].re;
    }
    let s = 1.0 / tr;
    out.iter_mut().for_each(|v| *v *= s);
}

/// Group weights of the final stage: `f^T Re(rho o Q_g) f` for each group.
fn final_weights(rho: &[Complex64], f: &[f64], forms: &[Vec<Complex64>], w: &mut Vec<f64>, n: usize) {
    w.clear();
    for q in forms {
        let mut acc = 0.0;
        for (k, (rrow, qrow)) in rho.chunks_exact(n).zip(q.chunks_exact(n)).enumerate() {
            let mut row = 0.0;
            for ((r, qq), fl) in rrow.iter().zip(qrow).zip(f) {
                row += (r.re * qq.re - r.im * qq.im) * fl;
            }
            acc += f[k] * row;
        }
        w.push(acc.max(0.0));
    }
}

/// `f^T R f` for a flat real `n x n` matrix.
fn quadratic_form(r: &[f64], f: &[f64], n: usize) -> f64 {
    r.chunks_exact(n)
        .zip(f)
        .map(|(row, fk)| fk * row.iter().zip(f).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// Picks an index with probability proportional to `w`.
fn pick(rng: &mut ChaCha20Rng, w: &[f64]) -> usize {
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &wi) in w.iter().enumerate() {
        if u < wi {
            return i;
        }
        u -= wi;
    }
    w.len() - 1
}

/// Draws outcome records stage by stage: stage `k` picks eigenvalue `a` with
/// probability `Tr[P_a rho_hat_{k-1}]`, sets `x = a + sigma_k z`, then applies
/// the Kraus update for `x`. The update after the final stage is skipped,
/// and before the final stage only the diagonal it needs is formed.
pub fn sample_chain(chain: &MeasurementChain, cfg: &SamplerConfig) -> Result<OutcomeSamples> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let (plans, rho0) = plan(chain);
    let n = chain.dim();
    let ns = plans.len();
    let group_weights = |p: &StagePlan, diag: &mut dyn Iterator<Item = f64>, w: &mut Vec<f64>| {
        w.clear();
        w.resize(p.values.len(), 0.0);
        for (&g, d) in p.group_of.iter().zip(diag) {
            w[g] += d.max(0.0);
        }
    };
    let mut w0 = Vec::new();
    group_weights(&plans[0], &mut (0..n).map(|i| rho0[(i, i)].re), &mut w0);
    // for two-stage chains the first update always starts from rho0
    let forms0: Vec<Vec<f64>> = plans[0]
        .final_forms
        .iter()
        .map(|q| q.iter().zip(rho0.as_slice()).map(|(q, r)| (q * r).re).collect())
        .collect();

    let data = run_lanes(cfg, |rng, quota, out| {
        out.reserve(quota * ns);
        let zero = Complex64::new(0.0, 0.0);
        let (mut rho, mut next, mut tmp) = (vec![zero; n * n], vec![zero; n * n], vec![zero; n * n]);
        let mut f = vec![0.0; n];
        let mut w = Vec::with_capacity(n);
        for _ in 0..quota {
            let mut g = pick(rng, &w0);
            for (k, p) in plans.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                let x = p.values[g] + p.sigma * z;
                out.push(x);
                let Some(to_next) = &p.to_next else { break };
                // diagonal Kraus weights relative to the nearest eigenvalue
                let inv = 1.0 / (4.0 * p.sigma * p.sigma);
                let d_min = p.values.iter().map(|a| (x - a) * (x - a)).fold(f64::INFINITY, f64::min);
                for (fi, &gi) in f.iter_mut().zip(&p.group_of) {
                    let d = x - p.values[gi];
                    *fi = (-(d * d - d_min) * inv).exp();
                }
                let src = if k == 0 { rho0.as_slice() } else { rho.as_slice() };
                let following = &plans[k + 1];
                if p.final_forms.is_empty() {
                    update_full(src, &f, to_next.as_slice(), &mut tmp, &mut next, n);
                    std::mem::swap(&mut rho, &mut next);
                    group_weights(following, &mut (0..n).map(|i| rho[i * n + i].re), &mut w);
                } else if k == 0 {
                    w.clear();
                    w.extend(forms0.iter().map(|r| quadratic_form(r, &f, n).max(0.0)));
                } else {
                    final_weights(src, &f, &p.final_forms, &mut w, n);
                }
                g = pick(rng, &w);
            }
        }
        Ok(())
    })?;
    Ok(OutcomeSamples { stages: ns, data })
}

/// How [`mc_conditional_variance`] drew its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    /// Positive Gaussian mixture: component choice then a Gaussian draw.
    Direct,
    /// Rejection against the uniform mixture of stage Gaussians.
    Rejection,
}

/// Sample variance of the free outcome with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub mean: f64,
    pub mean_standard_error: f64,
    pub samples: usize,
    pub method: SampleMethod,
    /// Expected acceptance rate (1 for direct sampling).
    pub acceptance: f64,
}

/// Unbiased sample variance and its delete-one jackknife standard error,
/// computed in two passes from centered values.
pub fn variance_with_jackknife(xs: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::InvalidArgument("jackknife needs at least 3 samples".into()));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let s2: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = s2 / (nf - 1.0);
    // leaving out x_i: sum of squares about the reduced mean is
    // S2 - d_i^2 n/(n-1)
    let loo = |d: f64| (s2 - d * d * nf / (nf - 1.0)) / (nf - 2.0);
    let loo_mean = xs.iter().map(|x| loo(x - mean)).sum::<f64>() / nf;
    let ss: f64 = xs
        .iter()
        .map(|x| {
            let e = loo(x - mean) - loo_mean;
            e * e
        })
        .sum();
    Ok((var, ((nf - 1.0) / nf * ss).sqrt()))
}

/// Hermitian kernel over the distinct centers appearing in a pair sum.
fn kernel_of(sum: &GaussianPairSum) -> (Vec<f64>, ComplexMatrix) {
    let mut centers: Vec<f64> = sum.terms().iter().map(|t| t.center_a).collect();
    centers.sort_by(f64::total_cmp);
    centers.dedup();
    let idx = |c: f64| centers.iter().position(|&v| v == c).expect("center present");
    let mut k = ComplexMatrix::zeros(centers.len());
    for t in sum.terms() {
        k[(idx(t.center_a), idx(t.center_b))] += t.coeff;
    }
    (centers, k)
}

/// Draws the free outcome of `query` from its exact conditional density and
/// returns the sample variance with a jackknife error.
///
/// Mixtures with a diagonal kernel are sampled directly. Otherwise the
/// density `sum C_aa' g_a g_a'` (with `g_a` the pointer amplitudes) is bounded
/// by `lambda_max(C) sum_a g_a^2`, a multiple of the uniform mixture of the
/// stage Gaussians, which serves as the rejection envelope.
pub fn mc_conditional_variance(
    chain: &MeasurementChain,
    query: &ChainQuery,
    cfg: &SamplerConfig,
) -> Result<McEstimate> {
    let (sum, norm) = conditional_density_k(chain, query)?;
    let sigma = chain.stages()[query.free()].sigma();
    let (centers, kernel) = kernel_of(&sum);
    let m = centers.len();
    let diagonal = (0..m).all(|i| (0..m).all(|j| i == j || kernel[(i, j)].norm() == 0.0));

    let (xs, method, acceptance) = if diagonal {
        let w: Vec<f64> = (0..m).map(|i| kernel[(i, i)].re.max(0.0)).collect();
        let total: f64 = w.iter().sum();
        let xs = run_lanes(cfg, |rng, quota, out| {
            out.reserve(quota);
            for _ in 0..quota {
                let mut u = rng.random::<f64>() * total;
                let mut g = m - 1;
                for (i, &wi) in w.iter().enumerate() {
                    if u < wi {
                        g = i;
                        break;
                    }
                    u -= wi;
                }
                let z: f64 = rng.sample(StandardNormal);
                out.push(centers[g] + sigma * z);
            }
            Ok(())
        })?;
        (xs, SampleMethod::Direct, 1.0)
    } else {
        let lambda = eigh(&kernel)?.values.last().copied().unwrap_or(0.0);
        // each g_a^2 (with the pointer prefactor) integrates to 1
        let acceptance = norm / (lambda * m as f64);
        if !(acceptance >= MIN_ACCEPTANCE) {
            return Err(Error::RejectionStall { rate: acceptance });
        }
        let bound = lambda * (1.0 + 1e-12);
        let rows = kernel.rows();
        let inv = 1.0 / (4.0 * sigma * sigma);
        let xs = run_lanes(cfg, |rng, quota, out| {
            out.reserve(quota);
            let mut g = vec![0.0; m];
            while out.len() < quota {
                let a = centers[rng.random_range(0..m)];
                let z: f64 = rng.sample(StandardNormal);
                let x = a + sigma * z;
                let mut env = 0.0;
                for (gi, &c) in g.iter_mut().zip(&centers) {
                    *gi = (-(x - c) * (x - c) * inv).exp();
                    env += *gi * *gi;
                }
                let mut p = 0.0;
                for i in 0..m {
                    p += rows[i][i].re * g[i] * g[i];
                    for j in i + 1..m {
                        p += 2.0 * rows[i][j].re * g[i] * g[j];
                    }
                }
                if rng.random::<f64>() * bound * env < p {
                    out.push(x);
                }
            }
            Ok(())
        })?;
        (xs, SampleMethod::Rejection, acceptance)
    };

    let (estimate, standard_error) = variance_with_jackknife(&xs)?;
    let nf = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    Ok(McEstimate {
        estimate,
        standard_error,
        mean,
        mean_standard_error: (estimate / nf).sqrt(),
        samples: xs.len(),
        method,
        acceptance,
    })
}
