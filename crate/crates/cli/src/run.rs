//! `chain` and `validate` commands.

use anyhow::{Context, Result};
use rayon::prelude::*;
use seqmeas::chain::conditional_stats_k;
use seqmeas::conditional::ExtractionFlag;
use seqmeas::oracle::{mc_conditional_variance, pointer_breaks, quad_stats, QuadratureConfig, SamplerConfig};
use seqmeas::validate::{format_report, run_all, run_suite, Suite, SuiteReport, ValidateConfig};

use crate::config::ChainConfig;
use crate::table::{num, CsvTable};

/// Oracle settings shared by `chain` and `validate`.
#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    pub seed: u64,
    pub mc_samples: usize,
    pub quad_tol: f64,
}

impl OracleSettings {
    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig { abs_tol: self.quad_tol, ..Default::default() }
    }
}

fn flag_name(flag: ExtractionFlag) -> &'static str {
    match flag {
        ExtractionFlag::Exact => "exact",
        ExtractionFlag::Clamped => "clamped",
        ExtractionFlag::Anomalous => "anomalous",
    }
}

/// One row per sweep point: conditional mean, variance and extracted
/// variance of the free outcome, optionally with quadrature and Monte Carlo
/// columns. Monte Carlo row `i` uses seed `seed + i`.
pub fn chain(
    cfg: &ChainConfig,
    config_bytes: &[u8],
    oracles: Option<OracleSettings>,
    seed: u64,
    command: &str,
) -> Result<CsvTable> {
    let mut header: Vec<&str> = Vec::new();
    if let Some(s) = &cfg.sweep {
        header.push(s.parameter.as_str());
    }
    header.extend(["mean", "variance", "extracted_variance", "flag"]);
    if oracles.is_some() {
        header.extend(["quad_mean", "quad_variance", "mc_variance", "mc_standard_error", "mc_acceptance"]);
    }
    let points = cfg.points();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &value)| -> Result<Vec<String>> {
            let at = || match value {
                Some(v) => format!("sweep point {v}"),
                None => "query".to_string(),
            };
            let (chain, query) = cfg.build(value).with_context(at)?;
            let r = conditional_stats_k(&chain, &query).with_context(at)?;
            let mut row = Vec::new();
            row.extend(value.map(num));
            row.extend([num(r.mean), num(r.variance), num(r.extracted_variance), flag_name(r.flag).to_string()]);
            if let Some(o) = oracles {
                let quad = o.quadrature();
                let free = &chain.stages()[query.free()];
                let breaks = pointer_breaks(&free.observable.distinct_values(), r.free_sigma, quad.pad);
                let q = quad_stats(|x| r.pdf(x), &breaks, &quad).with_context(at)?;
                let sampler = SamplerConfig::new(o.mc_samples, o.seed.wrapping_add(i as u64))?;
                let mc = mc_conditional_variance(&chain, &query, &sampler).with_context(at)?;
                row.extend([
                    num(q.mean),
                    num(q.variance),
                    num(mc.estimate),
                    num(mc.standard_error),
                    num(mc.acceptance),
                ]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(command, oracles.map(|_| seed), config_bytes, &header);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Runs one suite or all of them.
pub fn validate(which: Option<Suite>, settings: OracleSettings) -> (Vec<SuiteReport>, String) {
    let cfg = ValidateConfig {
        seed: settings.seed,
        mc_samples: settings.mc_samples,
        quad: settings.quadrature(),
        ..Default::default()
    };
    let reports = match which {
        Some(s) => vec![run_suite(s, &cfg)],
        None => run_all(&cfg),
    };
    let text = format_report(&reports);
    (reports, text)
}
