//! Spin-1/2 sweeps: closed form next to the generic engine on every row.

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use seqmeas::conditional::{backward_stats, forward_stats};
use seqmeas::joint::post_first_state;
use seqmeas::kraus::MeasurementStage;
use seqmeas::spin;
use seqmeas::state::variance_of;
use seqmeas::{DensityMatrix, Observable, PureState};

use crate::grid::Grid;
use crate::table::{num, CsvTable};

fn plus() -> DensityMatrix {
    DensityMatrix::from_pure(&PureState::plus())
}

fn stage(obs: Observable, sigma: f64, label: &str) -> Result<MeasurementStage> {
    Ok(MeasurementStage::new(obs, sigma, label)?)
}

/// Width of the second pointer in the forward sweep; the extracted
/// variance does not depend on it.
const FORWARD_SIGMA2: f64 = 1.0;

/// `Var(S_x)` after an unread `S_z` interaction, over a log-spaced `sigma1`.
pub fn fig2(sigma1: &Grid, command: &str) -> Result<CsvTable> {
    let s1 = sigma1.log().map_err(|e| anyhow!("--sigma1: {e}"))?;
    let rows: Vec<Vec<String>> = s1
        .par_iter()
        .map(|&s| -> Result<Vec<String>> {
            let rho1 = post_first_state(&plus(), &stage(Observable::spin_z(), s, "Sz")?)?;
            let engine = variance_of(&Observable::spin_x(), &rho1)?;
            Ok(vec![num(s), num(spin::var_sx_rho1_closed(s)), num(engine)])
        })
        .collect::<Result<_>>()?;
    let params = format!("fig2 sigma1={sigma1}");
    let mut t = CsvTable::new(command, None, params.as_bytes(), &["sigma1", "var_sx_rho1", "var_sx_rho1_engine"]);
    t.note("sigma1 is log-spaced");
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// `Var(S_x | S_z = x1)` over an `x1` by `sigma1` grid (x1 varies fastest).
pub fn fig3(x1: &Grid, sigma1: &Grid, command: &str) -> Result<CsvTable> {
    let xs = x1.linear();
    let ss = sigma1.positive_linear().map_err(|e| anyhow!("--sigma1: {e}"))?;
    let points: Vec<(f64, f64)> = ss.iter().flat_map(|&s| xs.iter().map(move |&x| (x, s))).collect();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&(x, s)| -> Result<Vec<String>> {
            let z = stage(Observable::spin_z(), s, "Sz")?;
            let sx = stage(Observable::spin_x(), FORWARD_SIGMA2, "Sx")?;
            let engine = forward_stats(&plus(), &z, &sx, x)
                .with_context(|| format!("x1 = {x}, sigma1 = {s}"))?
                .extracted_system_variance;
            Ok(vec![num(x), num(s), num(spin::var_sx_given_sz_closed(s, x)), num(engine)])
        })
        .collect::<Result<_>>()?;
    let params = format!("fig3 x1={x1} sigma1={sigma1}");
    let mut t = CsvTable::new(
        command,
        None,
        params.as_bytes(),
        &["x1", "sigma1", "var_sx_given_sz", "var_sx_given_sz_engine"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Values above this are off the usual `[0, 0.5]` display range.
pub const DISPLAY_CAP: f64 = 0.5;

/// `Var(S_z | S_x = x2)` over an `x2` by `sigma2` grid at fixed `sigma1`.
pub fn fig4(x2: &Grid, sigma2: &Grid, sigma1: f64, command: &str) -> Result<CsvTable> {
    let xs = x2.linear();
    let ss = sigma2.positive_linear().map_err(|e| anyhow!("--sigma2: {e}"))?;
    if !(sigma1 > 0.0 && sigma1.is_finite()) {
        return Err(anyhow!("--sigma1: pointer width must be positive and finite (got {sigma1})"));
    }
    let points: Vec<(f64, f64)> = ss.iter().flat_map(|&s| xs.iter().map(move |&x| (x, s))).collect();
    let rows: Vec<(f64, Vec<String>)> = points
        .par_iter()
        .map(|&(x, s)| -> Result<(f64, Vec<String>)> {
            let z = stage(Observable::spin_z(), sigma1, "Sz")?;
            let sx = stage(Observable::spin_x(), s, "Sx")?;
            let closed = spin::var_sz_given_sx_closed(sigma1, s, x)?;
            let engine = backward_stats(&plus(), &z, &sx, x)
                .with_context(|| format!("x2 = {x}, sigma2 = {s}"))?
                .extracted_system_variance;
            Ok((closed, vec![num(x), num(s), num(closed), num(engine)]))
        })
        .collect::<Result<_>>()?;
    let params = format!("fig4 x2={x2} sigma2={sigma2} sigma1={sigma1:?}");
    let mut t = CsvTable::new(
        command,
        None,
        params.as_bytes(),
        &["x2", "sigma2", "var_sz_given_sx", "var_sz_given_sx_engine"],
    );
    let over = rows.iter().filter(|(v, _)| *v > DISPLAY_CAP).count();
    if over > 0 {
        t.note(format!(
            "{over} rows exceed {DISPLAY_CAP} (negative x2 with a narrow second pointer); clip to [0, {DISPLAY_CAP}] when plotting"
        ));
    }
    rows.into_iter().for_each(|(_, r)| t.push(r));
    Ok(t)
}
