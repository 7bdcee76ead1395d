use rayon::prelude::*;
use riscap_core::db_to_linear;
use riscap_core::hsm_vgc::{capacity_asymptotic, capacity_exact, HsmChannel};
use riscap_core::LOG2_E;

use super::{ensure, tag, Output};
use crate::config::Settings;
use crate::error::CliError;
use crate::output::{Plot, Series, Table};

pub fn run(s: &Settings) -> Result<Output, CliError> {
    let cells: Vec<(u32, usize)> =
        s.dims.iter().flat_map(|&m| (0..s.snr_grid_db.len()).map(move |i| (m, i))).collect();
    let results = cells
        .par_iter()
        .map(|&(m, i)| {
            let ch = HsmChannel::new(m, db_to_linear(s.snr_grid_db[i]))?;
            Ok((capacity_exact(&ch, &s.mc.derive(tag(&[3, m as u64, i as u64])))?, capacity_asymptotic(&ch)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(&[
        "m",
        "snr_db",
        "capacity_per_dim",
        "stderr_per_dim",
        "asymptotic_per_dim",
        "upper_bound_per_dim",
        "empirical_rule_per_dim",
    ]);
    let mut series = Vec::new();
    let mut bound = Vec::new();
    for &m in &s.dims {
        let (mut mc, mut asym) = (Vec::new(), Vec::new());
        for ((cm, i), (est, a)) in cells.iter().zip(&results) {
            if *cm != m {
                continue;
            }
            let x = s.snr_grid_db[*i];
            let snr = db_to_linear(x);
            let mf = m as f64;
            let ub = 0.5 * snr.ln_1p() * LOG2_E;
            let (c, se, a) = (est.value / mf, est.stderr / mf, a / mf);
            ensure(c <= ub + 3.0 * se + 1e-12, || format!("fig3: m = {m}, {x} dB: capacity {c} exceeds bound {ub}"))?;
            table.push(vec![m.into(), x.into(), c.into(), se.into(), a.into(), ub.into(), ub.min(a).into()]);
            mc.push((x, c));
            asym.push((x, a));
            if m == s.dims[0] {
                bound.push((x, ub));
            }
        }
        series.push(Series { name: format!("Monte Carlo m={m}"), points: mc });
        series.push(Series { name: format!("asymptotic m={m}"), points: asym });
    }
    series.push(Series { name: "0.5 log2(1+snr)".into(), points: bound });
    let plot = Plot {
        title: "HSM-VGC capacity per dimension".into(),
        x_label: "SNR (dB)".into(),
        y_label: "bits per dimension".into(),
        series,
    };
    Ok(Output { table, plot })
}
