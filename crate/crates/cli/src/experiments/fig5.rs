use rayon::prelude::*;
use riscap_core::capacity_bounds::{beamforming_rate, solve_uqp, ub_max_trace, UqpOptions};
use riscap_core::channel_model::{generate_ensemble, ChannelEnsembleSpec};
use riscap_core::db_to_linear;
use riscap_core::qr_sic::{plan, rate_gaussian_cpsk, rate_hypersphere_cpsk, CsEvaluator};

use super::{ensure, le, tag, Output};
use crate::config::Settings;
use crate::error::CliError;
use crate::output::{Plot, Series, Table};

pub const SCHEMES: [&str; 2] = ["gaussian_cpsk", "hypersphere_cpsk"];

/// Per-realization `(beamforming, [gaussian, hypersphere])` rates.
type Member = (f64, [f64; 2]);

fn member(s: &Settings, n: usize, j: usize, eq: &riscap_core::EquivalentChannel, e: f64) -> Result<Member, CliError> {
    let f_star = solve_uqp(eq, &UqpOptions::default())?.f_star;
    let bf = beamforming_rate(f_star, e);
    let mt = ub_max_trace(eq.tau(), f_star, e);
    let p = plan(eq)?;
    let g = rate_gaussian_cpsk(&p, e, 1, &s.mc.derive(tag(&[5, n as u64, j as u64])))?;
    let h = rate_hypersphere_cpsk(&p, e, 1, CsEvaluator::Table)?;
    ensure(le(bf, mt), || format!("fig5: n = {n}, realization {j}: beamforming {bf} exceeds ub_max_trace {mt}"))?;
    for (name, r) in [("gaussian_cpsk", g), ("hypersphere_cpsk", h)] {
        ensure(le(r.value, mt + 3.0 * r.stderr), || {
            format!("fig5: n = {n}, realization {j}: {name} rate {} exceeds ub_max_trace {mt} + 3 stderr", r.value)
        })?;
    }
    Ok((bf, [g.value, h.value]))
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ensemble drawn for `n` reflective elements.
pub fn ensemble_spec(s: &Settings, n: usize) -> ChannelEnsembleSpec {
    ChannelEnsembleSpec {
        n_r: s.n_r,
        n,
        srr: 1,
        los_gain_db: s.los_gain_db,
        seed: s.mc.derive(tag(&[5, n as u64])).seed,
        normalization: s.normalization,
    }
}

pub fn run(s: &Settings) -> Result<Output, CliError> {
    let e = db_to_linear(s.power_db);
    let mut table = Table::new(&["scheme", "n", "mean_gain", "stderr", "mean_qr_rate", "mean_beamforming_rate", "count"]);
    let mut series: Vec<Series> = SCHEMES.iter().map(|name| Series { name: name.to_string(), points: Vec::new() }).collect();
    let mut rows = Vec::new();
    for &n in &s.n_values {
        let members = generate_ensemble(&ensemble_spec(s, n), s.ensemble_count)?;
        let rates = members
            .par_iter()
            .enumerate()
            .map(|(j, eq)| member(s, n, j, eq, e))
            .collect::<Result<Vec<_>, CliError>>()?;
        let bf: Vec<f64> = rates.iter().map(|r| r.0).collect();
        let (mean_bf, _) = mean_and_stderr(&bf);
        for k in 0..SCHEMES.len() {
            let qr: Vec<f64> = rates.iter().map(|r| r.1[k]).collect();
            let gains: Vec<f64> = rates.iter().map(|r| r.1[k] - r.0).collect();
            let (g, se) = mean_and_stderr(&gains);
            let (mean_qr, _) = mean_and_stderr(&qr);
            rows.push((k, n, g, se, mean_qr, mean_bf));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1));
    for (k, n, g, se, mean_qr, mean_bf) in rows {
        table.push(vec![SCHEMES[k].into(), n.into(), g.into(), se.into(), mean_qr.into(), mean_bf.into(), s.ensemble_count.into()]);
        series[k].points.push((n as f64, g));
    }
    let plot = Plot {
        title: format!("Average rate gain over beamforming at {} dB", s.power_db),
        x_label: "n".into(),
        y_label: "bits per channel use".into(),
        series,
    };
    Ok(Output { table, plot })
}
