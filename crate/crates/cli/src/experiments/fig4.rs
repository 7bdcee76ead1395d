use rayon::prelude::*;
use riscap_core::capacity_bounds::{beamforming_rate, solve_uqp, ub_frobenius, ub_max_trace, UqpOptions};
use riscap_core::channel_model::EquivalentChannel;
use riscap_core::db_to_linear;
use riscap_core::qr_sic::{
    optimize_permutation, plan, rate_gaussian_cpsk, rate_gaussian_cpsk_asymptotic, rate_hypersphere_cpsk,
    rate_hypersphere_cpsk_asymptotic, CsEvaluator, Scheme,
};

use super::{ensure, le, tag, Output};
use crate::config::Settings;
use crate::error::CliError;
use crate::output::{Cell, Plot, Series, Table};

pub const CURVES: [&str; 11] = [
    "ub_max_trace",
    "ub_frobenius",
    "beamforming",
    "gaussian_cpsk",
    "gaussian_cpsk_asymptotic",
    "gaussian_cpsk_perm",
    "gaussian_cpsk_perm_asymptotic",
    "hypersphere_cpsk",
    "hypersphere_cpsk_asymptotic",
    "hypersphere_cpsk_perm",
    "hypersphere_cpsk_perm_asymptotic",
];

/// Rows of one grid cell: `(curve index, rate, stderr, permutation)`.
type CellRows = Vec<(usize, f64, f64, Option<Vec<usize>>)>;

/// `(curve, srr index, grid index, rate, stderr, permutation)`.
type Row = (usize, usize, usize, f64, f64, Option<Vec<usize>>);

fn perm_text(p: &[usize]) -> String {
    p.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ")
}

fn cell(s: &Settings, eq: &EquivalentChannel, f_star: f64, li: usize, i: usize) -> Result<CellRows, CliError> {
    let l = s.srr[li];
    let db = s.snr_grid_db[i];
    let e = db_to_linear(db);
    let tau = eq.tau();
    let seed = |curve: u64| s.mc.derive(tag(&[4, l as u64, i as u64, curve]));
    let mt = ub_max_trace(tau, f_star, e);
    let fr = ub_frobenius(eq, e);
    let bf = beamforming_rate(f_star, e);
    ensure(le(bf, mt) && le(mt, fr), || format!("fig4: L = {l}, {db} dB: bound ordering {bf} <= {mt} <= {fr} fails"))?;

    let identity: Vec<usize> = (0..eq.n_cols()).collect();
    let (gperm, _) = optimize_permutation(eq, e, l, Scheme::GaussianCpsk, s.permutation_budget, s.mc.seed)?;
    let (hperm, _) = optimize_permutation(eq, e, l, Scheme::HypersphereCpsk, s.permutation_budget, s.mc.seed)?;
    let p_id = plan(eq)?;
    let p_g = plan(&eq.permute(&gperm)?)?;
    let p_h = plan(&eq.permute(&hperm)?)?;

    let g_id = rate_gaussian_cpsk(&p_id, e, l, &seed(3))?;
    let g_perm = rate_gaussian_cpsk(&p_g, e, l, &seed(5))?;
    let h_id = rate_hypersphere_cpsk(&p_id, e, l, CsEvaluator::MonteCarlo(seed(7)))?;
    let h_perm = rate_hypersphere_cpsk(&p_h, e, l, CsEvaluator::MonteCarlo(seed(9)))?;
    for (name, r) in [("gaussian_cpsk", g_id), ("gaussian_cpsk_perm", g_perm), ("hypersphere_cpsk", h_id), ("hypersphere_cpsk_perm", h_perm)] {
        ensure(le(r.value, mt + 3.0 * r.stderr), || {
            format!("fig4: L = {l}, {db} dB: {name} rate {} exceeds ub_max_trace {mt} + 3 stderr", r.value)
        })?;
    }

    Ok(vec![
        (0, mt, 0.0, None),
        (1, fr, 0.0, None),
        (2, bf, 0.0, None),
        (3, g_id.value, g_id.stderr, Some(identity.clone())),
        (4, rate_gaussian_cpsk_asymptotic(&p_id, e, l)?, 0.0, Some(identity.clone())),
        (5, g_perm.value, g_perm.stderr, Some(gperm.clone())),
        (6, rate_gaussian_cpsk_asymptotic(&p_g, e, l)?, 0.0, Some(gperm)),
        (7, h_id.value, h_id.stderr, Some(identity.clone())),
        (8, rate_hypersphere_cpsk_asymptotic(&p_id, e, l)?, 0.0, Some(identity)),
        (9, h_perm.value, h_perm.stderr, Some(hperm.clone())),
        (10, rate_hypersphere_cpsk_asymptotic(&p_h, e, l)?, 0.0, Some(hperm)),
    ])
}

pub fn run(s: &Settings) -> Result<Output, CliError> {
    let channel = &s.channels[0];
    let eq = &channel.eq;
    let f_star = solve_uqp(eq, &UqpOptions::default())?.f_star;
    let cells: Vec<(usize, usize)> =
        (0..s.srr.len()).flat_map(|li| (0..s.snr_grid_db.len()).map(move |i| (li, i))).collect();
    let results = cells
        .par_iter()
        .map(|&(li, i)| cell(s, eq, f_star, li, i))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut rows: Vec<Row> = Vec::new();
    for (&(li, i), cell_rows) in cells.iter().zip(results) {
        for (c, v, se, p) in cell_rows {
            rows.push((c, li, i, v, se, p));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1, r.2));

    let mut table = Table::new(&["curve", "srr", "snr_db", "rate", "stderr", "permutation"]);
    let mut series: Vec<Series> = Vec::new();
    for (c, li, i, v, se, p) in &rows {
        let l = s.srr[*li];
        table.push(vec![
            CURVES[*c].into(),
            l.into(),
            s.snr_grid_db[*i].into(),
            (*v).into(),
            (*se).into(),
            p.as_ref().map(|p| Cell::Text(perm_text(p))).unwrap_or(Cell::Empty),
        ]);
        let bound_curve = *c < 3;
        if bound_curve && *li > 0 {
            continue;
        }
        let name = if bound_curve { CURVES[*c].to_string() } else { format!("{} L={l}", CURVES[*c]) };
        match series.last_mut() {
            Some(last) if last.name == name => last.points.push((s.snr_grid_db[*i], *v)),
            _ => series.push(Series { name, points: vec![(s.snr_grid_db[*i], *v)] }),
        }
    }
    let plot = Plot {
        title: format!("Rates on channel {}", channel.name),
        x_label: "SNR (dB)".into(),
        y_label: "bits per channel use".into(),
        series,
    };
    Ok(Output { table, plot })
}
