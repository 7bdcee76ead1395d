use riscap_core::capacity_bounds::{
    beamforming_rate, bipolar_input_mi, frobenius_relaxation, rank_one_capacity, solve_uqp, ub_frobenius, ub_max_trace,
    UqpOptions,
};
use riscap_core::db_to_linear;

use super::{ensure, le, Output};
use crate::config::Settings;
use crate::error::CliError;
use crate::output::{Cell, Plot, Series, Table};

pub fn run(s: &Settings) -> Result<Output, CliError> {
    let mut table = Table::new(&[
        "channel",
        "tau",
        "n_cols",
        "power_db",
        "f_star",
        "frobenius_lower",
        "frobenius_upper",
        "ub_max_trace",
        "ub_frobenius",
        "beamforming",
        "rank_one_capacity",
        "bipolar_mi",
        "scale",
    ]);
    let mut series = Vec::new();
    for ch in &s.channels {
        let eq = &ch.eq;
        let f_star = solve_uqp(eq, &UqpOptions::default())?.f_star;
        let (lo, hi) = (eq.frobenius_sq(), frobenius_relaxation(eq));
        ensure(le(lo, f_star) && le(f_star, hi), || {
            format!("bounds: channel {}: F* = {f_star} outside the Frobenius bracket [{lo}, {hi}]", ch.name)
        })?;
        let row_vec = (eq.tau() == 1).then(|| eq.hcheck().row(0).transpose());
        let mut points = Vec::new();
        for &db in &s.snr_grid_db {
            let e = db_to_linear(db);
            let mt = ub_max_trace(eq.tau(), f_star, e);
            let fr = ub_frobenius(eq, e);
            let bf = beamforming_rate(f_star, e);
            ensure(le(bf, mt) && le(mt, fr), || {
                format!("bounds: channel {}, {db} dB: ordering {bf} <= {mt} <= {fr} fails", ch.name)
            })?;
            let r1 = row_vec.as_ref().map(|h| rank_one_capacity(h, e)).transpose()?;
            table.push(vec![
                ch.name.as_str().into(),
                eq.tau().into(),
                eq.n_cols().into(),
                db.into(),
                f_star.into(),
                lo.into(),
                hi.into(),
                mt.into(),
                fr.into(),
                bf.into(),
                r1.into(),
                bipolar_input_mi(f_star, e).into(),
                ch.scale.map(Cell::Float).unwrap_or(Cell::Empty),
            ]);
            points.push((db, mt));
        }
        series.push(Series { name: format!("ub_max_trace {}", ch.name), points });
    }
    let plot = Plot {
        title: "Maximum-trace upper bound".into(),
        x_label: "power (dB)".into(),
        y_label: "bits per channel use".into(),
        series,
    };
    Ok(Output { table, plot })
}
