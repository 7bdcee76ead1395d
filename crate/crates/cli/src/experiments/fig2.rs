use rayon::prelude::*;
use riscap_core::db_to_linear;
use riscap_core::hsm_vgc::{diagnostics_delta, HsmChannel};

use super::{tag, Output};
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
            diagnostics_delta(&ch, &s.mc.derive(tag(&[2, m as u64, i as u64])))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["m", "snr_db", "delta1", "delta2", "delta3", "stderr1", "stderr2"]);
    let mut series = Vec::new();
    for &m in &s.dims {
        let mut d = [Vec::new(), Vec::new(), Vec::new()];
        for ((cm, i), r) in cells.iter().zip(&results) {
            if *cm != m {
                continue;
            }
            let x = s.snr_grid_db[*i];
            table.push(vec![
                m.into(),
                x.into(),
                r.delta1.value.into(),
                r.delta2.value.into(),
                r.delta3.into(),
                r.delta1.stderr.into(),
                r.delta2.stderr.into(),
            ]);
            d[0].push((x, r.delta1.value));
            d[1].push((x, r.delta2.value));
            d[2].push((x, r.delta3));
        }
        for (k, points) in d.into_iter().enumerate() {
            series.push(Series { name: format!("Delta{} m={m}", k + 1), points });
        }
    }
    let plot = Plot {
        title: "Scaled approximation errors".into(),
        x_label: "SNR (dB)".into(),
        y_label: "scaled error".into(),
        series,
    };
    Ok(Output { table, plot })
}
