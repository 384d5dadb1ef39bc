//! CSV emission with fixed headers and plain-text gnuplot scripts.
//!
//! Floats are written as `{:.16e}` (17 significant digits, exact round trip);
//! a missing value is an empty field.

use std::io::Write;
use std::path::Path;

use crate::limit::CurveSample;
use crate::orbit::{CascadeReport, FixedPointRecord, Inventory};
use crate::return_map::ReturnKind;
use crate::sweep::RegimeCell;
use crate::Result;

pub const CURVES_HEADER: [&str; 3] = ["curve_id", "abscissa", "ordinate"];
pub const REGIME_HEADER: [&str; 5] = ["ix", "iy", "abscissa", "ordinate", "regime_code"];
pub const CASCADE_HEADER: [&str; 7] = ["k", "m", "mu_sn", "mu_pd", "mu_f", "mu_pdC", "coexistence_verified"];
pub const RESCALE_HEADER: [&str; 6] = ["kind", "k", "m", "mu", "residual", "excluded_fraction"];
pub const FIXED_POINTS_HEADER: [&str; 12] = [
    "period",
    "x",
    "y",
    "chart_x",
    "chart_y",
    "mult1_re",
    "mult1_im",
    "mult2_re",
    "mult2_im",
    "classification",
    "is_symmetric",
    "residual",
];
pub const INVENTORY_HEADER: [&str; 9] =
    ["mu", "kind", "k", "m", "x", "y", "classification", "is_symmetric", "residual"];

/// Round-trip float format.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One row of a rescaling residual table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescaleRow {
    pub kind: ReturnKind,
    pub k: usize,
    pub m: usize,
    pub mu: f64,
    pub residual: f64,
    pub excluded_fraction: f64,
}

fn write_rows<W: Write, I>(out: W, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves<W: Write>(out: W, samples: &[CurveSample]) -> Result<()> {
    write_rows(
        out,
        &CURVES_HEADER,
        samples.iter().map(|s| vec![s.curve.name().to_string(), fmt_f64(s.abscissa), fmt_f64(s.ordinate)]),
    )
}

pub fn write_regime<W: Write>(out: W, cells: &[RegimeCell]) -> Result<()> {
    write_rows(
        out,
        &REGIME_HEADER,
        cells.iter().map(|c| {
            vec![
                c.ix.to_string(),
                c.iy.to_string(),
                fmt_f64(c.abscissa),
                fmt_f64(c.ordinate),
                c.regime_code.to_string(),
            ]
        }),
    )
}

pub fn write_cascade<W: Write>(out: W, reports: &[CascadeReport]) -> Result<()> {
    write_rows(
        out,
        &CASCADE_HEADER,
        reports.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.m.to_string(),
                fmt_opt(r.mu_sn),
                fmt_opt(r.mu_pd),
                fmt_opt(r.mu_f),
                fmt_opt(r.mu_pdc),
                r.coexistence_verified.to_string(),
            ]
        }),
    )
}

pub fn write_rescale<W: Write>(out: W, rows: &[RescaleRow]) -> Result<()> {
    write_rows(
        out,
        &RESCALE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.kind.name().to_string(),
                r.k.to_string(),
                r.m.to_string(),
                fmt_f64(r.mu),
                fmt_f64(r.residual),
                fmt_f64(r.excluded_fraction),
            ]
        }),
    )
}

pub fn write_fixed_points<W: Write>(out: W, records: &[FixedPointRecord]) -> Result<()> {
    write_rows(
        out,
        &FIXED_POINTS_HEADER,
        records.iter().map(|r| {
            vec![
                r.period.to_string(),
                fmt_f64(r.point.x),
                fmt_f64(r.point.y),
                fmt_f64(r.chart.x),
                fmt_f64(r.chart.y),
                fmt_f64(r.multipliers[0].re),
                fmt_f64(r.multipliers[0].im),
                fmt_f64(r.multipliers[1].re),
                fmt_f64(r.multipliers[1].im),
                r.classification.name().to_string(),
                r.is_symmetric.to_string(),
                fmt_f64(r.residual),
            ]
        }),
    )
}

pub fn write_inventory<W: Write>(out: W, inv: &Inventory) -> Result<()> {
    write_rows(
        out,
        &INVENTORY_HEADER,
        inv.entries.iter().map(|e| {
            vec![
                fmt_f64(inv.mu),
                e.kind.name().to_string(),
                e.k.to_string(),
                e.m.to_string(),
                fmt_f64(e.record.point.x),
                fmt_f64(e.record.point.y),
                e.record.classification.name().to_string(),
                e.record.is_symmetric.to_string(),
                fmt_f64(e.record.residual),
            ]
        }),
    )
}

/// Which gnuplot layout to emit for a CSV file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Curves,
    Regime,
    Cascade,
    Rescale,
}

/// gnuplot commands that draw `csv` (referenced by file name).
pub fn plot_script(kind: PlotKind, csv: &Path) -> String {
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let head = format!("set datafile separator ','\nset key outside\nfile = '{name}'\n");
    let body = match kind {
        PlotKind::Curves => "set xlabel 'abscissa'\nset ylabel 'ordinate'\n\
             plot for [id in 'L_plus1 L_minus1 F0 PD1 PD2 PF PD_asym'] \
             file using 2:(strcol(1) eq id ? $3 : NaN) skip 1 with lines title id\n"
            .to_string(),
        PlotKind::Regime => "set xlabel 'abscissa'\nset ylabel 'ordinate'\nset view map\n\
             set palette maxcolors 64\n\
             plot file using 3:4:5 skip 1 with image title 'regime code'\n"
            .to_string(),
        PlotKind::Cascade => "set logscale y\nset xlabel 'k'\nset ylabel '|mu|'\n\
             plot file using 1:(abs($3)) skip 1 with linespoints title 'mu_sn', \
             '' using 1:(abs($4)) skip 1 with linespoints title 'mu_pd', \
             '' using 1:(abs($5)) skip 1 with linespoints title 'mu_f', \
             '' using 1:(abs($6)) skip 1 with linespoints title 'mu_pdC'\n"
            .to_string(),
        PlotKind::Rescale => "set logscale y\nset xlabel 'k'\nset ylabel 'residual'\n\
             plot file using 2:5 skip 1 with linespoints title 'residual'\n"
            .to_string(),
    };
    head + &body
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::CurveId;

    fn to_string(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, -0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn curves_csv_layout() {
        let s = [CurveSample { curve: CurveId::F0, abscissa: -1.0, ordinate: -1.0 }];
        let text = to_string(|b| write_curves(b, &s));
        assert_eq!(text, "curve_id,abscissa,ordinate\nF0,-1.0000000000000000e0,-1.0000000000000000e0\n");
    }

    #[test]
    fn cascade_missing_values_are_empty() {
        let mut r = CascadeReport::empty(9, 9);
        r.mu_sn = Some(0.5);
        let text = to_string(|b| write_cascade(b, &[r]));
        assert_eq!(text.lines().nth(1).unwrap(), "9,9,5.0000000000000000e-1,,,,false");
    }

    #[test]
    fn plot_script_references_file_name() {
        let s = plot_script(PlotKind::Regime, Path::new("/tmp/out/regime.csv"));
        assert!(s.contains("file = 'regime.csv'"));
    }
}
