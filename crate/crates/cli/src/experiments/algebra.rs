use homoeoid::algebra::{
    appendix_jacobian_check, cauchy_binet_check, identity_suite, identity_suite_exact, nondeg_bounds_scan,
    IdentityReport, NondegParams,
};

use super::{axis, drift, Metrics};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Outcome, Table};

pub const CAUCHY_BINET_TRIALS: usize = 10_000;
pub const APPENDIX_R_SAMPLES: usize = 100;
pub const APPENDIX_TOL: f64 = 1e-6;
pub const DET_FLOOR: f64 = 0.01;
pub const EXACT_MAX_DIM: usize = 4;
pub const NONDEG_SEEDS: u64 = 3;
pub const NONDEG_MAX_DRIFT: f64 = 2.0;

const COLUMNS: [&str; 9] = ["check", "n", "trials", "value", "reference", "residual", "threshold", "passed", "detail"];

fn report_row(t: &mut Table, r: &IdentityReport) {
    t.push(vec![
        r.name.as_str().into(),
        0usize.into(),
        r.trials.into(),
        r.max_relative_residual.into(),
        0.0.into(),
        r.max_relative_residual.into(),
        r.threshold.into(),
        r.passed().into(),
        r.worst_case_input.as_str().into(),
    ]);
}

/// Identity suite, its exact counterpart, the Cauchy-Binet dual path and the
/// Jacobian of `r -> r^2/|r|`.
pub fn identities(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dims: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => (2..=8).collect(),
    };
    let trials = cfg.over_usize("trials").or(cfg.samples).unwrap_or(1000);
    let mut params = homoeoid::algebra::SuiteParams::new(dims.clone(), trials, cfg.seed);
    params.k = cfg.over_usize("k");
    let float = identity_suite(&params)?;
    let small: Vec<usize> = dims.iter().copied().filter(|&n| n <= EXACT_MAX_DIM).collect();
    let exact = if small.is_empty() {
        Vec::new()
    } else {
        identity_suite_exact(&homoeoid::algebra::SuiteParams { dims: small, ..params.clone() })?
    };
    let cb = cauchy_binet_check(&dims, CAUCHY_BINET_TRIALS, cfg.seed)?;
    let app = appendix_jacobian_check(&dims, APPENDIX_R_SAMPLES, cfg.seed)?;

    let mut table = Table::new(&COLUMNS);
    let mut m = Metrics::default();
    let mut pass = true;
    for r in float.iter().chain(&exact).chain([&cb]) {
        report_row(&mut table, r);
        m.f(&format!("{}_residual", r.name), r.max_relative_residual);
        pass &= r.passed();
    }
    for r in [&app.fd_vs_direct, &app.display_symmetric, &app.closed_form] {
        report_row(&mut table, r);
        m.f(&format!("{}_residual", r.name), r.max_relative_residual);
        pass &= r.passed();
    }
    // Recorded, never gating: the display matrix is only right at r = (1, ..., 1).
    report_row(&mut table, &app.display_generic);
    m.f("display_generic_residual", app.display_generic.max_relative_residual);

    let homogeneous = app.homogeneous(APPENDIX_TOL);
    let n2 = app.det_ones(2);
    let n2_ok = n2.map_or(true, |v| (v - 1.0).abs() < APPENDIX_TOL);
    let floor = app.min_abs_det_three_halves();
    let floor_ok = floor > DET_FLOOR;
    for row in &app.rows {
        let n = row.n;
        let mut push = |check: &str, value: f64, reference: f64, threshold: f64, ok: bool| {
            table.push(vec![
                check.into(),
                n.into(),
                APPENDIX_R_SAMPLES.into(),
                value.into(),
                reference.into(),
                (value - reference).abs().into(),
                threshold.into(),
                ok.into(),
                Cell::Text(String::new()),
            ]);
        };
        push("det_jphi_ones", row.det_ones, row.closed_form, APPENDIX_TOL, (row.det_ones - row.closed_form).abs() < APPENDIX_TOL);
        push("det_jphi_homogeneity_spread", row.homogeneity_spread, 0.0, APPENDIX_TOL, row.homogeneity_spread < APPENDIX_TOL);
        push("det_jphi_three_halves", row.det_three_halves.abs(), DET_FLOOR, DET_FLOOR, row.det_three_halves.abs() > DET_FLOOR);
        push("det_jphi_display", row.display_value, row.det_ones, f64::NAN, true);
        push("det_jphi_display_ratio", row.display_ratio, 1.0, f64::NAN, true);
    }
    if let Some(v) = n2 {
        m.f("det_jphi_ones_n2", v);
    }
    m.f("min_abs_det_three_halves", floor)
        .set("homogeneous", homogeneous)
        .set("trials", trials)
        .set("dims", dims.clone());
    pass &= homogeneous && n2_ok && floor_ok;
    Ok(m.finish(pass, table))
}

/// Non-degeneracy constants over three seeds; the inverse bound must not
/// drift by more than a factor two.
pub fn nondeg(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.dim();
    let k = axis(cfg);
    let trials = cfg.over_usize("trials").or(cfg.samples).unwrap_or(1000);
    let mut table = Table::new(&[
        "seed",
        "n",
        "k",
        "c_bar",
        "proposals",
        "accepted",
        "min_det_ratio",
        "max_inverse_ratio",
        "max_minor_ratio",
        "t_min",
        "t_max",
    ]);
    let mut reports = Vec::new();
    for i in 0..NONDEG_SEEDS {
        let seed = cfg.seed.wrapping_add(i);
        let mut p = NondegParams::new(n, k, trials, seed);
        if let Some(c) = cfg.over("c_n") {
            p.c_n = c;
            p.c_bar = 0.1 * c;
        }
        if let Some(c) = cfg.over("c_bar") {
            p.c_bar = c;
        }
        let r = nondeg_bounds_scan(&p)?;
        table.push(vec![
            seed.into(),
            n.into(),
            k.into(),
            r.c_bar.into(),
            r.proposals.into(),
            r.accepted.into(),
            r.min_det_ratio.into(),
            r.max_inverse_ratio.into(),
            r.max_minor_ratio.into(),
            r.t_min.into(),
            r.t_max.into(),
        ]);
        reports.push(r);
    }
    let inv_drift = drift(reports.iter().map(|r| r.max_inverse_ratio));
    let det_drift = drift(reports.iter().map(|r| 1.0 / r.min_det_ratio));
    let mut m = Metrics::default();
    m.f("inverse_drift", inv_drift)
        .f("det_floor_drift", det_drift)
        .f("max_inverse_ratio", reports.iter().map(|r| r.max_inverse_ratio).fold(0.0, f64::max))
        .f("min_det_ratio", reports.iter().map(|r| r.min_det_ratio).fold(f64::INFINITY, f64::min))
        .f("max_minor_ratio", reports.iter().map(|r| r.max_minor_ratio).fold(0.0, f64::max))
        .f("acceptance_rate", {
            let (a, p) = reports.iter().fold((0, 0), |(a, p), r| (a + r.accepted, p + r.proposals));
            a as f64 / p as f64
        });
    Ok(m.finish(inv_drift <= NONDEG_MAX_DRIFT, table))
}
