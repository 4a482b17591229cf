use serde_json::json;

use aclab::ode_connect::{
    action, collocation_residual, equipartition_residual, hyperbolicity_gap, solve_connection_with, tail_decay,
    ConnectOptions, SymmetryClass,
};

use super::value_or_error;
use crate::config::Loaded;
use crate::output::{exit_code, usage, Failure, Output};

pub fn connect1d(cfg: &Loaded, out: &Output) -> Result<(), Failure> {
    let pot = cfg.potential()?;
    let c = cfg.config.connect;
    let wells = pot.wells();
    let well = |i: usize| {
        wells
            .get(i)
            .cloned()
            .ok_or_else(|| usage(format!("well index {i} out of range ({} wells)", wells.len())))
    };
    let (a_minus, a_plus) = (well(c.minus)?, well(c.plus)?);
    let half_length = c.half_length.unwrap_or(10.0);
    let intervals = c.intervals.unwrap_or_else(|| even_intervals(half_length, 0.01));
    let setup = json!({
        "potential": pot.name(),
        "a_minus": a_minus,
        "a_plus": a_plus,
        "half_length": half_length,
        "intervals": intervals,
        "tol": c.tol,
    });
    let (profile, stats) =
        match solve_connection_with(&pot, &a_minus, &a_plus, half_length, intervals, c.tol, &ConnectOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                let code = exit_code(&e);
                let residual = match &e {
                    aclab::Error::NonConvergence { residual, .. } => Some(*residual),
                    _ => None,
                };
                out.write_report("report.json", json!({ "setup": setup, "error": e.to_string(), "residual": residual }))?;
                return Err(Failure {
                    code,
                    message: e.to_string(),
                });
            }
        };
    out.write("profile.csv", &profile.to_csv())?;
    let (left, right) = tail_decay(&profile);
    out.write_report(
        "report.json",
        json!({
            "setup": setup,
            "stats": stats,
            "action": action(&profile),
            "collocation_residual": collocation_residual(&profile),
            "equipartition_residual": equipartition_residual(&profile),
            "hyperbolicity_gap": {
                "unrestricted": value_or_error(hyperbolicity_gap(&profile, &SymmetryClass::Unrestricted)),
                "symmetric": value_or_error(hyperbolicity_gap(&profile, &SymmetryClass::Symmetric(None))),
            },
            "tail_decay": { "left": left, "right": right },
        }),
    )
}

/// Even interval count giving spacing close to `h` on `[-L, L]`.
pub fn even_intervals(half_length: f64, h: f64) -> usize {
    let k = (2.0 * half_length / h).round() as usize;
    (k + k % 2).max(4)
}
