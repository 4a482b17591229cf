use std::path::Path;

use serde_json::json;

use aclab::diagnostics::{
    decay_fit, divergence_identity_defect, divergence_residual, flux_of, hamiltonian_variance, junction_angles,
    modica_deficit, monotonicity_profile, pohozaev_residual, stress_energy, DiagnosticsReport, MonotonicityPower,
    DECAY_WINDOW,
};
use aclab::field::VectorField;
use aclab::field_solver::{energy, pde_residual};
use aclab::groups::RegionMap;
use aclab::linalg::dist;

use crate::config::Loaded;
use crate::output::{num, usage, Failure, Output};

const MONOTONICITY_TOL: f64 = 1e-6;
const MODICA_TOL: f64 = 1e-6;
const HAMILTONIAN_TOL: f64 = 1e-3;
const FLUX_TOL: f64 = 1e-3;
const FLUX_SAMPLES: usize = 720;

pub fn diagnose(cfg: &Loaded, out: &Output, field_arg: Option<&Path>) -> Result<(), Failure> {
    let pot = cfg.potential()?;
    let path = field_arg
        .map(Path::to_path_buf)
        .or_else(|| cfg.config.field.as_ref().map(|p| cfg.resolve(p)))
        .ok_or_else(|| usage("diagnose needs a field (--field or config \"field\")"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let field = VectorField::from_csv(&text)?;
    if field.value_dim() != pot.dim() {
        return Err(usage(format!(
            "field has {} components but the potential lives on R^{}",
            field.value_dim(),
            pot.dim()
        )));
    }
    let group = cfg.group()?;
    let grid = *field.grid();
    let n = grid.dim();
    let h = grid.spacing();
    let d = &cfg.config.diagnostics;
    let centre = d.centre.clone().unwrap_or_else(|| vec![0.0; n]);
    if centre.len() != n {
        return Err(usage(format!("diagnostics centre has {} coordinates, expected {n}", centre.len())));
    }
    let offset = centre.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut report = DiagnosticsReport::new();

    report.record("energy", energy(&field, &pot)?, None);
    report.record("pde_residual", pde_residual(&field, &pot)?, None);
    let t = stress_energy(&field, &pot)?;
    report.record("stress_energy_asymmetry", t.asymmetry(), None);
    report.record("divergence_residual", divergence_residual(&t), None);
    report.record("divergence_identity_defect", divergence_identity_defect(&field, &pot)?, None);

    let modica = modica_deficit(&field, &pot)?;
    if field.value_dim() == 1 {
        report.record("modica_deficit", modica, Some(MODICA_TOL));
    } else {
        report.record("modica_deficit", modica, None);
    }

    match pohozaev_residual(&field, &pot, &centre) {
        Ok(v) => report.record("pohozaev_residual", v, None),
        Err(e) => report.flag("pohozaev_residual", &e.to_string()),
    }

    let reach = grid.half_width() - h - offset;
    let radii = d
        .monotonicity_radii
        .clone()
        .unwrap_or_else(|| (1..=10).map(|k| reach * k as f64 / 10.0).collect());
    let mut mono_csv = String::from("power,radius,energy,normalized\n");
    let powers: &[MonotonicityPower] = if field.value_dim() == 1 {
        &[MonotonicityPower::Standard, MonotonicityPower::Strong]
    } else {
        &[MonotonicityPower::Standard]
    };
    for &power in powers {
        let name = match power {
            MonotonicityPower::Standard => "monotonicity_violation",
            MonotonicityPower::Strong => "strong_monotonicity_violation",
        };
        match monotonicity_profile(&field, &pot, &centre, &radii, power) {
            Ok(p) => {
                report.record(name, p.max_violation, Some(MONOTONICITY_TOL));
                for i in 0..p.radii.len() {
                    mono_csv.push_str(&format!(
                        "{},{},{},{}\n",
                        p.power,
                        num(p.radii[i]),
                        num(p.energies[i]),
                        num(p.normalized[i])
                    ));
                }
            }
            Err(e) => report.flag(name, &e.to_string()),
        }
    }
    out.write("monotonicity.csv", &mono_csv)?;

    if n == 2 {
        let [lo, hi] = d.hamiltonian_strip.unwrap_or([-grid.half_width() + 2.0 * h, grid.half_width() - 2.0 * h]);
        match hamiltonian_variance(&field, &pot, 0, lo, hi) {
            Ok(r) => {
                out.write("hamiltonian.csv", &r.to_csv())?;
                report.record("hamiltonian_mean", r.mean, None);
                if r.decay_ok {
                    report.record("hamiltonian_relative_variance", r.relative_variance, Some(HAMILTONIAN_TOL));
                } else {
                    report.record("hamiltonian_relative_variance", r.relative_variance, None);
                    report.flag("hamiltonian_decay", "line ends are not within 0.05 of a well");
                }
            }
            Err(e) => report.flag("hamiltonian_relative_variance", &e.to_string()),
        }
    } else {
        report.flag("hamiltonian_relative_variance", "evaluated for n = 2 only");
    }

    let flux_radii = d.flux_radii.clone().unwrap_or_else(|| {
        let limit = grid.half_width() - 2.0 * h - offset;
        vec![0.4 * limit, 0.8 * limit]
    });
    let fluxes: aclab::Result<Vec<_>> = flux_radii.iter().map(|&r| flux_of(&t, &centre, r, FLUX_SAMPLES)).collect();
    match fluxes {
        Ok(f) => {
            for (r, v) in flux_radii.iter().zip(&f) {
                report.record_vector(&format!("flux_r{r}"), v.clone(), None, None);
            }
            if f.len() >= 2 {
                let gap = f.windows(2).map(|w| dist(&w[0], &w[1])).fold(0.0, f64::max);
                report.record("flux_gap", gap, Some(FLUX_TOL));
            }
        }
        Err(e) => report.flag("flux_gap", &e.to_string()),
    }

    let wells = pot.wells();
    if n == 2 && wells.len() >= 3 {
        let r0 = d.junction_radius.unwrap_or(grid.half_width() / 4.0);
        match junction_angles(&field, wells, r0) {
            Ok(ja) => {
                let deg: Vec<f64> = ja.angles.iter().map(|a| a.1.to_degrees()).collect();
                report.record_vector("junction_centre", ja.centre.clone(), None, None);
                report.record_vector("junction_angles_deg", deg, None, None);
                if ja.ambiguous {
                    report.flag("junction_location", "several separated nodes compete for the junction");
                }
            }
            Err(e) => report.flag("junction_angles_deg", &e.to_string()),
        }
    }

    match &group {
        Some(g) if g.dimension() == n && n == field.value_dim() && !wells.is_empty() => {
            let base = &wells[d.decay_well.unwrap_or(0).min(wells.len() - 1)];
            match RegionMap::new(g, base) {
                Ok(map) => {
                    let label = map.region_of(base).label;
                    match decay_fit(&field, &map, label, base, DECAY_WINDOW) {
                        Ok(fit) if !fit.degenerate => {
                            report.record_vector("decay_fit", vec![fit.amplitude, fit.rate], None, Some(fit.rate > 0.0))
                        }
                        Ok(fit) => report.flag(
                            "decay_fit",
                            &format!("only {} samples inside the fitting window", fit.samples),
                        ),
                        Err(e) => report.flag("decay_fit", &e.to_string()),
                    }
                }
                Err(e) => report.flag("decay_fit", &e.to_string()),
            }
        }
        Some(_) => report.flag("decay_fit", "group dimension does not match the field"),
        None => report.flag("decay_fit", "no group configured"),
    }

    out.write_report(
        "diagnostics.json",
        json!({
            "field": path.display().to_string(),
            "potential": pot.name(),
            "grid": { "dim": n, "R": grid.half_width(), "points": grid.points() },
            "centre": centre,
            "entries": report.entries(),
        }),
    )
}
