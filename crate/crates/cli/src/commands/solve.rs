use std::path::Path;

use serde_json::json;

use aclab::field::VectorField;
use aclab::field_solver::{initial_guess, minimize};
use aclab::groups::RegionMap;
use aclab::linalg::dist;
use aclab::ode_connect::solve_connection;
use aclab::potentials::verify_hypotheses;

use super::connect::even_intervals;
use crate::config::Loaded;
use crate::output::{exit_code, numerical, usage, Failure, Output};

const HYPOTHESIS_SAMPLES: usize = 200;

pub fn solve(cfg: &Loaded, out: &Output, seed: u64, resume: Option<&Path>) -> Result<(), Failure> {
    let pot = cfg.potential()?;
    let group = cfg.group()?.ok_or_else(|| usage("solve needs a group"))?;
    let n = pot.dim();
    if !(2..=3).contains(&n) {
        return Err(usage(format!("solve needs a potential on R^2 or R^3, got R^{n}")));
    }
    if group.dimension() != n {
        return Err(usage(format!(
            "group {} acts on R^{} but the potential lives on R^{n}",
            group.name(),
            group.dimension()
        )));
    }
    let grid = cfg.grid(n)?;
    let (start, source) = match resume {
        Some(p) => {
            let p = cfg.resolve(p);
            let text = std::fs::read_to_string(&p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            let field = VectorField::from_csv(&text)?;
            if field.grid().dim() != n || field.value_dim() != n {
                return Err(usage(format!(
                    "resumed field has n = {}, m = {} but the potential needs {n}",
                    field.grid().dim(),
                    field.value_dim()
                )));
            }
            if grid.is_some_and(|g| g != *field.grid()) {
                return Err(usage("resumed field does not match the configured grid"));
            }
            (field, p.display().to_string())
        }
        None => {
            let grid = grid.ok_or_else(|| usage("solve needs a grid unless --resume is given"))?;
            let c = cfg.config.connect;
            let base = pot
                .wells()
                .get(c.minus)
                .ok_or_else(|| usage(format!("well index {} out of range", c.minus)))?;
            let map = RegionMap::new(&group, base)?;
            let partner = map
                .wells()
                .iter()
                .filter(|w| dist(w, base) > 1e-9)
                .min_by(|a, b| dist(a, base).total_cmp(&dist(b, base)))
                .ok_or_else(|| usage("the base well is fixed by the whole group"))?;
            let half_length = c.half_length.unwrap_or(grid.half_width());
            let intervals = c.intervals.unwrap_or_else(|| even_intervals(half_length, 0.01));
            let profile = solve_connection(&pot, base, partner, half_length, intervals, c.tol)?;
            (initial_guess(&map, &profile, &grid)?, "initial_guess".to_string())
        }
    };
    let mut opts = cfg.solve_options(start.grid());
    if resume.is_some() && cfg.config.solver.symmetrize_until.is_none() {
        // the saved field already went through the projection phase
        opts.symmetrize_until = 0;
    }
    let hypotheses = verify_hypotheses(&pot, &group, HYPOTHESIS_SAMPLES, 1e-8, seed).ok();
    let setup = json!({
        "potential": pot.name(),
        "group": group.name(),
        "grid": { "dim": start.grid().dim(), "R": start.grid().half_width(), "points": start.grid().points() },
        "start": source,
        "options": opts,
    });
    let outcome = match minimize(&start, &pot, &group, &opts) {
        Ok(o) => o,
        Err(e) => {
            out.write_report("report.json", json!({ "setup": setup, "error": e.to_string() }))?;
            return Err(Failure {
                code: exit_code(&e),
                message: e.to_string(),
            });
        }
    };
    out.write("field.csv", &outcome.field.to_csv())?;
    out.write_report(
        "report.json",
        json!({
            "setup": setup,
            "hypotheses": hypotheses,
            "iterations": outcome.iterations,
            "rejected_steps": outcome.rejected_steps,
            "initial_energy": outcome.initial_energy,
            "energy": outcome.energy,
            "residual": outcome.residual,
            "converged": outcome.converged,
            "equivariance_before": outcome.equivariance_before,
            "equivariance_after": outcome.equivariance_after,
            "positivity_violations": outcome.positivity_violations,
            "bounded": outcome.bounded,
            "energy_history": outcome.energy_history,
        }),
    )?;
    if !outcome.converged {
        return Err(numerical(format!(
            "residual {:e} above target {:e} after {} iterations",
            outcome.residual, opts.residual_target, outcome.iterations
        )));
    }
    Ok(())
}
