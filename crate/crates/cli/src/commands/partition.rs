use serde_json::json;

use aclab::partitions::{
    blow_down, density, double_junction, hausdorff_distance, line, partition_energy, reconnected_competitor, triod,
    x_cone, PolygonalPartition, TensionMatrix,
};

use crate::config::{Loaded, PartitionConfig};
use crate::output::{num, usage, Failure, Output};

const DEFAULT_SEPARATION: f64 = 0.2;

fn build(name: &str, c: &PartitionConfig, centre: [f64; 2]) -> Result<PolygonalPartition, Failure> {
    let part = match name {
        "line" => line(centre, 0.0),
        "triod" => triod(centre),
        "x_cone" => x_cone(),
        "double_junction" => double_junction(c.separation.unwrap_or(DEFAULT_SEPARATION)),
        other => {
            return Err(usage(format!(
                "unknown partition builder '{other}' (line, triod, x_cone, double_junction)"
            )))
        }
    };
    Ok(part?)
}

pub fn partition(cfg: &Loaded, out: &Output) -> Result<(), Failure> {
    let c = cfg
        .config
        .partition
        .as_ref()
        .ok_or_else(|| usage("partition needs a \"partition\" section"))?;
    let centre = c.centre.unwrap_or([0.0, 0.0]);
    let part = match (&c.input, &c.builder) {
        (Some(p), None) => {
            let p = cfg.resolve(p);
            let text = std::fs::read_to_string(&p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            PolygonalPartition::from_json(&text)?
        }
        (None, Some(b)) => build(b, c, centre)?,
        _ => return Err(usage("partition needs exactly one of \"input\" and \"builder\"")),
    };
    let tensions = match &c.tensions {
        Some(t) => TensionMatrix::new(part.phases, t.clone())?,
        None => TensionMatrix::uniform(part.phases, 1.0)?,
    };
    let window = c.window_radius.unwrap_or(1.0);
    let radii = c
        .radii
        .clone()
        .unwrap_or_else(|| (1..=10).map(|k| window * k as f64 / 10.0).collect());

    let mut series = String::from("radius,mass,density,energy\n");
    let mut densities = Vec::with_capacity(radii.len());
    for &r in &radii {
        let theta = density(&part, centre, r)?;
        let e = partition_energy(&part, &tensions, centre, r)?;
        densities.push(theta);
        series.push_str(&format!("{},{},{},{}\n", num(r), num(part.mass_in_disk(centre, r)), num(theta), num(e)));
    }
    out.write("density.csv", &series)?;

    let window_energy = partition_energy(&part, &tensions, centre, window)?;
    let is_double = c.builder.as_deref() == Some("double_junction");
    let target = match (&c.target, is_double) {
        (Some(t), _) => Some(build(t, c, [0.0, 0.0])?),
        (None, true) => Some(x_cone()?),
        (None, false) => None,
    };
    let mut blow = serde_json::Value::Null;
    if let Some(target) = target {
        let scales = c
            .scales
            .clone()
            .unwrap_or_else(|| (0..10).map(|k| 0.5f64.powi(k)).collect());
        let resolution = window / 2000.0;
        let mut csv = String::from("scale,hausdorff\n");
        let mut dists = Vec::with_capacity(scales.len());
        for (mu, scaled) in scales.iter().zip(blow_down(&part, centre, &scales)?) {
            let d = hausdorff_distance(&scaled, &target, [0.0, 0.0], window, resolution);
            dists.push(d);
            csv.push_str(&format!("{},{}\n", num(*mu), num(d)));
        }
        out.write("blow_down.csv", &csv)?;
        blow = json!({
            "scales": scales,
            "hausdorff": dists,
            "nonincreasing": dists.windows(2).all(|w| w[1] <= w[0]),
        });
    }
    let competitor = if is_double {
        let s = c.separation.unwrap_or(DEFAULT_SEPARATION);
        let comp = reconnected_competitor(s, window)?;
        let e = partition_energy(&comp, &tensions, [0.0, 0.0], window)?;
        let x = partition_energy(&x_cone()?, &tensions, [0.0, 0.0], window)?;
        json!({
            "reconnected_energy": e,
            "x_cone_energy": x,
            "strictly_greater": window_energy > e,
        })
    } else {
        serde_json::Value::Null
    };
    out.write_report(
        "report.json",
        json!({
            "phases": part.phases,
            "centre": centre,
            "window_radius": window,
            "window_energy": window_energy,
            "tensions_metric": tensions.is_metric(),
            "radii": radii,
            "densities": densities,
            "blow_down": blow,
            "competitor": competitor,
        }),
    )
}
