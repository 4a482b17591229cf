use std::path::Path;

use serde_json::json;

use aclab::partitions::{steiner_point, WeightedTriangle};

use crate::config::Loaded;
use crate::output::{num, usage, Failure, Output};

const COLUMNS: [&str; 10] = ["id", "ax", "ay", "bx", "by", "cx", "cy", "e12", "e13", "e23"];

/// One batch row: its id and either a triangle or the reason it could not be read.
type Row = (String, Result<WeightedTriangle, String>);

fn read_batch(path: &Path) -> Result<Vec<Row>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| usage(format!("bad batch header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != COLUMNS {
        return Err(usage(format!("batch header must be {}", COLUMNS.join(","))));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(format!("bad batch row {}: {e}", k + 2)))?;
        let id = record.get(0).unwrap_or_default().to_string();
        let parsed = (|| {
            if record.len() != COLUMNS.len() {
                return Err(format!("expected {} columns, found {}", COLUMNS.len(), record.len()));
            }
            let v: Vec<f64> = (1..COLUMNS.len())
                .map(|i| {
                    let f = &record[i];
                    f.parse::<f64>().map_err(|_| format!("column {} is not a number: '{f}'", COLUMNS[i]))
                })
                .collect::<Result<_, _>>()?;
            Ok(WeightedTriangle {
                a: [v[0], v[1]],
                b: [v[2], v[3]],
                c: [v[4], v[5]],
                e12: v[6],
                e13: v[7],
                e23: v[8],
            })
        })();
        rows.push((id, parsed));
    }
    Ok(rows)
}

pub fn steiner(cfg: &Loaded, out: &Output, batch_arg: Option<&Path>) -> Result<(), Failure> {
    let s = &cfg.config.steiner;
    let batch = batch_arg
        .map(Path::to_path_buf)
        .or_else(|| s.batch.as_ref().map(|p| cfg.resolve(p)));
    let rows: Vec<Row> = match &batch {
        Some(p) => read_batch(p)?,
        None if !s.triangles.is_empty() => s
            .triangles
            .iter()
            .enumerate()
            .map(|(i, t)| (i.to_string(), Ok(*t)))
            .collect(),
        None => return Err(usage("steiner needs --batch, config steiner.batch or steiner.triangles")),
    };
    let mut csv = String::from("id,p_x,p_y,objective,residual,captured_vertex,converged,iterations,error\n");
    let (mut solved, mut captured, mut failed) = (0usize, 0usize, 0usize);
    let mut worst = 0.0f64;
    for (id, tri) in &rows {
        let result = tri.clone().and_then(|t| steiner_point(&t, s.tol).map(|p| (t, p)).map_err(|e| e.to_string()));
        match result {
            Ok((t, p)) => {
                solved += 1;
                captured += p.vertex.is_some() as usize;
                worst = worst.max(p.residual);
                let vertex = p.vertex.map(|v| ["A", "B", "C"][v]).unwrap_or("");
                csv.push_str(&format!(
                    "{id},{},{},{},{},{vertex},{},{},\n",
                    num(p.point[0]),
                    num(p.point[1]),
                    num(t.objective(p.point)),
                    num(p.residual),
                    p.converged,
                    p.iterations
                ));
            }
            Err(e) => {
                failed += 1;
                csv.push_str(&format!("{id},,,,,,,,\"{}\"\n", e.replace('"', "'")));
            }
        }
    }
    csv.push_str(&format!("summary,,,,{},{captured},{solved},,{failed}\n", num(worst)));
    out.write("steiner.csv", &csv)?;
    out.write_report(
        "report.json",
        json!({
            "batch": batch.map(|p| p.display().to_string()),
            "tol": s.tol,
            "instances": rows.len(),
            "solved": solved,
            "captured": captured,
            "errors": failed,
            "max_residual": worst,
        }),
    )
}
