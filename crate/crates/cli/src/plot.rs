use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use liouville_core::field::{FieldSnapshot, ScalarField};
use liouville_core::geometry::Mesh;
use serde::Deserialize;

use crate::svg::{self, Series};

#[derive(Deserialize)]
struct SolutionFields {
    fields: Vec<FieldSnapshot>,
}

fn find_mesh(input: &Path) -> Option<PathBuf> {
    input.ancestors().skip(1).map(|d| d.join("mesh.json")).find(|p| p.is_file())
}

fn csv_series(text: &str) -> Result<(Vec<String>, Vec<Series>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines.next().ok_or("empty CSV")?.split(',').map(|s| s.trim().to_string()).collect();
    if header.len() < 2 {
        return Err("CSV needs at least two columns".into());
    }
    let mut cols: Vec<Vec<(f64, f64)>> = vec![Vec::new(); header.len() - 1];
    for (n, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let x: f64 = cells[0].trim().parse().map_err(|_| format!("line {}: bad number {:?}", n + 2, cells[0]))?;
        for (k, col) in cols.iter_mut().enumerate() {
            // non-numeric columns such as `converged` are skipped
            if let Some(y) = cells.get(k + 1).and_then(|c| c.trim().parse::<f64>().ok()) {
                col.push((x, y));
            }
        }
    }
    let series =
        header[1..].iter().zip(cols).filter(|(_, c)| !c.is_empty()).map(|(h, c)| Series::new(h.clone(), c)).collect();
    Ok((header, series))
}

/// Renders `input` to an SVG at `output`.
///
/// CSV input gives a line plot of every numeric column against the first one
/// (a radial profile `r,value` gives exactly one polyline). A solution
/// document gives a filled plot of its first field.
pub fn plot_file(input: &Path, mesh: Option<&Path>, output: &Path) -> Result<(), String> {
    let text = fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let is_csv = input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let svg = if is_csv {
        let (header, series) = csv_series(&text)?;
        let title = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let ylabel = if series.len() == 1 { series[0].name.clone() } else { String::from("value") };
        svg::line_plot(&title, &header[0], &ylabel, &series)
    } else {
        let doc: SolutionFields = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", input.display()))?;
        let first = doc.fields.first().ok_or("document has no fields")?;
        let mesh_path =
            mesh.map(Path::to_path_buf).or_else(|| find_mesh(input)).ok_or("no mesh document found; pass --mesh")?;
        let mtext = fs::read_to_string(&mesh_path).map_err(|e| format!("{}: {e}", mesh_path.display()))?;
        let mesh = Arc::new(Mesh::from_json(&mtext).map_err(|e| e.to_string())?);
        let u = ScalarField::from_snapshot(&mesh, first).map_err(|e| e.to_string())?;
        svg::field_plot(&mesh, u.values(), "u1")
    };
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(output, svg).map_err(|e| format!("{}: {e}", output.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_boolean_columns() {
        let (h, s) = csv_series("param,norm,converged\n0,1,true\n1,2,true\n").unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].points, vec![(0.0, 1.0), (1.0, 2.0)]);
    }
}
