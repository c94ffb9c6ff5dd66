//! One profile on disk: a CSV table of nodal values plus a small JSON
//! sidecar carrying the data the table cannot (time, dimension, faces,
//! cell count).
//!
//! Floats in the CSV are printed with `{:.16e}` so a write/read loop is
//! exact and two runs of the same configuration produce byte-identical
//! files.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::schema::{validate_against, SchemaName};
use super::IoError;
use crate::geometry::{Profile, RadialGrid};

/// Writes `s,rho,phi,dphi` rows. The `s`, `rho`, and `dphi` columns are
/// derived (grid layout and face-anchored differences); they are stored
/// for plotting and ignored on read.
pub fn write_profile_csv(path: &Path, profile: &Profile<f64>) -> Result<(), IoError> {
    let dphi = profile.dphi();
    let mut out = String::from("s,rho,phi,dphi\n");
    for j in 0..profile.grid.n_cells {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            profile.grid.s[j], profile.grid.rho[j], profile.phi[j], dphi[j]
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Sidecar fields: `t`, `n`, `a`, `b`, `N`. Everything needed to rebuild
/// the profile around the CSV's `phi` column.
pub fn write_sidecar(path: &Path, t: f64, n: u32, profile: &Profile<f64>) -> Result<(), IoError> {
    let doc = json!({
        "t": t,
        "n": n,
        "a": profile.a,
        "b": profile.b,
        "N": profile.grid.n_cells,
    });
    validate_against(&doc, SchemaName::Snapshot)?;
    fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<(f64, u32, f64, f64, usize), IoError> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    validate_against(&doc, SchemaName::Snapshot)?;
    let get = |key: &str| doc[key].as_f64().expect("validated as number");
    Ok((
        get("t"),
        get("n") as u32,
        get("a"),
        get("b"),
        get("N") as usize,
    ))
}

/// Rebuilds the profile from a CSV and its sidecar. The grid is
/// regenerated from the sidecar's cell count; only the `phi` column is
/// trusted from the table.
pub fn read_profile_csv(csv: &Path, sidecar: &Path) -> Result<(f64, u32, Profile<f64>), IoError> {
    let (t, n, a, b, n_cells) = read_sidecar(sidecar)?;
    let text = fs::read_to_string(csv)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("s,rho,phi,dphi") => {}
        other => {
            return Err(IoError::BadInput(format!(
                "{}: expected header s,rho,phi,dphi, got {other:?}",
                csv.display()
            )))
        }
    }
    let mut phi = Vec::with_capacity(n_cells);
    for (i, line) in lines.enumerate() {
        let field = line.split(',').nth(2).ok_or_else(|| {
            IoError::BadInput(format!("{}: row {} has no phi column", csv.display(), i + 1))
        })?;
        let value: f64 = field.parse().map_err(|e| {
            IoError::BadInput(format!("{}: row {}: {e}", csv.display(), i + 1))
        })?;
        phi.push(value);
    }
    if phi.len() != n_cells {
        return Err(IoError::BadInput(format!(
            "{}: {} rows but sidecar says N={}",
            csv.display(),
            phi.len(),
            n_cells
        )));
    }
    let grid = RadialGrid::new(n_cells)?;
    Ok((t, n, Profile::new(grid, phi, a, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::reference_profiles;

    #[test]
    fn profile_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("p.csv");
        let sidecar = dir.path().join("p.json");

        let grid = RadialGrid::new(48).unwrap();
        let (initial, _, _) = reference_profiles(2, 1.0, 4.0, 1.0, 0.01, &grid).unwrap();
        write_profile_csv(&csv, &initial).unwrap();
        write_sidecar(&sidecar, 0.125, 2, &initial).unwrap();

        let (t, n, back) = read_profile_csv(&csv, &sidecar).unwrap();
        assert_eq!(t, 0.125);
        assert_eq!(n, 2);
        assert_eq!(back.a, initial.a);
        assert_eq!(back.b, initial.b);
        assert_eq!(back.phi, initial.phi);

        // Same write twice is byte-identical.
        let first = std::fs::read(&csv).unwrap();
        write_profile_csv(&csv, &initial).unwrap();
        assert_eq!(first, std::fs::read(&csv).unwrap());
    }

    #[test]
    fn corrupt_tables_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("p.csv");
        let sidecar = dir.path().join("p.json");

        let grid = RadialGrid::new(16).unwrap();
        let (initial, _, _) = reference_profiles(2, 1.0, 4.0, 1.0, 0.01, &grid).unwrap();
        write_profile_csv(&csv, &initial).unwrap();
        write_sidecar(&sidecar, 0.0, 2, &initial).unwrap();

        std::fs::write(&csv, "phi\n1.0\n").unwrap();
        assert!(matches!(
            read_profile_csv(&csv, &sidecar),
            Err(IoError::BadInput(_))
        ));

        write_profile_csv(&csv, &initial).unwrap();
        std::fs::write(
            &sidecar,
            r#"{"t": 0.0, "n": 2, "a": 1.0, "b": 4.0, "N": 16, "extra": 1}"#,
        )
        .unwrap();
        assert!(matches!(
            read_profile_csv(&csv, &sidecar),
            Err(IoError::Schema { .. })
        ));
    }
}
