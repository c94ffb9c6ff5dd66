//! Surgery-schedule input and output documents.
//!
//! Rationals cross the boundary as strings in the `num` display form
//! (`"3/2"`, `"-1"`); an input class may also use plain JSON integers. A
//! schedule that ends at a minimal model reports `"infinity"` for its
//! collapse time.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Value};

use super::schema::{validate_against, SchemaName};
use super::IoError;
use crate::lattice::{presets, CurveClass, DivisorClass, Rat, SurfaceLattice, SurgerySchedule};

fn rat_from_value(v: &Value, what: &str) -> Result<Rat, IoError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|k| Rat::from_integer(BigInt::from(k)))
            .ok_or_else(|| IoError::BadInput(format!("{what}: {n} is not an integer"))),
        Value::String(s) => Rat::from_str(s)
            .map_err(|e| IoError::BadInput(format!("{what}: {s:?} is not a rational: {e}"))),
        other => Err(IoError::BadInput(format!(
            "{what}: expected integer or rational string, got {other}"
        ))),
    }
}

fn class_from_value(v: &Value, what: &str) -> Result<DivisorClass, IoError> {
    let items = v
        .as_array()
        .ok_or_else(|| IoError::BadInput(format!("{what}: expected an array")))?;
    let coeffs = items
        .iter()
        .enumerate()
        .map(|(i, c)| rat_from_value(c, &format!("{what}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DivisorClass::new(coeffs))
}

fn preset_by_name(name: &str) -> Result<SurfaceLattice, IoError> {
    match name {
        "p2" => Ok(presets::p2()),
        "bl1_p2" => Ok(presets::bl_p2(1)),
        "bl2_p2" => Ok(presets::bl_p2(2)),
        "bl3_p2" => Ok(presets::bl_p2(3)),
        "p1xp1" => Ok(presets::p1xp1()),
        other => Err(IoError::BadInput(format!(
            "unknown preset {other:?}; have p2, bl1_p2, bl2_p2, bl3_p2, p1xp1"
        ))),
    }
}

fn surface_from_value(v: &Value) -> Result<SurfaceLattice, IoError> {
    let obj = v
        .as_object()
        .ok_or_else(|| IoError::BadInput("surface: expected an object".into()))?;
    if let Some(preset) = obj.get("preset") {
        let name = preset
            .as_str()
            .ok_or_else(|| IoError::BadInput("surface.preset: expected a string".into()))?;
        if obj.len() != 1 {
            return Err(IoError::BadInput(
                "surface: a preset takes no other keys".into(),
            ));
        }
        return preset_by_name(name);
    }
    for key in ["basis", "intersection_matrix", "canonical", "curve_bank"] {
        if !obj.contains_key(key) {
            return Err(IoError::BadInput(format!("surface: missing key {key:?}")));
        }
    }
    let basis_labels: Vec<String> = obj["basis"]
        .as_array()
        .ok_or_else(|| IoError::BadInput("surface.basis: expected an array".into()))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| IoError::BadInput("surface.basis: labels are strings".into()))
        })
        .collect::<Result<_, _>>()?;
    let intersection_matrix: Vec<Vec<i64>> = obj["intersection_matrix"]
        .as_array()
        .ok_or_else(|| IoError::BadInput("surface.intersection_matrix: expected rows".into()))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| {
                    IoError::BadInput("surface.intersection_matrix: rows are arrays".into())
                })?
                .iter()
                .map(|v| {
                    v.as_i64().ok_or_else(|| {
                        IoError::BadInput(
                            "surface.intersection_matrix: entries are integers".into(),
                        )
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let canonical = class_from_value(&obj["canonical"], "surface.canonical")?;
    let curve_bank = obj["curve_bank"]
        .as_array()
        .ok_or_else(|| IoError::BadInput("surface.curve_bank: expected an array".into()))?
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let label = entry["label"]
                .as_str()
                .ok_or_else(|| {
                    IoError::BadInput(format!("surface.curve_bank[{i}].label: expected a string"))
                })?
                .to_string();
            let class = class_from_value(&entry["class"], &format!("surface.curve_bank[{i}].class"))?;
            Ok(CurveClass { label, class })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let lat = SurfaceLattice {
        basis_labels,
        intersection_matrix,
        canonical,
        curve_bank,
    };
    lat.validate()?;
    Ok(lat)
}

/// Reads `{surface, initial_class}`; the surface is either
/// `{"preset": name}` or spelled out.
pub fn read_mmp_input(path: &Path) -> Result<(SurfaceLattice, DivisorClass), IoError> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    validate_against(&doc, SchemaName::MmpInput)?;
    let lat = surface_from_value(&doc["surface"])?;
    let l0 = class_from_value(&doc["initial_class"], "initial_class")?;
    if l0.rank() != lat.rank() {
        return Err(IoError::BadInput(format!(
            "initial_class has {} coefficients, surface rank is {}",
            l0.rank(),
            lat.rank()
        )));
    }
    Ok((lat, l0))
}

fn class_value(c: &DivisorClass, basis: &[String]) -> Value {
    json!({
        "coeffs": c.coeffs.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        "display": c.display(basis),
    })
}

fn surface_value(lat: &SurfaceLattice) -> Value {
    json!({
        "basis": lat.basis_labels,
        "intersection_matrix": lat.intersection_matrix,
        "canonical": class_value(&lat.canonical, &lat.basis_labels),
        "curve_bank": lat
            .curve_bank
            .iter()
            .map(|c| json!({"label": c.label, "class": class_value(&c.class, &lat.basis_labels)}))
            .collect::<Vec<_>>(),
    })
}

/// Writes the schedule document and returns it. Classes are displayed in
/// the basis of the lattice they live on: `big_class` on the lattice being
/// contracted, `final_class` on the last one.
pub fn write_schedule(
    path: &Path,
    lat0: &SurfaceLattice,
    l0: &DivisorClass,
    schedule: &SurgerySchedule,
) -> Result<Value, IoError> {
    let mut steps = Vec::with_capacity(schedule.steps.len());
    let mut basis = &lat0.basis_labels;
    for step in &schedule.steps {
        steps.push(json!({
            "threshold": step.threshold.to_string(),
            "big_class": class_value(&step.big_class, basis),
            "contracted": step.contracted.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            "pushforward": step.pushforward,
            "next_surface": surface_value(&step.next_lattice),
        }));
        basis = &step.next_lattice.basis_labels;
    }
    let terminal_time = schedule
        .terminal_time
        .as_ref()
        .map_or_else(|| "infinity".to_string(), Rat::to_string);
    let doc = json!({
        "surface": surface_value(lat0),
        "initial_class": class_value(l0, &lat0.basis_labels),
        "steps": steps,
        "terminal": schedule.terminal.as_str(),
        "terminal_time": terminal_time,
        "final_class": class_value(&schedule.final_class, basis),
    });
    validate_against(&doc, SchemaName::MmpSchedule)?;
    fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::run_schedule;

    #[test]
    fn preset_input_round_trips_through_a_schedule() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.json");
        fs::write(
            &input,
            r#"{"surface": {"preset": "bl1_p2"}, "initial_class": [4, -1]}"#,
        )
        .unwrap();
        let (lat, l0) = read_mmp_input(&input).unwrap();
        assert_eq!(lat.rank(), 2);

        let schedule = run_schedule(&l0, &lat).unwrap();
        let out = dir.path().join("schedule.json");
        let doc = write_schedule(&out, &lat, &l0, &schedule).unwrap();

        assert_eq!(doc["initial_class"]["display"], "4H-E1");
        assert_eq!(doc["steps"][0]["threshold"], "1");
        assert_eq!(doc["steps"][0]["contracted"][0], "E1");
        assert_eq!(doc["terminal"], "collapse_fano");
        assert_eq!(doc["terminal_time"], "4/3");

        // The written file parses and is byte-stable.
        let first = fs::read(&out).unwrap();
        write_schedule(&out, &lat, &l0, &schedule).unwrap();
        assert_eq!(first, fs::read(&out).unwrap());
    }

    #[test]
    fn explicit_surfaces_and_rational_strings_parse() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.json");
        fs::write(
            &input,
            r#"{
                "surface": {
                    "basis": ["H", "E1"],
                    "intersection_matrix": [[1, 0], [0, -1]],
                    "canonical": ["-3", "1"],
                    "curve_bank": [
                        {"label": "E1", "class": [0, 1]},
                        {"label": "H-E1", "class": [1, -1]}
                    ]
                },
                "initial_class": ["7/2", "-1"]
            }"#,
        )
        .unwrap();
        let (lat, l0) = read_mmp_input(&input).unwrap();
        assert_eq!(lat, presets::bl_p2(1));
        assert_eq!(l0.coeffs[0], Rat::new(BigInt::from(7), BigInt::from(2)));
    }

    #[test]
    fn malformed_inputs_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.json");

        fs::write(&input, r#"{"surface": {"preset": "p3"}, "initial_class": [1]}"#).unwrap();
        assert!(matches!(read_mmp_input(&input), Err(IoError::BadInput(_))));

        fs::write(
            &input,
            r#"{"surface": {"preset": "p2"}, "initial_class": [1, 2]}"#,
        )
        .unwrap();
        assert!(matches!(read_mmp_input(&input), Err(IoError::BadInput(_))));

        fs::write(
            &input,
            r#"{"surface": {"preset": "p2"}, "initial_class": [1], "extra": 0}"#,
        )
        .unwrap();
        assert!(matches!(read_mmp_input(&input), Err(IoError::Schema { .. })));
    }
}
