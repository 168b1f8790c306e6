//! Line-delimited JSON dataset files, one scene per line.
//!
//! Floats are written with 17 significant digits so every value survives a
//! write/read cycle bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use super::Scene;
use crate::error::{Error, Result};

pub fn serialize_scene(scene: &Scene) -> String {
    let value = serde_json::to_value(scene).expect("scene serializes to JSON");
    let mut out = String::new();
    write_value(&mut out, &value);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap());
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key escapes"));
                out.push(':');
                write_value(out, item);
            }
            out.push('}');
        }
    }
}

/// Parses one record; `line` is used for error context only.
pub fn parse_scene(record: &str, line: usize) -> Result<Scene> {
    let scene: Scene = serde_json::from_str(record).map_err(|e| Error::Parse {
        line,
        msg: format!("column {}: {e}", e.column()),
    })?;
    scene.validate().map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })?;
    Ok(scene)
}

pub fn parse_dataset(text: &str) -> Result<Vec<Scene>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_scene(l, i + 1))
        .collect()
}

pub fn read_dataset(path: &Path) -> Result<Vec<Scene>> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn write_dataset(path: &Path, scenes: &[Scene]) -> Result<()> {
    let mut out = String::new();
    for s in scenes {
        out.push_str(&serialize_scene(s));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_scene, GeneratorConfig, ScenarioKind};

    #[test]
    fn round_trip_generated() {
        let s = generate_scene(ScenarioKind::Intersection, 3, &GeneratorConfig::default()).unwrap();
        let text = serialize_scene(&s);
        assert!(!text.contains('\n'));
        assert_eq!(parse_scene(&text, 1).unwrap(), s);
    }

    #[test]
    fn truncated_record_fails_with_context() {
        let s = generate_scene(ScenarioKind::Queue, 3, &GeneratorConfig::default()).unwrap();
        let text = serialize_scene(&s);
        let err = parse_scene(&text[..text.len() / 2], 4).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 4);
                assert!(msg.contains("EOF"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let s = generate_scene(ScenarioKind::Queue, 5, &GeneratorConfig::default()).unwrap();
        let mut v = serde_json::to_value(&s).unwrap();
        v["agents"][0].as_object_mut().unwrap().remove("valid_mask");
        let err = parse_scene(&v.to_string(), 2).unwrap_err();
        assert!(err.to_string().contains("valid_mask"), "{err}");
    }

    #[test]
    fn dataset_lines_report_position() {
        let s = generate_scene(ScenarioKind::Merge, 1, &GeneratorConfig::default()).unwrap();
        let text = format!("{}\n{{\"scene_id\": 3}}\n", serialize_scene(&s));
        match parse_dataset(&text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
