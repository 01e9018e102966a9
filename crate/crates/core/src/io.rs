//! Tensor JSON and CSV.
//!
//! A tensor is stored as
//! `{"left_shape": [..], "right_shape": [..], "re": [..], "im": [..]}` with
//! the entries in canonical flat order. `im` may be omitted for real tensors.
//! Numbers are written in shortest round-trip form, so reading back a
//! written tensor reproduces every double exactly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::solver::SolveOutcome;
use crate::tensor::{DenseTensor, TensorShape};

fn json_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Json {
        path: path.into(),
        message: message.into(),
    }
}

fn dims(obj: &Map<String, Value>, key: &str) -> Result<Vec<usize>> {
    let v = obj.get(key).ok_or_else(|| json_err(key, "missing field"))?;
    let arr = v
        .as_array()
        .ok_or_else(|| json_err(key, "expected an array of positive integers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, d)| match d.as_u64() {
            Some(n) if n > 0 => Ok(n as usize),
            _ => Err(json_err(
                format!("{key}[{i}]"),
                format!("expected a positive integer, found {d}"),
            )),
        })
        .collect()
}

fn numbers(v: &Value, key: &str, expected: usize) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| json_err(key, "expected an array of numbers"))?;
    if arr.len() != expected {
        return Err(json_err(
            key,
            format!("expected {expected} values, found {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64().ok_or_else(|| {
                json_err(
                    format!("{key}[{i}]"),
                    format!("expected a number, found {x}"),
                )
            })
        })
        .collect()
}

pub fn tensor_from_value(v: &Value) -> Result<DenseTensor> {
    let obj = v
        .as_object()
        .ok_or_else(|| json_err("$", "expected a tensor object"))?;
    let left = dims(obj, "left_shape")?;
    let right = dims(obj, "right_shape")?;
    let shape = TensorShape::new(left, right).map_err(|e| json_err("left_shape", e.to_string()))?;
    let n = shape.len();
    let re = numbers(
        obj.get("re")
            .ok_or_else(|| json_err("re", "missing field"))?,
        "re",
        n,
    )?;
    let im = match obj.get("im") {
        None | Some(Value::Null) => vec![0.0; n],
        Some(v) => numbers(v, "im", n)?,
    };
    let data = re
        .into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect();
    DenseTensor::new(shape, data)
}

pub fn tensor_from_json(s: &str) -> Result<DenseTensor> {
    let v: Value = serde_json::from_str(s).map_err(|e| json_err("$", e.to_string()))?;
    tensor_from_value(&v)
}

pub fn tensor_to_value(t: &DenseTensor) -> Value {
    let re: Vec<f64> = t.data().iter().map(|z| z.re).collect();
    let im: Vec<f64> = t.data().iter().map(|z| z.im).collect();
    json!({
        "left_shape": t.shape().left_dims(),
        "right_shape": t.shape().right_dims(),
        "re": re,
        "im": im,
    })
}

pub fn tensor_to_json(t: &DenseTensor) -> String {
    tensor_to_value(t).to_string()
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    tensor_from_json(&text)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    let path = path.as_ref();
    let mut text = tensor_to_json(t);
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn csv_entry(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// The unfolding, one row per line. Entries with a nonzero imaginary part
/// are written as `a+bi`.
pub fn tensor_to_csv(t: &DenseTensor) -> String {
    let mut out = String::new();
    for r in 0..t.rows() {
        let row: Vec<String> = (0..t.cols()).map(|c| csv_entry(t.get(r, c))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn solve_outcome_to_value(out: &SolveOutcome) -> Value {
    json!({
        "solvable": out.solvable,
        "residual": out.residual,
        "certificate_residual": out.certificate_residual,
        "particular": tensor_to_value(&out.particular),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_im_is_zero() {
        let t = tensor_from_json(r#"{"left_shape":[2],"right_shape":[],"re":[1,2]}"#).unwrap();
        assert_eq!(t.shape().right_dims(), &[1]);
        assert_eq!(t.data()[1], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn wrong_length_names_counts() {
        let err =
            tensor_from_json(r#"{"left_shape":[2],"right_shape":[3],"re":[1,2]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("expected 6") && msg.contains("found 2") && msg.contains("`re`"),
            "{msg}"
        );
    }

    #[test]
    fn bad_entry_has_path() {
        let err =
            tensor_from_json(r#"{"left_shape":[1],"right_shape":[2],"re":[1,"x"]}"#).unwrap_err();
        assert!(matches!(err, Error::Json { ref path, .. } if path == "re[1]"));
        let err = tensor_from_json(r#"{"left_shape":[0],"right_shape":[1],"re":[]}"#).unwrap_err();
        assert!(matches!(err, Error::Json { ref path, .. } if path == "left_shape[0]"));
    }

    #[test]
    fn round_trip_is_exact() {
        let shape = TensorShape::new(vec![2], vec![2]).unwrap();
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23];
        let t = DenseTensor::new(
            shape,
            vals.iter().map(|&x| Complex64::new(x, -x * 0.7)).collect(),
        )
        .unwrap();
        let back = tensor_from_json(&tensor_to_json(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn csv_marks_complex_entries() {
        let t = DenseTensor::new(
            TensorShape::new(vec![1], vec![2]).unwrap(),
            vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, -2.0)],
        )
        .unwrap();
        assert_eq!(tensor_to_csv(&t), "1.5,0-2i\n");
    }
}
