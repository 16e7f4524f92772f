//! Point clouds as headerless CSV and mixtures as JSON.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{GmmModel, PointCloud};
use crate::error::{Error, Result};

/// One point per row, 17 significant digits per coordinate.
pub fn write_points_csv<W: Write>(cloud: &PointCloud, mut out: W) -> Result<()> {
    for row in cloud.rows() {
        let line = row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_points_csv<R: Read>(input: R) -> Result<PointCloud> {
    let mut data = Vec::new();
    let mut d = 0usize;
    for (lineno, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("points csv line {}: {e}", lineno + 1)))?;
        if d == 0 {
            d = row.len();
        } else if row.len() != d {
            return Err(Error::InvalidInput(format!(
                "points csv line {}: expected {d} columns, found {}",
                lineno + 1,
                row.len()
            )));
        }
        data.extend(row);
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("points csv is empty".into()));
    }
    PointCloud::from_flat(data, d, 0)
}

pub fn save_points_csv(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_points_csv(cloud, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_points_csv(path: &Path) -> Result<PointCloud> {
    read_points_csv(std::fs::File::open(path)?)
}

pub fn model_to_json(model: &GmmModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(model)?)
}

pub fn model_from_json(text: &str) -> Result<GmmModel> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_model_json(path: &Path) -> Result<GmmModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::sample;

    #[test]
    fn points_csv_round_trip_is_exact() {
        let cloud = sample(&GmmModel::reference_2d(), 200, 3).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&cloud, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 200);
        let back = read_points_csv(buf.as_slice()).unwrap();
        assert_eq!(back.as_flat(), cloud.as_flat());
        assert_eq!(back.seed(), 0);
    }

    #[test]
    fn points_csv_rejects_ragged_rows() {
        let err = read_points_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(read_points_csv("".as_bytes()).is_err());
    }

    #[test]
    fn model_json_layout() {
        let m = GmmModel::reference_2d();
        let text = model_to_json(&m).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["dimension"], 2);
        assert_eq!(v["components"][1]["variance"], 0.25);
        assert_eq!(model_from_json(&text).unwrap(), m);
    }

    #[test]
    fn model_json_validates_weights() {
        let text = r#"{"dimension": 1, "components": [{"mean": [0.0], "variance": 1.0, "weight": 0.7}]}"#;
        assert!(model_from_json(text).is_err());
    }
}
