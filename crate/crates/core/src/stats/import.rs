use std::collections::BTreeMap;

use serde::Deserialize;

use super::StatsError;

/// Reads `stimulus_id,value` rows and returns one value per manifest id, in manifest order.
/// Rows naming ids outside the manifest fail with [`StatsError::UnknownStimulus`]; a manifest
/// id without a row gives `None`. Duplicate rows keep the last value.
pub fn import_external_metric<R: std::io::Read>(input: R, manifest: &[String]) -> Result<Vec<Option<f64>>, StatsError> {
    #[derive(Deserialize)]
    struct Row {
        stimulus_id: String,
        value: f64,
    }
    let index: BTreeMap<&str, usize> = manifest.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut out = vec![None; manifest.len()];
    let mut unknown = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize::<Row>() {
        let row = row.map_err(|e| StatsError::Parse(e.to_string()))?;
        match index.get(row.stimulus_id.as_str()) {
            Some(&i) => {
                if out[i].is_some() {
                    log::warn!("duplicate metric row for {}; keeping the last value", row.stimulus_id);
                }
                out[i] = Some(row.value);
            }
            None => unknown.push(row.stimulus_id),
        }
    }
    if !unknown.is_empty() {
        return Err(StatsError::UnknownStimulus(unknown));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> Vec<String> {
        ["a", "b", "c"].map(String::from).to_vec()
    }

    #[test]
    fn joins_in_manifest_order() {
        let v = import_external_metric("stimulus_id,value\nc,3\na,1\nb,2\n".as_bytes(), &manifest()).unwrap();
        assert_eq!(v, vec![Some(1.0), Some(2.0), Some(3.0)]);
    }

    #[test]
    fn unknown_ids_are_listed() {
        let e = import_external_metric("stimulus_id,value\nz,3\na,1\ny,0\n".as_bytes(), &manifest());
        assert_eq!(e, Err(StatsError::UnknownStimulus(vec!["z".into(), "y".into()])));
    }

    #[test]
    fn duplicates_keep_the_last() {
        let v = import_external_metric("stimulus_id,value\na,1\na,7\n".as_bytes(), &manifest()).unwrap();
        assert_eq!(v, vec![Some(7.0), None, None]);
    }
}
