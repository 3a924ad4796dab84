//! On-disk field format: a small JSON document holding the grid shape and
//! row-major complex samples.
//!
//! ```json
//! {"n": 1, "period": 1, "samples_per_axis": 16, "samples": [[re, im], ...]}
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::Field;
use crate::grid::GridSpec;
use crate::Result;

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    n: usize,
    period: u32,
    samples_per_axis: usize,
    samples: Vec<[f64; 2]>,
}

/// Read a field from a JSON document, validating the grid shape and the
/// sample count before constructing it.
pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::FieldFile(format!("{}: {e}", path.display())))?;
    parse_field(&text).map_err(|e| match e {
        Error::FieldFile(msg) => Error::FieldFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parse the JSON field document from a string.
pub fn parse_field(text: &str) -> Result<Field> {
    let doc: FieldDoc =
        serde_json::from_str(text).map_err(|e| Error::FieldFile(format!("bad JSON: {e}")))?;
    let grid = GridSpec::new(doc.n, doc.period, doc.samples_per_axis)?;
    if doc.samples.len() != grid.total_samples() {
        return Err(Error::FieldFile(format!(
            "expected {} samples for M^n, found {}",
            grid.total_samples(),
            doc.samples.len()
        )));
    }
    for (j, s) in doc.samples.iter().enumerate() {
        if !(s[0].is_finite() && s[1].is_finite()) {
            return Err(Error::FieldFile(format!("non-finite sample at index {j}")));
        }
    }
    let samples = doc.samples.iter().map(|s| Complex64::new(s[0], s[1])).collect();
    Field::new(grid, samples)
}

/// Write a field as the JSON document accepted by [`read_field`].
pub fn write_field(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    let text = field_to_string(field);
    std::fs::write(path, text)?;
    Ok(())
}

/// Serialize a field to the JSON document format.
pub fn field_to_string(field: &Field) -> String {
    let g = field.grid();
    let doc = FieldDoc {
        n: g.dim(),
        period: g.period(),
        samples_per_axis: g.samples_per_axis(),
        samples: field.samples().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&doc).expect("field document serializes")
}
