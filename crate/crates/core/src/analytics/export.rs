use std::io::Write;
use std::path::Path;

use super::{AssociationMatrix, NormalizedAssociation, RsaMatrix};
use crate::error::{Error, Result};
use crate::imaging::render_matrix;

fn header<W: Write>(w: &mut csv::Writer<W>, corner: &str, columns: &[String]) -> Result<()> {
    w.write_record(std::iter::once(corner).chain(columns.iter().map(String::as_str)))?;
    Ok(())
}

/// Class rows × emotion columns of raw counts.
pub fn write_counts_csv(m: &AssociationMatrix, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    header(&mut w, "class", m.emotion_labels())?;
    let cols = m.emotion_labels().len();
    for (i, class) in m.class_names().iter().enumerate() {
        let row = (0..cols).map(|j| m.count(i, j).to_string());
        w.write_record(std::iter::once(class.clone()).chain(row))?;
    }
    w.flush().map_err(|e| Error::Encode(e.to_string()))
}

/// Class rows × emotion columns of percentages, four fractional digits.
pub fn write_percent_csv(m: &NormalizedAssociation, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    header(&mut w, "class", &m.emotion_labels)?;
    let cols = m.emotion_labels.len();
    for (i, class) in m.class_names.iter().enumerate() {
        let row = (0..cols).map(|j| format!("{:.4}", m.get(i, j)));
        w.write_record(std::iter::once(class.clone()).chain(row))?;
    }
    w.flush().map_err(|e| Error::Encode(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsaTable {
    Rho,
    PValue,
}

/// Method × method table. Correlations use four fractional digits; p-values
/// use four-digit scientific notation since they are often far below 1e-4.
pub fn write_rsa_csv(r: &RsaMatrix, table: RsaTable, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    header(&mut w, "method", &r.methods)?;
    let m = r.methods.len();
    for (i, name) in r.methods.iter().enumerate() {
        let row = (0..m).map(|j| match table {
            RsaTable::Rho => format!("{:.4}", r.rho_at(i, j)),
            RsaTable::PValue => format!("{:.4e}", r.p_at(i, j)),
        });
        w.write_record(std::iter::once(name.clone()).chain(row))?;
    }
    w.flush().map_err(|e| Error::Encode(e.to_string()))
}

/// PNG rendering of a percentage matrix, one `cell`-pixel square per entry.
pub fn write_matrix_heatmap(m: &NormalizedAssociation, cell: usize, path: impl AsRef<Path>) -> Result<()> {
    let img = render_matrix(&m.percentages, m.class_names.len(), m.emotion_labels.len(), cell, 100.0)?;
    img.save_png(path)
}
