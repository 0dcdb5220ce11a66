use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The DICOM header values one slice contributes; absent tags are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SliceHeader {
    pub sop_uid: Option<String>,
    pub series_uid: Option<String>,
    pub patient_id: Option<String>,
    /// Image Position (Patient), mm.
    pub image_position: Option<[f64; 3]>,
    /// Pixel Spacing as stored: (row spacing, column spacing), mm/pixel.
    pub pixel_spacing: Option<[f64; 2]>,
    pub rescale_slope: Option<f64>,
    pub rescale_intercept: Option<f64>,
    pub rows: Option<u32>,
    pub cols: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceGeometry {
    pub sop_uid: String,
    pub z: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    /// Distance between rows (y direction), mm.
    pub spacing_row: f64,
    /// Distance between columns (x direction), mm.
    pub spacing_col: f64,
    pub rescale_slope: f64,
    pub rescale_intercept: f64,
    pub rows: u32,
    pub cols: u32,
}

impl SliceGeometry {
    /// Pixel (column, row) to in-plane patient coordinates in mm.
    pub fn to_mm(&self, x_px: f64, y_px: f64) -> (f64, f64) {
        (
            self.origin_x + x_px * self.spacing_col,
            self.origin_y + y_px * self.spacing_row,
        )
    }

    pub fn to_px(&self, x_mm: f64, y_mm: f64) -> (f64, f64) {
        (
            (x_mm - self.origin_x) / self.spacing_col,
            (y_mm - self.origin_y) / self.spacing_row,
        )
    }
}

/// Slices of one series, sorted by ascending z.
#[derive(Debug, Clone, Default)]
pub struct SliceIndex {
    slices: Vec<SliceGeometry>,
    by_sop: HashMap<String, usize>,
}

impl SliceIndex {
    pub fn slices(&self) -> &[SliceGeometry] {
        &self.slices
    }

    pub fn get(&self, sop_uid: &str) -> Option<&SliceGeometry> {
        self.by_sop.get(sop_uid).map(|&i| &self.slices[i])
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

/// Validates headers and sorts them by z.
pub fn build_slice_index(headers: &[SliceHeader]) -> Result<SliceIndex> {
    let mut slices = Vec::with_capacity(headers.len());
    for (i, h) in headers.iter().enumerate() {
        let context = h
            .sop_uid
            .clone()
            .unwrap_or_else(|| format!("slice header {i}"));
        let missing = |tag: &'static str| Error::MissingTag {
            context: context.clone(),
            tag,
        };
        let sop_uid = h.sop_uid.clone().ok_or_else(|| missing("SOP instance UID"))?;
        let [x, y, z] = h.image_position.ok_or_else(|| missing("image position"))?;
        let [spacing_row, spacing_col] = h.pixel_spacing.ok_or_else(|| missing("pixel spacing"))?;
        let rescale_slope = h.rescale_slope.ok_or_else(|| missing("rescale slope"))?;
        let rescale_intercept = h.rescale_intercept.ok_or_else(|| missing("rescale intercept"))?;
        let rows = h.rows.ok_or_else(|| missing("rows"))?;
        let cols = h.cols.ok_or_else(|| missing("columns"))?;
        if !(spacing_row > 0.0 && spacing_col > 0.0) {
            return Err(Error::invalid(format!("{context}: pixel spacing must be positive")));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("{context}: empty image dimensions")));
        }
        slices.push(SliceGeometry {
            sop_uid,
            z,
            origin_x: x,
            origin_y: y,
            spacing_row,
            spacing_col,
            rescale_slope,
            rescale_intercept,
            rows,
            cols,
        });
    }

    slices.sort_by(|a, b| a.z.total_cmp(&b.z));
    for pair in slices.windows(2) {
        if pair[0].z == pair[1].z {
            return Err(Error::invalid(format!(
                "slices {} and {} share z = {}",
                pair[0].sop_uid, pair[1].sop_uid, pair[0].z
            )));
        }
    }
    let mut by_sop = HashMap::with_capacity(slices.len());
    for (i, s) in slices.iter().enumerate() {
        if by_sop.insert(s.sop_uid.clone(), i).is_some() {
            return Err(Error::DuplicateSop(s.sop_uid.clone()));
        }
    }
    Ok(SliceIndex { slices, by_sop })
}
