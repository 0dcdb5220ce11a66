//! LIDC annotation ingestion: reader marks, slice geometry, cross-reader
//! clustering and median aggregation of characteristic scores.

mod cluster;
mod slices;
mod xml;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use cluster::{
    aggregate_malignancy, aggregate_scores, annotation_centroid, cluster_nodules,
    long_axis_diameter, median_half_up, representative_slice, NoduleCluster, Point3,
    DEFAULT_CLUSTER_THRESHOLD_MM,
};
pub use slices::{build_slice_index, SliceGeometry, SliceHeader, SliceIndex};
pub use xml::{parse_annotation_file, write_annotation_file};

/// One outlined region on one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub sop_uid: String,
    /// `imageZposition` as recorded by the reader; geometry uses the slice index instead.
    pub z_position: f64,
    pub inclusion: bool,
    pub points: Vec<(i32, i32)>,
}

/// One radiologist's mark of one nodule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReaderNodule {
    pub reader_id: String,
    /// The reader's own `noduleID`; not comparable across readers.
    pub nodule_id: String,
    pub contours: Vec<Contour>,
    /// Raw scores keyed by LIDC element name, including the metadata-only
    /// `subtlety`, `internalStructure` and `malignancy`.
    pub characteristics: BTreeMap<String, i64>,
}

impl ReaderNodule {
    pub fn label(&self) -> String {
        format!("{}/{}", self.reader_id, self.nodule_id)
    }
}

/// A `nonNodule` point mark; carried for round-tripping only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonNodule {
    pub reader_id: String,
    pub id: String,
    pub sop_uid: String,
    pub z_position: f64,
    pub point: (i32, i32),
}

/// Everything retained from one annotation XML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub study_uid: Option<String>,
    pub series_uid: Option<String>,
    /// Nodules carrying a characteristics block.
    pub nodules: Vec<ReaderNodule>,
    /// Marks without characteristics (small nodules); skipped downstream.
    pub small_marks: Vec<ReaderNodule>,
    pub non_nodules: Vec<NonNodule>,
}

impl AnnotationFile {
    pub fn skipped_count(&self) -> usize {
        self.small_marks.len()
    }
}
