use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::config::Config;
use super::manifest::{checksum_file, relative, FileChecksum, RunManifest};
use super::{write_jsonl, DATASET_FILE, IMAGES_MANIFEST_FILE, LEXICON_FILE, NODULES_FILE};
use crate::characteristic::CharacteristicProfile;
use crate::dicom::{read_header, read_pixels};
use crate::error::{Error, Result};
use crate::forge::{qa_pairs, DatasetRecord, PhraseLexicon};
use crate::lidc::{
    aggregate_malignancy, aggregate_scores, build_slice_index, cluster_nodules, parse_annotation_file,
    NoduleCluster, Point3, ReaderNodule, SliceGeometry, SliceHeader,
};
use crate::roi::{crop_roi, decode_to_hu, encode_png, window_to_8bit, write_atomic, RoiSpec, Window};

/// Largest plausible cluster: LIDC scans were read by at most four radiologists.
const MAX_READERS: usize = 4;

/// A `nodules.jsonl` line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoduleRecord {
    pub nodule_id: String,
    pub patient_id: String,
    pub series_uid: String,
    /// Relative to the annotation root.
    pub annotation_file: String,
    pub reader_ids: Vec<String>,
    pub center_mm: Point3,
    pub long_axis_diameter_mm: f64,
    pub representative_slice: String,
    pub profile: CharacteristicProfile,
    pub malignancy: Option<u8>,
    pub members: Vec<ReaderNodule>,
}

/// An `images.jsonl` line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub nodule_id: String,
    pub image_path: String,
    pub roi: RoiSpec,
    pub window: Window,
    /// (row, column) spacing of the source slice, mm/pixel.
    pub pixel_spacing_mm: [f64; 2],
    pub rescale_slope: f64,
    pub rescale_intercept: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeSummary {
    pub annotation_files: usize,
    pub dicom_files: usize,
    pub patients: usize,
    pub reader_marks: usize,
    pub small_marks_skipped: usize,
    pub clusters: usize,
    pub below_min_readers: usize,
    pub oversized_clusters: usize,
    pub nodules: usize,
    pub items: usize,
}

impl fmt::Display for ForgeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "annotation files     {}", self.annotation_files)?;
        writeln!(f, "DICOM slices         {}", self.dicom_files)?;
        writeln!(f, "patients             {}", self.patients)?;
        writeln!(f, "reader marks         {}", self.reader_marks)?;
        writeln!(f, "small marks skipped  {}", self.small_marks_skipped)?;
        writeln!(f, "clusters             {}", self.clusters)?;
        writeln!(f, "below min readers    {}", self.below_min_readers)?;
        writeln!(f, "oversized clusters   {}", self.oversized_clusters)?;
        writeln!(f, "nodules              {}", self.nodules)?;
        write!(f, "dataset items        {}", self.items)
    }
}

/// Overrides applied on top of a [`Config`].
#[derive(Debug, Clone, Default)]
pub struct ForgeOptions {
    pub output_dir: Option<PathBuf>,
    pub min_readers: Option<usize>,
}

struct Series {
    headers: Vec<SliceHeader>,
    paths: HashMap<String, PathBuf>,
    patient_id: Option<String>,
}

struct Found {
    cluster: NoduleCluster,
    profile: CharacteristicProfile,
    malignancy: Option<u8>,
    slice: SliceGeometry,
    slice_path: PathBuf,
}

struct XmlOutcome {
    annotation_file: String,
    patient_id: String,
    series_uid: String,
    reader_marks: usize,
    small_marks: usize,
    clusters: usize,
    below_min_readers: usize,
    oversized: usize,
    found: Vec<Found>,
}

fn files_with_extension(root: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(Error::invalid(format!("{} is not a directory", root.display())));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::invalid(format!("{}: {e}", root.display())))?;
        let is_match = entry.file_type().is_file()
            && entry
                .path()
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case(ext));
        if is_match {
            out.push(entry.into_path());
        }
    }
    Ok(out)
}

fn diagnostics(errors: Vec<String>) -> Error {
    Error::invalid(format!("{} input file(s) failed:\n  {}", errors.len(), errors.join("\n  ")))
}

/// Builds the dataset directory: `images/{id}.png`, `dataset.jsonl`,
/// `nodules.jsonl`, `images.jsonl`, `lexicon.txt` and `manifest.json`.
pub fn cmd_forge(config: &Config, options: &ForgeOptions) -> Result<ForgeSummary> {
    let mut config = config.clone();
    if let Some(dir) = &options.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(n) = options.min_readers {
        config.min_readers = n;
    }
    config.validate()?;
    let lexicon = match &config.lexicon {
        Some(path) => PhraseLexicon::from_file(path)?,
        None => PhraseLexicon::default(),
    };

    let xml_files = files_with_extension(&config.annotation_root, "xml")?;
    if xml_files.is_empty() {
        return Err(Error::invalid(format!(
            "no annotation files found under {}",
            config.annotation_root.display()
        )));
    }
    let dicom_files = files_with_extension(&config.dicom_root, "dcm")?;

    let headers: Vec<Result<SliceHeader>> = dicom_files.par_iter().map(|p| read_header(p)).collect();
    let mut errors = Vec::new();
    let mut series: BTreeMap<String, Series> = BTreeMap::new();
    for (path, header) in dicom_files.iter().zip(headers) {
        let header = match header {
            Ok(h) => h,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let (Some(series_uid), Some(sop)) = (header.series_uid.clone(), header.sop_uid.clone()) else {
            errors.push(format!("{}: missing series or SOP instance UID", path.display()));
            continue;
        };
        let entry = series.entry(series_uid).or_insert_with(|| Series {
            headers: Vec::new(),
            paths: HashMap::new(),
            patient_id: None,
        });
        if entry.patient_id.is_none() {
            entry.patient_id = header.patient_id.clone();
        }
        if entry.paths.insert(sop.clone(), path.clone()).is_some() {
            errors.push(format!("{}: duplicate SOP instance UID {sop}", path.display()));
            continue;
        }
        entry.headers.push(header);
    }
    if !errors.is_empty() {
        return Err(diagnostics(errors));
    }

    let outcomes: Vec<Result<XmlOutcome>> = xml_files
        .par_iter()
        .map(|path| process_annotation(path, &config, &series))
        .collect();
    let mut ok = Vec::new();
    for r in outcomes {
        match r {
            Ok(o) => ok.push(o),
            Err(e) => errors.push(e.to_string()),
        }
    }
    if !errors.is_empty() {
        return Err(diagnostics(errors));
    }

    let mut summary = ForgeSummary {
        annotation_files: xml_files.len(),
        dicom_files: dicom_files.len(),
        ..Default::default()
    };
    let mut per_patient: BTreeMap<String, usize> = BTreeMap::new();
    let mut nodules: Vec<(String, XmlRef, Found)> = Vec::new();
    for outcome in ok {
        summary.reader_marks += outcome.reader_marks;
        summary.small_marks_skipped += outcome.small_marks;
        summary.clusters += outcome.clusters;
        summary.below_min_readers += outcome.below_min_readers;
        summary.oversized_clusters += outcome.oversized;
        let xml = XmlRef {
            annotation_file: outcome.annotation_file,
            patient_id: outcome.patient_id,
            series_uid: outcome.series_uid,
        };
        for found in outcome.found {
            let k = per_patient.entry(xml.patient_id.clone()).or_insert(0);
            *k += 1;
            let id = format!("{}_n{:03}", xml.patient_id, k);
            nodules.push((id, xml.clone(), found));
        }
    }
    nodules.sort_by(|a, b| a.0.cmp(&b.0));
    summary.patients = per_patient.len();
    summary.nodules = nodules.len();

    let out = &config.output_dir;
    let images_dir = out.join("images");
    std::fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;

    let images: Vec<Result<ImageRecord>> = nodules
        .par_iter()
        .map(|(id, _, found)| write_roi_image(id, found, config.window, out))
        .collect();
    let images = images.into_iter().collect::<Result<Vec<_>>>()?;
    remove_stale_images(&images_dir, &images)?;

    let mut dataset = Vec::with_capacity(nodules.len() * 7);
    let mut nodule_records = Vec::with_capacity(nodules.len());
    for ((id, xml, found), image) in nodules.into_iter().zip(&images) {
        dataset.extend(
            qa_pairs(&id, &image.image_path, &found.profile, &lexicon)
                .into_iter()
                .map(DatasetRecord::from),
        );
        let cluster = found.cluster;
        nodule_records.push(NoduleRecord {
            nodule_id: id,
            patient_id: xml.patient_id,
            series_uid: xml.series_uid,
            annotation_file: xml.annotation_file,
            reader_ids: cluster.members.iter().map(|m| m.reader_id.clone()).collect(),
            center_mm: cluster.center,
            long_axis_diameter_mm: cluster.long_axis_diameter,
            representative_slice: cluster.representative_slice,
            profile: found.profile,
            malignancy: found.malignancy,
            members: cluster.members,
        });
    }
    summary.items = dataset.len();

    write_jsonl(&out.join(DATASET_FILE), &dataset)?;
    write_jsonl(&out.join(NODULES_FILE), &nodule_records)?;
    write_jsonl(&out.join(IMAGES_MANIFEST_FILE), &images)?;
    write_atomic(&out.join(LEXICON_FILE), lexicon.to_text().as_bytes())?;

    let mut inputs: Vec<FileChecksum> = Vec::new();
    for (prefix, root, files) in [
        ("annotations", &config.annotation_root, &xml_files),
        ("dicom", &config.dicom_root, &dicom_files),
    ] {
        let sums: Vec<Result<FileChecksum>> = files.par_iter().map(|p| checksum_file(p, root)).collect();
        for s in sums {
            let mut s = s?;
            s.path = format!("{prefix}/{}", s.path);
            inputs.push(s);
        }
    }
    if let Some(path) = &config.lexicon {
        let mut s = checksum_file(path, path.parent().unwrap_or(Path::new("")))?;
        s.path = format!("lexicon/{}", s.path);
        inputs.push(s);
    }
    let mut manifest = RunManifest::new("forge", config_snapshot(&config), &lexicon);
    manifest.inputs = inputs;
    manifest.summary = serde_json::to_value(&summary).map_err(|e| Error::Internal(e.to_string()))?;
    manifest.write(out)?;
    Ok(summary)
}

#[derive(Clone)]
struct XmlRef {
    annotation_file: String,
    patient_id: String,
    series_uid: String,
}

fn config_snapshot(config: &Config) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

fn process_annotation(path: &Path, config: &Config, series: &BTreeMap<String, Series>) -> Result<XmlOutcome> {
    let context = |e: Error| Error::invalid(format!("{}: {e}", path.display()));
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let file = parse_annotation_file(&bytes).map_err(context)?;

    let first_sop = file
        .nodules
        .iter()
        .chain(&file.small_marks)
        .flat_map(|n| &n.contours)
        .map(|c| c.sop_uid.as_str())
        .next();
    let (series_uid, s) = file
        .series_uid
        .as_deref()
        .and_then(|uid| series.get_key_value(uid))
        .or_else(|| {
            let sop = first_sop?;
            series.iter().find(|(_, s)| s.paths.contains_key(sop))
        })
        .ok_or_else(|| {
            Error::invalid(format!(
                "{}: no DICOM series found (series UID {})",
                path.display(),
                file.series_uid.as_deref().unwrap_or("not recorded")
            ))
        })?;

    let patient_id = s.patient_id.clone().unwrap_or_else(|| {
        path.parent()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "unknown".into())
    });

    let index = build_slice_index(&s.headers).map_err(context)?;
    let clusters = cluster_nodules(&file.nodules, &index, config.cluster_threshold_mm).map_err(context)?;
    let mut outcome = XmlOutcome {
        annotation_file: relative(path, &config.annotation_root),
        patient_id,
        series_uid: series_uid.clone(),
        reader_marks: file.nodules.len(),
        small_marks: file.skipped_count(),
        clusters: clusters.len(),
        below_min_readers: 0,
        oversized: 0,
        found: Vec::new(),
    };
    for cluster in clusters {
        if cluster.members.len() > MAX_READERS {
            outcome.oversized += 1;
            continue;
        }
        if cluster.members.len() < config.min_readers {
            outcome.below_min_readers += 1;
            continue;
        }
        let profile = aggregate_scores(&cluster).map_err(context)?;
        let slice = index
            .get(&cluster.representative_slice)
            .cloned()
            .ok_or_else(|| Error::Internal("representative slice left the index".into()))?;
        let slice_path = s.paths[&slice.sop_uid].clone();
        outcome.found.push(Found {
            malignancy: aggregate_malignancy(&cluster),
            cluster,
            profile,
            slice,
            slice_path,
        });
    }
    Ok(outcome)
}

fn write_roi_image(id: &str, found: &Found, window: Window, out: &Path) -> Result<ImageRecord> {
    let slice = &found.slice;
    let raw = read_pixels(&found.slice_path)?;
    if raw.width != slice.cols || raw.height != slice.rows {
        return Err(Error::invalid(format!(
            "{}: pixel data is {}x{}, header says {}x{}",
            found.slice_path.display(),
            raw.width,
            raw.height,
            slice.cols,
            slice.rows
        )));
    }
    let hu = decode_to_hu(&raw, slice.rescale_slope, slice.rescale_intercept)?;
    let gray = window_to_8bit(&hu, window)?;
    let center = found.cluster.center;
    let roi = RoiSpec::from_diameter(
        slice.to_px(center.x, center.y),
        found.cluster.long_axis_diameter,
        slice.spacing_col,
        slice.sop_uid.clone(),
    );
    let crop = crop_roi(&gray, &roi);
    let image_path = format!("images/{id}.png");
    write_atomic(&out.join(&image_path), &encode_png(&crop)?)?;
    Ok(ImageRecord {
        nodule_id: id.to_string(),
        image_path,
        roi,
        window,
        pixel_spacing_mm: [slice.spacing_row, slice.spacing_col],
        rescale_slope: slice.rescale_slope,
        rescale_intercept: slice.rescale_intercept,
    })
}

/// Deletes PNGs left in `images/` by an earlier run that this run did not write.
fn remove_stale_images(dir: &Path, current: &[ImageRecord]) -> Result<()> {
    let keep: std::collections::BTreeSet<String> = current
        .iter()
        .filter_map(|r| r.image_path.strip_prefix("images/").map(str::to_string))
        .collect();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".png") && !keep.contains(&name) {
            std::fs::remove_file(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
        }
    }
    Ok(())
}
