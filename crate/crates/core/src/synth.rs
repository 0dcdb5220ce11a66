//! Synthetic LIDC-style inputs: a small DICOM + XML tree with hand-checkable
//! geometry, and score-uniform datasets for baseline calibration.
//!
//! Every nodule outline is an axis-aligned rectangle, so each long-axis
//! diameter is a rectangle diagonal and each ROI side is
//! `round(2 * sqrt(w^2 + h^2))` pixels whatever the pixel spacing.

use std::collections::BTreeMap;
use std::path::Path;

use crate::characteristic::{Characteristic, CharacteristicProfile};
use crate::dicom::{write_ct_slice, CtSlice};
use crate::error::{Error, Result};
use crate::forge::{qa_pairs, DatasetRecord, PhraseLexicon};
use crate::lidc::{write_annotation_file, AnnotationFile, Contour, NonNodule, ReaderNodule};
use crate::roi::RawImage;

pub const SLICES_PER_PATIENT: usize = 8;
pub const IMAGE_SIDE: u32 = 64;
pub const FIRST_Z: f64 = -100.0;
pub const SLICE_STEP: f64 = 2.5;
/// Stored value of air (HU -1000 after the -1024 intercept).
pub const BACKGROUND_RAW: i32 = 24;
/// Stored value inside nodules (HU 0).
pub const NODULE_RAW: i32 = 1024;
const UID_ROOT: &str = "1.2.826.0.1.3680043.9.7777";

/// One reader's outline (slice index and polygon) and scores.
#[derive(Debug, Clone)]
pub struct SynthReader {
    pub reader_id: &'static str,
    pub contours: Vec<(usize, Vec<(i32, i32)>)>,
    /// In [`Characteristic::ALL`] order.
    pub scores: [i64; 6],
}

#[derive(Debug, Clone)]
pub struct SynthNodule {
    pub label: &'static str,
    pub readers: Vec<SynthReader>,
}

#[derive(Debug, Clone)]
pub struct SynthPatient {
    pub patient_id: &'static str,
    pub pixel_spacing: f64,
    pub origin: (f64, f64),
    pub nodules: Vec<SynthNodule>,
    /// `(reader, slice, point)` marks without characteristics.
    pub small_marks: Vec<(&'static str, usize, (i32, i32))>,
    pub non_nodules: Vec<(&'static str, usize, (i32, i32))>,
}

impl SynthPatient {
    pub fn study_uid(&self, p: usize) -> String {
        format!("{UID_ROOT}.{}", p + 1)
    }

    pub fn series_uid(&self, p: usize) -> String {
        format!("{UID_ROOT}.{}.1", p + 1)
    }

    pub fn sop_uid(&self, p: usize, slice: usize) -> String {
        format!("{UID_ROOT}.{}.1.{}", p + 1, slice + 1)
    }
}

pub fn slice_z(k: usize) -> f64 {
    FIRST_Z + SLICE_STEP * k as f64
}

/// Corners of the `w x h` pixel rectangle with top-left `(x, y)`.
pub fn rect(x: i32, y: i32, w: i32, h: i32) -> Vec<(i32, i32)> {
    vec![(x, y), (x + w, y), (x + w, y + h), (x, y + h)]
}

fn readers(
    ids: &[&'static str],
    contours: impl Fn(usize) -> Vec<(usize, Vec<(i32, i32)>)>,
    scores: &[[i64; 6]],
) -> Vec<SynthReader> {
    assert_eq!(ids.len(), scores.len());
    ids.iter()
        .zip(scores)
        .enumerate()
        .map(|(k, (&reader_id, &scores))| SynthReader {
            reader_id,
            contours: contours(k),
            scores,
        })
        .collect()
}

/// The 12-nodule, 4-patient fixture.
pub fn fixture_patients() -> Vec<SynthPatient> {
    const R: [&str; 4] = ["reader-A", "reader-B", "reader-C", "reader-D"];
    vec![
        SynthPatient {
            patient_id: "LIDC-SYN-0001",
            pixel_spacing: 0.7,
            origin: (-180.0, -160.0),
            nodules: vec![
                SynthNodule {
                    label: "N1",
                    readers: readers(
                        &R,
                        |k| vec![(2, rect(8 + i32::from(k == 3), 8, 6, 8))],
                        &[[3, 4, 5, 1, 1, 6], [4, 4, 5, 1, 1, 6], [4, 3, 5, 2, 1, 5], [5, 4, 4, 1, 2, 6]],
                    ),
                },
                SynthNodule {
                    label: "N2",
                    readers: readers(&R[..2], |_| vec![(3, rect(40, 10, 3, 4))], &[[3, 2, 5, 2, 1, 6], [4, 3, 5, 3, 1, 6]]),
                },
                SynthNodule {
                    label: "N3",
                    readers: readers(&R[2..3], |_| vec![(5, rect(30, 45, 2, 1))], &[[3, 5, 5, 1, 1, 6]]),
                },
            ],
            small_marks: vec![("reader-A", 6, (50, 50))],
            non_nodules: vec![],
        },
        SynthPatient {
            patient_id: "LIDC-SYN-0002",
            pixel_spacing: 0.75,
            origin: (-170.0, -190.0),
            nodules: vec![
                SynthNodule {
                    label: "N4",
                    readers: readers(
                        &R[..3],
                        |_| vec![(1, rect(5, 5, 5, 12))],
                        &[[2, 1, 3, 3, 4, 6], [2, 2, 3, 4, 5, 6], [3, 2, 4, 4, 5, 6]],
                    ),
                },
                SynthNodule {
                    label: "N5",
                    readers: readers(
                        &R[1..3],
                        // only the slice-4 outline is on the representative slice
                        |k| if k == 0 { vec![(4, rect(30, 30, 8, 6))] } else { vec![(5, rect(29, 28, 10, 10))] },
                        &[[5, 5, 1, 1, 1, 3], [5, 4, 2, 1, 1, 3]],
                    ),
                },
                SynthNodule {
                    label: "N6",
                    readers: readers(
                        &R,
                        |_| vec![(6, rect(45, 5, 5, 5))],
                        &[[4, 3, 5, 1, 2, 1], [4, 3, 5, 2, 2, 1], [4, 4, 5, 2, 1, 6], [4, 4, 5, 1, 1, 6]],
                    ),
                },
            ],
            small_marks: vec![],
            non_nodules: vec![],
        },
        SynthPatient {
            patient_id: "LIDC-SYN-0003",
            pixel_spacing: 0.6,
            origin: (-150.0, -150.0),
            nodules: vec![
                SynthNodule {
                    label: "N7",
                    readers: readers(&R[3..], |_| vec![(3, rect(5, 5, 9, 12))], &[[1, 1, 1, 5, 5, 2]]),
                },
                SynthNodule {
                    label: "N8",
                    readers: readers(&R[..2], |_| vec![(3, rect(30, 10, 8, 15))], &[[4, 4, 5, 1, 3, 6], [3, 4, 4, 1, 3, 5]]),
                },
                SynthNodule {
                    label: "N9",
                    readers: readers(
                        &R[1..],
                        |_| vec![(6, rect(1, 58, 4, 4))],
                        &[[5, 5, 5, 1, 1, 5], [4, 5, 5, 1, 1, 5], [5, 5, 5, 1, 1, 4]],
                    ),
                },
            ],
            small_marks: vec![],
            non_nodules: vec![("reader-C", 1, (40, 40))],
        },
        SynthPatient {
            patient_id: "LIDC-SYN-0004",
            pixel_spacing: 0.8,
            origin: (-200.0, -210.0),
            nodules: vec![
                SynthNodule {
                    label: "N10",
                    readers: readers(
                        &R[..2],
                        |k| vec![(2, rect(5 + 2 * k as i32, 5 + 2 * k as i32, 6, 6))],
                        &[[3, 2, 2, 2, 1, 6], [3, 2, 3, 2, 2, 6]],
                    ),
                },
                SynthNodule {
                    label: "N11",
                    readers: readers(
                        &R,
                        |_| vec![(4, rect(30, 5, 10, 10))],
                        &[[4, 4, 5, 1, 1, 6], [5, 4, 5, 1, 1, 6], [4, 4, 5, 1, 1, 6], [5, 5, 5, 1, 1, 6]],
                    ),
                },
                SynthNodule {
                    label: "N12",
                    readers: readers(&R[1..2], |_| vec![(6, rect(10, 45, 12, 16))], &[[2, 3, 4, 5, 4, 6]]),
                },
            ],
            small_marks: vec![],
            non_nodules: vec![],
        },
    ]
}

fn reader_nodule(p: &SynthPatient, pi: usize, id: String, reader: &SynthReader) -> ReaderNodule {
    let mut characteristics: BTreeMap<String, i64> = Characteristic::ALL
        .iter()
        .zip(reader.scores)
        .map(|(c, s)| (c.name().to_string(), s))
        .collect();
    characteristics.insert("subtlety".into(), 4);
    characteristics.insert("internalStructure".into(), 1);
    characteristics.insert("malignancy".into(), 3);
    ReaderNodule {
        reader_id: reader.reader_id.into(),
        nodule_id: id,
        contours: reader
            .contours
            .iter()
            .map(|(k, points)| Contour {
                sop_uid: p.sop_uid(pi, *k),
                z_position: slice_z(*k),
                inclusion: true,
                points: points.clone(),
            })
            .collect(),
        characteristics,
    }
}

/// The annotation document of patient `pi`.
pub fn annotation_for(p: &SynthPatient, pi: usize) -> AnnotationFile {
    let mut file = AnnotationFile {
        study_uid: Some(p.study_uid(pi)),
        series_uid: Some(p.series_uid(pi)),
        ..Default::default()
    };
    for n in &p.nodules {
        for r in &n.readers {
            let id = format!("{}-{}", n.label, &r.reader_id[r.reader_id.len() - 1..]);
            file.nodules.push(reader_nodule(p, pi, id, r));
        }
    }
    for (k, &(reader_id, slice, point)) in p.small_marks.iter().enumerate() {
        file.small_marks.push(ReaderNodule {
            reader_id: reader_id.into(),
            nodule_id: format!("small-{}", k + 1),
            contours: vec![Contour {
                sop_uid: p.sop_uid(pi, slice),
                z_position: slice_z(slice),
                inclusion: true,
                points: vec![point],
            }],
            characteristics: BTreeMap::new(),
        });
    }
    for (k, &(reader_id, slice, point)) in p.non_nodules.iter().enumerate() {
        file.non_nodules.push(NonNodule {
            reader_id: reader_id.into(),
            id: format!("non-{}", k + 1),
            sop_uid: p.sop_uid(pi, slice),
            z_position: slice_z(slice),
            point,
        });
    }
    file
}

/// Stored pixels of slice `k`: background with every outline on that slice
/// filled by its bounding box.
pub fn slice_pixels(p: &SynthPatient, k: usize) -> RawImage {
    let side = IMAGE_SIDE as i32;
    let mut data = vec![BACKGROUND_RAW; (side * side) as usize];
    for r in p.nodules.iter().flat_map(|n| &n.readers) {
        for (slice, points) in &r.contours {
            if *slice != k {
                continue;
            }
            let x0 = points.iter().map(|q| q.0).min().unwrap_or(0).max(0);
            let x1 = points.iter().map(|q| q.0).max().unwrap_or(-1).min(side - 1);
            let y0 = points.iter().map(|q| q.1).min().unwrap_or(0).max(0);
            let y1 = points.iter().map(|q| q.1).max().unwrap_or(-1).min(side - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    data[(y * side + x) as usize] = NODULE_RAW;
                }
            }
        }
    }
    RawImage::new(IMAGE_SIDE, IMAGE_SIDE, data).expect("square image")
}

/// Writes one directory per patient holding `annotation.xml` and
/// `slice_00.dcm` .. `slice_07.dcm`.
pub fn write_fixture_tree(root: &Path) -> Result<()> {
    write_patients(root, &fixture_patients())
}

pub fn write_patients(root: &Path, patients: &[SynthPatient]) -> Result<()> {
    for (pi, p) in patients.iter().enumerate() {
        let dir = root.join(p.patient_id);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let xml = write_annotation_file(&annotation_for(p, pi));
        let xml_path = dir.join("annotation.xml");
        std::fs::write(&xml_path, xml).map_err(|e| Error::io(&xml_path, e))?;
        for k in 0..SLICES_PER_PATIENT {
            let image = slice_pixels(p, k);
            let study = p.study_uid(pi);
            let series = p.series_uid(pi);
            let sop = p.sop_uid(pi, k);
            write_ct_slice(
                &dir.join(format!("slice_{k:02}.dcm")),
                &CtSlice {
                    patient_id: p.patient_id,
                    study_uid: &study,
                    series_uid: &series,
                    sop_uid: &sop,
                    instance_number: k as u32 + 1,
                    image_position: [p.origin.0, p.origin.1, slice_z(k)],
                    pixel_spacing: [p.pixel_spacing, p.pixel_spacing],
                    slice_thickness: SLICE_STEP,
                    rescale_slope: 1.0,
                    rescale_intercept: -1024.0,
                    image: &image,
                },
            )?;
        }
    }
    Ok(())
}

/// `n` profiles cycling each headline characteristic through 1..=5 at a
/// different stride, so every score is (near) equally frequent.
pub fn uniform_profiles(n: usize) -> Vec<CharacteristicProfile> {
    (0..n)
        .map(|i| {
            CharacteristicProfile::try_from_fn(|c| {
                let v = match c {
                    Characteristic::Sphericity => i % 5,
                    Characteristic::Margin => (i / 5 + i) % 5,
                    Characteristic::Texture => (i / 25 + 2 * i) % 5,
                    Characteristic::Lobulation => (i / 3) % 5,
                    Characteristic::Spiculation => (i / 7) % 5,
                    Characteristic::Calcification => i % 6,
                };
                v as i64 + 1
            })
            .expect("scores in range")
        })
        .collect()
}

/// Dataset records (no images) for the given profiles, ids `SYN-{i}_n001`.
pub fn synthetic_records(profiles: &[CharacteristicProfile], lexicon: &PhraseLexicon) -> Vec<DatasetRecord> {
    profiles
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            let id = format!("SYN-{i:04}_n001");
            qa_pairs(&id, &format!("images/{id}.png"), p, lexicon)
        })
        .map(DatasetRecord::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_has_twelve_nodules() {
        let n: usize = fixture_patients().iter().map(|p| p.nodules.len()).sum();
        assert_eq!(n, 12);
    }

    #[test]
    fn nodule_pixels_fill_outlines() {
        let p = &fixture_patients()[0];
        let img = slice_pixels(p, 3);
        assert_eq!(img.data[(10 * 64 + 40) as usize], NODULE_RAW);
        assert_eq!(img.data[0], BACKGROUND_RAW);
    }

    #[test]
    fn uniform_profiles_are_balanced() {
        let ps = uniform_profiles(250);
        for c in Characteristic::HEADLINE {
            let mut counts = [0; 6];
            for p in &ps {
                counts[p.get(c) as usize] += 1;
            }
            assert_eq!(&counts[1..], &[50; 5], "{c}");
        }
    }
}
