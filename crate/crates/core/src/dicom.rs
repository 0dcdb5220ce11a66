//! Reading (and, for synthetic fixtures, writing) CT slices via `dicom-object`.
//!
//! Only native (uncompressed) 16-bit single-sample pixel data is decoded.

use std::path::Path;

use dicom_core::value::{PrimitiveValue, C};
use dicom_core::{DataElement, Tag, VR};
use dicom_dictionary_std::tags;
use dicom_object::{open_file, FileMetaTableBuilder, InMemDicomObject, OpenFileOptions};

use crate::error::{Error, Result};
use crate::lidc::SliceHeader;
use crate::roi::RawImage;

const CT_IMAGE_STORAGE: &str = "1.2.840.10008.5.1.4.1.1.2";
const EXPLICIT_VR_LE: &str = "1.2.840.10008.1.2.1";

fn dicom_err(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Dicom {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Reads the header tags a [`SliceHeader`] needs, stopping before pixel data.
pub fn read_header(path: &Path) -> Result<SliceHeader> {
    let obj = OpenFileOptions::new()
        .read_until(tags::PIXEL_DATA)
        .open_file(path)
        .map_err(|e| dicom_err(path, e))?;

    let text = |tag: Tag| -> Option<String> {
        obj.element_opt(tag)
            .ok()
            .flatten()
            .and_then(|e| e.to_str().ok())
            .map(|s| s.trim_matches(|c: char| c == '\0' || c.is_whitespace()).to_string())
            .filter(|s| !s.is_empty())
    };
    let floats = |tag: Tag| -> Option<Vec<f64>> {
        obj.element_opt(tag)
            .ok()
            .flatten()
            .and_then(|e| e.to_multi_float64().ok())
    };
    let float = |tag: Tag| floats(tag).and_then(|v| v.first().copied());
    let uint = |tag: Tag| -> Option<u32> {
        obj.element_opt(tag).ok().flatten().and_then(|e| e.to_int::<u32>().ok())
    };

    Ok(SliceHeader {
        sop_uid: text(tags::SOP_INSTANCE_UID),
        series_uid: text(tags::SERIES_INSTANCE_UID),
        patient_id: text(tags::PATIENT_ID),
        image_position: floats(tags::IMAGE_POSITION_PATIENT)
            .filter(|v| v.len() == 3)
            .map(|v| [v[0], v[1], v[2]]),
        pixel_spacing: floats(tags::PIXEL_SPACING)
            .filter(|v| v.len() == 2)
            .map(|v| [v[0], v[1]]),
        rescale_slope: float(tags::RESCALE_SLOPE),
        rescale_intercept: float(tags::RESCALE_INTERCEPT),
        rows: uint(tags::ROWS),
        cols: uint(tags::COLUMNS),
    })
}

/// Reads the stored pixel values of a slice.
pub fn read_pixels(path: &Path) -> Result<RawImage> {
    let obj = open_file(path).map_err(|e| dicom_err(path, e))?;
    let uint = |tag: Tag, name: &str| -> Result<u32> {
        obj.element(tag)
            .map_err(|_| dicom_err(path, format!("missing {name}")))?
            .to_int::<u32>()
            .map_err(|e| dicom_err(path, e))
    };
    let rows = uint(tags::ROWS, "rows")?;
    let cols = uint(tags::COLUMNS, "columns")?;
    let bits = uint(tags::BITS_ALLOCATED, "bits allocated")?;
    let signed = uint(tags::PIXEL_REPRESENTATION, "pixel representation")? == 1;
    if bits != 16 {
        return Err(dicom_err(path, format!("unsupported bits allocated {bits}")));
    }
    let element = obj
        .element(tags::PIXEL_DATA)
        .map_err(|_| dicom_err(path, "missing pixel data"))?;
    let primitive = element
        .value()
        .primitive()
        .ok_or_else(|| dicom_err(path, "encapsulated pixel data is not supported"))?;

    let data: Vec<i32> = match primitive {
        PrimitiveValue::U16(v) if signed => v.iter().map(|&x| i32::from(x as i16)).collect(),
        PrimitiveValue::U16(v) => v.iter().map(|&x| i32::from(x)).collect(),
        PrimitiveValue::I16(v) => v.iter().map(|&x| i32::from(x)).collect(),
        PrimitiveValue::U8(bytes) => bytes
            .chunks_exact(2)
            .map(|b| {
                let raw = u16::from_le_bytes([b[0], b[1]]);
                if signed {
                    i32::from(raw as i16)
                } else {
                    i32::from(raw)
                }
            })
            .collect(),
        _ => return Err(dicom_err(path, "unexpected pixel data value type")),
    };
    let expected = rows as usize * cols as usize;
    if data.len() < expected {
        return Err(dicom_err(
            path,
            format!("pixel data has {} samples, expected {expected}", data.len()),
        ));
    }
    RawImage::new(cols, rows, data[..expected].to_vec())
}

/// A minimal CT slice description for writing synthetic files.
#[derive(Debug, Clone)]
pub struct CtSlice<'a> {
    pub patient_id: &'a str,
    pub study_uid: &'a str,
    pub series_uid: &'a str,
    pub sop_uid: &'a str,
    pub instance_number: u32,
    pub image_position: [f64; 3],
    pub pixel_spacing: [f64; 2],
    pub slice_thickness: f64,
    pub rescale_slope: f64,
    pub rescale_intercept: f64,
    pub image: &'a RawImage,
}

fn ds(values: &[f64]) -> PrimitiveValue {
    PrimitiveValue::Strs(values.iter().map(|v| v.to_string()).collect())
}

/// Writes an Explicit VR Little Endian CT image file with unsigned 16-bit pixels.
pub fn write_ct_slice(path: &Path, slice: &CtSlice<'_>) -> Result<()> {
    let img = slice.image;
    let pixels: C<u16> = img
        .data
        .iter()
        .map(|&v| u16::try_from(v).map_err(|_| Error::invalid(format!("stored value {v} does not fit u16"))))
        .collect::<Result<_>>()?;
    let elements = vec![
        DataElement::new(tags::SOP_CLASS_UID, VR::UI, PrimitiveValue::from(CT_IMAGE_STORAGE)),
        DataElement::new(tags::SOP_INSTANCE_UID, VR::UI, PrimitiveValue::from(slice.sop_uid)),
        DataElement::new(tags::MODALITY, VR::CS, PrimitiveValue::from("CT")),
        DataElement::new(tags::PATIENT_ID, VR::LO, PrimitiveValue::from(slice.patient_id)),
        DataElement::new(tags::STUDY_INSTANCE_UID, VR::UI, PrimitiveValue::from(slice.study_uid)),
        DataElement::new(tags::SERIES_INSTANCE_UID, VR::UI, PrimitiveValue::from(slice.series_uid)),
        DataElement::new(
            tags::INSTANCE_NUMBER,
            VR::IS,
            PrimitiveValue::from(slice.instance_number.to_string()),
        ),
        DataElement::new(tags::IMAGE_POSITION_PATIENT, VR::DS, ds(&slice.image_position)),
        DataElement::new(
            tags::IMAGE_ORIENTATION_PATIENT,
            VR::DS,
            ds(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        ),
        DataElement::new(tags::SLICE_THICKNESS, VR::DS, ds(&[slice.slice_thickness])),
        DataElement::new(tags::SAMPLES_PER_PIXEL, VR::US, PrimitiveValue::from(1u16)),
        DataElement::new(
            tags::PHOTOMETRIC_INTERPRETATION,
            VR::CS,
            PrimitiveValue::from("MONOCHROME2"),
        ),
        DataElement::new(tags::ROWS, VR::US, PrimitiveValue::from(img.height as u16)),
        DataElement::new(tags::COLUMNS, VR::US, PrimitiveValue::from(img.width as u16)),
        DataElement::new(tags::PIXEL_SPACING, VR::DS, ds(&slice.pixel_spacing)),
        DataElement::new(tags::BITS_ALLOCATED, VR::US, PrimitiveValue::from(16u16)),
        DataElement::new(tags::BITS_STORED, VR::US, PrimitiveValue::from(16u16)),
        DataElement::new(tags::HIGH_BIT, VR::US, PrimitiveValue::from(15u16)),
        DataElement::new(tags::PIXEL_REPRESENTATION, VR::US, PrimitiveValue::from(0u16)),
        DataElement::new(tags::RESCALE_INTERCEPT, VR::DS, ds(&[slice.rescale_intercept])),
        DataElement::new(tags::RESCALE_SLOPE, VR::DS, ds(&[slice.rescale_slope])),
        DataElement::new(tags::PIXEL_DATA, VR::OW, PrimitiveValue::U16(pixels)),
    ];
    let obj = InMemDicomObject::from_element_iter(elements);
    let file = obj
        .with_meta(
            FileMetaTableBuilder::new()
                .transfer_syntax(EXPLICIT_VR_LE)
                .media_storage_sop_class_uid(CT_IMAGE_STORAGE)
                .media_storage_sop_instance_uid(slice.sop_uid),
        )
        .map_err(|e| dicom_err(path, e))?;
    file.write_to_file(path).map_err(|e| dicom_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slice.dcm");
        let image = RawImage::new(4, 3, (0..12).map(|v| v * 100).collect()).unwrap();
        let slice = CtSlice {
            patient_id: "P-1",
            study_uid: "1.2.3",
            series_uid: "1.2.3.4",
            sop_uid: "1.2.3.4.5",
            instance_number: 1,
            image_position: [-150.0, -160.5, -82.5],
            pixel_spacing: [0.7, 0.75],
            slice_thickness: 2.5,
            rescale_slope: 1.0,
            rescale_intercept: -1024.0,
            image: &image,
        };
        write_ct_slice(&path, &slice).unwrap();

        let header = read_header(&path).unwrap();
        assert_eq!(header.sop_uid.as_deref(), Some("1.2.3.4.5"));
        assert_eq!(header.series_uid.as_deref(), Some("1.2.3.4"));
        assert_eq!(header.patient_id.as_deref(), Some("P-1"));
        assert_eq!(header.image_position, Some([-150.0, -160.5, -82.5]));
        assert_eq!(header.pixel_spacing, Some([0.7, 0.75]));
        assert_eq!(header.rescale_intercept, Some(-1024.0));
        assert_eq!((header.rows, header.cols), (Some(3), Some(4)));

        let pixels = read_pixels(&path).unwrap();
        assert_eq!(pixels, image);
    }

    #[test]
    fn non_dicom_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.dcm");
        std::fs::write(&path, b"not a dicom file").unwrap();
        assert!(matches!(read_header(&path), Err(Error::Dicom { .. })));
    }
}
