//! Decodes a CT slice to HU, applies a lung window and crops a square ROI
//! twice the nodule's long-axis diameter, then writes the PNG.
//!
//! ```text
//! cargo run --example roi_crop [OUT.png]
//! ```

use std::path::PathBuf;

use nodule_vqa::dicom::{read_header, read_pixels};
use nodule_vqa::roi::{crop_roi, decode_to_hu, encode_png, window_to_8bit, write_atomic, RoiSpec, Window};
use nodule_vqa::synth::write_fixture_tree;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    write_fixture_tree(tmp.path())?;
    let slice = tmp.path().join("LIDC-SYN-0001/slice_02.dcm");

    let header = read_header(&slice)?;
    let raw = read_pixels(&slice)?;
    let hu = decode_to_hu(&raw, header.rescale_slope.unwrap_or(1.0), header.rescale_intercept.unwrap_or(0.0))?;
    let gray = window_to_8bit(&hu, Window::default())?;

    // a 6 x 8 pixel rectangle at (8, 8); its diagonal is 10 px = 7 mm
    let spacing = header.pixel_spacing.map_or(1.0, |s| s[1]);
    let spec = RoiSpec::from_diameter((11.0, 12.0), 10.0 * spacing, spacing, header.sop_uid.unwrap_or_default());
    let roi = crop_roi(&gray, &spec);
    println!(
        "slice {}x{}, HU range {:.0}..{:.0}, ROI side {} px at origin {:?}",
        raw.width,
        raw.height,
        hu.data.iter().cloned().fold(f64::INFINITY, f64::min),
        hu.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        roi.width,
        spec.origin()
    );

    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| tmp.path().join("roi.png"));
    write_atomic(&out, &encode_png(&roi)?)?;
    println!("wrote {}", out.display());
    Ok(())
}
