//! Hounsfield conversion, display windowing and square ROI cropping.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum ROI side in pixels.
pub const MIN_SIDE_PX: u32 = 8;

/// Stored (pre-rescale) pixel values, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<i32>,
}

impl RawImage {
    pub fn new(width: u32, height: u32, data: Vec<i32>) -> Result<Self> {
        check_len(width, height, data.len())?;
        Ok(RawImage { width, height, data })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

/// 8-bit grayscale, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }
}

fn check_len(width: u32, height: u32, len: usize) -> Result<()> {
    let expected = width as usize * height as usize;
    if len == expected {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "pixel array has {len} samples, expected {width}x{height} = {expected}"
        )))
    }
}

/// Display window in HU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub level: f64,
    pub width: f64,
}

impl Default for Window {
    /// Lung window.
    fn default() -> Self {
        Window {
            level: -600.0,
            width: 1500.0,
        }
    }
}

/// `hu = raw * slope + intercept`, element-wise.
pub fn decode_to_hu(raw: &RawImage, slope: f64, intercept: f64) -> Result<HuImage> {
    check_len(raw.width, raw.height, raw.data.len())?;
    Ok(HuImage {
        width: raw.width,
        height: raw.height,
        data: raw
            .data
            .iter()
            .map(|&v| f64::from(v) * slope + intercept)
            .collect(),
    })
}

/// Maps `[level - width/2, level + width/2]` linearly onto `0..=255`,
/// clamping outside and rounding half up.
pub fn window_to_8bit(hu: &HuImage, window: Window) -> Result<GrayImage> {
    if window.width.is_nan() || window.width <= 0.0 {
        return Err(Error::invalid("window width must be positive"));
    }
    let lower = window.level - window.width / 2.0;
    let data = hu
        .data
        .iter()
        .map(|&h| {
            let v = (h - lower) / window.width * 255.0;
            (v + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(GrayImage {
        width: hu.width,
        height: hu.height,
        data,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec {
    /// Nodule center in (column, row) pixel coordinates of the source slice.
    pub center_px: (f64, f64),
    pub side_px: u32,
    pub source_sop_uid: String,
}

impl RoiSpec {
    /// Side equal to twice the long-axis diameter, in pixels of the given
    /// spacing, rounded half up and clamped to [`MIN_SIDE_PX`].
    pub fn from_diameter(
        center_px: (f64, f64),
        long_axis_diameter_mm: f64,
        pixel_spacing_mm: f64,
        source_sop_uid: impl Into<String>,
    ) -> Self {
        RoiSpec {
            center_px,
            side_px: side_px(long_axis_diameter_mm, pixel_spacing_mm),
            source_sop_uid: source_sop_uid.into(),
        }
    }

    /// Top-left corner of the crop window, snapped toward the origin.
    pub fn origin(&self) -> (i64, i64) {
        let half = f64::from(self.side_px) / 2.0;
        (
            (self.center_px.0 - half).floor() as i64,
            (self.center_px.1 - half).floor() as i64,
        )
    }
}

pub fn side_px(long_axis_diameter_mm: f64, pixel_spacing_mm: f64) -> u32 {
    let side = (2.0 * long_axis_diameter_mm / pixel_spacing_mm + 0.5).floor();
    if side.is_finite() && side > f64::from(MIN_SIDE_PX) {
        side.min(f64::from(u32::MAX)) as u32
    } else {
        MIN_SIDE_PX
    }
}

/// Crops `side_px x side_px` around the ROI center; out-of-image pixels are 0.
pub fn crop_roi(img: &GrayImage, spec: &RoiSpec) -> GrayImage {
    let side = spec.side_px;
    let (x0, y0) = spec.origin();
    let mut data = vec![0u8; side as usize * side as usize];
    for row in 0..side as i64 {
        let sy = y0 + row;
        if sy < 0 || sy >= i64::from(img.height) {
            continue;
        }
        for col in 0..side as i64 {
            let sx = x0 + col;
            if sx < 0 || sx >= i64::from(img.width) {
                continue;
            }
            data[(row * i64::from(side) + col) as usize] = img.get(sx as u32, sy as u32);
        }
    }
    GrayImage {
        width: side,
        height: side,
        data,
    }
}

/// Encodes an 8-bit grayscale PNG.
pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width, img.height);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Internal(format!("png header: {e}")))?;
        writer
            .write_image_data(&img.data)
            .map_err(|e| Error::Internal(format!("png data: {e}")))?;
    }
    Ok(out)
}

/// Decodes an 8-bit grayscale PNG written by [`encode_png`].
pub fn read_png(path: &Path) -> Result<GrayImage> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::invalid(format!("{}: not 8-bit grayscale", path.display())));
    }
    buf.truncate(info.buffer_size());
    Ok(GrayImage {
        width: info.width,
        height: info.height,
        data: buf,
    })
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        w.flush().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu1(v: f64) -> HuImage {
        HuImage {
            width: 1,
            height: 1,
            data: vec![v],
        }
    }

    #[test]
    fn rescale_examples() {
        let raw = RawImage::new(3, 1, vec![1000, 0, 512]).unwrap();
        assert_eq!(decode_to_hu(&raw, 1.0, -1024.0).unwrap().data[..2], [-24.0, -1024.0]);
        assert_eq!(decode_to_hu(&raw, 2.0, 0.0).unwrap().data[2], 1024.0);
    }

    #[test]
    fn rescale_dimension_mismatch() {
        let raw = RawImage {
            width: 2,
            height: 2,
            data: vec![0; 3],
        };
        assert!(decode_to_hu(&raw, 1.0, 0.0).is_err());
        assert!(RawImage::new(2, 2, vec![0; 5]).is_err());
    }

    #[test]
    fn window_examples() {
        let w = Window::default();
        let px = |h| window_to_8bit(&hu1(h), w).unwrap().data[0];
        assert_eq!(px(-1350.0), 0);
        assert_eq!(px(150.0), 255);
        assert_eq!(px(-600.0), 128);
        assert_eq!(px(-3000.0), 0);
        assert_eq!(px(3000.0), 255);
        assert!(window_to_8bit(&hu1(0.0), Window { level: 0.0, width: 0.0 }).is_err());
    }

    #[test]
    fn crop_window_arithmetic() {
        let img = GrayImage {
            width: 512,
            height: 512,
            data: (0..512 * 512).map(|i| ((i % 512) ^ (i / 512)) as u8).collect(),
        };
        let spec = RoiSpec {
            center_px: (100.0, 100.0),
            side_px: 40,
            source_sop_uid: "s".into(),
        };
        assert_eq!(spec.origin(), (80, 80));
        let out = crop_roi(&img, &spec);
        assert_eq!((out.width, out.height), (40, 40));
        assert_eq!(out.get(0, 0), img.get(80, 80));
        assert_eq!(out.get(39, 39), img.get(119, 119));
    }

    #[test]
    fn crop_pads_outside() {
        let img = GrayImage {
            width: 64,
            height: 64,
            data: vec![200; 64 * 64],
        };
        let spec = RoiSpec {
            center_px: (5.0, 5.0),
            side_px: 40,
            source_sop_uid: "s".into(),
        };
        let out = crop_roi(&img, &spec);
        assert_eq!((out.width, out.height), (40, 40));
        assert_eq!(out.get(0, 0), 0);
        assert_eq!(out.get(14, 14), 0);
        assert_eq!(out.get(15, 15), 200);
        let far = RoiSpec {
            center_px: (-500.0, 900.0),
            ..spec
        };
        let out = crop_roi(&img, &far);
        assert_eq!((out.width, out.height), (40, 40));
        assert!(out.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn side_from_diameter() {
        assert_eq!(side_px(14.0, 0.7), 40);
        assert_eq!(side_px(1.0, 0.7), MIN_SIDE_PX);
        let spec = RoiSpec::from_diameter((0.0, 0.0), 7.0, 0.7, "x");
        assert_eq!(spec.side_px, 20);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage {
            width: 3,
            height: 2,
            data: vec![0, 10, 20, 30, 40, 255],
        };
        let path = dir.path().join("a.png");
        write_atomic(&path, &encode_png(&img).unwrap()).unwrap();
        assert_eq!(read_png(&path).unwrap(), img);
        assert!(!dir.path().join("a.png.tmp").exists());
    }
}
