//! Raster images and label maps.
//!
//! Coordinates are row-major with the origin at the top-left corner, `x`
//! growing rightward and `y` downward: pixel `(x, y)` lives at index
//! `y * width + x`.
//!
//! Label maps (seed masks, ground truths and segmentation results) are stored
//! as 8-bit single-channel rasters whose gray value is the class id. Indexed
//! PNGs are accepted too; their palette index is the class id, which is what
//! [`LabelMap::encode_png`] writes when given a palette.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};

/// Class identifier. `0` is the void label of seed masks.
pub type ClassId = u8;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// A `width × height` grid of RGB pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of pixels `M`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[index_of(self.width, x, y)]
    }

    /// Decodes a PNG or binary/ASCII PNM byte buffer into RGB.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let format = sniff_format(bytes)?;
        let decoded = image::load_from_memory_with_format(bytes, format)
            .map_err(|e| Error::Unreadable(e.to_string()))?;
        if decoded.width() == 0 || decoded.height() == 0 {
            return Err(Error::ZeroDimension);
        }
        let rgb = decoded.to_rgb8();
        let (width, height) = rgb.dimensions();
        let pixels = rgb.pixels().map(|p| p.0).collect();
        Self::new(width, height, pixels)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = read_file(path.as_ref())?;
        Self::decode(&bytes)
    }

    /// Reads `(width, height)` from the header without decoding pixels.
    pub fn probe_dimensions(bytes: &[u8]) -> Result<(u32, u32)> {
        let format = sniff_format(bytes)?;
        image::ImageReader::with_format(Cursor::new(bytes), format)
            .into_dimensions()
            .map_err(|e| Error::Unreadable(e.to_string()))
    }

    /// Encodes as an 8-bit RGB PNG.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let flat: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        encode_png(
            self.width,
            self.height,
            png::ColorType::Rgb,
            png::BitDepth::Eight,
            None,
            &flat,
        )
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }
}

/// Per-pixel class assignment with `num_classes = K` the largest class id in
/// use. A seed mask may contain the void label `0`; a final segmentation or a
/// ground truth may not (see [`LabelMap::is_total`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<ClassId>,
    num_classes: ClassId,
}

impl LabelMap {
    /// Builds a map whose `num_classes` is the largest label present.
    pub fn new(width: u32, height: u32, labels: Vec<ClassId>) -> Result<Self> {
        let k = labels.iter().copied().max().unwrap_or(0);
        Self::with_classes(width, height, labels, k)
    }

    pub fn with_classes(
        width: u32,
        height: u32,
        labels: Vec<ClassId>,
        num_classes: ClassId,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "{} labels for a {width}x{height} map",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > num_classes) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} exceeds num_classes {num_classes}"
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            num_classes,
        })
    }

    /// A map of void labels.
    pub fn empty(width: u32, height: u32) -> Result<Self> {
        Self::new(width, height, vec![0; width as usize * height as usize])
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> ClassId,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn num_classes(&self) -> ClassId {
        self.num_classes
    }

    pub fn get(&self, x: u32, y: u32) -> ClassId {
        self.labels[index_of(self.width, x, y)]
    }

    /// True when no pixel carries the void label.
    pub fn is_total(&self) -> bool {
        self.labels.iter().all(|&l| l != 0)
    }

    pub fn same_dims(&self, width: u32, height: u32) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                width,
                height,
            ));
        }
        Ok(())
    }

    /// Decodes an 8-bit single-channel PNG/PGM, or an 8-bit indexed PNG
    /// (palette index = class id).
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(PNG_SIGNATURE) {
            return decode_label_png(bytes);
        }
        let format = sniff_format(bytes)?;
        let decoded = image::load_from_memory_with_format(bytes, format)
            .map_err(|e| Error::Unreadable(e.to_string()))?;
        match decoded {
            DynamicImage::ImageLuma8(gray) => {
                let (w, h) = gray.dimensions();
                Self::new(w, h, gray.into_raw())
            }
            DynamicImage::ImageLuma16(_) => {
                Err(Error::UnsupportedFormat("16-bit label map".into()))
            }
            _ => Err(Error::MultiChannel),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = read_file(path.as_ref())?;
        Self::decode(&bytes)
    }

    /// Encodes as PNG. Without a palette the output is 8-bit grayscale with
    /// gray value = class id. With a palette the output is indexed, with
    /// `palette[j]` the color of class `j`; the palette must cover every
    /// label present.
    pub fn encode_png(&self, palette: Option<&[[u8; 3]]>) -> Result<Vec<u8>> {
        match palette {
            None => encode_png(
                self.width,
                self.height,
                png::ColorType::Grayscale,
                png::BitDepth::Eight,
                None,
                &self.labels,
            ),
            Some(colors) => {
                let max = self.labels.iter().copied().max().unwrap_or(0) as usize;
                if colors.len() <= max || colors.len() > 256 {
                    return Err(Error::InvalidParameter(format!(
                        "palette of {} colors for labels up to {max}",
                        colors.len()
                    )));
                }
                let plte: Vec<u8> = colors.iter().flatten().copied().collect();
                encode_png(
                    self.width,
                    self.height,
                    png::ColorType::Indexed,
                    png::BitDepth::Eight,
                    Some(plte),
                    &self.labels,
                )
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>, palette: Option<&[[u8; 3]]>) -> Result<()> {
        std::fs::write(path, self.encode_png(palette)?)?;
        Ok(())
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    RasterImage::load(path)
}

pub fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    LabelMap::load(path)
}

pub fn save_label_map(
    map: &LabelMap,
    path: impl AsRef<Path>,
    palette: Option<&[[u8; 3]]>,
) -> Result<()> {
    map.save(path, palette)
}

#[inline]
pub fn index_of(width: u32, x: u32, y: u32) -> usize {
    y as usize * width as usize + x as usize
}

#[inline]
pub fn coords_of(width: u32, idx: usize) -> (u32, u32) {
    let w = width as usize;
    ((idx % w) as u32, (idx / w) as u32)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Unreadable(format!("{}: {e}", path.display())))
}

fn sniff_format(bytes: &[u8]) -> Result<ImageFormat> {
    if bytes.starts_with(PNG_SIGNATURE) {
        return Ok(ImageFormat::Png);
    }
    if bytes.len() >= 2 && bytes[0] == b'P' && (b'1'..=b'6').contains(&bytes[1]) {
        return Ok(ImageFormat::Pnm);
    }
    match image::guess_format(bytes) {
        Ok(other) => Err(Error::UnsupportedFormat(format!("{other:?}"))),
        Err(_) => Err(Error::UnsupportedFormat("unrecognized data".into())),
    }
}

fn decode_label_png(bytes: &[u8]) -> Result<LabelMap> {
    let unreadable = |e: png::DecodingError| Error::Unreadable(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(unreadable)?;
    let (color, depth) = reader.output_color_type();
    match color {
        png::ColorType::Grayscale | png::ColorType::Indexed => {}
        _ => return Err(Error::MultiChannel),
    }
    if depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!("{depth:?} bit label map")));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Unreadable("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(unreadable)?;
    if info.width == 0 || info.height == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut labels = Vec::with_capacity(info.width as usize * info.height as usize);
    for row in buf.chunks(info.line_size).take(info.height as usize) {
        labels.extend_from_slice(&row[..info.width as usize]);
    }
    LabelMap::new(info.width, info.height, labels)
}

pub(crate) fn encode_png(
    width: u32,
    height: u32,
    color: png::ColorType,
    depth: png::BitDepth,
    palette: Option<Vec<u8>>,
    data: &[u8],
) -> Result<Vec<u8>> {
    let encoding = |e: png::EncodingError| Error::Serialization(e.to_string());
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(color);
        encoder.set_depth(depth);
        if let Some(plte) = palette {
            encoder.set_palette(plte);
        }
        let mut writer = encoder.write_header().map_err(encoding)?;
        writer.write_image_data(data).map_err(encoding)?;
        writer.finish().map_err(encoding)?;
    }
    Ok(out)
}
