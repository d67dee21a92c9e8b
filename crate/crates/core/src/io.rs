//! Raster I/O.
//!
//! Binary PGM (`P5`) and PPM (`P6`) are always available and round-trip
//! bit-exactly for 8-bit data. PNG is behind the `png` feature. Real-valued
//! intermediate planes are written losslessly in a small raw `f64` format
//! (magic `CAMF64`) so later stages can be re-run from a dump.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{BinaryEdgeMap, ImagePlane, MultiChannelImage};

const F64_MAGIC: &[u8] = b"CAMF64\n";
const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Maps a working-scale sample to 8 bits, rounding half up.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Netpbm header tokenizer: whitespace separated, `#` comments to end of line.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Option<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()?.parse().ok()
    }
}

/// Decodes a `P5` or `P6` byte stream. `path` is only used for error context.
pub fn decode_pnm(bytes: &[u8], path: &Path) -> Result<MultiChannelImage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(format_err(path, "missing netpbm magic"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        other => {
            return Err(Error::Unsupported {
                path: path.to_path_buf(),
                reason: format!("netpbm variant P{}", other as char),
            })
        }
    };
    let mut hdr = HeaderReader { bytes, pos: 2 };
    let width = hdr.number().ok_or_else(|| format_err(path, "bad width"))?;
    let height = hdr.number().ok_or_else(|| format_err(path, "bad height"))?;
    let maxval = hdr.number().ok_or_else(|| format_err(path, "bad maxval"))?;
    if width == 0 || height == 0 {
        return Err(format_err(path, "zero dimension"));
    }
    if maxval == 0 {
        return Err(format_err(path, "maxval 0"));
    }
    if maxval > 255 {
        return Err(Error::Unsupported {
            path: path.to_path_buf(),
            reason: format!("maxval {maxval} (only 8-bit rasters are supported)"),
        });
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(hdr.pos) {
        Some(c) if c.is_ascii_whitespace() => hdr.pos += 1,
        _ => return Err(format_err(path, "missing whitespace after maxval")),
    }
    let expected = width * height * channels;
    let raster = &bytes[hdr.pos..];
    if raster.len() < expected {
        return Err(format_err(
            path,
            format!("truncated raster: {} of {expected} bytes", raster.len()),
        ));
    }
    let scale = maxval as f64;
    let mut planes = vec![Vec::with_capacity(width * height); channels];
    for (i, &s) in raster[..expected].iter().enumerate() {
        if s as usize > maxval {
            return Err(format_err(path, format!("sample {s} exceeds maxval {maxval}")));
        }
        planes[i % channels].push(s as f64 / scale);
    }
    let planes = planes
        .into_iter()
        .map(|d| ImagePlane::new(width, height, d))
        .collect::<Result<Vec<_>>>()?;
    MultiChannelImage::new(planes)
}

fn pnm_header(magic: &str, width: usize, height: usize) -> Vec<u8> {
    format!("{magic}\n{width} {height}\n255\n").into_bytes()
}

/// Encodes one plane as `P5`.
pub fn encode_pgm(plane: &ImagePlane) -> Vec<u8> {
    let mut out = pnm_header("P5", plane.width(), plane.height());
    out.extend(plane.data().iter().map(|&v| quantize(v)));
    out
}

/// Encodes an image as `P5` (one channel) or `P6` (three channels).
pub fn encode_pnm(img: &MultiChannelImage) -> Result<Vec<u8>> {
    match img.channels() {
        [gray] => Ok(encode_pgm(gray)),
        [r, g, b] => {
            let mut out = pnm_header("P6", img.width(), img.height());
            out.reserve(img.width() * img.height() * 3);
            for ((&r, &g), &b) in r.data().iter().zip(g.data()).zip(b.data()) {
                out.extend([quantize(r), quantize(g), quantize(b)]);
            }
            Ok(out)
        }
        other => Err(Error::UnsupportedChannels(other.len())),
    }
}

/// Encodes an edge map as `P5` with 0 and 255.
pub fn encode_edge_map(map: &BinaryEdgeMap) -> Vec<u8> {
    let mut out = pnm_header("P5", map.width(), map.height());
    out.extend(map.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

fn is_png_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Loads a raster, sniffing the format from its leading bytes.
pub fn load_raster(path: impl AsRef<Path>) -> Result<MultiChannelImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.starts_with(PNG_SIGNATURE) {
        return png::decode(&bytes, path);
    }
    decode_pnm(&bytes, path)
}

/// Loads a raster and reduces it to an edge map: any nonzero sample of the
/// first channel counts as an edge.
pub fn load_edge_map(path: impl AsRef<Path>) -> Result<BinaryEdgeMap> {
    let img = load_raster(path)?;
    let plane = &img.channels()[0];
    BinaryEdgeMap::new(
        plane.width(),
        plane.height(),
        plane.data().iter().map(|&v| v > 0.0).collect(),
    )
}

pub fn save_raster(path: impl AsRef<Path>, img: &MultiChannelImage) -> Result<()> {
    let path = path.as_ref();
    if is_png_path(path) {
        return png::save(path, img);
    }
    write_bytes(path, &encode_pnm(img)?)
}

pub fn save_plane(path: impl AsRef<Path>, plane: &ImagePlane) -> Result<()> {
    save_raster(path, &MultiChannelImage::from_gray(plane.clone()))
}

pub fn save_edge_map(path: impl AsRef<Path>, map: &BinaryEdgeMap) -> Result<()> {
    let path = path.as_ref();
    if is_png_path(path) {
        return png::save(
            path,
            &MultiChannelImage::from_gray(map.to_plane()),
        );
    }
    write_bytes(path, &encode_edge_map(map))
}

/// Lossless dump of a real-valued plane: magic, `width height`, then
/// little-endian `f64` samples.
pub fn encode_f64_plane(plane: &ImagePlane) -> Vec<u8> {
    let mut out = F64_MAGIC.to_vec();
    out.extend(format!("{} {}\n", plane.width(), plane.height()).into_bytes());
    for v in plane.data() {
        out.extend(v.to_le_bytes());
    }
    out
}

pub fn decode_f64_plane(bytes: &[u8], path: &Path) -> Result<ImagePlane> {
    let rest = bytes
        .strip_prefix(F64_MAGIC)
        .ok_or_else(|| format_err(path, "missing CAMF64 magic"))?;
    let nl = rest
        .iter()
        .position(|&c| c == b'\n')
        .ok_or_else(|| format_err(path, "unterminated dimension line"))?;
    let dims = std::str::from_utf8(&rest[..nl]).map_err(|_| format_err(path, "non-UTF-8 header"))?;
    let mut it = dims.split_whitespace().map(str::parse::<usize>);
    let (Some(Ok(w)), Some(Ok(h)), None) = (it.next(), it.next(), it.next()) else {
        return Err(format_err(path, "bad dimension line"));
    };
    let body = &rest[nl + 1..];
    if body.len() != w * h * 8 {
        return Err(format_err(path, "sample count does not match dimensions"));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    ImagePlane::new(w, h, data)
}

pub fn save_f64_plane(path: impl AsRef<Path>, plane: &ImagePlane) -> Result<()> {
    write_bytes(path.as_ref(), &encode_f64_plane(plane))
}

pub fn load_f64_plane(path: impl AsRef<Path>) -> Result<ImagePlane> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    decode_f64_plane(&bytes, path)
}

/// A named pair of input image and ground-truth edge map on disk.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub image: PathBuf,
    pub ground_truth: PathBuf,
}

/// Lists `<name>.ppm` / `<name>.gt.pgm` pairs in a directory, sorted by name.
pub fn scan_corpus_dir(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let Some(file) = path.file_name().and_then(|f| f.to_str()) else {
            continue;
        };
        if file.ends_with(".gt.pgm") {
            continue;
        }
        let Some(stem) = file.strip_suffix(".ppm").or_else(|| file.strip_suffix(".pgm")) else {
            continue;
        };
        let gt = dir.join(format!("{stem}.gt.pgm"));
        if !gt.exists() {
            return Err(io_err(
                &gt,
                std::io::Error::new(std::io::ErrorKind::NotFound, "ground truth missing"),
            ));
        }
        out.push(CorpusEntry {
            name: stem.to_string(),
            image: path.clone(),
            ground_truth: gt,
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[cfg(feature = "png")]
mod png {
    use super::*;

    pub(super) fn decode(bytes: &[u8], path: &Path) -> Result<MultiChannelImage> {
        let dynimg = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| format_err(path, e.to_string()))?;
        let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
        if dynimg.color().has_color() {
            let rgb = dynimg.to_rgb8();
            let samples: Vec<f64> = rgb.as_raw().iter().map(|&s| s as f64 / 255.0).collect();
            MultiChannelImage::from_interleaved_rgb(w, h, &samples)
        } else {
            let gray = dynimg.to_luma8();
            let data = gray.as_raw().iter().map(|&s| s as f64 / 255.0).collect();
            Ok(MultiChannelImage::from_gray(ImagePlane::new(w, h, data)?))
        }
    }

    pub(super) fn save(path: &Path, img: &MultiChannelImage) -> Result<()> {
        let (w, h) = (img.width() as u32, img.height() as u32);
        let result = match img.channels() {
            [gray] => {
                let raw = gray.data().iter().map(|&v| quantize(v)).collect();
                image::GrayImage::from_raw(w, h, raw)
                    .expect("buffer sized from dims")
                    .save(path)
            }
            [r, g, b] => {
                let mut raw = Vec::with_capacity(img.width() * img.height() * 3);
                for ((&r, &g), &b) in r.data().iter().zip(g.data()).zip(b.data()) {
                    raw.extend([quantize(r), quantize(g), quantize(b)]);
                }
                image::RgbImage::from_raw(w, h, raw)
                    .expect("buffer sized from dims")
                    .save(path)
            }
            other => return Err(Error::UnsupportedChannels(other.len())),
        };
        result.map_err(|e| format_err(path, e.to_string()))
    }
}

#[cfg(not(feature = "png"))]
mod png {
    use super::*;

    fn disabled(path: &Path) -> Error {
        Error::Unsupported {
            path: path.to_path_buf(),
            reason: "PNG support requires the `png` feature".into(),
        }
    }

    pub(super) fn decode(_bytes: &[u8], path: &Path) -> Result<MultiChannelImage> {
        Err(disabled(path))
    }

    pub(super) fn save(path: &Path, _img: &MultiChannelImage) -> Result<()> {
        Err(disabled(path))
    }
}
