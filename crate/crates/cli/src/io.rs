//! File formats owned by the command line: JSON documents, CSV tables, PFM
//! images with JSON sidecars and PNG previews.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::{imageops, GrayImage, ImageBuffer, Luma};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sve_core::metrics::{mu_tonemap_image, normalize, quantile, NORMALIZATION_QUANTILE};
use sve_core::sensor_sim::{read_pfm, write_pfm};
use sve_core::{Level, LevelSet, Pattern, RadianceMap, RawCapture, SensorConfig};

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path.display().to_string(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `{"levels": [...]}` or a bare list of `{"tau", "alpha"}` objects.
#[derive(Deserialize)]
#[serde(untagged)]
enum LevelsDoc {
    Set(LevelSet),
    List(Vec<Level>),
}

pub fn read_levels(path: &Path) -> CliResult<LevelSet> {
    match read_json::<LevelsDoc>(path)? {
        LevelsDoc::Set(set) => Ok(set),
        LevelsDoc::List(list) => LevelSet::new(list).map_err(|e| CliError::core_at(path, e)),
    }
}

pub fn read_scene(path: &Path) -> CliResult<RadianceMap> {
    read_pfm(path).map_err(|e| CliError::core_at(path, e))
}

pub fn write_scene(path: &Path, map: &RadianceMap) -> CliResult<()> {
    write_pfm(path, map).map_err(|e| CliError::core_at(path, e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// `scene.pfm` -> `scene.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// `out.csv` -> `out.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        Ok(CsvOut { path: path.to_path_buf(), writer: csv::Writer::from_writer(BufWriter::new(file)) })
    }

    pub fn row<T: Serialize>(&mut self, record: T) -> CliResult<()> {
        self.writer.serialize(record).map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Internal(format!("{}: {other:?}", path.display())),
    }
}

/// μ-law preview: normalized by `scale` (the image's own 99.9th percentile
/// when `None`) and quantized to 8 bits.
pub fn write_png(path: &Path, map: &RadianceMap, scale: Option<f64>, mu: f64) -> CliResult<()> {
    let scale = scale.unwrap_or_else(|| quantile(map.values(), NORMALIZATION_QUANTILE));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let toned = mu_tonemap_image(&normalize(map.values(), scale), mu);
    let pixels = toned.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    let img = GrayImage::from_raw(map.width() as u32, map.height() as u32, pixels)
        .ok_or_else(|| CliError::Internal("preview buffer size mismatch".into()))?;
    img.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => CliError::io(path, io),
        other => CliError::Internal(format!("{}: {other}", path.display())),
    })
}

/// Bilinear resize so the short edge is `edge` pixels, then trims to even
/// dimensions.
pub fn resize_short_edge(map: &RadianceMap, edge: usize) -> CliResult<RadianceMap> {
    let (w, h) = (map.width(), map.height());
    let short = w.min(h);
    let (nw, nh) =
        if w <= h { (edge, (h * edge + short / 2) / short) } else { ((w * edge + short / 2) / short, edge) };
    let values: Vec<f32> = map.values().iter().map(|&v| v as f32).collect();
    let img: ImageBuffer<Luma<f32>, Vec<f32>> = ImageBuffer::from_raw(w as u32, h as u32, values)
        .ok_or_else(|| CliError::Internal("scene buffer size mismatch".into()))?;
    let out = imageops::resize(&img, nw as u32, nh as u32, imageops::FilterType::Triangle);
    let (ew, eh) = (nw & !1, nh & !1);
    RadianceMap::from_clamped(
        ew,
        eh,
        (0..eh)
            .flat_map(|r| (0..ew).map(move |c| (r, c)))
            .map(|(r, c)| f64::from(out.get_pixel(c as u32, r as u32).0[0]))
            .collect(),
    )
    .map_err(CliError::from)
}

/// Sidecar stored next to a capture's code image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaptureMeta {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub noise: bool,
    pub pattern: Pattern,
    pub sensor: SensorConfig,
}

/// Writes the codes as a PFM and the metadata as its sidecar.
pub fn write_capture<M: Serialize>(
    path: &Path,
    capture: &RawCapture,
    noise: bool,
    extra: &M,
) -> CliResult<()> {
    let codes = capture.codes.iter().map(|&c| f64::from(c)).collect();
    write_scene(path, &RadianceMap::new(capture.width, capture.height, codes)?)?;
    #[derive(Serialize)]
    struct Doc<'a, M> {
        #[serde(flatten)]
        meta: CaptureMeta,
        run: &'a M,
    }
    let meta = CaptureMeta {
        width: capture.width,
        height: capture.height,
        seed: capture.seed,
        noise,
        pattern: capture.pattern,
        sensor: capture.config,
    };
    write_json(&sidecar_path(path), &Doc { meta, run: extra })
}

pub fn read_capture(path: &Path) -> CliResult<RawCapture> {
    let side = sidecar_path(path);
    let meta: CaptureMeta = read_json(&side)?;
    meta.sensor.validate().map_err(|e| CliError::core_at(&side, e))?;
    let map = read_scene(path)?;
    if (map.width(), map.height()) != (meta.width, meta.height) {
        return Err(CliError::Precondition(format!(
            "{}: image is {}x{} but the sidecar says {}x{}",
            path.display(),
            map.width(),
            map.height(),
            meta.width,
            meta.height
        )));
    }
    let top = f64::from(meta.sensor.max_code());
    let codes = map
        .values()
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && v <= top {
                Ok(v as u16)
            } else {
                Err(CliError::parse(path.display().to_string(), format!("{v} is not an ADC code")))
            }
        })
        .collect::<CliResult<Vec<u16>>>()?;
    Ok(RawCapture {
        width: meta.width,
        height: meta.height,
        codes,
        pattern: meta.pattern,
        config: meta.sensor,
        seed: meta.seed,
    })
}
