//! Escape-time rendering of parameter slices and dynamical planes.
//!
//! Work is split into horizontal bands of [`BAND_ROWS`] rows. Each band is a
//! pure function of the spec, the viewport and its index, so the assembled
//! image does not depend on how many workers ran.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{critical_orbits, Orbiter, Outcome, SliceSpec};
use crate::geometry::{center_a_k, spine_polyline, SpineOrder};
use crate::maps::MapParams;
use crate::palette::Palette;

pub const BAND_ROWS: usize = 8;
pub const DEFAULT_BUDGET: u32 = 512;
pub const MAX_DEEP_BUDGET: u32 = 1 << 16;
const SPINE_OVERLAY_SAMPLES: usize = 512;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("viewport needs positive finite extent and at least one pixel per side")]
    BadViewport,
    #[error("pixel buffer has {got} bytes, expected {expected}")]
    BufferSize { expected: usize, got: usize },
    #[error("malformed PPM: {0}")]
    Ppm(&'static str),
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rectangular window of the plane sampled on a `px_w × px_h` grid. Pixel
/// `(i, j)` samples the center of its cell; row 0 is the top edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Viewport {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
    pub px_w: usize,
    pub px_h: usize,
}

impl Viewport {
    pub fn new(center: Complex64, width: f64, height: f64, px_w: usize, px_h: usize) -> Result<Self, RenderError> {
        let finite = center.re.is_finite() && center.im.is_finite() && width.is_finite() && height.is_finite();
        if !finite || width <= 0.0 || height <= 0.0 || px_w == 0 || px_h == 0 {
            return Err(RenderError::BadViewport);
        }
        Ok(Viewport { center, width, height, px_w, px_h })
    }

    /// Square window of side `width` on a `px × px` grid.
    pub fn square(center: Complex64, width: f64, px: usize) -> Result<Self, RenderError> {
        Viewport::new(center, width, width, px, px)
    }

    pub fn pixel_to_plane(&self, i: usize, j: usize) -> Complex64 {
        let x = self.center.re + (i as f64 + 0.5 - self.px_w as f64 / 2.0) * (self.width / self.px_w as f64);
        let y = self.center.im - (j as f64 + 0.5 - self.px_h as f64 / 2.0) * (self.height / self.px_h as f64);
        Complex64::new(x, y)
    }

    /// Continuous pixel coordinates of `z`; integer values are cell centers.
    pub fn plane_to_pixel(&self, z: Complex64) -> (f64, f64) {
        let i = (z.re - self.center.re + self.width / 2.0) * self.px_w as f64 / self.width - 0.5;
        let j = (self.center.im + self.height / 2.0 - z.im) * self.px_h as f64 / self.height - 0.5;
        (i, j)
    }

    /// Nearest pixel cell, if `z` lies inside the window.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let (i, j) = self.plane_to_pixel(z);
        let (i, j) = (i.round(), j.round());
        if i < 0.0 || j < 0.0 || i >= self.px_w as f64 || j >= self.px_h as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }
}

/// Budget for a window of the given width: the overview default, growing
/// with the zoom depth.
pub fn default_budget(width: f64) -> u32 {
    if width.is_nan() || width <= 0.0 || width >= 1.0 {
        return DEFAULT_BUDGET;
    }
    let depth = (1.0 / width).log2();
    let budget = DEFAULT_BUDGET as f64 * (1.0 + depth);
    budget.min(MAX_DEEP_BUDGET as f64) as u32
}

/// Row-major RGB8 pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    px_w: usize,
    px_h: usize,
    pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(px_w: usize, px_h: usize) -> Self {
        ImageBuffer {
            px_w,
            px_h,
            pixels: vec![0; 3 * px_w * px_h],
        }
    }

    pub fn from_raw(px_w: usize, px_h: usize, pixels: Vec<u8>) -> Result<Self, RenderError> {
        let expected = 3 * px_w * px_h;
        if pixels.len() != expected {
            return Err(RenderError::BufferSize { expected, got: pixels.len() });
        }
        Ok(ImageBuffer { px_w, px_h, pixels })
    }

    pub fn width(&self) -> usize {
        self.px_w
    }

    pub fn height(&self) -> usize {
        self.px_h
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, i: usize, j: usize) -> [u8; 3] {
        let o = 3 * (j * self.px_w + i);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    pub fn set(&mut self, i: usize, j: usize, rgb: [u8; 3]) {
        let o = 3 * (j * self.px_w + i);
        self.pixels[o..o + 3].copy_from_slice(&rgb);
    }

    /// 3×3 square centered on `(i, j)`, clipped to the image.
    pub fn mark(&mut self, i: usize, j: usize, rgb: [u8; 3]) {
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (x, y) = (i as i64 + di, j as i64 + dj);
                if x >= 0 && y >= 0 && (x as usize) < self.px_w && (y as usize) < self.px_h {
                    self.set(x as usize, y as usize, rgb);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PlaneKind {
    ParameterSlice(SliceSpec),
    DynamicalPlane(MapParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Overlay {
    /// Hyperbolic-component centers `a_k` (fixed-critical slices only).
    Centers,
    /// The spine `S_n` (fixed-critical slices only).
    Spine,
    /// `v_plus` and `v_minus` (dynamical planes only).
    CriticalValues,
    Zero,
}

impl Overlay {
    pub fn parse(s: &str) -> Option<Overlay> {
        match s {
            "centers" => Some(Overlay::Centers),
            "spine" => Some(Overlay::Spine),
            "critical-values" | "critical" => Some(Overlay::CriticalValues),
            "zero" => Some(Overlay::Zero),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneSpec {
    pub kind: PlaneKind,
    pub max_iter: u32,
    pub palette: Palette,
    pub overlays: Vec<Overlay>,
}

impl PlaneSpec {
    pub fn new(kind: PlaneKind, max_iter: u32) -> Self {
        PlaneSpec {
            kind,
            max_iter: max_iter.max(1),
            palette: Palette::default(),
            overlays: Vec::new(),
        }
    }

    pub fn with_overlays(mut self, overlays: &[Overlay]) -> Self {
        self.overlays = overlays.to_vec();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PixelVerdict {
    /// The parameter does not define a map (`a = 0`).
    Degenerate,
    Parameter { plus: Outcome, minus: Outcome },
    Dynamical(Outcome),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PixelSample {
    pub color: [u8; 3],
    pub verdict: PixelVerdict,
}

impl PixelSample {
    /// No orbit was certified to escape.
    pub fn is_bounded(&self) -> bool {
        match self.verdict {
            PixelVerdict::Degenerate => false,
            PixelVerdict::Parameter { plus, minus } => plus != Outcome::Escaped && minus != Outcome::Escaped,
            PixelVerdict::Dynamical(o) => o != Outcome::Escaped,
        }
    }
}

/// Per-pixel verdicts, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub px_w: usize,
    pub px_h: usize,
    pub samples: Vec<PixelSample>,
}

impl SampleGrid {
    pub fn get(&self, i: usize, j: usize) -> &PixelSample {
        &self.samples[j * self.px_w + i]
    }
}

enum Sampler<'a> {
    Slice(&'a SliceSpec),
    Plane(Orbiter),
}

impl Sampler<'_> {
    fn sample(&self, z: Complex64, max_iter: u32, palette: &Palette) -> PixelSample {
        match self {
            Sampler::Slice(slice) => match slice.params_at(z) {
                Ok(p) => {
                    let (plus, minus) = critical_orbits(&p, max_iter);
                    PixelSample {
                        color: palette.parameter_color(&plus, &minus, &p, max_iter),
                        verdict: PixelVerdict::Parameter {
                            plus: plus.outcome,
                            minus: minus.outcome,
                        },
                    }
                }
                Err(_) => PixelSample {
                    color: palette.marker,
                    verdict: PixelVerdict::Degenerate,
                },
            },
            Sampler::Plane(orbiter) => {
                let r = orbiter.run(z, max_iter);
                PixelSample {
                    color: palette.dynamical_color(&r, orbiter.params(), max_iter),
                    verdict: PixelVerdict::Dynamical(r.outcome),
                }
            }
        }
    }
}

/// Classifies the point of every pixel, on the current rayon pool.
pub fn classify_grid(spec: &PlaneSpec, vp: &Viewport) -> SampleGrid {
    let sampler = match &spec.kind {
        PlaneKind::ParameterSlice(slice) => Sampler::Slice(slice),
        PlaneKind::DynamicalPlane(p) => Sampler::Plane(Orbiter::new(*p)),
    };
    let mut samples = vec![
        PixelSample {
            color: [0; 3],
            verdict: PixelVerdict::Degenerate,
        };
        vp.px_w * vp.px_h
    ];
    samples
        .par_chunks_mut(BAND_ROWS * vp.px_w)
        .enumerate()
        .for_each(|(band, rows)| {
            for (idx, cell) in rows.iter_mut().enumerate() {
                let j = band * BAND_ROWS + idx / vp.px_w;
                let i = idx % vp.px_w;
                *cell = sampler.sample(vp.pixel_to_plane(i, j), spec.max_iter, &spec.palette);
            }
        });
    SampleGrid {
        px_w: vp.px_w,
        px_h: vp.px_h,
        samples,
    }
}

pub fn render_plane(spec: &PlaneSpec, vp: &Viewport) -> ImageBuffer {
    let grid = classify_grid(spec, vp);
    let mut img = ImageBuffer::new(vp.px_w, vp.px_h);
    for (cell, px) in grid.samples.iter().zip(img.pixels.chunks_exact_mut(3)) {
        px.copy_from_slice(&cell.color);
    }
    draw_overlays(spec, vp, &mut img);
    img
}

/// [`render_plane`] on a dedicated pool of `workers` threads.
pub fn render_plane_with_workers(spec: &PlaneSpec, vp: &Viewport, workers: usize) -> Result<ImageBuffer, RenderError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RenderError::Pool(e.to_string()))?;
    Ok(pool.install(|| render_plane(spec, vp)))
}

/// Plane positions and colors of the requested overlay markers.
pub fn overlay_points(spec: &PlaneSpec) -> Vec<(Complex64, [u8; 3])> {
    let pal = &spec.palette;
    let mut out = Vec::new();
    for overlay in &spec.overlays {
        match (overlay, &spec.kind) {
            (Overlay::Centers, PlaneKind::ParameterSlice(SliceSpec::FixedCrit { n })) => {
                for k in 1..2 * n {
                    if let Ok(a) = center_a_k(*n, k) {
                        out.push((a, pal.center_marker));
                    }
                }
            }
            (Overlay::Spine, PlaneKind::ParameterSlice(SliceSpec::FixedCrit { n })) => {
                if let Ok(line) = spine_polyline(SpineOrder::Finite(*n), SPINE_OVERLAY_SAMPLES) {
                    out.extend(line.into_iter().map(|s| (s.a, pal.marker)));
                }
            }
            (Overlay::CriticalValues, PlaneKind::DynamicalPlane(p)) => {
                out.push((p.v_plus(), pal.marker));
                out.push((p.v_minus(), pal.marker));
            }
            (Overlay::Zero, _) => out.push((Complex64::new(0.0, 0.0), pal.marker)),
            _ => {}
        }
    }
    out
}

fn draw_overlays(spec: &PlaneSpec, vp: &Viewport, img: &mut ImageBuffer) {
    for (z, rgb) in overlay_points(spec) {
        if let Some((i, j)) = vp.pixel_of(z) {
            img.mark(i, j, rgb);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ImageFormat {
    Png,
    Ppm,
}

impl ImageFormat {
    /// From a file extension; anything but `.ppm` is PNG.
    pub fn from_path(path: &std::path::Path) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ppm") => ImageFormat::Ppm,
            _ => ImageFormat::Png,
        }
    }
}

pub fn write_image<W: Write>(buf: &ImageBuffer, format: ImageFormat, mut out: W) -> Result<(), RenderError> {
    match format {
        ImageFormat::Ppm => {
            write!(out, "P6\n{} {}\n255\n", buf.px_w, buf.px_h)?;
            out.write_all(&buf.pixels)?;
        }
        ImageFormat::Png => {
            use image::ImageEncoder;
            let enc = image::codecs::png::PngEncoder::new(&mut out);
            enc.write_image(&buf.pixels, buf.px_w as u32, buf.px_h as u32, image::ExtendedColorType::Rgb8)?;
        }
    }
    Ok(())
}

pub fn encode_image(buf: &ImageBuffer, format: ImageFormat) -> Result<Vec<u8>, RenderError> {
    let mut out = Vec::new();
    write_image(buf, format, &mut out)?;
    Ok(out)
}

/// Reads a binary P6 image with maxval 255, as written by [`encode_image`].
/// Comments are not supported.
pub fn decode_ppm(bytes: &[u8]) -> Result<ImageBuffer, RenderError> {
    let mut pos = 0;
    let mut token = || -> Result<&[u8], RenderError> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(RenderError::Ppm("truncated header"));
        }
        Ok(&bytes[start..pos])
    };
    if token()? != b"P6" {
        return Err(RenderError::Ppm("not a P6 image"));
    }
    let mut number = |what: &'static str| -> Result<usize, RenderError> {
        std::str::from_utf8(token()?)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(RenderError::Ppm(what))
    };
    let w = number("bad width")?;
    let h = number("bad height")?;
    if number("bad maxval")? != 255 {
        return Err(RenderError::Ppm("maxval must be 255"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let raster = bytes.len().checked_sub(3 * w * h).ok_or(RenderError::Ppm("truncated raster"))?;
    ImageBuffer::from_raw(w, h, bytes[raster..].to_vec())
}

pub fn decode_png(bytes: &[u8]) -> Result<ImageBuffer, RenderError> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
    let (w, h) = img.dimensions();
    ImageBuffer::from_raw(w as usize, h as usize, img.into_raw())
}
