//! Heatmaps and side-by-side panels of masks and uncertainty maps.
//!
//! Uncertainty is drawn on a 256-level blue -> white -> red ramp: 0 is pure
//! blue, the scale maximum and above pure red.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{BinaryMask, UncertaintyMap};

/// Packed 8-bit RGB, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&fill);
        }
        RgbImage { width, height, data }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    fn blit(&mut self, src: &RgbImage, x0: usize, y0: usize) {
        for y in 0..src.height {
            let dst = ((y0 + y) * self.width + x0) * 3;
            let s = y * src.width * 3;
            self.data[dst..dst + src.width * 3].copy_from_slice(&src.data[s..s + src.width * 3]);
        }
    }
}

pub const BLUE: [u8; 3] = [0, 0, 255];
pub const RED: [u8; 3] = [255, 0, 0];
const SEPARATOR: [u8; 3] = [128, 128, 128];
const WHITE: [u8; 3] = [255, 255, 255];
const BLACK: [u8; 3] = [0, 0, 0];

/// Colour of ramp level `0..=255`.
pub fn colormap(level: u8) -> [u8; 3] {
    let l = u32::from(level);
    // Lower half fades blue into white, upper half white into red.
    let up = |n: u32| ((n * 255 + 63) / 127) as u8;
    if l <= 127 {
        let c = up(l);
        [c, c, 255]
    } else {
        let c = up(255 - l);
        [255, c, c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Scale {
    /// Map the image's own maximum to red.
    #[default]
    PerImageMax,
    /// Map a fixed value to red, for comparisons across images.
    Fixed(f64),
}

impl FromStr for Scale {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Scale::PerImageMax);
        }
        let v: f64 = s
            .strip_prefix("fixed:")
            .and_then(|v| v.parse().ok())
            .ok_or("expected `auto` or `fixed:<max>`")?;
        if v > 0.0 && v.is_finite() {
            Ok(Scale::Fixed(v))
        } else {
            Err("fixed scale maximum must be positive")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    Gt,
    Pred,
    UncOverall,
    UncLesion,
    UncNonLesion,
}

impl Panel {
    pub const ALL: [Panel; 5] =
        [Panel::Gt, Panel::Pred, Panel::UncOverall, Panel::UncLesion, Panel::UncNonLesion];

    pub fn as_str(self) -> &'static str {
        match self {
            Panel::Gt => "gt",
            Panel::Pred => "pred",
            Panel::UncOverall => "unc_overall",
            Panel::UncLesion => "unc_lesion",
            Panel::UncNonLesion => "unc_nonlesion",
        }
    }

    fn is_uncertainty(self) -> bool {
        matches!(self, Panel::UncOverall | Panel::UncLesion | Panel::UncNonLesion)
    }
}

impl fmt::Display for Panel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Panel {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        Panel::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or("expected gt, pred, unc_overall, unc_lesion or unc_nonlesion")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub scale: Scale,
    pub panels: Vec<Panel>,
    pub upscale: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { scale: Scale::PerImageMax, panels: Panel::ALL.to_vec(), upscale: 1 }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels.is_empty() {
            return Err(Error::InvalidConfig("panel order must not be empty"));
        }
        if self.upscale == 0 {
            return Err(Error::InvalidConfig("upscale must be at least 1"));
        }
        if let Scale::Fixed(m) = self.scale {
            if !(m > 0.0) {
                return Err(Error::InvalidConfig("fixed scale maximum must be positive"));
            }
        }
        Ok(())
    }
}

/// A rendered heatmap plus the value mapped to pure red.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub image: RgbImage,
    pub scale_max: f64,
    /// Per-image scaling of an all-zero map; rendered all blue.
    pub degenerate_scale: bool,
}

fn level(value: f64, max: f64) -> u8 {
    if max <= 0.0 {
        return 0;
    }
    libm::round((value / max).clamp(0.0, 1.0) * 255.0) as u8
}

fn heatmap_with_max(map: &UncertaintyMap, max: f64, upscale: usize) -> RgbImage {
    let (w, h) = (map.width(), map.height());
    let mut img = RgbImage::new(w * upscale, h * upscale, BLUE);
    for y in 0..h * upscale {
        for x in 0..w * upscale {
            let v = map.values()[(y / upscale) * w + x / upscale];
            img.put(x, y, colormap(level(v, max)));
        }
    }
    img
}

fn resolve_max(scale: Scale, observed_max: f64) -> (f64, bool) {
    match scale {
        Scale::Fixed(m) => (m, false),
        Scale::PerImageMax if observed_max > 0.0 => (observed_max, false),
        Scale::PerImageMax => (0.0, true),
    }
}

pub fn render_heatmap(map: &UncertaintyMap, cfg: &RenderConfig) -> Result<Heatmap> {
    cfg.validate()?;
    let (scale_max, degenerate_scale) = resolve_max(cfg.scale, map.max());
    Ok(Heatmap { image: heatmap_with_max(map, scale_max, cfg.upscale), scale_max, degenerate_scale })
}

/// Black background, white lesion.
pub fn render_mask(mask: &BinaryMask, upscale: usize) -> RgbImage {
    let (w, h) = (mask.width(), mask.height());
    let mut img = RgbImage::new(w * upscale, h * upscale, BLACK);
    for y in 0..h * upscale {
        for x in 0..w * upscale {
            if mask.get(x / upscale, y / upscale) {
                img.put(x, y, WHITE);
            }
        }
    }
    img
}

/// Everything a composite may show for one image.
#[derive(Debug, Clone, Copy, Default)]
pub struct PanelInputs<'a> {
    pub gt: Option<&'a BinaryMask>,
    pub pred: Option<&'a BinaryMask>,
    pub unc_overall: Option<&'a UncertaintyMap>,
    pub unc_lesion: Option<&'a UncertaintyMap>,
    pub unc_nonlesion: Option<&'a UncertaintyMap>,
}

impl<'a> PanelInputs<'a> {
    fn uncertainty(&self, p: Panel) -> Option<&'a UncertaintyMap> {
        match p {
            Panel::UncOverall => self.unc_overall,
            Panel::UncLesion => self.unc_lesion,
            Panel::UncNonLesion => self.unc_nonlesion,
            _ => None,
        }
    }

    fn mask(&self, p: Panel) -> Option<&'a BinaryMask> {
        match p {
            Panel::Gt => self.gt,
            Panel::Pred => self.pred,
            _ => None,
        }
    }
}

pub const PANEL_GAP: usize = 2;
const BAR_HEIGHT: usize = 8;
const GLYPH_W: usize = 3;
const GLYPH_H: usize = 5;
/// Height added below the panels when a colour bar is drawn.
pub const COLORBAR_STRIP: usize = PANEL_GAP + BAR_HEIGHT + PANEL_GAP + GLYPH_H;

#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub image: RgbImage,
    /// Width of the panel row; the colour bar strip sits underneath.
    pub panels_width: usize,
    pub panels_height: usize,
    /// Shared value mapped to red, when any uncertainty panel was drawn.
    pub scale_max: Option<f64>,
    pub degenerate_scale: bool,
}

/// Panels left to right with 2-pixel separators. When any uncertainty panel
/// is present, a colour bar with `0` and max labels is appended underneath;
/// all uncertainty panels share one scale (the overall map's maximum under
/// [`Scale::PerImageMax`]).
pub fn render_panel(inputs: &PanelInputs<'_>, cfg: &RenderConfig) -> Result<Composite> {
    cfg.validate()?;
    let mut tiles = Vec::with_capacity(cfg.panels.len());
    let observed_max = cfg
        .panels
        .iter()
        .filter_map(|&p| inputs.uncertainty(p))
        .chain(inputs.unc_overall)
        .map(UncertaintyMap::max)
        .fold(0.0, f64::max);
    let (max, degenerate) = resolve_max(cfg.scale, observed_max);
    let mut any_uncertainty = false;
    for &p in &cfg.panels {
        let tile = if p.is_uncertainty() {
            any_uncertainty = true;
            heatmap_with_max(inputs.uncertainty(p).ok_or(Error::MissingPanel(p))?, max, cfg.upscale)
        } else {
            render_mask(inputs.mask(p).ok_or(Error::MissingPanel(p))?, cfg.upscale)
        };
        tiles.push(tile);
    }
    let tile_h = tiles[0].height;
    if tiles.iter().any(|t| t.height != tile_h || t.width != tiles[0].width) {
        let (a, b) = (&tiles[0], tiles.iter().find(|t| t.height != tile_h || t.width != tiles[0].width).unwrap());
        return Err(Error::GridMismatch {
            expected: crate::model::Shape { width: a.width, height: a.height },
            found: crate::model::Shape { width: b.width, height: b.height },
        });
    }
    let panels_width = tiles.iter().map(|t| t.width).sum::<usize>() + PANEL_GAP * (tiles.len() - 1);
    let height = tile_h + if any_uncertainty { COLORBAR_STRIP } else { 0 };
    let mut image = RgbImage::new(panels_width, height, SEPARATOR);
    let mut x = 0;
    for t in &tiles {
        image.blit(t, x, 0);
        x += t.width + PANEL_GAP;
    }
    if any_uncertainty {
        draw_colorbar(&mut image, tile_h + PANEL_GAP, max);
    }
    Ok(Composite {
        image,
        panels_width,
        panels_height: tile_h,
        scale_max: any_uncertainty.then_some(max),
        degenerate_scale: any_uncertainty && degenerate,
    })
}

fn draw_colorbar(img: &mut RgbImage, top: usize, max: f64) {
    let w = img.width;
    for y in top..top + BAR_HEIGHT {
        for x in 0..w {
            let lvl = if w > 1 { (x * 255 + (w - 1) / 2) / (w - 1) } else { 0 };
            img.put(x, y, colormap(lvl as u8));
        }
    }
    let text_top = top + BAR_HEIGHT + PANEL_GAP;
    draw_text(img, 0, text_top, "0");
    let label = format_tick(max);
    let label_w = label.len() * (GLYPH_W + 1) - 1;
    if label_w <= w {
        draw_text(img, w - label_w, text_top, &label);
    }
}

fn format_tick(v: f64) -> String {
    format!("{v:.3}")
}

/// 3x5 bitmaps for the tick label alphabet, one row per `u8`, MSB-left.
fn glyph(c: char) -> [u8; GLYPH_H] {
    match c {
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b111, 0b001, 0b111, 0b100, 0b111],
        '3' => [0b111, 0b001, 0b111, 0b001, 0b111],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b111, 0b001, 0b111],
        '6' => [0b111, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b111],
        '.' => [0b000, 0b000, 0b000, 0b000, 0b010],
        _ => [0; GLYPH_H],
    }
}

fn draw_text(img: &mut RgbImage, x0: usize, y0: usize, text: &str) {
    for (i, c) in text.chars().enumerate() {
        let rows = glyph(c);
        for (dy, bits) in rows.iter().enumerate() {
            for dx in 0..GLYPH_W {
                if bits & (0b100 >> dx) != 0 {
                    let (x, y) = (x0 + i * (GLYPH_W + 1) + dx, y0 + dy);
                    if x < img.width && y < img.height {
                        img.put(x, y, BLACK);
                    }
                }
            }
        }
    }
}

/// File stem for a single panel of image `id`.
pub fn panel_file_stem(id: &str, panel: Panel) -> String {
    format!("{id}_{panel}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Shape;
    use alloc::vec;

    #[test]
    fn ramp_endpoints_and_midpoint() {
        assert_eq!(colormap(0), BLUE);
        assert_eq!(colormap(255), RED);
        assert_eq!(colormap(127), WHITE);
        assert_eq!(colormap(128), WHITE);
    }

    #[test]
    fn ramp_is_monotone() {
        for l in 0..255u8 {
            let (a, b) = (colormap(l), colormap(l + 1));
            assert!(a[0] <= b[0] && a[2] >= b[2], "level {l}");
        }
    }

    #[test]
    fn all_zero_map_is_blue() {
        let map = UncertaintyMap::new(3, 2, vec![0.0; 6]).unwrap();
        let h = render_heatmap(&map, &RenderConfig::default()).unwrap();
        assert!(h.degenerate_scale);
        assert!(h.image.data.chunks(3).all(|p| p == BLUE));
    }

    #[test]
    fn two_pixel_endpoints() {
        let map = UncertaintyMap::new(2, 1, vec![0.0, 0.3]).unwrap();
        let h = render_heatmap(&map, &RenderConfig::default()).unwrap();
        assert_eq!((h.image.pixel(0, 0), h.image.pixel(1, 0)), (BLUE, RED));
        let fixed = RenderConfig { scale: Scale::Fixed(0.2), ..Default::default() };
        assert_eq!(render_heatmap(&map, &fixed).unwrap().image.pixel(1, 0), RED);
        assert_eq!(render_heatmap(&map, &fixed).unwrap(), render_heatmap(&map, &fixed).unwrap());
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("auto".parse::<Scale>(), Ok(Scale::PerImageMax));
        assert_eq!("fixed:0.25".parse::<Scale>(), Ok(Scale::Fixed(0.25)));
        assert!("fixed:0".parse::<Scale>().is_err());
        assert!("bogus".parse::<Scale>().is_err());
    }

    fn inputs_64() -> (BinaryMask, UncertaintyMap) {
        let shape = Shape::new(64, 64).unwrap();
        let gt = BinaryMask::from_fn(shape, |x, y| x > 20 && x < 40 && y > 20 && y < 40);
        let map = UncertaintyMap::new(64, 64, (0..4096).map(|i| (i % 64) as f64 / 640.0).collect()).unwrap();
        (gt, map)
    }

    #[test]
    fn panel_layout() {
        let (gt, map) = inputs_64();
        let lesion = crate::roi::masked_uncertainty(&map, &gt).unwrap();
        let nonlesion = crate::roi::masked_uncertainty(&map, &gt.complement()).unwrap();
        let inputs = PanelInputs {
            gt: Some(&gt),
            pred: Some(&gt),
            unc_overall: Some(&map),
            unc_lesion: Some(&lesion),
            unc_nonlesion: Some(&nonlesion),
        };
        let two = RenderConfig { panels: vec![Panel::Gt, Panel::Pred], ..Default::default() };
        let c = render_panel(&inputs, &two).unwrap();
        assert_eq!((c.image.width, c.image.height), (130, 64));
        assert_eq!(c.scale_max, None);
        assert_eq!(c.image.pixel(64, 10), SEPARATOR);

        let c = render_panel(&inputs, &RenderConfig::default()).unwrap();
        assert_eq!(c.panels_width, 328);
        assert_eq!((c.image.width, c.image.height), (328, 64 + COLORBAR_STRIP));
        assert_eq!(c, render_panel(&inputs, &RenderConfig::default()).unwrap());

        let up = RenderConfig { upscale: 2, ..two };
        assert_eq!(render_panel(&inputs, &up).unwrap().image.width, 258);
    }

    #[test]
    fn missing_panel() {
        let (gt, _) = inputs_64();
        let inputs = PanelInputs { gt: Some(&gt), ..Default::default() };
        assert_eq!(
            render_panel(&inputs, &RenderConfig::default()),
            Err(Error::MissingPanel(Panel::Pred))
        );
    }
}
