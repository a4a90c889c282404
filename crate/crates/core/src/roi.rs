//! Region decomposition of an uncertainty map: lesion (from the ground
//! truth), non-lesion (its complement) and the whole image.

use core::fmt;
use core::str::FromStr;

use crate::error::Result;
use crate::model::{BinaryMask, UncertaintyMap};

/// Denominator used when averaging a masked map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by the number of pixels in the region.
    #[default]
    RegionMean,
    /// Divide by the number of pixels in the whole image.
    FullImageMean,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::RegionMean => "region",
            Normalization::FullImageMean => "full",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "region" => Ok(Normalization::RegionMean),
            "full" => Ok(Normalization::FullImageMean),
            _ => Err("expected `region` or `full`"),
        }
    }
}

/// Hadamard product of the map with a region mask.
pub fn masked_uncertainty(map: &UncertaintyMap, region: &BinaryMask) -> Result<UncertaintyMap> {
    map.shape().ensure_same(region.shape())?;
    let values = map
        .values()
        .iter()
        .zip(region.bits())
        .map(|(&u, &inside)| if inside { u } else { 0.0 })
        .collect();
    Ok(UncertaintyMap::from_parts(map.shape(), values))
}

/// Sum of the map over the region, in pixel order.
pub fn region_sum(map: &UncertaintyMap, region: &BinaryMask) -> Result<f64> {
    map.shape().ensure_same(region.shape())?;
    Ok(map.values().iter().zip(region.bits()).filter(|(_, &inside)| inside).map(|(u, _)| u).sum())
}

/// Mean of the masked map. `None` for an empty region under
/// [`Normalization::RegionMean`].
pub fn region_mean(
    map: &UncertaintyMap,
    region: &BinaryMask,
    normalization: Normalization,
) -> Result<Option<f64>> {
    let sum = region_sum(map, region)?;
    let denom = match normalization {
        Normalization::RegionMean => region.count_ones(),
        Normalization::FullImageMean => map.shape().len(),
    };
    Ok((denom > 0).then(|| sum / denom as f64))
}

/// Region uncertainties of one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionUncertainty {
    /// Mean over every pixel of the unmasked map.
    pub x0_overall: f64,
    pub x1_lesion: Option<f64>,
    pub x2_nonlesion: Option<f64>,
    pub lesion_pixels: usize,
    pub normalization: Normalization,
}

pub fn decompose(
    map: &UncertaintyMap,
    gt_lesion: &BinaryMask,
    normalization: Normalization,
) -> Result<RegionUncertainty> {
    map.shape().ensure_same(gt_lesion.shape())?;
    let nonlesion = gt_lesion.complement();
    let total: f64 = map.values().iter().sum();
    Ok(RegionUncertainty {
        x0_overall: total / map.shape().len() as f64,
        x1_lesion: region_mean(map, gt_lesion, normalization)?,
        x2_nonlesion: region_mean(map, &nonlesion, normalization)?,
        lesion_pixels: gt_lesion.count_ones(),
        normalization,
    })
}
