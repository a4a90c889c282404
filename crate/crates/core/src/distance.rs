//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher) and the
//! signed distance field of a binary mask.

use alloc::vec::Vec;

use crate::model::BinaryMask;

const FAR: f64 = 1e20;

/// Squared distance transform of one row/column, in place.
fn edt_1d(f: &mut [f64], v: &mut [usize], z: &mut [f64], out: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        *o = d * d + f[v[k]];
    }
    f.copy_from_slice(out);
}

/// Squared Euclidean distance from each pixel centre to the nearest pixel
/// where `features` is true. Pixels are ~`1e20` away when there are no features.
pub fn squared_distance_transform(features: &[bool], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(features.len(), width * height);
    let mut grid: Vec<f64> = features.iter().map(|&f| if f { 0.0 } else { FAR }).collect();
    let n = width.max(height);
    let (mut f, mut out) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let (mut v, mut z) = (alloc::vec![0usize; n], alloc::vec![0.0; n + 1]);
    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        edt_1d(&mut f[..height], &mut v, &mut z, &mut out[..height]);
        for y in 0..height {
            grid[y * width + x] = f[y];
        }
    }
    for row in grid.chunks_exact_mut(width) {
        edt_1d(row, &mut v, &mut z, &mut out[..width]);
    }
    grid
}

/// Signed distance, positive inside the mask: inside pixels get
/// `dist_to_outside - 0.5`, outside pixels `-(dist_to_inside - 0.5)`, so the
/// pixels either side of the boundary sit at `±0.5`.
pub fn signed_distance(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = (mask.width(), mask.height());
    let to_inside = squared_distance_transform(mask.bits(), w, h);
    let to_outside = squared_distance_transform(mask.complement().bits(), w, h);
    mask.bits()
        .iter()
        .zip(to_inside.iter().zip(&to_outside))
        .map(|(&inside, (&di, &do_))| {
            if inside {
                libm::sqrt(do_) - 0.5
            } else {
                0.5 - libm::sqrt(di)
            }
        })
        .collect()
}
