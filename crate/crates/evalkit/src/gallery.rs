//! Flow gallery rendering: synthesized (H, V) pairs above real ones as a
//! grayscale grid, three pairs (six 64x64 tiles) per row, pixels
//! normalized per image. A constant image renders mid-gray.

use flowdata::{GRID, GRID_LEN};
use image::GrayImage;

use crate::error::{Error, Result};

pub const PAIRS_PER_ROW: usize = 3;

fn normalize_to_u8(grid: &[f64]) -> Vec<u8> {
    let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min < 1e-12 {
        return vec![128u8; grid.len()];
    }
    grid.iter()
        .map(|v| (((v - min) / (max - min)) * 255.0).round() as u8)
        .collect()
}

/// Builds the gallery image. Both groups are (h, v) grid pairs; the
/// output is ((synthetic rows + real rows) * 64) x (cols * 64) pixels.
pub fn flow_gallery(
    synthetic: &[(Vec<f64>, Vec<f64>)],
    real: &[(Vec<f64>, Vec<f64>)],
) -> Result<GrayImage> {
    if synthetic.is_empty() || real.is_empty() {
        return Err(Error::Evaluation("gallery needs both synthetic and real pairs".into()));
    }
    for (h, v) in synthetic.iter().chain(real) {
        if h.len() != GRID_LEN || v.len() != GRID_LEN {
            return Err(Error::Evaluation("gallery grids must be 64x64".into()));
        }
    }
    let pairs_per_row = PAIRS_PER_ROW.min(synthetic.len()).min(real.len());
    let cols = pairs_per_row * 2;
    let rows_of = |n: usize| n.div_ceil(pairs_per_row);
    let rows = rows_of(synthetic.len()) + rows_of(real.len());
    let mut img = GrayImage::from_pixel(
        (cols * GRID) as u32,
        (rows * GRID) as u32,
        image::Luma([255u8]),
    );

    let mut blit = |tile_row: usize, tile_col: usize, grid: &[f64]| {
        let bytes = normalize_to_u8(grid);
        for y in 0..GRID {
            for x in 0..GRID {
                img.put_pixel(
                    (tile_col * GRID + x) as u32,
                    (tile_row * GRID + y) as u32,
                    image::Luma([bytes[y * GRID + x]]),
                );
            }
        }
    };

    for (i, (h, v)) in synthetic.iter().enumerate() {
        let row = i / pairs_per_row;
        let col = (i % pairs_per_row) * 2;
        blit(row, col, h);
        blit(row, col + 1, v);
    }
    let offset = rows_of(synthetic.len());
    for (i, (h, v)) in real.iter().enumerate() {
        let row = offset + i / pairs_per_row;
        let col = (i % pairs_per_row) * 2;
        blit(row, col, h);
        blit(row, col + 1, v);
    }
    Ok(img)
}
