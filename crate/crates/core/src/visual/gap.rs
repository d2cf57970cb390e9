use crate::error::{Error, Result};

/// Row-major H×W×C activation map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::InvalidArgument(format!(
                "feature map dimensions must be positive, got {height}×{width}×{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::Dimension {
                expected: height * width * channels,
                found: data.len(),
            });
        }
        Ok(FeatureMap {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn get(&self, h: usize, w: usize, c: usize) -> f64 {
        self.data[(h * self.width + w) * self.channels + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Per-channel mean over all spatial positions. Positions are summed in
/// row-major order.
pub fn global_average_pool(map: &FeatureMap) -> Vec<f64> {
    let mut sums = vec![0.0; map.channels];
    for pixel in map.data.chunks_exact(map.channels) {
        for (s, v) in sums.iter_mut().zip(pixel) {
            *s += v;
        }
    }
    let n = (map.height * map.width) as f64;
    sums.into_iter().map(|s| s / n).collect()
}
