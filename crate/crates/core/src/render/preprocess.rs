use std::path::Path;

use image::RgbImage;

use crate::error::{Error, Result};
use crate::visual::{ChannelOrder, ModelManifest, Preprocessing, INPUT_SIZE};

/// 224×224×3 network input in row-major HWC order, channels already in
/// the model's order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub data: Vec<f32>,
    pub preprocessing_id: String,
}

impl ImageTensor {
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * INPUT_SIZE + x) * 3 + c]
    }
}

/// Bilinear resize to `out_w`×`out_h` with half-pixel centers and edge
/// clamping, ignoring aspect ratio. Returns RGB values as f64, row-major.
pub fn bilinear_resize(img: &RgbImage, out_w: usize, out_h: usize) -> Vec<[f64; 3]> {
    let (in_w, in_h) = (img.width() as usize, img.height() as usize);
    let axis = |out: usize, input: usize| -> Vec<(usize, usize, f64)> {
        let ratio = input as f64 / out as f64;
        (0..out)
            .map(|o| {
                let src = ((o as f64 + 0.5) * ratio - 0.5).clamp(0.0, (input - 1) as f64);
                let lo = src.floor() as usize;
                let hi = (lo + 1).min(input - 1);
                (lo, hi, src - lo as f64)
            })
            .collect()
    };
    let xs = axis(out_w, in_w);
    let ys = axis(out_h, in_h);
    let px = |x: usize, y: usize| img.get_pixel(x as u32, y as u32).0;

    let mut out = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let (a, b, c, d) = (px(x0, y0), px(x1, y0), px(x0, y1), px(x1, y1));
            let mut v = [0.0; 3];
            for k in 0..3 {
                let top = f64::from(a[k]) * (1.0 - fx) + f64::from(b[k]) * fx;
                let bottom = f64::from(c[k]) * (1.0 - fx) + f64::from(d[k]) * fx;
                v[k] = top * (1.0 - fy) + bottom * fy;
            }
            out.push(v);
        }
    }
    out
}

/// Squash-resizes to 224×224 and applies the channel order, means and scale.
pub fn preprocess_image(img: &RgbImage, pre: &Preprocessing) -> Result<ImageTensor> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::Image("image has zero area".into()));
    }
    let resized = bilinear_resize(img, INPUT_SIZE, INPUT_SIZE);
    let order: [usize; 3] = match pre.channel_order {
        ChannelOrder::Rgb => [0, 1, 2],
        ChannelOrder::Bgr => [2, 1, 0],
    };
    let mut data = Vec::with_capacity(INPUT_SIZE * INPUT_SIZE * 3);
    for rgb in resized {
        for (c, &src) in order.iter().enumerate() {
            data.push(((rgb[src] - pre.means[c]) * pre.scale) as f32);
        }
    }
    Ok(ImageTensor {
        data,
        preprocessing_id: pre.id(),
    })
}

/// Decodes an image file and preprocesses it for `manifest`'s model.
pub fn preprocess(path: &Path, manifest: &ModelManifest) -> Result<ImageTensor> {
    let img = image::open(path)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?
        .to_rgb8();
    preprocess_image(&img, &manifest.preprocessing)
}
