use crate::raster::RgbImage;

/// Bilinear resample with half-pixel centers: output pixel `d` samples the
/// source at `(d + 0.5) * in / out - 0.5`, clamped to the edge. Equal sizes
/// copy the input untouched.
pub fn resize_bilinear(img: &RgbImage, out_w: u32, out_h: u32) -> RgbImage {
    let (in_w, in_h) = img.dimensions();
    if in_w == out_w && in_h == out_h {
        return img.clone();
    }
    let xs = taps(in_w, out_w);
    let ys = taps(in_h, out_h);
    let src = img.as_raw();
    let stride = in_w as usize * 3;
    let mut out = Vec::with_capacity(out_w as usize * out_h as usize * 3);
    for &(y0, y1, fy) in &ys {
        let row0 = &src[y0 * stride..(y0 + 1) * stride];
        let row1 = &src[y1 * stride..(y1 + 1) * stride];
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let a = row0[x0 * 3 + c] as f32;
                let b = row0[x1 * 3 + c] as f32;
                let p = row1[x0 * 3 + c] as f32;
                let q = row1[x1 * 3 + c] as f32;
                let top = a + (b - a) * fx;
                let bottom = p + (q - p) * fx;
                let v = top + (bottom - top) * fy;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RgbImage::from_raw(out_w, out_h, out).expect("buffer sized to output")
}

fn taps(input: u32, output: u32) -> Vec<(usize, usize, f32)> {
    let scale = input as f64 / output as f64;
    let last = input as usize - 1;
    (0..output)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, last as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(last);
            (i0, i1, (s - i0 as f64) as f32)
        })
        .collect()
}

pub fn resize_to_input(img: &RgbImage, side: u32) -> RgbImage {
    resize_bilinear(img, side, side)
}
