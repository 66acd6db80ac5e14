//! Separable discrete Fourier transform on periodic grids.
//!
//! Radix-2 Cooley–Tukey for power-of-two lengths, direct summation otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::space::GridGeometry;

#[derive(Clone, Debug)]
pub(crate) struct Spectrum {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

fn fft_1d(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    if n <= 1 {
        return;
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    if n.is_power_of_two() {
        let mut j = 0;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let ang = sign * 2.0 * PI / len as f64;
            let half = len / 2;
            for start in (0..n).step_by(len) {
                for t in 0..half {
                    let (ws, wc) = (ang * t as f64).sin_cos();
                    let (a, b) = (start + t, start + t + half);
                    let xr = re[b] * wc - im[b] * ws;
                    let xi = re[b] * ws + im[b] * wc;
                    re[b] = re[a] - xr;
                    im[b] = im[a] - xi;
                    re[a] += xr;
                    im[a] += xi;
                }
            }
            len <<= 1;
        }
    } else {
        let (r0, i0) = (re.to_vec(), im.to_vec());
        for k in 0..n {
            let (mut sr, mut si) = (0.0, 0.0);
            for t in 0..n {
                let ang = sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                let (s, c) = ang.sin_cos();
                sr += r0[t] * c - i0[t] * s;
                si += r0[t] * s + i0[t] * c;
            }
            re[k] = sr;
            im[k] = si;
        }
    }
}

fn transform(geom: &GridGeometry, re: &mut [f64], im: &mut [f64], inverse: bool) {
    let r = geom.resolution;
    let n = geom.len();
    let mut br = vec![0.0; r];
    let mut bi = vec![0.0; r];
    let mut stride = 1;
    for _ in 0..geom.n_dim {
        for base in 0..n {
            if (base / stride) % r != 0 {
                continue;
            }
            for t in 0..r {
                br[t] = re[base + t * stride];
                bi[t] = im[base + t * stride];
            }
            fft_1d(&mut br, &mut bi, inverse);
            for t in 0..r {
                re[base + t * stride] = br[t];
                im[base + t * stride] = bi[t];
            }
        }
        stride *= r;
    }
    if inverse {
        let s = 1.0 / n as f64;
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v *= s;
        }
    }
}

pub(crate) fn forward(geom: &GridGeometry, values: &[f64]) -> Spectrum {
    let mut re = values.to_vec();
    let mut im = vec![0.0; values.len()];
    transform(geom, &mut re, &mut im, false);
    Spectrum { re, im }
}

/// Real part of the inverse transform of `spec * mult` (pointwise complex product).
pub(crate) fn inverse_product(geom: &GridGeometry, spec: &Spectrum, mult_re: &[f64], mult_im: Option<&[f64]>) -> Vec<f64> {
    let n = spec.re.len();
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (spec.re[i], spec.im[i]);
        let (c, d) = (mult_re[i], mult_im.map_or(0.0, |m| m[i]));
        re.push(a * c - b * d);
        im.push(a * d + b * c);
    }
    transform(geom, &mut re, &mut im, true);
    re
}

/// Physical frequency `|xi|` (cycles per unit length) of each DFT index.
pub(crate) fn frequency_magnitudes(geom: &GridGeometry) -> Vec<f64> {
    let r = geom.resolution as i64;
    (0..geom.len())
        .map(|i| {
            let idx = geom.multi_index(i);
            let mut s = 0.0;
            for &a in idx.iter().take(geom.n_dim) {
                let a = a as i64;
                let m = if a > r / 2 { a - r } else { a };
                s += (m * m) as f64;
            }
            s.sqrt() / geom.side_length
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = values.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for k in 0..n {
            for (t, v) in values.iter().enumerate() {
                let a = -2.0 * PI * (k * t) as f64 / n as f64;
                re[k] += v * a.cos();
                im[k] += v * a.sin();
            }
        }
        (re, im)
    }

    #[test]
    fn radix2_and_direct_agree_with_definition() {
        for n in [8usize, 12, 16] {
            let g = GridGeometry { n_dim: 1, resolution: n, side_length: 1.0 };
            let v: Vec<f64> = (0..n).map(|i| ((i * i) % 7) as f64 - 2.5).collect();
            let s = forward(&g, &v);
            let (re, im) = naive(&v);
            for k in 0..n {
                assert!((s.re[k] - re[k]).abs() < 1e-10 && (s.im[k] - im[k]).abs() < 1e-10);
            }
            let back = inverse_product(&g, &s, &vec![1.0; n], None);
            for k in 0..n {
                assert!((back[k] - v[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_dimensional_round_trip() {
        let g = GridGeometry { n_dim: 2, resolution: 8, side_length: 2.0 };
        let v: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = forward(&g, &v);
        let back = inverse_product(&g, &s, &vec![1.0; 64], None);
        for k in 0..64 {
            assert!((back[k] - v[k]).abs() < 1e-12);
        }
        let f = frequency_magnitudes(&g);
        assert!((f[1] - 0.5).abs() < 1e-15);
        assert!((f[9] - (0.5f64).hypot(0.5)).abs() < 1e-15);
    }
}
