//! Discrete Fourier transforms on [`HPComplex`] vectors. Power-of-two
//! lengths run through an iterative radix-2 decimation, everything else
//! through the direct quadratic sum.
//!
//! Convention: `dft` uses the kernel `e^(-2 pi i j k / M)`; `idft` is its
//! inverse including the `1/M` factor.

use super::complex::HPComplex;
use super::elementary::{pi, sin_cos};
use super::real::HPReal;

/// Powers `e^(-2 pi i t / m)` for `t in 0..count`, built by repeated
/// multiplication; the drift over `m` steps stays far below the guard bits.
fn twiddles(m: usize, count: usize, work: u32) -> Vec<HPComplex> {
    let theta = pi(work).scale2(1).div(&HPReal::from_u64(m as u64, work)).neg();
    let (s, c) = sin_cos(&theta);
    let base = HPComplex::new(c, s);
    let mut out = Vec::with_capacity(count);
    let mut cur = HPComplex::one(work);
    for _ in 0..count {
        out.push(cur.clone());
        cur = cur.mul(&base);
    }
    out
}

fn bit_reverse_permute(a: &mut [HPComplex]) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
}

fn fft_pow2(mut a: Vec<HPComplex>, tw: &[HPComplex]) -> Vec<HPComplex> {
    let n = a.len();
    bit_reverse_permute(&mut a);
    let mut len = 2;
    while len <= n {
        let step = n / len;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for t in 0..half {
                let w = &tw[t * step];
                let u = a[start + t].clone();
                let v = a[start + t + half].mul(w);
                a[start + t] = u.add(&v);
                a[start + t + half] = u.sub(&v);
            }
        }
        len <<= 1;
    }
    a
}

fn dft_direct(samples: &[HPComplex], work: u32) -> Vec<HPComplex> {
    let m = samples.len();
    let tw = twiddles(m, m, work);
    (0..m)
        .map(|k| {
            let mut acc = HPComplex::zero(work);
            for (j, x) in samples.iter().enumerate() {
                acc = acc.add(&x.mul(&tw[(j * k) % m]));
            }
            acc
        })
        .collect()
}

/// Forward transform `X_k = sum_j x_j e^(-2 pi i j k / M)`.
pub fn dft(samples: &[HPComplex]) -> Vec<HPComplex> {
    if samples.is_empty() {
        return Vec::new();
    }
    let prec = samples.iter().map(|z| z.precision()).max().unwrap();
    let work = prec + 48;
    let m = samples.len();
    let out = if m.is_power_of_two() && m >= 4 {
        let tw = twiddles(m, m / 2, work);
        let a = samples.iter().map(|z| z.with_precision(work)).collect();
        fft_pow2(a, &tw)
    } else {
        let a: Vec<_> = samples.iter().map(|z| z.with_precision(work)).collect();
        dft_direct(&a, work)
    };
    out.into_iter().map(|z| z.with_precision(prec)).collect()
}

/// Inverse transform `x_j = (1/M) sum_k X_k e^(+2 pi i j k / M)`.
pub fn idft(spectrum: &[HPComplex]) -> Vec<HPComplex> {
    if spectrum.is_empty() {
        return Vec::new();
    }
    let prec = spectrum.iter().map(|z| z.precision()).max().unwrap();
    let m = HPReal::from_u64(spectrum.len() as u64, prec + 48);
    let conj: Vec<_> = spectrum.iter().map(|z| z.conj()).collect();
    dft(&conj)
        .into_iter()
        .map(|z| z.conj().div_real(&m).with_precision(prec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::elementary::pi;

    fn tol_check(a: &HPComplex, b: &HPComplex, bits: i64, prec: u32) {
        let d = a.sub(b);
        let tol = HPReal::exp2(-bits, prec);
        assert!(d.re.abs() < tol && d.im.abs() < tol, "{a:?} vs {b:?}");
    }

    fn tone(m: usize, k0: usize, prec: u32) -> Vec<HPComplex> {
        // x_j = e^(2 pi i j k0 / m)
        let two_pi = pi(prec + 16).scale2(1);
        (0..m)
            .map(|j| {
                let theta = two_pi
                    .mul(&HPReal::from_u64((j * k0) as u64, prec + 16))
                    .div(&HPReal::from_u64(m as u64, prec + 16));
                let (s, c) = sin_cos(&theta);
                HPComplex::new(c.with_precision(prec), s.with_precision(prec))
            })
            .collect()
    }

    #[test]
    fn pure_tone_lands_in_one_bin() {
        for (m, k0) in [(8usize, 3usize), (12, 5), (16, 0)] {
            let prec = 128;
            let x = tone(m, k0, prec);
            let spec = dft(&x);
            for (k, v) in spec.iter().enumerate() {
                let want = if k == k0 {
                    HPComplex::from_f64(m as f64, 0.0, prec)
                } else {
                    HPComplex::zero(prec)
                };
                tol_check(v, &want, 100, prec);
            }
        }
    }

    #[test]
    fn round_trip() {
        let prec = 128;
        let x: Vec<_> = (0..10)
            .map(|j| HPComplex::from_f64(j as f64 * 0.37 - 1.0, (j * j) as f64 * 0.11, prec))
            .collect();
        let back = idft(&dft(&x));
        for (a, b) in back.iter().zip(&x) {
            tol_check(a, b, 110, prec);
        }
        let x16: Vec<_> = (0..16)
            .map(|j| HPComplex::from_f64((j as f64).sin(), (j as f64).cos(), prec))
            .collect();
        let back16 = idft(&dft(&x16));
        for (a, b) in back16.iter().zip(&x16) {
            tol_check(a, b, 110, prec);
        }
    }

    #[test]
    fn direct_matches_fft() {
        let prec = 128;
        let x: Vec<_> = (0..8)
            .map(|j| HPComplex::from_f64(1.0 / (j as f64 + 1.0), j as f64, prec))
            .collect();
        let via_fft = dft(&x);
        let direct = dft_direct(
            &x.iter().map(|z| z.with_precision(prec + 48)).collect::<Vec<_>>(),
            prec + 48,
        );
        for (a, b) in via_fft.iter().zip(&direct) {
            tol_check(a, &b.with_precision(prec), 110, prec);
        }
    }

    #[test]
    fn parseval() {
        let prec = 128;
        let x: Vec<_> = (0..16)
            .map(|j| HPComplex::from_f64((j as f64 * 1.7).cos(), (j as f64 * 0.9).sin(), prec))
            .collect();
        let spec = dft(&x);
        let lhs = x.iter().fold(HPReal::zero(prec), |acc, z| acc.add(&z.norm2()));
        let rhs = spec
            .iter()
            .fold(HPReal::zero(prec), |acc, z| acc.add(&z.norm2()))
            .div(&HPReal::from_u64(16, prec));
        assert!(lhs.sub(&rhs).abs() < HPReal::exp2(-100, prec));
    }

    #[test]
    fn linearity() {
        let prec = 128;
        let x: Vec<_> = (0..6).map(|j| HPComplex::from_f64(j as f64, -1.0, prec)).collect();
        let y: Vec<_> = (0..6).map(|j| HPComplex::from_f64(0.5, j as f64 * 2.0, prec)).collect();
        let sum: Vec<_> = x.iter().zip(&y).map(|(a, b)| a.add(b)).collect();
        let lhs = dft(&sum);
        let fx = dft(&x);
        let fy = dft(&y);
        for (k, v) in lhs.iter().enumerate() {
            tol_check(v, &fx[k].add(&fy[k]), 110, prec);
        }
    }

    #[test]
    fn tiny_lengths() {
        let prec = 64;
        let one = vec![HPComplex::from_f64(3.0, 1.0, prec)];
        assert_eq!(dft(&one)[0], one[0]);
        let two = vec![
            HPComplex::from_f64(1.0, 0.0, prec),
            HPComplex::from_f64(0.0, 1.0, prec),
        ];
        let spec = dft(&two);
        tol_check(&spec[0], &HPComplex::from_f64(1.0, 1.0, prec), 56, prec);
        tol_check(&spec[1], &HPComplex::from_f64(1.0, -1.0, prec), 56, prec);
    }
}
