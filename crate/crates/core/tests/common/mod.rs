//! Test-side oracles, independent of the library's eigen and spin-flip code.

#![allow(dead_code)]

use dimer::{DensityMatrix, PureState};
use dimer::Mat4;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type M = [[C64; 4]; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mul(a: &M, b: &M) -> M {
    let mut c = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn tr(a: &M) -> C64 {
    (0..4).map(|i| a[i][i]).sum()
}

/// `σ_y ⊗ σ_y` built from the Pauli matrix by Kronecker product.
fn sigma_yy() -> M {
    let sy = [[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]];
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = sy[i / 2][j / 2] * sy[i % 2][j % 2];
        }
    }
    out
}

/// Characteristic polynomial coefficients `[c0, c1, c2, c3, 1]` of `a` by
/// Faddeev–LeVerrier.
fn char_poly(a: &M) -> [C64; 5] {
    let mut c = [C64::new(0.0, 0.0); 5];
    c[4] = C64::new(1.0, 0.0);
    let mut mk = [[C64::new(0.0, 0.0); 4]; 4];
    for k in 1..=4 {
        let mut next = mul(a, &mk);
        for i in 0..4 {
            next[i][i] += c[4 - k + 1];
        }
        mk = next;
        c[4 - k] = -tr(&mul(a, &mk)) / k as f64;
    }
    c
}

fn cbrt(z: C64) -> C64 {
    if z.norm() == 0.0 {
        z
    } else {
        z.powf(1.0 / 3.0)
    }
}

/// Roots of `m³ + a m² + b m + c` by Cardano.
fn cubic_roots(a: C64, b: C64, c: C64) -> [C64; 3] {
    let p = b - a * a / 3.0;
    let q = a * a * a * 2.0 / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u1 = cbrt(-q / 2.0 + disc);
    let u2 = cbrt(-q / 2.0 - disc);
    let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let w = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = [C64::new(0.0, 0.0); 3];
    let mut uk = u;
    for slot in &mut out {
        let z = if uk.norm() == 0.0 { C64::new(0.0, 0.0) } else { uk - p / (uk * 3.0) };
        *slot = z - a / 3.0;
        uk *= w;
    }
    out
}

/// Roots of the monic quartic `λ⁴ + a λ³ + b λ² + c λ + d` by Ferrari.
fn quartic_roots(a: C64, b: C64, c: C64, d: C64) -> [C64; 4] {
    let p = b - a * a * 3.0 / 8.0;
    let q = c - a * b / 2.0 + a * a * a / 8.0;
    let r = d - a * c / 4.0 + a * a * b / 16.0 - a * a * a * a * 3.0 / 256.0;
    let shift = -a / 4.0;
    let scale = 1.0 + p.norm() + r.norm().sqrt();
    if q.norm() <= 1e-14 * scale * scale.sqrt() {
        let disc = (p * p - r * 4.0).sqrt();
        let y1 = ((-p + disc) / 2.0).sqrt();
        let y2 = ((-p - disc) / 2.0).sqrt();
        return [y1 + shift, -y1 + shift, y2 + shift, -y2 + shift];
    }
    let ms = cubic_roots(p, p * p / 4.0 - r, -q * q / 8.0);
    let m = ms.into_iter().max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap()).unwrap();
    let s = (m * 2.0).sqrt();
    let base = -(p * 2.0 + m * 2.0);
    let plus = (base - q * 2.0 / s).sqrt();
    let minus = (base + q * 2.0 / s).sqrt();
    [
        (s + plus) / 2.0 + shift,
        (s - plus) / 2.0 + shift,
        (-s + minus) / 2.0 + shift,
        (-s - minus) / 2.0 + shift,
    ]
}

fn horner(c: &[C64; 5], x: C64) -> (C64, C64) {
    let mut p = c[4];
    let mut dp = C64::new(0.0, 0.0);
    for k in (0..4).rev() {
        dp = dp * x + p;
        p = p * x + c[k];
    }
    (p, dp)
}

/// Eigenvalues of `a` as roots of its characteristic polynomial, each
/// Newton-polished.
pub fn oracle_eigenvalues(a: &M) -> [C64; 4] {
    let c = char_poly(a);
    let mut roots = quartic_roots(c[3], c[2], c[1], c[0]);
    for z in &mut roots {
        for _ in 0..200 {
            let (p, dp) = horner(&c, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *z - p / dp;
            if horner(&c, next).0.norm() >= p.norm() {
                break;
            }
            *z = next;
        }
    }
    roots
}

pub fn to_m(m: &Mat4) -> M {
    m.0
}

/// Concurrence from the quartic oracle.
pub fn oracle_concurrence(rho: &DensityMatrix) -> f64 {
    let r = to_m(rho.matrix());
    let mut conj = r;
    for row in &mut conj {
        for z in row {
            *z = z.conj();
        }
    }
    let s = sigma_yy();
    let flipped = mul(&mul(&s, &conj), &s);
    let mut l: Vec<f64> = oracle_eigenvalues(&mul(&r, &flipped)).iter().map(|z| z.re.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `G G† / tr(G G†)` for a random complex `G`.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = Mat4::from_fn(|_, _| random_complex(rng));
    let m = g * g.adjoint();
    let t = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / t).hermitian_from_upper()).unwrap()
}

/// Random density matrix of rank `rank` (1..=4).
pub fn random_density_of_rank(rng: &mut ChaCha8Rng, rank: usize) -> DensityMatrix {
    let g = Mat4::from_fn(|_, j| if j < rank { random_complex(rng) } else { C64::new(0.0, 0.0) });
    let m = g * g.adjoint();
    let t = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / t).hermitian_from_upper()).unwrap()
}

pub fn random_pure(rng: &mut ChaCha8Rng) -> PureState {
    PureState::normalized(std::array::from_fn(|_| random_complex(rng))).unwrap()
}

/// Haar-ish random 2×2 unitary from a random normalized quaternion and phase.
pub fn random_unitary2(rng: &mut ChaCha8Rng) -> [[C64; 2]; 2] {
    let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (C64::new(v[0] / n, v[1] / n), C64::new(v[2] / n, v[3] / n));
    let phase = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    [[a * phase, -b.conj() * phase], [b * phase, a.conj() * phase]]
}

pub fn kron2(u: &[[C64; 2]; 2], v: &[[C64; 2]; 2]) -> Mat4 {
    Mat4::from_fn(|i, j| u[i / 2][j / 2] * v[i % 2][j % 2])
}

/// Times of upward crossings of `level`, linearly interpolated. A crossing
/// only counts after the series has fallen below `level - band`, so ripples
/// around the level are ignored.
pub fn upward_crossings(ts: &[f64], vs: &[f64], level: f64, band: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut armed = vs.first().map_or(false, |&v| v < level - band);
    for k in 1..vs.len() {
        if vs[k] < level - band {
            armed = true;
        }
        if armed && vs[k - 1] < level && vs[k] >= level {
            let f = (level - vs[k - 1]) / (vs[k] - vs[k - 1]);
            out.push(ts[k - 1] + f * (ts[k] - ts[k - 1]));
            armed = false;
        }
    }
    out
}

/// Times of local maxima that stand at least `prominence` above the lowest
/// value on either side before the series turns again. Ripples smaller than
/// `prominence` are skipped.
pub fn prominent_peaks(ts: &[f64], vs: &[f64], prominence: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut low = vs.first().copied().unwrap_or(0.0);
    let mut cand: Option<(usize, f64)> = None;
    for (k, &v) in vs.iter().enumerate() {
        match cand {
            None => {
                low = low.min(v);
                if v - low >= prominence {
                    cand = Some((k, v));
                }
            }
            Some((_, top)) if v > top => cand = Some((k, v)),
            Some((i, top)) if top - v >= prominence => {
                out.push(ts[i]);
                cand = None;
                low = v;
            }
            Some(_) => {}
        }
    }
    out
}
