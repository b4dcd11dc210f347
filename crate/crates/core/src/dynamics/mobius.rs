//! Möbius transformations of the disk as 2×2 complex matrices, their
//! classification, and an exact normal-form frame for hyperbolic automorphisms.

use serde::{Deserialize, Serialize};

use crate::C64;

pub type Mat2 = [[C64; 2]; 2];

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn det(m: &Mat2) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Adjugate, the inverse up to scale.
pub fn adj(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

pub fn act(m: &Mat2, z: C64) -> C64 {
    (m[0][0] * z + m[0][1]) / (m[1][0] * z + m[1][1])
}

/// Scales `m` to determinant one.
pub fn normalize(m: &Mat2) -> Mat2 {
    let s = det(m).sqrt();
    m.map(|row| row.map(|v| v / s))
}

/// Cayley transform `z ↦ (z − i)/(z + i)` from the half-plane to the disk.
pub fn cayley() -> Mat2 {
    [[ONE, -C64::i()], [ONE, C64::i()]]
}

pub fn cayley_inv() -> Mat2 {
    [[C64::i(), C64::i()], [-ONE, ONE]]
}

/// Disk matrix conjugate to a real half-plane matrix.
pub fn from_half_plane(m: [[f64; 2]; 2]) -> Mat2 {
    let h = m.map(|row| row.map(|v| C64::new(v, 0.0)));
    mat_mul(&cayley(), &mat_mul(&h, &cayley_inv()))
}

/// Disk automorphism `z ↦ (z + a)/(1 + ā z)`.
pub fn translation(a: C64) -> Mat2 {
    [[ONE, a], [a.conj(), ONE]]
}

pub fn rotation(theta: f64) -> Mat2 {
    [[C64::from_polar(1.0, theta), ZERO], [ZERO, ONE]]
}

/// True when `m` preserves the unit circle (a disk automorphism).
pub fn is_automorphism(m: &Mat2) -> bool {
    let n = normalize(m);
    let scale = n.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-10 * scale * scale;
    // for SU(1,1) up to a unimodular factor u: d = u·ā and c = u·b̄
    let u = if n[0][0].norm() > 1e-12 { n[1][1] / n[0][0].conj() } else { n[1][0] / n[0][1].conj() };
    (u.norm() - 1.0).abs() < 1e-9
        && (n[1][1] - u * n[0][0].conj()).norm() < tol
        && (n[1][0] - u * n[0][1].conj()).norm() < tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MobiusClass {
    /// Translation length `tau` along the axis from `repelling` to `attracting`.
    Hyperbolic { tau: f64, attracting: C64, repelling: C64 },
    Parabolic { fixed: C64 },
    Elliptic { fixed: C64 },
    /// A self-map that is not onto; it has an interior fixed point.
    Contraction { fixed: C64 },
}

impl MobiusClass {
    pub fn tau(&self) -> f64 {
        match self {
            MobiusClass::Hyperbolic { tau, .. } => *tau,
            _ => 0.0,
        }
    }
}

/// Fixed points of `m` on the Riemann sphere (finite ones only).
fn fixed_points(m: &Mat2) -> Vec<C64> {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    if c.norm() < 1e-300 {
        return if (a - d).norm() > 0.0 { vec![b / (d - a)] } else { vec![] };
    }
    // c z² + (d − a) z − b = 0
    let p = d - a;
    let disc = (p * p + 4.0 * b * c).sqrt();
    let q = -0.5 * (p + if (p.conj() * disc).re >= 0.0 { disc } else { -disc });
    let mut out = vec![q / c];
    if q.norm() > 0.0 {
        out.push(-b / q);
    } else {
        out.push(-p / c);
    }
    out
}

fn derivative_modulus(m: &Mat2, z: C64) -> f64 {
    (det(m) / (m[1][0] * z + m[1][1]).powi(2)).norm()
}

pub fn classify(m: &Mat2) -> MobiusClass {
    let fps = fixed_points(m);
    if !is_automorphism(m) {
        let fixed = fps.into_iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
        return MobiusClass::Contraction { fixed };
    }
    let n = normalize(m);
    let t = (n[0][0] + n[1][1]).norm();
    if (t - 2.0).abs() < 1e-9 {
        let fixed = fps[0] / fps[0].norm();
        return MobiusClass::Parabolic { fixed };
    }
    if t < 2.0 {
        let fixed = fps.into_iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        return MobiusClass::Elliptic { fixed };
    }
    let tau = (t / 2.0).acosh();
    let (p, q) = (fps[0] / fps[0].norm(), fps[1] / fps[1].norm());
    let (attracting, repelling) = if derivative_modulus(m, p) < derivative_modulus(m, q) { (p, q) } else { (q, p) };
    MobiusClass::Hyperbolic { tau, attracting, repelling }
}

/// Point of the half-plane normal form, `w = e^l (q + i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramedPoint {
    pub l: f64,
    pub q: f64,
}

/// Conjugacy of a hyperbolic disk automorphism to `w ↦ e^{2τ} w` on the half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    to_frame: Mat2,
    from_frame: Mat2,
    pub tau: f64,
    pub attracting: C64,
}

impl Frame {
    pub fn new(m: &Mat2) -> Option<Frame> {
        let MobiusClass::Hyperbolic { tau, attracting, repelling } = classify(m) else { return None };
        // w = μ (z − ξ⁻)/(ξ⁺ − z) sends ξ⁻ to 0 and ξ⁺ to ∞
        let mut t: Mat2 = [[ONE, -repelling], [-ONE, attracting]];
        let mid = attracting + repelling;
        let on_circle = if mid.norm() > 1e-6 { mid / mid.norm() } else { attracting * C64::i() };
        let probe = act(&t, on_circle);
        let mu = probe.conj() / probe.norm();
        t[0] = t[0].map(|v| v * mu);
        if act(&t, ZERO).im < 0.0 {
            t[0] = t[0].map(|v| -v);
        }
        Some(Frame { to_frame: t, from_frame: adj(&t), tau, attracting })
    }

    pub fn embed(&self, z: C64) -> FramedPoint {
        let w = act(&self.to_frame, z);
        FramedPoint { l: w.im.ln(), q: w.re / w.im }
    }

    /// `f^n` in frame coordinates.
    pub fn step(&self, p: FramedPoint, n: f64) -> FramedPoint {
        FramedPoint { l: p.l + 2.0 * self.tau * n, q: p.q }
    }

    /// Disk coordinate; may round onto the unit circle far out.
    pub fn to_disk(&self, p: FramedPoint) -> C64 {
        if p.l <= 0.0 {
            return act(&self.from_frame, p.l.exp() * C64::new(p.q, 1.0));
        }
        // (a + b/w)/(c + d/w) keeps |w|² from overflowing
        let inv = (-p.l).exp() / C64::new(p.q, 1.0);
        let m = &self.from_frame;
        let z = (m[0][0] + m[0][1] * inv) / (m[1][0] + m[1][1] * inv);
        if z.is_finite() {
            z
        } else {
            self.attracting
        }
    }

    /// Half of the curvature −1 distance, stable for any separation of heights.
    pub fn distance(a: FramedPoint, b: FramedPoint) -> f64 {
        let (a, b) = if a.l >= b.l { (a, b) } else { (b, a) };
        let delta = a.l - b.l;
        let e = (-delta).exp();
        // |z − w|² / (Im z Im w) = e^δ [(q_a − q_b e^{−δ})² + (1 − e^{−δ})²]
        let bracket = (a.q - b.q * e).powi(2) + (1.0 - e).powi(2);
        if bracket == 0.0 {
            return 0.0;
        }
        let log_half = 0.5 * delta + 0.5 * bracket.ln() - std::f64::consts::LN_2;
        if log_half > 300.0 {
            log_half + std::f64::consts::LN_2
        } else {
            log_half.exp().asinh()
        }
    }

    /// Busemann function at the attracting point, up to an additive constant.
    pub fn busemann_attracting(p: FramedPoint) -> f64 {
        -0.5 * p.l
    }

    /// Unit-speed geodesic ray toward the attracting point (a vertical line of the normal form).
    pub fn ray(p: FramedPoint, t: f64) -> FramedPoint {
        FramedPoint { l: p.l + 2.0 * t, q: p.q * (-2.0 * t).exp() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ModelSpace;
    use crate::spaces::Point;

    fn half() -> Mat2 {
        [[ONE, C64::new(0.5, 0.0)], [C64::new(0.5, 0.0), ONE]]
    }

    #[test]
    fn hyperbolic_translation_length_is_arctanh_half() {
        let MobiusClass::Hyperbolic { tau, attracting, repelling } = classify(&half()) else { panic!() };
        assert!((tau - 0.5f64.atanh()).abs() < 1e-15);
        assert!((attracting - ONE).norm() < 1e-12);
        assert!((repelling + ONE).norm() < 1e-12);
    }

    #[test]
    fn parabolic_and_elliptic() {
        let p: Mat2 = [[C64::new(-1.0, 1.0), ONE], [-ONE, C64::new(1.0, 1.0)]];
        assert!(matches!(classify(&p), MobiusClass::Parabolic { fixed } if (fixed - ONE).norm() < 1e-9));
        let e = mat_mul(&translation(C64::new(0.0, 0.3)), &mat_mul(&rotation(1.0), &translation(C64::new(0.0, -0.3))));
        assert!(matches!(classify(&e), MobiusClass::Elliptic { fixed } if (fixed - C64::new(0.0, 0.3)).norm() < 1e-12));
        let c: Mat2 = [[C64::new(0.5, 0.0), ZERO], [ZERO, ONE]];
        assert!(matches!(classify(&c), MobiusClass::Contraction { fixed } if fixed.norm() < 1e-15));
    }

    #[test]
    fn frame_is_an_isometric_conjugacy() {
        let m = mat_mul(&rotation(0.7), &mat_mul(&half(), &translation(C64::new(0.1, -0.2))));
        let f = Frame::new(&m).unwrap();
        let s = ModelSpace::disk();
        let zs = [C64::new(0.1, 0.2), C64::new(-0.5, 0.3), C64::new(0.7, -0.6)];
        for z in zs {
            let w = act(&m, z);
            let fz = f.embed(z);
            let fw = f.embed(w);
            assert!((fw.l - f.step(fz, 1.0).l).abs() < 1e-10 && (fw.q - fz.q).abs() < 1e-10);
            for u in zs {
                let d = s.d(&Point::Disk(z), &Point::Disk(u));
                assert!((Frame::distance(fz, f.embed(u)) - d).abs() < 1e-10);
            }
            assert!((f.to_disk(fz) - z).norm() < 1e-12);
        }
    }

    #[test]
    fn far_frame_distances_stay_finite() {
        let a = FramedPoint { l: 0.0, q: 0.3 };
        let b = FramedPoint { l: 1500.0, q: 0.3 };
        assert!((Frame::distance(a, b) - 750.0 - 0.5 * 1.09f64.ln()).abs() < 1e-9);
        let top = Frame::ray(a, 750.0);
        assert!((Frame::distance(a, top) - 750.0).abs() < 1e-9);
    }
}
