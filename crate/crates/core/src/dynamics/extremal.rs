//! Growth of extremal lengths along orbits on the torus Teichmüller space.

use serde::{Deserialize, Serialize};

use super::maps::NonexpansiveMap;
use super::orbit::translation_number;
use crate::spaces::{primitive_classes, Point, SpaceKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSpectrum {
    /// Class realising the supremum growth.
    pub beta: (i64, i64),
    /// `Ext_{f^N x}(β)^{1/N}`.
    pub lhs: f64,
    /// `(sup_α Ext_{f^N x}(α) / Ext_x(α))^{1/N}` over the class bound.
    pub rhs: f64,
    /// `e^{2τ}` from the translation number.
    pub growth: f64,
}

fn ln_ext(z: crate::C64, (p, q): (i64, i64)) -> f64 {
    (p as f64 + q as f64 * z).norm_sqr().ln() - z.im.ln()
}

pub fn extremal_length_spectrum(map: &NonexpansiveMap, x: &Point, n: usize, bound: i64) -> Result<ExtremalSpectrum> {
    let space = map.space();
    if space.kind != SpaceKind::TorusTeichmueller {
        return Err(Error::unsupported("extremal_length_spectrum", space.name()));
    }
    if n == 0 || bound < 1 {
        return Err(Error::Invalid("need n ≥ 1 and a class bound ≥ 1".into()));
    }
    let mut y = x.clone();
    for _ in 0..n {
        y = map.apply(&y)?;
    }
    let (Point::HalfPlane(z0), Point::HalfPlane(zn)) = (x, &y) else { return Err(Error::Mismatch) };
    let inv = 1.0 / n as f64;
    let ln_rhs = primitive_classes(bound)
        .into_iter()
        .map(|a| ln_ext(*zn, a) - ln_ext(*z0, a))
        .fold(f64::NEG_INFINITY, f64::max)
        * inv;
    let mut small = primitive_classes(3);
    small.sort_by_key(|(p, q)| p.abs() + q.abs());
    let (beta, ln_lhs) = small
        .into_iter()
        .map(|b| (b, ln_ext(*zn, b) * inv))
        .fold(None::<((i64, i64), f64)>, |best, (b, v)| match best {
            Some((_, w)) if (w - ln_rhs).abs() <= (v - ln_rhs).abs() => best,
            _ => Some((b, v)),
        })
        .expect("class list is nonempty");
    let tau = translation_number(map, x, n)?.hi / space.scale;
    Ok(ExtremalSpectrum { beta, lhs: ln_lhs.exp(), rhs: ln_rhs.exp(), growth: (2.0 * tau).exp() })
}
