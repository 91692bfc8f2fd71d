//! Sign of the outward normal velocity on each a-face.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypotheses::SampleGrid;
use crate::scalar::{lit, Real};
use crate::types::{BoxDomain, Face, Point, Side, SplitField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceClass {
    /// Outward velocity strictly positive at every sample.
    Exit,
    /// Outward velocity strictly negative at every sample.
    Entry,
    Mixed,
}

impl fmt::Display for FaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaceClass::Exit => "exit",
            FaceClass::Entry => "entry",
            FaceClass::Mixed => "mixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceReport<T> {
    pub face: Face,
    pub class: FaceClass,
    pub min_speed: T,
    pub max_speed: T,
    /// Sample with the smallest outward speed.
    pub worst_point: Point<T>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport<T> {
    pub faces: Vec<FaceReport<T>>,
}

impl<T: Real> BoundaryReport<T> {
    pub fn all_exit(&self) -> bool {
        self.faces.iter().all(|f| f.class == FaceClass::Exit)
    }

    pub fn face(&self, face: Face) -> Option<&FaceReport<T>> {
        self.faces.iter().find(|f| f.face == face)
    }
}

/// Classifies every finite a-face from `samples_per_face` points per free
/// coordinate.
pub fn classify_boundary<T: Real, F: SplitField<T> + ?Sized>(
    field: &F,
    domain: &BoxDomain<T>,
    samples_per_face: usize,
) -> Result<BoundaryReport<T>> {
    if domain.n() != field.n() || domain.m() != field.m() {
        return Err(Error::Shape("domain dimensions differ from the field".into()));
    }
    if samples_per_face == 0 {
        return Err(Error::InvalidInput("need at least one sample per face".into()));
    }
    let zgrid = SampleGrid::over_z(&domain.z_bounds, samples_per_face);
    let mut faces = Vec::new();
    for (i, &(lo, hi)) in domain.a_bounds.iter().enumerate() {
        for (side, bound) in [(Side::Lower, lo), (Side::Upper, hi)] {
            if !bound.is_finite() {
                continue;
            }
            // other a-coordinates sweep their interval, unbounded ones sit at 0
            let a_axes: Vec<Vec<T>> = domain
                .a_bounds
                .iter()
                .enumerate()
                .map(|(k, &(l, h))| {
                    if k == i {
                        vec![bound]
                    } else if l.is_finite() && h.is_finite() {
                        let c = samples_per_face.max(2);
                        (0..c).map(|s| l + (h - l) * lit(s as f64 / (c - 1) as f64)).collect()
                    } else {
                        vec![T::zero()]
                    }
                })
                .collect();
            let agrid = SampleGrid::new(a_axes);
            let total = agrid.len() * zgrid.len();
            let sign = if side == Side::Upper { T::one() } else { -T::one() };
            let speeds: Vec<(T, usize)> = (0..total)
                .into_par_iter()
                .map(|idx| {
                    let a = agrid.point(idx / zgrid.len());
                    let z = zgrid.point(idx % zgrid.len());
                    (sign * field.f(&a, &z)[i], idx)
                })
                .collect();
            let (mut min, mut arg, mut max) = (T::infinity(), 0, T::neg_infinity());
            for &(s, idx) in &speeds {
                if s.is_nan() {
                    return Err(Error::NonFinite { t: 0.0 });
                }
                if s < min {
                    min = s;
                    arg = idx;
                }
                max = max.max(s);
            }
            let class = if min > T::zero() {
                FaceClass::Exit
            } else if max < T::zero() {
                FaceClass::Entry
            } else {
                FaceClass::Mixed
            };
            let worst_point = Point::new(agrid.point(arg / zgrid.len()), zgrid.point(arg % zgrid.len()))?;
            faces.push(FaceReport {
                face: Face::A { index: i, side },
                class,
                min_speed: min,
                max_speed: max,
                worst_point,
                samples: total,
            });
        }
    }
    Ok(BoundaryReport { faces })
}
