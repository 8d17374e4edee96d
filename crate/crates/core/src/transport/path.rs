use std::f64::consts::{FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cjson::Cx;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Consecutive segments must meet within this distance.
pub const CONTINUITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Line(Cx, Cx),
    Arc { center: Cx, r: f64, th0: f64, th1: f64 },
}

impl Segment {
    pub fn line(z0: C64, z1: C64) -> Self {
        Self::Line(Cx(z0), Cx(z1))
    }

    pub fn arc(center: C64, r: f64, th0: f64, th1: f64) -> Self {
        Self::Arc {
            center: Cx(center),
            r,
            th0,
            th1,
        }
    }

    pub fn start(&self) -> C64 {
        match *self {
            Self::Line(a, _) => a.0,
            Self::Arc { center, r, th0, .. } => center.0 + C64::from_polar(r, th0),
        }
    }

    pub fn end(&self) -> C64 {
        match *self {
            Self::Line(_, b) => b.0,
            Self::Arc { center, r, th1, .. } => center.0 + C64::from_polar(r, th1),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Self::Line(a, b) => (b.0 - a.0).norm(),
            Self::Arc { r, th0, th1, .. } => r * (th1 - th0).abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Self::Line(a, b) => Self::Line(b, a),
            Self::Arc { center, r, th0, th1 } => Self::Arc {
                center,
                r,
                th0: th1,
                th1: th0,
            },
        }
    }

    /// Shortest distance from `p` to any point of the segment.
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Self::Line(a, b) => {
                let d = b.0 - a.0;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - a.0).norm();
                }
                let t = ((p - a.0) * d.conj()).re / len2;
                (p - (a.0 + d * t.clamp(0.0, 1.0))).norm()
            }
            Self::Arc { center, r, th0, th1 } => {
                let v = p - center.0;
                let sweep = (th1 - th0).abs();
                let lo = th0.min(th1);
                let phi = v.arg();
                let inside = sweep >= TAU || (phi - lo).rem_euclid(TAU) <= sweep;
                if inside {
                    (v.norm() - r).abs()
                } else {
                    (p - self.start()).norm().min((p - self.end()).norm())
                }
            }
        }
    }

    /// Splits arcs into sub-arcs of at most π/4; lines are returned as is.
    pub fn pieces(&self) -> Vec<Segment> {
        match *self {
            Self::Line(..) => vec![*self],
            Self::Arc { center, r, th0, th1 } => {
                let n = ((th1 - th0).abs() / FRAC_PI_4).ceil().max(1.0) as usize;
                (0..n)
                    .map(|k| {
                        let a = th0 + (th1 - th0) * k as f64 / n as f64;
                        let b = if k + 1 == n {
                            th1
                        } else {
                            th0 + (th1 - th0) * (k + 1) as f64 / n as f64
                        };
                        Self::Arc { center, r, th0: a, th1: b }
                    })
                    .collect()
            }
        }
    }

    /// Position and unit tangent `dz/ds` at arclength `s`.
    pub fn point(&self, s: f64) -> (C64, C64) {
        match *self {
            Self::Line(a, b) => {
                let d = b.0 - a.0;
                let u = d / d.norm();
                (a.0 + u * s, u)
            }
            Self::Arc { center, r, th0, th1 } => {
                let sign = (th1 - th0).signum();
                let th = th0 + sign * s / r;
                let e = C64::from_polar(1.0, th);
                (center.0 + e * r, C64::new(0.0, sign) * e)
            }
        }
    }
}

/// Piecewise path made of lines and circular arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathRaw")]
pub struct PathSpec {
    segments: Vec<Segment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathRaw {
    segments: Vec<Segment>,
}

impl TryFrom<PathRaw> for PathSpec {
    type Error = String;
    fn try_from(r: PathRaw) -> std::result::Result<Self, String> {
        Self::new(r.segments).map_err(|e| e.to_string())
    }
}

impl PathSpec {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Invalid("a path needs at least one segment".into()));
        }
        for s in &segments {
            if let Segment::Arc { r, .. } = s {
                if !(*r > 0.0) {
                    return Err(Error::Invalid(format!("arc radius {r} must be positive")));
                }
            }
            if s.length() == 0.0 {
                return Err(Error::Invalid("zero-length segment".into()));
            }
        }
        for w in segments.windows(2) {
            let gap = (w[0].end() - w[1].start()).norm();
            if gap > CONTINUITY_TOL {
                return Err(Error::Invalid(format!(
                    "segments do not meet: {} vs {} (gap {gap:e})",
                    w[0].end(),
                    w[1].start()
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn line(z0: C64, z1: C64) -> Result<Self> {
        Self::new(vec![Segment::line(z0, z1)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> C64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> C64 {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn is_closed(&self) -> bool {
        (self.end() - self.start()).norm() <= CONTINUITY_TOL
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// This path followed by `next`.
    pub fn then(&self, next: &PathSpec) -> Result<Self> {
        let mut segs = self.segments.clone();
        segs.extend_from_slice(&next.segments);
        Self::new(segs)
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    /// Nearest approach to `points`, as `(distance, point)`.
    pub fn clearance(&self, points: &[C64]) -> Option<(f64, C64)> {
        points
            .iter()
            .map(|&p| {
                let d = self
                    .segments
                    .iter()
                    .map(|s| s.distance_to(p))
                    .fold(f64::INFINITY, f64::min);
                (d, p)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("paths always serialize");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// `min(½·distance to the nearest other singularity, ½·|basepoint − center|)`.
pub fn default_loop_radius(center: C64, basepoint: C64, singularities: &[C64]) -> f64 {
    let others = singularities
        .iter()
        .filter(|&&p| (p - center).norm() > CONTINUITY_TOL)
        .map(|&p| (p - center).norm())
        .fold(f64::INFINITY, f64::min);
    (0.5 * others).min(0.5 * (basepoint - center).norm())
}

/// Positive simple loop around `center`: line in, full circle, line back out.
pub fn loop_around(center: C64, radius: f64, basepoint: C64, others: &[C64]) -> Result<PathSpec> {
    let offset = basepoint - center;
    if !(radius > 0.0) || offset.norm() <= radius {
        return Err(Error::Invalid(format!(
            "basepoint {basepoint} must lie outside the circle of radius {radius} about {center}"
        )));
    }
    for &p in others {
        let d = (p - center).norm();
        if d > CONTINUITY_TOL && d < 2.0 * radius {
            return Err(Error::PathThroughSingularity { point: p, distance: (d - radius).abs() });
        }
    }
    let th = offset.arg();
    let entry = center + C64::from_polar(radius, th);
    let path = PathSpec::new(vec![
        Segment::line(basepoint, entry),
        Segment::arc(center, radius, th, th + 2.0 * PI),
        Segment::line(entry, basepoint),
    ])?;
    if let Some((d, p)) = path.clearance(
        &others
            .iter()
            .copied()
            .filter(|p| (p - center).norm() > CONTINUITY_TOL)
            .collect::<Vec<_>>(),
    ) {
        if d < 0.5 * radius {
            return Err(Error::PathThroughSingularity { point: p, distance: d });
        }
    }
    Ok(path)
}

/// The loop whose monodromy is `M_a·M_b`: `γ_b` is traversed first, then `γ_a`.
pub fn compose_loops(gamma_a: &PathSpec, gamma_b: &PathSpec) -> Result<PathSpec> {
    if (gamma_a.start() - gamma_b.start()).norm() > CONTINUITY_TOL {
        return Err(Error::InconsistentBasepoint(gamma_a.start(), gamma_b.start()));
    }
    gamma_b.then(gamma_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn loop_is_closed_three_segments() {
        let p = loop_around(re(0.0), 0.1, re(0.5), &[re(1.0)]).unwrap();
        assert_eq!(p.segments().len(), 3);
        assert!(p.is_closed());
        assert!((p.length() - (0.8 + 0.2 * PI)).abs() < 1e-14);
    }

    #[test]
    fn loop_rejects_crowded_annulus() {
        assert!(matches!(
            loop_around(re(0.0), 0.3, re(0.9), &[re(0.5)]),
            Err(Error::PathThroughSingularity { .. })
        ));
        assert!(loop_around(re(0.0), 0.6, re(0.5), &[]).is_err());
    }

    #[test]
    fn composition_concatenates() {
        let g0 = loop_around(re(0.0), 0.25, re(0.5), &[re(1.0)]).unwrap();
        let g1 = loop_around(re(1.0), 0.25, re(0.5), &[re(0.0)]).unwrap();
        let both = compose_loops(&g0, &g1).unwrap();
        assert_eq!(both.segments().len(), 6);
        assert!(both.is_closed());
        assert_eq!(both.segments()[0], g1.segments()[0]);
    }

    #[test]
    fn rejects_gaps() {
        let err = PathSpec::new(vec![
            Segment::line(re(0.0), re(1.0)),
            Segment::line(re(1.0 + 1e-9), re(2.0)),
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn arc_distance_and_pieces() {
        let a = Segment::arc(re(0.0), 1.0, 0.0, PI);
        assert!((a.distance_to(C64::new(0.0, 0.5)) - 0.5).abs() < 1e-15);
        assert!((a.distance_to(C64::new(0.0, -2.0)) - 5f64.sqrt()).abs() < 1e-12);
        let pcs = a.pieces();
        assert_eq!(pcs.len(), 4);
        assert_eq!(pcs[3].end(), a.end());
    }

    #[test]
    fn json_shape_and_hash() {
        let p = PathSpec::new(vec![
            Segment::line(re(0.5), re(0.25)),
            Segment::arc(re(0.0), 0.25, 0.0, TAU),
        ])
        .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with(r#"{"segments":[{"line":[[0.5,0.0],[0.25,0.0]]},{"arc":{"center""#));
        let q: PathSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(p.hash(), q.hash());
        assert_eq!(p.hash().len(), 64);
    }
}
