//! Output geometry: finite unions of points, segments, polynomial arcs and
//! convex polygons, plus sup-norm distances between such unions.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::piecewise::Poly;
use crate::scalar::{Rat, Scalar};

/// Curve `t ↦ (p_1(t), …, p_n(t))` for `t` in the open parameter interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Arc<S> {
    pub param: (Rat, Rat),
    pub coeffs: Vec<Poly<S>>,
}

impl<S: Scalar> Arc<S> {
    pub fn point_at(&self, t: &Rat) -> Vec<S> {
        self.coeffs.iter().map(|p| p.eval_at(t)).collect()
    }

    pub fn to_f64(&self) -> Arc<f64> {
        Arc { param: self.param.clone(), coeffs: self.coeffs.iter().map(Poly::to_f64).collect() }
    }

    fn point_at_f64(&self, t: f64) -> Vec<f64> {
        self.coeffs.iter().map(|p| p.to_f64().eval(&t)).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawArc<S> {
    param: (Rat, Rat),
    #[serde(skip_serializing_if = "Option::is_none", default)]
    coeffs_x: Option<Vec<S>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    coeffs_y: Option<Vec<S>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    coeffs: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> Serialize for Arc<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let raw = if self.coeffs.len() == 2 {
            RawArc {
                param: self.param.clone(),
                coeffs_x: Some(self.coeffs[0].coeffs().to_vec()),
                coeffs_y: Some(self.coeffs[1].coeffs().to_vec()),
                coeffs: None,
            }
        } else {
            RawArc {
                param: self.param.clone(),
                coeffs_x: None,
                coeffs_y: None,
                coeffs: Some(self.coeffs.iter().map(|p| p.coeffs().to_vec()).collect()),
            }
        };
        raw.serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Arc<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Arc<S>, D::Error> {
        let raw = RawArc::<S>::deserialize(deserializer)?;
        let coeffs = match (raw.coeffs_x, raw.coeffs_y, raw.coeffs) {
            (Some(x), Some(y), None) => vec![Poly::new(x), Poly::new(y)],
            (None, None, Some(cs)) => cs.into_iter().map(Poly::new).collect(),
            _ => return Err(serde::de::Error::custom("arc needs either coeffs_x and coeffs_y, or coeffs")),
        };
        if raw.param.0 >= raw.param.1 {
            return Err(serde::de::Error::custom("arc parameter interval must have positive length"));
        }
        Ok(Arc { param: raw.param, coeffs })
    }
}

/// Union of simple pieces in ℝⁿ. Polygons are convex, counterclockwise, and
/// only used for `n = 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PlanarSet<S> {
    #[serde(default)]
    pub points: Vec<Vec<S>>,
    #[serde(default)]
    pub segments: Vec<[Vec<S>; 2]>,
    #[serde(default)]
    pub arcs: Vec<Arc<S>>,
    #[serde(default)]
    pub polygons: Vec<Vec<Vec<S>>>,
}

impl<S> Default for PlanarSet<S> {
    fn default() -> Self {
        PlanarSet { points: Vec::new(), segments: Vec::new(), arcs: Vec::new(), polygons: Vec::new() }
    }
}

impl<S: Scalar> PlanarSet<S> {
    pub fn empty() -> Self {
        PlanarSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.segments.is_empty() && self.arcs.is_empty() && self.polygons.is_empty()
    }

    pub fn extend(&mut self, other: PlanarSet<S>) {
        self.points.extend(other.points);
        self.segments.extend(other.segments);
        self.arcs.extend(other.arcs);
        self.polygons.extend(other.polygons);
    }

    pub fn to_f64(&self) -> PlanarSet<f64> {
        let pt = |p: &Vec<S>| p.iter().map(Scalar::to_f64).collect::<Vec<f64>>();
        PlanarSet {
            points: self.points.iter().map(pt).collect(),
            segments: self.segments.iter().map(|[a, b]| [pt(a), pt(b)]).collect(),
            arcs: self.arcs.iter().map(Arc::to_f64).collect(),
            polygons: self.polygons.iter().map(|poly| poly.iter().map(pt).collect()).collect(),
        }
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let r: f64 = s.parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl PlanarSet<f64> {
    /// Every coordinate rounded to `digits` significant digits.
    pub fn rounded(&self, digits: usize) -> PlanarSet<f64> {
        let pt = |p: &Vec<f64>| p.iter().map(|&v| round_sig(v, digits)).collect::<Vec<f64>>();
        PlanarSet {
            points: self.points.iter().map(pt).collect(),
            segments: self.segments.iter().map(|[a, b]| [pt(a), pt(b)]).collect(),
            arcs: self
                .arcs
                .iter()
                .map(|a| Arc {
                    param: a.param.clone(),
                    coeffs: a.coeffs.iter().map(|p| Poly::new(pt(&p.coeffs().to_vec()))).collect(),
                })
                .collect(),
            polygons: self.polygons.iter().map(|poly| poly.iter().map(pt).collect()).collect(),
        }
    }

    /// Axis-aligned bounding box `(min, max)` over all pieces (arcs sampled).
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let pts = self.sample(64.0);
        let first = pts.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in &pts {
            for k in 0..p.len().min(lo.len()) {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    pub fn diameter(&self) -> f64 {
        match self.bounding_box() {
            Some((lo, hi)) => lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max),
            None => 0.0,
        }
    }

    /// Points covering every piece with spacing about `1 / density`;
    /// polygons contribute boundary and interior grid points.
    pub fn sample(&self, density: f64) -> Vec<Vec<f64>> {
        let density = density.max(1.0);
        let mut out = self.points.clone();
        for [a, b] in &self.segments {
            out.extend(sample_segment(a, b, density));
        }
        for arc in &self.arcs {
            out.extend(arc_polyline(arc, density));
        }
        for poly in &self.polygons {
            for k in 0..poly.len() {
                out.extend(sample_segment(&poly[k], &poly[(k + 1) % poly.len()], density));
            }
            if poly.len() >= 3 {
                let (lo, hi) = bbox(poly);
                let nx = ((hi[0] - lo[0]) * density).ceil().max(1.0) as usize;
                let ny = ((hi[1] - lo[1]) * density).ceil().max(1.0) as usize;
                for i in 0..=nx {
                    for j in 0..=ny {
                        let p = vec![
                            lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64,
                            lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64,
                        ];
                        if inside_convex(poly, &p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    /// Sup-norm distance from `p` to the set; arcs are treated as polylines
    /// with spacing `1 / density`.
    pub fn distance_to(&self, p: &[f64], density: f64) -> f64 {
        let mut best = f64::INFINITY;
        for q in &self.points {
            best = best.min(linf(p, q));
        }
        for [a, b] in &self.segments {
            best = best.min(point_segment_linf(p, a, b));
        }
        for arc in &self.arcs {
            let line = arc_polyline(arc, density.max(1.0));
            for w in line.windows(2) {
                best = best.min(point_segment_linf(p, &w[0], &w[1]));
            }
            if line.len() == 1 {
                best = best.min(linf(p, &line[0]));
            }
        }
        for poly in &self.polygons {
            if poly.len() >= 3 && p.len() == 2 && inside_convex(poly, p) {
                return 0.0;
            }
            for k in 0..poly.len() {
                best = best.min(point_segment_linf(p, &poly[k], &poly[(k + 1) % poly.len()]));
            }
        }
        best
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn bbox(pts: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = pts[0].clone();
    let mut hi = pts[0].clone();
    for p in pts {
        for k in 0..p.len() {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn sample_segment(a: &[f64], b: &[f64], density: f64) -> Vec<Vec<f64>> {
    let n = (linf(a, b) * density).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
        })
        .collect()
}

fn arc_polyline(arc: &Arc<f64>, density: f64) -> Vec<Vec<f64>> {
    let (t0, t1) = (arc.param.0.to_f64(), arc.param.1.to_f64());
    // speed bound from a coarse pass
    let coarse: Vec<Vec<f64>> =
        (0..=16).map(|k| arc.point_at_f64(t0 + (t1 - t0) * k as f64 / 16.0)).collect();
    let length: f64 = coarse.windows(2).map(|w| linf(&w[0], &w[1])).sum();
    let n = ((length * density).ceil() as usize).clamp(16, 1 << 16);
    (0..=n).map(|k| arc.point_at_f64(t0 + (t1 - t0) * k as f64 / n as f64)).collect()
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn inside_convex(poly: &[Vec<f64>], p: &[f64]) -> bool {
    let scale = 1.0 + poly.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..poly.len()).all(|k| cross(&poly[k], &poly[(k + 1) % poly.len()], p) >= -1e-12 * scale * scale)
}

/// `min_{s ∈ [0,1]} ‖p - (a + s(b - a))‖_∞`, exact: the minimum of this
/// convex piecewise-linear function sits at an end or at a crossing of two
/// of the linear pieces `±(p_i - a_i - s d_i)`.
fn point_segment_linf(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = p.len();
    let r: Vec<f64> = (0..n).map(|i| p[i] - a[i]).collect();
    let d: Vec<f64> = (0..n).map(|i| b[i] - a[i]).collect();
    let g = |s: f64| (0..n).map(|i| (r[i] - s * d[i]).abs()).fold(0.0, f64::max);
    let mut best = g(0.0).min(g(1.0));
    let mut consider = |s: f64| {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            best = best.min(g(s));
        }
    };
    for i in 0..n {
        if d[i] != 0.0 {
            consider(r[i] / d[i]);
        }
        for k in (i + 1)..n {
            // r_i - s d_i = ±(r_k - s d_k)
            if d[i] != d[k] {
                consider((r[i] - r[k]) / (d[i] - d[k]));
            }
            if d[i] != -d[k] {
                consider((r[i] + r[k]) / (d[i] + d[k]));
            }
        }
    }
    best
}

/// Convex hull of planar points, counterclockwise, collinear points removed.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let scale = 1.0 + pts.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale * scale;
    let turn = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| cross(o, a, b);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= tol {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= tol {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// The convex hull as a point, a segment, or a polygon.
pub fn hull_set(points: &[[f64; 2]]) -> PlanarSet<f64> {
    let hull = convex_hull(points);
    let mut set = PlanarSet::empty();
    match hull.len() {
        0 => {}
        1 => set.points.push(hull[0].to_vec()),
        2 => set.segments.push([hull[0].to_vec(), hull[1].to_vec()]),
        _ => set.polygons.push(hull.iter().map(|p| p.to_vec()).collect()),
    }
    set
}

/// `sup_{a ∈ A} d_∞(a, B)` over samples of `A` at the given density.
pub fn directed_distance(a: &PlanarSet<f64>, b: &PlanarSet<f64>, density: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::UndefinedDistance("one of the sets is empty".into()));
    }
    Ok(a.sample(density).iter().map(|p| b.distance_to(p, density)).fold(0.0, f64::max))
}

/// Symmetric Hausdorff distance in the sup-norm.
pub fn hausdorff_distance(a: &PlanarSet<f64>, b: &PlanarSet<f64>, density: f64) -> Result<f64> {
    Ok(directed_distance(a, b, density)?.max(directed_distance(b, a, density)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: [f64; 2], b: [f64; 2]) -> PlanarSet<f64> {
        PlanarSet { segments: vec![[a.to_vec(), b.to_vec()]], ..PlanarSet::empty() }
    }

    fn pt(a: [f64; 2]) -> PlanarSet<f64> {
        PlanarSet { points: vec![a.to_vec()], ..PlanarSet::empty() }
    }

    #[test]
    fn hausdorff_examples() {
        let s = seg([0.0, 0.0], [1.0, 0.0]);
        assert_eq!(hausdorff_distance(&s, &s, 100.0).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&s, &pt([0.0, 0.0]), 100.0).unwrap(), 1.0);
        assert!(matches!(
            hausdorff_distance(&s, &PlanarSet::empty(), 10.0),
            Err(Error::UndefinedDistance(_))
        ));
    }

    #[test]
    fn linf_segment_distance_matches_brute_force() {
        let cases = [
            ([0.3, 0.9], [0.0, 0.0], [1.0, 0.2]),
            ([2.0, -1.0], [0.0, 0.0], [1.0, 1.0]),
            ([0.5, 0.5], [1.0, 0.0], [0.0, 1.0]),
        ];
        for (p, a, b) in cases {
            let exact = point_segment_linf(&p, &a, &b);
            let brute = (0..=100_000)
                .map(|k| {
                    let s = k as f64 / 100_000.0;
                    linf(&p, &[a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
                })
                .fold(f64::INFINITY, f64::min);
            assert!((exact - brute).abs() < 1e-5, "{exact} vs {brute}");
            assert!(exact <= brute + 1e-15);
        }
    }

    #[test]
    fn hull_of_square_with_interior_and_collinear_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let hull = convex_hull(&pts);
        assert_eq!(hull, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let line = hull_set(&[[0.125, 1.0], [0.5, 1.0], [0.875, 1.0]]);
        assert_eq!(line.segments, vec![[vec![0.125, 1.0], vec![0.875, 1.0]]]);
        assert_eq!(hull_set(&[[1.0, 2.0], [1.0, 2.0]]).points, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn polygon_interior_has_zero_distance() {
        let square = hull_set(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(square.distance_to(&[0.5, 0.5], 10.0), 0.0);
        assert!((square.distance_to(&[1.5, 0.5], 10.0) - 0.5).abs() < 1e-15);
        let inner = hull_set(&[[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]]);
        let d = hausdorff_distance(&square, &inner, 200.0).unwrap();
        assert!((d - 0.25).abs() < 1e-12, "{d}");
        assert_eq!(directed_distance(&inner, &square, 200.0).unwrap(), 0.0);
    }

    #[test]
    fn arcs_serialize_with_named_coordinates() {
        let arc = Arc {
            param: (Rat::zero(), Rat::new(1, 2)),
            coeffs: vec![Poly::linear(Rat::one(), -Rat::one()), Poly::constant(Rat::one())],
        };
        let set = PlanarSet { arcs: vec![arc], ..PlanarSet::empty() };
        let js = serde_json::to_value(&set).unwrap();
        assert_eq!(js["arcs"][0]["param"], serde_json::json!(["0", "1/2"]));
        assert_eq!(js["arcs"][0]["coeffs_x"], serde_json::json!(["1", "-1"]));
        assert_eq!(js["arcs"][0]["coeffs_y"], serde_json::json!(["1"]));
        let back: PlanarSet<Rat> = serde_json::from_value(js).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_sig(0.1 + 0.2, 12), 0.3);
        assert_eq!(round_sig(123456.7890123456, 12), 123456.789012);
        assert_eq!(round_sig(-0.0, 12), 0.0);
    }
}
