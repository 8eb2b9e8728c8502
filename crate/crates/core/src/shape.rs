//! Geometric descriptors of the two-channel signal locus.
//!
//! A record's samples are read as points (channel1[t], channel2[t]) in
//! the plane. After an optional amplitude denoising step the module
//! measures the point cloud like a content-based image-retrieval
//! system would measure a segmented region:
//!
//! * principal axes via the eigen-decomposition of the 2x2 second
//!   central moment matrix — giving length L (major extent), width W
//!   (minor extent, with L >= W enforced) and orientation alpha;
//! * the convex hull (monotone chain) for area and perimeter;
//! * five dimensionless descriptors: compactness, elongation,
//!   rectangularity, eccentricity and convexity.
//!
//! All descriptors are invariant to translation, rotation and uniform
//! scaling of the locus; the tests pin those invariances down.

use crate::dataset::SignalRecord;
use crate::error::{Error, Result};

/// A point of the locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Principal-axis frame of the point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFrame {
    pub centroid: Point,
    /// Extent along the major axis (always >= width).
    pub length: f64,
    /// Extent along the minor axis.
    pub width: f64,
    /// Major-axis angle in degrees, in (-90, 90].
    pub alpha_degrees: f64,
    /// Eigenvalues of the second-moment matrix, major first.
    pub lambda_major: f64,
    pub lambda_minor: f64,
}

/// The five dimensionless shape descriptors plus the frame they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeDescriptors {
    pub frame: AxisFrame,
    /// 4 pi A / P^2 of the convex hull; 1 for a disc.
    pub compactness: f64,
    /// L / W >= 1.
    pub elongation: f64,
    /// Hull area / (L * W).
    pub rectangularity: f64,
    /// sqrt(lambda_minor / lambda_major) in [0, 1]; 1 for a disc.
    pub eccentricity: f64,
    /// Hull perimeter / time-ordered polyline length, clamped to (0, 1].
    pub convexity: f64,
    pub hull_area: f64,
    pub hull_perimeter: f64,
}

/// Default amplitude quantile for [`denoise`].
pub const DEFAULT_DENOISE_QUANTILE: f64 = 0.95;

/// Reads the locus of a record: points (channel1[t], channel2[t]).
pub fn locus(record: &SignalRecord) -> Vec<Point> {
    record
        .channel1
        .iter()
        .zip(&record.channel2)
        .map(|(&x, &y)| Point { x, y })
        .collect()
}

/// Empirical quantile: sorted[ceil(q * n) - 1] (q in (0, 1]).
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Drops points whose |x| exceeds the q-quantile of |x| AND |y| exceeds
/// the q-quantile of |y| — the far-corner outliers of the locus.
/// `q = 1.0` disables the filter.
pub fn denoise(points: &[Point], q: f64) -> Result<Vec<Point>> {
    if !(0.0 < q && q <= 1.0) {
        return Err(Error::Config(format!(
            "denoise quantile must be in (0, 1], got {q}"
        )));
    }
    if points.is_empty() {
        return Err(Error::Data("empty locus".into()));
    }
    if q == 1.0 {
        return Ok(points.to_vec());
    }
    let ax: Vec<f64> = points.iter().map(|p| p.x.abs()).collect();
    let ay: Vec<f64> = points.iter().map(|p| p.y.abs()).collect();
    let qx = quantile(&ax, q);
    let qy = quantile(&ay, q);
    let kept: Vec<Point> = points
        .iter()
        .copied()
        .filter(|p| !(p.x.abs() > qx && p.y.abs() > qy))
        .collect();
    if kept.is_empty() {
        return Err(Error::Data(
            "denoising removed every point of the locus".into(),
        ));
    }
    Ok(kept)
}

/// Relative tolerance that declares the two eigenvalues tied (isotropic
/// cloud); the major axis then defaults to horizontal.
const AXIS_TIE_REL: f64 = 1e-9;
/// lambda_minor <= DEGENERATE_REL * lambda_major means the cloud is
/// collinear and has no area.
const DEGENERATE_REL: f64 = 1e-14;

/// Centroid and principal-axis frame of a point cloud.
pub fn axis_frame(points: &[Point]) -> Result<AxisFrame> {
    if points.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 points for shape analysis, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p.x - cx;
        let dy = p.y - cy;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    sxx /= n;
    sxy /= n;
    syy /= n;

    // closed-form symmetric 2x2 eigen-decomposition
    let trace = sxx + syy;
    let diff = sxx - syy;
    let disc = (diff * diff + 4.0 * sxy * sxy).sqrt();
    let l1 = 0.5 * (trace + disc);
    let l2 = 0.5 * (trace - disc);
    if l1 <= 0.0 {
        return Err(Error::Data(
            "locus collapses to a single point; no shape to measure".into(),
        ));
    }
    if l2 <= DEGENERATE_REL * l1 {
        return Err(Error::Data(
            "locus is collinear; shape descriptors are undefined".into(),
        ));
    }

    let tied = disc <= AXIS_TIE_REL * l1;
    // major-axis direction: eigenvector of l1; for a tie use horizontal
    let (ux, uy) = if tied {
        (1.0, 0.0)
    } else if sxy.abs() > f64::EPSILON * trace {
        let vx = l1 - syy;
        let vy = sxy;
        let norm = (vx * vx + vy * vy).sqrt();
        (vx / norm, vy / norm)
    } else if sxx >= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };

    // extents along both axes
    let (mut min_u, mut max_u) = (f64::MAX, f64::MIN);
    let (mut min_v, mut max_v) = (f64::MAX, f64::MIN);
    for p in points {
        let dx = p.x - cx;
        let dy = p.y - cy;
        let u = dx * ux + dy * uy;
        let v = -dx * uy + dy * ux;
        min_u = min_u.min(u);
        max_u = max_u.max(u);
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    let extent_u = max_u - min_u;
    let extent_v = max_v - min_v;

    // enforce length >= width; if the extents disagree with the
    // eigenvalue order, fold the axis by 90 degrees
    let (length, width, ax, ay_dir) = if extent_u >= extent_v {
        (extent_u, extent_v, ux, uy)
    } else {
        (extent_v, extent_u, -uy, ux)
    };

    let mut alpha = ay_dir.atan2(ax).to_degrees();
    // direction is sign-free: map into (-90, 90]
    if alpha <= -90.0 {
        alpha += 180.0;
    } else if alpha > 90.0 {
        alpha -= 180.0;
    }

    Ok(AxisFrame {
        centroid: Point { x: cx, y: cy },
        length,
        width,
        alpha_degrees: alpha,
        lambda_major: l1,
        lambda_minor: l2,
    })
}

/// Convex hull by the monotone chain, counter-clockwise, first point
/// is the lexicographically smallest. Collinear points are dropped.
pub fn convex_hull(points: &[Point]) -> Result<Vec<Point>> {
    if points.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 points for a hull, got {}",
            points.len()
        )));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return Err(Error::Data("fewer than 3 distinct points".into()));
    }
    let cross = |o: Point, a: Point, b: Point| -> f64 {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop(); // last point repeats the first
    if hull.len() < 3 {
        return Err(Error::Data(
            "locus is collinear; shape descriptors are undefined".into(),
        ));
    }
    Ok(hull)
}

/// Signed shoelace area of a polygon (positive when counter-clockwise).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.x * b.y - a.y * b.x;
    }
    acc / 2.0
}

/// Closed-polygon perimeter.
pub fn polygon_perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
        })
        .sum()
}

/// Length of the open polyline visiting the points in order.
fn polyline_length(points: &[Point]) -> f64 {
    points
        .windows(2)
        .map(|w| ((w[0].x - w[1].x).powi(2) + (w[0].y - w[1].y).powi(2)).sqrt())
        .sum()
}

/// Computes the full descriptor set of a point cloud (already denoised).
pub fn shape_descriptors(points: &[Point]) -> Result<ShapeDescriptors> {
    let frame = axis_frame(points)?;
    let hull = convex_hull(points)?;
    let area = polygon_area(&hull).abs();
    let perimeter = polygon_perimeter(&hull);
    if area <= 0.0 || perimeter <= 0.0 {
        return Err(Error::Data(
            "degenerate hull: zero area or perimeter".into(),
        ));
    }
    let compactness = 4.0 * std::f64::consts::PI * area / (perimeter * perimeter);
    let elongation = frame.length / frame.width;
    let rectangularity = area / (frame.length * frame.width);
    let eccentricity = (frame.lambda_minor / frame.lambda_major).sqrt();
    let path = polyline_length(points);
    let convexity = if path > 0.0 {
        (perimeter / path).min(1.0)
    } else {
        1.0
    };
    Ok(ShapeDescriptors {
        frame,
        compactness,
        elongation,
        rectangularity,
        eccentricity,
        convexity,
        hull_area: area,
        hull_perimeter: perimeter,
    })
}

/// The shape feature vector of a record:
/// [compactness, elongation, rectangularity, eccentricity, convexity,
///  length, width, alpha_degrees].
pub fn shape_features(record: &SignalRecord, denoise_quantile: f64) -> Result<Vec<f64>> {
    record.validate()?;
    let points = denoise(&locus(record), denoise_quantile)?;
    let d = shape_descriptors(&points)?;
    Ok(vec![
        d.compactness,
        d.elongation,
        d.rectangularity,
        d.eccentricity,
        d.convexity,
        d.frame.length,
        d.frame.width,
        d.frame.alpha_degrees,
    ])
}

/// Names of the [`shape_features`] columns, in order.
pub const SHAPE_FEATURE_NAMES: [&str; 8] = [
    "compactness",
    "elongation",
    "rectangularity",
    "eccentricity",
    "convexity",
    "length",
    "width",
    "alpha_degrees",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn rotate(points: &[Point], degrees: f64) -> Vec<Point> {
        let (s, c) = degrees.to_radians().sin_cos();
        points
            .iter()
            .map(|p| Point {
                x: c * p.x - s * p.y,
                y: s * p.x + c * p.y,
            })
            .collect()
    }

    fn translate(points: &[Point], dx: f64, dy: f64) -> Vec<Point> {
        points
            .iter()
            .map(|p| Point {
                x: p.x + dx,
                y: p.y + dy,
            })
            .collect()
    }

    fn scale(points: &[Point], k: f64) -> Vec<Point> {
        points
            .iter()
            .map(|p| Point {
                x: k * p.x,
                y: k * p.y,
            })
            .collect()
    }

    fn ellipse(n: usize, a: f64, b: f64, deg: f64) -> Vec<Point> {
        let base: Vec<Point> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point {
                    x: a * t.cos(),
                    y: b * t.sin(),
                }
            })
            .collect();
        rotate(&base, deg)
    }

    fn square_corners() -> Vec<Point> {
        vec![
            Point { x: 0.0, y: 0.0 },
            Point { x: 1.0, y: 0.0 },
            Point { x: 1.0, y: 1.0 },
            Point { x: 0.0, y: 1.0 },
        ]
    }

    // -- quantile / denoise -------------------------------------------------------

    #[test]
    fn quantile_matches_definition() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert_eq!(quantile(&v, 0.8), 4.0); // ceil(4.0) = 4 -> sorted[3]
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.1), 1.0);
    }

    #[test]
    fn denoise_removes_far_corner_points_only() {
        // 99 points near origin + 1 far outlier in both coordinates
        let mut pts: Vec<Point> = (0..99)
            .map(|i| Point {
                x: (i % 10) as f64 * 0.1,
                y: (i / 10) as f64 * 0.1,
            })
            .collect();
        pts.push(Point { x: 50.0, y: 50.0 });
        let kept = denoise(&pts, 0.95).unwrap();
        assert!(kept.len() < 100);
        assert!(kept.iter().all(|p| p.x < 50.0));
        // a point large in x only survives: the filter needs both
        let mut pts2 = pts.clone();
        pts2.push(Point { x: 50.0, y: 0.0 });
        let kept2 = denoise(&pts2, 0.95).unwrap();
        assert!(kept2.iter().any(|p| p.x == 50.0 && p.y == 0.0));
    }

    #[test]
    fn denoise_quantile_one_is_identity() {
        let pts = square_corners();
        assert_eq!(denoise(&pts, 1.0).unwrap(), pts);
    }

    #[test]
    fn denoise_rejects_bad_quantile() {
        assert!(denoise(&square_corners(), 0.0).is_err());
        assert!(denoise(&square_corners(), 1.5).is_err());
    }

    // -- axis frame ------------------------------------------------------------

    #[test]
    fn ellipse_frame_recovers_geometry() {
        let pts = ellipse(720, 5.0, 2.0, 30.0);
        let f = axis_frame(&pts).unwrap();
        assert!((f.length - 10.0).abs() < 1e-2, "length {}", f.length);
        assert!((f.width - 4.0).abs() < 1e-2, "width {}", f.width);
        assert!(
            (f.alpha_degrees - 30.0).abs() < 0.5,
            "alpha {}",
            f.alpha_degrees
        );
        assert!(f.centroid.x.abs() < 1e-12 && f.centroid.y.abs() < 1e-12);
    }

    #[test]
    fn alpha_is_sign_free_direction() {
        // an axis at 120 degrees is the same line as -60 degrees
        let pts = ellipse(720, 5.0, 2.0, 120.0);
        let f = axis_frame(&pts).unwrap();
        assert!((f.alpha_degrees + 60.0).abs() < 0.5, "{}", f.alpha_degrees);
    }

    #[test]
    fn length_always_at_least_width() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..50 {
            let a = rng.uniform(0.5, 10.0);
            let b = rng.uniform(0.5, 10.0);
            let deg = rng.uniform(-90.0, 90.0);
            let f = axis_frame(&ellipse(360, a, b, deg)).unwrap();
            assert!(f.length >= f.width);
        }
    }

    #[test]
    fn isotropic_tie_defaults_to_horizontal_axis() {
        let f = axis_frame(&square_corners()).unwrap();
        assert_eq!(f.alpha_degrees, 0.0);
        assert!((f.length - 1.0).abs() < 1e-12);
        assert!((f.width - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts: Vec<Point> = (0..10)
            .map(|i| Point {
                x: i as f64,
                y: 2.0 * i as f64,
            })
            .collect();
        let err = axis_frame(&pts).unwrap_err();
        assert!(err.to_string().contains("collinear"), "{err}");
    }

    // -- hull --------------------------------------------------------------------

    #[test]
    fn hull_of_square_with_interior_points() {
        let mut pts = square_corners();
        pts.push(Point { x: 0.5, y: 0.5 });
        pts.push(Point { x: 0.25, y: 0.75 });
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
        let area = polygon_area(&hull);
        assert!((area - 1.0).abs() < 1e-12, "ccw area {area}");
        assert!((polygon_perimeter(&hull) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hull_drops_edge_collinear_points() {
        let mut pts = square_corners();
        pts.push(Point { x: 0.5, y: 0.0 });
        assert_eq!(convex_hull(&pts).unwrap().len(), 4);
    }

    // -- descriptors -------------------------------------------------------------

    #[test]
    fn square_descriptors() {
        let d = shape_descriptors(&square_corners()).unwrap();
        assert!((d.compactness - std::f64::consts::PI / 4.0).abs() < 1e-12);
        assert!((d.elongation - 1.0).abs() < 1e-12);
        assert!((d.rectangularity - 1.0).abs() < 1e-12);
        assert!((d.eccentricity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_descriptors() {
        let pts = ellipse(1024, 3.0, 3.0, 0.0);
        let d = shape_descriptors(&pts).unwrap();
        assert!(d.compactness >= 0.98, "compactness {}", d.compactness);
        assert!((d.eccentricity - 1.0).abs() < 1e-6);
        assert!((d.elongation - 1.0).abs() < 1e-3);
    }

    #[test]
    fn closed_locus_convexity_is_one_for_convex_path() {
        // a closed convex path traversed in order: path length ~ perimeter
        let mut pts = ellipse(512, 4.0, 2.0, 15.0);
        let first = pts[0];
        pts.push(first); // close the loop
        let d = shape_descriptors(&pts).unwrap();
        assert!(d.convexity > 0.99, "convexity {}", d.convexity);
        assert!(d.convexity <= 1.0);
    }

    #[test]
    fn self_crossing_path_lowers_convexity() {
        // figure-eight style ordering makes the path much longer than the hull
        let square = square_corners();
        let crossing = vec![square[0], square[2], square[1], square[3], square[0]];
        let d = shape_descriptors(&crossing).unwrap();
        assert!(d.convexity < 0.9, "convexity {}", d.convexity);
    }

    // -- invariances ------------------------------------------------------------------

    fn descriptor_tuple(d: &ShapeDescriptors) -> [f64; 5] {
        [
            d.compactness,
            d.elongation,
            d.rectangularity,
            d.eccentricity,
            d.convexity,
        ]
    }

    #[test]
    fn descriptors_are_translation_invariant() {
        let pts = ellipse(360, 5.0, 2.0, 20.0);
        let base = shape_descriptors(&pts).unwrap();
        let moved = shape_descriptors(&translate(&pts, 123.0, -45.0)).unwrap();
        for (a, b) in descriptor_tuple(&base).iter().zip(descriptor_tuple(&moved)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn descriptors_are_rotation_invariant() {
        let pts = ellipse(360, 5.0, 2.0, 0.0);
        let base = shape_descriptors(&pts).unwrap();
        for deg in [10.0, 37.5, 85.0] {
            let rot = shape_descriptors(&rotate(&pts, deg)).unwrap();
            for (a, b) in descriptor_tuple(&base).iter().zip(descriptor_tuple(&rot)) {
                assert!((a - b).abs() < 1e-9, "deg {deg}: {a} vs {b}");
            }
            // alpha tracks the rotation
            assert!(
                (rot.frame.alpha_degrees - deg).abs() < 1e-6,
                "alpha {} vs {deg}",
                rot.frame.alpha_degrees
            );
        }
    }

    #[test]
    fn descriptors_are_scale_invariant() {
        let pts = ellipse(360, 5.0, 2.0, 20.0);
        let base = shape_descriptors(&pts).unwrap();
        for k in [0.01, 3.0, 1e4] {
            let s = shape_descriptors(&scale(&pts, k)).unwrap();
            for (a, b) in descriptor_tuple(&base).iter().zip(descriptor_tuple(&s)) {
                assert!((a - b).abs() < 1e-8, "k {k}: {a} vs {b}");
            }
        }
    }

    // -- record-level pipeline -----------------------------------------------------

    #[test]
    fn shape_features_dimension_and_names() {
        let pts = ellipse(512, 5.0, 2.0, 20.0);
        let rec = SignalRecord {
            record_id: "s".into(),
            class_id: 1,
            sample_rate_hz: 10_000.0,
            channel1: pts.iter().map(|p| p.x).collect(),
            channel2: pts.iter().map(|p| p.y).collect(),
        };
        let f = shape_features(&rec, 1.0).unwrap();
        assert_eq!(f.len(), SHAPE_FEATURE_NAMES.len());
        assert!((f[1] - 2.5).abs() < 0.01, "elongation {}", f[1]);
        assert!((f[7] - 20.0).abs() < 0.5, "alpha {}", f[7]);
    }
}
