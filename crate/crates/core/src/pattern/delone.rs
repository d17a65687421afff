use super::{distance, Label, Point, PointPattern, Window};

/// Separations below this make the hopping matrix ill-posed.
pub const DELONE_MIN_SEPARATION: f64 = 1e-6;

/// Observed Delone radii of a finite pattern.
///
/// `r_min` is the smallest distance between two distinct points. `r_max` is
/// the diameter of the largest empty ball found among the probe points
/// (midpoints of label-neighbour bonds and, in two dimensions, centres of
/// label cells); for a chain this is the largest spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct DeloneCertificate {
    pub r_min: f64,
    pub r_max: f64,
    pub window: Window,
}

impl DeloneCertificate {
    pub fn is_delone(&self) -> bool {
        self.r_min > DELONE_MIN_SEPARATION && self.r_max.is_finite()
    }
}

/// Points sorted by first coordinate, for pruned nearest-neighbour scans.
struct SortedPoints {
    pts: Vec<Point>,
}

impl SortedPoints {
    fn new(points: &[Point]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        SortedPoints { pts }
    }

    fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.pts.len() {
            for j in i + 1..self.pts.len() {
                if self.pts[j][0] - self.pts[i][0] >= best {
                    break;
                }
                best = best.min(distance(&self.pts[i], &self.pts[j]));
            }
        }
        best
    }

    fn nearest(&self, q: &Point) -> f64 {
        let start = self.pts.partition_point(|p| p[0] < q[0]);
        let mut best = f64::INFINITY;
        for p in &self.pts[start..] {
            if p[0] - q[0] >= best {
                break;
            }
            best = best.min(distance(p, q));
        }
        for p in self.pts[..start].iter().rev() {
            if q[0] - p[0] >= best {
                break;
            }
            best = best.min(distance(p, q));
        }
        best
    }
}

fn midpoint(points: &[Point]) -> Point {
    let k = points.len() as f64;
    let mut m = [0.0; 3];
    for p in points {
        for (slot, x) in m.iter_mut().zip(p) {
            *slot += x / k;
        }
    }
    m
}

pub fn delone_check(pattern: &PointPattern) -> DeloneCertificate {
    let window = *pattern.window();
    let sorted = SortedPoints::new(pattern.points());
    let r_min = sorted.min_pair_distance();

    let mut hole = 0.0f64;
    let mut probe = |cell: &[Label]| {
        let pts: Option<Vec<Point>> = cell.iter().map(|&n| pattern.point(n)).collect();
        if let Some(pts) = pts {
            hole = hole.max(sorted.nearest(&midpoint(&pts)));
        }
    };
    for n in window.labels() {
        for axis in 0..window.dim {
            let mut m = n;
            m[axis] += 1;
            probe(&[n, m]);
        }
        if window.dim == 2 {
            probe(&[n, [n[0] + 1, n[1]], [n[0], n[1] + 1], [n[0] + 1, n[1] + 1]]);
        }
    }
    let r_max = if pattern.len() < 2 {
        f64::INFINITY
    } else {
        2.0 * hole
    };

    DeloneCertificate {
        r_min,
        r_max,
        window,
    }
}
