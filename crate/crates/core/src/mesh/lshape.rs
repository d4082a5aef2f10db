use serde::{Deserialize, Serialize};

/// Polygon outlining the high-conductivity L-shaped inclusion of the
/// 100 cm × 100 cm heterogeneous test, in cm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LShape {
    pub vertices: Vec<[f64; 2]>,
}

impl Default for LShape {
    /// Horizontal bar 20–80 cm × 20–40 cm joined to a vertical bar
    /// 20–40 cm × 40–80 cm.
    fn default() -> Self {
        Self {
            vertices: vec![
                [20.0, 20.0],
                [80.0, 20.0],
                [80.0, 40.0],
                [40.0, 40.0],
                [40.0, 80.0],
                [20.0, 80.0],
            ],
        }
    }
}

impl LShape {
    fn on_boundary(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        (0..n).any(|k| {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            let ab = [b[0] - a[0], b[1] - a[1]];
            let ap = [p[0] - a[0], p[1] - a[1]];
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
            let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
            d[0].hypot(d[1]) <= 1e-12 * (1.0 + len2.sqrt())
        })
    }

    /// Strict interior test (even-odd rule); boundary points are outside.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        if self.on_boundary(p) {
            return false;
        }
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[j]);
            if (a[1] > p[1]) != (b[1] > p[1])
                && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]
            {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

/// Region 1 (3·Ks) inside the L-shape, region 0 (Ks) elsewhere, including
/// on the interface.
pub fn classify_lshape_region(shape: &LShape, centroid: [f64; 2]) -> i32 {
    i32::from(shape.contains(centroid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions() {
        let s = LShape::default();
        assert_eq!(classify_lshape_region(&s, [30.0, 30.0]), 1);
        assert_eq!(classify_lshape_region(&s, [30.0, 70.0]), 1);
        assert_eq!(classify_lshape_region(&s, [70.0, 30.0]), 1);
        assert_eq!(classify_lshape_region(&s, [70.0, 70.0]), 0);
        assert_eq!(classify_lshape_region(&s, [5.0, 95.0]), 0);
        // interface points belong to region 0
        assert_eq!(classify_lshape_region(&s, [20.0, 50.0]), 0);
        assert_eq!(classify_lshape_region(&s, [60.0, 40.0]), 0);
        assert_eq!(classify_lshape_region(&s, [40.0, 40.0]), 0);
    }
}
