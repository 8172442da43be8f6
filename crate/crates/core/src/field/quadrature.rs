use crate::geometry::{barycentric, Mesh, Point};

/// Symmetric 3-point rule, exact for quadratics. Weights sum to one.
pub const GAUSS3: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

const D7_A1: f64 = 0.059_715_871_789_769_82;
const D7_B1: f64 = 0.470_142_064_105_115_1;
const D7_W1: f64 = 0.132_394_152_788_506_2;
const D7_A2: f64 = 0.797_426_985_353_087_3;
const D7_B2: f64 = 0.101_286_507_323_456_3;
const D7_W2: f64 = 0.125_939_180_544_827_2;

/// 7-point degree-5 rule.
pub const DUNAVANT7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([D7_A1, D7_B1, D7_B1], D7_W1),
    ([D7_B1, D7_A1, D7_B1], D7_W1),
    ([D7_B1, D7_B1, D7_A1], D7_W1),
    ([D7_A2, D7_B2, D7_B2], D7_W2),
    ([D7_B2, D7_A2, D7_B2], D7_W2),
    ([D7_B2, D7_B2, D7_A2], D7_W2),
];

/// 5-point Gauss–Legendre nodes and weights on [0, 1].
pub const GAUSS_LEGENDRE5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_0, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332_0, 0.118_463_442_528_094_5),
];

/// Quadrature points of a whole mesh, flattened triangle by triangle.
#[derive(Clone, Debug)]
pub struct QuadPoints {
    offsets: Vec<usize>,
    bary: Vec<[f64; 3]>,
    /// Rule weight times triangle area.
    weights: Vec<f64>,
}

impl QuadPoints {
    /// The 3-point rule on every triangle.
    pub fn standard(mesh: &Mesh) -> QuadPoints {
        QuadPoints::with_pole(mesh, None)
    }

    /// The 3-point rule, switching to the 7-point rule on triangles that touch `pole`.
    pub fn with_pole(mesh: &Mesh, pole: Option<Point>) -> QuadPoints {
        let mut offsets = Vec::with_capacity(mesh.num_triangles() + 1);
        let mut bary = Vec::with_capacity(3 * mesh.num_triangles());
        let mut weights = Vec::with_capacity(3 * mesh.num_triangles());
        offsets.push(0);
        for t in 0..mesh.num_triangles() {
            let touches = pole.is_some_and(|p| {
                let b = barycentric(mesh.vertices(t), p);
                b.iter().all(|&x| x >= -1e-12)
            });
            let area = mesh.areas()[t];
            if touches {
                for (b, w) in DUNAVANT7 {
                    bary.push(b);
                    weights.push(w * area);
                }
            } else {
                for (b, w) in GAUSS3 {
                    bary.push(b);
                    weights.push(w * area);
                }
            }
            offsets.push(bary.len());
        }
        QuadPoints { offsets, bary, weights }
    }

    pub fn len(&self) -> usize {
        self.bary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bary.is_empty()
    }

    pub fn range(&self, t: usize) -> std::ops::Range<usize> {
        self.offsets[t]..self.offsets[t + 1]
    }

    pub fn bary(&self, q: usize) -> [f64; 3] {
        self.bary[q]
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    pub fn num_triangles(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Physical coordinates of every point.
    pub fn points(&self, mesh: &Mesh) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len());
        for t in 0..self.num_triangles() {
            for q in self.range(t) {
                out.push(mesh.point_at(t, self.bary[q]));
            }
        }
        out
    }

    /// Values of the linear interpolant of `u` at every point.
    pub fn interpolate(&self, mesh: &Mesh, u: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let (a, b, c) = (u[tri[0]], u[tri[1]], u[tri[2]]);
            for q in self.range(t) {
                let l = self.bary[q];
                out.push(l[0] * a + l[1] * b + l[2] * c);
            }
        }
        out
    }

    /// `∫ f` where `f` is given at the points.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Load vector `∫ f φ_i` for point values `f`.
    pub fn load(&self, mesh: &Mesh, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; mesh.num_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for q in self.range(t) {
                let f = self.weights[q] * values[q];
                let l = self.bary[q];
                for k in 0..3 {
                    out[tri[k]] += f * l[k];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_have_unit_weight_and_degree() {
        for rule in [&GAUSS3[..], &DUNAVANT7[..]] {
            let s: f64 = rule.iter().map(|r| r.1).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        // ∫ λ1^2 λ2^2 λ3 over the reference triangle (area 1/2) is 2!2!1!/7! * 2 * (1/2)
        let exact = 2.0 * 2.0 / 5040.0 * 2.0;
        let got: f64 = DUNAVANT7.iter().map(|(b, w)| w * b[0] * b[0] * b[1] * b[1] * b[2]).sum();
        assert!((got - exact).abs() < 1e-12, "{got} {exact}");
        let gl: f64 = GAUSS_LEGENDRE5.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((gl - 0.1).abs() < 1e-14);
    }
}
