//! Gauss–Legendre rules and a collapsed (Duffy) product rule on the
//! probability simplex.

use crate::Scalar;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre<F: Scalar>(n: usize) -> (Vec<F>, Vec<F>) {
    assert!(n > 0, "need at least one node");
    let mut nodes = vec![F::zero(); n];
    let mut weights = vec![F::zero(); n];
    let half = F::lit(0.5);
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th root on [-1, 1], then Newton.
        let mut z = (F::PI() * F::lit(i as f64 + 0.75) / F::lit(n as f64 + 0.5)).cos();
        let mut dp = F::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z = z - dz;
            if dz.abs() <= F::epsilon() * F::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d.is_finite() {
            dp = d;
        }
        let w = F::lit(2.0) / ((F::one() - z * z) * dp * dp);
        nodes[i] = half * (F::one() - z);
        nodes[n - 1 - i] = half * (F::one() + z);
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre<F: Scalar>(n: usize, z: F) -> (F, F) {
    let mut p0 = F::one();
    let mut p1 = z;
    for k in 2..=n {
        let kf = F::from_count(k);
        let p2 = ((F::lit(2.0) * kf - F::one()) * z * p1 - (kf - F::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (F::one(), F::zero());
    }
    let nf = F::from_count(n);
    (p1, nf * (z * p1 - p0) / (z * z - F::one()))
}

/// Composite Gauss–Legendre on `[0, 1]`: `panels` equal subintervals, `points` nodes each.
pub fn composite_gauss_legendre<F: Scalar>(points: usize, panels: usize) -> (Vec<F>, Vec<F>) {
    let (x, w) = gauss_legendre::<F>(points);
    let width = F::one() / F::from_count(panels);
    let mut nodes = Vec::with_capacity(points * panels);
    let mut weights = Vec::with_capacity(points * panels);
    for p in 0..panels {
        let left = F::from_count(p) * width;
        for (&xi, &wi) in x.iter().zip(&w) {
            nodes.push(left + xi * width);
            weights.push(wi * width);
        }
    }
    (nodes, weights)
}

/// Quadrature rule for expectations under the uniform density on the
/// `(k-1)`-simplex `{b ∈ ℝᵏ₊ : Σ b = 1}`. Weights sum to one.
#[derive(Debug, Clone)]
pub struct SimplexRule<F> {
    vertices: usize,
    /// Row-major `len × vertices` barycentric points.
    points: Vec<F>,
    weights: Vec<F>,
}

impl<F: Scalar> SimplexRule<F> {
    /// Product of composite Gauss–Legendre rules pulled back through the map
    /// `b_j = u_j ∏_{l<j}(1-u_l)`, `b_k = ∏_l (1-u_l)`, whose Jacobian is
    /// `∏_j (1-u_j)^(k-2-j)`. A polynomial of total degree `d` in `b` is
    /// integrated exactly once `points ≥ (d + k) / 2`.
    pub fn collapsed(vertices: usize, points: usize, panels: usize) -> Self {
        assert!(vertices >= 1);
        if vertices == 1 {
            return Self {
                vertices,
                points: vec![F::one()],
                weights: vec![F::one()],
            };
        }
        let dims = vertices - 1;
        let (nodes, gw) = composite_gauss_legendre::<F>(points, panels);
        let per_axis = nodes.len();
        let total = per_axis.pow(dims as u32);
        let mut density = F::one();
        for j in 1..vertices {
            density = density * F::from_count(j);
        }
        let mut out_points = Vec::with_capacity(total * vertices);
        let mut out_weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims];
        for _ in 0..total {
            let mut rem = F::one();
            let mut w = density;
            for (j, &a) in idx.iter().enumerate() {
                let u = nodes[a];
                out_points.push(rem * u);
                w = w * gw[a] * (F::one() - u).powi((dims - 1 - j) as i32);
                rem = rem * (F::one() - u);
            }
            out_points.push(rem);
            out_weights.push(w);
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < per_axis {
                    break;
                }
                *slot = 0;
            }
        }
        Self {
            vertices,
            points: out_points,
            weights: out_weights,
        }
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[F] {
        &self.points
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[F] {
        &self.points[i * self.vertices..(i + 1) * self.vertices]
    }

    /// `𝔼[f(b)]` under the uniform density.
    pub fn expectation(&self, mut f: impl FnMut(&[F]) -> F) -> F {
        (0..self.len())
            .map(|i| self.weights[i] * f(self.point(i)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in [1usize, 2, 5, 8, 20] {
            let (x, w) = gauss_legendre::<f64>(n);
            for d in 0..(2 * n) {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(d as i32))
                    .sum();
                assert!(
                    (approx - 1.0 / (d as f64 + 1.0)).abs() < 1e-13,
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn composite_rule_sums_to_one() {
        let (_, w) = composite_gauss_legendre::<f64>(4, 8);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_rule_is_a_probability_measure() {
        for k in 1..=4 {
            let r = SimplexRule::<f64>::collapsed(k, 5, 2);
            assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
            for i in 0..r.len() {
                let s: f64 = r.point(i).iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn simplex_rule_reproduces_dirichlet_moments() {
        // Uniform on the 3-simplex is Dirichlet(1,1,1,1): E[b_i] = 1/4,
        // E[b_i b_j] = 1/20, E[b_i²] = 1/10, E[b_1 b_2 b_3 b_4] = 1/840.
        let r = SimplexRule::<f64>::collapsed(4, 6, 1);
        for i in 0..4 {
            assert!((r.expectation(|b| b[i]) - 0.25).abs() < 1e-14);
            assert!((r.expectation(|b| b[i] * b[i]) - 0.1).abs() < 1e-14);
        }
        assert!((r.expectation(|b| b[0] * b[3]) - 0.05).abs() < 1e-14);
        assert!((r.expectation(|b| b.iter().product()) - 1.0 / 840.0).abs() < 1e-15);
    }
}
