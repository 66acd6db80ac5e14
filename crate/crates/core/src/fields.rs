//! Scalar fields and seeded test-function families.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// One finite real value per point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("field value at point {i} is not finite")));
        }
        Ok(ScalarField { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ScalarField { values: vec![c; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        ScalarField { values: self.values.iter().map(|v| alpha * v).collect() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        ScalarField { values: self.values.iter().map(|v| v + c).collect() }
    }

    pub fn check_on(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::invalid(format!(
                "field has {} values but the space has {} points",
                self.len(),
                space.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// Real trigonometric polynomial with all frequencies `1 <= |m|_inf <= degree`,
    /// coefficient of mode `m` scaled by `|m|^-2`.
    TrigPolynomial { degree: u32 },
    /// Sum of smooth compactly supported bumps `exp(1 - 1/(1 - (d/w)^2))`.
    /// Centres are drawn among points within `center_radius` of the central point.
    BumpMixture { bumps: usize, width: (f64, f64), center_radius: f64 },
    /// `min_i (v_i + L d(x, a_i))` over random anchors `a_i`.
    LipschitzRandom { anchors: usize, lipschitz: f64 },
    Constant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionFamilySpec {
    pub kind: FamilyKind,
    pub count: usize,
    pub amplitude: (f64, f64),
    pub seed: u64,
}

impl FunctionFamilySpec {
    pub fn new(kind: FamilyKind, count: usize, amplitude: (f64, f64), seed: u64) -> Self {
        FunctionFamilySpec { kind, count, amplitude, seed }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.amplitude;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::config("amplitude range must be finite with lo <= hi"));
        }
        match self.kind {
            FamilyKind::BumpMixture { bumps, width, center_radius } => {
                if bumps == 0 || !(width.0 > 0.0 && width.0 <= width.1) || !(center_radius >= 0.0) {
                    return Err(Error::config("bump mixture needs bumps >= 1, 0 < width.0 <= width.1"));
                }
            }
            FamilyKind::LipschitzRandom { anchors, lipschitz } => {
                if anchors == 0 || !(lipschitz >= 0.0) {
                    return Err(Error::config("lipschitz family needs anchors >= 1 and L >= 0"));
                }
            }
            FamilyKind::TrigPolynomial { degree } => {
                if degree == 0 {
                    return Err(Error::config("trig polynomial degree must be >= 1"));
                }
            }
            FamilyKind::Constant => {}
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * rng.gen::<f64>()
    }
}

/// Smooth bump with support `[0, 1)`, value 1 at 0.
pub fn bump_profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Deterministic family of fields; identical spec and space give identical output.
pub fn generate_family(space: &MetricMeasureSpace, spec: &FunctionFamilySpec) -> Result<Vec<ScalarField>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = space.len();
    let mut out = Vec::with_capacity(spec.count);
    match &spec.kind {
        FamilyKind::Constant => {
            for _ in 0..spec.count {
                out.push(ScalarField::constant(n, uniform(&mut rng, spec.amplitude)));
            }
        }
        FamilyKind::TrigPolynomial { degree } => {
            let g = space
                .periodic_grid()
                .ok_or_else(|| Error::config("trig_polynomial family needs a periodic grid"))?;
            let modes = half_space_modes(g.n_dim, *degree as i64);
            for _ in 0..spec.count {
                let mut v = vec![0.0; n];
                for m in &modes {
                    let amp = uniform(&mut rng, spec.amplitude);
                    let phase = 2.0 * PI * rng.gen::<f64>();
                    let m2: f64 = m.iter().map(|&c| (c * c) as f64).sum();
                    let a = amp / m2;
                    for (i, vi) in v.iter_mut().enumerate() {
                        let idx = g.multi_index(i);
                        let mut dot = 0i64;
                        for t in 0..g.n_dim {
                            dot += m[t] * idx[t] as i64;
                        }
                        let r = dot.rem_euclid(g.resolution as i64) as f64 / g.resolution as f64;
                        *vi += a * (2.0 * PI * r + phase).cos();
                    }
                }
                out.push(ScalarField { values: v });
            }
        }
        FamilyKind::BumpMixture { bumps, width, center_radius } => {
            let c0 = space.central_point();
            let pool: Vec<usize> = (0..n).filter(|&y| space.dist(c0, y) <= *center_radius).collect();
            for _ in 0..spec.count {
                let mut v = vec![0.0; n];
                for _ in 0..*bumps {
                    let c = pool[rng.gen_range(0..pool.len())];
                    let w = uniform(&mut rng, *width);
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    let a = sign * uniform(&mut rng, spec.amplitude);
                    for (y, vy) in v.iter_mut().enumerate() {
                        *vy += a * bump_profile(space.dist(c, y) / w);
                    }
                }
                out.push(ScalarField { values: v });
            }
        }
        FamilyKind::LipschitzRandom { anchors, lipschitz } => {
            for _ in 0..spec.count {
                let mut v = vec![f64::INFINITY; n];
                for _ in 0..*anchors {
                    let a = rng.gen_range(0..n);
                    let base = uniform(&mut rng, spec.amplitude);
                    for (y, vy) in v.iter_mut().enumerate() {
                        *vy = vy.min(base + lipschitz * space.dist(a, y));
                    }
                }
                out.push(ScalarField { values: v });
            }
        }
    }
    Ok(out)
}

/// One representative of each `{m, -m}` pair with `1 <= |m|_inf <= degree`.
fn half_space_modes(n_dim: usize, degree: i64) -> Vec<[i64; 3]> {
    let mut modes = Vec::new();
    let range = |on: bool| if on { -degree..=degree } else { 0..=0 };
    for a in range(true) {
        for b in range(n_dim > 1) {
            for c in range(n_dim > 2) {
                let m = [a, b, c];
                let first = m.iter().copied().find(|&v| v != 0);
                if matches!(first, Some(v) if v > 0) {
                    modes.push(m);
                }
            }
        }
    }
    modes
}

/// `max_{x != y} |u(x) - u(y)| / d(x, y)`; zero for a single point.
pub fn lipschitz_constant(space: &MetricMeasureSpace, field: &ScalarField) -> Result<f64> {
    field.check_on(space)?;
    let u = field.values();
    let mut best = 0.0f64;
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            best = best.max((u[x] - u[y]).abs() / space.dist(x, y));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> MetricMeasureSpace {
        MetricMeasureSpace::build_periodic_grid(1, n, 1.0).unwrap()
    }

    #[test]
    fn constant_family() {
        let s = grid1(8);
        let spec = FunctionFamilySpec::new(FamilyKind::Constant, 3, (3.0, 3.0), 1);
        for f in generate_family(&s, &spec).unwrap() {
            assert!(f.values().iter().all(|&v| v == 3.0));
        }
    }

    #[test]
    fn trig_degree_one_is_a_shifted_cosine() {
        let s = grid1(8);
        let spec = FunctionFamilySpec::new(FamilyKind::TrigPolynomial { degree: 1 }, 4, (0.5, 2.0), 9);
        for f in generate_family(&s, &spec).unwrap() {
            let v = f.values();
            let mean: f64 = v.iter().sum::<f64>() / 8.0;
            assert!(mean.abs() < 1e-12);
            // projecting on cos and sin recovers amplitude A, phase phi
            let c: f64 = (0..8).map(|j| v[j] * (2.0 * PI * j as f64 / 8.0).cos()).sum::<f64>() / 4.0;
            let sn: f64 = (0..8).map(|j| v[j] * (2.0 * PI * j as f64 / 8.0).sin()).sum::<f64>() / 4.0;
            for j in 0..8 {
                let t = 2.0 * PI * j as f64 / 8.0;
                assert!((v[j] - (c * t.cos() + sn * t.sin())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trig_needs_periodic_grid() {
        let s = MetricMeasureSpace::build_point_cloud(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 1.0]).unwrap();
        let spec = FunctionFamilySpec::new(FamilyKind::TrigPolynomial { degree: 2 }, 1, (1.0, 1.0), 0);
        assert!(matches!(generate_family(&s, &spec), Err(Error::Config(_))));
    }

    #[test]
    fn families_are_deterministic() {
        let s = MetricMeasureSpace::build_periodic_grid(2, 8, 1.0).unwrap();
        for kind in [
            FamilyKind::TrigPolynomial { degree: 3 },
            FamilyKind::BumpMixture { bumps: 3, width: (0.1, 0.3), center_radius: 0.3 },
            FamilyKind::LipschitzRandom { anchors: 4, lipschitz: 2.0 },
        ] {
            let spec = FunctionFamilySpec::new(kind, 5, (0.5, 1.5), 42);
            let a = generate_family(&s, &spec).unwrap();
            let b = generate_family(&s, &spec).unwrap();
            assert_eq!(a, b);
            let bits: Vec<u64> = a.iter().flat_map(|f| f.values().iter().map(|v| v.to_bits())).collect();
            let bits2: Vec<u64> = b.iter().flat_map(|f| f.values().iter().map(|v| v.to_bits())).collect();
            assert_eq!(bits, bits2);
        }
    }

    #[test]
    fn trig_2d_has_zero_mean() {
        let s = MetricMeasureSpace::build_periodic_grid(2, 16, 1.0).unwrap();
        let spec = FunctionFamilySpec::new(FamilyKind::TrigPolynomial { degree: 3 }, 4, (0.5, 1.5), 3);
        for f in generate_family(&s, &spec).unwrap() {
            assert!(f.values().iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn lipschitz_examples() {
        let two = MetricMeasureSpace::build_point_cloud(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap();
        let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(lipschitz_constant(&two, &u).unwrap(), 2.0);
        assert_eq!(lipschitz_constant(&two, &ScalarField::constant(2, 4.0)).unwrap(), 0.0);
        // sawtooth on the torus: the jump across the wrap dominates, slope (N-1)h / h
        let s = grid1(8);
        let saw = ScalarField::new((0..8).map(|j| j as f64 / 8.0).collect()).unwrap();
        assert!((lipschitz_constant(&s, &saw).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_random_family_respects_constant() {
        let s = MetricMeasureSpace::build_periodic_grid(1, 32, 1.0).unwrap();
        let spec = FunctionFamilySpec::new(FamilyKind::LipschitzRandom { anchors: 5, lipschitz: 3.0 }, 6, (0.0, 1.0), 8);
        for f in generate_family(&s, &spec).unwrap() {
            assert!(lipschitz_constant(&s, &f).unwrap() <= 3.0 + 1e-12);
        }
    }
}
