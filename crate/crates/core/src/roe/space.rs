use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::commdim::FinSpace;
use crate::error::{Error, Result};
use crate::numkit::{SpMatrix, ONE};

/// Bounded-geometry finite metric space: an integer metric plus its ball
/// growth b_r = max_x |B_r(x)|.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseSpace {
    space: FinSpace,
    /// growth[r] = b_r for r ≤ diameter; b_r = |X| beyond.
    growth: Vec<usize>,
    kind: SpaceKind,
}

/// Shape of the space, which decides the shipped cover constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    ZInterval,
    Grid { d: usize, side: usize },
    Explicit,
}

impl CoarseSpace {
    pub fn from_fin(space: FinSpace) -> Self {
        Self::with_kind(space, SpaceKind::Explicit)
    }

    fn with_kind(space: FinSpace, kind: SpaceKind) -> Self {
        let n = space.len();
        let diam = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| space.d(i, j)).max().unwrap_or(0);
        let mut growth = vec![0usize; diam as usize + 1];
        let mut hist = vec![0usize; diam as usize + 1];
        for x in 0..n {
            hist.iter_mut().for_each(|h| *h = 0);
            for y in 0..n {
                hist[space.d(x, y) as usize] += 1;
            }
            let mut acc = 0;
            for (r, h) in hist.iter().enumerate() {
                acc += h;
                growth[r] = growth[r].max(acc);
            }
        }
        CoarseSpace { space, growth, kind }
    }

    /// {0, …, len−1} ⊂ Z.
    pub fn z_interval(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidInput("empty interval".into()));
        }
        Ok(Self::with_kind(FinSpace::path(len), SpaceKind::ZInterval))
    }

    /// {0..side}^d ⊂ Z^d with the ℓ¹ metric.
    pub fn grid(d: usize, side: usize) -> Result<Self> {
        if d == 0 || side == 0 {
            return Err(Error::InvalidInput("grid needs d ≥ 1 and side ≥ 1".into()));
        }
        if side.checked_pow(d as u32).is_none_or(|n| n > 1 << 14) {
            return Err(Error::SizeCap {
                what: "grid points".into(),
                size: side.saturating_pow(d as u32),
                cap: 1 << 14,
            });
        }
        Ok(Self::with_kind(FinSpace::grid(d, side), SpaceKind::Grid { d, side }))
    }

    pub fn fin(&self) -> &FinSpace {
        &self.space
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn d(&self, x: usize, y: usize) -> u64 {
        self.space.d(x, y)
    }

    /// b_r.
    pub fn ball_growth(&self, r: u64) -> usize {
        self.growth.get(r as usize).copied().unwrap_or(self.len())
    }

    /// B_r(x), ascending.
    pub fn ball(&self, x: usize, r: u64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.d(x, y) <= r).collect()
    }

    /// d(x, U).
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> u64 {
        set.iter().map(|&u| self.d(x, u)).min().unwrap_or(u64::MAX)
    }

    /// B(U, s) = {x : d(x, U) ≤ s}, ascending.
    pub fn neighborhood(&self, set: &[usize], s: u64) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.dist_to_set(x, set) <= s).collect()
    }

    /// d(U, V).
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> u64 {
        a.iter().map(|&x| self.dist_to_set(x, b)).min().unwrap_or(u64::MAX)
    }
}

/// JSON form: {"z_interval": {"len": N}}, {"grid": {"d": D, "side": S}} or
/// {"matrix": [[…]]}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RoeSpaceSpec {
    ZInterval { len: usize },
    Grid { d: usize, side: usize },
    Matrix(Vec<Vec<u64>>),
}

impl RoeSpaceSpec {
    pub fn build(&self) -> Result<CoarseSpace> {
        match self {
            RoeSpaceSpec::ZInterval { len } => CoarseSpace::z_interval(*len),
            RoeSpaceSpec::Grid { d, side } => CoarseSpace::grid(*d, *side),
            RoeSpaceSpec::Matrix(m) => {
                let points = (0..m.len() as i64).collect();
                Ok(CoarseSpace::from_fin(FinSpace::new(points, m.clone(), 1.0)?))
            }
        }
    }
}

/// Finite-width matrix over a coarse space: a truncated element of the
/// uniform Roe algebra.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    space: Arc<CoarseSpace>,
    matrix: SpMatrix,
    width: u64,
    entry_bound: f64,
}

impl BandMatrix {
    /// Width and entry bound are read off the nonzero entries.
    pub fn new(space: Arc<CoarseSpace>, matrix: SpMatrix) -> Result<Self> {
        let n = space.len();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(crate::error::dim_err(
                format!("{n}x{n}"),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        matrix.check_finite()?;
        let width = matrix.iter().map(|(x, y, _)| space.d(x, y)).max().unwrap_or(0);
        let entry_bound = matrix.max_abs();
        Ok(BandMatrix {
            space,
            matrix,
            width,
            entry_bound,
        })
    }

    pub fn from_fn(space: Arc<CoarseSpace>, width: u64, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let n = space.len();
        let mut trip = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if space.d(x, y) <= width {
                    let v = f(x, y);
                    if v != Complex64::new(0.0, 0.0) {
                        trip.push((x, y, v));
                    }
                }
            }
        }
        Self::new(space.clone(), SpMatrix::from_triplets(n, n, trip))
    }

    pub fn identity(space: Arc<CoarseSpace>) -> Self {
        let n = space.len();
        Self::new(space, SpMatrix::identity(n)).expect("identity fits its space")
    }

    /// δ_x ↦ δ_{x+1} along the point order, wherever x+1 is a neighbour
    /// (the unilateral shift on a Z-interval; shift along the first axis of
    /// a grid).
    pub fn shift(space: Arc<CoarseSpace>) -> Self {
        let n = space.len();
        let trip = (0..n.saturating_sub(1)).filter(|&x| space.d(x, x + 1) == 1).map(|x| (x + 1, x, ONE));
        Self::new(space.clone(), SpMatrix::from_triplets(n, n, trip)).expect("shift fits its space")
    }

    /// Entries on d(x,y) ≤ width drawn uniformly from the square of
    /// half-side M/√2, so |α| ≤ M.
    pub fn random(space: Arc<CoarseSpace>, width: u64, m: f64, rng: &mut impl Rng) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidInput(format!("entry bound must be finite and ≥ 0, got {m}")));
        }
        let half = m / std::f64::consts::SQRT_2;
        let n = space.len();
        let mut trip = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if space.d(x, y) <= width {
                    let v = Complex64::new(rng.random_range(-half..=half), rng.random_range(-half..=half));
                    trip.push((x, y, v));
                }
            }
        }
        Self::new(space, SpMatrix::from_triplets(n, n, trip))
    }

    pub fn space(&self) -> &Arc<CoarseSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &SpMatrix {
        &self.matrix
    }

    /// w(a).
    pub fn width(&self) -> u64 {
        self.width
    }

    /// M = max |α_xy|.
    pub fn entry_bound(&self) -> f64 {
        self.entry_bound
    }

    /// b(a) = b_{w(a)}.
    pub fn b(&self) -> usize {
        self.space.ball_growth(self.width)
    }

    pub fn norm(&self) -> Result<f64> {
        self.matrix.operator_norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBound {
    pub norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// ‖a‖ ≤ b(a)·M.
pub fn norm_bound_check(a: &BandMatrix) -> Result<NormBound> {
    let norm = a.norm()?;
    let bound = a.b() as f64 * a.entry_bound();
    Ok(NormBound {
        norm,
        bound,
        holds: norm <= bound + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn ball_growth_on_interval_and_grid() {
        let z = CoarseSpace::z_interval(50).unwrap();
        assert_eq!(z.ball_growth(0), 1);
        assert_eq!(z.ball_growth(1), 3);
        assert_eq!(z.ball_growth(3), 7);
        assert_eq!(z.ball_growth(1000), 50);
        let g = CoarseSpace::grid(2, 10).unwrap();
        // ℓ¹ ball in Z²: 2r² + 2r + 1.
        for r in 0..4u64 {
            assert_eq!(g.ball_growth(r), (2 * r * r + 2 * r + 1) as usize);
        }
    }

    #[test]
    fn ball_growth_is_monotone() {
        let g = CoarseSpace::grid(3, 4).unwrap();
        let b: Vec<usize> = (0..12).map(|r| g.ball_growth(r)).collect();
        assert_eq!(b[0], 1);
        assert!(b.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_meets_bound_with_equality() {
        let s = Arc::new(CoarseSpace::z_interval(10).unwrap());
        let r = norm_bound_check(&BandMatrix::identity(s)).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-12);
        assert_eq!(r.bound, 1.0);
        assert!(r.holds);
    }

    #[test]
    fn shift_on_path() {
        let s = Arc::new(CoarseSpace::z_interval(50).unwrap());
        let a = BandMatrix::shift(s);
        assert_eq!(a.width(), 1);
        assert_eq!(a.b(), 3);
        let r = norm_bound_check(&a).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-10);
        assert_eq!(r.bound, 3.0);
    }

    #[test]
    fn grid_shift_skips_row_ends() {
        let s = Arc::new(CoarseSpace::grid(2, 4).unwrap());
        let a = BandMatrix::shift(s);
        assert_eq!(a.matrix().nnz(), 12);
        assert_eq!(a.width(), 1);
    }

    #[test]
    fn random_width_two_on_grid() {
        let s = Arc::new(CoarseSpace::grid(2, 10).unwrap());
        for i in 0..5 {
            let a = BandMatrix::random(s.clone(), 2, 1.0, &mut stream(0, i)).unwrap();
            assert_eq!(a.width(), 2);
            assert!(a.entry_bound() <= 1.0);
            assert!(norm_bound_check(&a).unwrap().holds);
        }
    }

    #[test]
    fn spec_json_forms() {
        let z: RoeSpaceSpec = serde_json::from_str(r#"{"z_interval":{"len":8}}"#).unwrap();
        assert_eq!(z.build().unwrap().kind(), SpaceKind::ZInterval);
        let g: RoeSpaceSpec = serde_json::from_str(r#"{"grid":{"d":2,"side":3}}"#).unwrap();
        assert_eq!(g.build().unwrap().len(), 9);
        let m: RoeSpaceSpec = serde_json::from_str(r#"{"matrix":[[0,1,2],[1,0,1],[2,1,0]]}"#).unwrap();
        assert_eq!(m.build().unwrap().ball_growth(1), 3);
        let bad: RoeSpaceSpec = serde_json::from_str(r#"{"matrix":[[0,1,5],[1,0,1],[5,1,0]]}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn band_matrix_rejects_wrong_size() {
        let s = Arc::new(CoarseSpace::z_interval(4).unwrap());
        assert!(BandMatrix::new(s, SpMatrix::identity(3)).is_err());
    }
}
