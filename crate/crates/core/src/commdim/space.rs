use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite metric space with an integer distance matrix; `scale` converts one
/// integer unit into the real metric (e.g. 1/(N−1) for N points on [0,1]).
#[derive(Debug, Clone, PartialEq)]
pub struct FinSpace {
    points: Vec<i64>,
    dist: Vec<Vec<u64>>,
    scale: f64,
}

impl FinSpace {
    /// Validates symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality (exactly, in integers).
    pub fn new(points: Vec<i64>, dist: Vec<Vec<u64>>, scale: f64) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty space".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
        }
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(crate::error::dim_err(format!("{n}x{n} distance matrix"), "ragged or wrong size"));
        }
        for i in 0..n {
            if dist[i][i] != 0 {
                return Err(Error::InvalidInput(format!("d({i},{i}) must be 0")));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidInput(format!("distance not symmetric at ({i},{j})")));
                }
                if i != j && dist[i][j] == 0 {
                    return Err(Error::InvalidInput(format!("distinct points {i},{j} at distance 0")));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if dist[i][j] > dist[i][k] + dist[k][j] {
                        return Err(Error::InvalidInput(format!("triangle inequality fails for ({i},{k},{j})")));
                    }
                }
            }
        }
        Ok(FinSpace { points, dist, scale })
    }

    fn from_metric(n: usize, scale: f64, d: impl Fn(usize, usize) -> u64) -> Self {
        FinSpace {
            points: (0..n as i64).collect(),
            dist: (0..n).map(|i| (0..n).map(|j| d(i, j)).collect()).collect(),
            scale,
        }
    }

    /// {0, …, n−1} with |i − j|.
    pub fn path(n: usize) -> Self {
        Self::from_metric(n, 1.0, |i, j| i.abs_diff(j) as u64)
    }

    /// n equally spaced points of [0, 1].
    pub fn unit_interval(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("need at least 2 points".into()));
        }
        Ok(Self::from_metric(n, 1.0 / (n - 1) as f64, |i, j| i.abs_diff(j) as u64))
    }

    /// Cycle Z/n with the shortest-arc metric.
    pub fn cycle(n: usize) -> Self {
        Self::from_metric(n, 1.0, |i, j| {
            let d = i.abs_diff(j);
            d.min(n - d) as u64
        })
    }

    /// {0..side}^d with the ℓ¹ metric; point index = Σ coord_t · side^t.
    pub fn grid(d: usize, side: usize) -> Self {
        let n = side.pow(d as u32);
        Self::from_metric(n, 1.0, |i, j| {
            let (mut a, mut b, mut acc) = (i, j, 0u64);
            for _ in 0..d {
                acc += (a % side).abs_diff(b % side) as u64;
                a /= side;
                b /= side;
            }
            acc
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[i64] {
        &self.points
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Integer distance.
    pub fn d(&self, i: usize, j: usize) -> u64 {
        self.dist[i][j]
    }

    /// Real distance.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j] as f64 * self.scale
    }

    /// Integer diameter of a subset.
    pub fn diameter(&self, set: &[usize]) -> u64 {
        set.iter()
            .flat_map(|&i| set.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.dist[i][j])
            .max()
            .unwrap_or(0)
    }

    /// Point of `set` with least eccentricity within the set (lowest index on
    /// ties) and that eccentricity.
    pub fn center(&self, set: &[usize]) -> (usize, u64) {
        set.iter()
            .map(|&c| (c, set.iter().map(|&x| self.dist[c][x]).max().unwrap_or(0)))
            .min_by_key(|&(c, e)| (e, c))
            .expect("nonempty set")
    }
}

/// JSON form: points as integers; dist as a matrix or a metric tag
/// ("path", "cycle", "grid:AxB…" with equal sides, "interval" for [0,1]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub points: Vec<i64>,
    pub dist: DistSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Matrix(Vec<Vec<u64>>),
    Tag(String),
}

impl SpaceSpec {
    pub fn build(&self) -> Result<FinSpace> {
        let n = self.points.len();
        let mut space = match &self.dist {
            DistSpec::Matrix(m) => FinSpace::new(self.points.clone(), m.clone(), self.scale.unwrap_or(1.0))?,
            DistSpec::Tag(tag) => {
                let s = match tag.as_str() {
                    "path" => FinSpace::path(n),
                    "cycle" => FinSpace::cycle(n),
                    "interval" => FinSpace::unit_interval(n)?,
                    t if t.starts_with("grid:") => {
                        let sides: Vec<usize> = t[5..]
                            .split('x')
                            .map(|s| s.parse().map_err(|_| Error::InvalidInput(format!("bad grid tag {t:?}"))))
                            .collect::<Result<_>>()?;
                        let side = sides[0];
                        if sides.iter().any(|&s| s != side) || side.pow(sides.len() as u32) != n {
                            return Err(Error::InvalidInput(format!(
                                "grid tag {t:?} needs equal sides and {n} = side^d points"
                            )));
                        }
                        FinSpace::grid(sides.len(), side)
                    }
                    t => return Err(Error::InvalidInput(format!("unknown metric tag {t:?}"))),
                };
                if n == 0 {
                    return Err(Error::InvalidInput("empty space".into()));
                }
                FinSpace {
                    points: self.points.clone(),
                    dist: s.dist,
                    scale: self.scale.unwrap_or(s.scale),
                }
            }
        };
        if let Some(sc) = self.scale {
            if !(sc > 0.0 && sc.is_finite()) {
                return Err(Error::InvalidInput(format!("scale must be positive, got {sc}")));
            }
            space.scale = sc;
        }
        Ok(space)
    }
}
