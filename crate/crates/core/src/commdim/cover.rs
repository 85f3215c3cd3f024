use serde::{Deserialize, Serialize};

use super::space::FinSpace;
use crate::error::{Error, Result};

/// Cover of a finite space by colored subsets; same-colored sets are
/// disjoint and every set has diameter ≤ `diameter_bound` (integer units).
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredCover {
    sets: Vec<Vec<usize>>,
    colors: Vec<usize>,
    color_count: usize,
    diameter_bound: u64,
}

impl ColoredCover {
    /// Validates covering, same-color disjointness and nonempty sets; the
    /// diameter bound is the largest set diameter.
    pub fn new(space: &FinSpace, sets: Vec<Vec<usize>>, colors: Vec<usize>) -> Result<Self> {
        if sets.len() != colors.len() {
            return Err(crate::error::dim_err(format!("{} colors", sets.len()), colors.len()));
        }
        let sets: Vec<Vec<usize>> = sets.into_iter().map(normalize).collect();
        check_sets(space, &sets)?;
        let mut owner: Vec<Vec<Option<usize>>> = Vec::new();
        let color_count = colors.iter().max().map_or(0, |m| m + 1);
        owner.resize(color_count, vec![None; space.len()]);
        for (u, (set, &c)) in sets.iter().zip(&colors).enumerate() {
            for &x in set {
                if let Some(v) = owner[c][x] {
                    return Err(Error::InvalidInput(format!("sets {v} and {u} share color {c} and point {x}")));
                }
                owner[c][x] = Some(u);
            }
        }
        let diameter_bound = sets.iter().map(|s| space.diameter(s)).max().unwrap_or(0);
        Ok(ColoredCover {
            sets,
            colors,
            color_count,
            diameter_bound,
        })
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color_count(&self) -> usize {
        self.color_count
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn diameter_bound(&self) -> u64 {
        self.diameter_bound
    }

    /// Largest number of sets containing a single point.
    pub fn multiplicity(&self, space: &FinSpace) -> usize {
        let mut count = vec![0usize; space.len()];
        for s in &self.sets {
            for &x in s {
                count[x] += 1;
            }
        }
        count.into_iter().max().unwrap_or(0)
    }

    pub fn to_spec(&self) -> CoverSpec {
        CoverSpec {
            sets: self.sets.clone(),
            colors: Some(self.colors.clone()),
        }
    }
}

fn normalize(mut s: Vec<usize>) -> Vec<usize> {
    s.sort_unstable();
    s.dedup();
    s
}

fn check_sets(space: &FinSpace, sets: &[Vec<usize>]) -> Result<()> {
    let mut covered = vec![false; space.len()];
    for (u, s) in sets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::InvalidInput(format!("set {u} is empty")));
        }
        for &x in s {
            if x >= space.len() {
                return Err(Error::InvalidInput(format!("set {u} contains point {x} outside the space")));
            }
            covered[x] = true;
        }
    }
    if let Some(x) = covered.iter().position(|&c| !c) {
        return Err(Error::InvalidInput(format!("point {x} is covered by no set")));
    }
    Ok(())
}

/// Colors the overlap graph greedily in input order: each set takes the least
/// color not used by an earlier set it meets.
pub fn greedy_color(space: &FinSpace, sets: Vec<Vec<usize>>) -> Result<ColoredCover> {
    let sets: Vec<Vec<usize>> = sets.into_iter().map(normalize).collect();
    check_sets(space, &sets)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); space.len()];
    for (u, s) in sets.iter().enumerate() {
        for &x in s {
            members[x].push(u);
        }
    }
    let mut colors: Vec<usize> = Vec::with_capacity(sets.len());
    for (u, s) in sets.iter().enumerate() {
        let mut used: Vec<usize> = s
            .iter()
            .flat_map(|&x| members[x].iter().copied())
            .filter(|&v| v < u)
            .map(|v| colors[v])
            .collect();
        used.sort_unstable();
        used.dedup();
        let c = used.iter().enumerate().find(|&(i, &c)| i != c).map_or(used.len(), |(i, _)| i);
        colors.push(c);
    }
    ColoredCover::new(space, sets, colors)
}

/// Intervals [i·s, i·s + 2s − 1] of a path, clipped at the end; consecutive
/// intervals overlap in s points.
pub fn interval_sets(n: usize, stride: usize) -> Result<Vec<Vec<usize>>> {
    if stride == 0 || n == 0 {
        return Err(Error::InvalidInput("stride and length must be positive".into()));
    }
    let mut sets = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + 2 * stride - 1).min(n - 1);
        sets.push((start..=end).collect());
        if end == n - 1 {
            break;
        }
        start += stride;
    }
    Ok(sets)
}

/// Stride for an interval cover of n equally spaced points of [0, 1] whose
/// sets have length about `mesh`.
pub fn stride_for_mesh(n: usize, mesh: f64) -> Result<usize> {
    if !(mesh > 0.0 && mesh <= 1.0) || n < 2 {
        return Err(Error::InvalidInput(format!("mesh must lie in (0, 1], got {mesh}")));
    }
    Ok(((mesh * (n - 1) as f64 / 2.0).round() as usize).max(1))
}

/// Arcs {i·s, …, i·s + 2s − 1} (mod n) of a cycle.
pub fn arc_sets(n: usize, stride: usize) -> Result<Vec<Vec<usize>>> {
    if stride == 0 || 2 * stride > n {
        return Err(Error::InvalidInput(format!("need 1 ≤ stride ≤ n/2, got {stride} for n = {n}")));
    }
    let count = n.div_ceil(stride);
    Ok((0..count)
        .map(|i| (0..2 * stride).map(|t| (i * stride + t) % n).collect())
        .collect())
}

/// Staggered bricks of size (s + o)² on a side×side grid: row j starts at
/// height j·s, brick i of row j at i·s + (j mod 2)·s/2, clipped to the grid.
/// With o < s/2 every point lies in at most three bricks. Returned in three
/// classes of pairwise disjoint bricks, so greedy coloring uses 3 colors.
pub fn brick_sets(side: usize, s: usize, o: usize) -> Result<Vec<Vec<usize>>> {
    if s < 2 || s % 2 != 0 || o == 0 || 2 * o >= s {
        return Err(Error::InvalidInput(format!("need even s ≥ 2 and 0 < o < s/2, got s={s}, o={o}")));
    }
    let w = (s + o) as i64;
    let (side_i, s_i) = (side as i64, s as i64);
    let mut classes: [Vec<Vec<usize>>; 3] = Default::default();
    for j in 0..=(side_i / s_i) {
        let y0 = j * s_i;
        if y0 >= side_i {
            break;
        }
        for i in -1..=(side_i / s_i) {
            let x0 = i * s_i + (j % 2) * s_i / 2;
            let xs = x0.max(0)..(x0 + w).min(side_i);
            let ys = y0..(y0 + w).min(side_i);
            if xs.is_empty() {
                continue;
            }
            let set: Vec<usize> = ys
                .flat_map(|y| xs.clone().map(move |x| (x + side_i * y) as usize))
                .collect();
            let u = 2 * i + (j % 2);
            classes[u.rem_euclid(3) as usize].push(set);
        }
    }
    Ok(classes.into_iter().flatten().collect())
}

/// d + 1 families of cubes on {0..side}^d (ℓ¹): family t holds cubes of side
/// 2r·d with period 2r(d+1), shifted by t·2r along the diagonal. Cubes of one
/// family are at ℓ¹ distance > 2r, and the families cover. Returned family by
/// family; empty clipped cubes are dropped.
pub fn cube_family_sets(d: usize, side: usize, r: usize) -> Result<Vec<(usize, Vec<usize>)>> {
    if d == 0 || r == 0 {
        return Err(Error::InvalidInput("need d ≥ 1 and r ≥ 1".into()));
    }
    let period = 2 * r * (d + 1);
    let mut out = Vec::new();
    for t in 0..=d {
        let shift = 2 * r * t;
        let mut cells: std::collections::BTreeMap<Vec<i64>, Vec<usize>> = Default::default();
        let n = side.pow(d as u32);
        for idx in 0..n {
            let mut rem = idx;
            let mut key = Vec::with_capacity(d);
            let mut inside = true;
            for _ in 0..d {
                let x = (rem % side) as i64;
                rem /= side;
                let rel = x - shift as i64;
                let cell = rel.div_euclid(period as i64);
                if rel.rem_euclid(period as i64) >= (2 * r * d) as i64 {
                    inside = false;
                    break;
                }
                key.push(cell);
            }
            if inside {
                cells.entry(key).or_default().push(idx);
            }
        }
        out.extend(cells.into_values().map(|s| (t, s)));
    }
    Ok(out)
}

/// JSON form of a cover: sets as point-index lists, optional colors (greedy
/// coloring when absent).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverSpec {
    pub sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<Vec<usize>>,
}

impl CoverSpec {
    pub fn build(&self, space: &FinSpace) -> Result<ColoredCover> {
        match &self.colors {
            Some(c) => ColoredCover::new(space, self.sets.clone(), c.clone()),
            None => greedy_color(space, self.sets.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Chromatic number of the overlap graph by exhaustive backtracking.
    fn chromatic_number(sets: &[Vec<usize>]) -> usize {
        let n = sets.len();
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|u| (0..n).map(|v| u != v && sets[u].iter().any(|x| sets[v].contains(x))).collect())
            .collect();
        fn try_k(adj: &[Vec<bool>], col: &mut Vec<usize>, k: usize) -> bool {
            let u = col.len();
            if u == adj.len() {
                return true;
            }
            for c in 0..k {
                if (0..u).all(|v| !adj[u][v] || col[v] != c) {
                    col.push(c);
                    if try_k(adj, col, k) {
                        return true;
                    }
                    col.pop();
                }
            }
            false
        }
        (1..=n).find(|&k| try_k(&adj, &mut Vec::new(), k)).unwrap_or(0)
    }

    #[test]
    fn disjoint_sets_take_one_color() {
        let p = FinSpace::path(6);
        let c = greedy_color(&p, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        assert_eq!(c.color_count(), 1);
    }

    #[test]
    fn overlapping_intervals_take_two_colors() {
        let p = FinSpace::path(20);
        let c = greedy_color(&p, interval_sets(20, 3).unwrap()).unwrap();
        assert_eq!(c.multiplicity(&p), 2);
        assert_eq!(c.color_count(), 2);
        assert_eq!(c.diameter_bound(), 5);
    }

    #[test]
    fn brick_cover_takes_three_colors() {
        let g = FinSpace::grid(2, 12);
        let sets = brick_sets(12, 4, 1).unwrap();
        let c = greedy_color(&g, sets.clone()).unwrap();
        assert_eq!(c.multiplicity(&g), 3);
        assert_eq!(c.color_count(), 3);
        assert_eq!(chromatic_number(&sets), 3);
    }

    #[test]
    fn cube_families_cover_with_d_plus_one_colors() {
        for d in 1..=3 {
            let side = if d == 3 { 7 } else { 13 };
            let g = FinSpace::grid(d, side);
            let fam = cube_family_sets(d, side, 1).unwrap();
            let (colors, sets): (Vec<usize>, Vec<Vec<usize>>) = fam.into_iter().unzip();
            let c = ColoredCover::new(&g, sets.clone(), colors).unwrap();
            assert_eq!(c.color_count(), d + 1);
            assert!(greedy_color(&g, sets).unwrap().color_count() <= d + 1);
        }
    }

    #[test]
    fn arcs_cover_cycle() {
        let cyc = FinSpace::cycle(15);
        let c = greedy_color(&cyc, arc_sets(15, 3).unwrap()).unwrap();
        assert!(c.color_count() <= 3);
    }

    #[test]
    fn non_covering_input_is_rejected() {
        let p = FinSpace::path(4);
        assert!(greedy_color(&p, vec![vec![0, 1], vec![3]]).is_err());
        assert!(ColoredCover::new(&p, vec![vec![0, 1, 2], vec![2, 3]], vec![0, 0]).is_err());
    }

    #[test]
    fn mesh_stride() {
        assert_eq!(stride_for_mesh(32, 0.125).unwrap(), 2);
        assert_eq!(stride_for_mesh(128, 0.125).unwrap(), 8);
    }
}
