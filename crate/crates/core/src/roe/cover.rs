use serde::Serialize;

use super::space::{CoarseSpace, SpaceKind};
use crate::commdim::cube_family_sets;
use crate::error::{Error, Result};

/// Families 𝒰^(0), …, 𝒰^(n) whose union covers the space. `separation` is
/// the least distance between distinct sets of one family (None when no
/// family has two sets), so every family is s-discrete for s < separation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteCover {
    families: Vec<Vec<Vec<usize>>>,
    separation: Option<u64>,
    diameter_bound: u64,
}

impl DiscreteCover {
    /// Validates nonempty in-range sets and coverage; measures separation and
    /// diameters by enumeration.
    pub fn new(space: &CoarseSpace, families: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::InvalidInput("cover needs at least one family".into()));
        }
        let families: Vec<Vec<Vec<usize>>> = families
            .into_iter()
            .map(|f| {
                f.into_iter()
                    .map(|mut s| {
                        s.sort_unstable();
                        s.dedup();
                        s
                    })
                    .collect()
            })
            .collect();
        let mut covered = vec![false; space.len()];
        for (i, fam) in families.iter().enumerate() {
            for (u, set) in fam.iter().enumerate() {
                if set.is_empty() {
                    return Err(Error::InvalidInput(format!("family {i}, set {u} is empty")));
                }
                for &x in set {
                    if x >= space.len() {
                        return Err(Error::InvalidInput(format!("family {i}, set {u}: point {x} outside the space")));
                    }
                    covered[x] = true;
                }
            }
        }
        if let Some(x) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidInput(format!("point {x} is not covered")));
        }
        let mut separation: Option<u64> = None;
        for fam in &families {
            for (u, a) in fam.iter().enumerate() {
                for b in &fam[u + 1..] {
                    let d = space.set_distance(a, b);
                    separation = Some(separation.map_or(d, |s| s.min(d)));
                }
            }
        }
        let diameter_bound = families.iter().flatten().map(|s| space.fin().diameter(s)).max().unwrap_or(0);
        Ok(DiscreteCover {
            families,
            separation,
            diameter_bound,
        })
    }

    pub fn families(&self) -> &[Vec<Vec<usize>>] {
        &self.families
    }

    /// n, with n + 1 families.
    pub fn n(&self) -> usize {
        self.families.len() - 1
    }

    pub fn separation(&self) -> Option<u64> {
        self.separation
    }

    pub fn diameter_bound(&self) -> u64 {
        self.diameter_bound
    }

    /// Every family is s-discrete: distinct same-family sets lie at distance > s.
    pub fn is_discrete(&self, s: u64) -> bool {
        self.separation.is_none_or(|d| d > s)
    }
}

/// Intervals of length 2R on {0..len} alternating between two families:
/// each family is 2R-discrete (gaps of 2R + 1), diameters 2R − 1.
pub fn cover_z(space: &CoarseSpace, big_r: usize) -> Result<DiscreteCover> {
    if space.kind() != SpaceKind::ZInterval {
        return Err(Error::InvalidInput("cover_z needs a Z-interval".into()));
    }
    cover_zd(space, big_r)
}

/// d + 1 families of ℓ¹ bricks of side 2R·d and period 2R(d+1), family t
/// shifted by 2R·t along the diagonal; each family 2R-discrete. For d = 1
/// this is the alternating interval cover.
pub fn cover_zd(space: &CoarseSpace, big_r: usize) -> Result<DiscreteCover> {
    if big_r == 0 {
        return Err(Error::InvalidInput("R must be ≥ 1".into()));
    }
    let (d, side) = match space.kind() {
        SpaceKind::ZInterval => (1, space.len()),
        SpaceKind::Grid { d, side } => (d, side),
        SpaceKind::Explicit => return Err(Error::InvalidInput("brick covers need a Z-interval or a grid".into())),
    };
    if d > 1 && side < 2 * big_r * (d + 1) {
        return Err(Error::InvalidInput(format!(
            "box side {side} is smaller than one brick period {}",
            2 * big_r * (d + 1)
        )));
    }
    let mut families = vec![Vec::new(); d + 1];
    for (t, set) in cube_family_sets(d, side, big_r)? {
        families[t].push(set);
    }
    // On a short range a family may be empty; it still counts as a family
    // (h^(i) ≡ 0 there).
    DiscreteCover::new(space, families)
}

/// The shipped cover at scale R for a Z-interval or grid.
pub fn shipped_cover(space: &CoarseSpace, big_r: usize) -> Result<DiscreteCover> {
    match space.kind() {
        SpaceKind::ZInterval => cover_z(space, big_r),
        _ => cover_zd(space, big_r),
    }
}
