//! Seeded random generators for exact test objects on `[0, 1]`.
#![allow(dead_code)]

use impulse_attain::{Cell, FAMeasure, Interval, Partition, PiecewiseFn, Poly, Rat, Side, SideAtom};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit() -> Interval {
    Interval::closed(Rat::zero(), Rat::one()).unwrap()
}

const DENOMS: [i64; 6] = [2, 3, 4, 6, 8, 12];

/// A rational in `[0, 1]` on one of a few small grids.
pub fn grid_point(rng: &mut ChaCha8Rng) -> Rat {
    let q = *DENOMS.choose(rng).unwrap();
    Rat::new(rng.gen_range(0..=q), q)
}

/// Sorted distinct points strictly inside `(0, 1)`.
pub fn interior_points(rng: &mut ChaCha8Rng, max: usize) -> Vec<Rat> {
    let n = rng.gen_range(0..=max);
    let mut pts: Vec<Rat> =
        (0..n).map(|_| grid_point(rng)).filter(|t| t.is_positive() && *t < Rat::one()).collect();
    pts.sort();
    pts.dedup();
    pts
}

pub fn small_rat(rng: &mut ChaCha8Rng, signed: bool) -> Rat {
    let q = rng.gen_range(1..=7);
    let p = if signed { rng.gen_range(-9..=9) } else { rng.gen_range(0..=9) };
    Rat::new(p, q)
}

/// Step function with arbitrary values at its breakpoints.
pub fn step_fn(rng: &mut ChaCha8Rng, signed: bool) -> PiecewiseFn<Rat> {
    let mut bps = vec![Rat::zero()];
    bps.extend(interior_points(rng, 5));
    bps.push(Rat::one());
    let pieces = (1..bps.len()).map(|_| Poly::constant(small_rat(rng, signed))).collect();
    let values = (0..bps.len()).map(|_| small_rat(rng, signed)).collect();
    PiecewiseFn::new(bps, pieces, values).unwrap()
}

/// Piecewise polynomial of degree at most `max_degree`.
pub fn poly_fn(rng: &mut ChaCha8Rng, max_degree: usize) -> PiecewiseFn<Rat> {
    let mut bps = vec![Rat::zero()];
    bps.extend(interior_points(rng, 4));
    bps.push(Rat::one());
    let pieces = (1..bps.len())
        .map(|_| {
            let deg = rng.gen_range(0..=max_degree);
            Poly::new((0..=deg).map(|_| small_rat(rng, true)).collect())
        })
        .collect();
    let values = (0..bps.len()).map(|_| small_rat(rng, true)).collect();
    PiecewiseFn::new(bps, pieces, values).unwrap()
}

/// Step density plus up to three one-sided atoms on the grid.
pub fn measure(rng: &mut ChaCha8Rng, signed: bool) -> FAMeasure<Rat> {
    let density = step_fn(rng, signed);
    let mut atoms: Vec<SideAtom<Rat>> = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let loc = grid_point(rng);
        let side =
            if loc.is_zero() || (loc < Rat::one() && rng.gen_bool(0.5)) { Side::Right } else { Side::Left };
        if atoms.iter().any(|a| a.loc == loc && a.side == side) {
            continue;
        }
        atoms.push(SideAtom::new(loc, side, small_rat(rng, signed)));
    }
    FAMeasure::new(density, atoms).unwrap()
}

/// Random finite union of intervals and points in `[0, 1]`, possibly empty.
pub fn cell(rng: &mut ChaCha8Rng) -> Cell {
    let parts = (0..rng.gen_range(0..=3))
        .filter_map(|_| {
            let (a, b) = (grid_point(rng), grid_point(rng));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            Interval::try_new(lo, hi, rng.gen_bool(0.5), rng.gen_bool(0.5))
        })
        .collect::<Vec<_>>();
    Cell::from_intervals(parts)
}

/// η-null cell: a finite set of points, biased towards grid points where
/// atoms and breakpoints live.
pub fn null_cell(rng: &mut ChaCha8Rng) -> Cell {
    Cell::points((0..rng.gen_range(0..=4)).map(|_| grid_point(rng)).collect::<Vec<_>>())
}

/// Partition of `domain` from cut points: each cut point joins the cell on
/// its left, on its right, or stands alone. With `merge`, some cells are
/// then joined into multi-part cells.
pub fn partition_of(rng: &mut ChaCha8Rng, domain: &Interval, cuts: &[Rat], merge: bool) -> Partition {
    let mut pts: Vec<Rat> = cuts.iter().filter(|t| domain.lo() < *t && *t < domain.hi()).cloned().collect();
    pts.sort();
    pts.dedup();
    if domain.is_singleton() {
        return Partition::new(vec![Cell::from(domain.clone())], domain.clone()).unwrap();
    }
    // open gaps between consecutive points, then attach each point
    let mut bounds = vec![domain.lo().clone()];
    bounds.extend(pts.iter().cloned());
    bounds.push(domain.hi().clone());
    let k = bounds.len();
    let mut pieces: Vec<Interval> = Vec::new();
    // ownership[i]: 0 = own cell, 1 = joins left gap, 2 = joins right gap
    let own: Vec<u8> = (0..k)
        .map(|i| {
            if i == 0 {
                if !domain.lo_closed() {
                    3
                } else if rng.gen_bool(0.7) {
                    2
                } else {
                    0
                }
            } else if i == k - 1 {
                if !domain.hi_closed() {
                    3
                } else if rng.gen_bool(0.7) {
                    1
                } else {
                    0
                }
            } else {
                rng.gen_range(0..3)
            }
        })
        .collect();
    for i in 0..k {
        if own[i] == 0 {
            pieces.push(Interval::point(bounds[i].clone()));
        }
        if i + 1 < k {
            let lo_closed = own[i] == 2;
            let hi_closed = own[i + 1] == 1;
            pieces
                .push(Interval::new(bounds[i].clone(), bounds[i + 1].clone(), lo_closed, hi_closed).unwrap());
        }
    }
    pieces.shuffle(rng);
    let mut cells: Vec<Vec<Interval>> = Vec::new();
    for p in pieces {
        if merge && !cells.is_empty() && rng.gen_bool(0.2) {
            let j = rng.gen_range(0..cells.len());
            cells[j].push(p);
        } else {
            cells.push(vec![p]);
        }
    }
    Partition::new(cells.into_iter().map(Cell::from_intervals).collect(), domain.clone()).unwrap()
}

pub fn partition(rng: &mut ChaCha8Rng) -> Partition {
    let cuts = interior_points(rng, 6);
    partition_of(rng, &unit(), &cuts, true)
}

/// Membership oracle: the cell seen through a fine grid of probe points,
/// including points just beside every grid value.
pub fn probe(cell: &Cell) -> Vec<bool> {
    (0..=480).map(|k| cell.contains(&Rat::new(k, 480))).collect()
}
