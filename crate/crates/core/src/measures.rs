//! Finitely additive measures of bounded variation on the interval algebra:
//! a step density against Lebesgue length plus finitely many one-sided atoms.
//!
//! A one-sided atom at `t` charges a cell exactly when the cell contains a
//! punctured neighbourhood of `t` on its side. Such an atom vanishes on
//! every length-zero cell, so every measure here is weakly absolutely
//! continuous with respect to length, yet it can concentrate mass "just
//! before" or "just after" a switching time of the kernels. Two-sided point
//! masses are not representable on purpose.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Cell, Interval, Partition};
use crate::piecewise::{PiecewiseFn, Poly, Side};
use crate::scalar::{Rat, Scalar};

/// Mass concentrated on one side of `loc`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SideAtom<S> {
    pub loc: Rat,
    pub side: Side,
    pub mass: S,
}

impl<S: Scalar> SideAtom<S> {
    pub fn new(loc: Rat, side: Side, mass: S) -> SideAtom<S> {
        SideAtom { loc, side, mass }
    }

    pub fn left(loc: Rat, mass: S) -> SideAtom<S> {
        SideAtom::new(loc, Side::Left, mass)
    }

    pub fn right(loc: Rat, mass: S) -> SideAtom<S> {
        SideAtom::new(loc, Side::Right, mass)
    }

    /// Whether the atom's one-sided neighbourhood lies inside `cell`.
    pub fn charges(&self, cell: &Cell) -> bool {
        match self.side {
            Side::Left => cell.contains_left_of(&self.loc),
            Side::Right => cell.contains_right_of(&self.loc),
        }
    }

    fn key(&self) -> (&Rat, Side) {
        (&self.loc, self.side)
    }
}

/// Step density (against length) plus one-sided atoms sorted by `(loc, side)`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure<S>", bound = "S: Scalar")]
pub struct FAMeasure<S> {
    density: PiecewiseFn<S>,
    atoms: Vec<SideAtom<S>>,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawMeasure<S> {
    density: PiecewiseFn<S>,
    #[serde(default)]
    atoms: Vec<SideAtom<S>>,
}

impl<S: Scalar> TryFrom<RawMeasure<S>> for FAMeasure<S> {
    type Error = Error;

    fn try_from(raw: RawMeasure<S>) -> Result<FAMeasure<S>> {
        FAMeasure::new(raw.density, raw.atoms)
    }
}

impl<S: Scalar> FAMeasure<S> {
    /// Fails if the density is not a step function, an atom has no room on
    /// its side, or two atoms share a `(loc, side)` key.
    pub fn new(density: PiecewiseFn<S>, mut atoms: Vec<SideAtom<S>>) -> Result<FAMeasure<S>> {
        if !density.is_step() {
            return Err(Error::Capacity("measure densities must be step functions".into()));
        }
        for a in &atoms {
            let ok = match a.side {
                Side::Left => a.loc > *density.t0() && a.loc <= *density.theta0(),
                Side::Right => a.loc >= *density.t0() && a.loc < *density.theta0(),
            };
            if !ok {
                return Err(Error::Boundary(format!(
                    "{} atom at {} has no neighbourhood in [{}, {}]",
                    a.side,
                    a.loc,
                    density.t0(),
                    density.theta0()
                )));
            }
            if !a.mass.to_f64().is_finite() {
                return Err(Error::Invalid("non-finite atom mass".into()));
            }
        }
        atoms.sort_by(|a, b| a.key().cmp(&b.key()));
        if atoms.windows(2).any(|w| w[0].key() == w[1].key()) {
            return Err(Error::Invalid("duplicate atom location and side".into()));
        }
        Ok(FAMeasure { density, atoms })
    }

    /// The zero measure on `[t0, theta0]`.
    pub fn zero(t0: Rat, theta0: Rat) -> Result<FAMeasure<S>> {
        FAMeasure::new(PiecewiseFn::zero(t0, theta0)?, Vec::new())
    }

    /// A single atom of the given mass.
    pub fn atom(t0: Rat, theta0: Rat, loc: Rat, side: Side, mass: S) -> Result<FAMeasure<S>> {
        FAMeasure::new(PiecewiseFn::zero(t0, theta0)?, vec![SideAtom::new(loc, side, mass)])
    }

    /// `f * η`, the measure `L ↦ ∫_L f dη`.
    pub fn indefinite(f: &PiecewiseFn<S>) -> Result<FAMeasure<S>> {
        if !f.is_step() {
            return Err(Error::Capacity("indefinite integrals are only formed for step densities".into()));
        }
        FAMeasure::new(f.clone(), Vec::new())
    }

    pub fn density(&self) -> &PiecewiseFn<S> {
        &self.density
    }

    pub fn atoms(&self) -> &[SideAtom<S>] {
        &self.atoms
    }

    pub fn t0(&self) -> &Rat {
        self.density.t0()
    }

    pub fn theta0(&self) -> &Rat {
        self.density.theta0()
    }

    pub fn domain(&self) -> Interval {
        self.density.domain()
    }

    /// `α·μ + β·ν`
    pub fn lin_comb(alpha: &S, mu: &Self, beta: &S, nu: &Self) -> Result<Self> {
        let density = PiecewiseFn::lin_comb(alpha, &mu.density, beta, &nu.density)?;
        let mut atoms: Vec<SideAtom<S>> = Vec::with_capacity(mu.atoms.len() + nu.atoms.len());
        let scaled = mu.atoms.iter().map(|a| (a, alpha)).chain(nu.atoms.iter().map(|a| (a, beta)));
        for (a, k) in scaled {
            let m = k.clone() * a.mass.clone();
            match atoms.iter_mut().find(|b| b.key() == a.key()) {
                Some(b) => b.mass = b.mass.clone() + m,
                None => atoms.push(SideAtom::new(a.loc.clone(), a.side, m)),
            }
        }
        atoms.retain(|a| !a.mass.is_zero());
        FAMeasure::new(density, atoms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        FAMeasure::lin_comb(&S::one(), self, &S::one(), other)
    }

    pub fn scale(&self, alpha: &S) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| SideAtom::new(a.loc.clone(), a.side, alpha.clone() * a.mass.clone()))
            .filter(|a| !a.mass.is_zero())
            .collect();
        FAMeasure { density: self.density.scale(alpha), atoms }
    }

    /// `μ(cell)`
    pub fn eval_cell(&self, cell: &Cell) -> Result<S> {
        let mut total = self.density.integrate_eta(cell)?;
        for a in &self.atoms {
            if a.charges(cell) {
                total = total + a.mass.clone();
            }
        }
        Ok(total)
    }

    /// `μ(E)`
    pub fn total(&self) -> S {
        self.atoms.iter().fold(self.density.integral(), |acc, a| acc + a.mass.clone())
    }

    /// Total variation `∫|density| dη + Σ|mass|`.
    pub fn variation(&self) -> S {
        let abs = self.density.abs_step().expect("density is a step function");
        self.atoms.iter().fold(abs.integral(), |acc, a| acc + a.mass.abs())
    }

    /// Membership in the nonnegative cone.
    pub fn is_nonnegative(&self) -> bool {
        self.density.is_nonnegative_ae() && self.atoms.iter().all(|a| !a.mass.is_negative())
    }

    /// Nonnegative with total mass `b`.
    pub fn membership_xi(&self, b: &S) -> bool {
        self.is_nonnegative() && self.total().approx_eq(b)
    }

    /// `∫ u dμ = ∫ u·density dη + Σ mass · u(loc±)`.
    pub fn integral(&self, u: &PiecewiseFn<S>) -> Result<S> {
        let prod = u.multiply(&self.density)?;
        let mut total = prod.integral();
        for a in &self.atoms {
            total = total + a.mass.clone() * u.side_limit(&a.loc, a.side)?;
        }
        Ok(total)
    }

    /// Averaging operator: the step function equal to `μ(L)/η(L)` on every
    /// cell `L` of `partition` with positive length and 0 on null cells.
    pub fn averaging(&self, partition: &Partition) -> Result<PiecewiseFn<S>> {
        if !self.is_nonnegative() {
            return Err(Error::Domain("averaging needs a nonnegative measure".into()));
        }
        if *partition.domain() != self.domain() {
            return Err(Error::Domain(format!(
                "partition over {} but measure over {}",
                partition.domain(),
                self.domain()
            )));
        }
        let mut parts: Vec<(&Interval, S)> = Vec::new();
        for cell in partition.cells() {
            let len = cell.eta();
            let value = if len.is_zero() { S::zero() } else { self.eval_cell(cell)? / S::from_rat(&len) };
            parts.extend(cell.parts().iter().map(|p| (p, value.clone())));
        }
        parts.sort_by(|a, b| a.0.lo().cmp(b.0.lo()).then(b.0.lo_closed().cmp(&a.0.lo_closed())));
        let value_at = |t: &Rat| -> S {
            let idx = parts.partition_point(|(p, _)| p.lo() <= t);
            parts[..idx]
                .iter()
                .rev()
                .take(3)
                .find(|(p, _)| p.contains(t))
                .map(|(_, v)| v.clone())
                .expect("partition covers the domain")
        };
        let mut bps: Vec<Rat> = parts.iter().flat_map(|(p, _)| [p.lo().clone(), p.hi().clone()]).collect();
        bps.sort();
        bps.dedup();
        let pieces =
            bps.windows(2).map(|w| Poly::constant(value_at(&((&w[0] + &w[1]) / Rat::int(2))))).collect();
        let point_values = bps.iter().map(value_at).collect();
        Ok(PiecewiseFn::new(bps, pieces, point_values)?.coalesce())
    }

    pub fn to_f64(&self) -> FAMeasure<f64> {
        FAMeasure {
            density: self.density.to_f64(),
            atoms: self.atoms.iter().map(|a| SideAtom::new(a.loc.clone(), a.side, a.mass.to_f64())).collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for FAMeasure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FAMeasure").field("density", &self.density).field("atoms", &self.atoms).finish()
    }
}

pub fn eval_cell<S: Scalar>(mu: &FAMeasure<S>, cell: &Cell) -> Result<S> {
    mu.eval_cell(cell)
}

pub fn variation<S: Scalar>(mu: &FAMeasure<S>) -> S {
    mu.variation()
}

pub fn membership_xi<S: Scalar>(mu: &FAMeasure<S>, b: &S) -> bool {
    mu.membership_xi(b)
}

pub fn integral<S: Scalar>(u: &PiecewiseFn<S>, mu: &FAMeasure<S>) -> Result<S> {
    mu.integral(u)
}

pub fn indefinite<S: Scalar>(f: &PiecewiseFn<S>) -> Result<FAMeasure<S>> {
    FAMeasure::indefinite(f)
}

pub fn averaging<S: Scalar>(mu: &FAMeasure<S>, partition: &Partition) -> Result<PiecewiseFn<S>> {
    mu.averaging(partition)
}
