//! Finite abelian groups presented as direct products of cyclic groups.
//!
//! A group `Z_{n1} x ... x Z_{nm}` is described by its list of moduli. Elements
//! are residue vectors. Every element also has a dense *index* in
//! `0..order`, the mixed-radix value of its residues with the first factor most
//! significant; words pack nits as these indices.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite abelian group `Z_{n1} x ... x Z_{nm}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroup", into = "RawGroup")]
pub struct GroupSpec {
    moduli: Vec<u32>,
    order: u64,
    exponent: u64,
}

#[derive(Serialize, Deserialize)]
struct RawGroup {
    moduli: Vec<u32>,
}

impl TryFrom<RawGroup> for GroupSpec {
    type Error = Error;

    fn try_from(raw: RawGroup) -> Result<Self> {
        GroupSpec::new(raw.moduli)
    }
}

impl From<GroupSpec> for RawGroup {
    fn from(g: GroupSpec) -> Self {
        RawGroup { moduli: g.moduli }
    }
}

/// An element of a [`GroupSpec`], one residue per cyclic factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElem {
    pub residues: Vec<u32>,
}

impl GroupElem {
    pub fn new(residues: Vec<u32>) -> Self {
        GroupElem { residues }
    }
}

impl GroupSpec {
    pub fn new(moduli: Vec<u32>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidGroup("at least one cyclic factor is required".into()));
        }
        let mut order: u64 = 1;
        let mut exponent: u64 = 1;
        for (i, &n) in moduli.iter().enumerate() {
            if n < 2 {
                return Err(Error::InvalidGroup(format!(
                    "modulus {i} is {n}; every modulus must be at least 2"
                )));
            }
            order = order
                .checked_mul(n as u64)
                .filter(|&o| o <= u32::MAX as u64)
                .ok_or_else(|| Error::InvalidGroup("group order exceeds 2^32 - 1".into()))?;
            exponent = exponent.lcm(&(n as u64));
        }
        Ok(GroupSpec {
            moduli,
            order,
            exponent,
        })
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: u32) -> Result<Self> {
        GroupSpec::new(vec![n])
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Least common multiple of the moduli.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Least positive `n` with `n * x = 0` for every element; equal to the exponent.
    pub fn characteristic(&self) -> u64 {
        self.exponent
    }

    pub fn is_single_factor(&self) -> bool {
        self.moduli.len() == 1
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem::new(vec![0; self.moduli.len()])
    }

    pub fn elem(&self, residues: Vec<u32>) -> Result<GroupElem> {
        let e = GroupElem::new(residues);
        self.check(&e)?;
        Ok(e)
    }

    pub fn check(&self, e: &GroupElem) -> Result<()> {
        if e.residues.len() != self.moduli.len() {
            return Err(Error::InvalidElement(format!(
                "element has {} residues, group has {} factors",
                e.residues.len(),
                self.moduli.len()
            )));
        }
        for (i, (&r, &n)) in e.residues.iter().zip(&self.moduli).enumerate() {
            if r >= n {
                return Err(Error::InvalidElement(format!(
                    "residue {i} is {r}, outside Z_{n}"
                )));
            }
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElem, b: &GroupElem) -> Result<GroupElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(GroupElem::new(
            a.residues
                .iter()
                .zip(&b.residues)
                .zip(&self.moduli)
                .map(|((&x, &y), &n)| (x + y) % n)
                .collect(),
        ))
    }

    pub fn neg(&self, a: &GroupElem) -> Result<GroupElem> {
        self.check(a)?;
        Ok(GroupElem::new(
            a.residues
                .iter()
                .zip(&self.moduli)
                .map(|(&x, &n)| (n - x) % n)
                .collect(),
        ))
    }

    pub fn sub(&self, a: &GroupElem, b: &GroupElem) -> Result<GroupElem> {
        self.add(a, &self.neg(b)?)
    }

    /// `k * a`, the k-fold sum of `a` with itself.
    pub fn scale(&self, k: u64, a: &GroupElem) -> Result<GroupElem> {
        self.check(a)?;
        Ok(GroupElem::new(
            a.residues
                .iter()
                .zip(&self.moduli)
                .map(|(&x, &n)| ((x as u64 * (k % n as u64)) % n as u64) as u32)
                .collect(),
        ))
    }

    /// Dense index of an element in `0..order`.
    pub fn index_of(&self, e: &GroupElem) -> Result<u32> {
        self.check(e)?;
        let mut idx: u64 = 0;
        for (&r, &n) in e.residues.iter().zip(&self.moduli) {
            idx = idx * n as u64 + r as u64;
        }
        Ok(idx as u32)
    }

    pub fn elem_at(&self, index: u32) -> Result<GroupElem> {
        if index as u64 >= self.order {
            return Err(Error::InvalidElement(format!(
                "index {index} outside a group of order {}",
                self.order
            )));
        }
        Ok(GroupElem::new(self.residues_of(index)))
    }

    pub(crate) fn residues_of(&self, mut index: u32) -> Vec<u32> {
        let mut out = vec![0; self.moduli.len()];
        for (slot, &n) in out.iter_mut().zip(&self.moduli).rev() {
            *slot = index % n;
            index /= n;
        }
        out
    }

    /// Group sum on dense indices. Inputs must be valid indices.
    pub fn add_index(&self, a: u32, b: u32) -> u32 {
        if let [n] = self.moduli[..] {
            return (a + b) % n;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut weight = 1u32;
        for &n in self.moduli.iter().rev() {
            out += ((a % n + b % n) % n) * weight;
            a /= n;
            b /= n;
            weight = weight.wrapping_mul(n);
        }
        out
    }

    pub fn neg_index(&self, a: u32) -> u32 {
        if let [n] = self.moduli[..] {
            return (n - a) % n;
        }
        let mut a = a;
        let mut out = 0u32;
        let mut weight = 1u32;
        for &n in self.moduli.iter().rev() {
            out += ((n - a % n) % n) * weight;
            a /= n;
            weight = weight.wrapping_mul(n);
        }
        out
    }

    pub fn sub_index(&self, a: u32, b: u32) -> u32 {
        self.add_index(a, self.neg_index(b))
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElem> + '_ {
        (0..self.order as u32).map(|i| GroupElem::new(self.residues_of(i)))
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32) -> GroupSpec {
        GroupSpec::cyclic(n).unwrap()
    }

    #[test]
    fn add_examples() {
        let g = z(3);
        let two = g.elem(vec![2]).unwrap();
        assert_eq!(g.add(&two, &two).unwrap().residues, vec![1]);
        for x in g.elements() {
            assert_eq!(g.add(&g.identity(), &x).unwrap(), x);
        }
        let g23 = GroupSpec::new(vec![2, 3]).unwrap();
        let a = g23.elem(vec![1, 2]).unwrap();
        assert_eq!(g23.add(&a, &a).unwrap().residues, vec![0, 1]);
    }

    #[test]
    fn sub_examples() {
        let g = z(3);
        let zero = g.identity();
        let one = g.elem(vec![1]).unwrap();
        assert_eq!(g.sub(&zero, &one).unwrap().residues, vec![2]);
        for x in g.elements() {
            assert_eq!(g.sub(&x, &x).unwrap(), zero);
        }
        let g5 = z(5);
        let r = g5
            .sub(&g5.elem(vec![1]).unwrap(), &g5.elem(vec![3]).unwrap())
            .unwrap();
        assert_eq!(r.residues, vec![3]);
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(z(2).characteristic(), 2);
        assert_eq!(z(3).characteristic(), 3);
        assert_eq!(GroupSpec::new(vec![2, 3]).unwrap().characteristic(), 6);
    }

    /// Exhaustive oracle: least n with n*x = e for all x, found by counting up.
    fn brute_characteristic(g: &GroupSpec) -> u64 {
        (1..=g.order())
            .find(|&n| g.elements().all(|x| g.scale(n, &x).unwrap() == g.identity()))
            .unwrap()
    }

    #[test]
    fn characteristic_matches_brute_force() {
        for moduli in [vec![2, 3], vec![4, 6], vec![2, 2, 2], vec![9], vec![3, 5, 2]] {
            let g = GroupSpec::new(moduli).unwrap();
            assert_eq!(g.characteristic(), brute_characteristic(&g), "{g}");
        }
    }

    #[test]
    fn group_laws_exhaustive() {
        for moduli in [vec![2], vec![3], vec![7], vec![2, 3], vec![4, 2], vec![2, 2, 5], vec![10, 10]] {
            let g = GroupSpec::new(moduli).unwrap();
            assert!(g.order() <= 100);
            let els: Vec<_> = g.elements().collect();
            let e = g.identity();
            for a in &els {
                assert_eq!(g.add(a, &e).unwrap(), *a);
                assert_eq!(g.add(a, &g.neg(a).unwrap()).unwrap(), e);
                for b in &els {
                    let ab = g.add(a, b).unwrap();
                    assert_eq!(ab, g.add(b, a).unwrap());
                    assert_eq!(g.sub(&ab, b).unwrap(), *a);
                    let ia = g.index_of(a).unwrap();
                    let ib = g.index_of(b).unwrap();
                    assert_eq!(g.add_index(ia, ib), g.index_of(&ab).unwrap());
                    for c in &els {
                        assert_eq!(
                            g.add(&ab, c).unwrap(),
                            g.add(a, &g.add(b, c).unwrap()).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn exponent_annihilates_everything() {
        for moduli in [vec![100, 100], vec![7, 11, 13], vec![2, 4, 8, 16]] {
            let g = GroupSpec::new(moduli).unwrap();
            assert!(g.order() <= 10_000);
            for x in g.elements() {
                assert_eq!(g.scale(g.characteristic(), &x).unwrap(), g.identity());
            }
            assert_eq!(g.order() % g.exponent(), 0);
        }
    }

    #[test]
    fn index_round_trip() {
        let g = GroupSpec::new(vec![3, 4, 5]).unwrap();
        for i in 0..g.order() as u32 {
            assert_eq!(g.index_of(&g.elem_at(i).unwrap()).unwrap(), i);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GroupSpec::new(vec![]).is_err());
        assert!(GroupSpec::new(vec![3, 1]).is_err());
        let g = z(3);
        assert!(matches!(
            g.add(&GroupElem::new(vec![3]), &g.identity()),
            Err(Error::InvalidElement(_))
        ));
        assert!(g.add(&GroupElem::new(vec![0, 0]), &g.identity()).is_err());
    }

    #[test]
    fn serde_form() {
        let g = z(3);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"moduli":[3]}"#);
        let back: GroupSpec = serde_json::from_str(r#"{"moduli":[2,3]}"#).unwrap();
        assert_eq!(back.order(), 6);
        assert!(serde_json::from_str::<GroupSpec>(r#"{"moduli":[1]}"#).is_err());
    }
}
