//! Finite Abelian groups presented as `Z(n_1) x ... x Z(n_r)`.
//!
//! The character group of `Z(n_1) x ... x Z(n_r)` is identified with the group
//! itself: the character with coordinates `h` takes the value
//! `exp(2 pi i sum_k g_k h_k / n_k)` at `g`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Upper bound on `|G|` for the exhaustive checks done at construction.
pub const MAX_ENUMERATION: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGroup")]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<u64>,
}

#[derive(Deserialize)]
struct RawGroup {
    cyclic_orders: Vec<u64>,
}

impl TryFrom<RawGroup> for FiniteAbelianGroup {
    type Error = Error;

    fn try_from(raw: RawGroup) -> Result<Self> {
        Self::new(raw.cyclic_orders)
    }
}

/// An element `g = (g_1, ..., g_r)` with `0 <= g_k < n_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(Vec<u64>);

/// A character `h` of the group, stored with the same residue bounds as an element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualCharacter(Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<u64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl DualCharacter {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// The same residues read as a group element; used when the dual is
    /// identified with the group.
    pub fn as_element(&self) -> GroupElement {
        GroupElement(self.0.clone())
    }
}

impl From<GroupElement> for DualCharacter {
    fn from(g: GroupElement) -> Self {
        DualCharacter(g.0)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn reduce(x: i128, n: u64) -> u64 {
    x.rem_euclid(n as i128) as u64
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_orders: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = cyclic_orders.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidOrder(bad));
        }
        Ok(Self { cyclic_orders })
    }

    /// The trivial group (empty product).
    pub fn trivial() -> Self {
        Self {
            cyclic_orders: Vec::new(),
        }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    pub fn cardinality(&self) -> u64 {
        self.cyclic_orders.iter().product()
    }

    /// True iff every cyclic factor has odd order, i.e. the group has no element of order 2.
    pub fn is_odd_order(&self) -> bool {
        self.cyclic_orders.iter().all(|n| n % 2 == 1)
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.cyclic_orders.iter().fold(1, |acc, &n| lcm(acc, n))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    pub fn dual_zero(&self) -> DualCharacter {
        DualCharacter(vec![0; self.rank()])
    }

    /// Builds an element from arbitrary integers, reducing each coordinate.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        self.check_len(coords.len())?;
        Ok(GroupElement(
            coords
                .iter()
                .zip(&self.cyclic_orders)
                .map(|(&c, &n)| reduce(c as i128, n))
                .collect(),
        ))
    }

    /// Builds an element from residues, rejecting out-of-range coordinates.
    pub fn try_element(&self, coords: Vec<u64>) -> Result<GroupElement> {
        let g = GroupElement(coords);
        self.check(&g)?;
        Ok(g)
    }

    pub fn character(&self, coords: &[i64]) -> Result<DualCharacter> {
        self.element(coords).map(DualCharacter::from)
    }

    pub fn try_character(&self, coords: Vec<u64>) -> Result<DualCharacter> {
        let h = DualCharacter(coords);
        self.check_dual(&h)?;
        Ok(h)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.rank() {
            return Err(Error::GroupMismatch(format!(
                "expected {} coordinates for Z{:?}, got {len}",
                self.rank(),
                self.cyclic_orders
            )));
        }
        Ok(())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.0.len() == self.rank() && g.0.iter().zip(&self.cyclic_orders).all(|(&c, &n)| c < n)
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        self.check_len(g.0.len())?;
        if !self.contains(g) {
            return Err(Error::InvalidElement {
                coords: g.0.clone(),
                orders: self.cyclic_orders.clone(),
            });
        }
        Ok(())
    }

    pub fn check_dual(&self, h: &DualCharacter) -> Result<()> {
        self.check(&h.as_element())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub(crate) fn add_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.cyclic_orders)
                .map(|((&x, &y), &n)| (x + y) % n)
                .collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub(crate) fn neg_unchecked(&self, a: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&self.cyclic_orders)
                .map(|(&x, &n)| (n - x) % n)
                .collect(),
        )
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// `k * g`.
    pub fn scale(&self, k: i64, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(GroupElement(
            g.0.iter()
                .zip(&self.cyclic_orders)
                .map(|(&x, &n)| reduce(k as i128 * x as i128, n))
                .collect(),
        ))
    }

    /// Least `k >= 1` with `k g = 0`.
    pub fn order_of(&self, g: &GroupElement) -> Result<u64> {
        self.check(g)?;
        Ok(g.0
            .iter()
            .zip(&self.cyclic_orders)
            .fold(1, |acc, (&x, &n)| lcm(acc, n / gcd(x, n))))
    }

    /// All elements in lexicographic order of their coordinates.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.cardinality() as usize).map(move |i| self.element_at(i))
    }

    pub fn characters(&self) -> impl Iterator<Item = DualCharacter> + '_ {
        self.elements().map(DualCharacter::from)
    }

    /// Position of `g` in [`elements`](Self::elements).
    pub fn index_of(&self, g: &GroupElement) -> usize {
        g.0.iter()
            .zip(&self.cyclic_orders)
            .fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0u64; self.rank()];
        for (c, &n) in coords.iter_mut().zip(&self.cyclic_orders).rev() {
            *c = (index % n as usize) as u64;
            index /= n as usize;
        }
        GroupElement(coords)
    }

    /// Phase of `(g, h)` as an exact fraction `num / exponent` of a full turn.
    pub fn phase_numerator(&self, h: &DualCharacter, g: &GroupElement) -> Result<u64> {
        self.check(g)?;
        self.check_dual(h)?;
        Ok(self.phase_unchecked(h, g))
    }

    pub(crate) fn phase_unchecked(&self, h: &DualCharacter, g: &GroupElement) -> u64 {
        let l = self.exponent() as u128;
        let mut num: u128 = 0;
        for ((&x, &y), &n) in g.0.iter().zip(&h.0).zip(&self.cyclic_orders) {
            let xy = (x as u128 * y as u128) % n as u128;
            num = (num + xy * (l / n as u128)) % l;
        }
        num as u64
    }

    /// `(g, h) = exp(2 pi i sum_k g_k h_k / n_k)`.
    pub fn eval_character<T: Real>(&self, h: &DualCharacter, g: &GroupElement) -> Result<Complex<T>> {
        let num = self.phase_numerator(h, g)?;
        Ok(self.unit_root(num))
    }

    pub(crate) fn unit_root<T: Real>(&self, num: u64) -> Complex<T> {
        if num == 0 {
            return Complex::new(T::one(), T::zero());
        }
        let turn = T::lit(num as f64) / T::lit(self.exponent() as f64);
        Complex::from_polar(T::one(), T::TAU() * turn)
    }

    /// Checks that `elements` is a subgroup: contains zero and is closed under addition and negation.
    pub fn check_subgroup(&self, elements: &[GroupElement]) -> Result<()> {
        for g in elements {
            self.check(g)?;
        }
        let set: std::collections::HashSet<&GroupElement> = elements.iter().collect();
        if !set.contains(&self.zero()) {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        for a in elements {
            if !set.contains(&self.neg_unchecked(a)) {
                return Err(Error::NotSubgroup(format!("not closed under negation at {:?}", a.0)));
            }
            for b in elements {
                if !set.contains(&self.add_unchecked(a, b)) {
                    return Err(Error::NotSubgroup(format!(
                        "not closed under addition at {:?} + {:?}",
                        a.0, b.0
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_enumerable(&self) -> Result<()> {
        let size = self.cardinality();
        if size > MAX_ENUMERATION {
            return Err(Error::TooLarge {
                size,
                limit: MAX_ENUMERATION,
            });
        }
        Ok(())
    }
}

/// An automorphism `g -> A g` of `Z(n_1) x ... x Z(n_r)`.
///
/// Row `k` of the matrix is stored reduced modulo `n_k`, so two automorphisms
/// compare equal iff they act identically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupAutomorphism {
    group: FiniteAbelianGroup,
    matrix: Vec<Vec<u64>>,
}

impl GroupAutomorphism {
    /// Validates well-definedness (`A_kj n_j = 0 mod n_k`) and bijectivity by enumeration.
    pub fn new(group: &FiniteAbelianGroup, matrix: Vec<Vec<i64>>) -> Result<Self> {
        let r = group.rank();
        if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidAutomorphism(format!(
                "matrix must be {r} x {r} for Z{:?}",
                group.cyclic_orders
            )));
        }
        let orders = &group.cyclic_orders;
        let matrix: Vec<Vec<u64>> = matrix
            .iter()
            .zip(orders)
            .map(|(row, &nk)| row.iter().map(|&a| reduce(a as i128, nk)).collect())
            .collect();
        for (k, row) in matrix.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if (a as u128 * orders[j] as u128) % orders[k] as u128 != 0 {
                    return Err(Error::InvalidAutomorphism(format!(
                        "entry ({k},{j}) = {a} is not well defined: {a} * {} != 0 mod {}",
                        orders[j], orders[k]
                    )));
                }
            }
        }
        let auto = Self {
            group: group.clone(),
            matrix,
        };
        auto.check_bijective()?;
        Ok(auto)
    }

    fn check_bijective(&self) -> Result<()> {
        self.group.check_enumerable()?;
        let mut seen = vec![false; self.group.cardinality() as usize];
        for g in self.group.elements() {
            let idx = self.group.index_of(&self.apply_unchecked(&g));
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::InvalidAutomorphism("map is not injective".into()));
            }
        }
        Ok(())
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self::diagonal_unchecked(group, &vec![1; group.rank()])
    }

    /// `g -> -g`.
    pub fn negation(group: &FiniteAbelianGroup) -> Self {
        Self::diagonal_unchecked(group, &vec![-1; group.rank()])
    }

    /// `g -> k g`; an automorphism iff `k` is a unit modulo every `n_i`.
    pub fn scalar(group: &FiniteAbelianGroup, k: i64) -> Result<Self> {
        Self::diagonal(group, &vec![k; group.rank()])
    }

    pub fn diagonal(group: &FiniteAbelianGroup, units: &[i64]) -> Result<Self> {
        let r = group.rank();
        if units.len() != r {
            return Err(Error::InvalidAutomorphism(format!("expected {r} diagonal entries")));
        }
        let matrix = (0..r)
            .map(|k| (0..r).map(|j| if j == k { units[k] } else { 0 }).collect())
            .collect();
        Self::new(group, matrix)
    }

    fn diagonal_unchecked(group: &FiniteAbelianGroup, units: &[i64]) -> Self {
        let r = group.rank();
        let matrix = (0..r)
            .map(|k| {
                (0..r)
                    .map(|j| if j == k { reduce(units[k] as i128, group.cyclic_orders[k]) } else { 0 })
                    .collect()
            })
            .collect();
        Self {
            group: group.clone(),
            matrix,
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// The reduced matrix.
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|&a| a as i64).collect())
            .collect()
    }

    pub fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        self.group.check(g)?;
        Ok(self.apply_unchecked(g))
    }

    pub(crate) fn apply_unchecked(&self, g: &GroupElement) -> GroupElement {
        GroupElement(
            self.matrix
                .iter()
                .zip(&self.group.cyclic_orders)
                .map(|(row, &nk)| {
                    let s: u128 = row
                        .iter()
                        .zip(&g.0)
                        .map(|(&a, &x)| a as u128 * x as u128 % nk as u128)
                        .sum();
                    (s % nk as u128) as u64
                })
                .collect(),
        )
    }

    /// Applies this automorphism to a character (the dual is identified with the group).
    pub fn apply_dual(&self, h: &DualCharacter) -> Result<DualCharacter> {
        self.apply(&h.as_element()).map(DualCharacter::from)
    }

    pub(crate) fn apply_dual_unchecked(&self, h: &DualCharacter) -> DualCharacter {
        DualCharacter(self.apply_unchecked(&h.as_element()).0)
    }

    /// The adjoint action on characters, `(A g, h) = (g, A~ h)`.
    ///
    /// With unequal cyclic orders the entries are `B_jk = A_kj n_j / n_k`,
    /// which is integral because `A` is well defined.
    pub fn adjoint(&self) -> Self {
        let orders = &self.group.cyclic_orders;
        let r = orders.len();
        let matrix = (0..r)
            .map(|j| {
                (0..r)
                    .map(|k| {
                        let b = self.matrix[k][j] as u128 * orders[j] as u128 / orders[k] as u128;
                        (b % orders[j] as u128) as u64
                    })
                    .collect()
            })
            .collect();
        Self {
            group: self.group.clone(),
            matrix,
        }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch("automorphisms over different groups".into()));
        }
        let orders = &self.group.cyclic_orders;
        let r = orders.len();
        let matrix = (0..r)
            .map(|k| {
                (0..r)
                    .map(|j| {
                        let s: u128 = (0..r)
                            .map(|l| self.matrix[k][l] as u128 * other.matrix[l][j] as u128)
                            .sum();
                        (s % orders[k] as u128) as u64
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            group: self.group.clone(),
            matrix,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.group)
    }

    /// `Ker(I + A) = { g : g + A g = 0 }`, enumerated in lexicographic order.
    pub fn kernel_of_i_plus(&self) -> Vec<GroupElement> {
        self.group
            .elements()
            .filter(|g| self.group.add_unchecked(g, &self.apply_unchecked(g)).is_zero())
            .collect()
    }

    /// True iff `A g = -g` for every `g` in the subgroup `k`.
    pub fn restriction_is_minus_identity(&self, k: &[GroupElement]) -> Result<bool> {
        self.group.check_subgroup(k)?;
        Ok(k
            .iter()
            .all(|g| self.apply_unchecked(g) == self.group.neg_unchecked(g)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(orders: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(orders.to_vec()).unwrap()
    }

    fn order_by_repeated_addition(g: &FiniteAbelianGroup, x: &GroupElement) -> u64 {
        let mut acc = x.clone();
        let mut k = 1;
        while !acc.is_zero() {
            acc = g.add(&acc, x).unwrap();
            k += 1;
        }
        k
    }

    #[test]
    fn add_and_neg() {
        let g = z(&[3, 5]);
        let a = g.try_element(vec![1, 2]).unwrap();
        let b = g.try_element(vec![2, 4]).unwrap();
        assert_eq!(g.add(&a, &b).unwrap().coords(), &[0, 1]);
        assert_eq!(g.neg(&g.zero()).unwrap(), g.zero());
        let z6 = z(&[6]);
        let s = z6.add(&z6.try_element(vec![4]).unwrap(), &z6.try_element(vec![5]).unwrap());
        assert_eq!(s.unwrap().coords(), &[3]);
    }

    #[test]
    fn parent_mismatch_is_an_error() {
        let g = z(&[3, 5]);
        let h = z(&[3]);
        let a = h.try_element(vec![1]).unwrap();
        assert!(matches!(g.add(&a, &g.zero()), Err(Error::GroupMismatch(_))));
        assert!(g.try_element(vec![3, 0]).is_err());
        assert!(FiniteAbelianGroup::new(vec![3, 0]).is_err());
    }

    #[test]
    fn orders() {
        let z6 = z(&[6]);
        let two = z6.try_element(vec![2]).unwrap();
        assert_eq!(order_by_repeated_addition(&z6, &two), 3);
        assert_eq!(z6.order_of(&two).unwrap(), 3);
        assert_eq!(z6.order_of(&z6.zero()).unwrap(), 1);
        let g = z(&[3, 5]);
        let x = g.try_element(vec![1, 1]).unwrap();
        assert_eq!(order_by_repeated_addition(&g, &x), 15);
        assert_eq!(g.order_of(&x).unwrap(), 15);
    }

    #[test]
    fn order_matches_repeated_addition_everywhere() {
        for orders in [&[6u64][..], &[3, 5], &[9, 3], &[2, 4, 3]] {
            let g = z(orders);
            for x in g.elements() {
                assert_eq!(g.order_of(&x).unwrap(), order_by_repeated_addition(&g, &x));
            }
        }
    }

    #[test]
    fn character_values() {
        let g = z(&[3]);
        let one = g.try_element(vec![1]).unwrap();
        let v: Complex<f64> = g.eval_character(&g.dual_zero(), &one).unwrap();
        assert_eq!(v, Complex::new(1.0, 0.0));
        let h2 = g.try_character(vec![2]).unwrap();
        let v: Complex<f64> = g.eval_character(&h2, &one).unwrap();
        let expected = Complex::from_polar(1.0, 4.0 * std::f64::consts::PI / 3.0);
        assert!((v - expected).norm() < 1e-12);
        let g = z(&[3, 5]);
        let v: Complex<f64> = g
            .eval_character(&g.try_character(vec![0, 3]).unwrap(), &g.try_element(vec![1, 0]).unwrap())
            .unwrap();
        assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn character_orthogonality() {
        for orders in [&[3u64][..], &[3, 5], &[9], &[3, 3], &[15, 15], &[225]] {
            let g = z(orders);
            let size = g.cardinality() as f64;
            for h in g.characters() {
                let sum: Complex<f64> = g.elements().map(|x| g.eval_character(&h, &x).unwrap()).sum();
                let expected = if h.is_trivial() { 1.0 } else { 0.0 };
                assert!((sum / size - expected).norm() < 1e-12, "{orders:?} {h:?}");
            }
        }
    }

    fn adjoint_by_pairing(a: &GroupAutomorphism) -> GroupAutomorphism {
        // Search all matrices column by column: column j of B is the character g -> (A e_j ... )
        // determined by the images of the basis characters.
        let g = a.group();
        let mut images = Vec::new();
        for j in 0..g.rank() {
            let mut e = vec![0i64; g.rank()];
            e[j] = 1;
            let ej = g.character(&e).unwrap();
            let found = g
                .characters()
                .find(|h| {
                    g.elements().all(|x| {
                        let lhs: Complex<f64> = g.eval_character(h, &x).unwrap();
                        let rhs: Complex<f64> = g.eval_character(&ej, &a.apply(&x).unwrap()).unwrap();
                        (lhs - rhs).norm() < 1e-12
                    })
                })
                .unwrap();
            images.push(found);
        }
        let r = g.rank();
        let matrix = (0..r)
            .map(|k| (0..r).map(|j| images[j].coords()[k] as i64).collect())
            .collect();
        GroupAutomorphism::new(g, matrix).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let g = z(&[3]);
        assert!(GroupAutomorphism::identity(&g).adjoint().is_identity());
        let two = GroupAutomorphism::scalar(&g, 2).unwrap();
        assert_eq!(adjoint_by_pairing(&two), two);
        assert_eq!(two.adjoint(), two);

        let g = z(&[3, 3]);
        let a = GroupAutomorphism::new(&g, vec![vec![1, 1], vec![0, 1]]).unwrap();
        let expected = GroupAutomorphism::new(&g, vec![vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(adjoint_by_pairing(&a), expected);
        assert_eq!(a.adjoint(), expected);
    }

    #[test]
    fn adjoint_with_unequal_orders() {
        // Z(3) x Z(9): (x, y) -> (x, 3x + y) is well defined.
        let g = z(&[3, 9]);
        let a = GroupAutomorphism::new(&g, vec![vec![1, 0], vec![3, 1]]).unwrap();
        assert_eq!(a.adjoint(), adjoint_by_pairing(&a));
        assert_eq!(a.adjoint().adjoint(), a);
        // Z(3) x Z(9): (x, y) -> (x + y, y) is well defined too.
        let b = GroupAutomorphism::new(&g, vec![vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(b.adjoint(), adjoint_by_pairing(&b));
    }

    #[test]
    fn invalid_automorphisms_rejected() {
        let g = z(&[3]);
        assert!(GroupAutomorphism::scalar(&g, 3).is_err());
        let g = z(&[9, 3]);
        // y (mod 3) cannot feed x (mod 9) with coefficient 1.
        assert!(GroupAutomorphism::new(&g, vec![vec![1, 1], vec![0, 1]]).is_err());
        assert!(GroupAutomorphism::new(&g, vec![vec![1]]).is_err());
        let big = z(&[1_000_003]);
        assert!(matches!(GroupAutomorphism::scalar(&big, 2), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn kernels() {
        let g = z(&[3]);
        let minus = GroupAutomorphism::scalar(&g, 2).unwrap();
        assert_eq!(minus.kernel_of_i_plus().len(), 3);
        let id = GroupAutomorphism::identity(&g);
        assert_eq!(id.kernel_of_i_plus(), vec![g.zero()]);
        let g9 = z(&[9]);
        let two = GroupAutomorphism::scalar(&g9, 2).unwrap();
        let k = two.kernel_of_i_plus();
        assert_eq!(k.len(), 3);
        g9.check_subgroup(&k).unwrap();
        assert!(two.restriction_is_minus_identity(&k).unwrap());
    }

    #[test]
    fn restriction_examples() {
        let g9 = z(&[9]);
        let k: Vec<_> = [0, 3, 6].iter().map(|&c| g9.try_element(vec![c]).unwrap()).collect();
        let four = GroupAutomorphism::scalar(&g9, 4).unwrap();
        assert!(!four.restriction_is_minus_identity(&k).unwrap());
        assert!(GroupAutomorphism::negation(&g9).restriction_is_minus_identity(&k).unwrap());
        for u in [1, 2, 4, 5, 7, 8] {
            let a = GroupAutomorphism::scalar(&g9, u).unwrap();
            assert!(a.restriction_is_minus_identity(&[g9.zero()]).unwrap());
        }
        let not_sub = vec![g9.zero(), g9.try_element(vec![1]).unwrap()];
        assert!(matches!(four.restriction_is_minus_identity(&not_sub), Err(Error::NotSubgroup(_))));
    }

    fn group_strategy() -> impl Strategy<Value = FiniteAbelianGroup> {
        prop::collection::vec(prop::sample::select(vec![1u64, 3, 5, 7, 9, 15]), 0..3)
            .prop_map(|o| FiniteAbelianGroup::new(o).unwrap())
    }

    proptest! {
        #[test]
        fn kernel_is_subgroup_and_negation_gives_everything(g in group_strategy(), seed in 0u64..1000) {
            let units: Vec<i64> = g.cyclic_orders().iter().enumerate().map(|(i, &n)| {
                let cands: Vec<i64> = (1..=n as i64).filter(|&u| gcd(u as u64, n) == 1).collect();
                cands[(seed as usize + i) % cands.len()]
            }).collect();
            let a = GroupAutomorphism::diagonal(&g, &units).unwrap();
            let k = a.kernel_of_i_plus();
            g.check_subgroup(&k).unwrap();
            prop_assert!(a.restriction_is_minus_identity(&k).unwrap());
            prop_assert_eq!(a.adjoint().adjoint(), a.clone());
            prop_assert_eq!(GroupAutomorphism::negation(&g).kernel_of_i_plus().len() as u64, g.cardinality());
        }

        #[test]
        fn doubling_is_bijective_on_odd_groups(g in group_strategy()) {
            prop_assert!(g.is_odd_order());
            let mut images: Vec<_> = g.elements().map(|x| g.scale(2, &x).unwrap()).collect();
            images.sort();
            images.dedup();
            prop_assert_eq!(images.len() as u64, g.cardinality());
        }

        #[test]
        fn adjoint_pairing_identity(seed in 0u64..500) {
            let g = FiniteAbelianGroup::new(vec![3, 9]).unwrap();
            // A random well-defined matrix: row 0 (mod 3) may take any entry from column 1 only
            // if it is killed by 9, row 1 (mod 9) needs a multiple of 3 in column 0.
            let m = vec![
                vec![1 + (seed % 2) as i64, (seed / 2 % 3) as i64],
                vec![3 * (seed / 6 % 3) as i64, [1i64, 2, 4, 5, 7, 8][(seed / 18 % 6) as usize]],
            ];
            if let Ok(a) = GroupAutomorphism::new(&g, m) {
                let b = a.adjoint();
                for x in g.elements() {
                    for h in g.characters() {
                        let lhs: Complex<f64> = g.eval_character(&b.apply_dual(&h).unwrap(), &x).unwrap();
                        let rhs: Complex<f64> = g.eval_character(&h, &a.apply(&x).unwrap()).unwrap();
                        prop_assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
