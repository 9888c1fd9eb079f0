//! The ambient group `X = R x Z(2) x G` and its dual `Y = R x Z(2) x H`.
//!
//! `G` has odd order, so `p = (0, 1, 0)` is the only element of order 2 in `X`.
//! The pairing is `((t, m, g), (s, n, h)) = e^{its} (-1)^{mn} (g, h)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::finite_abelian::{DualCharacter, FiniteAbelianGroup, GroupAutomorphism, GroupElement};
use crate::{Error, Real, Result};

/// Default tolerance for comparisons of real coordinates.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FiniteAbelianGroup", into = "FiniteAbelianGroup")]
pub struct AmbientGroup {
    finite: FiniteAbelianGroup,
}

impl TryFrom<FiniteAbelianGroup> for AmbientGroup {
    type Error = Error;

    fn try_from(g: FiniteAbelianGroup) -> Result<Self> {
        Self::new(g)
    }
}

impl From<AmbientGroup> for FiniteAbelianGroup {
    fn from(x: AmbientGroup) -> Self {
        x.finite
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XPoint<T> {
    pub t: T,
    pub m: u8,
    pub g: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YPoint<T> {
    pub s: T,
    pub n: u8,
    pub h: DualCharacter,
}

impl AmbientGroup {
    /// Rejects `G` with an even cyclic order.
    pub fn new(finite: FiniteAbelianGroup) -> Result<Self> {
        if let Some(&n) = finite.cyclic_orders().iter().find(|&&n| n % 2 == 0) {
            return Err(Error::EvenOrder(n));
        }
        Ok(Self { finite })
    }

    pub fn with_orders(orders: &[u64]) -> Result<Self> {
        Self::new(FiniteAbelianGroup::new(orders.to_vec())?)
    }

    /// `X = R x Z(2)`.
    pub fn real_line_times_z2() -> Self {
        Self {
            finite: FiniteAbelianGroup::trivial(),
        }
    }

    pub fn finite(&self) -> &FiniteAbelianGroup {
        &self.finite
    }

    /// Number of characters of the finite part `Z(2) x G`.
    pub fn finite_dual_len(&self) -> usize {
        2 * self.finite.cardinality() as usize
    }

    /// Index of `(n, h)` among the characters of `Z(2) x G`: `n |H| + index(h)`.
    pub fn finite_dual_index(&self, n: u8, h: &DualCharacter) -> usize {
        n as usize * self.finite.cardinality() as usize + self.finite.index_of(&h.as_element())
    }

    pub fn finite_dual_at(&self, index: usize) -> (u8, DualCharacter) {
        let size = self.finite.cardinality() as usize;
        ((index / size) as u8, DualCharacter::from(self.finite.element_at(index % size)))
    }

    pub fn point<T: Real>(&self, t: T, m: u8, g: &[i64]) -> Result<XPoint<T>> {
        let x = XPoint {
            t,
            m,
            g: self.finite.element(g)?,
        };
        self.check_point(&x)?;
        Ok(x)
    }

    pub fn character<T: Real>(&self, s: T, n: u8, h: &[i64]) -> Result<YPoint<T>> {
        let y = YPoint {
            s,
            n,
            h: self.finite.character(h)?,
        };
        self.check_character(&y)?;
        Ok(y)
    }

    pub fn zero<T: Real>(&self) -> XPoint<T> {
        XPoint {
            t: T::zero(),
            m: 0,
            g: self.finite.zero(),
        }
    }

    pub fn dual_zero<T: Real>(&self) -> YPoint<T> {
        YPoint {
            s: T::zero(),
            n: 0,
            h: self.finite.dual_zero(),
        }
    }

    /// The element of order 2, `p = (0, 1, 0)`.
    pub fn order_two<T: Real>(&self) -> XPoint<T> {
        XPoint {
            t: T::zero(),
            m: 1,
            g: self.finite.zero(),
        }
    }

    pub fn check_point<T: Real>(&self, x: &XPoint<T>) -> Result<()> {
        if x.m > 1 {
            return Err(Error::GroupMismatch(format!("Z(2) coordinate must be 0 or 1, got {}", x.m)));
        }
        if !x.t.is_finite() {
            return Err(Error::GroupMismatch("real coordinate must be finite".into()));
        }
        self.finite.check(&x.g)
    }

    pub fn check_character<T: Real>(&self, y: &YPoint<T>) -> Result<()> {
        if y.n > 1 {
            return Err(Error::GroupMismatch(format!("Z(2) coordinate must be 0 or 1, got {}", y.n)));
        }
        if !y.s.is_finite() {
            return Err(Error::GroupMismatch("real coordinate must be finite".into()));
        }
        self.finite.check_dual(&y.h)
    }

    pub fn add<T: Real>(&self, x1: &XPoint<T>, x2: &XPoint<T>) -> Result<XPoint<T>> {
        self.check_point(x1)?;
        self.check_point(x2)?;
        Ok(XPoint {
            t: x1.t + x2.t,
            m: x1.m ^ x2.m,
            g: self.finite.add_unchecked(&x1.g, &x2.g),
        })
    }

    pub fn neg<T: Real>(&self, x: &XPoint<T>) -> Result<XPoint<T>> {
        self.check_point(x)?;
        Ok(XPoint {
            t: -x.t,
            m: x.m,
            g: self.finite.neg_unchecked(&x.g),
        })
    }

    pub fn add_dual<T: Real>(&self, y1: &YPoint<T>, y2: &YPoint<T>) -> Result<YPoint<T>> {
        self.check_character(y1)?;
        self.check_character(y2)?;
        Ok(self.add_dual_unchecked(y1, y2))
    }

    pub(crate) fn add_dual_unchecked<T: Real>(&self, y1: &YPoint<T>, y2: &YPoint<T>) -> YPoint<T> {
        YPoint {
            s: y1.s + y2.s,
            n: y1.n ^ y2.n,
            h: DualCharacter::from(self.finite.add_unchecked(&y1.h.as_element(), &y2.h.as_element())),
        }
    }

    pub fn neg_dual<T: Real>(&self, y: &YPoint<T>) -> Result<YPoint<T>> {
        self.check_character(y)?;
        Ok(self.neg_dual_unchecked(y))
    }

    pub(crate) fn neg_dual_unchecked<T: Real>(&self, y: &YPoint<T>) -> YPoint<T> {
        YPoint {
            s: -y.s,
            n: y.n,
            h: DualCharacter::from(self.finite.neg_unchecked(&y.h.as_element())),
        }
    }

    /// `(x, y) = e^{its} (-1)^{mn} (g, h)`.
    pub fn pair<T: Real>(&self, x: &XPoint<T>, y: &YPoint<T>) -> Result<Complex<T>> {
        self.check_point(x)?;
        self.check_character(y)?;
        Ok(self.pair_unchecked(x, y))
    }

    pub(crate) fn pair_unchecked<T: Real>(&self, x: &XPoint<T>, y: &YPoint<T>) -> Complex<T> {
        let num = self.finite.phase_unchecked(&y.h, &x.g);
        let finite: Complex<T> = self.finite.unit_root(num);
        let sign = if x.m & y.n == 1 { -T::one() } else { T::one() };
        Complex::from_polar(sign, x.t * y.s) * finite
    }

    /// The annihilator `A(X, R) = Z(2) x G`, i.e. all points `(0, m, g)`.
    pub fn annihilator_of_real_line<T: Real>(&self) -> Vec<XPoint<T>> {
        (0..2u8)
            .flat_map(|m| {
                self.finite.elements().map(move |g| XPoint { t: T::zero(), m, g })
            })
            .collect()
    }

    /// Membership in `A(X, R)`: the real coordinate vanishes.
    pub fn in_annihilator_of_real_line<T: Real>(&self, x: &XPoint<T>) -> bool {
        x.t == T::zero()
    }
}

/// `alpha(t, m, g) = (a t, m, alpha_G g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct XAutomorphism<T> {
    a: T,
    alpha_g: GroupAutomorphism,
}

/// The adjoint `(s, n, h) -> (a s, n, alpha~_G h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct YAutomorphism<T> {
    a: T,
    alpha_h: GroupAutomorphism,
}

impl<T: Real> XAutomorphism<T> {
    pub fn new(a: T, alpha_g: GroupAutomorphism) -> Result<Self> {
        if a == T::zero() || !a.is_finite() {
            return Err(Error::InvalidAutomorphism(format!("real factor must be finite and nonzero, got {a}")));
        }
        if !alpha_g.group().is_odd_order() {
            return Err(Error::EvenOrder(
                *alpha_g.group().cyclic_orders().iter().find(|&&n| n % 2 == 0).unwrap(),
            ));
        }
        Ok(Self { a, alpha_g })
    }

    pub fn identity(group: &AmbientGroup) -> Self {
        Self {
            a: T::one(),
            alpha_g: GroupAutomorphism::identity(group.finite()),
        }
    }

    /// `(-1, I, -I)`.
    pub fn minus_identity(group: &AmbientGroup) -> Self {
        Self {
            a: -T::one(),
            alpha_g: GroupAutomorphism::negation(group.finite()),
        }
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn alpha_g(&self) -> &GroupAutomorphism {
        &self.alpha_g
    }

    pub fn ambient(&self) -> AmbientGroup {
        AmbientGroup {
            finite: self.alpha_g.group().clone(),
        }
    }

    pub fn apply(&self, x: &XPoint<T>) -> Result<XPoint<T>> {
        self.ambient().check_point(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &XPoint<T>) -> XPoint<T> {
        XPoint {
            t: self.a * x.t,
            m: x.m,
            g: self.alpha_g.apply_unchecked(&x.g),
        }
    }

    pub fn adjoint(&self) -> YAutomorphism<T> {
        YAutomorphism {
            a: self.a,
            alpha_h: self.alpha_g.adjoint(),
        }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            a: self.a * other.a,
            alpha_g: self.alpha_g.compose(&other.alpha_g)?,
        })
    }
}

impl<T: Real> YAutomorphism<T> {
    pub fn a(&self) -> T {
        self.a
    }

    pub fn alpha_h(&self) -> &GroupAutomorphism {
        &self.alpha_h
    }

    pub fn apply(&self, y: &YPoint<T>) -> Result<YPoint<T>> {
        self.alpha_h.group().check_dual(&y.h)?;
        Ok(self.apply_unchecked(y))
    }

    pub(crate) fn apply_unchecked(&self, y: &YPoint<T>) -> YPoint<T> {
        YPoint {
            s: self.a * y.s,
            n: y.n,
            h: self.alpha_h.apply_dual_unchecked(&y.h),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            a: self.a * other.a,
            alpha_h: self.alpha_h.compose(&other.alpha_h)?,
        })
    }
}
