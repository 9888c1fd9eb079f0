//! The class Theta on `R x Z(2)` and the group of invertible signed measures on `Z(2)`.
//!
//! A parameter set `(sigma, sigma', m, m', kappa)` describes the function
//! `phi(s, 0) = exp(-sigma s^2 + i m s)`, `phi(s, 1) = kappa exp(-sigma' s^2 + i m' s)`.
//! It is the characteristic function of a probability distribution iff either
//! `0 < sigma' < sigma` and `0 < |kappa| <= rho`, or `sigma = sigma'`, `m = m'`, `|kappa| <= 1`,
//! where `rho = sqrt(sigma'/sigma) exp(-(m - m')^2 / (4 (sigma - sigma')))`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::group_rfg::AmbientGroup;
use crate::measures::{two_term_bound, AtomicSignedMeasure, RealAtom, Term};
use crate::{Error, Real, Result};

/// Half-width of the band around the membership boundary that is reported as [`Membership::Boundary`].
pub const BOUNDARY_BAND: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams<T> {
    pub sigma: T,
    pub sigma_p: T,
    pub m: T,
    pub m_p: T,
    pub kappa: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    /// Within [`BOUNDARY_BAND`] of the admissible `|kappa|` limit; `is_in_theta` still decides exactly.
    Boundary,
}

impl<T: Real> ThetaParams<T> {
    pub fn new(sigma: T, sigma_p: T, m: T, m_p: T, kappa: T) -> Result<Self> {
        let p = Self {
            sigma,
            sigma_p,
            m,
            m_p,
            kappa,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.sigma, self.sigma_p, self.m, self.m_p, self.kappa]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.sigma < T::zero() || self.sigma_p < T::zero() {
            return Err(Error::InvalidMeasure(format!("invalid Theta parameters {self:?}")));
        }
        Ok(())
    }

    /// A plain Gaussian `gamma_{sigma, m} (x) E_0` (kappa = 1, sigma' = sigma, m' = m).
    pub fn gaussian(sigma: T, m: T) -> Self {
        Self {
            sigma,
            sigma_p: sigma,
            m,
            m_p: m,
            kappa: T::one(),
        }
    }

    pub fn is_strict(&self) -> bool {
        T::zero() < self.sigma_p && self.sigma_p < self.sigma
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma == self.sigma_p && self.m == self.m_p
    }

    /// Exact membership predicate.
    pub fn is_in_theta(&self) -> bool {
        if self.validate().is_err() {
            return false;
        }
        if self.is_strict() {
            let rho = self.rho_unchecked();
            self.kappa != T::zero() && self.kappa.abs() <= rho
        } else {
            self.is_degenerate() && self.kappa.abs() <= T::one()
        }
    }

    pub fn membership(&self) -> Membership {
        let band = T::lit(BOUNDARY_BAND);
        let limit = if self.validate().is_err() {
            None
        } else if self.is_strict() {
            Some(self.rho_unchecked())
        } else if self.is_degenerate() {
            Some(T::one())
        } else {
            None
        };
        match limit {
            Some(l) if (self.kappa.abs() - l).abs() <= band => Membership::Boundary,
            _ if self.is_in_theta() => Membership::Inside,
            _ => Membership::Outside,
        }
    }

    fn rho_unchecked(&self) -> T {
        let d = self.m - self.m_p;
        (self.sigma_p / self.sigma).sqrt() * (-d * d / (T::lit(4.0) * (self.sigma - self.sigma_p))).exp()
    }

    /// The extremal admissible `|kappa|`; requires `0 < sigma' < sigma`.
    pub fn rho(&self) -> Result<T> {
        two_term_bound(self.sigma, self.m, self.sigma_p, self.m_p)
    }

    pub fn char_value(&self, s: T, n: u8) -> Complex<T> {
        if n == 0 {
            RealAtom::point(self.m).char_value(s) * (-self.sigma * s * s).exp()
        } else {
            RealAtom::point(self.m_p).char_value(s) * ((-self.sigma_p * s * s).exp() * self.kappa)
        }
    }

    pub fn with_kappa(&self, kappa: T) -> Self {
        Self { kappa, ..*self }
    }

    /// `1/2 (gamma + kappa gamma') (x) E_0 + 1/2 (gamma - kappa gamma') (x) E_p`.
    pub fn to_measure(&self, group: &AmbientGroup) -> Result<AtomicSignedMeasure<T>> {
        self.validate()?;
        let half = T::lit(0.5);
        let zero = group.finite().zero();
        let term = |c: T, sigma: T, shift: T, m: u8| Term {
            c,
            sigma,
            shift,
            m,
            g: zero.clone(),
        };
        AtomicSignedMeasure::new(
            group,
            vec![
                term(half, self.sigma, self.m, 0),
                term(half * self.kappa, self.sigma_p, self.m_p, 0),
                term(half, self.sigma, self.m, 1),
                term(-half * self.kappa, self.sigma_p, self.m_p, 1),
            ],
        )
    }
}

pub fn is_in_theta<T: Real>(p: &ThetaParams<T>) -> bool {
    p.is_in_theta()
}

pub fn theta_to_measure<T: Real>(p: &ThetaParams<T>, group: &AmbientGroup) -> Result<AtomicSignedMeasure<T>> {
    p.to_measure(group)
}

pub fn rho_extremal<T: Real>(p: &ThetaParams<T>) -> Result<T> {
    p.rho()
}

/// `1/2 (gamma + gamma') + 1/2 (gamma - gamma') * E_p`: the Theta measure with `kappa = 1`.
pub fn lambda_signed<T: Real>(group: &AmbientGroup, sigma: T, m: T, sigma_p: T, m_p: T) -> Result<AtomicSignedMeasure<T>> {
    two_term_bound(sigma, m, sigma_p, m_p)?;
    ThetaParams::new(sigma, sigma_p, m, m_p, T::one())?.to_measure(group)
}

/// Per-atom sums `A = sum c` and `B = sum (-1)^m c`, i.e. the coefficients of
/// `mu^(s, 0, 0)` and `mu^(s, 1, 0)` in the exponential basis.
/// Atom parameters equal up to a few units of rounding; convolution sums `sigma`
/// and `shift` in different orders for different terms.
fn same_atom<T: Real>(a: &RealAtom<T>, b: &RealAtom<T>) -> bool {
    let close = |x: T, y: T| (x - y).abs() <= T::lit(64.0) * T::epsilon() * (T::one() + x.abs().max(y.abs()));
    close(a.sigma, b.sigma) && close(a.shift, b.shift)
}

pub(crate) fn parity_profile<T: Real>(mu: &AtomicSignedMeasure<T>) -> Vec<(RealAtom<T>, T, T)> {
    let mut out: Vec<(RealAtom<T>, T, T)> = Vec::new();
    for t in mu.terms() {
        let atom = t.atom();
        let signed = if t.m == 1 { -t.c } else { t.c };
        match out.iter_mut().find(|(a, _, _)| same_atom(a, &atom)) {
            Some(entry) => {
                entry.1 = entry.1 + t.c;
                entry.2 = entry.2 + signed;
            }
            None => out.push((atom, t.c, signed)),
        }
    }
    out
}

/// Reads `(sigma, m)` from `mu^(s, 0, 0)` and `(sigma', m', kappa)` from `mu^(s, 1, 0)`.
///
/// Works for any measure on `X`: the finite coordinate is summed out, so for
/// `mu` on `R x Z(2)` this inverts [`theta_to_measure`].
pub fn read_theta_params<T: Real>(mu: &AtomicSignedMeasure<T>) -> Result<ThetaParams<T>> {
    let profile = parity_profile(mu);
    let scale: T = mu.terms().iter().map(|t| t.c.abs()).sum();
    let eps = T::lit(1e-12).max(T::lit(16.0) * T::epsilon()) * scale.max(T::one());
    let even: Vec<_> = profile.iter().filter(|(_, a, _)| a.abs() > eps).collect();
    let odd: Vec<_> = profile.iter().filter(|(_, _, b)| b.abs() > eps).collect();
    if even.len() != 1 {
        return Err(Error::NotThetaShape(format!(
            "mu^(s, 0, 0) has {} exponential components, expected 1",
            even.len()
        )));
    }
    if (even[0].1 - T::one()).abs() > eps {
        return Err(Error::NotThetaShape(format!("total mass {} is not 1", even[0].1)));
    }
    match odd.len() {
        0 => Err(Error::NotThetaShape("kappa = 0: the characteristic function vanishes at n = 1".into())),
        1 => Ok(ThetaParams {
            sigma: even[0].0.sigma,
            sigma_p: odd[0].0.sigma,
            m: even[0].0.shift,
            m_p: odd[0].0.shift,
            kappa: odd[0].2,
        }),
        k => Err(Error::NotThetaShape(format!(
            "mu^(s, 1, 0) has {k} exponential components, expected 1"
        ))),
    }
}

/// Inverse of [`theta_to_measure`] for measures on `R x Z(2)`.
pub fn measure_to_theta<T: Real>(mu: &AtomicSignedMeasure<T>) -> Result<ThetaParams<T>> {
    if let Some(t) = mu.terms().iter().find(|t| !t.g.is_zero()) {
        return Err(Error::NotThetaShape(format!(
            "atom at g = {:?} outside R x Z(2)",
            t.g.coords()
        )));
    }
    read_theta_params(mu)
}

/// `((1 + c)/2) E_0 + ((1 - c)/2) E_p`, the signed measure on `Z(2)` with
/// characteristic values `1` at `n = 0` and `c` at `n = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPi<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PiMeasure<T> {
    c: T,
}

#[derive(Deserialize)]
struct RawPi<T> {
    c: T,
}

impl<T: Real> TryFrom<RawPi<T>> for PiMeasure<T> {
    type Error = Error;

    fn try_from(raw: RawPi<T>) -> Result<Self> {
        Self::new(raw.c)
    }
}

impl<T: Real> PiMeasure<T> {
    pub fn new(c: T) -> Result<Self> {
        if c == T::zero() || !c.is_finite() {
            return Err(Error::InvalidMeasure(format!("pi parameter must be finite and nonzero, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn identity() -> Self {
        Self { c: T::one() }
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn invert(&self) -> Self {
        Self { c: self.c.recip() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { c: self.c * other.c }
    }

    /// Nonnegative weights iff `|c| <= 1`.
    pub fn is_distribution(&self) -> bool {
        self.c.abs() <= T::one()
    }

    pub fn weights(&self) -> (T, T) {
        let half = T::lit(0.5);
        (half * (T::one() + self.c), half * (T::one() - self.c))
    }

    pub fn to_measure(&self, group: &AmbientGroup) -> AtomicSignedMeasure<T> {
        let (w0, w1) = self.weights();
        let zero = group.finite().zero();
        AtomicSignedMeasure::finite(group, &[(w0, 0, zero.clone()), (w1, 1, zero)])
            .expect("pi weights are finite")
    }
}

pub fn pi_invert<T: Real>(pi: &PiMeasure<T>) -> PiMeasure<T> {
    pi.invert()
}

pub fn pi_to_measure<T: Real>(pi: &PiMeasure<T>, group: &AmbientGroup) -> AtomicSignedMeasure<T> {
    pi.to_measure(group)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> AmbientGroup {
        AmbientGroup::real_line_times_z2()
    }

    fn p(sigma: f64, sigma_p: f64, m: f64, m_p: f64, kappa: f64) -> ThetaParams<f64> {
        ThetaParams::new(sigma, sigma_p, m, m_p, kappa).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(p(1.0, 1.0, 0.0, 0.0, 0.5).is_in_theta());
        assert!(p(2.0, 1.0, 0.0, 0.0, 0.70).is_in_theta());
        assert!(!p(2.0, 1.0, 0.0, 0.0, 0.72).is_in_theta());
        assert!(!p(1.0, 2.0, 0.0, 0.0, 0.1).is_in_theta());
        assert!(!p(1.0, 1.0, 0.0, 0.5, 0.1).is_in_theta());
        assert!(!p(2.0, 1.0, 0.0, 0.0, 0.0).is_in_theta());
        assert!(p(1.0, 1.0, 0.0, 0.0, 0.0).is_in_theta());
        assert!(p(2.0, 1.0, 0.0, 0.0, -0.70).is_in_theta());
        assert_eq!(p(2.0, 1.0, 0.0, 0.0, 0.5f64.sqrt()).membership(), Membership::Boundary);
        assert_eq!(p(2.0, 1.0, 0.0, 0.0, 0.5).membership(), Membership::Inside);
        assert_eq!(p(2.0, 1.0, 0.0, 0.0, 0.9).membership(), Membership::Outside);
    }

    #[test]
    fn rho_boundary_sweep() {
        let q = p(2.0, 1.0, 0.0, 0.0, 0.5);
        let rho = rho_extremal(&q).unwrap();
        assert!((rho - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rho_extremal(&p(3.0, 1.5, 1.0, 1.0, 0.1)).unwrap(), 0.5f64.sqrt());
        let q2 = p(2.5, 0.7, 0.3, -1.1, 0.1);
        let rho2 = rho_extremal(&q2).unwrap();
        assert!(q2.with_kappa(rho2).is_in_theta());
        assert!(!q2.with_kappa(rho2 * (1.0 + 1e-6)).is_in_theta());
        assert!(rho_extremal(&p(1.0, 1.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn theta_measure_shapes() {
        let g = line();
        let gauss = p(1.5, 1.5, 0.2, 0.2, 1.0).to_measure(&g).unwrap();
        assert_eq!(gauss, AtomicSignedMeasure::gaussian(&g, 1.5, 0.2).unwrap());

        let q = p(2.0, 1.0, 0.5, -0.5, 0.3);
        let mu = q.to_measure(&g).unwrap();
        for i in 0..33 {
            let s = -4.0 + 0.25 * i as f64;
            for n in 0..2u8 {
                let y = g.character(s, n, &[]).unwrap();
                let expected = if n == 0 {
                    Complex::new(-2.0 * s * s, 0.5 * s).exp()
                } else {
                    Complex::new(-s * s, -0.5 * s).exp() * 0.3
                };
                assert!((mu.char_fn(&y) - expected).norm() < 1e-15);
                assert!((q.char_value(s, n) - expected).norm() < 1e-15);
            }
        }
        assert_eq!(measure_to_theta(&mu).unwrap(), q);
    }

    #[test]
    fn measure_to_theta_examples() {
        let g = line();
        let zero = g.finite().zero();
        let uniform = AtomicSignedMeasure::finite(&g, &[(0.5, 0, zero.clone()), (0.5, 1, zero)]).unwrap();
        assert!(matches!(measure_to_theta(&uniform), Err(Error::NotThetaShape(_))));
        let dirac = AtomicSignedMeasure::dirac(&g, &g.zero()).unwrap();
        assert_eq!(measure_to_theta(&dirac).unwrap(), p(0.0, 0.0, 0.0, 0.0, 1.0));
        let mixture = AtomicSignedMeasure::gaussian(&g, 1.0, 0.0)
            .unwrap()
            .scaled(0.5)
            .plus(&AtomicSignedMeasure::gaussian(&g, 2.0, 0.0).unwrap().scaled(0.5))
            .unwrap();
        assert!(measure_to_theta(&mixture).is_err());
        let x3 = AmbientGroup::with_orders(&[3]).unwrap();
        let off = AtomicSignedMeasure::dirac(&x3, &x3.point(0.0, 0, &[1]).unwrap()).unwrap();
        assert!(measure_to_theta(&off).is_err());
    }

    #[test]
    fn degenerate_case_factorizes() {
        let g = line();
        let q = p(0.8, 0.8, 1.0, 1.0, -0.4);
        let mu = q.to_measure(&g).unwrap();
        let gauss = AtomicSignedMeasure::gaussian(&g, 0.8, 1.0).unwrap();
        let zero = g.finite().zero();
        let coin = AtomicSignedMeasure::finite(&g, &[(0.3, 0, zero.clone()), (0.7, 1, zero)]).unwrap();
        assert_eq!(mu, gauss.convolve(&coin).unwrap());
    }

    #[test]
    fn lambda_signed_examples() {
        let g = line();
        let lam = lambda_signed(&g, 2.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(lam, p(2.0, 1.0, 0.0, 0.0, 1.0).to_measure(&g).unwrap());
        assert_eq!(lam.total_mass(), 1.0);
        assert!(lam.is_distribution(1e-12).is_no());
        assert!(lambda_signed(&g, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn pi_group() {
        let g = line();
        let zero = g.finite().zero();
        let e0 = AtomicSignedMeasure::dirac(&g, &g.zero()).unwrap();
        let id = PiMeasure::new(1.0).unwrap();
        assert_eq!(id.to_measure(&g), e0);
        assert_eq!(id.invert(), id);

        let half = PiMeasure::new(0.5).unwrap();
        assert_eq!(
            half.to_measure(&g),
            AtomicSignedMeasure::finite(&g, &[(0.75, 0, zero.clone()), (0.25, 1, zero.clone())]).unwrap()
        );
        assert_eq!(
            half.invert().to_measure(&g),
            AtomicSignedMeasure::finite(&g, &[(1.5, 0, zero.clone()), (-0.5, 1, zero)]).unwrap()
        );
        assert_eq!(half.to_measure(&g).convolve(&half.invert().to_measure(&g)).unwrap(), e0);
        assert!(half.is_distribution() && !half.invert().is_distribution());
        assert!(PiMeasure::new(0.0).is_err());
        assert_eq!(half.compose(&PiMeasure::new(-3.0).unwrap()).c(), -1.5);
    }

    #[test]
    fn serde_shape() {
        let q = p(2.0, 1.0, 0.5, -0.5, 0.3);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"{"sigma":2.0,"sigma_p":1.0,"m":0.5,"m_p":-0.5,"kappa":0.3}"#);
        assert_eq!(serde_json::from_str::<ThetaParams<f64>>(&json).unwrap(), q);
        assert_eq!(serde_json::to_string(&PiMeasure::new(0.5).unwrap()).unwrap(), r#"{"c":0.5}"#);
    }
}
