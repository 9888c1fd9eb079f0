//! Structure of pairs `(mu1, mu2)` satisfying the symmetry condition on
//! `X = R x Z(2) x G`: instance generation, decomposition into
//! `gamma_j * omega_j * E_{x_j}`, cross constraints, and (non)uniqueness of the
//! `gamma * omega` factorization.

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::finite_abelian::{GroupAutomorphism, GroupElement};
use crate::group_rfg::{AmbientGroup, XAutomorphism, XPoint};
use crate::heyde::{delta_relation, equation_residual, DeltaRelation, SGrid, VANISHING_RATIO};
use crate::measures::{two_term_bound, AtomicSignedMeasure, Term};
use crate::theta::{read_theta_params, Membership, PiMeasure, ThetaParams};
use crate::{Error, Real, Result};

/// `|a + 1|` below this routes to the `a = -1` branch.
pub const MINUS_ONE_TOL: f64 = 1e-12;
/// Tolerance on `|kappa| = rho` in the rigidity decision.
pub const RIGIDITY_TOL: f64 = 1e-12;

/// Input of [`generate_instance`].
///
/// `mu2 = theta2 * omega2 * E_{x2}` and `mu1 = theta1 * (omega2 * vartheta) * E_{x1}`,
/// where `theta1 = (-a sigma2, -a sigma2', -a m2, -a m2', kappa1)`, `x1 = -alpha x2`
/// and `vartheta = ((1 + d)/2) E_0 + ((1 - d)/2) E_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec<T> {
    pub group: AmbientGroup,
    pub a: T,
    pub alpha_g: GroupAutomorphism,
    pub theta2: ThetaParams<T>,
    pub kappa1: T,
    /// Distribution on `Z(2) x K`.
    pub omega2: AtomicSignedMeasure<T>,
    /// The parameter `d` of `vartheta`.
    pub vartheta: T,
    pub x2: XPoint<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Instance<T> {
    pub mu1: AtomicSignedMeasure<T>,
    pub mu2: AtomicSignedMeasure<T>,
    #[serde(skip)]
    pub alpha: XAutomorphism<T>,
    pub theta1: ThetaParams<T>,
    pub theta2: ThetaParams<T>,
    pub x1: XPoint<T>,
    pub x2: XPoint<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    ANotMinusOne,
    AMinusOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaRelation {
    /// `omega1 = omega2 * vartheta2`.
    Omega1EqOmega2ConvVartheta2,
    /// `omega2 = omega1 * vartheta1`.
    Omega2EqOmega1ConvVartheta1,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarthetaReport<T> {
    pub relation: OmegaRelation,
    /// Parameter `d` of `vartheta = ((1 + d)/2) E_0 + ((1 - d)/2) E_p`, `|d| <= 1`.
    pub d: T,
    /// Every `(relation, d)` that fits; more than one entry only when `|d| = 1`.
    pub candidates: Vec<(OmegaRelation, T)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition<T> {
    pub branch: Branch,
    /// Parameters read from `mu_j^(s, 0, 0)` and `mu_j^(s, 1, 0)`, when they have Theta shape.
    pub theta: Option<[ThetaParams<T>; 2]>,
    /// Theta factors (branch `a != -1`), normalized to `|kappa| = rho_j` in the strict case.
    pub gamma: Option<[ThetaParams<T>; 2]>,
    /// `pi_j` with `omega_j = tau_j * pi_j`.
    pub pi: Option<[PiMeasure<T>; 2]>,
    pub omega: [AtomicSignedMeasure<T>; 2],
    pub shift: [XPoint<T>; 2],
    pub vartheta: VarthetaReport<T>,
    /// `K = Ker(I + alpha_G)`.
    pub kernel: Vec<GroupElement>,
    pub residual: T,
    /// Characteristic sup-error of the reconstruction of each `mu_j`.
    pub reconstruction_error: [T; 2],
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Rigidity<T> {
    /// The factorization is unique up to a shift by `p`.
    Rigid,
    /// `gamma * pi` and `omega * pi^-1` are another valid factorization.
    Flexible {
        pi: PiMeasure<T>,
        gamma: ThetaParams<T>,
        omega: AtomicSignedMeasure<T>,
    },
}

/// `theta1` determined by `theta2`, `a` and `kappa1`.
pub fn theta1_for<T: Real>(a: T, theta2: &ThetaParams<T>, kappa1: T) -> ThetaParams<T> {
    ThetaParams {
        sigma: -a * theta2.sigma,
        sigma_p: -a * theta2.sigma_p,
        m: -a * theta2.m,
        m_p: -a * theta2.m_p,
        kappa: kappa1,
    }
}

fn finite_nonvanishing<T: Real>(mu: &AtomicSignedMeasure<T>) -> bool {
    let table = mu.char_table();
    let ones = vec![Complex::new(T::one(), T::zero()); table.atoms().len()];
    (0..table.dual_len()).all(|d| table.eval_with(&ones, d).norm() >= T::lit(VANISHING_RATIO))
}

/// Every reason `spec` cannot produce an instance, in a fixed order.
pub fn spec_violations<T: Real>(spec: &InstanceSpec<T>) -> Vec<String> {
    let mut out = Vec::new();
    let a = spec.a;
    if a == T::zero() || !a.is_finite() {
        out.push(format!("a must be finite and nonzero, got {a}"));
        return out;
    }
    if spec.alpha_g.group() != spec.group.finite() {
        out.push("alpha_G acts on a different group".into());
        return out;
    }
    let t2 = &spec.theta2;
    if a > T::zero() && (t2.sigma > T::zero() || t2.sigma_p > T::zero()) {
        out.push(format!(
            "a = {a} > 0 forces sigma2 = sigma2' = 0 (sigma1 = -a sigma2 must be >= 0), got sigma2 = {}, sigma2' = {}",
            t2.sigma, t2.sigma_p
        ));
    }
    if !t2.is_in_theta() {
        out.push(format!("theta2 {t2:?} is not in Theta"));
    }
    if t2.kappa == T::zero() {
        out.push("kappa2 = 0 makes the characteristic function of mu2 vanish".into());
    }
    let t1 = theta1_for(a, t2, spec.kappa1);
    if t1.validate().is_ok() && !t1.is_in_theta() {
        out.push(format!("derived theta1 {t1:?} is not in Theta"));
    }
    if spec.kappa1 == T::zero() {
        out.push("kappa1 = 0 makes the characteristic function of mu1 vanish".into());
    }
    if spec.omega2.group() != &spec.group {
        out.push("omega2 lives on a different group".into());
        return out;
    }
    let kernel = spec.alpha_g.kernel_of_i_plus();
    match spec.alpha_g.restriction_is_minus_identity(&kernel) {
        Ok(true) => {}
        _ => out.push("alpha_G restricted to K is not -I".into()),
    }
    if !spec.omega2.is_finitely_supported() {
        out.push("omega2 must be supported on Z(2) x G (sigma = 0, t = 0 atoms)".into());
    }
    if let Some(t) = spec.omega2.terms().iter().find(|t| !kernel.contains(&t.g)) {
        out.push(format!("omega2 has an atom at g = {:?} outside K = Ker(I + alpha_G)", t.g.coords()));
    }
    if !spec.omega2.is_distribution(T::lit(1e-12)).accepts() {
        out.push("omega2 is not a probability distribution".into());
    } else if !finite_nonvanishing(&spec.omega2) {
        out.push("omega2 has a vanishing characteristic function".into());
    }
    let d = spec.vartheta;
    if !(d.abs() <= T::one()) || d == T::zero() {
        out.push(format!("vartheta parameter d must satisfy 0 < |d| <= 1, got {d}"));
    }
    if spec.group.check_point(&spec.x2).is_err() {
        out.push("x2 is not a point of X".into());
    }
    out
}

/// Builds `(mu1, mu2, alpha)` satisfying the symmetry condition.
pub fn generate_instance<T: Real>(spec: &InstanceSpec<T>) -> Result<Instance<T>> {
    let mut violations = spec_violations(spec);
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    let group = &spec.group;
    let alpha = XAutomorphism::new(spec.a, spec.alpha_g.clone())?;
    let theta1 = theta1_for(spec.a, &spec.theta2, spec.kappa1);
    let x1 = group.neg(&alpha.apply(&spec.x2)?)?;
    let vartheta = PiMeasure::new(spec.vartheta)?.to_measure(group);
    let omega1 = spec.omega2.convolve(&vartheta)?;
    let mu1 = theta1.to_measure(group)?.convolve(&omega1)?.shifted(&x1)?;
    let mu2 = spec.theta2.to_measure(group)?.convolve(&spec.omega2)?.shifted(&spec.x2)?;
    let tol = T::lit(1e-12);
    if let crate::measures::Verdict::No(w) = mu1.is_distribution(tol) {
        violations.push(format!("mu1 is not a distribution: {w:?}"));
    }
    if let crate::measures::Verdict::No(w) = mu2.is_distribution(tol) {
        violations.push(format!("mu2 is not a distribution: {w:?}"));
    }
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    Ok(Instance {
        mu1,
        mu2,
        alpha,
        theta1,
        theta2: spec.theta2,
        x1,
        x2: spec.x2.clone(),
    })
}

/// A random feasible spec for the given group, `alpha_G` and `a`.
///
/// For `a < 0` the Theta part is strict with probability 0.8, with both bounds
/// `rho_j >= 0.05` (otherwise Gaussian with a Z(2) factor); for `a > 0` the real parts are point masses. `omega2` puts
/// at least 0.6 of its mass at the identity, so its characteristic function is
/// bounded away from zero.
pub fn random_spec<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    group: &AmbientGroup,
    alpha_g: &GroupAutomorphism,
    a: T,
) -> InstanceSpec<T> {
    let lit = T::lit;
    let sign = |rng: &mut R| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let af = a.as_f64();
    let (theta2, kappa1) = if af < 0.0 {
        let sigma2 = rng.random_range(0.3..1.5);
        if rng.random_bool(0.8) {
            // Redraw until both bounds stay above 0.05; tiny rho_j make mu_j^(s, 1, .)
            // numerically zero.
            let (t2, rho1, rho2) = loop {
                let sigma2_p = sigma2 * rng.random_range(0.2..0.9);
                let (m2, m2_p) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let t2 = ThetaParams {
                    sigma: lit(sigma2),
                    sigma_p: lit(sigma2_p),
                    m: lit(m2),
                    m_p: lit(m2_p),
                    kappa: T::one(),
                };
                let rho2 = t2.rho().expect("strict").as_f64();
                let rho1 = theta1_for(a, &t2, T::one()).rho().expect("strict").as_f64();
                if rho1.min(rho2) >= 0.05 {
                    break (t2, rho1, rho2);
                }
            };
            let k2 = if rng.random_bool(0.25) { rho2 } else { rho2 * rng.random_range(0.3..1.0) };
            let t2 = t2.with_kappa(lit(sign(rng) * k2));
            let k1 = if rng.random_bool(0.25) { rho1 } else { rho1 * rng.random_range(0.3..1.0) };
            (t2, lit(sign(rng) * k1))
        } else {
            let m2 = rng.random_range(-1.0..1.0);
            let t2 = ThetaParams::gaussian(lit(sigma2), lit(m2)).with_kappa(lit(sign(rng) * rng.random_range(0.2..1.0)));
            (t2, lit(sign(rng) * rng.random_range(0.2..1.0)))
        }
    } else {
        let m2 = rng.random_range(-1.0..1.0);
        let t2 = ThetaParams::gaussian(T::zero(), lit(m2)).with_kappa(lit(sign(rng) * rng.random_range(0.2..1.0)));
        (t2, lit(sign(rng) * rng.random_range(0.2..1.0)))
    };

    let finite = group.finite();
    let kernel = alpha_g.kernel_of_i_plus();
    let w0 = rng.random_range(0.6..0.9);
    let extra = rng.random_range(1..=3usize);
    let mut weights: Vec<f64> = (0..extra).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w *= (1.0 - w0) / total);
    let mut masses = vec![(lit(w0), 0u8, finite.zero())];
    for w in weights {
        let k = kernel[rng.random_range(0..kernel.len())].clone();
        masses.push((lit(w), rng.random_range(0..2u8), k));
    }
    let omega2 = AtomicSignedMeasure::finite(group, &masses).expect("valid omega2");

    let g2 = finite.element_at(rng.random_range(0..finite.cardinality() as usize));
    let x2 = XPoint {
        t: lit(rng.random_range(-1.0..1.0)),
        m: rng.random_range(0..2u8),
        g: g2,
    };
    InstanceSpec {
        group: group.clone(),
        a,
        alpha_g: alpha_g.clone(),
        theta2,
        kappa1,
        omega2,
        vartheta: lit(sign(rng) * rng.random_range(0.2..1.0)),
        x2,
    }
}

/// `sigma1 + a sigma2`, `sigma1' + a sigma2'`, `m1 + a m2`, `m1' + a m2'` all within `tol` of zero.
pub fn check_cross_constraints<T: Real>(theta1: &ThetaParams<T>, theta2: &ThetaParams<T>, a: T, tol: T) -> bool {
    [
        theta1.sigma + a * theta2.sigma,
        theta1.sigma_p + a * theta2.sigma_p,
        theta1.m + a * theta2.m,
        theta1.m_p + a * theta2.m_p,
    ]
    .iter()
    .all(|v| v.abs() <= tol)
}

/// `sum a_i E_{g_i} + sum b_i E_{g_i + p}`.
pub fn tau_measure<T: Real>(group: &AmbientGroup, coeffs: &[(GroupElement, T, T)]) -> Result<AtomicSignedMeasure<T>> {
    let masses: Vec<(T, u8, GroupElement)> = coeffs
        .iter()
        .flat_map(|(g, a, b)| [(*a, 0u8, g.clone()), (*b, 1u8, g.clone())])
        .collect();
    AtomicSignedMeasure::finite(group, &masses)
}

/// `lambda * tau` is a distribution iff `|a_i - b_i| / (a_i + b_i) <= rho` whenever `a_i + b_i > 0`.
pub fn lambda_tau_criterion<T: Real>(sigma: T, m: T, sigma_p: T, m_p: T, coeffs: &[(T, T)]) -> Result<bool> {
    let rho = two_term_bound(sigma, m, sigma_p, m_p)?;
    if coeffs.iter().any(|(a, b)| *a < T::zero() || *b < T::zero()) {
        return Err(Error::Precondition("tau coefficients must be nonnegative".into()));
    }
    let total: T = coeffs.iter().map(|(a, b)| *a + *b).sum();
    if (total - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::Precondition(format!("tau coefficients sum to {total}, expected 1")));
    }
    Ok(coeffs
        .iter()
        .filter(|(a, b)| *a + *b > T::zero())
        .all(|(a, b)| (*a - *b).abs() / (*a + *b) <= rho))
}

/// Masses `(g, a, b)` of a measure on `Z(2) x G`: `a` at `(0, g)`, `b` at `(1, g)`.
fn parity_masses<T: Real>(omega: &AtomicSignedMeasure<T>) -> Vec<(GroupElement, T, T)> {
    let mut out: Vec<(GroupElement, T, T)> = Vec::new();
    for t in omega.terms() {
        let entry = match out.iter().position(|(g, _, _)| *g == t.g) {
            Some(i) => &mut out[i],
            None => {
                out.push((t.g.clone(), T::zero(), T::zero()));
                out.last_mut().unwrap()
            }
        };
        if t.m == 0 {
            entry.1 = entry.1 + t.c;
        } else {
            entry.2 = entry.2 + t.c;
        }
    }
    out
}

fn require_strict<T: Real>(gamma: &ThetaParams<T>) -> Result<T> {
    let rho = gamma.rho()?;
    if gamma.kappa == T::zero() || gamma.membership() == Membership::Outside {
        return Err(Error::Precondition(format!("gamma {gamma:?} must be a strict Theta distribution with kappa != 0")));
    }
    Ok(rho)
}

fn require_finite_distribution<T: Real>(omega: &AtomicSignedMeasure<T>) -> Result<()> {
    if !omega.is_finitely_supported() {
        return Err(Error::Precondition("omega must be supported on Z(2) x G".into()));
    }
    if !finite_nonvanishing(omega) {
        return Err(Error::Vanishing("characteristic function of omega vanishes".into()));
    }
    Ok(())
}

/// `(gamma * pi, omega * pi^-1)`: the same product with the `Z(2)` factor moved across.
pub fn factor_exchange<T: Real>(
    gamma: &ThetaParams<T>,
    omega: &AtomicSignedMeasure<T>,
    pi: &PiMeasure<T>,
) -> Result<(ThetaParams<T>, AtomicSignedMeasure<T>)> {
    if !gamma.is_strict() {
        return Err(Error::Precondition("factor_exchange needs 0 < sigma' < sigma".into()));
    }
    require_finite_distribution(omega)?;
    let omega_p = omega.convolve(&pi.invert().to_measure(omega.group()))?;
    Ok((gamma.with_kappa(gamma.kappa * pi.c()), omega_p))
}

/// Decides whether `gamma * omega` has a factorization other than `(gamma * E_m, omega * E_m)`.
///
/// Rigid iff `|kappa| = rho` and some `g_i` carries mass on exactly one of its two
/// cosets. Otherwise an explicit `pi` is returned: `c = rho / kappa` when
/// `|kappa| < rho`, and `c = (1 + q)/2` with `q = max |a_i - b_i|/(a_i + b_i)` when
/// `|kappa| = rho`.
pub fn rigidity_decision<T: Real>(gamma: &ThetaParams<T>, omega: &AtomicSignedMeasure<T>) -> Result<Rigidity<T>> {
    let rho = require_strict(gamma)?;
    require_finite_distribution(omega)?;
    if !omega.is_distribution(T::lit(1e-12)).accepts() {
        return Err(Error::Precondition("omega must be a probability distribution".into()));
    }
    let masses = parity_masses(omega);
    let kappa = gamma.kappa;
    let at_bound = (kappa.abs() - rho).abs() <= T::lit(RIGIDITY_TOL);
    let one_sided = masses
        .iter()
        .any(|(_, a, b)| (*a == T::zero() && *b > T::zero()) || (*a > T::zero() && *b == T::zero()));
    if at_bound && one_sided {
        return Ok(Rigidity::Rigid);
    }
    let c = if !at_bound {
        rho / kappa
    } else {
        let q = masses
            .iter()
            .filter(|(_, a, b)| *a + *b > T::zero())
            .map(|(_, a, b)| (*a - *b).abs() / (*a + *b))
            .fold(T::zero(), |m, v| m.max(v));
        (T::one() + q) * T::lit(0.5)
    };
    let pi = PiMeasure::new(c)?;
    let (gamma_p, omega_p) = factor_exchange(gamma, omega, &pi)?;
    if gamma_p.membership() == Membership::Outside || !omega_p.is_distribution(T::lit(1e-12)).accepts() {
        return Err(Error::Hypothesis(format!("witness pi = {c} does not produce valid factors")));
    }
    Ok(Rigidity::Flexible {
        pi,
        gamma: gamma_p,
        omega: omega_p,
    })
}

/// Characteristic sup-distance over a real grid and every finite character.
fn char_sup_distance<T: Real>(a: &AtomicSignedMeasure<T>, b: &AtomicSignedMeasure<T>, grid: &SGrid<T>) -> Result<T> {
    let diff = a.minus(b)?;
    let table = diff.char_table();
    let mut worst = T::zero();
    for s in grid.values() {
        let vals = table.atom_values(s);
        for d in 0..table.dual_len() {
            worst = worst.max(table.eval_with(&vals, d).norm());
        }
    }
    Ok(worst)
}

fn lex_min_in_coset(group: &AmbientGroup, g: &GroupElement, kernel: &[GroupElement]) -> GroupElement {
    let finite = group.finite();
    kernel
        .iter()
        .map(|k| finite.add_unchecked(g, k))
        .min()
        .expect("kernel contains zero")
}

fn check_coset<T: Real>(label: &str, mu: &AtomicSignedMeasure<T>, g: &GroupElement, kernel: &[GroupElement]) -> Result<()> {
    let finite = mu.group().finite();
    for t in mu.terms() {
        let diff = finite.add_unchecked(&t.g, &finite.neg_unchecked(g));
        if !kernel.contains(&diff) {
            return Err(Error::Hypothesis(format!(
                "{label} has atoms at g = {:?} outside the coset {:?} + K",
                t.g.coords(),
                g.coords()
            )));
        }
    }
    Ok(())
}

/// Normalizes `omega_a = omega_b * vartheta(v)` so that the reported `vartheta` is a distribution.
fn normalize_vartheta<T: Real>(omega1_from_2: bool, v: T, tol: T) -> VarthetaReport<T> {
    use OmegaRelation::*;
    // Express everything as omega1 = omega2 * vartheta(w).
    let w = if omega1_from_2 { v } else { v.recip() };
    let tie = (w.abs() - T::one()).abs() <= tol;
    let clamp = |x: T| x.max(-T::one()).min(T::one());
    if tie {
        let w = clamp(w);
        VarthetaReport {
            relation: Omega1EqOmega2ConvVartheta2,
            d: w,
            candidates: vec![(Omega1EqOmega2ConvVartheta2, w), (Omega2EqOmega1ConvVartheta1, w.recip())],
        }
    } else if w.abs() < T::one() {
        VarthetaReport {
            relation: Omega1EqOmega2ConvVartheta2,
            d: w,
            candidates: vec![(Omega1EqOmega2ConvVartheta2, w)],
        }
    } else {
        VarthetaReport {
            relation: Omega2EqOmega1ConvVartheta1,
            d: w.recip(),
            candidates: vec![(Omega2EqOmega1ConvVartheta1, w.recip())],
        }
    }
}

/// Splits a pair satisfying the symmetry condition into its structural pieces.
///
/// For `a != -1`: `mu_j = gamma_j * omega_j * E_{x_j}` with `gamma_j` in Theta,
/// `omega_j` a distribution on `Z(2) x K` and `x_j = (0, 0, g_j)`. For `a = -1`:
/// `mu_j = omega_j * E_{x_j}` with `omega_j` on `R x Z(2) x K`. In both cases
/// `omega1 = omega2 * vartheta2` or `omega2 = omega1 * vartheta1` with `vartheta_j`
/// a distribution on `Z(2)`.
///
/// `g2` is the lexicographically smallest representative of the `K`-coset carrying
/// `mu2`, and `g1 = -alpha_G g2`; any other choice of `g1` inside its coset would
/// shift `omega1` by an element of `K` and break the `vartheta` relation.
pub fn decompose<T: Real>(
    mu1: &AtomicSignedMeasure<T>,
    mu2: &AtomicSignedMeasure<T>,
    alpha: &XAutomorphism<T>,
    tol: T,
) -> Result<Decomposition<T>> {
    let group = mu1.group().clone();
    let finite = group.finite();
    let grid = SGrid::default_for(mu1, mu2);
    let report = equation_residual(mu1, mu2, alpha, &grid)?;
    if !report.flags.is_empty() {
        return Err(Error::Vanishing(report.flags.join("; ")));
    }
    if report.residual > tol {
        return Err(Error::Hypothesis(format!(
            "equation residual {} exceeds tolerance {tol}",
            report.residual
        )));
    }
    if mu1.is_zero() || mu2.is_zero() {
        return Err(Error::ZeroMass);
    }

    let alpha_g = alpha.alpha_g();
    let kernel = alpha_g.kernel_of_i_plus();
    let heaviest = mu2
        .terms()
        .iter()
        .fold(&mu2.terms()[0], |best, t| if t.c.abs() > best.c.abs() { t } else { best });
    let g2 = lex_min_in_coset(&group, &heaviest.g, &kernel);
    let g1 = finite.neg_unchecked(&alpha_g.apply_unchecked(&g2));
    check_coset("mu1", mu1, &g1, &kernel)?;
    check_coset("mu2", mu2, &g2, &kernel)?;
    let x = |g: &GroupElement| XPoint {
        t: T::zero(),
        m: 0,
        g: g.clone(),
    };
    let shift = [x(&g1), x(&g2)];
    let theta_j = [
        mu1.shifted(&group.neg(&shift[0])?)?,
        mu2.shifted(&group.neg(&shift[1])?)?,
    ];
    let read = [read_theta_params(&theta_j[0]), read_theta_params(&theta_j[1])];
    let a = alpha.a();
    let mut notes = Vec::new();

    let (branch, theta, gamma, pi, omega, vartheta) = if (a + T::one()).abs() < T::lit(MINUS_ONE_TOL) {
        notes.push("a = -1: mu_j = omega_j * E_{x_j}; shifts x_j are reported as points of X with t = 0, m = 0".into());
        let theta = match (&read[0], &read[1]) {
            (Ok(p1), Ok(p2)) => Some([*p1, *p2]),
            _ => None,
        };
        let omega = theta_j.clone();
        for (j, w) in omega.iter().enumerate() {
            if !w.is_distribution(T::lit(1e-12)).accepts() {
                return Err(Error::Hypothesis(format!("omega{} is not a distribution", j + 1)));
            }
        }
        let vartheta = match delta_relation(&omega[0], &omega[1], tol)? {
            DeltaRelation::Tau1EqTau2ConvDelta { d, .. } => normalize_vartheta(true, d, tol),
            DeltaRelation::Tau2EqTau1ConvDelta { d, .. } => normalize_vartheta(false, d, tol),
            DeltaRelation::Neither => {
                return Err(Error::Hypothesis("omega1, omega2 are not related by a distribution on Z(2)".into()))
            }
        };
        (Branch::AMinusOne, theta, None, None, omega, vartheta)
    } else {
        let mut params = Vec::with_capacity(2);
        for (j, r) in read.iter().enumerate() {
            match r {
                Ok(p) => params.push(*p),
                Err(e) => return Err(Error::Hypothesis(format!("mu{} is not of Theta shape on R x Z(2): {e}", j + 1))),
            }
        }
        let (p1, p2) = (params[0], params[1]);
        if !check_cross_constraints(&p1, &p2, a, tol) {
            return Err(Error::Hypothesis(format!(
                "cross constraints fail for a = {a}: theta1 = {p1:?}, theta2 = {p2:?}"
            )));
        }
        let mut gammas = Vec::with_capacity(2);
        let mut pis = Vec::with_capacity(2);
        let mut omegas = Vec::with_capacity(2);
        let mut taus = Vec::with_capacity(2);
        for (j, p) in params.iter().enumerate() {
            if p.membership() == Membership::Outside {
                return Err(Error::Hypothesis(format!("recovered theta{} = {p:?} is not in Theta", j + 1)));
            }
            let tau = theta_j[j].freeze_real_part();
            let (gamma, pi) = if p.is_strict() {
                let rho = p.rho()?;
                let sign = p.kappa.signum();
                (p.with_kappa(sign * rho), PiMeasure::new(sign / rho)?)
            } else {
                if p.sigma == T::zero() {
                    notes.push(format!(
                        "sigma{} = 0: real part is the point mass at {}",
                        j + 1,
                        p.m
                    ));
                }
                (ThetaParams::gaussian(p.sigma, p.m), PiMeasure::identity())
            };
            let omega = tau.convolve(&pi.to_measure(&group))?;
            gammas.push(gamma);
            pis.push(pi);
            omegas.push(omega);
            taus.push(tau);
        }
        for (j, w) in omegas.iter().enumerate() {
            if !w.is_finitely_supported() || w.terms().iter().any(|t| !kernel.contains(&t.g)) {
                return Err(Error::Hypothesis(format!("omega{} is not supported on Z(2) x K", j + 1)));
            }
            if !w.is_distribution(T::lit(1e-12)).accepts() {
                return Err(Error::Hypothesis(format!("omega{} is not a distribution", j + 1)));
            }
        }
        let (c1, c2) = (pis[0].c(), pis[1].c());
        let vartheta = match delta_relation(&taus[0], &taus[1], tol)? {
            DeltaRelation::Tau1EqTau2ConvDelta { d, .. } => normalize_vartheta(true, d * c1 / c2, tol),
            DeltaRelation::Tau2EqTau1ConvDelta { d, .. } => normalize_vartheta(false, d * c2 / c1, tol),
            DeltaRelation::Neither => {
                return Err(Error::Hypothesis("tau1, tau2 are not related by a distribution on Z(2)".into()))
            }
        };
        (
            Branch::ANotMinusOne,
            Some([p1, p2]),
            Some([gammas[0], gammas[1]]),
            Some([pis[0], pis[1]]),
            [omegas[0].clone(), omegas[1].clone()],
            vartheta,
        )
    };

    let vt = PiMeasure::new(vartheta.d)?.to_measure(&group);
    let (lhs, rhs) = match vartheta.relation {
        OmegaRelation::Omega1EqOmega2ConvVartheta2 => (&omega[0], omega[1].convolve(&vt)?),
        OmegaRelation::Omega2EqOmega1ConvVartheta1 => (&omega[1], omega[0].convolve(&vt)?),
    };
    let scale = lhs.terms().iter().map(|t| t.c.abs()).sum::<T>().max(T::one());
    if lhs.coefficient_distance(&rhs, T::zero()) > tol * scale {
        return Err(Error::Hypothesis("vartheta relation does not reproduce omega".into()));
    }

    let mut reconstruction_error = [T::zero(); 2];
    for (j, mu) in [mu1, mu2].into_iter().enumerate() {
        let base = match &gamma {
            Some(gs) => gs[j].to_measure(&group)?.convolve(&omega[j])?,
            None => omega[j].clone(),
        };
        let rebuilt = base.shifted(&shift[j])?;
        reconstruction_error[j] = char_sup_distance(&rebuilt, mu, &grid)?;
        if reconstruction_error[j] > tol {
            return Err(Error::Hypothesis(format!(
                "reconstruction of mu{} is off by {}",
                j + 1,
                reconstruction_error[j]
            )));
        }
    }

    Ok(Decomposition {
        branch,
        theta,
        gamma,
        pi,
        omega,
        shift,
        vartheta,
        kernel,
        residual: report.residual,
        reconstruction_error,
        notes,
    })
}

/// Every atom of `omega` lies on `Z(2) x K` (or `R x Z(2) x K` when `allow_real`).
pub fn supported_on_kernel<T: Real>(omega: &AtomicSignedMeasure<T>, kernel: &[GroupElement], allow_real: bool) -> bool {
    omega
        .terms()
        .iter()
        .all(|t: &Term<T>| kernel.contains(&t.g) && (allow_real || (t.sigma == T::zero() && t.shift == T::zero())))
}
