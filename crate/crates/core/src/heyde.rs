//! The symmetry condition for `L2 = xi1 + alpha xi2` given `L1 = xi1 + xi2`,
//! through its characteristic-function form
//! `mu1^(u + v) mu2^(u + alpha~ v) = mu1^(u - v) mu2^(u - alpha~ v)`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::finite_abelian::{DualCharacter, GroupAutomorphism};
use crate::group_rfg::{AmbientGroup, XAutomorphism, XPoint, YPoint};
use crate::measures::{AtomicSignedMeasure, CharTable};
use crate::theta::PiMeasure;
use crate::{Error, Real, Result};

/// A characteristic value below this fraction of its absolute envelope counts as vanishing.
pub const VANISHING_RATIO: f64 = 1e-10;
/// Default number of grid points per real coordinate.
pub const DEFAULT_GRID_POINTS: usize = 33;
/// Number of independent sample blocks in the Monte-Carlo test.
const MC_BLOCKS: usize = 64;
const MAX_FLAGS: usize = 16;

/// Symmetric grid `{-S + k 2S/(M-1) : k = 0..M}` for the real coordinates of `u` and `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SGrid<T> {
    pub half_width: T,
    pub points: usize,
}

impl<T: Real> SGrid<T> {
    pub fn new(half_width: T, points: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() || points < 2 {
            return Err(Error::Precondition(format!(
                "grid needs S > 0 and M >= 2, got S={half_width}, M={points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    /// `S = 5 / sqrt(min positive sigma)` over both measures, or 10 if every atom is a point mass.
    pub fn default_for(mu1: &AtomicSignedMeasure<T>, mu2: &AtomicSignedMeasure<T>) -> Self {
        let min_sigma = mu1
            .terms()
            .iter()
            .chain(mu2.terms())
            .map(|t| t.sigma)
            .filter(|s| *s > T::zero())
            .fold(T::infinity(), |m, s| m.min(s));
        let half_width = if min_sigma.is_finite() {
            T::lit(5.0) / min_sigma.sqrt()
        } else {
            T::lit(10.0)
        };
        Self {
            half_width,
            points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn values(&self) -> Vec<T> {
        let step = T::lit(2.0) * self.half_width / T::from_usize_lossy(self.points - 1);
        (0..self.points)
            .map(|k| -self.half_width + step * T::from_usize_lossy(k))
            .collect()
    }
}

/// The probe `u = (s1, n, h1)`, `v = (s2, 0, h2)` at which a residual was attained.
///
/// Only `n = n1 + n2` enters the equation, so the Z(2) coordinates collapse to one bit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe<T> {
    pub s1: T,
    pub s2: T,
    pub n: u8,
    pub h1: DualCharacter,
    pub h2: DualCharacter,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub residual: T,
    pub argmax: Option<Probe<T>>,
    pub grid: SGrid<T>,
    /// Probes where a characteristic value vanishes relative to its envelope.
    pub flags: Vec<String>,
}

impl<T> ResidualReport<T> {
    pub fn nonvanishing(&self) -> bool {
        self.flags.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport<T> {
    pub statistic: T,
    pub threshold: T,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum DeltaRelation<T> {
    /// `tau1 = tau2 * delta` with `delta = ((1 + d)/2) E_0 + ((1 - d)/2) E_p`.
    Tau1EqTau2ConvDelta { d: T, tie: bool },
    /// `tau2 = tau1 * delta`.
    Tau2EqTau1ConvDelta { d: T, tie: bool },
    Neither,
}

fn check_groups<T: Real>(
    mu1: &AtomicSignedMeasure<T>,
    mu2: &AtomicSignedMeasure<T>,
    alpha: &XAutomorphism<T>,
) -> Result<()> {
    if mu1.group() != mu2.group() || alpha.alpha_g().group() != mu1.group().finite() {
        return Err(Error::GroupMismatch(
            "measures and automorphism must live on the same group".into(),
        ));
    }
    Ok(())
}

/// Index tables over `H`: `h1 + h2`, `h1 - h2`, `h1 + alpha~ h2`, `h1 - alpha~ h2`.
struct DualTables {
    size: usize,
    plus: Vec<usize>,
    minus: Vec<usize>,
    plus_alpha: Vec<usize>,
    minus_alpha: Vec<usize>,
}

impl DualTables {
    fn new(group: &AmbientGroup, alpha_h: &GroupAutomorphism) -> Self {
        let finite = group.finite();
        let size = finite.cardinality() as usize;
        let elems: Vec<_> = (0..size).map(|i| finite.element_at(i)).collect();
        let twisted: Vec<_> = elems.iter().map(|h| alpha_h.apply_unchecked(h)).collect();
        let mut plus = vec![0; size * size];
        let mut minus = vec![0; size * size];
        let mut plus_alpha = vec![0; size * size];
        let mut minus_alpha = vec![0; size * size];
        for (i, h1) in elems.iter().enumerate() {
            for j in 0..size {
                let k = i * size + j;
                plus[k] = finite.index_of(&finite.add_unchecked(h1, &elems[j]));
                minus[k] = finite.index_of(&finite.add_unchecked(h1, &finite.neg_unchecked(&elems[j])));
                plus_alpha[k] = finite.index_of(&finite.add_unchecked(h1, &twisted[j]));
                minus_alpha[k] = finite.index_of(&finite.add_unchecked(h1, &finite.neg_unchecked(&twisted[j])));
            }
        }
        Self {
            size,
            plus,
            minus,
            plus_alpha,
            minus_alpha,
        }
    }
}

struct Cell<T> {
    residual: T,
    index: usize,
    n: u8,
    h1: usize,
    h2: usize,
    flags: Vec<String>,
}

fn vanishes<T: Real>(value: Complex<T>, envelope: T) -> bool {
    value.norm() < T::lit(VANISHING_RATIO) * envelope
}

/// Largest `|LHS - RHS|` over the real grid for `s1, s2` and every finite coordinate.
pub fn equation_residual<T: Real>(
    mu1: &AtomicSignedMeasure<T>,
    mu2: &AtomicSignedMeasure<T>,
    alpha: &XAutomorphism<T>,
    grid: &SGrid<T>,
) -> Result<ResidualReport<T>> {
    check_groups(mu1, mu2, alpha)?;
    let group = mu1.group();
    let tables = DualTables::new(group, alpha.adjoint().alpha_h());
    let t1 = mu1.char_table();
    let t2 = mu2.char_table();
    let a = alpha.a();
    let values = grid.values();
    let m = values.len();
    let hsize = tables.size;

    let best = (0..m * m)
        .into_par_iter()
        .map(|index| {
            let (s1, s2) = (values[index / m], values[index % m]);
            let v1p = t1.atom_values(s1 + s2);
            let v1m = t1.atom_values(s1 - s2);
            let v2p = t2.atom_values(s1 + a * s2);
            let v2m = t2.atom_values(s1 - a * s2);
            let mut cell = Cell {
                residual: T::zero(),
                index,
                n: 0,
                h1: 0,
                h2: 0,
                flags: Vec::new(),
            };
            for n in 0..2u8 {
                let base = n as usize * hsize;
                for h1 in 0..hsize {
                    for h2 in 0..hsize {
                        let k = h1 * hsize + h2;
                        let evals = [
                            (&t1, &v1p, tables.plus[k], "mu1(u+v)"),
                            (&t2, &v2p, tables.plus_alpha[k], "mu2(u+av)"),
                            (&t1, &v1m, tables.minus[k], "mu1(u-v)"),
                            (&t2, &v2m, tables.minus_alpha[k], "mu2(u-av)"),
                        ]
                        .map(|(table, vals, h, label)| {
                            let value = table.eval_with(vals, base + h);
                            if cell.flags.len() < MAX_FLAGS && vanishes(value, table.envelope_with(vals, base + h)) {
                                cell.flags.push(format!(
                                    "vanishing {label} at s1={s1}, s2={s2}, n={n}, h1={h1}, h2={h2}"
                                ));
                            }
                            value
                        });
                        let r = (evals[0] * evals[1] - evals[2] * evals[3]).norm();
                        if r > cell.residual {
                            cell.residual = r;
                            cell.n = n;
                            cell.h1 = h1;
                            cell.h2 = h2;
                        }
                    }
                }
            }
            cell
        })
        .reduce_with(|x, y| {
            let (mut keep, other) = if y.residual > x.residual || (y.residual == x.residual && y.index < x.index) {
                (y, x)
            } else {
                (x, y)
            };
            let (first, second) = if keep.index < other.index {
                (std::mem::take(&mut keep.flags), other.flags)
            } else {
                (other.flags, std::mem::take(&mut keep.flags))
            };
            keep.flags = first.into_iter().chain(second).take(MAX_FLAGS).collect();
            keep
        })
        .expect("grid is nonempty");

    let finite = group.finite();
    Ok(ResidualReport {
        residual: best.residual,
        argmax: Some(Probe {
            s1: values[best.index / m],
            s2: values[best.index % m],
            n: best.n,
            h1: finite.element_at(best.h1).into(),
            h2: finite.element_at(best.h2).into(),
        }),
        grid: *grid,
        flags: best.flags,
    })
}

/// Probe pairs `(u, v)` scaled to the spread of the measures.
pub fn default_probes<T: Real>(
    mu1: &AtomicSignedMeasure<T>,
    mu2: &AtomicSignedMeasure<T>,
    alpha: &XAutomorphism<T>,
) -> Vec<(YPoint<T>, YPoint<T>)> {
    let group = mu1.group();
    let finite = group.finite();
    let max_sigma = |mu: &AtomicSignedMeasure<T>| mu.terms().iter().fold(T::zero(), |m, t| m.max(t.sigma));
    let (s1, s2) = (max_sigma(mu1), max_sigma(mu2));
    let a = alpha.a();
    let (u0, v0) = if s1 + s2 > T::zero() {
        ((s1 + s2).recip().sqrt(), (s1 + a * a * s2).recip().sqrt())
    } else {
        let f = (T::one() + a.abs()).recip();
        (f, f)
    };
    let zero = finite.dual_zero();
    let y = |s: T, n: u8, h: &DualCharacter| YPoint { s, n, h: h.clone() };
    let mut probes = vec![
        (y(u0, 0, &zero), y(v0, 0, &zero)),
        (y(T::zero(), 0, &zero), y(v0, 0, &zero)),
        (y(u0, 0, &zero), y(v0, 1, &zero)),
        (y(T::zero(), 1, &zero), y(v0, 0, &zero)),
        (y(u0, 1, &zero), y(v0 * T::lit(0.5), 1, &zero)),
        (y(-u0, 0, &zero), y(v0 * T::lit(1.5), 0, &zero)),
    ];
    if finite.cardinality() > 1 {
        let chars: Vec<DualCharacter> = finite.characters().skip(1).take(3).collect();
        for h in &chars {
            probes.push((y(T::zero(), 0, &zero), y(v0, 0, h)));
            probes.push((y(u0, 0, h), y(T::zero(), 0, h)));
        }
        probes.push((y(u0, 1, &chars[0]), y(v0, 1, &chars[chars.len() - 1])));
    } else {
        probes.push((y(u0 * T::lit(0.5), 0, &zero), y(v0 * T::lit(0.5), 0, &zero)));
    }
    probes
}

/// Checks `(L1, L2)` against `(L1, -L2)` through characters:
/// `max |E[(L1, u)(L2, v)] - E[(L1, u) conj (L2, v)]|` against `4 / sqrt(N)`.
///
/// Samples are drawn in fixed blocks, each with its own ChaCha stream, and
/// block sums are combined in block order, so the report depends only on `seed`.
pub fn mc_symmetry_test<T: Real>(
    mu1: &AtomicSignedMeasure<T>,
    mu2: &AtomicSignedMeasure<T>,
    alpha: &XAutomorphism<T>,
    samples: usize,
    probes: &[(YPoint<T>, YPoint<T>)],
    seed: u64,
) -> Result<McReport<T>> {
    check_groups(mu1, mu2, alpha)?;
    if samples == 0 || probes.is_empty() {
        return Err(Error::Precondition("need at least one sample and one probe".into()));
    }
    let group = mu1.group();
    for (u, v) in probes {
        group.check_character(u)?;
        group.check_character(v)?;
    }
    let sampler1 = mu1.sampler()?;
    let sampler2 = mu2.sampler()?;
    let finite = group.finite();
    let per_block = samples.div_ceil(MC_BLOCKS);

    let blocks: Vec<Result<Vec<Complex<T>>>> = (0..MC_BLOCKS)
        .into_par_iter()
        .map(|b| {
            let count = per_block.min(samples.saturating_sub(b * per_block));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut sums = vec![Complex::new(T::zero(), T::zero()); probes.len()];
            for _ in 0..count {
                let x1 = sampler1.draw(&mut rng)?;
                let x2 = sampler2.draw(&mut rng)?;
                let l1 = XPoint {
                    t: x1.t + x2.t,
                    m: x1.m ^ x2.m,
                    g: finite.add_unchecked(&x1.g, &x2.g),
                };
                let ax2 = alpha.apply_unchecked(&x2);
                let l2 = XPoint {
                    t: x1.t + ax2.t,
                    m: x1.m ^ ax2.m,
                    g: finite.add_unchecked(&x1.g, &ax2.g),
                };
                for (sum, (u, v)) in sums.iter_mut().zip(probes) {
                    let a = group.pair_unchecked(&l1, u);
                    let b = group.pair_unchecked(&l2, v);
                    *sum = *sum + a * (b - b.conj());
                }
            }
            Ok(sums)
        })
        .collect();

    let mut totals = vec![Complex::new(T::zero(), T::zero()); probes.len()];
    for block in blocks {
        for (t, s) in totals.iter_mut().zip(block?) {
            *t = *t + s;
        }
    }
    let n = T::from_usize_lossy(samples);
    let statistic = totals.iter().map(|t| t.norm() / n).fold(T::zero(), |m, v| m.max(v));
    let threshold = T::lit(4.0) / n.sqrt();
    Ok(McReport {
        statistic,
        threshold,
        pass: statistic <= threshold,
        samples,
        seed,
    })
}

/// Residual of the equation for measures on the finite part `Z(2) x G`, over every
/// pair of finite characters; no real grid is involved.
pub fn finite_exact_check<T: Real>(
    omega1: &AtomicSignedMeasure<T>,
    omega2: &AtomicSignedMeasure<T>,
    alpha_g: &GroupAutomorphism,
) -> Result<T> {
    if omega1.group() != omega2.group() || alpha_g.group() != omega1.group().finite() {
        return Err(Error::GroupMismatch("measures and automorphism must share G".into()));
    }
    if !omega1.is_finitely_supported() || !omega2.is_finitely_supported() {
        return Err(Error::Precondition("finite_exact_check needs measures supported on Z(2) x G".into()));
    }
    let tables = DualTables::new(omega1.group(), &alpha_g.adjoint());
    let t1 = omega1.char_table();
    let t2 = omega2.char_table();
    let one = [Complex::new(T::one(), T::zero())];
    let eval = |t: &CharTable<T>, dual: usize| {
        if t.atoms().is_empty() {
            Complex::new(T::zero(), T::zero())
        } else {
            t.eval_with(&one, dual)
        }
    };
    let hsize = tables.size;
    let mut worst = T::zero();
    for n in 0..2usize {
        let base = n * hsize;
        for k in 0..hsize * hsize {
            let lhs = eval(&t1, base + tables.plus[k]) * eval(&t2, base + tables.plus_alpha[k]);
            let rhs = eval(&t1, base + tables.minus[k]) * eval(&t2, base + tables.minus_alpha[k]);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

fn check_nonvanishing_finite<T: Real>(label: &str, mu: &AtomicSignedMeasure<T>) -> Result<()> {
    let table = mu.char_table();
    let ones = vec![Complex::new(T::one(), T::zero()); table.atoms().len()];
    for dual in 0..table.dual_len() {
        let v = table.eval_with(&ones, dual);
        if v.norm() < T::lit(VANISHING_RATIO) {
            let (n, h) = mu.group().finite_dual_at(dual);
            return Err(Error::Vanishing(format!("{label}^(0, {n}, {:?}) = {v}", h.coords())));
        }
    }
    Ok(())
}

/// Decides whether `tau1 = tau2 * delta` or `tau2 = tau1 * delta` for a distribution
/// `delta` on the order-2 subgroup `{0, p}`.
///
/// The candidate `d` is read off at the `n = 1`, `s = 0` character where `|tau2^|` is
/// largest and then verified on atoms: the convolution must reproduce the other
/// measure coefficient by coefficient within `tol`.
pub fn delta_relation<T: Real>(
    tau1: &AtomicSignedMeasure<T>,
    tau2: &AtomicSignedMeasure<T>,
    tol: T,
) -> Result<DeltaRelation<T>> {
    if tau1.group() != tau2.group() {
        return Err(Error::GroupMismatch("delta_relation needs measures on one group".into()));
    }
    check_nonvanishing_finite("tau1", tau1)?;
    check_nonvanishing_finite("tau2", tau2)?;
    let group = tau1.group();

    let candidate = |num: &AtomicSignedMeasure<T>, den: &AtomicSignedMeasure<T>| -> Option<T> {
        let (tn, td) = (num.char_table(), den.char_table());
        let hsize = group.finite().cardinality() as usize;
        let ones_n = vec![Complex::new(T::one(), T::zero()); tn.atoms().len()];
        let ones_d = vec![Complex::new(T::one(), T::zero()); td.atoms().len()];
        let best = (hsize..2 * hsize).max_by(|&i, &j| {
            let a = td.eval_with(&ones_d, i).norm();
            let b = td.eval_with(&ones_d, j).norm();
            a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        let d = tn.eval_with(&ones_n, best) / td.eval_with(&ones_d, best);
        if !d.re.is_finite() || d.re == T::zero() {
            return None;
        }
        let delta = PiMeasure::new(d.re).ok()?.to_measure(group);
        let rebuilt = den.convolve(&delta).ok()?;
        let scale = num.terms().iter().map(|t| t.c.abs()).sum::<T>().max(T::one());
        (num.coefficient_distance(&rebuilt, T::zero()) <= tol * scale).then_some(d.re)
    };
    let classify = |d: T| -> Option<(T, bool)> {
        if d.abs() > T::one() + tol {
            return None;
        }
        let tie = (d.abs() - T::one()).abs() <= tol;
        Some((d.max(-T::one()).min(T::one()), tie))
    };

    if let Some((d, tie)) = candidate(tau1, tau2).and_then(classify) {
        return Ok(DeltaRelation::Tau1EqTau2ConvDelta { d, tie });
    }
    if let Some((d, tie)) = candidate(tau2, tau1).and_then(classify) {
        return Ok(DeltaRelation::Tau2EqTau1ConvDelta { d, tie });
    }
    Ok(DeltaRelation::Neither)
}
