//! JSON schemas for case files and their conversion into library values.
//!
//! A case file names the group once; every element, point and measure in it is
//! checked against that group. Measures are either explicit term lists or the
//! Theta shorthand, which is expanded with [`ThetaParams::to_measure`].

use serde::{Deserialize, Serialize};

use crate::finite_abelian::GroupAutomorphism;
use crate::group_rfg::{AmbientGroup, XAutomorphism, XPoint};
use crate::measures::{AtomicSignedMeasure, Term};
use crate::structure::InstanceSpec;
use crate::theta::ThetaParams;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSpec {
    pub a: f64,
    #[serde(rename = "alpha_G")]
    pub alpha_g: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub m: u8,
    pub g: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Terms { terms: Vec<TermSpec> },
    Theta { theta: ThetaParams<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub t: f64,
    pub m: u8,
    pub g: Vec<i64>,
}

/// Input of every command except `generate` and `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub group: AmbientGroup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<MeasureSpec>,
    /// Theta factor for `rigidity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<ThetaParams<f64>>,
    /// Measure on `Z(2) x G` for `rigidity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<MeasureSpec>,
}

/// Input of `generate`. Missing fields are drawn from the seeded generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub group: AmbientGroup,
    pub a: f64,
    /// Defaults to `-I`.
    #[serde(default, rename = "alpha_G")]
    pub alpha_g: Option<MatrixSpec>,
    #[serde(default)]
    pub theta2: Option<ThetaParams<f64>>,
    #[serde(default)]
    pub kappa1: Option<f64>,
    #[serde(default)]
    pub omega2: Option<MeasureSpec>,
    #[serde(default)]
    pub vartheta: Option<f64>,
    #[serde(default)]
    pub x2: Option<PointSpec>,
}

impl MeasureSpec {
    pub fn build(&self, group: &AmbientGroup) -> Result<AtomicSignedMeasure<f64>> {
        match self {
            MeasureSpec::Terms { terms } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        Ok(Term {
                            c: t.c,
                            sigma: t.sigma,
                            shift: t.shift,
                            m: t.m,
                            g: group.finite().element(&t.g)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                AtomicSignedMeasure::new(group, terms)
            }
            MeasureSpec::Theta { theta } => theta.to_measure(group),
        }
    }

    pub fn from_measure(mu: &AtomicSignedMeasure<f64>) -> Self {
        MeasureSpec::Terms {
            terms: mu
                .terms()
                .iter()
                .map(|t| TermSpec {
                    c: t.c,
                    sigma: t.sigma,
                    shift: t.shift,
                    m: t.m,
                    g: t.g.coords().iter().map(|&v| v as i64).collect(),
                })
                .collect(),
        }
    }
}

impl AlphaSpec {
    pub fn build(&self, group: &AmbientGroup) -> Result<XAutomorphism<f64>> {
        let alpha_g = GroupAutomorphism::new(group.finite(), self.alpha_g.matrix.clone())?;
        XAutomorphism::new(self.a, alpha_g)
    }

    pub fn from_automorphism(alpha: &XAutomorphism<f64>) -> Self {
        AlphaSpec {
            a: alpha.a(),
            alpha_g: MatrixSpec {
                matrix: alpha.alpha_g().matrix().to_vec(),
            },
        }
    }
}

impl PointSpec {
    pub fn build(&self, group: &AmbientGroup) -> Result<XPoint<f64>> {
        group.point(self.t, self.m, &self.g)
    }
}

fn missing(field: &str) -> Error {
    Error::Precondition(format!("case file is missing `{field}`"))
}

impl CaseFile {
    pub fn alpha(&self) -> Result<XAutomorphism<f64>> {
        self.alpha.as_ref().ok_or_else(|| missing("alpha"))?.build(&self.group)
    }

    pub fn mu_pair(&self) -> Result<(AtomicSignedMeasure<f64>, AtomicSignedMeasure<f64>)> {
        let mu1 = self.mu1.as_ref().ok_or_else(|| missing("mu1"))?.build(&self.group)?;
        let mu2 = self.mu2.as_ref().ok_or_else(|| missing("mu2"))?.build(&self.group)?;
        Ok((mu1, mu2))
    }

    pub fn gamma_omega(&self) -> Result<(ThetaParams<f64>, AtomicSignedMeasure<f64>)> {
        let gamma = self.gamma.ok_or_else(|| missing("gamma"))?;
        gamma.validate()?;
        let omega = self.omega.as_ref().ok_or_else(|| missing("omega"))?.build(&self.group)?;
        Ok((gamma, omega))
    }

    /// A case holding a generated pair.
    pub fn from_pair(
        group: &AmbientGroup,
        alpha: &XAutomorphism<f64>,
        mu1: &AtomicSignedMeasure<f64>,
        mu2: &AtomicSignedMeasure<f64>,
    ) -> Self {
        CaseFile {
            group: group.clone(),
            alpha: Some(AlphaSpec::from_automorphism(alpha)),
            mu1: Some(MeasureSpec::from_measure(mu1)),
            mu2: Some(MeasureSpec::from_measure(mu2)),
            gamma: None,
            omega: None,
        }
    }
}

impl GenerateSpec {
    /// Overrides the fields of `base` that this spec fixes.
    pub fn apply(&self, mut base: InstanceSpec<f64>) -> Result<InstanceSpec<f64>> {
        if let Some(t) = self.theta2 {
            t.validate()?;
            base.theta2 = t;
        }
        if let Some(k) = self.kappa1 {
            base.kappa1 = k;
        }
        if let Some(w) = &self.omega2 {
            base.omega2 = w.build(&self.group)?;
        }
        if let Some(d) = self.vartheta {
            base.vartheta = d;
        }
        if let Some(x) = &self.x2 {
            base.x2 = x.build(&self.group)?;
        }
        Ok(base)
    }

    pub fn alpha_g(&self) -> Result<GroupAutomorphism> {
        match &self.alpha_g {
            Some(m) => GroupAutomorphism::new(self.group.finite(), m.matrix.clone()),
            None => Ok(GroupAutomorphism::negation(self.group.finite())),
        }
    }
}
