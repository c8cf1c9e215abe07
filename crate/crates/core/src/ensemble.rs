//! Degree distributions and ensemble bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with nonnegative coefficients; `coeffs[n]` multiplies `t^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DegreePolynomial {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DegreePolynomial {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        DegreePolynomial::new(v)
    }
}

impl From<DegreePolynomial> for Vec<f64> {
    fn from(p: DegreePolynomial) -> Vec<f64> {
        p.coeffs
    }
}

impl DegreePolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::Polynomial(format!("coefficient {c} is negative or not finite")));
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Self { coeffs })
    }

    /// The monomial `t^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> DegreePolynomial {
        if self.coeffs.len() == 1 {
            return Self { coeffs: vec![0.0] };
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(n, c)| n as f64 * c).collect();
        Self { coeffs }
    }

    pub fn eval_d1(&self, t: f64) -> f64 {
        self.derivative().eval(t)
    }

    pub fn eval_d2(&self, t: f64) -> f64 {
        self.derivative().derivative().eval(t)
    }

    /// Rescaled copy summing to one.
    pub fn normalized(&self) -> Result<DegreePolynomial> {
        let s = self.sum();
        if s <= 0.0 {
            return Err(Error::Polynomial("cannot normalize a zero polynomial".into()));
        }
        Ok(Self { coeffs: self.coeffs.iter().map(|c| c / s).collect() })
    }

    /// Checks that the coefficients form a probability distribution.
    pub fn check_distribution(&self) -> Result<()> {
        let s = self.sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Polynomial(format!("coefficients sum to {s}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Ldpc,
    Ldgm,
}

/// Degree distributions in both edge (`lambda`, `rho`) and node (`l_node`, `r_node`) perspective.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub lambda: DegreePolynomial,
    pub rho: DegreePolynomial,
    #[serde(rename = "L")]
    pub l_node: DegreePolynomial,
    #[serde(rename = "R")]
    pub r_node: DegreePolynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub lambda_d1_0: f64,
    pub lambda_d1_1: f64,
    pub rho_d1_1: f64,
    pub rho_d2_1: f64,
    pub l_d1_1: f64,
    pub r_d1_1: f64,
    pub design_rate: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

fn edge_to_node(edge: &DegreePolynomial) -> Result<DegreePolynomial> {
    let mut node = vec![0.0; edge.coeffs.len() + 1];
    for (n, c) in edge.coeffs.iter().enumerate() {
        node[n + 1] = c / (n + 1) as f64;
    }
    DegreePolynomial::new(node)?.normalized()
}

fn node_to_edge(node: &DegreePolynomial) -> Result<DegreePolynomial> {
    node.derivative().normalized()
}

impl EnsembleSpec {
    pub fn from_edge_perspective(lambda: DegreePolynomial, rho: DegreePolynomial, kind: EnsembleKind) -> Result<Self> {
        let lambda = lambda.normalized().map_err(|e| Error::Ensemble(format!("lambda: {e}")))?;
        let rho = rho.normalized().map_err(|e| Error::Ensemble(format!("rho: {e}")))?;
        let l_node = edge_to_node(&lambda)?;
        let r_node = edge_to_node(&rho)?;
        let spec = Self { kind, lambda, rho, l_node, r_node };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_node_perspective(
        l_node: DegreePolynomial,
        r_node: DegreePolynomial,
        kind: EnsembleKind,
    ) -> Result<Self> {
        if l_node.coeffs[0] > 0.0 || r_node.coeffs[0] > 0.0 {
            return Err(Error::Ensemble("node-perspective distributions cannot have degree-zero nodes".into()));
        }
        let lambda = node_to_edge(&l_node).map_err(|e| Error::Ensemble(format!("L: {e}")))?;
        let rho = node_to_edge(&r_node).map_err(|e| Error::Ensemble(format!("R: {e}")))?;
        let spec = Self { kind, lambda, rho, l_node: l_node.normalized()?, r_node: r_node.normalized()? };
        spec.validate()?;
        Ok(spec)
    }

    /// The `(dv, dc)`-regular LDPC ensemble.
    pub fn regular_ldpc(dv: usize, dc: usize) -> Result<Self> {
        if dv < 2 || dc < 2 {
            return Err(Error::Ensemble(format!("regular ({dv},{dc}) needs both degrees >= 2")));
        }
        Self::from_edge_perspective(
            DegreePolynomial::monomial(dv - 1),
            DegreePolynomial::monomial(dc - 1),
            EnsembleKind::Ldpc,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.kind == EnsembleKind::Ldpc && self.lambda.coeffs[0] > 0.0 {
            return Err(Error::Ensemble("LDPC ensembles cannot have degree-one variable nodes".into()));
        }
        if self.kind == EnsembleKind::Ldpc && self.rho.coeffs[0] > 0.0 {
            return Err(Error::Ensemble("LDPC ensembles cannot have degree-one check nodes".into()));
        }
        Ok(())
    }

    pub fn constants(&self) -> DerivedConstants {
        let l1 = self.l_node.eval_d1(1.0);
        let r1 = self.r_node.eval_d1(1.0);
        let lambda_d1_1 = self.lambda.eval_d1(1.0);
        let rho_d1_1 = self.rho.eval_d1(1.0);
        let rho_d2_1 = self.rho.eval_d2(1.0);
        let design_rate = match self.kind {
            EnsembleKind::Ldpc => 1.0 - l1 / r1,
            EnsembleKind::Ldgm => r1 / l1,
        };
        DerivedConstants {
            lambda_d1_0: self.lambda.eval_d1(0.0),
            lambda_d1_1,
            rho_d1_1,
            rho_d2_1,
            l_d1_1: l1,
            r_d1_1: r1,
            design_rate,
            k: l1 * (2.0 * rho_d2_1 + rho_d1_1 + 2.0 * lambda_d1_1 * rho_d1_1 * rho_d1_1),
        }
    }

    /// Degrees `(dv, dc)` when both sides are regular.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let single = |p: &DegreePolynomial| {
            let nz: Vec<usize> = p.coeffs.iter().enumerate().filter(|(_, c)| **c > 0.0).map(|(n, _)| n).collect();
            (nz.len() == 1).then(|| nz[0])
        };
        Some((single(&self.l_node)?, single(&self.r_node)?))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawEnsemble = serde_json::from_str(text).map_err(|e| Error::Config(format!("ensemble JSON: {e}")))?;
        raw.resolve()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coef {
    Num(f64),
    Ratio { num: f64, den: f64 },
}

impl Coef {
    fn value(&self) -> Result<f64> {
        match *self {
            Coef::Num(v) => Ok(v),
            Coef::Ratio { num, den } if den != 0.0 => Ok(num / den),
            Coef::Ratio { .. } => Err(Error::Config("zero denominator in coefficient".into())),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    kind: EnsembleKind,
    lambda: Option<Vec<Coef>>,
    rho: Option<Vec<Coef>>,
    #[serde(rename = "L")]
    l_node: Option<Vec<Coef>>,
    #[serde(rename = "R")]
    r_node: Option<Vec<Coef>>,
}

fn poly_of(v: &[Coef]) -> Result<DegreePolynomial> {
    let coeffs = v.iter().map(Coef::value).collect::<Result<Vec<_>>>()?;
    DegreePolynomial::new(coeffs)
}

impl RawEnsemble {
    fn resolve(self) -> Result<EnsembleSpec> {
        match (self.lambda, self.rho, self.l_node, self.r_node) {
            (Some(l), Some(r), None, None) => {
                EnsembleSpec::from_edge_perspective(poly_of(&l)?, poly_of(&r)?, self.kind)
            }
            (None, None, Some(l), Some(r)) => {
                EnsembleSpec::from_node_perspective(poly_of(&l)?, poly_of(&r)?, self.kind)
            }
            _ => Err(Error::Config("ensemble needs either lambda+rho or L+R".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_36_both_perspectives() {
        let e = EnsembleSpec::regular_ldpc(3, 6).unwrap();
        assert_eq!(e.l_node.coeffs(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(e.r_node.coeffs(), &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let back = EnsembleSpec::from_node_perspective(e.l_node.clone(), e.r_node.clone(), EnsembleKind::Ldpc).unwrap();
        assert_eq!(back.lambda, e.lambda);
        assert_eq!(back.rho, e.rho);
    }

    #[test]
    fn k_constant_and_rate() {
        let c = EnsembleSpec::regular_ldpc(3, 6).unwrap().constants();
        assert_eq!(c.k, 435.0);
        assert_eq!(c.design_rate, 0.5);
        assert_eq!(c.lambda_d1_0, 0.0);
    }

    #[test]
    fn degree_one_variable_rejected() {
        let r = EnsembleSpec::from_edge_perspective(
            DegreePolynomial::new(vec![0.1, 0.0, 0.9]).unwrap(),
            DegreePolynomial::monomial(5),
            EnsembleKind::Ldpc,
        );
        assert!(matches!(r, Err(Error::Ensemble(_))));
    }

    #[test]
    fn irregular_round_trip() {
        let lam = DegreePolynomial::new(vec![0.0, 0.3, 0.5, 0.0, 0.2]).unwrap();
        let rho = DegreePolynomial::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.4]).unwrap();
        let e = EnsembleSpec::from_edge_perspective(lam, rho, EnsembleKind::Ldpc).unwrap();
        let back = EnsembleSpec::from_node_perspective(e.l_node.clone(), e.r_node.clone(), EnsembleKind::Ldpc).unwrap();
        for (a, b) in back.lambda.coeffs().iter().zip(e.lambda.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in back.rho.coeffs().iter().zip(e.rho.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = e.constants();
        assert!(c.k > 0.0 && c.lambda_d1_0 > 0.0);
    }

    #[test]
    fn json_with_rationals() {
        let e = EnsembleSpec::from_json(
            r#"{"kind":"ldgm","lambda":[0,0,0,0,0,0,0,0,1],
                "rho":[{"num":3,"den":50},{"num":6,"den":50},{"num":9,"den":50},{"num":12,"den":50},{"num":20,"den":50}]}"#,
        )
        .unwrap();
        assert_eq!(e.kind, EnsembleKind::Ldgm);
        assert!((e.rho.coeffs()[4] - 0.4).abs() < 1e-15);
        assert!((e.constants().l_d1_1 - 9.0).abs() < 1e-12);
        assert!(EnsembleSpec::from_json(r#"{"kind":"ldpc","lambda":[0,0,1]}"#).is_err());
    }
}
