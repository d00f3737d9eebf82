//! Parsed model description and its canonical text form.

use std::fmt::Write as _;

use gradgauge::cartan::{SymTensor2, ThreeTensor, VectorField};
use gradgauge::gengeo::{dirac_from_o, graph_of_bivector, Bivector, DiracFrame, GeneralizedSection, OOperator};
use gradgauge::linalg::PolyMatrix;
use gradgauge::{Poly, Result};

/// Everything a model file can declare.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub coords: Vec<String>,
    pub bivector: Option<(String, Bivector)>,
    pub threeform: Option<(String, ThreeTensor)>,
    /// `None` means no metric was declared.
    pub metric: Option<Vec<Vec<Poly>>>,
    pub ooperator: Option<Vec<Vec<Poly>>>,
    pub frame: Option<Vec<(Vec<Poly>, Vec<Poly>)>>,
    /// Fundamental vector fields of an action, with their 1-forms `α_a`.
    pub actions: Vec<(String, Vec<Poly>, Vec<Poly>)>,
    pub degree: Option<u32>,
    pub assert_orbit_nondegenerate: bool,
}

pub const DEFAULT_DEGREE: u32 = 2;

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn degree_or_default(&self) -> u32 {
        self.degree.unwrap_or(DEFAULT_DEGREE)
    }

    /// `H`, zero when not declared.
    pub fn h(&self) -> ThreeTensor {
        self.threeform.as_ref().map(|(_, h)| h.clone()).unwrap_or_else(|| ThreeTensor::zero(self.dim()))
    }

    pub fn metric_tensor(&self) -> Result<SymTensor2> {
        match &self.metric {
            Some(rows) => SymTensor2::new(rows.clone()),
            None => Ok(SymTensor2::identity(self.dim())),
        }
    }

    pub fn o_operator(&self) -> Result<Option<OOperator>> {
        match &self.ooperator {
            Some(rows) => Ok(Some(OOperator::new(
                PolyMatrix::from_rows(self.dim(), rows.clone()),
                self.metric_tensor()?,
            )?)),
            None => Ok(None),
        }
    }

    /// Frame of whichever declaration defines the Dirac structure.
    pub fn dirac_frame(&self) -> Result<Option<DiracFrame>> {
        if let Some((_, pi)) = &self.bivector {
            return Ok(Some(graph_of_bivector(pi)));
        }
        if let Some(o) = self.o_operator()? {
            return Ok(Some(dirac_from_o(&o)));
        }
        if let Some(secs) = &self.frame {
            let sections = secs
                .iter()
                .map(|(v, a)| GeneralizedSection::new(VectorField::new(v.clone()), a.clone()))
                .collect();
            return Ok(Some(DiracFrame::new(sections)?));
        }
        Ok(None)
    }

    pub fn action_fields(&self) -> Vec<VectorField> {
        self.actions.iter().map(|(_, v, _)| VectorField::new(v.clone())).collect()
    }

    pub fn action_forms(&self) -> Vec<Vec<Poly>> {
        self.actions.iter().map(|(_, _, a)| a.clone()).collect()
    }

    /// Canonical serialization; parsing it gives back an equal spec.
    pub fn render(&self) -> String {
        let c = &self.coords;
        let p = |x: &Poly| x.render(c);
        let mut out = String::new();
        writeln!(out, "manifold {} dim {} coords {};", self.name, self.dim(), c.join(" ")).unwrap();
        if let Some((name, pi)) = &self.bivector {
            let items: Vec<String> = pi
                .ordered_entries()
                .iter()
                .map(|((i, j), v)| format!("({},{}): {}", i + 1, j + 1, p(v)))
                .collect();
            writeln!(out, "bivector {name} {{ {} }};", items.join(", ")).unwrap();
        }
        if let Some((name, h)) = &self.threeform {
            let items: Vec<String> = h
                .ordered_entries()
                .iter()
                .map(|((i, j, k), v)| format!("({},{},{}): {}", i + 1, j + 1, k + 1, p(v)))
                .collect();
            writeln!(out, "threeform {name} {{ {} }};", items.join(", ")).unwrap();
        }
        if let Some(rows) = &self.metric {
            let mut items = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate().skip(i) {
                    if !v.is_zero() {
                        items.push(format!("({},{}): {}", i + 1, j + 1, p(v)));
                    }
                }
            }
            writeln!(out, "metric {{ {} }};", items.join(", ")).unwrap();
        }
        if let Some(rows) = &self.ooperator {
            let mut items = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        items.push(format!("({},{}): {}", i + 1, j + 1, p(v)));
                    }
                }
            }
            writeln!(out, "ooperator {{ {} }};", items.join(", ")).unwrap();
        }
        if let Some(secs) = &self.frame {
            let items: Vec<String> = secs
                .iter()
                .map(|(v, a)| {
                    let vs: Vec<String> = v.iter().map(p).collect();
                    let as_: Vec<String> = a.iter().map(p).collect();
                    format!("({} | {})", vs.join(", "), as_.join(", "))
                })
                .collect();
            writeln!(out, "frame {{ {} }};", items.join(", ")).unwrap();
        }
        for (name, v, a) in &self.actions {
            let vs: Vec<String> = v.iter().map(p).collect();
            let as_: Vec<String> = a.iter().map(p).collect();
            writeln!(out, "action {name} ({} | {});", vs.join(", "), as_.join(", ")).unwrap();
        }
        if let Some(d) = self.degree {
            writeln!(out, "degree {d};").unwrap();
        }
        if self.assert_orbit_nondegenerate {
            writeln!(out, "assert orbit_nondegenerate;").unwrap();
        }
        out
    }
}
