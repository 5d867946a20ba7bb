//! Optical system descriptions.
//!
//! A system file is JSON: either a bare array of elements or an object with an
//! `elements` array. Each element is `{"kind": ..., "params": [...]}` and the
//! list is in beam-traversal order.
//!
//! ```json
//! {"elements": [
//!   {"kind": "free", "params": [1.0]},
//!   {"kind": "lens", "params": [1.0]},
//!   {"kind": "matrix", "params": [2, 1, 1, 1]}
//! ]}
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::optics::{QParam, Ray, RayMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Free(f64),
    Lens(f64),
    Magnifier(f64),
    Matrix([f64; 4]),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpticalSystem {
    elements: Vec<Element>,
}

#[derive(Deserialize)]
struct RawElement {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSystem {
    List(Vec<RawElement>),
    Wrapped { elements: Vec<RawElement> },
}

impl Element {
    pub fn matrix(&self) -> Result<RayMatrix> {
        match *self {
            Element::Free(d) => Ok(RayMatrix::free_space(d)),
            Element::Lens(f) => RayMatrix::thin_lens(f),
            Element::Magnifier(a) => RayMatrix::magnifier(a),
            Element::Matrix([a, b, c, d]) => RayMatrix::new(a, b, c, d),
        }
    }

    fn from_raw(raw: &RawElement) -> std::result::Result<Self, String> {
        let want = |n: usize| {
            if raw.params.len() == n {
                Ok(())
            } else {
                Err(format!(
                    "kind \"{}\" takes {n} parameter(s), got {}",
                    raw.kind,
                    raw.params.len()
                ))
            }
        };
        match raw.kind.as_str() {
            "free" => want(1).map(|_| Element::Free(raw.params[0])),
            "lens" => want(1).map(|_| Element::Lens(raw.params[0])),
            "magnifier" => want(1).map(|_| Element::Magnifier(raw.params[0])),
            "matrix" => want(4).map(|_| {
                let p = &raw.params;
                Element::Matrix([p[0], p[1], p[2], p[3]])
            }),
            other => Err(format!(
                "unknown kind \"{other}\" (expected free, lens, magnifier or matrix)"
            )),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Free(d) => write!(f, "free({d})"),
            Element::Lens(fl) => write!(f, "lens({fl})"),
            Element::Magnifier(a) => write!(f, "magnifier({a})"),
            Element::Matrix([a, b, c, d]) => write!(f, "matrix({a}, {b}; {c}, {d})"),
        }
    }
}

impl OpticalSystem {
    pub fn new(elements: Vec<Element>) -> Self {
        OpticalSystem { elements }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSystem = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let raw = match raw {
            RawSystem::List(v) | RawSystem::Wrapped { elements: v } => v,
        };
        let elements = raw
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let line = element_line(text, i);
                Element::from_raw(r).map_err(|msg| match line {
                    Some(l) => Error::Parse(format!("element {i} (line {l}): {msg}")),
                    None => Error::Parse(format!("element {i}: {msg}")),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OpticalSystem { elements })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn matrices(&self) -> Result<Vec<RayMatrix>> {
        self.elements.iter().map(Element::matrix).collect()
    }

    /// The system matrix. The last element ends up leftmost.
    pub fn matrix(&self) -> Result<RayMatrix> {
        RayMatrix::chain(self.matrices()?.iter())
    }

    /// The ray after each element, in traversal order.
    pub fn trace(&self, ray: Ray) -> Result<Vec<Ray>> {
        let mut out = Vec::with_capacity(self.elements.len());
        let mut cur = ray;
        for m in self.matrices()? {
            cur = m.trace_ray(cur);
            out.push(cur);
        }
        Ok(out)
    }

    /// The beam parameter after each element. A pole reports the element index.
    pub fn propagate_q(&self, q: QParam) -> std::result::Result<Vec<QParam>, (usize, Error)> {
        let matrices = self.matrices().map_err(|e| (0, e))?;
        let mut out = Vec::with_capacity(matrices.len());
        let mut cur = q;
        for (i, m) in matrices.iter().enumerate() {
            cur = m.propagate_q(cur).map_err(|e| (i, e))?;
            out.push(cur);
        }
        Ok(out)
    }
}

// Best-effort line of the i-th `"kind"` key, for diagnostics.
fn element_line(text: &str, index: usize) -> Option<usize> {
    let offset = text.match_indices("\"kind\"").nth(index)?.0;
    Some(text[..offset].matches('\n').count() + 1)
}
