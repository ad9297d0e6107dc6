//! Structured jet-coordinate symbols and their canonical ASCII names.
//!
//! Every coordinate the pipelines manipulate is one of a small set of kinds
//! (positions and their derivatives, Ostrogradsky momenta, acceleration-bundle
//! coordinates, auxiliary coordinates, tangent fibers, multipliers) tagged
//! with a component index `A >= 1` and a level. Anything else is a free
//! parameter named by a bare identifier.

use std::fmt;
use std::sync::Arc;

/// Coordinate family of a [`Symbol`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Kind {
    /// `q{A}_{k}`: position and its time derivatives.
    Q,
    /// `p{A}_{k}`: Ostrogradsky momentum conjugate to `q{A}_{k}`.
    P,
    /// `a{A}_{k}`: acceleration-bundle coordinate and its derivatives.
    A,
    /// `m{A}_{k}`: auxiliary manifold coordinate and its derivatives.
    M,
    /// `pq{A}`: momentum conjugate to `q{A}_0` on an acceleration-bundle chart.
    Pq,
    /// `pa{A}`: momentum conjugate to `a{A}_0`.
    Pa,
    /// `pm{A}`: momentum conjugate to `m{A}_0`.
    Pm,
    /// `dq{A}_{k}`: tangent fiber over `q{A}_{k}`.
    DotQ,
    /// `dp{A}_{k}`: tangent fiber over `p{A}_{k}`.
    DotP,
    /// `lam{j}`: Lagrange multiplier.
    Lambda,
    /// Free parameter.
    Param,
}

impl Kind {
    /// Kinds whose level counts time derivatives.
    pub fn is_jet(self) -> bool {
        matches!(self, Kind::Q | Kind::A | Kind::M)
    }

    /// Cotangent fiber coordinates.
    pub fn is_momentum(self) -> bool {
        matches!(self, Kind::P | Kind::Pq | Kind::Pa)
    }

    fn prefix(self) -> &'static str {
        match self {
            Kind::Q => "q",
            Kind::P => "p",
            Kind::A => "a",
            Kind::M => "m",
            Kind::Pq => "pq",
            Kind::Pa => "pa",
            Kind::Pm => "pm",
            Kind::DotQ => "dq",
            Kind::DotP => "dp",
            Kind::Lambda => "lam",
            Kind::Param => "",
        }
    }

    fn has_level(self) -> bool {
        matches!(
            self,
            Kind::Q | Kind::P | Kind::A | Kind::M | Kind::DotQ | Kind::DotP
        )
    }
}

/// A coordinate or parameter symbol.
///
/// Coordinates compare by `(kind, component, level)`; parameters by name and
/// sort first, so products render as `mu*q1_2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Param(Arc<str>),
    Coord {
        kind: Kind,
        component: u32,
        level: u32,
    },
}

impl Symbol {
    fn coord(kind: Kind, component: u32, level: u32) -> Self {
        Symbol::Coord {
            kind,
            component,
            level,
        }
    }

    pub fn q(component: u32, level: u32) -> Self {
        Self::coord(Kind::Q, component, level)
    }
    pub fn p(component: u32, level: u32) -> Self {
        Self::coord(Kind::P, component, level)
    }
    pub fn a(component: u32, level: u32) -> Self {
        Self::coord(Kind::A, component, level)
    }
    pub fn m(component: u32, level: u32) -> Self {
        Self::coord(Kind::M, component, level)
    }
    pub fn pq(component: u32) -> Self {
        Self::coord(Kind::Pq, component, 0)
    }
    pub fn pa(component: u32) -> Self {
        Self::coord(Kind::Pa, component, 0)
    }
    pub fn pm(component: u32) -> Self {
        Self::coord(Kind::Pm, component, 0)
    }
    pub fn dq(component: u32, level: u32) -> Self {
        Self::coord(Kind::DotQ, component, level)
    }
    pub fn dp(component: u32, level: u32) -> Self {
        Self::coord(Kind::DotP, component, level)
    }
    pub fn lam(index: u32) -> Self {
        Self::coord(Kind::Lambda, index, 0)
    }
    pub fn param(name: &str) -> Self {
        Symbol::Param(Arc::from(name))
    }

    pub fn kind(&self) -> Kind {
        match self {
            Symbol::Coord { kind, .. } => *kind,
            Symbol::Param(_) => Kind::Param,
        }
    }

    /// Component index `A` (or `j` for multipliers); 0 for parameters.
    pub fn component(&self) -> u32 {
        match self {
            Symbol::Coord { component, .. } => *component,
            Symbol::Param(_) => 0,
        }
    }

    pub fn level(&self) -> u32 {
        match self {
            Symbol::Coord { level, .. } => *level,
            Symbol::Param(_) => 0,
        }
    }

    pub fn is_param(&self) -> bool {
        matches!(self, Symbol::Param(_))
    }

    /// Same kind and component, one level higher. `None` unless the kind is a jet kind.
    pub fn shifted(&self) -> Option<Symbol> {
        match self {
            Symbol::Coord {
                kind,
                component,
                level,
            } if kind.is_jet() => Some(Symbol::coord(*kind, *component, level + 1)),
            _ => None,
        }
    }

    /// Canonical ASCII name, e.g. `q1_2`, `pa3`, `lam1`, `mu`.
    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Parse a canonical coordinate name. Returns `Ok(None)` for identifiers
    /// that are plain parameters and `Err(())` for identifiers that look like
    /// coordinates but are malformed (e.g. `q0_1`, `q1`, `p2_x`).
    pub fn parse_name(ident: &str) -> Result<Option<Symbol>, ()> {
        // Longest prefixes first so that `pq1` is not read as `p` + `q1`.
        const PREFIXES: [(&str, Kind); 10] = [
            ("lam", Kind::Lambda),
            ("pq", Kind::Pq),
            ("pa", Kind::Pa),
            ("pm", Kind::Pm),
            ("dq", Kind::DotQ),
            ("dp", Kind::DotP),
            ("q", Kind::Q),
            ("p", Kind::P),
            ("a", Kind::A),
            ("m", Kind::M),
        ];
        for (prefix, kind) in PREFIXES {
            let Some(rest) = ident.strip_prefix(prefix) else {
                continue;
            };
            if !rest.starts_with(|c: char| c.is_ascii_digit()) {
                continue;
            }
            return parse_indices(rest, kind).map(Some).ok_or(());
        }
        Ok(None)
    }
}

fn parse_indices(rest: &str, kind: Kind) -> Option<Symbol> {
    let digits = |s: &str| -> Option<u32> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    };
    if kind.has_level() {
        let (comp, level) = rest.split_once('_')?;
        let component = digits(comp)?;
        let level = digits(level)?;
        (component >= 1).then(|| Symbol::coord(kind, component, level))
    } else {
        let component = digits(rest)?;
        let ok = kind == Kind::Lambda || component >= 1;
        ok.then(|| Symbol::coord(kind, component, 0))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Param(name) => f.write_str(name),
            Symbol::Coord {
                kind,
                component,
                level,
            } => {
                if kind.has_level() {
                    write!(f, "{}{}_{}", kind.prefix(), component, level)
                } else {
                    write!(f, "{}{}", kind.prefix(), component)
                }
            }
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
