//! Model files and the built-in example library.
//!
//! A model file is UTF-8 text with sections `strata`, `basis`, `diff`,
//! `prod`, `epsilon`, `flags`, in that canonical order; `#` starts a comment.
//! Rational literals are `n` or `n/d`. Product entries are stored for
//! i <= j in basis order only; the mirrored entries follow from graded
//! commutativity. The unit is auto-detected from the product table. Loading
//! runs full validation and reports every violated invariant.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::cdga::{BasisDecl, Cochain, PerverseModel};
use crate::error::{Error, Result};
use crate::gysin::GysinModel;
use crate::linalg::{format_q, parse_q, Q};
use crate::strata::{Nature, StrataPoset, StratumId, StratumInfo};
use num::traits::Zero;

const PHI1: &str = include_str!("../builtins/phi1.model");
const PHI2: &str = include_str!("../builtins/phi2.model");
const PHI3: &str = include_str!("../builtins/phi3.model");
const PHI1_SCALED: &str = include_str!("../builtins/phi1_scaled.model");
const EXT_GAMMA: &str = include_str!("../builtins/ext_gamma.model");
const EXT_GAMMA_U2: &str = include_str!("../builtins/ext_gamma_u2.model");

pub const BUILTIN_NAMES: &[&str] =
    &["phi1", "phi2", "phi3", "phi1_scaled", "ext_gamma", "ext_gamma_u2"];

/// Load a built-in example by name.
pub fn builtin(name: &str) -> Result<GysinModel> {
    let text = match name {
        "phi1" => PHI1,
        "phi2" => PHI2,
        "phi3" => PHI3,
        "phi1_scaled" => PHI1_SCALED,
        "ext_gamma" => EXT_GAMMA,
        "ext_gamma_u2" => EXT_GAMMA_U2,
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    load_model_str(text)
}

/// Load and validate a model from a file.
pub fn load_model(path: impl AsRef<Path>) -> Result<GysinModel> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text)
}

const SECTIONS: &[&str] = &["strata", "basis", "diff", "prod", "epsilon", "flags"];

struct Sections {
    /// section name -> (line number, tokenized line)
    content: BTreeMap<&'static str, Vec<(usize, Vec<String>)>>,
}

fn split_sections(text: &str) -> Result<Sections> {
    let mut content: BTreeMap<&'static str, Vec<(usize, Vec<String>)>> =
        SECTIONS.iter().map(|&s| (s, Vec::new())).collect();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(&section) = SECTIONS.iter().find(|&&s| s == line) {
            current = Some(section);
            continue;
        }
        let Some(section) = current else {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("content before any section header: `{line}`"),
            });
        };
        let tokens: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        content.get_mut(section).unwrap().push((idx + 1, tokens));
    }
    Ok(Sections { content })
}

fn parse_rational(line: usize, tok: &str) -> Result<Q> {
    parse_q(tok).ok_or_else(|| Error::Parse { line, msg: format!("bad rational `{tok}`") })
}

/// Parse, assemble and validate a model from text.
pub fn load_model_str(text: &str) -> Result<GysinModel> {
    let sections = split_sections(text)?;

    // strata
    let mut strata = Vec::new();
    let mut order = Vec::new();
    for (line, toks) in &sections.content["strata"] {
        if toks[0] == "order" {
            if toks.len() != 3 {
                return Err(Error::Parse { line: *line, msg: "order lines are `order A B`".into() });
            }
            order.push((StratumId::new(toks[1].clone()), StratumId::new(toks[2].clone())));
            continue;
        }
        if toks.len() < 2 {
            return Err(Error::Parse {
                line: *line,
                msg: "stratum lines are `<id> <nature> [codim=<n>]`".into(),
            });
        }
        let nature = Nature::parse(&toks[1]).ok_or_else(|| Error::Parse {
            line: *line,
            msg: format!("unknown stratum nature `{}`", toks[1]),
        })?;
        let mut info = StratumInfo::new(StratumId::new(toks[0].clone()), nature);
        for tok in &toks[2..] {
            if let Some(c) = tok.strip_prefix("codim=") {
                let c: u32 = c.parse().map_err(|_| Error::Parse {
                    line: *line,
                    msg: format!("bad codimension `{c}`"),
                })?;
                info = info.with_codim(c);
            } else {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("unknown stratum attribute `{tok}`"),
                });
            }
        }
        strata.push(info);
    }
    let stratum_ids: Vec<StratumId> = strata.iter().map(|s| s.id.clone()).collect();
    let poset = StrataPoset::new(strata, &order)?;

    // basis
    let mut basis = Vec::new();
    for (line, toks) in &sections.content["basis"] {
        if toks.len() < 2 {
            return Err(Error::Parse {
                line: *line,
                msg: "basis lines are `<name> <degree> [<stratum>=<pdeg>]*`".into(),
            });
        }
        let degree: u32 = toks[1].parse().map_err(|_| Error::Parse {
            line: *line,
            msg: format!("bad degree `{}`", toks[1]),
        })?;
        let mut decl = BasisDecl::new(toks[0].clone(), degree);
        for tok in &toks[2..] {
            let Some((stratum, value)) = tok.split_once('=') else {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("bad perverse degree entry `{tok}`"),
                });
            };
            let value: u32 = value.parse().map_err(|_| Error::Parse {
                line: *line,
                msg: format!("bad perverse degree `{value}`"),
            })?;
            decl.pdeg.insert(StratumId::new(stratum), value);
        }
        for id in &stratum_ids {
            if !decl.pdeg.contains_key(id) {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!(
                        "basis element `{}` missing perverse degree for stratum `{id}`",
                        toks[0]
                    ),
                });
            }
        }
        if decl.pdeg.len() != stratum_ids.len() {
            return Err(Error::Parse {
                line: *line,
                msg: format!("basis element `{}` names an unknown stratum", toks[0]),
            });
        }
        basis.push(decl);
    }

    // diff
    let mut diff = Vec::new();
    for (line, toks) in &sections.content["diff"] {
        if toks.len() != 3 {
            return Err(Error::Parse {
                line: *line,
                msg: "diff lines are `<from> <to> <coeff>`".into(),
            });
        }
        diff.push((toks[0].clone(), toks[1].clone(), parse_rational(*line, &toks[2])?));
    }

    // prod
    let mut prod = Vec::new();
    for (line, toks) in &sections.content["prod"] {
        if toks.len() != 4 {
            return Err(Error::Parse {
                line: *line,
                msg: "prod lines are `<i> <j> <k> <coeff>`".into(),
            });
        }
        prod.push((
            toks[0].clone(),
            toks[1].clone(),
            toks[2].clone(),
            parse_rational(*line, &toks[3])?,
        ));
    }

    // flags
    let mut connected_normal = false;
    for (line, toks) in &sections.content["flags"] {
        match (toks[0].as_str(), toks.get(1).map(String::as_str)) {
            ("connected_normal", Some("true")) => connected_normal = true,
            ("connected_normal", Some("false")) => connected_normal = false,
            _ => {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("unknown flag line `{}`", toks.join(" ")),
                })
            }
        }
    }

    let model =
        Arc::new(PerverseModel::assemble(poset, basis, &diff, &prod, connected_normal)?);

    // epsilon
    let mut eps = model.zero_cochain().into_coords();
    for (line, toks) in &sections.content["epsilon"] {
        if toks.len() != 2 {
            return Err(Error::Parse {
                line: *line,
                msg: "epsilon lines are `<name> <coeff>`".into(),
            });
        }
        let idx = model.index_of(&toks[0]).ok_or_else(|| Error::Parse {
            line: *line,
            msg: format!("unknown basis element `{}` in epsilon", toks[0]),
        })?;
        eps[idx] += parse_rational(*line, &toks[1])?;
    }

    GysinModel::new(model, Cochain::from_coords(eps))
}

/// Canonical serialization; `load_model_str(serialize_model(g))` reparses to
/// an identical model.
pub fn serialize_model(g: &GysinModel) -> String {
    let model = g.base();
    let poset = model.poset();
    let mut out = String::new();

    out.push_str("strata\n");
    for info in poset.strata() {
        out.push_str(&format!("{} {}", info.id, info.nature));
        if let Some(c) = info.codim {
            out.push_str(&format!(" codim={c}"));
        }
        out.push('\n');
    }
    for (a, b) in poset.order_pairs() {
        out.push_str(&format!("order {} {}\n", poset.info(a).id, poset.info(b).id));
    }

    out.push_str("\nbasis\n");
    for i in 0..model.dim() {
        out.push_str(&format!("{} {}", model.name_of(i), model.degree_of(i)));
        for (s, info) in poset.strata().iter().enumerate() {
            out.push_str(&format!(" {}={}", info.id, model.pdeg_of(i, s)));
        }
        out.push('\n');
    }

    out.push_str("\ndiff\n");
    for j in 0..model.dim() {
        for k in 0..model.dim() {
            let c = model.diff_matrix().get(k, j);
            if !c.is_zero() {
                out.push_str(&format!("{} {} {}\n", model.name_of(j), model.name_of(k), format_q(c)));
            }
        }
    }

    out.push_str("\nprod\n");
    for (i, j, k, c) in model.product_upper_entries() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            model.name_of(i),
            model.name_of(j),
            model.name_of(k),
            format_q(&c)
        ));
    }

    out.push_str("\nepsilon\n");
    for (i, c) in g.epsilon().coords().iter().enumerate() {
        if !c.is_zero() {
            out.push_str(&format!("{} {}\n", model.name_of(i), format_q(c)));
        }
    }

    out.push_str("\nflags\n");
    out.push_str(&format!("connected_normal {}\n", model.connected_normal()));
    out
}

/// Consistency between a stratum's perverse flag and the Euler class of an
/// attached link model: a fixed stratum should be flagged perverse exactly
/// when the link's Euler class does not vanish.
#[derive(Clone, Debug)]
pub struct LinkReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub link_euler_nonzero: bool,
    pub flagged_perverse: bool,
    pub consistent: bool,
}

pub fn check_link_consistency(
    g: &GysinModel,
    stratum: &StratumId,
    link: &GysinModel,
) -> Result<LinkReport> {
    let poset = g.base().poset();
    let idx = poset.index_of(stratum).ok_or_else(|| Error::UnknownStratum(stratum.clone()))?;
    let nature = poset.info(idx).nature;
    if !nature.is_fixed() {
        return Ok(LinkReport {
            applicable: false,
            reason: Some(format!("stratum `{stratum}` is not fixed")),
            link_euler_nonzero: false,
            flagged_perverse: false,
            consistent: false,
        });
    }
    let euler = link.euler_class()?;
    let flagged = nature == Nature::FixedPerverse;
    let nonzero = !euler.is_zero;
    Ok(LinkReport {
        applicable: true,
        reason: None,
        link_euler_nonzero: nonzero,
        flagged_perverse: flagged,
        consistent: nonzero == flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qi;

    const HOPF_LINK: &str = include_str!("../builtins/hopf_link.model");

    #[test]
    fn builtins_load_and_validate() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(g.base().validate().is_valid());
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn builtin_euler_classes() {
        assert!(!builtin("phi1").unwrap().euler_class().unwrap().is_zero);
        assert!(builtin("phi2").unwrap().euler_class().unwrap().is_zero);
        assert!(builtin("phi3").unwrap().euler_class().unwrap().is_zero);
    }

    #[test]
    fn round_trip_is_identity_on_models() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            let text = serialize_model(&g);
            let again = load_model_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(g, again, "round trip changed `{name}`");
        }
    }

    #[test]
    fn epsilon_of_wrong_degree_is_rejected() {
        let text = "\
strata
v fixed_perverse

basis
u0 0 v=0
a1 1 v=1
u2 2 v=2

diff

prod
u0 u0 u0 1
u0 a1 a1 1
u0 u2 u2 1

epsilon
a1 1

flags
connected_normal true
";
        match load_model_str(text) {
            Err(Error::Invalid(report)) => assert!(report.contains("epsilon_degree")),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn missing_pdeg_is_a_parse_error_naming_the_element() {
        let text = "\
strata
v fixed_perverse

basis
u0 0

diff

prod
u0 u0 u0 1

epsilon

flags
";
        match load_model_str(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("u0"), "message was `{msg}`");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unclosed_epsilon_is_rejected() {
        let text = "\
strata
v fixed_perverse

basis
u0 0 v=0
a1 1 v=1
u2 2 v=2

diff
a1 u2 1

prod
u0 u0 u0 1
u0 a1 a1 1
u0 u2 u2 1

epsilon
u2 1

flags
connected_normal true
";
        // here u2 = d(a1) is not closed? d(u2) = 0 so epsilon is closed;
        // instead check a direct non-closed epsilon: epsilon = a1 has degree 1
        // covered above, so build one with d(eps) != 0 in degree 2
        let _ = text;
        let text2 = "\
strata
v fixed_perverse

basis
u0 0 v=0
b2 2 v=2
c3 3 v=2

diff
b2 c3 1

prod
u0 u0 u0 1
u0 b2 b2 1
u0 c3 c3 1

epsilon
b2 1

flags
connected_normal true
";
        match load_model_str(text2) {
            Err(Error::Invalid(report)) => assert!(report.contains("epsilon_not_closed")),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn link_consistency_examples() {
        let link = load_model_str(HOPF_LINK).unwrap();
        let phi1 = builtin("phi1").unwrap();
        let v = StratumId::new("v");
        let report = check_link_consistency(&phi1, &v, &link).unwrap();
        assert!(report.applicable && report.consistent);

        // zero-Euler link against a non-perverse flag
        let trivial = GysinModel::new(link.base().clone(), link.base().zero_cochain()).unwrap();
        let phi2 = builtin("phi2").unwrap();
        let report = check_link_consistency(&phi2, &v, &trivial).unwrap();
        assert!(report.applicable && report.consistent);

        // negative control: phi1's vertex reflagged non-perverse
        let reflagged = load_model_str(
            &serialize_model(&phi1).replace("fixed_perverse", "fixed_nonperverse"),
        );
        // the reflagged model fails epsilon bounds (pdeg 2 > e = 1), so build
        // the control as phi2 with the twisted link instead
        assert!(reflagged.is_err());
        let report = check_link_consistency(&phi2, &v, &link).unwrap();
        assert!(report.applicable && !report.consistent);

        // mobile stratum: not applicable
        let phi3 = builtin("phi3").unwrap();
        let report = check_link_consistency(&phi3, &v, &link).unwrap();
        assert!(!report.applicable);
    }

    #[test]
    fn epsilon_terms_accumulate() {
        let g = builtin("ext_gamma").unwrap();
        let eps = g.epsilon();
        let m = g.base();
        let u2 = m.index_of("u2").unwrap();
        let u2b = m.index_of("u2b").unwrap();
        assert_eq!(eps.coords()[u2], qi(1));
        assert_eq!(eps.coords()[u2b], qi(1));
    }
}
