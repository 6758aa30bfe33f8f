//! Line-oriented configuration files.
//!
//! ```text
//! # three rational tails
//! kind = family
//! meta.name = rtail3
//! family.mode = local
//! family.direction = independent
//! family.tails = t1,t2,t3
//! family.m = 1,1,1
//! family.chain.t1 = a,b
//! ```
//!
//! Curves use `curve.components = o:1,a:0` (id:genus), `curve.nodes =
//! o:q ~ a:zero, ...` and optionally a bundle via `curve.degrees`,
//! `curve.trivial` and `curve.divisor_at`; extensions use `extension.m`,
//! `extension.twist` and `extension.kmax`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::extension::TwistSpec;
use crate::family::{BaseMode, Direction, FamilyConfig, TailSpec};
use crate::nodalcurve::{BundleOnCurve, Component, CurveGraph, Node, NodeEnd, PointLabel};

pub const DEFAULT_KMAX: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigBody {
    Curve { graph: CurveGraph, bundle: Option<BundleOnCurve> },
    Family(FamilyConfig),
    Extension { m: i64, twist: TwistSpec, kmax: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigDocument {
    pub name: Option<String>,
    pub comment: Option<String>,
    pub body: ConfigBody,
}

impl ConfigDocument {
    pub fn kind(&self) -> &'static str {
        match self.body {
            ConfigBody::Curve { .. } => "curve",
            ConfigBody::Family(_) => "family",
            ConfigBody::Extension { .. } => "extension",
        }
    }
}

struct Entry {
    line: usize,
    value_column: usize,
    value: String,
}

impl Entry {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.value_column, message: message.into() }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

const KEYS: &[(&str, &[&str])] = &[
    ("curve", &["curve.components", "curve.nodes", "curve.degrees", "curve.trivial", "curve.divisor_at"]),
    ("family", &["family.mode", "family.direction", "family.tails", "family.m"]),
    ("extension", &["extension.m", "extension.twist", "extension.kmax"]),
];

struct Fields {
    entries: BTreeMap<String, Entry>,
    kind_line: usize,
}

impl Fields {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn require(&self, key: &str) -> Result<&Entry, ParseError> {
        self.get(key).ok_or_else(|| ParseError { line: self.kind_line, column: 1, message: format!("missing key `{key}`") })
    }
}

fn split_list(e: &Entry, sep: char) -> Vec<&str> {
    if e.value.trim().is_empty() {
        return Vec::new();
    }
    e.value.split(sep).map(str::trim).collect()
}

fn ident_list(e: &Entry) -> Result<Vec<String>, ParseError> {
    split_list(e, ',')
        .into_iter()
        .map(|s| if is_ident(s) { Ok(s.to_string()) } else { Err(e.err(format!("bad name `{s}`"))) })
        .collect()
}

fn int_list(e: &Entry) -> Result<Vec<i64>, ParseError> {
    split_list(e, ',').into_iter().map(|s| s.parse().map_err(|_| e.err(format!("bad integer `{s}`")))).collect()
}

fn pair<'a>(e: &Entry, s: &'a str) -> Result<(&'a str, &'a str), ParseError> {
    let (a, b) = s.split_once(':').ok_or_else(|| e.err(format!("expected `name:value`, got `{s}`")))?;
    let (a, b) = (a.trim(), b.trim());
    if !is_ident(a) || !is_ident(b) && b.parse::<i64>().is_err() {
        return Err(e.err(format!("bad entry `{s}`")));
    }
    Ok((a, b))
}

fn node_end(e: &Entry, s: &str) -> Result<NodeEnd, ParseError> {
    let (c, p) = pair(e, s)?;
    Ok(NodeEnd::new(c, PointLabel::parse(p)))
}

fn collect_fields(text: &str) -> Result<(String, Option<String>, Option<String>, Fields), ParseError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut kind: Option<(String, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let eq = raw
            .find('=')
            .ok_or_else(|| ParseError { line, column: indent + 1, message: "expected `key = value`".into() })?;
        let key = raw[..eq].trim();
        let after = &raw[eq + 1..];
        let value_column = eq + 2 + (after.len() - after.trim_start().len());
        let value = after.trim().to_string();
        if entries.contains_key(key) || (key == "kind" && kind.is_some()) {
            return Err(ParseError { line, column: indent + 1, message: format!("duplicate key `{key}`") });
        }
        if key == "kind" {
            kind = Some((value, line));
            continue;
        }
        entries.insert(key.to_string(), Entry { line, value_column, value });
    }
    let (kind, kind_line) = kind.ok_or_else(|| ParseError { line: 1, column: 1, message: "missing key `kind`".into() })?;
    let allowed = KEYS.iter().find(|(k, _)| *k == kind).map(|(_, keys)| *keys).ok_or_else(|| ParseError {
        line: kind_line,
        column: 1,
        message: format!("unknown kind `{kind}` (expected curve, family or extension)"),
    })?;
    for (key, e) in &entries {
        let chain_key = kind == "family" && key.strip_prefix("family.chain.").is_some_and(is_ident);
        if !(allowed.contains(&key.as_str()) || chain_key || key == "meta.name" || key == "meta.comment") {
            return Err(ParseError { line: e.line, column: 1, message: format!("unknown key `{key}`") });
        }
    }
    let name = entries.remove("meta.name").map(|e| e.value);
    let comment = entries.remove("meta.comment").map(|e| e.value);
    Ok((kind, name, comment, Fields { entries, kind_line }))
}

fn parse_family(f: &Fields) -> Result<FamilyConfig, ParseError> {
    let mode = match f.get("family.mode") {
        None => BaseMode::Local,
        Some(e) => match e.value.as_str() {
            "local" => BaseMode::Local,
            "multiprojective" => BaseMode::Multiprojective,
            v => return Err(e.err(format!("unknown mode `{v}` (expected local or multiprojective)"))),
        },
    };
    let direction = match f.get("family.direction") {
        None => Direction::Independent,
        Some(e) => match e.value.as_str() {
            "independent" => Direction::Independent,
            "single" => Direction::Single,
            v => return Err(e.err(format!("unknown direction `{v}` (expected independent or single)"))),
        },
    };
    let tails_entry = f.require("family.tails")?;
    let names = ident_list(tails_entry)?;
    let m = match f.get("family.m") {
        None => vec![1; names.len()],
        Some(e) => {
            let m = int_list(e)?;
            if m.len() != names.len() {
                return Err(e.err(format!("{} multiplicities for {} tails", m.len(), names.len())));
            }
            m
        }
    };
    let mut tails: Vec<TailSpec> = names.iter().zip(&m).map(|(n, &mi)| TailSpec::new(n, mi)).collect();
    for (key, e) in &f.entries {
        if let Some(tail) = key.strip_prefix("family.chain.") {
            let t = tails
                .iter_mut()
                .find(|t| t.param == tail)
                .ok_or_else(|| ParseError { line: e.line, column: 1, message: format!("chain for unknown tail `{tail}`") })?;
            t.chain = ident_list(e)?;
        }
    }
    FamilyConfig::new(tails, mode, direction).map_err(|err| tails_entry.err(err.to_string()))
}

fn parse_curve(f: &Fields) -> Result<(CurveGraph, Option<BundleOnCurve>), ParseError> {
    let ce = f.require("curve.components")?;
    let components = split_list(ce, ',')
        .into_iter()
        .map(|s| {
            let (id, g) = pair(ce, s)?;
            match g {
                "0" => Ok(Component::rational(id)),
                "1" => Ok(Component::elliptic(id)),
                _ => Err(ce.err(format!("genus of `{id}` must be 0 or 1"))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ne = f.require("curve.nodes")?;
    let nodes = split_list(ne, ',')
        .into_iter()
        .map(|s| {
            let (a, b) = s.split_once('~').ok_or_else(|| ne.err(format!("expected `a:p ~ b:q`, got `{s}`")))?;
            Ok(Node(node_end(ne, a.trim())?, node_end(ne, b.trim())?))
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let graph = CurveGraph::new(components, nodes).map_err(|err| ne.err(err.to_string()))?;
    let Some(de) = f.get("curve.degrees") else {
        for key in ["curve.trivial", "curve.divisor_at"] {
            if let Some(e) = f.get(key) {
                return Err(ParseError { line: e.line, column: 1, message: format!("`{key}` needs `curve.degrees`") });
            }
        }
        return Ok((graph, None));
    };
    let mut bundle = BundleOnCurve::default();
    for s in split_list(de, ',') {
        let (id, d) = pair(de, s)?;
        let d = d.parse().map_err(|_| de.err(format!("bad degree `{d}`")))?;
        if bundle.degrees.insert(id.to_string(), d).is_some() {
            return Err(de.err(format!("degree of `{id}` given twice")));
        }
    }
    if let Some(e) = f.get("curve.trivial") {
        bundle.trivial = ident_list(e)?.into_iter().collect();
    }
    if let Some(e) = f.get("curve.divisor_at") {
        bundle.divisor_at = split_list(e, ',').into_iter().map(|s| node_end(e, s)).collect::<Result<BTreeSet<_>, _>>()?;
    }
    Ok((graph, Some(bundle)))
}

fn parse_extension(f: &Fields) -> Result<ConfigBody, ParseError> {
    let me = f.require("extension.m")?;
    let m: i64 = me.value.parse().map_err(|_| me.err(format!("bad integer `{}`", me.value)))?;
    if m < 1 {
        return Err(me.err("multiplicity must be at least 1"));
    }
    let twist = match f.get("extension.twist") {
        None => TwistSpec::None,
        Some(e) => TwistSpec::parse(&e.value).map_err(|err| e.err(err.to_string()))?,
    };
    let kmax = match f.get("extension.kmax") {
        None => DEFAULT_KMAX,
        Some(e) => match e.value.parse::<u32>() {
            Ok(k) if k >= 1 => k,
            _ => return Err(e.err(format!("bad level `{}`", e.value))),
        },
    };
    Ok(ConfigBody::Extension { m, twist, kmax })
}

pub fn parse_config(text: &str) -> Result<ConfigDocument, ParseError> {
    let (kind, name, comment, fields) = collect_fields(text)?;
    let body = match kind.as_str() {
        "family" => ConfigBody::Family(parse_family(&fields)?),
        "curve" => {
            let (graph, bundle) = parse_curve(&fields)?;
            ConfigBody::Curve { graph, bundle }
        }
        _ => parse_extension(&fields)?,
    };
    Ok(ConfigDocument { name, comment, body })
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn render_config(doc: &ConfigDocument) -> String {
    let mut out = format!("kind = {}\n", doc.kind());
    if let Some(n) = &doc.name {
        out += &format!("meta.name = {n}\n");
    }
    if let Some(c) = &doc.comment {
        out += &format!("meta.comment = {c}\n");
    }
    match &doc.body {
        ConfigBody::Family(cfg) => {
            let mode = match cfg.mode {
                BaseMode::Local => "local",
                BaseMode::Multiprojective => "multiprojective",
            };
            let direction = match cfg.direction {
                Direction::Independent => "independent",
                Direction::Single => "single",
            };
            out += &format!("family.mode = {mode}\nfamily.direction = {direction}\n");
            out += &format!("family.tails = {}\n", join(cfg.tails.iter().map(|t| &t.param)));
            out += &format!("family.m = {}\n", join(cfg.multiplicities()));
            for t in cfg.tails.iter().filter(|t| !t.chain.is_empty()) {
                out += &format!("family.chain.{} = {}\n", t.param, join(&t.chain));
            }
        }
        ConfigBody::Curve { graph, bundle } => {
            out += &format!("curve.components = {}\n", join(graph.components().iter().map(|c| format!("{}:{}", c.id, c.genus))));
            let nodes: Vec<String> = graph.nodes().iter().map(|n| format!("{} ~ {}", n.0, n.1)).collect();
            out += &format!("curve.nodes = {}\n", nodes.join(", "));
            if let Some(b) = bundle {
                out += &format!("curve.degrees = {}\n", join(b.degrees.iter().map(|(c, d)| format!("{c}:{d}"))));
                if !b.trivial.is_empty() {
                    out += &format!("curve.trivial = {}\n", join(&b.trivial));
                }
                if !b.divisor_at.is_empty() {
                    out += &format!("curve.divisor_at = {}\n", join(&b.divisor_at));
                }
            }
        }
        ConfigBody::Extension { m, twist, kmax } => {
            out += &format!("extension.m = {m}\nextension.twist = {twist}\nextension.kmax = {kmax}\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RTAIL3: &str = "# three tails\nkind = family\nmeta.name = rtail3\nfamily.tails = t1,t2,t3\nfamily.m = 1,1,1\n";

    #[test]
    fn family_file() {
        let doc = parse_config(RTAIL3).unwrap();
        assert_eq!(doc.name.as_deref(), Some("rtail3"));
        let ConfigBody::Family(cfg) = &doc.body else { panic!() };
        assert_eq!(cfg, &FamilyConfig::plain(&[1, 1, 1], BaseMode::Local));
        assert_eq!(parse_config(&render_config(&doc)).unwrap(), doc);
    }

    #[test]
    fn chains() {
        let text = "kind = family\nfamily.tails = b,c\nfamily.chain.b = a\nfamily.chain.c = a\n";
        let ConfigBody::Family(cfg) = parse_config(text).unwrap().body else { panic!() };
        assert_eq!(cfg.universe(), ["a", "b", "c"]);
        let err = parse_config("kind = family\nfamily.tails = b\nfamily.chain.x = a\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 1));
    }

    #[test]
    fn unknown_key_is_positioned() {
        let err = parse_config("kind = family\nfamily.tails = t1\n  family.colour = red\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("family.colour"), "{err}");
    }

    #[test]
    fn bad_values_point_at_the_value() {
        let err = parse_config("kind = family\nfamily.tails = t1,t2\nfamily.m =  1,x\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 13));
        let err = parse_config("kind = family\nfamily.tails = t1\nfamily.m = -1\n").unwrap_err();
        assert!(err.message.contains("negative") || err.message.contains("-1"), "{err}");
        assert!(parse_config("family.tails = t1\n").unwrap_err().message.contains("kind"));
        assert!(parse_config("kind = surface\n").is_err());
        assert!(parse_config("kind = family\nfamily.tails t1\n").is_err());
    }

    #[test]
    fn curve_file() {
        let text = "kind = curve\ncurve.components = o:1,a:0,b:0\ncurve.nodes = o:qa ~ a:zero, a:infinity ~ b:zero\n\
                    curve.degrees = o:1,a:0,b:2\ncurve.divisor_at = o:qa\n";
        let doc = parse_config(text).unwrap();
        let ConfigBody::Curve { graph, bundle } = &doc.body else { panic!() };
        assert_eq!(graph.nodes().len(), 2);
        assert_eq!(bundle.as_ref().unwrap().total_degree(), 3);
        assert_eq!(parse_config(&render_config(&doc)).unwrap(), doc);
        let err = parse_config("kind = curve\ncurve.components = o:2\ncurve.nodes =\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn extension_defaults() {
        let doc = parse_config("kind = extension\nextension.m = 2\n").unwrap();
        assert_eq!(doc.body, ConfigBody::Extension { m: 2, twist: TwistSpec::None, kmax: DEFAULT_KMAX });
        assert!(parse_config("kind = extension\nextension.m = 2\nextension.twist = d1\n").is_err());
    }

    mod roundtrip {
        use super::*;
        use proptest::prelude::*;

        fn family() -> impl Strategy<Value = FamilyConfig> {
            (1usize..=4, proptest::collection::vec(0i64..=3, 4), proptest::collection::vec(0usize..=3, 4), any::<bool>(), any::<bool>())
                .prop_map(|(r, m, chain_kind, proj, single)| {
                    let mode = if proj { BaseMode::Multiprojective } else { BaseMode::Local };
                    let tails: Vec<TailSpec> = (0..r)
                        .map(|i| {
                            let t = TailSpec::new(&format!("t{}", i + 1), m[i]);
                            match (single, chain_kind[i]) {
                                (true, _) | (false, 0) => t,
                                (false, 1) => t.with_chain(&["a"]),
                                (false, 2) => t.with_chain(&["a", "b"]),
                                _ => t.with_chain(&["c"]),
                            }
                        })
                        .collect();
                    let direction = if single { Direction::Single } else { Direction::Independent };
                    FamilyConfig::new(tails, mode, direction).unwrap()
                })
        }

        fn curve() -> impl Strategy<Value = (CurveGraph, Option<BundleOnCurve>)> {
            // a tree of rational components hanging off an elliptic core
            (proptest::collection::vec(0usize..4, 0..5), proptest::collection::vec(-2i64..4, 6), any::<bool>(), any::<bool>())
                .prop_map(|(parents, degrees, with_bundle, flags)| {
                    let mut comps = vec![Component::elliptic("o")];
                    let mut nodes = Vec::new();
                    for (i, p) in parents.iter().enumerate() {
                        let id = format!("c{i}");
                        let parent = p % comps.len();
                        let end = if parent == 0 {
                            NodeEnd::new("o", PointLabel::Generic(format!("q{i}")))
                        } else {
                            NodeEnd::new(&comps[parent].id, PointLabel::Generic(format!("p{i}")))
                        };
                        nodes.push(Node(end, NodeEnd::new(&id, PointLabel::Zero)));
                        comps.push(Component::rational(&id));
                    }
                    let bundle = with_bundle.then(|| {
                        let mut b = BundleOnCurve::new(&comps.iter().zip(&degrees).map(|(c, d)| (c.id.clone(), *d)).collect::<Vec<_>>());
                        if flags {
                            b = b.with_trivial("o");
                        } else if !nodes.is_empty() {
                            b = b.with_divisor_at(nodes[0].0.clone());
                        }
                        b
                    });
                    (CurveGraph::new(comps, nodes).unwrap(), bundle)
                })
        }

        fn meta() -> impl Strategy<Value = (Option<String>, Option<String>)> {
            (proptest::option::of("[a-z][a-z0-9_]{0,8}"), proptest::option::of("[a-z]([a-z #=,]{0,20}[a-z])?"))
        }

        fn document() -> impl Strategy<Value = ConfigDocument> {
            let body = prop_oneof![
                family().prop_map(ConfigBody::Family),
                curve().prop_map(|(graph, bundle)| ConfigBody::Curve { graph, bundle }),
                (1i64..=6, any::<bool>(), 1u32..=8).prop_map(|(m, tw, kmax)| ConfigBody::Extension {
                    m,
                    twist: if tw { TwistSpec::D0MinusD1 } else { TwistSpec::None },
                    kmax
                }),
            ];
            (meta(), body).prop_map(|((name, comment), body)| ConfigDocument { name, comment, body })
        }

        proptest! {
            #[test]
            fn parse_inverts_render(doc in document()) {
                prop_assert_eq!(parse_config(&render_config(&doc)).unwrap(), doc);
            }
        }
    }
}
