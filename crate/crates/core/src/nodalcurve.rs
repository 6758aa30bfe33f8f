//! Nodal curves of arithmetic genus one through their dual graphs, and
//! cohomology of line bundles on them via the normalization sequence
//! `0 → L → ⊕ L|C_i → ⊕ k(nodes) → 0`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::cohomology::{h_elliptic, h_p1, EllipticBundleData};
use crate::exactalg::{matrix_rank, PrimeSequence, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("component `{0}` declared twice")]
    DuplicateComponent(String),
    #[error("component `{id}` has genus {genus}; only 0 and 1 are supported")]
    BadGenus { id: String, genus: u32 },
    #[error("arithmetic genus is {0}, expected 1")]
    Genus(i64),
    #[error("dual graph is not connected")]
    Disconnected,
    #[error("point `{point}` on `{component}` carries two nodes")]
    DuplicatePoint { component: String, point: String },
    #[error("`{point}` is a coordinate point and `{component}` is not rational")]
    CoordinatePointOnElliptic { component: String, point: String },
    #[error("no degree given for component `{0}`")]
    MissingDegree(String),
    #[error("node evaluation on `{component}` (degree {degree}) is not determined by the bundle data")]
    UndeterminedEvaluation { component: String, degree: i64 },
}

/// A point on a component: the coordinate points `[1,0]` and `[0,1]` of a
/// rational component, or a named point in general position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PointLabel {
    Zero,
    Infinity,
    Generic(String),
}

impl PointLabel {
    pub fn parse(s: &str) -> PointLabel {
        match s {
            "zero" => PointLabel::Zero,
            "infinity" => PointLabel::Infinity,
            other => PointLabel::Generic(other.to_string()),
        }
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointLabel::Zero => write!(f, "zero"),
            PointLabel::Infinity => write!(f, "infinity"),
            PointLabel::Generic(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Component {
    pub id: String,
    pub genus: u32,
}

impl Component {
    pub fn rational(id: &str) -> Self {
        Component { id: id.to_string(), genus: 0 }
    }

    pub fn elliptic(id: &str) -> Self {
        Component { id: id.to_string(), genus: 1 }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct NodeEnd {
    pub component: String,
    pub point: PointLabel,
}

impl NodeEnd {
    pub fn new(component: &str, point: PointLabel) -> Self {
        NodeEnd { component: component.to_string(), point }
    }
}

impl fmt::Display for NodeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.component, self.point)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Node(pub NodeEnd, pub NodeEnd);

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveGraph {
    components: Vec<Component>,
    nodes: Vec<Node>,
}

impl CurveGraph {
    /// Checks component ids, node ends and point collisions. Genus is checked
    /// separately by the operations that need it.
    pub fn new(components: Vec<Component>, nodes: Vec<Node>) -> Result<Self, CurveError> {
        let mut seen = BTreeSet::new();
        for c in &components {
            if c.genus > 1 {
                return Err(CurveError::BadGenus { id: c.id.clone(), genus: c.genus });
            }
            if !seen.insert(c.id.clone()) {
                return Err(CurveError::DuplicateComponent(c.id.clone()));
            }
        }
        let graph = CurveGraph { components, nodes };
        let mut used = BTreeSet::new();
        for end in graph.nodes.iter().flat_map(|n| [&n.0, &n.1]) {
            let comp = graph
                .component(&end.component)
                .ok_or_else(|| CurveError::UnknownComponent(end.component.clone()))?;
            if comp.genus == 1 && !matches!(end.point, PointLabel::Generic(_)) {
                return Err(CurveError::CoordinatePointOnElliptic {
                    component: comp.id.clone(),
                    point: end.point.to_string(),
                });
            }
            if !used.insert(end.clone()) {
                return Err(CurveError::DuplicatePoint { component: end.component.clone(), point: end.point.to_string() });
            }
        }
        Ok(graph)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    fn neighbours(&self, id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        for Node(a, b) in &self.nodes {
            if a.component == id {
                out.push(b.component.as_str());
            }
            if b.component == id {
                out.push(a.component.as_str());
            }
        }
        out
    }

    fn reachable(&self, start: &str, allowed: &dyn Fn(&str) -> bool) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start.to_string()]);
        seen.insert(start.to_string());
        while let Some(c) = queue.pop_front() {
            for n in self.neighbours(&c) {
                if allowed(n) && seen.insert(n.to_string()) {
                    queue.push_back(n.to_string());
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        match self.components.first() {
            None => false,
            Some(c) => self.reachable(&c.id, &|_| true).len() == self.components.len(),
        }
    }

    /// `#edges − #vertices + 1 + Σ genus`, for a connected graph.
    pub fn arithmetic_genus(&self) -> Result<i64, CurveError> {
        if !self.is_connected() {
            return Err(CurveError::Disconnected);
        }
        let g: i64 = self.components.iter().map(|c| c.genus as i64).sum();
        Ok(self.nodes.len() as i64 - self.components.len() as i64 + 1 + g)
    }

    pub fn check_genus_one(&self) -> Result<(), CurveError> {
        match self.arithmetic_genus()? {
            1 => Ok(()),
            g => Err(CurveError::Genus(g)),
        }
    }

    /// The smallest subcurve of arithmetic genus one: the elliptic component
    /// if there is one, otherwise the unique cycle of rational components.
    pub fn core(&self) -> Result<BTreeSet<String>, CurveError> {
        self.check_genus_one()?;
        if let Some(c) = self.components.iter().find(|c| c.genus == 1) {
            return Ok([c.id.clone()].into_iter().collect());
        }
        // prune leaves until only the cycle is left
        let mut alive: BTreeSet<String> = self.components.iter().map(|c| c.id.clone()).collect();
        loop {
            let leaves: Vec<String> = alive
                .iter()
                .filter(|c| self.neighbours(c).iter().filter(|n| alive.contains(**n)).count() <= 1)
                .cloned()
                .collect();
            if leaves.is_empty() {
                return Ok(alive);
            }
            for l in leaves {
                alive.remove(&l);
            }
        }
    }

    /// Connected components of the curve minus its core, each a tree of
    /// rational components. Sorted by their smallest id.
    pub fn tails(&self) -> Result<Vec<BTreeSet<String>>, CurveError> {
        let core = self.core()?;
        let mut left: BTreeSet<String> = self
            .components
            .iter()
            .map(|c| c.id.clone())
            .filter(|c| !core.contains(c))
            .collect();
        let mut out = Vec::new();
        while let Some(start) = left.iter().next().cloned() {
            let tail = self.reachable(&start, &|c| !core.contains(c));
            for c in &tail {
                left.remove(c);
            }
            out.push(tail);
        }
        out.sort();
        Ok(out)
    }

    /// Ends of nodes lying on `id`, in node order.
    fn ends_on(&self, id: &str) -> Vec<(usize, &NodeEnd)> {
        let mut out = Vec::new();
        for (k, Node(a, b)) in self.nodes.iter().enumerate() {
            if a.component == id {
                out.push((k, a));
            }
            if b.component == id {
                out.push((k, b));
            }
        }
        out
    }
}

/// A line bundle on a nodal curve: a degree per component, plus the extra
/// data the elliptic components need.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BundleOnCurve {
    pub degrees: BTreeMap<String, i64>,
    /// Elliptic components whose degree-0 restriction is trivial.
    pub trivial: BTreeSet<String>,
    /// Node ends on elliptic components contained in the divisor of the
    /// degree-1 section.
    pub divisor_at: BTreeSet<NodeEnd>,
}

impl BundleOnCurve {
    pub fn new<S: AsRef<str>>(degrees: &[(S, i64)]) -> Self {
        BundleOnCurve {
            degrees: degrees.iter().map(|(c, d)| (c.as_ref().to_string(), *d)).collect(),
            ..Default::default()
        }
    }

    pub fn with_trivial(mut self, component: &str) -> Self {
        self.trivial.insert(component.to_string());
        self
    }

    pub fn with_divisor_at(mut self, end: NodeEnd) -> Self {
        self.divisor_at.insert(end);
        self
    }

    pub fn total_degree(&self) -> i64 {
        self.degrees.values().sum()
    }

    fn degree(&self, id: &str) -> Result<i64, CurveError> {
        self.degrees.get(id).copied().ok_or_else(|| CurveError::MissingDegree(id.to_string()))
    }

    /// The restriction to an elliptic component, with node incidences in
    /// the order the component's node ends appear in the graph.
    pub fn elliptic_data(&self, graph: &CurveGraph, id: &str) -> Result<EllipticBundleData, CurveError> {
        Ok(EllipticBundleData {
            degree: self.degree(id)?,
            trivial: self.trivial.contains(id),
            node_in_divisor: graph
                .ends_on(id)
                .iter()
                .map(|(_, e)| Some(self.divisor_at.contains(e)))
                .collect(),
        })
    }
}

/// `Σ (deg_i + 1 − g_i) − #nodes`.
pub fn euler_char(graph: &CurveGraph, bundle: &BundleOnCurve) -> Result<i64, CurveError> {
    let mut chi = -(graph.nodes.len() as i64);
    for c in &graph.components {
        chi += bundle.degree(&c.id)? + 1 - c.genus as i64;
    }
    Ok(chi)
}

/// Global sections of one component, as values at each of its node ends.
struct ComponentSections {
    /// `values[b][e]`: basis section `b` at end `e`.
    values: Vec<Vec<Scalar>>,
    h1: usize,
}

fn rational_sections(degree: i64, ends: &[(usize, &NodeEnd)], params: &BTreeMap<&NodeEnd, Scalar>) -> ComponentSections {
    let (h0, h1) = h_p1(degree);
    // basis u0^{d-i} u1^i evaluated at [1, λ]
    let values = (0..h0)
        .map(|i| {
            ends.iter()
                .map(|(_, e)| match &e.point {
                    PointLabel::Zero => Scalar::from_int((i == 0) as i64),
                    PointLabel::Infinity => Scalar::from_int((i + 1 == h0) as i64),
                    PointLabel::Generic(_) => params[e].pow(i as u32),
                })
                .collect()
        })
        .collect();
    ComponentSections { values, h1 }
}

fn elliptic_sections(
    id: &str,
    data: &EllipticBundleData,
    ends: &[(usize, &NodeEnd)],
    params: &BTreeMap<&NodeEnd, Scalar>,
) -> Result<ComponentSections, CurveError> {
    let (h0, h1) = h_elliptic(data);
    let in_divisor = data.node_in_divisor.contains(&Some(true));
    if in_divisor && data.degree != 1 {
        return Err(CurveError::UndeterminedEvaluation { component: id.to_string(), degree: data.degree });
    }
    let values = if data.degree == 0 {
        // only the trivial bundle has a section, the constant one
        (0..h0).map(|_| vec![Scalar::one(); ends.len()]).collect()
    } else if in_divisor {
        let row = data
            .node_in_divisor
            .iter()
            .map(|x| Scalar::from_int(if *x == Some(true) { 0 } else { 1 }))
            .collect();
        vec![row]
    } else {
        // general position: a Vandermonde pattern of full rank min(d, #ends)
        (0..h0).map(|i| ends.iter().map(|(_, e)| params[e].pow(i as u32)).collect()).collect()
    };
    Ok(ComponentSections { values, h1 })
}

/// `(h⁰, h¹)` of the bundle, from the kernel and cokernel of the node
/// evaluation difference map.
pub fn h0_h1(graph: &CurveGraph, bundle: &BundleOnCurve) -> Result<(usize, usize), CurveError> {
    graph.arithmetic_genus()?;
    // generic points get distinct prime coordinates, in a fixed order
    let generic: Vec<&NodeEnd> = {
        let mut v: Vec<&NodeEnd> = graph
            .nodes
            .iter()
            .flat_map(|n| [&n.0, &n.1])
            .filter(|e| matches!(e.point, PointLabel::Generic(_)))
            .collect();
        v.sort();
        v
    };
    let primes = PrimeSequence::Primary.values(generic.len());
    let params: BTreeMap<&NodeEnd, Scalar> = generic
        .iter()
        .zip(primes)
        .map(|(e, p)| (*e, Scalar::from_int(p as i64)))
        .collect();

    let mut columns: Vec<Vec<Scalar>> = Vec::new();
    let mut h1_parts = 0;
    for c in &graph.components {
        let ends = graph.ends_on(&c.id);
        let sections = if c.genus == 0 {
            rational_sections(bundle.degree(&c.id)?, &ends, &params)
        } else {
            elliptic_sections(&c.id, &bundle.elliptic_data(graph, &c.id)?, &ends, &params)?
        };
        h1_parts += sections.h1;
        // column = (value at first end) − (value at second end), per node
        for vals in &sections.values {
            let mut col = vec![Scalar::zero(); graph.nodes.len()];
            for ((node, end), v) in ends.iter().zip(vals) {
                if std::ptr::eq(*end, &graph.nodes[*node].0) {
                    col[*node] = &col[*node] + v;
                } else {
                    col[*node] = &col[*node] - v;
                }
            }
            columns.push(col);
        }
    }
    let matrix: Vec<Vec<Scalar>> = (0..graph.nodes.len())
        .map(|row| columns.iter().map(|col| col[row].clone()).collect())
        .collect();
    let rank = matrix_rank(&matrix);
    Ok((columns.len() - rank, graph.nodes.len() - rank + h1_parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(a: &str, pa: &str, b: &str, pb: &str) -> Node {
        Node(NodeEnd::new(a, PointLabel::parse(pa)), NodeEnd::new(b, PointLabel::parse(pb)))
    }

    /// An elliptic core `o` with rational tails, each attached at `zero` to
    /// the core at `q_<tail>`.
    fn elliptic_with_tails(tails: &[&str]) -> CurveGraph {
        let mut comps = vec![Component::elliptic("o")];
        let mut nodes = Vec::new();
        for t in tails {
            comps.push(Component::rational(t));
            nodes.push(node("o", &format!("q_{t}"), t, "zero"));
        }
        CurveGraph::new(comps, nodes).unwrap()
    }

    fn oabc() -> CurveGraph {
        CurveGraph::new(
            vec![Component::elliptic("o"), Component::rational("a"), Component::rational("b"), Component::rational("c")],
            vec![node("o", "q_a", "a", "zero"), node("a", "p_b", "b", "zero"), node("a", "p_c", "c", "zero")],
        )
        .unwrap()
    }

    #[test]
    fn core_and_tails_of_three_tail_curve() {
        let g = elliptic_with_tails(&["a", "b", "c"]);
        assert_eq!(g.core().unwrap(), ["o".to_string()].into_iter().collect());
        assert_eq!(g.tails().unwrap().len(), 3);
    }

    #[test]
    fn smooth_elliptic() {
        let g = elliptic_with_tails(&[]);
        assert_eq!(g.tails().unwrap(), Vec::<BTreeSet<String>>::new());
        for d in 1..5 {
            let b = BundleOnCurve::new(&[("o", d)]);
            assert_eq!(h0_h1(&g, &b).unwrap(), (d as usize, 0));
            assert_eq!(euler_char(&g, &b).unwrap(), d);
        }
    }

    #[test]
    fn rational_cycle_core() {
        let g = CurveGraph::new(
            vec![Component::rational("x"), Component::rational("y"), Component::rational("z")],
            vec![node("x", "zero", "y", "zero"), node("x", "infinity", "y", "infinity"), node("y", "p", "z", "zero")],
        )
        .unwrap();
        let core = g.core().unwrap();
        assert_eq!(core, ["x".to_string(), "y".to_string()].into_iter().collect());
        assert_eq!(g.tails().unwrap(), vec![["z".to_string()].into_iter().collect::<BTreeSet<_>>()]);
        // ghost cycle: trivially glued degree 0 everywhere
        let b = BundleOnCurve::new(&[("x", 0), ("y", 0), ("z", 2)]);
        assert_eq!(h0_h1(&g, &b).unwrap(), (3, 1));
    }

    #[test]
    fn self_node_is_a_cycle() {
        let g = CurveGraph::new(vec![Component::rational("x")], vec![node("x", "zero", "x", "infinity")]).unwrap();
        assert_eq!(g.core().unwrap().len(), 1);
        assert_eq!(h0_h1(&g, &BundleOnCurve::new(&[("x", 0)])).unwrap(), (1, 1));
        assert_eq!(h0_h1(&g, &BundleOnCurve::new(&[("x", 2)])).unwrap(), (2, 0));
    }

    #[test]
    fn oabc_configuration() {
        let g = oabc();
        let tails = g.tails().unwrap();
        assert_eq!(tails.len(), 1);
        assert_eq!(tails[0], ["a", "b", "c"].iter().map(|s| s.to_string()).collect());
        let b = BundleOnCurve::new(&[("o", 0), ("a", 0), ("b", 1), ("c", 1)]).with_trivial("o");
        assert_eq!(euler_char(&g, &b).unwrap(), 2);
        assert_eq!(h0_h1(&g, &b).unwrap(), (3, 1));
    }

    #[test]
    fn ghost_core_with_tails() {
        for m in 1..=4i64 {
            let g = elliptic_with_tails(&["a"]);
            let b = BundleOnCurve::new(&[("o", 0), ("a", m)]).with_trivial("o");
            assert_eq!(h0_h1(&g, &b).unwrap(), (m as usize + 1, 1));
            assert_eq!(euler_char(&g, &b).unwrap(), m);
        }
        let g = elliptic_with_tails(&["a", "b", "c"]);
        let b = BundleOnCurve::new(&[("o", 0), ("a", 1), ("b", 2), ("c", 3)]).with_trivial("o");
        assert_eq!(h0_h1(&g, &b).unwrap(), (7, 1));
    }

    #[test]
    fn positive_core_kills_h1() {
        let g = elliptic_with_tails(&["a", "b"]);
        let b = BundleOnCurve::new(&[("o", 2), ("a", 1), ("b", 0)]);
        let (h0, h1) = h0_h1(&g, &b).unwrap();
        assert_eq!(h1, 0);
        assert_eq!(h0 as i64, euler_char(&g, &b).unwrap());
    }

    #[test]
    fn section_vanishing_at_the_node() {
        // O_C(q) glued to a degree m-1 rational curve at q: the unique
        // section vanishes at the node
        let g = elliptic_with_tails(&["a"]);
        let end = NodeEnd::new("o", PointLabel::parse("q_a"));
        for m in 1..=4i64 {
            let b = BundleOnCurve::new(&[("o", 1), ("a", m - 1)]).with_divisor_at(end.clone());
            assert_eq!(h0_h1(&g, &b).unwrap(), (m as usize, 0));
        }
        let bad = BundleOnCurve::new(&[("o", 2), ("a", 0)]).with_divisor_at(end);
        assert!(matches!(h0_h1(&g, &bad), Err(CurveError::UndeterminedEvaluation { degree: 2, .. })));
    }

    #[test]
    fn contracting_a_degree_zero_leaf_changes_nothing() {
        let big = oabc();
        let small = CurveGraph::new(
            vec![Component::elliptic("o"), Component::rational("a"), Component::rational("b")],
            vec![node("o", "q_a", "a", "zero"), node("a", "p_b", "b", "zero")],
        )
        .unwrap();
        for (o, a, b) in [(0, 0, 2), (1, 1, 0), (2, 0, 1), (0, 3, 1)] {
            let mut with = BundleOnCurve::new(&[("o", o), ("a", a), ("b", b), ("c", 0)]);
            let mut without = BundleOnCurve::new(&[("o", o), ("a", a), ("b", b)]);
            if o == 0 {
                with = with.with_trivial("o");
                without = without.with_trivial("o");
            }
            assert_eq!(h0_h1(&big, &with).unwrap(), h0_h1(&small, &without).unwrap());
        }
    }

    #[test]
    fn rejects_bad_graphs() {
        let two = CurveGraph::new(vec![Component::elliptic("o"), Component::elliptic("p")], vec![node("o", "x", "p", "y")]).unwrap();
        assert!(matches!(two.core(), Err(CurveError::Genus(2))));
        let apart = CurveGraph::new(vec![Component::elliptic("o"), Component::rational("a")], vec![]).unwrap();
        assert!(matches!(apart.core(), Err(CurveError::Disconnected)));
        let tree = CurveGraph::new(vec![Component::rational("a"), Component::rational("b")], vec![node("a", "zero", "b", "zero")]).unwrap();
        assert!(matches!(tree.core(), Err(CurveError::Genus(0))));
        assert!(matches!(
            CurveGraph::new(vec![Component::elliptic("o")], vec![node("o", "zero", "o", "x")]),
            Err(CurveError::CoordinatePointOnElliptic { .. })
        ));
        assert!(matches!(
            CurveGraph::new(vec![Component::rational("a"), Component::rational("b")], vec![node("a", "zero", "b", "zero"), node("a", "zero", "b", "infinity")]),
            Err(CurveError::DuplicatePoint { .. })
        ));
    }

    #[test]
    fn core_is_idempotent() {
        let g = oabc();
        let core = g.core().unwrap();
        let all: BTreeSet<String> = core.iter().cloned().chain(g.tails().unwrap().into_iter().flatten()).collect();
        assert_eq!(all.len(), g.components().len());
        let sub = CurveGraph::new(
            g.components().iter().filter(|c| core.contains(&c.id)).cloned().collect(),
            vec![],
        )
        .unwrap();
        assert_eq!(sub.core().unwrap(), core);
    }
}
