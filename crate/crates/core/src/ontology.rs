//! Typed concept graphs: loading, alignment merging and reachability queries.
//!
//! Concepts are language-qualified strings (`en:hip hop`). Edges are directed
//! and carry a relation type; each relation type belongs to one of two
//! classes, [`RelationClass::Equivalence`] or [`RelationClass::Relatedness`].
//! Structural queries (degree, components, shortest paths) use the undirected
//! view of the graph.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relation type used for cross-language alignment edges.
pub const SAME_AS: &str = "sameAs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationClass {
    Equivalence,
    Relatedness,
}

impl std::str::FromStr for RelationClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "equivalence" => Ok(RelationClass::Equivalence),
            "relatedness" => Ok(RelationClass::Relatedness),
            other => {
                Err(Error::Config(format!("relation class must be `equivalence` or `relatedness`, got `{other}`")))
            }
        }
    }
}

/// Mapping from relation type to its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationClasses(BTreeMap<String, RelationClass>);

impl Default for RelationClasses {
    /// The music-genre ontology relations: redirects and `sameAs` are
    /// equivalences, the four genre-to-genre links are relatedness.
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for r in ["wikiPageRedirects", SAME_AS] {
            map.insert(r.to_string(), RelationClass::Equivalence);
        }
        for r in ["stylisticOrigin", "musicSubgenre", "derivative", "musicFusionGenre"] {
            map.insert(r.to_string(), RelationClass::Relatedness);
        }
        RelationClasses(map)
    }
}

impl RelationClasses {
    pub fn empty() -> Self {
        RelationClasses(BTreeMap::new())
    }

    pub fn insert(&mut self, relation: impl Into<String>, class: RelationClass) {
        self.0.insert(relation.into(), class);
    }

    pub fn get(&self, relation: &str) -> Option<RelationClass> {
        self.0.get(relation).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, RelationClass)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Parses `relation=class` lines. Blank lines and `#` comments are skipped.
    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut classes = RelationClasses::empty();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected `relation=class`, got `{line}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::parse(n + 1, "empty relation name"));
            }
            let class = value.parse().map_err(|e: Error| Error::parse(n + 1, e.to_string()))?;
            classes.insert(key, class);
        }
        Ok(classes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub relation: String,
    pub class: RelationClass,
    pub target: usize,
}

/// Counters produced while loading an edge list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub dropped_self_loops: usize,
    pub duplicate_edges: usize,
}

#[derive(Debug, Clone)]
pub struct ConceptGraph {
    concepts: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    relation_classes: RelationClasses,
    /// Sorted, deduplicated undirected adjacency.
    neighbors: Vec<Vec<usize>>,
}

/// Incremental construction of a [`ConceptGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    concepts: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    seen: HashSet<(usize, String, usize)>,
    classes: RelationClasses,
    report: LoadReport,
}

impl GraphBuilder {
    pub fn new(classes: RelationClasses) -> Self {
        GraphBuilder {
            concepts: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            seen: HashSet::new(),
            classes,
            report: LoadReport::default(),
        }
    }

    pub fn add_concept(&mut self, concept: &str) -> usize {
        if let Some(&i) = self.index.get(concept) {
            return i;
        }
        let i = self.concepts.len();
        self.concepts.push(concept.to_string());
        self.index.insert(concept.to_string(), i);
        i
    }

    /// Adds a typed edge. Self-loops register the concept but no edge;
    /// exact duplicates are ignored.
    pub fn add_edge(&mut self, source: &str, relation: &str, target: &str) -> Result<()> {
        let class =
            self.classes.get(relation).ok_or_else(|| Error::Config(format!("unknown relation type `{relation}`")))?;
        let s = self.add_concept(source);
        let t = self.add_concept(target);
        if s == t {
            self.report.dropped_self_loops += 1;
            return Ok(());
        }
        if !self.seen.insert((s, relation.to_string(), t)) {
            self.report.duplicate_edges += 1;
            return Ok(());
        }
        self.edges.push(Edge { source: s, relation: relation.to_string(), class, target: t });
        Ok(())
    }

    pub fn build(self) -> (ConceptGraph, LoadReport) {
        let mut neighbors = vec![Vec::new(); self.concepts.len()];
        for e in &self.edges {
            neighbors[e.source].push(e.target);
            neighbors[e.target].push(e.source);
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        let graph = ConceptGraph {
            concepts: self.concepts,
            index: self.index,
            edges: self.edges,
            relation_classes: self.classes,
            neighbors,
        };
        (graph, self.report)
    }
}

/// Reads a tab-separated `source<TAB>relation<TAB>target` edge list.
pub fn load_graph(reader: impl BufRead, classes: &RelationClasses) -> Result<(ConceptGraph, LoadReport)> {
    let mut builder = GraphBuilder::new(classes.clone());
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(n + 1, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let (s, r, t) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
        if s.is_empty() || r.is_empty() || t.is_empty() {
            return Err(Error::parse(n + 1, "empty field in edge record"));
        }
        builder.add_edge(s, r, t)?;
    }
    let (graph, report) = builder.build();
    if report.dropped_self_loops > 0 {
        log::warn!("dropped {} self-loop edge(s)", report.dropped_self_loops);
    }
    Ok((graph, report))
}

/// Reads a `source<TAB>target` alignment list.
pub fn load_alignment(reader: impl BufRead) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 || fields.iter().any(|f| f.trim().is_empty()) {
            return Err(Error::parse(n + 1, "expected `source<TAB>target`"));
        }
        pairs.push((fields[0].trim().to_string(), fields[1].trim().to_string()));
    }
    Ok(pairs)
}

impl ConceptGraph {
    pub fn empty() -> Self {
        GraphBuilder::new(RelationClasses::default()).build().0
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn relation_classes(&self) -> &RelationClasses {
        &self.relation_classes
    }

    pub fn index_of(&self, concept: &str) -> Option<usize> {
        self.index.get(concept).copied()
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.index.contains_key(concept)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.concepts[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Number of distinct neighbours of `concept`, ignoring edge direction.
    pub fn degree(&self, concept: &str) -> Result<usize> {
        let i = self.index_of(concept).ok_or_else(|| Error::lookup("concept", concept))?;
        Ok(self.neighbors[i].len())
    }

    /// A copy of this graph with extra isolated concepts appended.
    pub fn with_concepts<'a>(&self, extra: impl IntoIterator<Item = &'a str>) -> ConceptGraph {
        let mut b = self.to_builder();
        for c in extra {
            b.add_concept(c);
        }
        b.build().0
    }

    fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new(self.relation_classes.clone());
        for c in &self.concepts {
            b.add_concept(c);
        }
        for e in &self.edges {
            b.seen.insert((e.source, e.relation.clone(), e.target));
            b.edges.push(e.clone());
        }
        b
    }

    /// Breadth-first hop counts from `start`; `usize::MAX` marks unreachable.
    pub fn bfs_distances(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.concepts.len()];
        let mut queue = VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Connected components of the undirected view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentIndex {
    component_of: Vec<usize>,
    count: usize,
}

impl ComponentIndex {
    pub fn count(&self) -> usize {
        self.count
    }

    /// Component id of the concept at index `i`.
    pub fn component_of(&self, i: usize) -> usize {
        self.component_of[i]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.component_of
    }

    /// Concept indices of each component, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &c) in self.component_of.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Labels components 0, 1, ... in order of their lowest concept index.
pub fn connected_components(g: &ConceptGraph) -> ComponentIndex {
    let n = g.concept_count();
    let mut component_of = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if component_of[start] != usize::MAX {
            continue;
        }
        component_of[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if component_of[v] == usize::MAX {
                    component_of[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    ComponentIndex { component_of, count }
}

/// Union of two graphs plus `sameAs` equivalence edges for each aligned pair.
///
/// Alignment sources must live in `source`, targets in `target`, and the two
/// graphs must not share concept identifiers.
pub fn merge_aligned(
    source: &ConceptGraph,
    target: &ConceptGraph,
    alignment: &[(String, String)],
) -> Result<ConceptGraph> {
    for (s, t) in alignment {
        if !source.contains(s) {
            return Err(Error::Validation(format!("alignment source `{s}` is not in the source graph")));
        }
        if !target.contains(t) {
            return Err(Error::Validation(format!("alignment target `{t}` is not in the target graph")));
        }
    }
    merge_all(&[source, target], alignment)
}

/// Union of any number of graphs with disjoint concept sets, plus `sameAs`
/// edges between aligned pairs (endpoints may lie in any of the graphs).
pub fn merge_all(graphs: &[&ConceptGraph], alignment: &[(String, String)]) -> Result<ConceptGraph> {
    let mut classes = RelationClasses::empty();
    for g in graphs {
        for (r, c) in g.relation_classes().iter() {
            match classes.get(r) {
                Some(existing) if existing != c => {
                    return Err(Error::Config(format!("relation `{r}` is classed differently in the merged graphs")))
                }
                _ => classes.insert(r, c),
            }
        }
    }
    if classes.get(SAME_AS) == Some(RelationClass::Relatedness) {
        return Err(Error::Config(format!("`{SAME_AS}` must be an equivalence relation")));
    }
    classes.insert(SAME_AS, RelationClass::Equivalence);

    let mut builder = GraphBuilder::new(classes);
    for g in graphs {
        for c in g.concepts() {
            if builder.index.contains_key(c) {
                return Err(Error::Validation(format!("concept `{c}` appears in more than one merged graph")));
            }
            builder.add_concept(c);
        }
    }
    for g in graphs {
        for e in g.edges() {
            builder.add_edge(g.name(e.source), &e.relation, g.name(e.target))?;
        }
    }
    for (s, t) in alignment {
        if !builder.index.contains_key(s) {
            return Err(Error::Validation(format!("alignment endpoint `{s}` is not in any graph")));
        }
        if !builder.index.contains_key(t) {
            return Err(Error::Validation(format!("alignment endpoint `{t}` is not in any graph")));
        }
        builder.add_edge(s, SAME_AS, t)?;
    }
    Ok(builder.build().0)
}

/// Sources or targets that were not found in the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GeodesicDiagnostics {
    pub missing_sources: usize,
    pub missing_targets: usize,
}

/// Scores each target by the mean of `1 / (1 + d(s, t))` over the sources,
/// with unreachable or missing pairs contributing 0.
pub fn geodesic_scores(
    g: &ConceptGraph,
    sources: &[String],
    targets: &[String],
) -> Result<(Vec<f64>, GeodesicDiagnostics)> {
    let mut cache = HashMap::new();
    geodesic_scores_cached(g, sources, targets, &mut cache)
}

/// [`geodesic_scores`] reusing breadth-first searches across calls.
pub fn geodesic_scores_cached(
    g: &ConceptGraph,
    sources: &[String],
    targets: &[String],
    cache: &mut HashMap<usize, Vec<usize>>,
) -> Result<(Vec<f64>, GeodesicDiagnostics)> {
    if targets.is_empty() {
        return Err(Error::Validation("geodesic scoring needs at least one target".into()));
    }
    let mut unique: Vec<&String> = Vec::new();
    let mut seen = HashSet::new();
    for s in sources {
        if seen.insert(s) {
            unique.push(s);
        }
    }
    if unique.is_empty() {
        return Err(Error::Validation("geodesic scoring needs at least one source".into()));
    }
    let mut diag = GeodesicDiagnostics::default();
    let target_idx: Vec<Option<usize>> = targets.iter().map(|t| g.index_of(t)).collect();
    diag.missing_targets = target_idx.iter().filter(|t| t.is_none()).count();

    let mut scores = vec![0.0; targets.len()];
    for s in unique.iter() {
        let Some(si) = g.index_of(s) else {
            diag.missing_sources += 1;
            continue;
        };
        let dist = cache.entry(si).or_insert_with(|| g.bfs_distances(si));
        for (score, t) in scores.iter_mut().zip(&target_idx) {
            if let Some(ti) = t {
                let d = dist[*ti];
                if d != usize::MAX {
                    *score += 1.0 / (1.0 + d as f64);
                }
            }
        }
    }
    let k = unique.len() as f64;
    scores.iter_mut().for_each(|x| *x /= k);
    Ok((scores, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str, &str)]) -> ConceptGraph {
        let mut b = GraphBuilder::new(RelationClasses::default());
        for (s, r, t) in edges {
            b.add_edge(s, r, t).unwrap();
        }
        b.build().0
    }

    #[test]
    fn loads_subgenre_edge() {
        let text = "en:hiphop\tmusicSubgenre\ten:rap_west_coast\n";
        let (g, report) = load_graph(text.as_bytes(), &RelationClasses::default()).unwrap();
        assert_eq!(g.concept_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].class, RelationClass::Relatedness);
        assert_eq!(report, LoadReport::default());
    }

    #[test]
    fn empty_stream_gives_empty_graph() {
        let (g, _) = load_graph("".as_bytes(), &RelationClasses::default()).unwrap();
        assert_eq!(g.concept_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn self_loop_is_dropped_with_warning_count() {
        let (g, report) = load_graph("a\tsameAs\ta\n".as_bytes(), &RelationClasses::default()).unwrap();
        assert_eq!(g.concepts(), ["a"]);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(report.dropped_self_loops, 1);
    }

    #[test]
    fn duplicates_and_comments() {
        let text = "# header\na\tderivative\tb\n\na\tderivative\tb\n";
        let (g, report) = load_graph(text.as_bytes(), &RelationClasses::default()).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.duplicate_edges, 1);
    }

    #[test]
    fn malformed_record_reports_line() {
        let text = "a\tderivative\tb\nbroken line\n";
        match load_graph(text.as_bytes(), &RelationClasses::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = "a\t\tb\n";
        assert!(matches!(load_graph(text.as_bytes(), &RelationClasses::default()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_relation_is_config_error() {
        let err = load_graph("a\tlikes\tb\n".as_bytes(), &RelationClasses::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn relation_classes_parse() {
        let text = "# comment\nsameAs = equivalence\nlikes=relatedness\n";
        let classes = RelationClasses::parse(text.as_bytes()).unwrap();
        assert_eq!(classes.get("likes"), Some(RelationClass::Relatedness));
        assert_eq!(classes.get("sameAs"), Some(RelationClass::Equivalence));
        assert!(RelationClasses::parse("x=friend\n".as_bytes()).is_err());
        assert!(RelationClasses::parse("novalue\n".as_bytes()).is_err());
    }

    #[test]
    fn components_of_small_graphs() {
        let mut b = GraphBuilder::new(RelationClasses::default());
        b.add_edge("a", "sameAs", "b").unwrap();
        b.add_concept("c");
        let g = b.build().0;
        let idx = connected_components(&g);
        assert_eq!(idx.count(), 2);
        assert_eq!(idx.assignments(), [0, 0, 1]);

        assert_eq!(connected_components(&ConceptGraph::empty()).count(), 0);

        let path = graph(&[
            ("1", "derivative", "2"),
            ("3", "derivative", "2"),
            ("3", "derivative", "4"),
            ("5", "derivative", "4"),
        ]);
        assert_eq!(connected_components(&path).count(), 1);
    }

    #[test]
    fn degree_cases() {
        let star = graph(&[("c", "derivative", "x"), ("c", "derivative", "y"), ("z", "sameAs", "c")]);
        assert_eq!(star.degree("c").unwrap(), 3);
        let both = graph(&[("a", "derivative", "b"), ("b", "stylisticOrigin", "a")]);
        assert_eq!(both.degree("a").unwrap(), 1);
        let isolated = star.with_concepts(["lonely"]);
        assert_eq!(isolated.degree("lonely").unwrap(), 0);
        assert!(matches!(star.degree("nope"), Err(Error::Lookup { .. })));
    }

    #[test]
    fn merge_counts_components() {
        let mut b = GraphBuilder::new(RelationClasses::default());
        b.add_edge("en:a", "derivative", "en:b").unwrap();
        b.add_concept("en:s");
        let src = b.build().0;
        let mut b = GraphBuilder::new(RelationClasses::default());
        b.add_concept("fr:t");
        b.add_edge("fr:x", "derivative", "fr:y").unwrap();
        let tgt = b.build().0;
        let cs = connected_components(&src).count();
        let ct = connected_components(&tgt).count();

        let merged = merge_aligned(&src, &tgt, &[("en:s".into(), "fr:t".into())]).unwrap();
        assert_eq!(connected_components(&merged).count(), cs + ct - 1);
        assert_eq!(
            merged.edges().last().map(|e| (e.relation.as_str(), e.class)),
            Some((SAME_AS, RelationClass::Equivalence))
        );

        let plain = merge_aligned(&src, &tgt, &[]).unwrap();
        assert_eq!(connected_components(&plain).count(), cs + ct);
        assert_eq!(plain.edge_count(), src.edge_count() + tgt.edge_count());

        let err = merge_aligned(&src, &tgt, &[("en:s".into(), "fr:missing".into())]).unwrap_err();
        assert!(err.to_string().contains("fr:missing"));
    }

    #[test]
    fn merge_rejects_shared_concepts() {
        let a = graph(&[("x", "derivative", "y")]);
        assert!(matches!(merge_aligned(&a, &a, &[]), Err(Error::Validation(_))));
    }

    #[test]
    fn geodesic_examples() {
        let g = graph(&[("s", "derivative", "x"), ("x", "derivative", "t")]).with_concepts(["far"]);
        let (scores, diag) = geodesic_scores(&g, &["s".into()], &["t".into(), "s".into(), "far".into()]).unwrap();
        assert!((scores[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(scores[1], 1.0);
        assert_eq!(scores[2], 0.0);
        assert_eq!(diag, GeodesicDiagnostics::default());

        let (scores, diag) =
            geodesic_scores(&g, &["s".into(), "ghost".into()], &["s".into(), "nowhere".into()]).unwrap();
        assert_eq!(scores, vec![0.5, 0.0]);
        assert_eq!(diag.missing_sources, 1);
        assert_eq!(diag.missing_targets, 1);

        assert!(geodesic_scores(&g, &["s".into()], &[]).is_err());
    }
}
