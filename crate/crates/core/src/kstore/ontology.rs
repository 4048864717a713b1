use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{vocab, Datatype, Graph, Iri, Term};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ObjectProperty {
    pub iri: Iri,
    pub domain: Option<Iri>,
    pub range: Option<Iri>,
    pub functional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DataProperty {
    pub iri: Iri,
    pub domain: Option<Iri>,
    pub range: Option<Datatype>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct IndividualEntry {
    pub iri: Iri,
    pub types: BTreeSet<Iri>,
}

/// Class/property/individual view of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OntologySnapshot {
    pub classes: BTreeSet<Iri>,
    pub subclass_edges: BTreeSet<(Iri, Iri)>,
    pub object_properties: Vec<ObjectProperty>,
    pub data_properties: Vec<DataProperty>,
    pub individuals: Vec<IndividualEntry>,
    pub labels: BTreeMap<Iri, String>,
    /// Statements that were skipped while building the view.
    pub warnings: Vec<String>,
}

impl OntologySnapshot {
    pub fn is_class(&self, iri: &Iri) -> bool {
        self.classes.contains(iri)
    }

    /// Direct subclasses of `parent`, sorted.
    pub fn children_of<'a>(&'a self, parent: &'a Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        self.subclass_edges
            .iter()
            .filter(move |(_, p)| p == parent)
            .map(|(c, _)| c)
    }

    pub fn parents_of<'a>(&'a self, child: &'a Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        self.subclass_edges
            .iter()
            .filter(move |(c, _)| c == child)
            .map(|(_, p)| p)
    }

    pub fn individuals_of<'a>(
        &'a self,
        class: &'a Iri,
    ) -> impl Iterator<Item = &'a IndividualEntry> + 'a {
        self.individuals
            .iter()
            .filter(move |i| i.types.contains(class))
    }

    /// `rdfs:label` if present, else the IRI's local name.
    pub fn label_or_local<'a>(&'a self, iri: &'a Iri) -> &'a str {
        self.labels
            .get(iri)
            .map(String::as_str)
            .unwrap_or_else(|| iri.local_name())
    }
}

fn typed_subjects<'a>(graph: &'a Graph, class: &'a str) -> BTreeSet<Iri> {
    graph
        .subjects_with(vocab::RDF_TYPE, class)
        .cloned()
        .collect()
}

fn first_iri<'a>(
    graph: &'a Graph,
    subject: &'a Iri,
    predicate: &'a str,
    warnings: &mut Vec<String>,
) -> Option<&'a Iri> {
    let mut objects = graph.objects(subject, predicate).filter_map(Term::as_iri);
    let first = objects.next();
    if objects.next().is_some() {
        warnings.push(format!(
            "<{subject}> has several <{predicate}> values; using <{}>",
            first.unwrap()
        ));
    }
    first
}

pub fn extract_ontology_view(graph: &Graph) -> OntologySnapshot {
    let mut snap = OntologySnapshot {
        classes: typed_subjects(graph, vocab::OWL_CLASS),
        ..Default::default()
    };

    for t in graph.triples() {
        if t.predicate.as_str() != vocab::RDFS_SUBCLASS_OF {
            continue;
        }
        let Some(parent) = t.object.as_iri() else {
            snap.warnings
                .push(format!("<{}> subClassOf a literal; skipped", t.subject));
            continue;
        };
        if snap.classes.contains(&t.subject) && snap.classes.contains(parent) {
            snap.subclass_edges
                .insert((t.subject.clone(), parent.clone()));
        } else {
            snap.warnings.push(format!(
                "subclass edge <{}> -> <{}> has an endpoint not declared as owl:Class; skipped",
                t.subject, parent
            ));
        }
    }

    let functional = typed_subjects(graph, vocab::OWL_FUNCTIONAL_PROPERTY);
    for iri in typed_subjects(graph, vocab::OWL_OBJECT_PROPERTY) {
        let domain = first_iri(graph, &iri, vocab::RDFS_DOMAIN, &mut snap.warnings).cloned();
        let range = first_iri(graph, &iri, vocab::RDFS_RANGE, &mut snap.warnings).cloned();
        snap.object_properties.push(ObjectProperty {
            functional: functional.contains(&iri),
            iri,
            domain,
            range,
        });
    }
    for iri in typed_subjects(graph, vocab::OWL_DATATYPE_PROPERTY) {
        let domain = first_iri(graph, &iri, vocab::RDFS_DOMAIN, &mut snap.warnings).cloned();
        let range = first_iri(graph, &iri, vocab::RDFS_RANGE, &mut snap.warnings)
            .and_then(|r| Datatype::from_iri(r.as_str()));
        snap.data_properties
            .push(DataProperty { iri, domain, range });
    }

    let mut individuals: BTreeMap<Iri, BTreeSet<Iri>> =
        typed_subjects(graph, vocab::OWL_NAMED_INDIVIDUAL)
            .into_iter()
            .map(|i| (i, BTreeSet::new()))
            .collect();
    for t in graph.triples() {
        if t.predicate.as_str() != vocab::RDF_TYPE {
            continue;
        }
        if let Some(class) = t.object.as_iri().filter(|c| snap.classes.contains(*c)) {
            individuals
                .entry(t.subject.clone())
                .or_default()
                .insert(class.clone());
        }
    }
    snap.individuals = individuals
        .into_iter()
        .map(|(iri, types)| IndividualEntry { iri, types })
        .collect();

    let mut named: BTreeSet<&Iri> = snap.classes.iter().collect();
    named.extend(snap.object_properties.iter().map(|p| &p.iri));
    named.extend(snap.data_properties.iter().map(|p| &p.iri));
    named.extend(snap.individuals.iter().map(|i| &i.iri));
    for iri in named {
        if let Some(label) = graph
            .objects(iri, vocab::RDFS_LABEL)
            .find_map(Term::as_literal)
        {
            snap.labels.insert(iri.clone(), label.lexical().to_string());
        }
    }
    snap
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "cycle", rename_all = "lowercase")]
pub enum AcyclicReport {
    Ok,
    Cycle(Vec<Iri>),
}

impl AcyclicReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, AcyclicReport::Ok)
    }
}

/// Depth-first search from each class in sorted order, following
/// child→parent edges. The first back edge found yields the cycle, listed
/// from the node it closes on.
pub fn check_acyclic_subclasses(snapshot: &OntologySnapshot) -> AcyclicReport {
    let mut parents: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    for (c, p) in &snapshot.subclass_edges {
        parents.entry(c).or_default().push(p);
    }
    let mut nodes: BTreeSet<&Iri> = snapshot.classes.iter().collect();
    for (c, p) in &snapshot.subclass_edges {
        nodes.insert(c);
        nodes.insert(p);
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&Iri, Mark> = BTreeMap::new();
    for &start in &nodes {
        if marks.contains_key(start) {
            continue;
        }
        let mut path: Vec<&Iri> = vec![start];
        let mut cursors: Vec<usize> = vec![0];
        marks.insert(start, Mark::Active);
        while let Some(&node) = path.last() {
            let depth = path.len() - 1;
            let next = parents
                .get(node)
                .and_then(|ps| ps.get(cursors[depth]))
                .copied();
            match next {
                Some(p) => {
                    cursors[depth] += 1;
                    match marks.get(p) {
                        Some(Mark::Active) => {
                            let from = path.iter().position(|n| *n == p).unwrap();
                            return AcyclicReport::Cycle(
                                path[from..].iter().map(|n| (*n).clone()).collect(),
                            );
                        }
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(p, Mark::Active);
                            path.push(p);
                            cursors.push(0);
                        }
                    }
                }
                None => {
                    marks.insert(node, Mark::Done);
                    path.pop();
                    cursors.pop();
                }
            }
        }
    }
    AcyclicReport::Ok
}
