use std::collections::{BTreeSet, VecDeque};

use super::{
    IriRef, PatternElement, Predicate, QTerm, Query, QueryError, ResultTable, TriplePattern,
};
use crate::kstore::{Graph, Iri, Pattern, Term};

type Row = Vec<Option<Term>>;

enum Slot {
    Var(usize),
    Fixed(Term),
}

enum PSlot {
    Plain(Slot),
    Star(Iri),
}

struct Compiled {
    s: Slot,
    p: PSlot,
    o: Slot,
}

fn resolve(iri: &IriRef, query: &Query, graph: &Graph) -> Result<Iri, QueryError> {
    let text = match iri {
        IriRef::Full(s) => s.clone(),
        IriRef::Prefixed { prefix, local } => match query.prefixes.get(prefix) {
            Some(ns) => format!("{ns}{local}"),
            None => graph
                .expand(prefix, local)
                .ok_or_else(|| QueryError::UnknownPrefix(prefix.clone()))?,
        },
    };
    Iri::new(text).map_err(|e| QueryError::MalformedIri(e.to_string()))
}

fn compile(
    tp: &TriplePattern,
    vars: &[String],
    query: &Query,
    graph: &Graph,
) -> Result<Compiled, QueryError> {
    let slot = |t: &QTerm| -> Result<Slot, QueryError> {
        Ok(match t {
            QTerm::Var(v) => Slot::Var(
                vars.iter()
                    .position(|x| x == v)
                    .expect("pattern var indexed"),
            ),
            QTerm::Iri(i) => Slot::Fixed(Term::Iri(resolve(i, query, graph)?)),
            QTerm::Literal(l) => Slot::Fixed(Term::Literal(l.clone())),
        })
    };
    Ok(Compiled {
        s: slot(&tp.subject)?,
        p: match &tp.predicate {
            Predicate::Term(t) => PSlot::Plain(slot(t)?),
            Predicate::ZeroOrMore(i) => PSlot::Star(resolve(i, query, graph)?),
        },
        o: slot(&tp.object)?,
    })
}

fn current<'r>(slot: &'r Slot, row: &'r Row) -> Option<&'r Term> {
    match slot {
        Slot::Fixed(t) => Some(t),
        Slot::Var(i) => row[*i].as_ref(),
    }
}

/// Binds `slot` to `value` in `row`, or checks agreement if already bound.
fn unify(slot: &Slot, value: &Term, row: &mut Row) -> bool {
    match slot {
        Slot::Fixed(t) => t == value,
        Slot::Var(i) => match &row[*i] {
            Some(bound) => bound == value,
            None => {
                row[*i] = Some(value.clone());
                true
            }
        },
    }
}

fn reachable(graph: &Graph, start: &Term, predicate: &Iri, forward: bool) -> BTreeSet<Term> {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(node) = queue.pop_front() {
        let next: Vec<Term> = if forward {
            match &node {
                Term::Iri(s) => graph
                    .matching(&Pattern {
                        subject: Some(s),
                        predicate: Some(predicate),
                        object: None,
                    })
                    .into_iter()
                    .map(|t| t.object.clone())
                    .collect(),
                Term::Literal(_) => Vec::new(),
            }
        } else {
            graph
                .matching(&Pattern {
                    subject: None,
                    predicate: Some(predicate),
                    object: Some(&node),
                })
                .into_iter()
                .map(|t| Term::Iri(t.subject.clone()))
                .collect()
        };
        for n in next {
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    seen
}

fn all_nodes(graph: &Graph) -> BTreeSet<Term> {
    let mut nodes = BTreeSet::new();
    for t in graph.triples() {
        nodes.insert(Term::Iri(t.subject.clone()));
        nodes.insert(t.object.clone());
    }
    nodes
}

fn extend(graph: &Graph, pat: &Compiled, row: &Row, out: &mut Vec<Row>) {
    match &pat.p {
        PSlot::Plain(p) => {
            let s = current(&pat.s, row);
            if matches!(s, Some(Term::Literal(_))) {
                return;
            }
            let p_term = current(p, row);
            let p_iri = match p_term {
                Some(Term::Iri(i)) => Some(i),
                Some(Term::Literal(_)) => return,
                None => None,
            };
            let hits = graph.matching(&Pattern {
                subject: s.and_then(Term::as_iri),
                predicate: p_iri,
                object: current(&pat.o, row),
            });
            for t in hits {
                let mut r = row.clone();
                if unify(&pat.s, &Term::Iri(t.subject.clone()), &mut r)
                    && unify(p, &Term::Iri(t.predicate.clone()), &mut r)
                    && unify(&pat.o, &t.object, &mut r)
                {
                    out.push(r);
                }
            }
        }
        PSlot::Star(pred) => {
            let s = current(&pat.s, row).cloned();
            let o = current(&pat.o, row).cloned();
            let pairs: Vec<(Term, Term)> = match (s, o) {
                (Some(s), _) => reachable(graph, &s, pred, true)
                    .into_iter()
                    .map(|o| (s.clone(), o))
                    .collect(),
                (None, Some(o)) => reachable(graph, &o, pred, false)
                    .into_iter()
                    .map(|s| (s, o.clone()))
                    .collect(),
                (None, None) => all_nodes(graph)
                    .into_iter()
                    .flat_map(|s| {
                        reachable(graph, &s, pred, true)
                            .into_iter()
                            .map(move |o| (s.clone(), o))
                            .collect::<Vec<_>>()
                    })
                    .collect(),
            };
            for (sv, ov) in pairs {
                if matches!(sv, Term::Literal(_)) && !matches!(pat.s, Slot::Fixed(_)) {
                    continue;
                }
                let mut r = row.clone();
                if unify(&pat.s, &sv, &mut r) && unify(&pat.o, &ov, &mut r) {
                    out.push(r);
                }
            }
        }
    }
}

fn join_all(graph: &Graph, patterns: &[Compiled], seed: Vec<Row>) -> Vec<Row> {
    let mut rows = seed;
    for pat in patterns {
        let mut next = Vec::new();
        for row in &rows {
            extend(graph, pat, row, &mut next);
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    rows
}

/// Nested-loop evaluation left to right; OPTIONAL groups left-join onto the
/// solutions accumulated so far.
pub fn evaluate(query: &Query, graph: &Graph) -> Result<ResultTable, QueryError> {
    let vars = query.pattern_vars();
    let mut compiled = Vec::new();
    for el in &query.pattern {
        compiled.push(match el {
            PatternElement::Triple(tp) => (false, vec![compile(tp, &vars, query, graph)?]),
            PatternElement::Optional(g) => (
                true,
                g.iter()
                    .map(|tp| compile(tp, &vars, query, graph))
                    .collect::<Result<_, _>>()?,
            ),
        });
    }

    let mut rows: Vec<Row> = vec![vec![None; vars.len()]];
    for (optional, group) in &compiled {
        if *optional {
            let mut next = Vec::new();
            for row in rows {
                let ext = join_all(graph, group, vec![row.clone()]);
                if ext.is_empty() {
                    next.push(row);
                } else {
                    next.extend(ext);
                }
            }
            rows = next;
        } else {
            rows = join_all(graph, group, rows);
        }
    }

    let columns = query.columns();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            vars.iter()
                .position(|v| v == c)
                .expect("projection checked at parse")
        })
        .collect();
    let mut projected: Vec<Row> = rows
        .into_iter()
        .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
        .collect();
    projected.sort();
    if query.distinct {
        projected.dedup();
    }
    Ok(ResultTable {
        columns,
        rows: projected,
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse_query;
    use super::*;
    use crate::kstore::parse_turtle;

    fn run(ttl: &str, q: &str) -> ResultTable {
        let g = parse_turtle(ttl).unwrap();
        evaluate(&parse_query(q).unwrap(), &g).unwrap()
    }

    const G: &str =
        "@prefix ex: <http://x/> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
        ex:B rdfs:subClassOf ex:A . ex:C rdfs:subClassOf ex:B . ex:D rdfs:subClassOf ex:A .\n\
        ex:B rdfs:label \"bee\" . ex:i a ex:B . ex:j a ex:C .";

    #[test]
    fn bgp_join() {
        let t = run(
            G,
            "SELECT ?i ?p WHERE { ?i a ?c . ?c rdfs:subClassOf ?p . }",
        );
        assert_eq!(t.local_names("i"), vec!["i", "j"]);
        assert_eq!(t.local_names("p"), vec!["A", "B"]);
    }

    #[test]
    fn path_is_reflexive_and_transitive() {
        let t = run(G, "SELECT ?c WHERE { ?c rdfs:subClassOf* ex:A }");
        assert_eq!(t.local_names("c"), vec!["A", "B", "C", "D"]);
        let t = run(G, "SELECT ?p WHERE { ex:C rdfs:subClassOf* ?p }");
        assert_eq!(t.local_names("p"), vec!["A", "B", "C"]);
        let t = run(G, "SELECT ?c WHERE { ?c rdfs:subClassOf* ex:Nowhere }");
        assert_eq!(t.local_names("c"), vec!["Nowhere"]);
    }

    #[test]
    fn optional_left_join() {
        let t = run(
            G,
            "SELECT ?c ?l WHERE { ?c rdfs:subClassOf ex:A . OPTIONAL { ?c rdfs:label ?l } }",
        );
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows[0][1].as_ref().unwrap().text(), "bee");
        assert_eq!(t.rows[1][1], None);
    }

    #[test]
    fn distinct_dedupes() {
        let all = run(G, "SELECT ?p WHERE { ?c rdfs:subClassOf ?p }");
        let d = run(G, "SELECT DISTINCT ?p WHERE { ?c rdfs:subClassOf ?p }");
        assert_eq!(all.len(), 3);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn unknown_prefix_at_evaluation() {
        let g = parse_turtle(G).unwrap();
        let q = parse_query("SELECT ?c WHERE { ?c zz:p ?o }").unwrap();
        assert_eq!(
            evaluate(&q, &g),
            Err(QueryError::UnknownPrefix("zz".into()))
        );
    }

    #[test]
    fn repeated_variable_must_agree() {
        let t = run(
            "@prefix ex: <http://x/> . ex:a ex:p ex:a . ex:a ex:p ex:b .",
            "SELECT ?x WHERE { ?x ex:p ?x }",
        );
        assert_eq!(t.local_names("x"), vec!["a"]);
    }
}
