use glad_core::edge::{edge_features_from_cp, AC, CB, CP, JF, SF, SI, SJ, SR};
use glad_core::graph::{CitationEdge, CitationNetwork, EdgeLabel, Paper};
use proptest::prelude::*;

/// Random small network: (journal, year, authors with institutions, extra refs) per paper
/// and a set of citing/cited pairs.
fn network() -> impl Strategy<Value = (CitationNetwork, Vec<u8>)> {
    let paper = (
        0usize..3,
        2000i32..2004,
        prop::collection::vec((0usize..5, 0usize..3), 0..4),
        prop::collection::vec(0usize..3, 0..2),
    );
    (
        prop::collection::vec(paper, 3..8),
        prop::collection::vec((0usize..8, 0usize..8, 0u8..2), 1..20),
    )
        .prop_map(|(specs, pairs)| {
            let n = specs.len();
            let mut edges: Vec<(usize, usize, u8)> = Vec::new();
            for (s, d, cp) in pairs {
                let (s, d) = (s % n, d % n);
                if s != d && !edges.iter().any(|e| e.0 == s && e.1 == d) {
                    edges.push((s, d, cp));
                }
            }
            let papers: Vec<Paper> = specs
                .iter()
                .enumerate()
                .map(|(i, (j, year, authors, external))| {
                    let mut refs: Vec<String> = edges
                        .iter()
                        .filter(|e| e.0 == i)
                        .map(|e| format!("P{}", e.1))
                        .collect();
                    refs.extend(external.iter().map(|x| format!("X{x}")));
                    Paper {
                        id: format!("P{i}"),
                        title: String::new(),
                        abstract_text: String::new(),
                        journal_id: format!("J{j}"),
                        year: *year,
                        author_ids: authors.iter().map(|a| format!("A{}", a.0)).collect(),
                        institution_ids: authors.iter().map(|a| format!("I{}", a.1)).collect(),
                        reference_ids: refs,
                    }
                })
                .collect();
            let cit: Vec<CitationEdge> = edges
                .iter()
                .map(|e| CitationEdge {
                    src: format!("P{}", e.0),
                    dst: format!("P{}", e.1),
                    context: String::new(),
                    label: EdgeLabel::Unknown,
                })
                .collect();
            let cp = edges.iter().map(|e| e.2).collect();
            (CitationNetwork::new(papers, cit).unwrap(), cp)
        })
}

fn paper<'a>(net: &'a CitationNetwork, id: &str) -> &'a Paper {
    net.papers().iter().find(|p| p.id == id).unwrap()
}

/// Direct, unindexed evaluation of every relation feature for edge `e`.
fn oracle(net: &CitationNetwork, cp: &[u8], e: usize) -> [f64; 8] {
    let edge = &net.edges()[e];
    let (pi, pj) = (paper(net, &edge.src), paper(net, &edge.dst));
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut out = [0.0; 8];
    out[CP] = cp[e] as f64;
    out[SF] = flag(pi.author_ids.iter().any(|a| pj.author_ids.contains(a)));
    out[SJ] = flag(pi.journal_id == pj.journal_id);
    if !pi.reference_ids.is_empty() {
        let mut hits = 0;
        for r in &pi.reference_ids {
            if net
                .papers()
                .iter()
                .any(|p| &p.id == r && p.journal_id == pj.journal_id)
            {
                hits += 1;
            }
        }
        out[JF] = hits as f64 / pi.reference_ids.len() as f64;
    }
    out[SR] = flag(
        pi.reference_ids
            .iter()
            .any(|r| pj.reference_ids.contains(r)),
    );
    let institutions = |author: &str| -> Vec<&String> {
        let mut v = Vec::new();
        for p in net.papers() {
            for (k, a) in p.author_ids.iter().enumerate() {
                if a == author {
                    if let Some(inst) = p.institution_ids.get(k) {
                        v.push(inst);
                    }
                }
            }
        }
        v
    };
    if let (Some(fi), Some(fj)) = (pi.author_ids.first(), pj.author_ids.first()) {
        let (hi, hj) = (institutions(fi), institutions(fj));
        out[SI] = flag(hi.iter().any(|x| hj.contains(x)));
        let mut prior = false;
        for (k, other) in net.edges().iter().enumerate() {
            let (qs, qd) = (paper(net, &other.src), paper(net, &other.dst));
            if k != e
                && qs.author_ids.first() == Some(fj)
                && qd.author_ids.first() == Some(fi)
                && qs.year <= pi.year
            {
                prior = true;
            }
        }
        out[CB] = flag(prior);
    }
    let mut ac = false;
    for a in &pi.author_ids {
        for b in &pj.author_ids {
            if a != b {
                for p in net.papers() {
                    if p.id != pi.id
                        && p.id != pj.id
                        && p.author_ids.contains(a)
                        && p.author_ids.contains(b)
                    {
                        ac = true;
                    }
                }
            }
        }
    }
    out[AC] = flag(ac);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn features_match_direct_definitions((net, cp) in network()) {
        let f = edge_features_from_cp(&net, &cp).unwrap();
        for e in 0..net.n_edges() {
            let expected = oracle(&net, &cp, e);
            for (k, &v) in expected.iter().enumerate() {
                prop_assert_eq!(f.z[[e, k]], v, "edge {} feature {}", e, k);
            }
        }
    }
}

#[test]
fn journal_fraction_of_a_fixed_reference_list() {
    // citing paper with 124 references, 96 of them in the cited journal
    let mut papers = Vec::new();
    let mut refs = Vec::new();
    for k in 0..124 {
        let id = format!("R{k:03}");
        papers.push(Paper {
            id: id.clone(),
            title: String::new(),
            abstract_text: String::new(),
            journal_id: if k < 96 { "J1".into() } else { "J2".into() },
            year: 2000,
            author_ids: vec![],
            institution_ids: vec![],
            reference_ids: vec![],
        });
        refs.push(id);
    }
    papers.push(Paper {
        id: "S".into(),
        title: String::new(),
        abstract_text: String::new(),
        journal_id: "J3".into(),
        year: 2001,
        author_ids: vec![],
        institution_ids: vec![],
        reference_ids: refs,
    });
    let edge = CitationEdge {
        src: "S".into(),
        dst: "R000".into(),
        context: String::new(),
        label: EdgeLabel::Unknown,
    };
    let net = CitationNetwork::new(papers, vec![edge]).unwrap();
    let f = edge_features_from_cp(&net, &[1]).unwrap();
    assert_eq!(f.z[[0, JF]], 96.0 / 124.0);
    assert_eq!(f.z[[0, CP]], 1.0);
}
