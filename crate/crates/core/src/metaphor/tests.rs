use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::corpus::parse_document_id;
use crate::corpus::test_support::raw_corpus;
use crate::topics::ModelConfig;

fn targets(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn motore_della_ricerca() {
    let c = raw_corpus(&[("phase2_week11_may_12", "le imprese, motore della ricerca")]);
    let found = flag_candidates(&c, &targets(&["imprese"]), &LexiconPack::default_pack(), Scope::Sentence);
    assert_eq!(found.len(), 1);
    let f = &found[0];
    assert_eq!((f.target.as_str(), f.domain.as_str(), f.trigger.as_str()), ("imprese", MACHINE, "motore"));
    assert_eq!((f.target_position, f.trigger_position), (1, 3));
    assert_eq!(f.snippet, "le imprese , motore della ricerca");
}

#[test]
fn no_lexicon_lemma_no_candidates() {
    let c = raw_corpus(&[("phase1_week1_february_27", "economia e società italiana")]);
    assert!(flag_candidates(&c, &targets(&["economia"]), &LexiconPack::default_pack(), Scope::Sentence).is_empty());
}

#[test]
fn two_targets_two_triggers_four_candidates() {
    let c = raw_corpus(&[(
        "phase1_week1_february_27",
        "economia motore società crollo. Economia senza immagini",
    )]);
    let found = flag_candidates(
        &c,
        &targets(&["economia", "società"]),
        &LexiconPack::default_pack(),
        Scope::Sentence,
    );
    let pairs: Vec<(&str, &str)> = found.iter().map(|f| (f.target.as_str(), f.trigger.as_str())).collect();
    assert_eq!(
        pairs,
        vec![("economia", "motore"), ("economia", "crollo"), ("società", "motore"), ("società", "crollo")]
    );
    let window = flag_candidates(
        &c,
        &targets(&["economia", "società"]),
        &LexiconPack::default_pack(),
        Scope::Window(1),
    );
    let pairs: Vec<(&str, &str)> = window.iter().map(|f| (f.target.as_str(), f.trigger.as_str())).collect();
    assert_eq!(pairs, vec![("economia", "motore"), ("società", "motore"), ("società", "crollo")]);
}

#[test]
fn target_that_is_also_trigger_skips_itself() {
    let c = raw_corpus(&[("phase1_week1_february_27", "crollo crollo")]);
    let found = flag_candidates(&c, &targets(&["crollo"]), &LexiconPack::default_pack(), Scope::Sentence);
    assert_eq!(found.len(), 2);
    assert!(found.iter().all(|f| f.target_position != f.trigger_position));
}

#[test]
fn scope_parsing() {
    assert_eq!("sentence".parse::<Scope>().unwrap(), Scope::Sentence);
    assert_eq!("window:3".parse::<Scope>().unwrap(), Scope::Window(3));
    assert_eq!("window(4)".parse::<Scope>().unwrap(), Scope::Window(4));
    assert!("paragraph".parse::<Scope>().is_err());
    assert_eq!(Scope::Window(2).to_string().parse::<Scope>().unwrap(), Scope::Window(2));
}

#[test]
fn candidates_csv() {
    let c = raw_corpus(&[("phase2_week11_may_12", "le imprese, motore della ricerca")]);
    let found = flag_candidates(&c, &targets(&["imprese"]), &LexiconPack::default_pack(), Scope::Sentence);
    let mut out = Vec::new();
    write_candidates_csv(&found, &mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "doc,sent,target,domain,trigger\nphase2_week11_may_12,0,imprese,MACHINE,motore\n"
    );
}

fn model(ids: &[&str], theta: Vec<Vec<f64>>) -> TopicModel {
    TopicModel {
        config: ModelConfig::new(theta[0].len()),
        vocabulary: vec![],
        term_frequency: vec![],
        doc_ids: ids.iter().map(|s| parse_document_id(s).unwrap()).collect(),
        phi: vec![vec![]; theta[0].len()],
        theta,
        assignments: vec![],
        draws: vec![],
        labels: vec![],
    }
}

#[test]
fn planted_machine_triggers_fill_one_cell() {
    let ids = ["phase1_week1_february_27", "phase1_week1_february_28", "phase2_week10_may_04"];
    let c = raw_corpus(&[
        (ids[0], "economia cresce"),
        (ids[1], "economia motore e carburante. Il motore"),
        (ids[2], "società ripartire"),
    ]);
    let m = model(&ids, vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.8, 0.1], vec![0.2, 0.5, 0.3]]);
    let pack = LexiconPack::default_pack();
    let found = flag_candidates(&c, &targets(&["economia", "società"]), &pack, Scope::Sentence);
    assert_eq!(found.len(), 3);
    let mx = topic_domain_matrix(&found, &m, &pack, &c).unwrap();
    assert_eq!(mx.total(), found.len());
    assert_eq!(mx.cell(1, MACHINE), 3);
    let nonzero = mx.counts.iter().flatten().filter(|&&x| x > 0).count();
    assert_eq!(nonzero, 1);
    assert_eq!(mx.topics, vec!["Topic 1", "Topic 2", "Topic 3"]);
    // Topic 2 dominates documents with 7 + 2 tokens.
    assert_eq!(mx.topic_tokens, vec![2, 9, 0]);
    assert!((mx.per_million()[1][2] - 3.0 * 1e6 / 9.0).abs() < 1e-9);
}

#[test]
fn ties_go_to_lowest_topic() {
    let ids = ["phase1_week1_february_27"];
    let c = raw_corpus(&[(ids[0], "economia tsunami")]);
    let m = model(&ids, vec![vec![0.4, 0.4, 0.2]]);
    let pack = LexiconPack::default_pack();
    let found = flag_candidates(&c, &targets(&["economia"]), &pack, Scope::Sentence);
    let mx = topic_domain_matrix(&found, &m, &pack, &c).unwrap();
    assert_eq!(mx.cell(0, NATURAL_DISASTER), 1);
}

#[test]
fn unscored_documents_rejected() {
    let c = raw_corpus(&[
        ("phase1_week1_february_27", "economia tsunami"),
        ("phase1_week1_february_28", "economia crollo"),
    ]);
    let m = model(&["phase1_week1_february_27"], vec![vec![1.0]]);
    let pack = LexiconPack::default_pack();
    let found = flag_candidates(&c, &targets(&["economia"]), &pack, Scope::Sentence);
    assert!(matches!(
        topic_domain_matrix(&found, &m, &pack, &c),
        Err(MetaphorError::ModelCorpusMismatch(_))
    ));
}

#[test]
fn matrix_csv() {
    let ids = ["phase1_week1_february_27"];
    let c = raw_corpus(&[(ids[0], "economia tsunami")]);
    let m = model(&ids, vec![vec![1.0]]);
    let pack = LexiconPack::default_pack();
    let found = flag_candidates(&c, &targets(&["economia"]), &pack, Scope::Sentence);
    let mx = topic_domain_matrix(&found, &m, &pack, &c).unwrap();
    let mut out = Vec::new();
    mx.write_csv(&mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "topic,domain,count,pmw\n1,BUILDING,0,0.00\n1,LIVING_ORGANISM,0,0.00\n1,MACHINE,0,0.00\n1,NATURAL_DISASTER,1,500000.00\n"
    );
}

const VOCAB: [&str; 6] = ["economia", "società", "motore", "crollo", "ferita", "lavoro"];

proptest! {
    #[test]
    fn scopes_nest_and_triggers_belong(docs in prop::collection::vec(prop::collection::vec(0..VOCAB.len(), 1..25), 1..5), n in 0usize..6) {
        let texts: Vec<String> = docs.iter().map(|d| d.iter().map(|&w| VOCAB[w]).collect::<Vec<_>>().join(" ")).collect();
        let ids = crate::synthetic::synthetic_ids(texts.len());
        let id_strings: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        let pairs: Vec<(&str, &str)> = id_strings.iter().map(|s| s.as_str()).zip(texts.iter().map(|s| s.as_str())).collect();
        let c = raw_corpus(&pairs);
        let pack = LexiconPack::default_pack();
        let t = targets(&["economia", "società"]);
        let key = |f: &MetaphorCandidate| (f.doc_id.clone(), f.target_position, f.trigger_position);
        let narrow: BTreeSet<_> = flag_candidates(&c, &t, &pack, Scope::Window(n)).iter().map(key).collect();
        let wide: BTreeSet<_> = flag_candidates(&c, &t, &pack, Scope::Window(n + 1)).iter().map(key).collect();
        let all = flag_candidates(&c, &t, &pack, Scope::Sentence);
        let sentence: BTreeSet<_> = all.iter().map(key).collect();
        prop_assert!(narrow.is_subset(&wide));
        prop_assert!(wide.is_subset(&sentence));
        for f in &all {
            prop_assert_eq!(pack.domain_of(&f.trigger), Some(f.domain.as_str()));
        }
        // Brute force: targets times triggers per document (one sentence each).
        let expected: usize = docs
            .iter()
            .map(|d| {
                let tg = d.iter().filter(|&&w| w < 2).count();
                let tr = d.iter().filter(|&&w| (2..5).contains(&w)).count();
                tg * tr
            })
            .sum();
        prop_assert_eq!(all.len(), expected);
    }
}
