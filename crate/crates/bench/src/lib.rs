//! Fixtures shared by the benchmarks.

use metaphora_core::corpus::conllu_corpus;
use metaphora_core::synthetic::{dirichlet_topics, synthetic_ids, SyntheticSpec};
use metaphora_core::Corpus;

/// A raw corpus drawn from `k` random topics over `vocabulary` words.
pub fn topic_corpus(k: usize, vocabulary: usize, documents: usize, doc_length: usize) -> Corpus {
    SyntheticSpec::new(dirichlet_topics(k, vocabulary, 0.1, 1), documents, doc_length, 2).generate().corpus
}

/// A parsed corpus where every sentence is a noun with `modifiers`
/// adjective dependents; noun and adjective lemmas cycle through small
/// inventories so pairs repeat.
pub fn treebank(documents: usize, sentences: usize, modifiers: usize) -> Corpus {
    let mut text = String::new();
    let mut n = 0usize;
    for id in synthetic_ids(documents) {
        text.push_str(&format!("# newdoc id = {id}\n"));
        for _ in 0..sentences {
            let noun = format!("nome{}", n % 50);
            text.push_str(&format!("1\t{noun}\t{noun}\tNOUN\t_\t_\t0\troot\t_\t_\n"));
            for m in 0..modifiers {
                let adj = format!("agg{}", (n * 7 + m * 13) % 300);
                text.push_str(&format!("{}\t{adj}\t{adj}\tADJ\t_\t_\t1\tamod\t_\t_\n", m + 2));
            }
            text.push('\n');
            n += 1;
        }
    }
    conllu_corpus(&text).expect("generated treebank parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_sizes() {
        let c = topic_corpus(3, 200, 10, 50);
        assert_eq!(c.len(), 10);
        assert_eq!(c.token_count(), 500);
        let t = treebank(4, 5, 3);
        assert_eq!(t.token_count(), 4 * 5 * 4);
        assert!(t.has_dependencies());
    }
}
