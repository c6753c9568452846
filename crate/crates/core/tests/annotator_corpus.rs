mod support;

use std::collections::{BTreeMap, BTreeSet};

use idlex_core::annotate::{
    evaluate_annotations, Annotator, AnnotatorConfig, EvalReport, PersonFilter, PersonNounLexicon,
    Resources, Technique, Verdict,
};
use idlex_core::embed::{load_embeddings, EmbeddingTable};
use idlex_core::lexicon::{load_lexicon, Lexicon};
use idlex_core::text::ingest_conllu;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

struct Setup {
    lexicon: Lexicon,
    person_nouns: PersonNounLexicon,
    embeddings: EmbeddingTable,
    corpus: Vec<Sentence>,
}

fn setup() -> Setup {
    Setup {
        lexicon: load_lexicon(fixture("lexicon.csv")).unwrap(),
        person_nouns: PersonNounLexicon::load(fixture("person_nouns.txt")).unwrap(),
        embeddings: load_embeddings(fixture("embeddings.txt")).unwrap(),
        corpus: synthetic_corpus(&mut ChaCha8Rng::seed_from_u64(3)),
    }
}

fn run(s: &Setup, technique: Technique, filter: PersonFilter, only: Option<&[Context]>) -> EvalReport {
    let config = match filter {
        PersonFilter::None => AnnotatorConfig::new(technique),
        f => AnnotatorConfig::new(technique).with_person_filter(f),
    };
    let annotator = Annotator::new(
        &s.lexicon,
        config,
        Resources {
            person_nouns: Some(&s.person_nouns),
            embeddings: Some(&s.embeddings),
        },
    )
    .unwrap();
    let docs: Vec<&Sentence> = s
        .corpus
        .iter()
        .filter(|d| only.map_or(true, |c| c.contains(&d.context)))
        .collect();
    let mut predicted = BTreeMap::new();
    let mut gold = BTreeMap::new();
    for d in docs {
        let doc = ingest_conllu(&d.doc_id, &d.text, &d.conllu).unwrap();
        predicted.insert(d.doc_id.clone(), annotator.annotate(&doc).unwrap());
        gold.insert(d.doc_id.clone(), d.gold.clone());
    }
    evaluate_annotations(&predicted, &gold).unwrap()
}

#[test]
fn corpus_shape() {
    let s = setup();
    assert_eq!(s.corpus.len(), 200);
    let ids: BTreeSet<_> = s.corpus.iter().map(|d| &d.doc_id).collect();
    assert_eq!(ids.len(), 200);
    for d in &s.corpus {
        ingest_conllu(&d.doc_id, &d.text, &d.conllu).unwrap();
    }
}

#[test]
fn token_matchers_beat_substring() {
    let s = setup();
    let sub = run(&s, Technique::Substring, PersonFilter::None, None).micro.f1.unwrap();
    for t in [Technique::Exact, Technique::Lemma] {
        let f1 = run(&s, t, PersonFilter::None, None).micro.f1.unwrap();
        assert!(f1 > sub, "{t:?} {f1} vs substring {sub}");
    }
}

#[test]
fn person_filters_trade_false_positives_for_false_negatives() {
    let s = setup();
    let only = [Context::NonPersonAmbiguous, Context::NonPersonIdentity];
    for t in [Technique::Exact, Technique::Lemma] {
        let base = run(&s, t, PersonFilter::None, Some(&only)).micro;
        for f in [PersonFilter::Lexicon, PersonFilter::Similarity] {
            let filtered = run(&s, t, f, Some(&only)).micro;
            assert!(filtered.fp < base.fp, "{t:?}/{f:?}: fp {} vs {}", filtered.fp, base.fp);
            assert!(filtered.fn_ > base.fn_, "{t:?}/{f:?}: fn {} vs {}", filtered.fn_, base.fn_);
        }
    }
}

#[test]
fn person_contexts_survive_filters() {
    let s = setup();
    for f in [PersonFilter::Lexicon, PersonFilter::Similarity] {
        let r = run(&s, Technique::Lemma, f, Some(&[Context::Person]));
        assert_eq!((r.micro.fp, r.micro.fn_), (0, 0), "{f:?}");
    }
}

#[test]
fn filtered_mentions_carry_the_filter_verdict() {
    let s = setup();
    let annotator = Annotator::new(
        &s.lexicon,
        AnnotatorConfig::new(Technique::Exact).with_person_filter(PersonFilter::Lexicon),
        Resources {
            person_nouns: Some(&s.person_nouns),
            embeddings: None,
        },
    )
    .unwrap();
    let text = "The black car sat .";
    let conllu = "1\tThe\t_\tDET\t_\t_\t3\tdet\t_\t_\n2\tblack\t_\tADJ\t_\t_\t3\tamod\t_\t_\n\
                  3\tcar\t_\tNOUN\t_\t_\t4\tnsubj\t_\t_\n4\tsat\t_\tVERB\t_\t_\t0\troot\t_\t_\n\
                  5\t.\t_\tPUNCT\t_\t_\t4\tpunct\t_\t_\n";
    let ms = annotator.annotate(&ingest_conllu("d", text, conllu).unwrap()).unwrap();
    assert_eq!(ms.len(), 1);
    assert_eq!(ms[0].disambiguation, Verdict::FilteredPersonLexicon);
    assert!(ms[0].non_identity_possible);
}
