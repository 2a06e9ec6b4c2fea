use proptest::prelude::*;
use tcl_core::oracle::oracle_rc;
use tcl_core::{
    compute_ranks, concept_rank, parse_concept, parse_kb, rc_entails_assertion, rc_entails_typicality,
    tcl_consistent, ConceptExpr, Degree, KnowledgeBase, Rank, RationalClosure, RigidInclusion,
    TypicalityInclusion,
};

fn c(s: &str) -> ConceptExpr {
    parse_concept(s).unwrap()
}

const ATHLETE: &str = "
SumoWrestler <= Athlete
Athlete <= HumanBeing
0.8 :: T(Athlete) <= Fit
0.8 :: T(SumoWrestler) <= not Fit
0.95 :: T(Athlete) <= YoungPerson
Athlete(roberto)
SumoWrestler(hiroyuki)
";

const ATHLETE_PROP: &str = "
SumoWrestler <= Athlete
0.8 :: T(Athlete) <= Fit
0.8 :: T(SumoWrestler) <= not Fit
";

#[test]
fn athlete_strata() {
    let kb = parse_kb(ATHLETE).unwrap();
    let t = compute_ranks(&kb);
    assert_eq!(t.strata, vec![vec![0, 1, 2], vec![1], vec![]]);
    assert!(t.fixpoint.is_empty());
    assert_eq!(concept_rank(&kb, &c("Athlete")), Rank::Finite(0));
    assert_eq!(concept_rank(&kb, &c("SumoWrestler")), Rank::Finite(1));
    assert_eq!(concept_rank(&kb, &c("bot")), Rank::Infinite);
}

#[test]
fn specificity_and_irrelevance() {
    let kb = parse_kb(ATHLETE).unwrap();
    assert!(rc_entails_typicality(&kb, &c("SumoWrestler"), &c("not Fit")));
    assert!(rc_entails_typicality(&kb, &c("Athlete and Bald"), &c("Fit")));
    assert!(rc_entails_typicality(&kb, &c("Athlete"), &c("not SumoWrestler")));
    assert!(!rc_entails_typicality(&kb, &c("SumoWrestler"), &c("Fit")));
    assert_eq!(rc_entails_assertion(&kb, "hiroyuki", &c("not Fit")), Ok(true));
    assert_eq!(rc_entails_assertion(&kb, "roberto", &c("Fit")), Ok(true));
    assert_eq!(rc_entails_assertion(&kb, "roberto", &c("Athlete")), Ok(true));
    assert!(rc_entails_assertion(&kb, "nobody", &c("Fit")).is_err());
}

#[test]
fn conflicting_inclusions_reach_the_fixpoint() {
    let kb = parse_kb("0.9 :: T(C) <= D\n0.9 :: T(C) <= not D").unwrap();
    let t = compute_ranks(&kb);
    assert_eq!(t.fixpoint, vec![0, 1]);
    assert_eq!(concept_rank(&kb, &c("C")), Rank::Infinite);
    assert!(oracle_rc(&kb, &c("C"), &c("bot")).unwrap());
    assert!(rc_entails_typicality(&kb, &c("C"), &c("bot")));
    let with_witness = parse_kb("0.9 :: T(C) <= D\n0.9 :: T(C) <= not D\nC(x)").unwrap();
    assert!(!tcl_consistent(&with_witness));
}

#[test]
fn empty_tbox() {
    let kb = KnowledgeBase::default();
    assert_eq!(compute_ranks(&kb).strata, vec![Vec::<usize>::new()]);
    assert!(!rc_entails_typicality(&kb, &c("A"), &c("B")));
    assert!(!oracle_rc(&kb, &c("A"), &c("B")).unwrap());
    assert!(tcl_consistent(&kb));
}

#[test]
fn single_inclusion_oracle() {
    let kb = parse_kb("0.7 :: T(A) <= B").unwrap();
    assert!(oracle_rc(&kb, &c("A"), &c("B")).unwrap());
}

fn literals() -> Vec<ConceptExpr> {
    ["SumoWrestler", "Athlete", "Fit"]
        .iter()
        .flat_map(|a| [c(a), ConceptExpr::not(c(a))])
        .collect()
}

#[test]
fn athlete_matches_oracle_on_all_literal_pairs() {
    let kb = parse_kb(ATHLETE_PROP).unwrap();
    let lits = literals();
    let mut n = 0;
    for s in &lits {
        for p in &lits {
            assert_eq!(
                rc_entails_typicality(&kb, s, p),
                oracle_rc(&kb, s, p).unwrap(),
                "T({}) <= {}",
                s,
                p
            );
            n += 1;
        }
    }
    assert_eq!(n, 36);
}

const NAMES: [&str; 3] = ["A", "B", "C"];

fn literal() -> impl Strategy<Value = ConceptExpr> {
    (0..3usize, any::<bool>()).prop_map(|(i, neg)| {
        let a = ConceptExpr::atom(NAMES[i]);
        if neg { ConceptExpr::not(a) } else { a }
    })
}

fn subject() -> impl Strategy<Value = ConceptExpr> {
    prop_oneof![
        3 => literal(),
        1 => (literal(), literal()).prop_map(|(l, r)| ConceptExpr::and(l, r)),
    ]
}

fn random_kb() -> impl Strategy<Value = KnowledgeBase> {
    let rigid = prop::collection::vec((literal(), literal()), 0..3);
    let typical = prop::collection::vec((subject(), literal()), 1..5);
    (rigid, typical).prop_map(|(r, t)| {
        let degree = Degree::parse("0.8").unwrap();
        let mut ts: Vec<TypicalityInclusion> = Vec::new();
        for (s, p) in t {
            if !ts.iter().any(|x| x.subject == s && x.predicate == p) {
                ts.push(TypicalityInclusion::new(degree.clone(), s, p));
            }
        }
        let rs = r.into_iter().map(|(l, r)| RigidInclusion::new(l, r)).collect();
        KnowledgeBase::new(rs, ts, vec![])
    })
}

fn all_literals() -> Vec<ConceptExpr> {
    NAMES.iter().flat_map(|a| [ConceptExpr::atom(a), ConceptExpr::not(ConceptExpr::atom(a))]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_ranked_world_oracle(kb in random_kb()) {
        let rc = RationalClosure::new(&kb);
        let lits = all_literals();
        let vocab: Vec<ConceptExpr> = NAMES.iter().map(|a| ConceptExpr::atom(a)).collect();
        let prop = tcl_core::oracle::PropositionalKb::new(&kb, &vocab).unwrap();
        let models = prop.minimal_models();
        for s in &lits {
            for p in &lits {
                prop_assert_eq!(rc.entails_typicality(s, p), prop.entails(&models, s, p).unwrap(), "T({}) <= {}", s, p);
            }
        }
    }

    #[test]
    fn strata_chain_is_short(kb in random_kb()) {
        let t = compute_ranks(&kb);
        prop_assert!(t.strata.len() <= kb.typical.len() + 1);
        for w in t.strata.windows(2) {
            prop_assert!(w[1].iter().all(|i| w[0].contains(i)));
            prop_assert!(w[1].len() < w[0].len());
        }
        prop_assert_eq!(t.strata.last().unwrap(), &t.fixpoint);
    }

    #[test]
    fn rank_is_monotone_under_subsumption(kb in random_kb(), x in subject(), y in subject()) {
        let rc = RationalClosure::new(&kb);
        let r = tcl_core::alc::Reasoner::new(&kb.rigid);
        if r.subsumes(&x, &y) {
            prop_assert!(rc.rank(&x) >= rc.rank(&y));
        }
    }

    #[test]
    fn supraclassical(kb in random_kb(), x in subject(), y in literal()) {
        let rc = RationalClosure::new(&kb);
        if rc.strict_reasoner().subsumes(&x, &y) {
            prop_assert!(rc.entails_typicality(&x, &y));
        }
    }

    #[test]
    fn inconsistency_survives_added_inclusions(kb in random_kb(), s in subject(), p in literal(), w in subject()) {
        let kb = kb.with_assertion(tcl_core::Assertion::concept(w, "x"));
        if !tcl_consistent(&kb) {
            let mut more = kb.clone();
            more.typical.push(TypicalityInclusion::new(Degree::parse("0.9").unwrap(), s, p));
            more.normalize();
            prop_assert!(!tcl_consistent(&more));
        }
    }
}
