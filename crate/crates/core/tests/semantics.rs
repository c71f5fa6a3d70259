//! Winning-region computations on both backends, checked against worked
//! examples: the filibuster fixpoint, the discontinuity pair, domain tests,
//! transfinite iterate traces, and forward closures.

use dgl_core::rat::{rat, Rat};
use dgl_core::regions::{Interval, Region};
use dgl_core::semantics::{
    eval_formula, finite_closure, Backend, FiniteEval, OrdinalCounter, PredicateInterpretation,
    RegionEval, RepetitionMode, Schedule, StarOutcome, StateSet, WinningSet,
};
use dgl_core::syntax::{parse_formula, parse_game};

fn region_1d(lo: Option<i64>, lo_closed: bool, hi: Option<i64>, hi_closed: bool) -> Region {
    let iv = Interval::new(
        lo.map(rat),
        lo_closed,
        hi.map(rat),
        hi_closed,
    )
    .unwrap();
    Region::interval("x", iv)
}

fn ev<'a>(dims: &[&str], interp: &'a PredicateInterpretation) -> RegionEval<'a> {
    RegionEval {
        dims: dims.iter().map(|s| s.to_string()).collect(),
        interp,
        mode: RepetitionMode::Lfp,
        schedule: Schedule::default(),
    }
}

#[test]
fn filibuster_winning_region_is_the_goal() {
    // <(x:=0 -- x:=1)*> with goal {x=0} wins exactly on {x=0}.
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let game = parse_game("(x:=0 -- x:=1)*").unwrap();
    let goal = Region::interval("x", Interval::point(rat(0)));
    let won = e.angel(&game, &goal).unwrap();
    assert!(won.equals(&goal).unwrap());
}

#[test]
fn demonic_increment_repeat_is_scott_discontinuous() {
    // Angel wins ((y:=y+1)^d)*^d into (-inf, c] nowhere, but everywhere
    // into the full space.
    let interp = PredicateInterpretation::new();
    let e = RegionEval {
        dims: vec!["y".to_string()],
        interp: &interp,
        mode: RepetitionMode::Lfp,
        schedule: Schedule::default(),
    };
    let game = parse_game("((y:=y+1)^d)*^d").unwrap();
    for c in [0i64, 10, 100] {
        let goal = Region::interval("y", Interval::at_most(rat(c), true));
        let won = e.angel(&game, &goal).unwrap();
        assert!(won.is_empty(), "c = {c}");
    }
    let full = Region::full(vec!["y".to_string()]);
    let won = e.angel(&game, &full).unwrap();
    assert!(won.is_full());
}

#[test]
fn test_game_intersects_goal() {
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let game = parse_game("?x>=0").unwrap();
    let goal = region_1d(Some(-1), true, Some(1), true);
    let won = e.angel(&game, &goal).unwrap();
    assert!(won
        .equals(&region_1d(Some(0), true, Some(1), true))
        .unwrap());
}

#[test]
fn demon_test_clause() {
    // Demon's test region: complement of the test union the goal.
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let game = parse_game("?x>=0").unwrap();
    let goal = region_1d(Some(1), true, Some(2), true);
    let won = e.demon(&game, &goal).unwrap();
    let expected = region_1d(None, false, Some(0), false)
        .union(&goal)
        .unwrap();
    assert!(won.equals(&expected).unwrap());
}

#[test]
fn deterministic_assignment_has_equal_regions() {
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let game = parse_game("x:=0").unwrap();
    for goal in [
        region_1d(Some(0), true, Some(1), false),
        region_1d(None, false, Some(-1), true),
        Region::full(vec!["x".to_string()]),
    ] {
        let a = e.angel(&game, &goal).unwrap();
        let d = e.demon(&game, &goal).unwrap();
        assert!(a.equals(&d).unwrap());
    }
}

#[test]
fn scaling_and_cross_variable_assignments() {
    let interp = PredicateInterpretation::new();
    let e = ev(&["x", "y"], &interp);
    // x := 3*x lands in [0,9) iff x in [0,3).
    let game = parse_game("x:=3*x").unwrap();
    let goal = Region::from_box(
        vec!["x".to_string(), "y".to_string()],
        vec![
            Interval::bounded(rat(0), true, rat(9), false).unwrap(),
            Interval::full(),
        ],
    );
    let won = e.angel(&game, &goal).unwrap();
    let expected = Region::from_box(
        vec!["x".to_string(), "y".to_string()],
        vec![
            Interval::bounded(rat(0), true, rat(3), false).unwrap(),
            Interval::full(),
        ],
    );
    assert!(won.equals(&expected).unwrap());
    // x := y+1 frees x and constrains y.
    let game = parse_game("x:=y+1").unwrap();
    let won = e.angel(&game, &goal).unwrap();
    let expected = Region::from_box(
        vec!["x".to_string(), "y".to_string()],
        vec![
            Interval::full(),
            Interval::bounded(rat(-1), true, rat(8), false).unwrap(),
        ],
    );
    assert!(won.equals(&expected).unwrap());
}

#[test]
fn omega_two_closure_iterates() {
    // <((x:=x+1; {x'=1}^d) ++ x:=x-1)*> from [0,1): the iterates walk
    // [0,n+1), jump to [0,inf) at the first limit, then [-n,inf), and close
    // at the full line at ordinal w*2.
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let body = parse_game("(x:=x+1; {x'=1}^d) ++ x:=x-1").unwrap();
    let x0 = region_1d(Some(0), true, Some(1), false);
    let trace = e.angel_star_trace(&body, &x0).unwrap();

    for n in 0..=4i64 {
        let got = trace.at(&OrdinalCounter::finite(n as u64)).unwrap();
        let expected = region_1d(Some(0), true, Some(n + 1), false);
        assert!(got.equals(&expected).unwrap(), "iterate {n}");
    }
    let omega = trace.at(&OrdinalCounter::omega_times(1)).unwrap();
    assert!(omega.equals(&region_1d(Some(0), true, None, false)).unwrap());
    for n in 1..=3u64 {
        let mut ord = OrdinalCounter::omega_times(1);
        for _ in 0..n {
            ord = ord.succ();
        }
        let got = trace.at(&ord).unwrap();
        let expected = region_1d(Some(-(n as i64)), true, None, false);
        assert!(got.equals(&expected).unwrap(), "iterate w+{n}");
    }
    match &trace.outcome {
        StarOutcome::Fixpoint { region, ordinal } => {
            assert!(region.is_full());
            assert_eq!(*ordinal, OrdinalCounter::omega_times(2));
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn dual_free_loop_closes_at_omega() {
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let body = parse_game("x:=x-1").unwrap();
    let x0 = region_1d(Some(0), true, Some(1), false);
    let trace = e.angel_star_trace(&body, &x0).unwrap();
    match &trace.outcome {
        StarOutcome::Fixpoint { region, ordinal } => {
            assert!(region
                .equals(&region_1d(Some(0), true, None, false))
                .unwrap());
            assert_eq!(*ordinal, OrdinalCounter::omega_times(1));
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn already_fixed_point_stops_at_zero() {
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let body = parse_game("?false").unwrap();
    let x0 = region_1d(Some(0), true, Some(1), false);
    let trace = e.angel_star_trace(&body, &x0).unwrap();
    match &trace.outcome {
        StarOutcome::Fixpoint { region, ordinal } => {
            assert!(region.equals(&x0).unwrap());
            assert!(ordinal.is_zero());
            assert_eq!(trace.iterates.len(), 1);
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn omega_strategic_truncates_at_the_limit() {
    // <(x:=1; {x'=1}^d ++ x:=x-1)*> (0<=x<1): the omega-strategic region is
    // [0,inf) while the least fixpoint is the full line at w+1.
    let interp = PredicateInterpretation::new();
    let game = parse_game("((x:=1; {x'=1}^d) ++ x:=x-1)*").unwrap();
    let goal = region_1d(Some(0), true, Some(1), false);

    let omega_ev = RegionEval {
        dims: vec!["x".to_string()],
        interp: &interp,
        mode: RepetitionMode::OmegaStrategic,
        schedule: Schedule::default(),
    };
    let omega_set = omega_ev.angel(&game, &goal).unwrap();
    assert!(omega_set
        .equals(&region_1d(Some(0), true, None, false))
        .unwrap());

    let lfp_ev = ev(&["x"], &interp);
    let lfp_set = lfp_ev.angel(&game, &goal).unwrap();
    assert!(lfp_set.is_full());
}

#[test]
fn explosive_clock_formula_is_valid_on_region_backend() {
    // <((x:=x+1; {x'=x*x}^d) ++ x:=x-1)*> (0<=x & x<1) holds everywhere.
    let interp = PredicateInterpretation::new();
    let e = ev(&["x"], &interp);
    let f = parse_formula("<((x:=x+1; {x'=x*x}^d) ++ x:=x-1)*> (0<=x & x<1)").unwrap();
    let set = e.truth_set(&f).unwrap();
    assert!(set.is_full());
}

#[test]
fn finite_closure_examples() {
    // (x:=x-y; y:=x) -- x:=0 from (5,3), absorbing at x=0.
    let dims = vec!["x".to_string(), "y".to_string()];
    let game = parse_game("(x:=x-y; y:=x) -- x:=0").unwrap();
    let goal = parse_formula("x=0").unwrap();
    let space = finite_closure(
        dims.clone(),
        vec![vec![rat(5), rat(3)]],
        &game,
        Some(&goal),
        100_000,
    )
    .unwrap();
    assert!(space.state_index(&[rat(5), rat(3)]).is_some());
    assert!(space.state_index(&[rat(2), rat(2)]).is_some());
    for s in space.states() {
        let i = space.state_index(s).unwrap();
        if space.is_absorbing(i) {
            assert_eq!(s[0], rat(0));
        }
    }

    // (x:=a; a:=0) -- x:=0 from (5,1): BFS oracle.
    let dims = vec!["x".to_string(), "a".to_string()];
    let game = parse_game("(x:=a; a:=0) -- x:=0").unwrap();
    let space = finite_closure(dims.clone(), vec![vec![rat(5), rat(1)]], &game, None, 100_000)
        .unwrap();
    let mut expected: Vec<Vec<Rat>> = vec![
        vec![rat(5), rat(1)],
        vec![rat(1), rat(0)],
        vec![rat(0), rat(1)],
        vec![rat(0), rat(0)],
        vec![rat(1), rat(1)],
    ];
    // Independent BFS oracle over the two assignment moves.
    let mut oracle: Vec<Vec<Rat>> = vec![];
    let mut queue = vec![vec![rat(5), rat(1)]];
    while let Some(s) = queue.pop() {
        if oracle.contains(&s) {
            continue;
        }
        oracle.push(s.clone());
        queue.push(vec![s[1].clone(), rat(0)]);
        queue.push(vec![rat(0), s[1].clone()]);
    }
    oracle.sort();
    expected.sort();
    let mut got: Vec<Vec<Rat>> = space.states().to_vec();
    got.sort();
    assert_eq!(got, oracle);
    // The paper's listed states are all present.
    for s in [[5i64, 1], [0, 1], [1, 0], [0, 0]] {
        assert!(space.state_index(&[rat(s[0]), rat(s[1])]).is_some());
    }

    // Closed initials stay put under ?true.
    let game = parse_game("?true").unwrap();
    let space = finite_closure(
        vec!["x".to_string()],
        vec![vec![rat(0)], vec![rat(1)]],
        &game,
        None,
        10,
    )
    .unwrap();
    assert_eq!(space.len(), 2);
}

#[test]
fn k_counterexample_demon_region_empty() {
    let dims = vec!["x".to_string(), "y".to_string()];
    let space = dgl_core::semantics::FiniteSpace::grid(
        dims.clone(),
        &[vec![rat(0), rat(1)], vec![rat(0), rat(1)]],
    );
    let interp = PredicateInterpretation::new();
    let fe = FiniteEval {
        space: &space,
        interp: &interp,
        mode: RepetitionMode::Lfp,
    };
    let game = parse_game("(x:=1 -- x:=0); y:=0").unwrap();
    let goal = fe.truth_set(&parse_formula("y=1").unwrap()).unwrap();
    let demon = fe.demon(&game, &goal).unwrap();
    assert!(demon.is_empty());
}

#[test]
fn advance_notice_formula_mode_separation() {
    // x=1 & a=1 -> <((x:=a; a:=0) -- x:=0)*> x!=1 is true under the least
    // fixpoint but false under advance notice at (1,1).
    let dims = vec!["x".to_string(), "a".to_string()];
    let space = dgl_core::semantics::FiniteSpace::grid(
        dims.clone(),
        &[vec![rat(0), rat(1), rat(5)], vec![rat(0), rat(1), rat(5)]],
    );
    let interp = PredicateInterpretation::new();
    let formula = parse_formula("x=1 & a=1 -> <((x:=a; a:=0) -- x:=0)*> x!=1").unwrap();

    let backend = Backend::Finite {
        space: &space,
        interp: &interp,
    };
    let lfp = eval_formula(&formula, &backend, RepetitionMode::Lfp).unwrap();
    match &lfp {
        WinningSet::Finite(s) => assert!(s.is_full(), "valid under the least fixpoint"),
        _ => unreachable!(),
    }
    let adv = eval_formula(&formula, &backend, RepetitionMode::AdvanceNotice).unwrap();
    let idx = space.state_index(&[rat(1), rat(1)]).unwrap();
    match &adv {
        WinningSet::Finite(s) => assert!(!s.contains(idx), "false under advance notice at (1,1)"),
        _ => unreachable!(),
    }
}

#[test]
fn advance_notice_agrees_with_lfp_on_dual_free_games() {
    let dims = vec!["x".to_string(), "y".to_string()];
    let space = dgl_core::semantics::FiniteSpace::grid(
        dims.clone(),
        &[vec![rat(0), rat(1), rat(2)], vec![rat(0), rat(1), rat(2)]],
    );
    let interp = PredicateInterpretation::new();
    let games = [
        "(x:=0 ++ x:=1)*",
        "(x:=y; y:=0)*",
        "(?x=0; y:=1 ++ x:=1)*",
        "((x:=1 ++ y:=2); ?y>=0)*",
    ];
    for g in games {
        let game = parse_game(g).unwrap();
        for goal_src in ["x=0", "x=1 & y=0", "x>=1 | y=2"] {
            let goal = parse_formula(goal_src).unwrap();
            let fe_l = FiniteEval {
                space: &space,
                interp: &interp,
                mode: RepetitionMode::Lfp,
            };
            let fe_a = FiniteEval {
                space: &space,
                interp: &interp,
                mode: RepetitionMode::AdvanceNotice,
            };
            let x = fe_l.truth_set(&goal).unwrap();
            let l = fe_l.angel(&game, &x).unwrap();
            let a = fe_a.angel(&game, &x).unwrap();
            assert_eq!(l, a, "game {g}, goal {goal_src}");
        }
    }
}

#[test]
fn determinacy_on_finite_backend() {
    let dims = vec!["x".to_string()];
    let space =
        dgl_core::semantics::FiniteSpace::grid(dims.clone(), &[vec![rat(0), rat(1)]]);
    let interp = PredicateInterpretation::new();
    let backend = Backend::Finite {
        space: &space,
        interp: &interp,
    };
    for g in ["(x:=0 -- x:=1)*", "(?x=0)^d; x:=1", "x:=0 ++ (x:=1)^d"] {
        for goal in ["x=0", "x=1", "x>=0"] {
            let f = parse_formula(&format!("!<{g}> !({goal}) <-> [{g}] ({goal})")).unwrap();
            let r = eval_formula(&f, &backend, RepetitionMode::Lfp).unwrap();
            match r {
                WinningSet::Finite(s) => assert!(s.is_full(), "determinacy for {g} / {goal}"),
                _ => unreachable!(),
            }
        }
    }
}

#[test]
fn goal_absorbing_star_query() {
    // The convergence-axiom conclusion: <((x:=x-y; y:=0) -- x:=x-1)*> x<=0
    // is false at (2,1) with a goal-absorbing closure.
    let dims = vec!["x".to_string(), "y".to_string()];
    let game = parse_game("(x:=x-y; y:=0) -- x:=x-1").unwrap();
    let goal = parse_formula("x<=0").unwrap();
    let space = finite_closure(
        dims.clone(),
        vec![vec![rat(2), rat(1)]],
        &game,
        Some(&goal),
        100_000,
    )
    .unwrap();
    let interp = PredicateInterpretation::new();
    let fe = FiniteEval {
        space: &space,
        interp: &interp,
        mode: RepetitionMode::Lfp,
    };
    let f = parse_formula("<((x:=x-y; y:=0) -- x:=x-1)*> x<=0").unwrap();
    let set = fe.truth_set(&f).unwrap();
    let idx = space.state_index(&[rat(2), rat(1)]).unwrap();
    assert!(!set.contains(idx));
}

#[test]
fn region_backend_rejects_out_of_fragment_games() {
    let interp = PredicateInterpretation::new();
    let e = ev(&["x", "y"], &interp);
    let goal = Region::full(vec!["x".to_string(), "y".to_string()]);
    for g in ["x:=x-y", "x:=x*x", "{x'=1, y'=1}", "{x'=y}"] {
        let game = parse_game(g).unwrap();
        assert!(e.angel(&game, &goal).is_err(), "{g} should be unsupported");
    }
}

#[test]
fn eval_formula_with_predicate_interpretation() {
    let mut interp = PredicateInterpretation::new();
    interp.insert(
        "p",
        Region::from_box(
            PredicateInterpretation::slot_dims(1),
            vec![Interval::at_least(rat(0), true)],
        ),
    );
    let e = RegionEval {
        dims: vec!["x".to_string()],
        interp: &interp,
        mode: RepetitionMode::Lfp,
        schedule: Schedule::default(),
    };
    // p(x-1) shifts the interpretation right by one.
    let set = e.truth_set(&parse_formula("p(x-1)").unwrap()).unwrap();
    assert!(set
        .equals(&Region::interval("x", Interval::at_least(rat(1), true)))
        .unwrap());
    // The first proof obligation: archimedean induction over every p.
    let obligation =
        parse_formula("\\forall x ((0<=x & x<1) | p(x-1) -> p(x)) -> (x>=0 -> p(x))").unwrap();
    let set = e.truth_set(&obligation).unwrap();
    assert!(set.is_full());
}

#[test]
fn state_sets_behave() {
    let mut s = StateSet::empty(130);
    s.insert(0);
    s.insert(64);
    s.insert(129);
    assert_eq!(s.count(), 3);
    assert!(s.contains(64));
    let c = s.complement();
    assert_eq!(c.count(), 127);
    assert!(s.intersect(&c).is_empty());
    assert!(s.union(&c).is_full());
}
