//! Concrete and abstract syntax: parsing, printing, binding analysis,
//! admissible substitution, and uniform substitution.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod subst;
pub mod vars;

pub use ast::{Formula, Game, OdeSystem, Term};
pub use parser::{parse, parse_formula, parse_game, parse_template, parse_term, ParseError, ParseKind, Parsed};
pub use printer::{format_formula, format_game, format_term};
pub use subst::{rename_all, rename_all_game, subst_term, substitute, uniform_substitute, SubstError};
pub use vars::{formula_vars, fresh_name, game_vars, predicate_arities, term_vars, VarSets};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn g(s: &str) -> Game {
        parse_game(s).unwrap()
    }

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn parses_filibuster_shape() {
        let got = f("<(x:=0 -- x:=1)*> x=0");
        let body = Game::star(Game::demonic_choice(
            Game::assign("x", Term::int(0)),
            Game::assign("x", Term::int(1)),
        ));
        let expected = Formula::diamond(body, Formula::eq(Term::var("x"), Term::int(0)));
        assert_eq!(got, expected);
    }

    #[test]
    fn equality_desugars_to_geq_pair() {
        let got = f("x=0");
        let expected = Formula::and(
            Formula::geq(Term::var("x"), Term::int(0)),
            Formula::geq(Term::int(0), Term::var("x")),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn parses_ode_with_domain() {
        let got = f("<{x'=v, v'=a, t'=1 & t<=1}> true");
        let expected = Formula::diamond(
            Game::ode(
                vec![
                    ("x".into(), Term::var("v")),
                    ("v".into(), Term::var("a")),
                    ("t".into(), Term::var("t").sub(Term::var("t")).add(Term::int(1))),
                ],
                Some(Formula::leq(Term::var("t"), Term::int(1))),
            ),
            Formula::tru(),
        );
        // Only the shape matters here; rebuild the exact rhs for t.
        if let Formula::Diamond(game, body) = &got {
            assert_eq!(**body, Formula::tru());
            match game.as_ref() {
                Game::Ode(sys) => {
                    assert_eq!(sys.eqs.len(), 3);
                    assert_eq!(sys.eqs[0], ("x".into(), Term::var("v")));
                    assert_eq!(sys.eqs[1], ("v".into(), Term::var("a")));
                    assert_eq!(sys.eqs[2], ("t".into(), Term::int(1)));
                    assert_eq!(
                        sys.domain,
                        Some(Formula::leq(Term::var("t"), Term::int(1)))
                    );
                }
                other => panic!("expected ODE, got {other:?}"),
            }
        } else {
            panic!("expected diamond");
        }
        let _ = expected;
    }

    #[test]
    fn rational_literals_lex_in_lowest_terms() {
        assert_eq!(t("7/2"), Term::Lit(ratio(7, 2)));
        assert_eq!(t("6/4"), Term::Lit(ratio(3, 2)));
        assert_eq!(t("-3"), Term::Lit(ratio(-3, 1)));
    }

    #[test]
    fn precedence_star_over_seq_over_choice() {
        assert_eq!(g("a ; b ++ c"), Game::choice(Game::seq(g("a"), g("b")), g("c")));
        assert_eq!(g("a ; b*"), Game::seq(g("a"), Game::star(g("b"))));
        assert_eq!(g("a*^d"), Game::dual(Game::star(g("a"))));
    }

    #[test]
    fn demonic_choice_desugars() {
        let got = g("a -- b");
        let expected = Game::dual(Game::choice(Game::dual(g("a")), Game::dual(g("b"))));
        assert_eq!(got, expected);
    }

    #[test]
    fn printing_examples() {
        assert_eq!(
            format_game(&Game::star(Game::choice(g("a"), g("b")))),
            "(a ++ b)*"
        );
        assert_eq!(
            format_game(&Game::dual(Game::test(Formula::eq(
                Term::var("y"),
                Term::int(1)
            )))),
            "(?y=1)^d"
        );
        assert_eq!(
            format_game(&Game::assign("x", Term::var("x").add(Term::int(1)))),
            "x:=x+1"
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_formula("x=\n  @").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 3);
        let err = parse_game("x := ").unwrap_err();
        assert!(err.msg.contains("expected term"));
    }

    #[test]
    fn vars_of_assignment_sequence() {
        let vs = game_vars(&g("x:=a; a:=0"));
        assert_eq!(
            vs.bound.iter().cloned().collect::<Vec<_>>(),
            vec!["a".to_string(), "x".to_string()]
        );
        assert_eq!(vs.free.iter().cloned().collect::<Vec<_>>(), vec!["a".to_string()]);
    }

    #[test]
    fn vars_of_quantified_formula() {
        let vs = formula_vars(&f("\\forall y (x>=y)"));
        assert_eq!(vs.free.iter().cloned().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(vs.bound.iter().cloned().collect::<Vec<_>>(), vec!["y"]);
    }

    #[test]
    fn walle_game_bound_vars() {
        let game = g("(u:=1 -- u:=-1); (g:=1 ++ g:=-1); t:=0; {w'=v, v'=u, e'=f, f'=g, t'=1 & t<=1}^d");
        let vs = game_vars(&game);
        let expected: std::collections::BTreeSet<String> =
            ["u", "g", "t", "w", "v", "e", "f"].iter().map(|s| s.to_string()).collect();
        assert_eq!(vs.bound, expected);
    }

    #[test]
    fn substitute_examples() {
        // <x:=θ> axiom shape: x>0 with x ↦ x+1.
        let got = substitute(&f("x>0"), "x", &t("x+1")).unwrap();
        assert_eq!(got, f("x+1>0"));
        // Identity.
        let phi = f("<(x:=x-1)*> x>=0");
        assert_eq!(substitute(&phi, "x", &t("x")).unwrap(), phi);
        // Capture under a quantifier.
        let err = substitute(&f("\\forall y (x>=y)"), "x", &t("y")).unwrap_err();
        match err {
            SubstError::Admissibility { binder, .. } => assert!(binder.contains('y')),
            other => panic!("expected admissibility error, got {other:?}"),
        }
    }

    #[test]
    fn substitute_no_binders_never_errors() {
        let phi = f("p(x) & x>=0 | x+y>2");
        assert!(substitute(&phi, "x", &t("y*y")).is_ok());
    }

    #[test]
    fn substitute_unchanged_when_not_free() {
        let phi = f("\\forall x (x>=0)");
        assert_eq!(substitute(&phi, "x", &t("7")).unwrap(), phi);
    }

    #[test]
    fn uniform_substitution_identity() {
        let phi = f("\\forall x (p(x) -> p(x))");
        let template = parse_template("p(#1)").unwrap();
        assert_eq!(uniform_substitute(&phi, "p", 1, &template).unwrap(), phi);
    }

    #[test]
    fn uniform_substitution_loop_technique() {
        // The completeness-style step: all occurrences are p(x) and the
        // instantiated template reads only x, so enclosing binders of x are
        // no obstacle.
        let phi = f("\\forall x ((0<=x & x<1) | <x:=x-1> p(x) -> p(x)) -> (x>=0 -> p(x))");
        let template = parse_template("<(x:=x-1)*> (0<=#1 & #1<1)").unwrap();
        let got = uniform_substitute(&phi, "p", 1, &template).unwrap();
        let orgfo = "<(x:=x-1)*> (0<=x & x<1)";
        let expected = f(&format!(
            "\\forall x ((0<=x & x<1) | <x:=x-1> {orgfo} -> {orgfo}) -> (x>=0 -> {orgfo})"
        ));
        assert_eq!(got, expected);
    }

    #[test]
    fn uniform_substitution_capture_rejected() {
        // Nullary p replaced by x=0 under a modality binding x.
        let phi = f("[x:=1] p");
        let template = parse_template("x=0").unwrap();
        let err = uniform_substitute(&phi, "p", 0, &template).unwrap_err();
        assert!(matches!(err, SubstError::Admissibility { .. }));
        // But fine outside any binder.
        let ok = uniform_substitute(&f("p -> p"), "p", 0, &template).unwrap();
        assert_eq!(ok, f("x=0 -> x=0"));
    }

    #[test]
    fn roundtrip_spec_corpus() {
        let formulas = [
            "<(x:=0 -- x:=1)*> x=0",
            "x=0 -> <(((x:=0 ++ x:=1)^d)*)^d> x=0",
            "x>=0 -> <(x:=x-1)*> (0<=x & x<1)",
            "\\forall x ((0<=x & x<1) | p(x-1) -> p(x)) -> (x>=0 -> p(x))",
            "x=1 & a=1 -> <((x:=a; a:=0) -- x:=0)*> x!=1",
            "<{x'=v, v'=a, t'=1 & t<=1}> true",
            "[a] f <-> !<a> !f",
            "<a ++ b> f <-> <a> f | <b> f",
            "<{x'=1}> x>0 <-> \\exists t (t>=0 & <x:=x+t> x>0)",
            "x=0 -> (0=0 | 1=0)",
            "\\exists x (x>0 & x<0)",
            "p(0) -> p(0)",
            "!<a> !f <-> [a] f",
            "true",
            "false",
            "x!=1",
            "7/2*x-3<=y",
        ];
        for s in formulas {
            let ast = f(s);
            let printed = format_formula(&ast);
            let reparsed = parse_formula(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` (from `{s}`): {e}"));
            assert_eq!(reparsed, ast, "roundtrip failed for `{s}` printed as `{printed}`");
        }
        let games = [
            "x:=0 -- x:=1",
            "(x:=x+1; {x'=1}^d) ++ x:=x-1",
            "t0:=t; {t'=1}; (z:=t; {z'=-1})^d; ?(z>=t0 -> z<=1)",
            "((y:=y+1)^d)*^d",
            "(?false)^d",
            "y:=0; (?y=1)^d",
            "(x:=x-y; y:=x) -- x:=0",
            "{x'=x}",
            "(x:=1)^d",
            "?x>=0",
        ];
        for s in games {
            let ast = g(s);
            let printed = format_game(&ast);
            let reparsed = parse_game(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` (from `{s}`): {e}"));
            assert_eq!(reparsed, ast, "roundtrip failed for `{s}` printed as `{printed}`");
        }
    }

    #[test]
    fn vars_monotone_under_subgame_embedding() {
        let outer = g("((x:=a; a:=0) -- x:=0)*");
        let inner = g("x:=a; a:=0");
        let vo = game_vars(&outer);
        let vi = game_vars(&inner);
        assert!(vi.free.is_subset(&vo.free));
        assert!(vi.bound.is_subset(&vo.bound));
    }

    #[test]
    fn fresh_name_picks_smallest_suffix() {
        let taken: std::collections::BTreeSet<String> =
            ["t", "t0", "t1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh_name("t", &taken), "t2");
        assert_eq!(fresh_name("z", &taken), "z");
    }
}
