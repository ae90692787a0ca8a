use std::fmt::{self, Write};

use super::Formula;

// Atoms under `~` and quantifiers get parentheses for readability; the parser
// accepts both forms. Bounded quantifiers render as `E{M}x`, which the parser
// deliberately rejects.
pub(super) fn write_formula(out: &mut impl Write, f: &Formula) -> fmt::Result {
    match f {
        Formula::Membership(a, b) => write!(out, "{a} in {b}"),
        Formula::Equality(a, b) => write!(out, "{a} = {b}"),
        Formula::Negation(body) => {
            out.write_char('~')?;
            write_operand(out, body)
        }
        Formula::Disjunction(l, r) => {
            out.write_char('(')?;
            write_formula(out, l)?;
            out.write_str(" | ")?;
            write_formula(out, r)?;
            out.write_char(')')
        }
        Formula::Exists(v, body) => {
            write!(out, "E{v} ")?;
            write_operand(out, body)
        }
        Formula::BoundedExists(v, body) => {
            write!(out, "E{{M}}{v} ")?;
            write_operand(out, body)
        }
    }
}

fn write_operand(out: &mut impl Write, f: &Formula) -> fmt::Result {
    if matches!(f, Formula::Membership(..) | Formula::Equality(..)) {
        out.write_char('(')?;
        write_formula(out, f)?;
        out.write_char(')')
    } else {
        write_formula(out, f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_examples() {
        assert_eq!(parse("Ex Ay ~(y in x)").unwrap().to_string(), "Ex ~Ey ~~(y in x)");
        assert_eq!(parse("(x in #2 | x = y)").unwrap().to_string(), "(x in #2 | x = y)");
        assert_eq!(parse("Ex (x in y)").unwrap().relativize().to_string(), "E{M}x (x in y)");
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            prop::sample::select(vec!["x", "y", "z", "w1", "a_b"]).prop_map(Term::var),
            (0usize..20).prop_map(Term::Const),
        ]
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::mem(a, b)),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::eq(a, b)),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (prop::sample::select(vec!["x", "y", "z", "q"]), inner)
                    .prop_map(|(v, b)| Formula::exists(v, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(f in arb_formula()) {
            let text = f.to_string();
            prop_assert_eq!(parse(&text).unwrap(), f);
        }

        #[test]
        fn relativize_keeps_free_vars(f in arb_formula()) {
            prop_assert_eq!(f.relativize().free_vars(), f.free_vars());
        }

        #[test]
        fn closure_idempotent_and_monotone(f in arb_formula(), g in arb_formula()) {
            let one = FormulaPack::new("a", vec![f.clone()]).subformula_closure();
            prop_assert_eq!(&one.subformula_closure().formulas, &one.formulas);
            let two = FormulaPack::new("b", vec![f, g]).subformula_closure();
            prop_assert!(one.formulas.iter().all(|x| two.formulas.contains(x)));
            prop_assert!(two.is_subformula_closed());
        }

        #[test]
        fn substitution_never_binds(f in arb_formula(), c in 0usize..20) {
            let free = f.free_vars();
            if let Some(first) = free.first() {
                let b = BTreeMap::from([(first.clone(), c)]);
                let g = f.substitute(&b).unwrap();
                let rest: Vec<_> = free[1..].to_vec();
                prop_assert_eq!(g.free_vars(), rest);
                prop_assert_eq!(g.quantifier_depth(), f.quantifier_depth());
            }
        }
    }
}
