//! Printing a program and parsing it back yields the same syntax tree.

use hg_sir::ast::*;
use hg_sir::parse_program;
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "x", "y", "r", "s", "v1", "tmp_2"]).prop_map(String::from)
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..1000).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        ident().prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let ops = prop::sample::select(vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::And,
            BinOp::Or,
        ]);
        prop_oneof![
            (prop::sample::select(vec![UnOp::Neg, UnOp::Not]), inner.clone())
                .prop_map(|(o, e)| Expr::Unary(o, Box::new(e))),
            (ops, inner.clone(), inner).prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
        ]
    })
}

fn kind(labels: usize) -> impl Strategy<Value = StmtKind> {
    let label = (0..labels).prop_map(|i| format!("L{i}"));
    prop_oneof![
        (ident(), expr()).prop_map(|(lhs, e)| StmtKind::Assign { lhs, rhs: Rhs::Expr(e) }),
        (ident(), ident(), ident()).prop_map(|(lhs, s, f)| StmtKind::Assign { lhs, rhs: Rhs::Field(s, f) }),
        (ident(), ident()).prop_map(|(lhs, c)| StmtKind::Assign { lhs, rhs: Rhs::New(c) }),
        ident().prop_map(|lhs| StmtKind::Assign { lhs, rhs: Rhs::Null }),
        (ident(), ident(), expr()).prop_map(|(obj, field, value)| StmtKind::Store { obj, field, value }),
        (ident(), ident(), prop::collection::vec(ident(), 0..3))
            .prop_map(|(recv, method, args)| StmtKind::Call { recv, method, args }),
        label.clone().prop_map(StmtKind::Goto),
        (expr(), label).prop_map(|(e, l)| StmtKind::If(e, l)),
        (prop::sample::select(vec![Level::Low, Level::High]), ident()).prop_map(|(l, x)| StmtKind::Output(l, x)),
    ]
}

fn ty() -> impl Strategy<Value = Ty> {
    prop_oneof![
        Just(Ty::Prim(PrimTy::Int)),
        Just(Ty::Prim(PrimTy::Bool)),
        prop::sample::select(vec!["A", "B", "Node"]).prop_map(|c| Ty::Class(c.to_string())),
    ]
}

fn method() -> impl Strategy<Value = Method> {
    (
        ident(),
        prop::collection::vec((ident(), ty()), 0..3),
        prop::collection::vec((ident(), ty()), 0..3),
        prop::collection::vec(kind(3), 3..8),
    )
        .prop_map(|(name, params, locals, kinds)| {
            let body = kinds
                .into_iter()
                .enumerate()
                .map(|(i, kind)| Stmt {
                    label: (i < 3).then(|| format!("L{i}")),
                    kind,
                    pos: Pos::default(),
                })
                .collect();
            Method {
                name,
                params,
                locals,
                body,
                pos: Pos::default(),
            }
        })
}

fn class() -> impl Strategy<Value = ClassDecl> {
    (
        prop::sample::select(vec!["A", "B", "Node"]),
        prop::option::of(prop::sample::select(vec!["A", "B"])),
        prop::collection::vec((ident(), prop::sample::select(vec![PrimTy::Int, PrimTy::Bool])), 0..3),
        prop::collection::vec((ident(), prop::sample::select(vec!["A", "B"])), 0..3),
    )
        .prop_map(|(name, parent, prim, refs)| ClassDecl {
            name: name.into(),
            parent: parent.map(String::from),
            prim_fields: prim,
            ref_fields: refs.into_iter().map(|(n, c)| (n, c.to_string())).collect(),
            pos: Pos::default(),
        })
}

proptest! {
    #[test]
    fn parse_after_print_is_identity(
        classes in prop::collection::vec(class(), 0..3),
        methods in prop::collection::vec(method(), 1..3),
    ) {
        let p = Program { classes, methods };
        let text = p.to_string();
        let back = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, p);
    }
}
