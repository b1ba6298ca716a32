use causaloop::affects::{AffectsEngine, Relation};
use causaloop::compat::{check_compat, CompatVerdict};
use causaloop::model::ModelBuilder;
use causaloop::spacetime::{Embedding, Point};

fn pt(x: i128, t: i128) -> Point {
    Point::frac(&[x, t], 1)
}

#[test]
fn reducible_relations_are_not_checked() {
    // Y = A: "AB affects Y" holds but reduces to "A affects Y"
    let m = ModelBuilder::new()
        .bits(&["A", "B", "X", "Y"])
        .uniform(&["A", "B", "X"])
        .mechanism("Y", &["A"], |v| v[0])
        .build()
        .unwrap();
    let e = AffectsEngine::new(&m);
    let ab_y = Relation::named(m.graph(), "AB", "Y", "", "").unwrap();
    assert!(e.holds(ab_y).unwrap());
    assert!(!e.is_irreducible(ab_y).unwrap());
    let verdicts = e.enumerate(false, 7).unwrap();

    let mut emb = Embedding::minkowski(1).unwrap();
    for (n, p) in [("A", pt(0, 0)), ("Y", pt(0, 1)), ("B", pt(5, 0)), ("X", pt(-5, 0))] {
        emb.place_at(n, p).unwrap();
    }
    // F(Y) is outside F(B), so only the reducible relation is violated
    assert_eq!(check_compat(m.graph(), &verdicts, &emb).unwrap().verdict, CompatVerdict::Compatible);

    let moved = emb.with("A", pt(5, -1)).unwrap();
    let r = check_compat(m.graph(), &verdicts, &moved).unwrap();
    assert_eq!(r.verdict, CompatVerdict::Incompatible);
    assert!(r.violations.iter().any(|v| v.relation == "A affects Y"));
}
