//! The order-3 inflation of the triangle, its gamma vectors and the
//! isomorphism classes of party pairs, checked against brute force.

use netbell::netcore::{
    are_isomorphic, build_theorem_inflation, gamma_vector, isomorphism_classes, oracle_isomorphic, validate_inflation,
};

fn main() -> netbell::Result<()> {
    let spec = build_theorem_inflation(3)?;
    print!("{}", spec.to_text());
    println!("{}", validate_inflation(&spec).summary(&spec));

    let idx = |l: &str| spec.party_index(l);
    for (p, q) in [("B", "C'"), ("A", "B"), ("A'", "B'"), ("B", "C"), ("B'", "C'")] {
        println!("gamma({p},{q}) = {}", gamma_vector(&spec, idx(p)?, idx(q)?)?);
    }
    let ab = are_isomorphic(&spec, (idx("A")?, idx("B")?), (idx("A'")?, idx("B'")?))?;
    let bc = are_isomorphic(&spec, (idx("B")?, idx("C")?), (idx("B'")?, idx("C'")?))?;
    println!("AB ~ A'B': {ab}   BC ~ B'C': {bc}");

    for n in [3, 4] {
        let spec = build_theorem_inflation(n)?;
        let size = spec.size();
        let (mut checked, mut agree) = (0, 0);
        for a in 0..size {
            for b in (0..size).filter(|&b| b != a) {
                for c in 0..size {
                    for d in (0..size).filter(|&d| d != c) {
                        if spec.type_of(a) != spec.type_of(c) || spec.type_of(b) != spec.type_of(d) {
                            continue;
                        }
                        checked += 1;
                        agree += usize::from(are_isomorphic(&spec, (a, b), (c, d))? == oracle_isomorphic(&spec, (a, b), (c, d))?);
                    }
                }
            }
        }
        let classes = isomorphism_classes(&spec).len();
        println!("N = {n}: {classes} classes of ordered pairs, signature test agrees with brute force on {agree}/{checked}");
    }
    Ok(())
}
