//! Affine permutations of Z_P: composition, inversion, commutation and fixed
//! points, including the reduction of a cycle word.
//!
//! cargo run --example affine_algebra

use qldpc_apm::affine::{commutation_residue, AffinePerm, Exponent, PermWord};

fn main() {
    let p = 768;
    let f = AffinePerm::new(763, 435, p).unwrap();
    let g = AffinePerm::new(5, 12, p).unwrap();
    let fg = f.compose(&g).unwrap();
    println!("f = {f}, g = {g}");
    println!("f∘g = {fg}, f^-1 = {}", f.invert());
    println!("f∘f^-1 is identity: {}", f.compose(&f.invert()).unwrap().is_identity());
    println!(
        "commute: {} (residue {})",
        f.commutes(&g).unwrap(),
        commutation_residue(&f, &g)
    );
    println!("fixed points of f∘g: {}", fg.fixed_point_count());

    let word = PermWord::new(vec![
        (f, Exponent::Plus),
        (g, Exponent::Minus),
        (g, Exponent::Plus),
        (f, Exponent::Minus),
    ])
    .unwrap();
    println!("f g^-1 g f^-1 reduces to {}", word.reduce());
}
